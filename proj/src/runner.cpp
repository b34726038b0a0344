#include "nlbif/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace nlbif {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(std::min<long>(v, hw));
  }
  return static_cast<int>(hw);
}

/// index-ordered parallel for; results land in caller-owned slots, so the
/// schedule cannot leak into the artifacts
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  int workers = std::min<std::size_t>(thread_cap(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Thresholds compute_thresholds(const Problem& pb) {
  std::optional<VectorField> adv;
  if (pb.mode == Mode::linear_advection && !pb.alpha.is_zero()) adv = pb.alpha;
  EllipticOperator op(pb.grid, adv);
  EigenPair ep = principal_eigenpair(op);
  MatrixEigen me = coupling_eigen(pb.A);
  Thresholds th;
  th.lambda1 = ep.lambda;
  th.lambda_A = me.lambda_A;
  th.t1 = ep.lambda / me.lambda_A;
  th.eig_residual = ep.residual;
  th.eig_iterations = ep.iterations;
  return th;
}

SweepOutcome solve_at_t(const ScenarioConfig& cfg, const Problem& pb, const State& V, double t,
                        double multiplier) {
  SweepOutcome out;
  out.multiplier = multiplier;
  out.t = t;

  bool any_fault = false;
  std::string fault_msg;
  bool all_zero = true;
  for (double eps : cfg.seed_amplitudes) {
    State seed(pb.grid);
    seed.u.values = eps * V.u.values;
    seed.v.values = eps * V.v.values;
    try {
      NewtonResult nr = newton_solve(pb, t, seed, cfg.newton_tol, cfg.newton_max_iter,
                                     cfg.blowup_cap);
      if (!nr.converged) {
        any_fault = true;
        fault_msg = nr.reason;
        all_zero = false;
        continue;
      }
      double sup = nr.U.linf();
      if (sup <= cfg.zero_tol) continue;  // trivial solution
      all_zero = false;
      auto pos = positivity_check(nr.U);
      if (pos.positive) {
        out.outcome = "positive";
        out.amplitude = nr.U.u.max() + nr.U.v.max();
        out.margin = pos.margin;
        out.residual_norm = nr.residual_norm;
        out.sup_norm = sup;
        out.iterations = nr.iterations;
        return out;
      }
    } catch (const SolverError& e) {
      any_fault = true;
      fault_msg = e.what();
      all_zero = false;
    }
  }
  if (all_zero) {
    out.outcome = "zero";
    out.sup_norm = 0.0;
  } else if (any_fault) {
    out.outcome = "fault";
    out.fault = fault_msg;
  } else {
    out.outcome = "mixed";
  }
  return out;
}

GridField smooth_bump(const Grid& g) {
  // product of half-wave sines, the canonical smooth positive zero-trace field
  return GridField::sample(g, [&](std::array<double, 2> x) {
    double v = std::sin(M_PI * (x[0] - g.low(0)) / (g.high(0) - g.low(0)));
    if (g.dim() == 2) v *= std::sin(M_PI * (x[1] - g.low(1)) / (g.high(1) - g.low(1)));
    return v;
  });
}

GridField random_positive(const Grid& g, std::mt19937_64& rng, double lo = 0.1, double hi = 1.1) {
  std::uniform_real_distribution<double> dist(lo, hi);
  GridField f(g);
  for (Eigen::Index m = 0; m < f.values.size(); ++m) f.values[m] = dist(rng);
  return f;
}

}  // namespace

VerifyReport run_verify(const ScenarioConfig& cfg, const Problem& pb) {
  VerifyReport rep;
  rep.thresholds = compute_thresholds(pb);
  auto [t1, V] = bifurcation_seed(pb);

  struct Task {
    double multiplier;
    double t;
    bool unit;  // the t = 1 read-off of the original problem
  };
  std::vector<Task> tasks;
  for (double m : cfg.multipliers) tasks.push_back({m, m * t1, false});
  tasks.push_back({1.0 / t1, 1.0, true});

  std::vector<SweepOutcome> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    results[i] = solve_at_t(cfg, pb, V, tasks[i].t, tasks[i].multiplier);
  });

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].unit) {
      rep.at_unit_t = results[i];
    } else {
      rep.sweep.push_back(results[i]);
    }
  }
  std::sort(rep.sweep.begin(), rep.sweep.end(),
            [](const SweepOutcome& a, const SweepOutcome& b) { return a.t < b.t; });

  rep.lambda_gap = rep.thresholds.lambda_A - rep.thresholds.lambda1;
  bool ok = true;
  for (const auto& s : rep.sweep) {
    if (s.multiplier < 1.0 && s.outcome != "zero") ok = false;
    if (s.multiplier > 1.0 && s.outcome != "positive") ok = false;
  }
  // existence at t = 1 iff lambda_A exceeds the relevant lambda_1
  if (rep.at_unit_t) {
    const std::string& u = rep.at_unit_t->outcome;
    rep.unit_consistent = rep.lambda_gap > 0.0 ? u == "positive" : u == "zero";
    ok = ok && rep.unit_consistent;
  }
  rep.pass = ok;
  return rep;
}

Branch run_branch(const ScenarioConfig& cfg, const Problem& pb) {
  return continue_branch(pb, cfg.continuation);
}

DirectionReport run_direction(const ScenarioConfig& cfg, const Problem& pb,
                              std::optional<Branch>* branch_out) {
  Branch br = continue_branch(pb, cfg.continuation);
  DirectionReport rep = analyze_direction(pb, br);
  if (branch_out) *branch_out = std::move(br);
  return rep;
}

HypothesisReport run_hypotheses(const ScenarioConfig& cfg, std::uint64_t seed,
                                bool identity_only) {
  HypothesisReport rep;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    rep.items.push_back({name, pass, detail});
    rep.pass = rep.pass && pass;
  };

  Grid g = make_grid(cfg);
  VectorField alpha = make_field(cfg.alpha, g, "advection.alpha");
  VectorField beta = make_field(cfg.beta, g, "advection.beta");

  // mode constraints are report content here, not hard errors
  {
    auto bad = validate_problem(cfg.mode, g, cfg.A, cfg.p, cfg.q, cfg.gamma, alpha, beta,
                                cfg.relax_divergence);
    std::string detail;
    for (const auto& b : bad) detail += (detail.empty() ? "" : "; ") + b;
    add("mode-constraints", bad.empty(), detail);
  }

  // advection identity on the configured fields
  {
    GridField u = smooth_bump(g);
    auto identity_item = [&](const VectorField& field, const char* tag, const Rational& expo) {
      double pv = std::max(1.0, expo.value());
      double res = advection_identity_residual(u, field, pv);
      GridField conv = advect(field, u);
      double ref = 0.0;
      for (Eigen::Index m = 0; m < u.values.size(); ++m)
        ref += std::pow(u.values[m], pv) * std::abs(conv.values[m]);
      ref *= pv * g.node_weight();
      bool ok = std::abs(res) <= std::max(1e-8, 0.02 * ref);
      add(std::string("advection-identity-") + tag, ok,
          "residual " + fmt17(res) + " against scale " + fmt17(ref));
    };
    identity_item(alpha, "alpha", cfg.p);
    identity_item(beta, "beta", cfg.q);
  }
  if (identity_only) return rep;

  std::mt19937_64 rng(seed);

  auto equation_side = [&](const ScenarioConfig::KernelCfg& kcfg,
                           const ScenarioConfig::ReactionCfg& rcfg, const std::string& suffix,
                           Reaction::Major major) {
    Kernel kern = make_kernel(kcfg, g.dim(), "kernel_" + suffix);
    Reaction react = make_reaction(rcfg, cfg.gamma, major, "reaction_" + suffix);

    // (K1)/(K2) at the discrete level: nonnegative, bounded, not identically zero
    std::optional<KernelMatrix> M;
    try {
      M.emplace(kern, g);
      add("kernel-nonneg-bounded-" + suffix, true, "sup " + fmt17(M->kernel_sup()));
    } catch (const HypothesisError& e) {
      add("kernel-nonneg-bounded-" + suffix, false, e.what());
      return;
    }

    // diagonal positivity in the eps-ball
    {
      double hmax = g.spacing(0);
      if (g.dim() == 2) hmax = std::max(hmax, g.spacing(1));
      double eps = cfg.kernel_class_eps > 0.0 ? cfg.kernel_class_eps : 4.0 * hmax;
      try {
        auto kc = check_kernel_class(kern, g, eps);
        add("kernel-class-" + suffix, kc.pass, kc.detail);
      } catch (const ConfigError& e) {
        add("kernel-class-" + suffix, false, e.what());
      }
    }

    // homogeneity of the nonlocal response, exact for the built-in families
    {
      GridField u = random_positive(g, rng), v = random_positive(g, rng);
      GridField base = apply_nonlocal(*M, react, u, v);
      double worst = 0.0;
      for (double xi : {0.5, 2.0, 7.0}) {
        GridField us(g), vs(g);
        us.values = xi * u.values;
        vs.values = xi * v.values;
        GridField scaled = apply_nonlocal(*M, react, us, vs);
        double factor = std::pow(xi, cfg.gamma.value());
        double err = (scaled.values - factor * base.values).cwiseAbs().maxCoeff();
        worst = std::max(worst, err / std::max(1e-300, base.linf()));
      }
      add("homogeneity-" + suffix, worst <= 1e-12, "max relative defect " + fmt17(worst));
    }

    // lower bound f(t,s) >= eps0 |major|^gamma on a sample lattice
    {
      double eps0 = react.eps0();
      double worst = 0.0;
      for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
          double tt = 0.15 * i, ss = 0.15 * j;
          double m = major == Reaction::Major::first ? tt : ss;
          double defect = react(tt, ss) - eps0 * std::pow(m, cfg.gamma.value());
          worst = std::min(worst, defect);
        }
      }
      add("lower-bound-" + suffix, worst >= 0.0, "min defect " + fmt17(worst));
    }

    // C1 consistency of the declared partial derivatives
    {
      std::uniform_real_distribution<double> dist(0.3, 1.7);
      double worst = 0.0;
      const double h = 1e-6;
      for (int k = 0; k < 25; ++k) {
        double tt = dist(rng), ss = dist(rng);
        double fd_t = (react(tt + h, ss) - react(tt - h, ss)) / (2 * h);
        double fd_s = (react(tt, ss + h) - react(tt, ss - h)) / (2 * h);
        double scale = std::max(1.0, std::abs(fd_t) + std::abs(fd_s));
        worst = std::max(worst, std::abs(fd_t - react.d_first(tt, ss)) / scale);
        worst = std::max(worst, std::abs(fd_s - react.d_second(tt, ss)) / scale);
      }
      add("derivative-consistency-" + suffix, worst <= 1e-6, "max defect " + fmt17(worst));
    }

    // sup bound with quadrature slack
    {
      double hmax = g.spacing(0);
      if (g.dim() == 2) hmax = std::max(hmax, g.spacing(1));
      bool ok = true;
      double worst = 0.0;
      for (int k = 0; k < 50; ++k) {
        GridField u = random_positive(g, rng), v = random_positive(g, rng);
        auto [lhs, rhs] = check_phi_bound(*M, react, u, v);
        double fmax = rhs / std::max(1e-300, M->kernel_sup() * g.measure());
        double slack = lhs - rhs;
        worst = std::max(worst, slack);
        ok = ok && slack <= 2.0 * hmax * fmax;
      }
      add("sup-bound-" + suffix, ok, "max slack " + fmt17(worst));
    }

    // vanishing double integral forces the vanishing field
    {
      GridField zero(g);
      double at_zero = kernel_weighted_mass(*M, cfg.gamma.value(), zero);
      GridField w = random_positive(g, rng);
      w.values /= w.linf();
      double at_rand = kernel_weighted_mass(*M, cfg.gamma.value(), w);
      add("vanishing-identity-" + suffix, at_zero == 0.0 && at_rand > 0.0,
          "zero field " + fmt17(at_zero) + ", random field " + fmt17(at_rand));
    }
  };
  equation_side(cfg.kernel_u, cfg.reaction_u, "u", Reaction::Major::first);
  equation_side(cfg.kernel_v, cfg.reaction_v, "v", Reaction::Major::second);
  return rep;
}

// ---------------------------------------------------------------------------
// artifacts

std::string branch_csv(const Branch& branch) {
  std::string out = "epsilon,t,amplitude,min_u,min_v,residual_norm,rho_norm\n";
  for (const auto& pt : branch.points) {
    out += fmt17(pt.epsilon) + "," + fmt17(pt.t) + "," + fmt17(pt.amplitude) + "," +
           fmt17(pt.U.u.min()) + "," + fmt17(pt.U.v.min()) + "," + fmt17(pt.residual_norm) + "," +
           fmt17(pt.rho_norm) + "\n";
  }
  if (!branch.truncation_reason.empty()) out += "# truncated: " + branch.truncation_reason + "\n";
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

ordered_json sweep_json(const SweepOutcome& s) {
  ordered_json j;
  j["multiplier"] = s.multiplier;
  j["t"] = s.t;
  j["outcome"] = s.outcome;
  j["amplitude"] = s.amplitude;
  j["margin"] = s.margin;
  j["residual_norm"] = s.residual_norm;
  j["sup_norm"] = s.sup_norm;
  j["iterations"] = s.iterations;
  if (!s.fault.empty()) j["fault"] = s.fault;
  return j;
}

ordered_json header_json(const ScenarioConfig& cfg) {
  ordered_json j;
  j["scenario"] = cfg.name;
  j["kind"] = to_string(cfg.kind);
  j["mode"] = to_string(cfg.mode);
  j["dim"] = cfg.dim;
  j["n"] = cfg.dim == 2 ? ordered_json::array({cfg.n[0], cfg.n[1]})
                        : ordered_json::array({cfg.n[0]});
  j["seed"] = cfg.seed;
  return j;
}

ordered_json thresholds_json(const Thresholds& th) {
  ordered_json j;
  j["lambda1"] = th.lambda1;
  j["lambda_A"] = th.lambda_A;
  j["t1"] = th.t1;
  j["eig_residual"] = th.eig_residual;
  j["eig_iterations"] = th.eig_iterations;
  return j;
}

ordered_json direction_json(const DirectionReport& d) {
  ordered_json j;
  j["delta"] = d.delta;
  j["case_id"] = d.case_id;
  j["denominator"] = d.denominator;
  j["closed_form_limit"] = d.closed_form_limit;
  j["alt_sign_limit"] = d.alt_sign_limit;
  j["degenerate"] = d.degenerate;
  j["empirical_limit"] = d.empirical_limit;
  j["direction"] = to_string(d.direction);
  j["verdict"] = to_string(d.verdict);
  ordered_json samples = ordered_json::array();
  for (const auto& s : d.empirical_samples) {
    ordered_json e;
    e["epsilon"] = s.epsilon;
    e["slope_form"] = s.slope_form;
    e["quotient_form"] = s.quotient_form;
    samples.push_back(e);
  }
  j["samples"] = samples;
  return j;
}

}  // namespace

RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunArtifacts art;
  std::ostringstream summary;
  ordered_json report = header_json(cfg);

  auto finish_json = [&](int exit_code) {
    std::string path = out_dir + "/" + cfg.out_stem + "_report.json";
    write_file(path, report.dump(2) + "\n");
    art.files.push_back(path);
    art.exit_code = exit_code;
    art.summary = summary.str();
  };

  switch (cfg.kind) {
    case RunKind::eig: {
      Problem pb = build_problem(cfg);
      Thresholds th = compute_thresholds(pb);
      report["thresholds"] = thresholds_json(th);
      summary << "lambda1 = " << fmt17(th.lambda1) << ", lambda_A = " << fmt17(th.lambda_A)
              << ", t1 = " << fmt17(th.t1) << "\n";
      finish_json(0);
      break;
    }
    case RunKind::verify: {
      Problem pb = build_problem(cfg);
      VerifyReport vr = run_verify(cfg, pb);
      report["thresholds"] = thresholds_json(vr.thresholds);
      ordered_json sweep = ordered_json::array();
      for (const auto& s : vr.sweep) sweep.push_back(sweep_json(s));
      report["sweep"] = sweep;
      if (vr.at_unit_t) {
        report["original_problem"] = sweep_json(*vr.at_unit_t);
        report["original_problem"]["lambda_gap"] = vr.lambda_gap;
        report["original_problem"]["consistent"] = vr.unit_consistent;
      }
      report["verdict"] = vr.pass ? "pass" : "fail";
      summary << "t1 = " << fmt17(vr.thresholds.t1) << "\n";
      for (const auto& s : vr.sweep)
        summary << "  t/t1 = " << s.multiplier << " -> " << s.outcome << "\n";
      summary << "verdict: " << (vr.pass ? "pass" : "fail") << "\n";
      finish_json(vr.pass ? 0 : 2);
      break;
    }
    case RunKind::branch: {
      Problem pb = build_problem(cfg);
      Branch br = run_branch(cfg, pb);
      std::string csv_path = out_dir + "/" + cfg.out_stem + "_branch.csv";
      write_file(csv_path, branch_csv(br));
      art.files.push_back(csv_path);
      report["t1"] = br.t1;
      report["points"] = br.points.size();
      report["direction"] = to_string(br.direction);
      if (!br.truncation_reason.empty()) report["truncated"] = br.truncation_reason;
      double min_t = br.t1;
      for (const auto& pt : br.points) min_t = std::min(min_t, pt.t);
      report["min_t"] = min_t;
      report["t_below_t1"] = min_t < br.t1;
      summary << "branch: " << br.points.size() << " points, direction "
              << to_string(br.direction) << "\n";
      finish_json(0);
      break;
    }
    case RunKind::direction: {
      Problem pb = build_problem(cfg);
      std::optional<Branch> br_store;
      DirectionReport dr = run_direction(cfg, pb, &br_store);
      const Branch& br = *br_store;
      std::string csv_path = out_dir + "/" + cfg.out_stem + "_branch.csv";
      write_file(csv_path, branch_csv(br));
      art.files.push_back(csv_path);
      report["t1"] = br.t1;
      report["direction_report"] = direction_json(dr);
      double min_t = br.t1;
      for (const auto& pt : br.points) min_t = std::min(min_t, pt.t);
      report["min_t"] = min_t;
      report["t_below_t1"] = min_t < br.t1;
      summary << to_string(dr.direction) << " (" << to_string(dr.verdict) << ")";
      if (dr.degenerate) summary << " [degenerate closed form]";
      summary << "\n  closed form " << fmt17(dr.closed_form_limit) << ", alt sign "
              << fmt17(dr.alt_sign_limit) << ", empirical " << fmt17(dr.empirical_limit) << "\n";
      finish_json(0);
      break;
    }
    case RunKind::hypotheses:
    case RunKind::identity_check: {
      HypothesisReport hr =
          run_hypotheses(cfg, cfg.seed, cfg.kind == RunKind::identity_check);
      ordered_json items = ordered_json::array();
      for (const auto& item : hr.items) {
        ordered_json ij;
        ij["name"] = item.name;
        ij["pass"] = item.pass;
        ij["detail"] = item.detail;
        items.push_back(ij);
        summary << (item.pass ? "pass" : "FAIL") << "  " << item.name << "\n";
      }
      report["checks"] = items;
      report["verdict"] = hr.pass ? "pass" : "fail";
      finish_json(hr.pass ? 0 : 2);
      break;
    }
  }
  return art;
}

}  // namespace nlbif
