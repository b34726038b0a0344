// Acceptance suite: runs every top-level requirement at its stated tolerance
// and prints one pass/fail line per criterion.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <lapacke.h>

#include <Eigen/Dense>

#include "nlbif/runner.hpp"

using namespace nlbif;

namespace {

const std::string kConfigDir = NLBIF_CONFIG_DIR;
int failures = 0;

void report(int k, const std::string& desc, bool ok, const std::string& detail = "") {
  std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", k, desc.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

double dense_min_real_eigenvalue(const Eigen::MatrixXd& M) {
  int n = static_cast<int>(M.rows());
  std::vector<double> a(M.data(), M.data() + static_cast<std::size_t>(n) * n);
  std::vector<double> wr(n), wi(n);
  int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(), wi.data(),
                           nullptr, n, nullptr, n);
  if (info != 0) return std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k)
    if (std::abs(wi[k]) <= 1e-8 * std::max(1.0, std::abs(wr[k]))) best = std::min(best, wr[k]);
  return best;
}

// independent scalar solve of -u'' + (int u) u = 3 t u on (0, pi)
Eigen::VectorXd scalar_reduction_solve(int n, double t) {
  double h = M_PI / (n + 1);
  Eigen::VectorXd u(n);
  double amp = (3.0 * t - 1.0) / 2.0;
  for (int i = 0; i < n; ++i) u[i] = amp * std::sin((i + 1) * h);
  for (int it = 0; it < 100; ++it) {
    double I = h * u.sum();
    Eigen::VectorXd F(n);
    for (int i = 0; i < n; ++i) {
      double um = i > 0 ? u[i - 1] : 0.0;
      double up = i + 1 < n ? u[i + 1] : 0.0;
      F[i] = (2 * u[i] - um - up) / (h * h) + I * u[i] - 3.0 * t * u[i];
    }
    if (F.cwiseAbs().maxCoeff() <= 1e-12) break;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      J(i, i) = 2.0 / (h * h) + I - 3.0 * t;
      if (i > 0) J(i, i - 1) = -1.0 / (h * h);
      if (i + 1 < n) J(i, i + 1) = -1.0 / (h * h);
      for (int j = 0; j < n; ++j) J(i, j) += h * u[i];
    }
    u -= Eigen::PartialPivLU<Eigen::MatrixXd>(J).solve(F);
  }
  return u;
}

void criterion1_eigenvalues() {
  std::ostringstream d;
  bool ok = true;

  Grid g = Grid::interval(0.0, M_PI, 256);
  double l1 = principal_eigenpair(EllipticOperator(g)).lambda;
  ok = ok && std::abs(l1 - 1.0) <= 1e-3;
  d << "interval " << l1;

  Grid g2 = Grid::rectangle({0.0, 1.0}, {0.0, 1.0}, 64, 64);
  double l2 = principal_eigenpair(EllipticOperator(g2)).lambda;
  ok = ok && std::abs(l2 - 2.0 * M_PI * M_PI) <= 2e-2;
  d << ", square " << l2;

  double la = principal_eigenpair(EllipticOperator(g, VectorField::constant({2.0}))).lambda;
  ok = ok && std::abs(la - 2.0) <= 5e-3;
  d << ", advected " << la;

  // dense eigensolve cross-check below 1500 unknowns
  Grid go = Grid::interval(0.0, M_PI, 384);
  EllipticOperator op(go, VectorField::constant({1.5}));
  double mine = principal_eigenpair(op).lambda;
  double oracle = dense_min_real_eigenvalue(op.dense());
  ok = ok && std::abs(mine - oracle) <= 1e-8 * std::abs(oracle);

  Grid go2 = Grid::rectangle({0.0, 1.0}, {0.0, 1.0}, 22, 22);
  EllipticOperator op2(go2, VectorField::rotation(1.0, {0.5, 0.5}));
  double mine2 = principal_eigenpair(op2).lambda;
  double oracle2 = dense_min_real_eigenvalue(op2.dense());
  ok = ok && std::abs(mine2 - oracle2) <= 1e-8 * std::abs(oracle2);
  d << ", oracle gaps " << std::abs(mine - oracle) << " / " << std::abs(mine2 - oracle2);

  report(1, "eigenvalue regression and dense-eigensolve cross-check", ok, d.str());
}

void criterion2_threshold_sweep() {
  bool ok = true;
  std::ostringstream d;
  int exist_lin = 0, nonexist_lin = 0, exist_pow = 0, nonexist_pow = 0;
  for (const char* name :
       {"l1_symmetric_verify", "l2_advected_verify", "l3_rotation2d_verify",
        "l4_small_coupling_verify", "p1_cubic_verify", "p2_mixed_verify", "p3_rotation2d_verify",
        "p4_small_coupling_verify"}) {
    ScenarioConfig cfg = load_config(kConfigDir + "/" + name + ".toml");
    Problem pb = build_problem(cfg);
    VerifyReport rep = run_verify(cfg, pb);
    bool scenario_ok = true;
    for (const auto& s : rep.sweep) {
      if (s.multiplier < 1.0) scenario_ok = scenario_ok && s.outcome == "zero";
      if (s.multiplier > 1.0)
        scenario_ok = scenario_ok && s.outcome == "positive" && s.margin > 0.0 &&
                      s.residual_norm <= 1e-10;
    }
    scenario_ok = scenario_ok && rep.unit_consistent;
    if (rep.lambda_gap > 0.0) {
      (cfg.mode == Mode::linear_advection ? exist_lin : exist_pow) += 1;
    } else {
      (cfg.mode == Mode::linear_advection ? nonexist_lin : nonexist_pow) += 1;
    }
    if (!scenario_ok) d << name << " failed; ";
    ok = ok && scenario_ok;
  }
  ok = ok && exist_lin >= 2 && nonexist_lin >= 2 && exist_pow >= 2 && nonexist_pow >= 2;
  std::ostringstream sides;
  sides << "sides " << exist_lin << "/" << nonexist_lin << " linear, " << exist_pow << "/"
        << nonexist_pow << " power";
  report(2, "existence-nonexistence threshold sweep on the corpus", ok, d.str() + sides.str());
}

void criterion3_scalar_oracle() {
  ScenarioConfig cfg = load_config(kConfigDir + "/l1_symmetric_branch.toml");
  Problem pb = build_problem(cfg);
  Branch br = run_branch(cfg, pb);
  bool ok = br.points.size() == 20;
  double worst = 0.0;
  for (const auto& pt : br.points) {
    Eigen::VectorXd oracle = scalar_reduction_solve(cfg.n[0], pt.t);
    double diff = std::abs(pt.amplitude - 2.0 * oracle.maxCoeff());
    worst = std::max(worst, diff);
    ok = ok && diff <= 1e-6;
  }
  std::ostringstream d;
  d << br.points.size() << " points, worst amplitude gap " << worst;
  report(3, "branch matches the scalar symmetric reduction", ok, d.str());
}

void criterion4_jacobian() {
  bool ok = true;
  double worst = 0.0;
  for (const char* name :
       {"l1_symmetric_verify", "l2_advected_verify", "l3_rotation2d_verify",
        "l4_small_coupling_verify", "p1_cubic_verify", "p2_mixed_verify", "p3_rotation2d_verify",
        "p4_small_coupling_verify", "d2_divfree_direction", "d3_shear_direction"}) {
    ScenarioConfig cfg = load_config(kConfigDir + "/" + name + ".toml");
    // keep the finite-difference sweep affordable
    if (cfg.dim == 1) cfg.n[0] = std::min(cfg.n[0], 96);
    Problem pb = build_problem(cfg);
    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_real_distribution<double> dist(0.3, 1.2);
    State U(pb.grid);
    for (Eigen::Index m = 0; m < U.u.values.size(); ++m) {
      U.u.values[m] = dist(rng);
      U.v.values[m] = dist(rng);
    }
    double t = 0.7;
    Eigen::MatrixXd J = jacobian(pb, t, U);
    const Eigen::Index N = 2 * pb.n();
    const double step = 1e-5;
    Eigen::VectorXd x = U.pack();
    double scale = J.cwiseAbs().maxCoeff();
    double err = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      State Fp = residual(pb, t, State::unpack(pb.grid, xp));
      State Fm = residual(pb, t, State::unpack(pb.grid, xm));
      for (Eigen::Index i = 0; i < N / 2; ++i) {
        double fd_u = (Fp.u.values[i] - Fm.u.values[i]) / (2 * step);
        double fd_v = (Fp.v.values[i] - Fm.v.values[i]) / (2 * step);
        err = std::max(err, std::abs(J(i, j) - fd_u));
        err = std::max(err, std::abs(J(N / 2 + i, j) - fd_v));
      }
    }
    worst = std::max(worst, err / scale);
    ok = ok && err / scale <= 1e-6;
  }
  std::ostringstream d;
  d << "worst scaled entry error " << worst;
  report(4, "jacobian against finite differences on the corpus", ok, d.str());
}

void criterion5_homogeneity_bounds() {
  bool ok = true;
  std::ostringstream d;
  Grid g = Grid::interval(0.0, M_PI, 128);
  const double h = g.spacing(0);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(0.1, 1.1);
  auto rand_field = [&] {
    GridField f(g);
    for (Eigen::Index m = 0; m < f.values.size(); ++m) f.values[m] = dist(rng);
    return f;
  };

  std::vector<std::pair<std::string, Reaction>> families = {
      {"power", Reaction::power(Rational(3, 2))},
      {"mixed", Reaction::mixed(Rational(3, 2), Rational(1, 2))},
      {"weighted", Reaction::weighted(Rational(3, 2), 0.4, 0.6)}};
  std::vector<std::pair<std::string, Kernel>> kernels = {
      {"constant", Kernel::constant(1.0)},
      {"gaussian", Kernel::gaussian(0.6)},
      {"band", Kernel::band(0.5)}};

  double worst_hom = 0.0;
  for (auto& [kn, kern] : kernels) {
    KernelMatrix M(kern, g);
    for (auto& [fn, react] : families) {
      GridField u = rand_field(), v = rand_field();
      GridField base = apply_nonlocal(M, react, u, v);
      for (double xi : {0.5, 2.0, 7.0}) {
        GridField us(g), vs(g);
        us.values = xi * u.values;
        vs.values = xi * v.values;
        GridField sc = apply_nonlocal(M, react, us, vs);
        double factor = std::pow(xi, 1.5);
        double rel =
            (sc.values - factor * base.values).cwiseAbs().maxCoeff() / (factor * base.linf());
        worst_hom = std::max(worst_hom, rel);
      }
    }
  }
  ok = ok && worst_hom <= 1e-12;
  d << "homogeneity defect " << worst_hom;

  KernelMatrix M(Kernel::gaussian(0.6), g);
  Reaction react = Reaction::mixed(Rational(3, 2), Rational(1, 2));
  double worst_slack = -1e300;
  for (int k = 0; k < 50; ++k) {
    GridField u = rand_field(), v = rand_field();
    auto [lhs, rhs] = check_phi_bound(M, react, u, v);
    double fmax = rhs / (M.kernel_sup() * g.measure());
    worst_slack = std::max(worst_slack, lhs - rhs - 2.0 * h * fmax);
  }
  ok = ok && worst_slack <= 0.0;
  d << ", bound slack margin " << worst_slack;

  double worst_lb = 0.0;
  for (auto& [fn, react2] : families) {
    for (int i = 0; i <= 20; ++i) {
      for (int j = 0; j <= 20; ++j) {
        double tt = 0.15 * i, ss = 0.15 * j;
        double m = react2.major() == Reaction::Major::first ? tt : ss;
        worst_lb = std::min(worst_lb, react2(tt, ss) - react2.eps0() * std::pow(m, 1.5));
      }
    }
  }
  ok = ok && worst_lb >= 0.0;
  d << ", lower-bound defect " << worst_lb;

  report(5, "homogeneity, sup bound and lower bound of the nonlocal terms", ok, d.str());
}

void criterion6_identity() {
  std::vector<double> res;
  for (int n : {32, 64, 128}) {
    Grid g2 = Grid::rectangle({0.0, M_PI}, {0.0, M_PI}, n, n);
    GridField u2 = GridField::sample(
        g2, [](std::array<double, 2> x) { return std::sin(x[0]) * std::sin(x[1]); });
    res.push_back(std::abs(advection_identity_residual(u2, VectorField::shear(0, 0, 1.0), 2.0)));
  }
  double o1 = std::log2(res[0] / res[1]);
  double o2 = std::log2(res[1] / res[2]);
  bool ok = res[1] <= 5e-3 && o1 >= 1.8 && o2 >= 1.8;
  std::ostringstream d;
  d << "residual(64^2) " << res[1] << ", orders " << o1 << " / " << o2;
  report(6, "zero-trace advection identity and its convergence order", ok, d.str());
}

void criterion7_direction() {
  bool ok = true;
  std::ostringstream d;

  ScenarioConfig c1 = load_config(kConfigDir + "/l1_symmetric_direction.toml");
  Problem p1 = build_problem(c1);
  std::optional<Branch> b1;
  DirectionReport r1 = run_direction(c1, p1, &b1);
  double benchmark = std::abs(r1.closed_form_limit);
  double at5e3 = 0.0;
  bool decreasing = true;
  for (std::size_t i = 0; i < r1.empirical_samples.size(); ++i) {
    const auto& s = r1.empirical_samples[i];
    if (std::abs(s.epsilon - 5e-3) < 1e-4) at5e3 = s.slope_form;
    // the t values carry solver-tolerance noise; below that scale the error
    // sequence is flat, not monotone
    if (i > 0)
      decreasing = decreasing &&
                   std::abs(r1.empirical_samples[i - 1].slope_form - r1.closed_form_limit) <=
                       std::abs(s.slope_form - r1.closed_form_limit) + 1e-8;
  }
  bool c1ok = r1.case_id == 1 && at5e3 != 0.0 &&
              std::abs(at5e3 - r1.closed_form_limit) <= 0.25 * benchmark && decreasing &&
              r1.direction == BranchDirection::supercritical;
  ok = ok && c1ok;
  d << "case-1 gap " << std::abs(at5e3 - r1.closed_form_limit) / benchmark;

  ScenarioConfig c2 = load_config(kConfigDir + "/d2_divfree_direction.toml");
  Problem p2 = build_problem(c2);
  DirectionReport r2 = run_direction(c2, p2);
  bool c2ok = r2.degenerate && r2.case_id == 6 && std::abs(r2.empirical_limit) <= 0.1 * benchmark;
  ok = ok && c2ok;
  d << ", degenerate magnitude " << std::abs(r2.empirical_limit);

  ScenarioConfig c3 = load_config(kConfigDir + "/d3_shear_direction.toml");
  Problem p3 = build_problem(c3);
  std::optional<Branch> b3;
  DirectionReport r3 = run_direction(c3, p3, &b3);
  bool one_sign = (r3.verdict == SignVerdict::formula_consistent) !=
                  (r3.verdict == SignVerdict::alt_sign_consistent);
  double matched =
      r3.verdict == SignVerdict::formula_consistent ? r3.closed_form_limit : r3.alt_sign_limit;
  bool c3ok = r3.case_id == 6 && one_sign;
  if (matched < 0.0) {
    // negative matched sign: subcritical onset must reach below t1
    bool below = false;
    for (const auto& pt : b3->points) below = below || (pt.t < b3->t1);
    c3ok = c3ok && r3.direction == BranchDirection::subcritical && below;
  }
  ok = ok && c3ok;
  d << ", shear verdict " << to_string(r3.verdict) << " matched " << matched;

  report(7, "closed-form direction limits against the empirical branch", ok, d.str());
}

void criterion8_determinism() {
  bool ok = true;
  for (const char* name : {"l1_symmetric_branch", "d3_shear_direction", "hyp_default",
                           "l4_small_coupling_verify"}) {
    ScenarioConfig cfg = load_config(kConfigDir + "/" + name + ".toml");
    RunArtifacts a = run_scenario(cfg, "/tmp/nlbif_accept_a");
    RunArtifacts b = run_scenario(cfg, "/tmp/nlbif_accept_b");
    if (a.files.size() != b.files.size()) {
      ok = false;
      continue;
    }
    for (std::size_t i = 0; i < a.files.size(); ++i)
      ok = ok && slurp(a.files[i]) == slurp(b.files[i]);
  }
  report(8, "byte-identical artifacts under identical seeds", ok);
}

}  // namespace

int main() {
  criterion1_eigenvalues();
  criterion2_threshold_sweep();
  criterion3_scalar_oracle();
  criterion4_jacobian();
  criterion5_homogeneity_bounds();
  criterion6_identity();
  criterion7_direction();
  criterion8_determinism();
  if (failures == 0) {
    std::printf("acceptance: all criteria pass\n");
  } else {
    std::printf("acceptance: %d criterion(s) failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
