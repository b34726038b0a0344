#include "nlbif/continuation.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace nlbif {

namespace {

constexpr double kZeroCollapse = 1e-8;

State scaled(const State& V, double s) {
  State out(V.u.grid);
  out.u.values = s * V.u.values;
  out.v.values = s * V.v.values;
  return out;
}

double state_inner(const State& a, const State& b) {
  return inner(a.u, b.u) + inner(a.v, b.v);
}

// Bordered corrector for the augmented system
//   F(t, U) = 0,   c(U, t) = <U, cU>_q + ct * t - rhs = 0.
// Damped Newton on the infinity norm of the stacked residual.
struct Constraint {
  State cU;      // gradient wrt U (a State), paired with the quadrature inner product
  double ct;     // gradient wrt t
  double rhs;    // target value
};

bool corrector(const Problem& pb, const Constraint& con, State& U, double& t, double tol,
               int max_iter, double blowup_cap) {
  const Eigen::Index n = static_cast<Eigen::Index>(pb.n());
  const double w = pb.grid.node_weight();

  auto eval_norm = [&](const State& s, double tt, State& F, double& c) {
    F = residual(pb, tt, s);
    c = state_inner(s, con.cU) + con.ct * tt - con.rhs;
    return std::max({F.u.linf(), F.v.linf(), std::abs(c)});
  };

  State F(pb.grid);
  double c = 0.0;
  double rnorm = eval_norm(U, t, F, c);

  for (int it = 0; it < max_iter; ++it) {
    if (rnorm <= tol) return true;
    if (U.linf() > blowup_cap) throw SolverError("continuation iterate exceeded the blowup cap");

    Eigen::MatrixXd Jaug = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n + 1);
    Jaug.topLeftCorner(2 * n, 2 * n) = jacobian(pb, t, U);
    // dF/dt = -(A U)
    for (Eigen::Index m = 0; m < n; ++m) {
      Jaug(m, 2 * n) = -(pb.A.a * U.u.values[m] + pb.A.b * U.v.values[m]);
      Jaug(n + m, 2 * n) = -(pb.A.c * U.u.values[m] + pb.A.d * U.v.values[m]);
    }
    Jaug.block(2 * n, 0, 1, n) = (w * con.cU.u.values).transpose();
    Jaug.block(2 * n, n, 1, n) = (w * con.cU.v.values).transpose();
    Jaug(2 * n, 2 * n) = con.ct;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Jaug);
    if (!(lu.rcond() > 1e-14)) return false;

    Eigen::VectorXd rhs(2 * n + 1);
    rhs.head(n) = F.u.values;
    rhs.segment(n, n) = F.v.values;
    rhs[2 * n] = c;
    Eigen::VectorXd step = lu.solve(-rhs);

    double s = 1.0;
    bool improved = false;
    while (s >= 1.0 / 256.0) {
      State trial = State::unpack(pb.grid, U.pack() + s * step.head(2 * n));
      double t_trial = t + s * step[2 * n];
      State Ft(pb.grid);
      double ct_val = 0.0;
      double tn = eval_norm(trial, t_trial, Ft, ct_val);
      if (tn < rnorm) {
        U = std::move(trial);
        t = t_trial;
        F = std::move(Ft);
        c = ct_val;
        rnorm = tn;
        improved = true;
        break;
      }
      s /= 2.0;
    }
    if (!improved) return false;
  }
  return rnorm <= tol;
}

}  // namespace

std::pair<double, State> bifurcation_seed(const Problem& pb, double eig_tol) {
  std::optional<VectorField> adv;
  if (pb.mode == Mode::linear_advection && !pb.alpha.is_zero()) adv = pb.alpha;
  EllipticOperator op(pb.grid, adv);
  EigenPair ep = principal_eigenpair(op, eig_tol);
  MatrixEigen me = coupling_eigen(pb.A);
  double t1 = ep.lambda / me.lambda_A;

  State V(pb.grid);
  V.u.values = me.z[0] * ep.phi.values;
  V.v.values = me.z[1] * ep.phi.values;
  return {t1, std::move(V)};
}

Branch continue_branch(const Problem& pb, const ContinuationSettings& settings) {
  if (!(settings.initial_epsilon > 0.0) || !(settings.step > 0.0) || !(settings.newton_tol > 0.0))
    throw ConfigError("continuation settings must be positive");
  if (settings.max_points < 2) throw ConfigError("continuation needs max_points >= 2");

  auto [t1, V] = bifurcation_seed(pb);
  const double vv = state_inner(V, V);

  Branch br{t1, V, {}, BranchDirection::undetermined, {}};

  const int corrector_cap = 40;
  const double blowup_cap = settings.blowup_cap;

  while (static_cast<int>(br.points.size()) < settings.max_points) {
    const bool have = !br.points.empty();
    const std::size_t k = br.points.size();
    const bool natural = (k < 2) || !settings.arclength;

    bool accepted = false;
    State U_new(pb.grid);
    double t_new = t1;

    if (natural) {
      double base_eps = have ? br.points.back().epsilon : 0.0;
      double d_eps = have ? settings.step : settings.initial_epsilon;
      for (int bis = 0; bis <= 5 && !accepted; ++bis, d_eps /= 2.0) {
        double target = base_eps + d_eps;
        State U = have ? scaled(br.points.back().U, target / base_eps) : scaled(V, target);
        double t = have ? br.points.back().t : t1;
        Constraint con{V, 0.0, target * vv};
        if (!corrector(pb, con, U, t, settings.newton_tol, corrector_cap, blowup_cap)) continue;
        if (U.linf() <= kZeroCollapse) continue;  // fell back to the trivial solution
        double eps = state_inner(U, V) / vv;
        if (eps <= base_eps) continue;
        U_new = std::move(U);
        t_new = t;
        accepted = true;
      }
      if (!accepted) {
        br.truncation_reason = "corrector failed after 5 natural-step bisections";
        break;
      }
    } else {
      const BranchPoint& a = br.points[k - 2];
      const BranchPoint& b = br.points[k - 1];
      State dU(pb.grid);
      dU.u.values = b.U.u.values - a.U.u.values;
      dU.v.values = b.U.v.values - a.U.v.values;
      double dt = b.t - a.t;
      double nrm = std::sqrt(state_inner(dU, dU) + dt * dt);
      dU.u.values /= nrm;
      dU.v.values /= nrm;
      dt /= nrm;

      double ds = settings.step;
      for (int bis = 0; bis <= 5 && !accepted; ++bis, ds /= 2.0) {
        State U(pb.grid);
        U.u.values = b.U.u.values + ds * dU.u.values;
        U.v.values = b.U.v.values + ds * dU.v.values;
        double t = b.t + ds * dt;
        // arclength plane through the predictor, normal to the secant tangent
        Constraint con{dU, dt, state_inner(U, dU) + dt * t};
        if (!corrector(pb, con, U, t, settings.newton_tol, corrector_cap, blowup_cap)) continue;
        if (U.linf() <= kZeroCollapse) continue;
        double eps = state_inner(U, V) / vv;
        if (eps <= b.epsilon) continue;
        U_new = std::move(U);
        t_new = t;
        accepted = true;
      }
      if (!accepted) {
        br.truncation_reason = "corrector failed after 5 arclength bisections";
        break;
      }
    }

    auto pos = positivity_check(U_new);
    if (!pos.positive) {
      br.truncation_reason = "loss of positivity";
      break;
    }

    BranchPoint pt{t_new, U_new};
    pt.amplitude = U_new.u.max() + U_new.v.max();
    pt.epsilon = state_inner(U_new, V) / vv;
    State F = residual(pb, t_new, U_new);
    pt.residual_norm = std::max(F.u.linf(), F.v.linf());
    State rho(pb.grid);
    rho.u.values = U_new.u.values / pt.epsilon - V.u.values;
    rho.v.values = U_new.v.values / pt.epsilon - V.v.values;
    pt.rho_norm = rho.linf();
    br.points.push_back(std::move(pt));

    if (br.points.back().amplitude > settings.amplitude_cap) {
      br.truncation_reason = "amplitude cap reached";
      break;
    }
  }

  if (br.points.size() >= 3) br.direction = detect_direction(br).direction;
  return br;
}

DirectionVerdict detect_direction(const Branch& branch) {
  if (branch.points.size() < 3)
    throw DomainError("direction detection needs at least 3 branch points");

  DirectionVerdict out;
  std::size_t count = std::min<std::size_t>(branch.points.size(), 4);
  bool all_pos = true, all_neg = true;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& pt = branch.points[i];
    double eta = pt.t - branch.t1;
    out.eta_samples.emplace_back(pt.epsilon, eta);
    all_pos = all_pos && eta > 0.0;
    all_neg = all_neg && eta < 0.0;
  }
  out.direction = all_pos   ? BranchDirection::supercritical
                  : all_neg ? BranchDirection::subcritical
                            : BranchDirection::undetermined;
  return out;
}

}  // namespace nlbif
