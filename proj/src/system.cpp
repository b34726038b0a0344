#include "nlbif/system.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace nlbif {

namespace {

inline double pow_abs(double x, double e) {
  if (e == 0.0) return 1.0;
  double a = std::abs(x);
  return a == 0.0 ? 0.0 : std::pow(a, e);
}

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double max_abs_divergence(const VectorField& vf, const Grid& grid) {
  if (vf.is_zero()) return 0.0;
  return divergence(vf, grid).linf();
}

}  // namespace

std::vector<std::string> validate_problem(Mode mode, const Grid& grid, const CouplingMatrix& A,
                                          const Rational& p, const Rational& q,
                                          const Rational& gamma, const VectorField& alpha,
                                          const VectorField& beta, bool relax_divergence) {
  std::vector<std::string> bad;
  if (!(A.a > 0) || !(A.b > 0) || !(A.c > 0) || !(A.d > 0))
    bad.push_back("coupling matrix entries must all be positive");
  if (!(gamma.value() > 0.0)) bad.push_back("gamma must be positive");

  const Rational one(1);
  if (mode == Mode::linear_advection) {
    if (!(p == one) || !(q == one))
      bad.push_back("linear-advection mode requires p = q = 1 (got p = " + p.str() +
                    ", q = " + q.str() + ")");
    if (!alpha.same_spec(beta))
      bad.push_back("linear-advection mode requires identical advection fields (alpha = beta)");
    double dv = max_abs_divergence(alpha, grid);
    if (dv > 1e-10)
      bad.push_back("linear-advection mode requires div alpha = 0 (numerical max " +
                    std::to_string(dv) + ")");
  } else {
    if (!(one < p) || !(one < q))
      bad.push_back("power-advection mode requires p, q > 1 (got p = " + p.str() +
                    ", q = " + q.str() + ")");
    if (!relax_divergence) {
      if (!(std::max(p, q) < gamma))
        bad.push_back("power-advection mode requires gamma > max{p, q} (got gamma = " +
                      gamma.str() + ")");
      double da = max_abs_divergence(alpha, grid);
      double db = max_abs_divergence(beta, grid);
      if (da > 1e-10)
        bad.push_back("power-advection mode requires div alpha = 0 (numerical max " +
                      std::to_string(da) + "); set relax_divergence for local-branch studies");
      if (db > 1e-10)
        bad.push_back("power-advection mode requires div beta = 0 (numerical max " +
                      std::to_string(db) + "); set relax_divergence for local-branch studies");
    }
  }
  return bad;
}

Problem make_problem(Mode mode, const Grid& grid, const CouplingMatrix& A, Rational p, Rational q,
                     Rational gamma, const VectorField& alpha, const VectorField& beta,
                     const Kernel& kernel_u, const Kernel& kernel_v, const Reaction& react_u,
                     const Reaction& react_v, bool relax_divergence) {
  auto bad = validate_problem(mode, grid, A, p, q, gamma, alpha, beta, relax_divergence);
  if (!bad.empty()) {
    std::string msg = "invalid problem:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw ConfigError(msg);
  }
  if (!(react_u.gamma() == gamma) || !(react_v.gamma() == gamma))
    throw ConfigError("reaction homogeneity degrees must match the problem gamma");

  // Peclet is checked by the operator assembly below.
  Eigen::MatrixXd lap = EllipticOperator(grid).dense();
  Eigen::MatrixXd conv_a, conv_b;
  if (alpha.is_zero()) {
    conv_a = Eigen::MatrixXd::Zero(grid.size(), grid.size());
  } else {
    conv_a = EllipticOperator(grid, alpha).dense() - lap;
  }
  if (beta.same_spec(alpha)) {
    conv_b = conv_a;
  } else if (beta.is_zero()) {
    conv_b = Eigen::MatrixXd::Zero(grid.size(), grid.size());
  } else {
    conv_b = EllipticOperator(grid, beta).dense() - lap;
  }

  return Problem{.mode = mode,
                 .grid = grid,
                 .A = A,
                 .p = p,
                 .q = q,
                 .gamma = gamma,
                 .alpha = alpha,
                 .beta = beta,
                 .kernel_u = kernel_u,
                 .kernel_v = kernel_v,
                 .react_u = react_u,
                 .react_v = react_v,
                 .relax_divergence = relax_divergence,
                 .M1 = KernelMatrix(kernel_u, grid),
                 .M2 = KernelMatrix(kernel_v, grid),
                 .lap = std::move(lap),
                 .conv_alpha = std::move(conv_a),
                 .conv_beta = std::move(conv_b)};
}

Eigen::VectorXd State::pack() const {
  Eigen::VectorXd x(2 * u.values.size());
  x << u.values, v.values;
  return x;
}

State State::unpack(const Grid& g, const Eigen::VectorXd& x) {
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  return State(GridField(g, x.head(n)), GridField(g, x.tail(n)));
}

State residual(const Problem& pb, double t, const State& U) {
  if (!U.u.grid.same_mesh(pb.grid) || !U.v.grid.same_mesh(pb.grid))
    throw DomainError("state does not live on the problem grid");
  const auto& u = U.u.values;
  const auto& v = U.v.values;
  const double pv = pb.p.value(), qv = pb.q.value();

  Eigen::VectorXd conv_u = pb.conv_alpha * u;
  Eigen::VectorXd conv_v = pb.conv_beta * v;
  Eigen::VectorXd fu(u.size()), gv(v.size());
  for (Eigen::Index m = 0; m < u.size(); ++m) {
    fu[m] = pb.react_u(std::abs(u[m]), std::abs(v[m]));
    gv[m] = pb.react_v(std::abs(u[m]), std::abs(v[m]));
  }
  Eigen::VectorXd phi = pb.M1.apply(fu);
  Eigen::VectorXd psi = pb.M2.apply(gv);

  State F(pb.grid);
  for (Eigen::Index m = 0; m < u.size(); ++m) {
    double cu = pv * pow_abs(u[m], pv - 1.0);  // 1 in linear mode
    double cv = qv * pow_abs(v[m], qv - 1.0);
    F.u.values[m] = cu * conv_u[m] + phi[m] * u[m] - t * (pb.A.a * u[m] + pb.A.b * v[m]);
    F.v.values[m] = cv * conv_v[m] + psi[m] * v[m] - t * (pb.A.c * u[m] + pb.A.d * v[m]);
  }
  F.u.values += pb.lap * u;
  F.v.values += pb.lap * v;
  return F;
}

Eigen::MatrixXd jacobian(const Problem& pb, double t, const State& U) {
  const Eigen::Index n = static_cast<Eigen::Index>(pb.n());
  const auto& u = U.u.values;
  const auto& v = U.v.values;
  const double pv = pb.p.value(), qv = pb.q.value();

  if (pb.mode == Mode::power_advection) {
    if (pv < 2.0 && u.cwiseAbs().minCoeff() == 0.0)
      throw DomainError("u vanishes at a node and p < 2; start Newton from positive data");
    if (qv < 2.0 && v.cwiseAbs().minCoeff() == 0.0)
      throw DomainError("v vanishes at a node and q < 2; start Newton from positive data");
  }

  Eigen::VectorXd fu(n), gv(n), fu_du(n), fu_dv(n), gv_du(n), gv_dv(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    double au = std::abs(u[m]), av = std::abs(v[m]);
    fu[m] = pb.react_u(au, av);
    gv[m] = pb.react_v(au, av);
    // chain rule through the |.| in the reaction arguments
    fu_du[m] = pb.react_u.d_first(au, av) * sgn(u[m]);
    fu_dv[m] = pb.react_u.d_second(au, av) * sgn(v[m]);
    gv_du[m] = pb.react_v.d_first(au, av) * sgn(u[m]);
    gv_dv[m] = pb.react_v.d_second(au, av) * sgn(v[m]);
  }
  Eigen::VectorXd phi = pb.M1.apply(fu);
  Eigen::VectorXd psi = pb.M2.apply(gv);
  Eigen::VectorXd conv_u = pb.conv_alpha * u;
  Eigen::VectorXd conv_v = pb.conv_beta * v;

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);

  // dFu/du = -Lap + d/du[p|u|^(p-1)] (a.grad u) + p|u|^(p-1) (a.grad .)
  //          + diag(Phi) + diag(u) M1 diag(df/du) - t a I
  Eigen::VectorXd dcoef_u(n), coef_u(n), dcoef_v(n), coef_v(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    dcoef_u[m] = pv * (pv - 1.0) * pow_abs(u[m], pv - 2.0) * sgn(u[m]) * conv_u[m];
    coef_u[m] = pv * pow_abs(u[m], pv - 1.0);
    dcoef_v[m] = qv * (qv - 1.0) * pow_abs(v[m], qv - 2.0) * sgn(v[m]) * conv_v[m];
    coef_v[m] = qv * pow_abs(v[m], qv - 1.0);
  }

  auto Juu = J.topLeftCorner(n, n);
  Juu = pb.lap;
  Juu += dcoef_u.asDiagonal();
  Juu += coef_u.asDiagonal() * pb.conv_alpha;
  Juu += phi.asDiagonal();
  Juu += u.asDiagonal() * pb.M1.dense() * fu_du.asDiagonal();
  Juu.diagonal().array() -= t * pb.A.a;

  auto Juv = J.topRightCorner(n, n);
  Juv = u.asDiagonal() * pb.M1.dense() * fu_dv.asDiagonal();
  Juv.diagonal().array() -= t * pb.A.b;

  auto Jvu = J.bottomLeftCorner(n, n);
  Jvu = v.asDiagonal() * pb.M2.dense() * gv_du.asDiagonal();
  Jvu.diagonal().array() -= t * pb.A.c;

  auto Jvv = J.bottomRightCorner(n, n);
  Jvv = pb.lap;
  Jvv += dcoef_v.asDiagonal();
  Jvv += coef_v.asDiagonal() * pb.conv_beta;
  Jvv += psi.asDiagonal();
  Jvv += v.asDiagonal() * pb.M2.dense() * gv_dv.asDiagonal();
  Jvv.diagonal().array() -= t * pb.A.d;

  return J;
}

PositivityResult positivity_check(const State& U) {
  double margin = std::min(U.u.min(), U.v.min());
  return {margin > 0.0, margin};
}

NewtonResult newton_solve(const Problem& pb, double t, const State& U0, double tol, int max_iter,
                          double blowup_cap) {
  if (!(tol > 0.0)) throw ConfigError("newton tolerance must be positive");
  NewtonResult res{U0, false, 0, 0.0, {}};
  State F = residual(pb, t, res.U);
  double fnorm = std::max(F.u.linf(), F.v.linf());

  for (int it = 0; it < max_iter; ++it) {
    res.residual_norm = fnorm;
    res.iterations = it;
    if (fnorm <= tol) {
      res.converged = true;
      return res;
    }
    if (res.U.linf() > blowup_cap)
      throw SolverError("iterate exceeded the blowup cap " + std::to_string(blowup_cap));

    Eigen::MatrixXd J = jacobian(pb, t, res.U);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    double rc = lu.rcond();
    if (!(rc > 1e-14))
      throw SolverError("singular Jacobian (rcond estimate " + std::to_string(rc) + ")");

    Eigen::VectorXd x = res.U.pack();
    Eigen::VectorXd rhs(2 * pb.n());
    rhs << F.u.values, F.v.values;
    Eigen::VectorXd step = lu.solve(-rhs);

    // step halving on residual-norm increase, floor 2^-8
    double s = 1.0;
    State trial = res.U;
    double trial_norm = fnorm;
    bool improved = false;
    while (s >= 1.0 / 256.0) {
      trial = State::unpack(pb.grid, x + s * step);
      State Ft = residual(pb, t, trial);
      trial_norm = std::max(Ft.u.linf(), Ft.v.linf());
      if (trial_norm < fnorm) {
        F = std::move(Ft);
        improved = true;
        break;
      }
      s /= 2.0;
    }
    if (!improved) {
      res.reason = "line search stalled at step floor";
      res.residual_norm = fnorm;
      return res;
    }
    res.U = std::move(trial);
    fnorm = trial_norm;
  }

  res.residual_norm = fnorm;
  res.iterations = max_iter;
  if (fnorm <= tol) {
    res.converged = true;
  } else {
    res.reason = "iteration cap reached";
  }
  return res;
}

}  // namespace nlbif
