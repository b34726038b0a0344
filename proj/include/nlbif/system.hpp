#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "nlbif/nonlocal.hpp"
#include "nlbif/spectral.hpp"

namespace nlbif {

enum class Mode { linear_advection, power_advection };

/// Discrete steady system in the bifurcation parameter t:
///   F_u = -Lap u + p|u|^(p-1) (alpha . grad u) + Phi_(u,v) u - t(a u + b v)
///   F_v = -Lap v + q|v|^(q-1) (beta  . grad v) + Psi_(u,v) v - t(c u + d v)
/// In linear mode p = q = 1 and the advection coefficient is 1.
/// Negative excursions evaluate |u|^(p-1) u by its odd extension, which keeps
/// the map continuous off the positive cone.
struct Problem {
  Mode mode;
  Grid grid;
  CouplingMatrix A;
  Rational p, q, gamma;
  VectorField alpha, beta;
  Kernel kernel_u, kernel_v;
  Reaction react_u, react_v;  // majors: first for u, second for v
  bool relax_divergence = false;

  KernelMatrix M1, M2;

  // dense stencil blocks cached for Jacobian assembly
  Eigen::MatrixXd lap;          // -Lap
  Eigen::MatrixXd conv_alpha;   // alpha . grad
  Eigen::MatrixXd conv_beta;    // beta . grad

  std::size_t n() const { return grid.size(); }
};

/// Validates the mode constraints and assembles the cached discrete blocks.
/// Linear mode requires p = q = 1, alpha = beta and div alpha = 0 (numerically
/// <= 1e-10). Power mode requires p, q > 1 and, unless relax_divergence is
/// set, gamma > max{p, q} and divergence-free alpha, beta.
Problem make_problem(Mode mode, const Grid& grid, const CouplingMatrix& A, Rational p, Rational q,
                     Rational gamma, const VectorField& alpha, const VectorField& beta,
                     const Kernel& kernel_u, const Kernel& kernel_v, const Reaction& react_u,
                     const Reaction& react_v, bool relax_divergence = false);

/// Same checks as make_problem but collecting violation messages instead of
/// throwing; used by the hypotheses runner.
std::vector<std::string> validate_problem(Mode mode, const Grid& grid, const CouplingMatrix& A,
                                          const Rational& p, const Rational& q,
                                          const Rational& gamma, const VectorField& alpha,
                                          const VectorField& beta, bool relax_divergence);

struct State {
  GridField u, v;

  explicit State(const Grid& g) : u(g), v(g) {}
  State(GridField uu, GridField vv) : u(std::move(uu)), v(std::move(vv)) {}

  static State zero(const Grid& g) { return State(g); }
  std::size_t n() const { return u.grid.size(); }
  double linf() const { return std::max(u.linf(), v.linf()); }
  Eigen::VectorXd pack() const;
  static State unpack(const Grid& g, const Eigen::VectorXd& x);
};

State residual(const Problem& pb, double t, const State& U);

/// Dense 2N x 2N Jacobian of the residual, blocks
/// [dFu/du dFu/dv; dFv/du dFv/dv]. At U = 0 in linear mode this is exactly
/// the linear part -Lap (+ advection) - t A (x) I.
Eigen::MatrixXd jacobian(const Problem& pb, double t, const State& U);

struct PositivityResult {
  bool positive;
  double margin;  // min over interior nodes of both components
};
PositivityResult positivity_check(const State& U);

struct NewtonResult {
  State U;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  std::string reason;  // set on divergence
};

/// Damped Newton with residual-norm step halving (floor 2^-8). Returns the
/// converged state once ‖F‖_inf <= tol, or a divergence report carrying the
/// last iterate. Iterates above blowup_cap are reported as a solver fault.
NewtonResult newton_solve(const Problem& pb, double t, const State& U0, double tol = 1e-10,
                          int max_iter = 60, double blowup_cap = 1e6);

}  // namespace nlbif
