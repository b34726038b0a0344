#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nlbif/common.hpp"
#include "nlbif/geometry.hpp"

namespace nlbif {

/// Nonnegative bounded interaction kernel K(x, y) on Omega x Omega.
class Kernel {
 public:
  enum class Kind { constant, separable, gaussian, band, tabulated };
  using Profile = std::function<double(std::array<double, 2>)>;

  static Kernel constant(double value);
  /// exp(-|x-y|^2 / length^2)
  static Kernel gaussian(double length);
  /// value * indicator(|x-y| < radius)
  static Kernel band(double radius, double value = 1.0);
  /// a(x) * b(y)
  static Kernel separable(Profile a, Profile b);
  /// Raw node-pair values on a specific grid (row x, column y).
  static Kernel tabulated(Eigen::MatrixXd values);

  Kind kind() const { return kind_; }
  bool is_separable() const { return kind_ == Kind::constant || kind_ == Kind::separable; }
  double eval(std::array<double, 2> x, std::array<double, 2> y) const;
  double eval_nodes(const Grid& g, std::size_t i, std::size_t j) const;
  double profile_a(std::array<double, 2> x) const;
  double profile_b(std::array<double, 2> y) const;

 private:
  Kernel(Kind k) : kind_(k) {}
  Kind kind_;
  double p0_ = 0.0, p1_ = 0.0;
  Profile a_, b_;
  std::shared_ptr<const Eigen::MatrixXd> table_;
};

/// Discrete kernel with column quadrature weights folded in:
/// entry(i,j) = K(x_i, x_j) w_j, so apply(F)_i approximates int K(x_i, y) F(y) dy.
/// Separable kernels keep rank-1 factors and skip the O(N^2) product.
class KernelMatrix {
 public:
  KernelMatrix(const Kernel& kernel, const Grid& grid);

  const Grid& grid() const { return grid_; }
  double entry(std::size_t i, std::size_t j) const { return dense_(i, j); }
  const Eigen::MatrixXd& dense() const { return dense_; }
  /// sup of the raw (weightless) kernel samples, for the (Phi_2) bound.
  double kernel_sup() const { return sup_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;

 private:
  Grid grid_;
  Eigen::MatrixXd dense_;
  double sup_;
  bool rank1_ = false;
  Eigen::VectorXd col_a_, row_bw_;  // dense = col_a * row_bw^T when rank1
};

/// Homogeneous reaction density of degree gamma > 0. The major argument is
/// the one the lower bound f >= eps0 |major|^gamma is taken in: first for the
/// u-equation, second for the v-equation.
class Reaction {
 public:
  enum class Family { power, mixed, weighted };
  enum class Major { first, second };

  /// |m|^gamma
  static Reaction power(Rational gamma, Major major = Major::first);
  /// |m|^gamma + |o|^(gamma-mu) |m|^mu, with 0 <= mu <= gamma
  static Reaction mixed(Rational gamma, Rational mu, Major major = Major::first);
  /// c1 |t|^gamma + c2 |s|^gamma, c1, c2 >= 0, c1 + c2 > 0
  static Reaction weighted(Rational gamma, double c1, double c2, Major major = Major::first);

  double operator()(double t, double s) const;
  double d_first(double t, double s) const;   // partial wrt t
  double d_second(double t, double s) const;  // partial wrt s

  Family family() const { return family_; }
  Major major() const { return major_; }
  const Rational& gamma() const { return gamma_; }
  double gamma_value() const { return gamma_.value(); }
  /// Family-specific constant of the lower bound f(t,s) >= eps0 |major|^gamma.
  double eps0() const;

 private:
  Reaction(Family f, Major m, Rational g) : family_(f), major_(m), gamma_(g) {}
  Family family_;
  Major major_;
  Rational gamma_;
  Rational mu_{0, 1};
  double c1_ = 1.0, c2_ = 0.0;
};

/// Pointwise nonlocal coefficient: out_i = sum_j M(i,j) f(|u_j|, |v_j|).
GridField apply_nonlocal(const KernelMatrix& M, const Reaction& f, const GridField& u,
                         const GridField& v);

struct KernelClassReport {
  bool pass = false;
  double eps = 0.0;
  // witness pair for the first node, or the first failing node
  std::size_t witness_x = 0, witness_y = 0;
  std::optional<std::size_t> failing_node;
  std::string detail;
};

/// Grid-scale surrogate of the diagonal-positivity condition: for every
/// interior node x there must be a node pair (x', y') with |x'-x| < eps,
/// |y'-x| < eps and K(x', y') > 0. Requires eps >= 2h so the ball is
/// resolvable.
KernelClassReport check_kernel_class(const Kernel& kernel, const Grid& grid, double eps);

/// Discrete double integral int int K(x,y) |w(y)|^gamma |w(x)|^2 dy dx.
/// For kernels in the admissible class a zero value forces w == 0.
double kernel_weighted_mass(const KernelMatrix& M, double gamma, const GridField& w);

/// Returns (‖Phi‖_inf, ‖K‖_inf |Omega| ‖f(|u|,|v|)‖_inf); the first never
/// exceeds the second beyond quadrature slack.
std::pair<double, double> check_phi_bound(const KernelMatrix& M, const Reaction& f,
                                          const GridField& u, const GridField& v);

}  // namespace nlbif
