#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nlbif/common.hpp"

namespace nlbif {

/// Tensor-product grid of interior nodes on an interval or rectangle with
/// homogeneous Dirichlet data. Along axis k there are n_k interior nodes at
/// spacing h_k = (high_k - low_k)/(n_k + 1); boundary values are implicitly
/// zero. 2D nodes are numbered lexicographically, x fastest.
class Grid {
 public:
  Grid(int dim, std::array<std::array<double, 2>, 2> bounds, std::array<int, 2> n);

  static Grid interval(double low, double high, int n);
  static Grid rectangle(std::array<double, 2> xb, std::array<double, 2> yb, int nx, int ny);

  int dim() const { return dim_; }
  int count(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double low(int axis) const { return bounds_[axis][0]; }
  double high(int axis) const { return bounds_[axis][1]; }

  std::size_t size() const { return total_; }
  /// Quadrature weight of one node: prod over axes of h.
  double node_weight() const { return weight_; }
  double measure() const;

  std::size_t flatten(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0]) * j;
  }
  std::array<int, 2> unflatten(std::size_t node) const {
    int i = static_cast<int>(node % n_[0]);
    int j = static_cast<int>(node / n_[0]);
    return {i, j};
  }
  /// Coordinate of the idx-th interior node along axis (idx in [0, n)).
  double coord(int axis, int idx) const { return bounds_[axis][0] + h_[axis] * (idx + 1); }
  std::array<double, 2> point(std::size_t node) const;

  // Closed grid (interior + boundary), used for tabulated vector fields.
  int closed_count(int axis) const { return n_[axis] + 2; }
  std::size_t closed_size() const;
  std::size_t closed_flatten(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0] + 2) * j;
  }
  double closed_coord(int axis, int idx) const { return bounds_[axis][0] + h_[axis] * idx; }

  bool same_mesh(const Grid& o) const;

 private:
  int dim_;
  std::array<std::array<double, 2>, 2> bounds_;
  std::array<int, 2> n_;
  std::array<double, 2> h_;
  std::size_t total_;
  double weight_;
};

/// Real-valued function on the interior nodes of a Grid, extended by zero on
/// the boundary.
struct GridField {
  Grid grid;
  Eigen::VectorXd values;

  explicit GridField(const Grid& g) : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}
  GridField(const Grid& g, Eigen::VectorXd v);

  static GridField sample(const Grid& g, const std::function<double(std::array<double, 2>)>& fn);

  double max() const { return values.size() ? values.maxCoeff() : 0.0; }
  double min() const { return values.size() ? values.minCoeff() : 0.0; }
  double linf() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

/// Parametric advection field. Analytic kinds are evaluable anywhere in the
/// closed domain; tabulated fields carry per-axis samples on the closed grid
/// of a specific mesh. Kinds zero/constant/rotation are divergence free by
/// construction.
class VectorField {
 public:
  enum class Kind { zero, constant, rotation, shear, grad_scalar, tabulated };

  static VectorField zero();
  static VectorField constant(std::vector<double> components);
  /// 2D solid rotation s * (-(y-cy), (x-cx)).
  static VectorField rotation(double strength, std::array<double, 2> center = {0.0, 0.0});
  /// component[out_axis] = rate * x[in_axis], all other components zero.
  /// div = rate when out_axis == in_axis, else 0. Covers (x, 0) and 1D x.
  static VectorField shear(int out_axis, int in_axis, double rate);
  /// Gradient of psi(x) = sum_k (a_k x_k + b_k x_k^2): component_k = a_k + 2 b_k x_k.
  static VectorField grad_scalar(std::vector<double> linear, std::vector<double> quadratic);
  /// Per-axis samples on the closed grid of `g` (size closed_size() each).
  static VectorField tabulated(const Grid& g, std::vector<Eigen::VectorXd> samples);

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  bool divergence_free_by_construction() const;
  bool same_spec(const VectorField& o) const;

  /// Component along `axis` at an arbitrary point (analytic kinds only).
  double eval(int axis, std::array<double, 2> x) const;
  /// Component along `axis` at a closed-grid node (all kinds).
  double at_closed_node(const Grid& g, int axis, int ci, int cj) const;
  /// Samples at the interior nodes of `g`.
  Eigen::VectorXd interior_samples(const Grid& g, int axis) const;
  /// max |component| over the closed nodes of `g`, per axis.
  double max_component(const Grid& g, int axis) const;

  const std::vector<double>& params() const { return params_; }

 private:
  VectorField(Kind k, std::vector<double> p) : kind_(k), params_(std::move(p)) {}
  Kind kind_;
  std::vector<double> params_;
  std::shared_ptr<const std::vector<Eigen::VectorXd>> table_;
  std::shared_ptr<const Grid> table_grid_;
};

// Discrete calculus: second-order central differences on the tensor grid,
// using the zero boundary trace for neighbors on the boundary.

/// Per-axis central-difference gradient of a Dirichlet field.
std::vector<GridField> gradient(const GridField& u);

/// Central-difference divergence of a sampled vector field at interior nodes.
/// Field values at boundary-adjacent neighbors come from the field itself
/// (it is defined on the closed domain), not from zero extension.
GridField divergence(const VectorField& vf, const Grid& grid);

/// (vf . grad u) at interior nodes.
GridField advect(const VectorField& vf, const GridField& u);

/// Node-weight quadrature of the zero-extended field: weight prod(h) per node.
double integrate(const GridField& u);

/// Quadrature inner product of two fields on the same mesh.
double inner(const GridField& a, const GridField& b);

/// Quadrature residual of the zero-boundary identity
///   p * int u^p (vf . grad u) = -(p/(p+1)) * int u^(p+1) div vf,
/// returned as the sum of both sides; vanishes at rate O(h^2) for smooth
/// nonnegative u with zero trace.
double advection_identity_residual(const GridField& u, const VectorField& vf, double p);

}  // namespace nlbif
