#include "nlbif/geometry.hpp"

#include <cmath>
#include <sstream>

namespace nlbif {

Grid::Grid(int dim, std::array<std::array<double, 2>, 2> bounds, std::array<int, 2> n)
    : dim_(dim), bounds_(bounds), n_(n) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (dim == 1) {
    n_[1] = 1;
    bounds_[1] = {0.0, 1.0};
  }
  for (int k = 0; k < dim_; ++k) {
    if (!(bounds_[k][0] < bounds_[k][1])) {
      std::ostringstream os;
      os << "degenerate bounds on axis " << k << ": [" << bounds_[k][0] << ", " << bounds_[k][1]
         << "]";
      throw ConfigError(os.str());
    }
    if (n_[k] < 3) {
      throw ConfigError("need at least 3 interior nodes per axis, got " + std::to_string(n_[k]) +
                        " on axis " + std::to_string(k));
    }
  }
  h_[0] = (bounds_[0][1] - bounds_[0][0]) / (n_[0] + 1);
  h_[1] = dim_ == 2 ? (bounds_[1][1] - bounds_[1][0]) / (n_[1] + 1) : 1.0;
  total_ = static_cast<std::size_t>(n_[0]) * (dim_ == 2 ? n_[1] : 1);
  weight_ = h_[0] * (dim_ == 2 ? h_[1] : 1.0);
}

Grid Grid::interval(double low, double high, int n) {
  return Grid(1, {{{low, high}, {0.0, 1.0}}}, {n, 1});
}

Grid Grid::rectangle(std::array<double, 2> xb, std::array<double, 2> yb, int nx, int ny) {
  return Grid(2, {{xb, yb}}, {nx, ny});
}

double Grid::measure() const {
  double m = bounds_[0][1] - bounds_[0][0];
  if (dim_ == 2) m *= bounds_[1][1] - bounds_[1][0];
  return m;
}

std::array<double, 2> Grid::point(std::size_t node) const {
  auto [i, j] = unflatten(node);
  return {coord(0, i), dim_ == 2 ? coord(1, j) : 0.0};
}

std::size_t Grid::closed_size() const {
  return static_cast<std::size_t>(n_[0] + 2) * (dim_ == 2 ? n_[1] + 2 : 1);
}

bool Grid::same_mesh(const Grid& o) const {
  if (dim_ != o.dim_ || n_ != o.n_) return false;
  for (int k = 0; k < dim_; ++k)
    if (bounds_[k] != o.bounds_[k]) return false;
  return true;
}

GridField::GridField(const Grid& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != grid.size())
    throw DomainError("field length does not match the grid");
}

GridField GridField::sample(const Grid& g,
                            const std::function<double(std::array<double, 2>)>& fn) {
  GridField f(g);
  for (std::size_t m = 0; m < g.size(); ++m) f.values[m] = fn(g.point(m));
  return f;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField VectorField::zero() { return VectorField(Kind::zero, {}); }

VectorField VectorField::constant(std::vector<double> components) {
  if (components.empty() || components.size() > 2)
    throw ConfigError("constant field needs 1 or 2 components");
  return VectorField(Kind::constant, std::move(components));
}

VectorField VectorField::rotation(double strength, std::array<double, 2> center) {
  return VectorField(Kind::rotation, {strength, center[0], center[1]});
}

VectorField VectorField::shear(int out_axis, int in_axis, double rate) {
  if (out_axis < 0 || out_axis > 1 || in_axis < 0 || in_axis > 1)
    throw ConfigError("shear axes must be 0 or 1");
  return VectorField(Kind::shear, {static_cast<double>(out_axis), static_cast<double>(in_axis), rate});
}

VectorField VectorField::grad_scalar(std::vector<double> linear, std::vector<double> quadratic) {
  if (linear.size() != quadratic.size() || linear.empty() || linear.size() > 2)
    throw ConfigError("grad-scalar field needs matching 1- or 2-entry coefficient lists");
  std::vector<double> p;
  p.push_back(static_cast<double>(linear.size()));
  p.insert(p.end(), linear.begin(), linear.end());
  p.insert(p.end(), quadratic.begin(), quadratic.end());
  return VectorField(Kind::grad_scalar, std::move(p));
}

VectorField VectorField::tabulated(const Grid& g, std::vector<Eigen::VectorXd> samples) {
  if (static_cast<int>(samples.size()) != g.dim())
    throw ConfigError("tabulated field needs one sample array per axis");
  for (const auto& s : samples)
    if (static_cast<std::size_t>(s.size()) != g.closed_size())
      throw ConfigError("tabulated samples must cover the closed grid");
  VectorField vf(Kind::tabulated, {});
  vf.table_ = std::make_shared<std::vector<Eigen::VectorXd>>(std::move(samples));
  vf.table_grid_ = std::make_shared<Grid>(g);
  return vf;
}

bool VectorField::divergence_free_by_construction() const {
  return kind_ == Kind::zero || kind_ == Kind::constant || kind_ == Kind::rotation;
}

bool VectorField::same_spec(const VectorField& o) const {
  if (kind_ != o.kind_) return false;
  if (kind_ == Kind::tabulated) return table_ == o.table_;
  return params_ == o.params_;
}

double VectorField::eval(int axis, std::array<double, 2> x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return axis < static_cast<int>(params_.size()) ? params_[axis] : 0.0;
    case Kind::rotation: {
      double s = params_[0], cx = params_[1], cy = params_[2];
      return axis == 0 ? -s * (x[1] - cy) : s * (x[0] - cx);
    }
    case Kind::shear: {
      int out = static_cast<int>(params_[0]), in = static_cast<int>(params_[1]);
      return axis == out ? params_[2] * x[in] : 0.0;
    }
    case Kind::grad_scalar: {
      int d = static_cast<int>(params_[0]);
      if (axis >= d) return 0.0;
      double lin = params_[1 + axis], quad = params_[1 + d + axis];
      return lin + 2.0 * quad * x[axis];
    }
    case Kind::tabulated:
      throw DomainError("tabulated fields are only evaluable at grid nodes");
  }
  return 0.0;
}

double VectorField::at_closed_node(const Grid& g, int axis, int ci, int cj) const {
  if (kind_ == Kind::tabulated) {
    if (!table_grid_->same_mesh(g)) throw DomainError("tabulated field bound to a different mesh");
    return (*table_)[axis][g.closed_flatten(ci, g.dim() == 2 ? cj : 0)];
  }
  return eval(axis, {g.closed_coord(0, ci), g.dim() == 2 ? g.closed_coord(1, cj) : 0.0});
}

Eigen::VectorXd VectorField::interior_samples(const Grid& g, int axis) const {
  Eigen::VectorXd out(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    auto [i, j] = g.unflatten(m);
    out[m] = at_closed_node(g, axis, i + 1, j + 1);
  }
  return out;
}

double VectorField::max_component(const Grid& g, int axis) const {
  double mx = 0.0;
  int cnx = g.closed_count(0), cny = g.dim() == 2 ? g.closed_count(1) : 1;
  for (int j = 0; j < cny; ++j)
    for (int i = 0; i < cnx; ++i)
      mx = std::max(mx, std::abs(at_closed_node(g, axis, i, j)));
  return mx;
}

// ---------------------------------------------------------------------------
// Discrete calculus

namespace {

inline double value_or_zero(const Eigen::VectorXd& v, const Grid& g, int i, int j) {
  if (i < 0 || i >= g.count(0)) return 0.0;
  if (g.dim() == 2 && (j < 0 || j >= g.count(1))) return 0.0;
  return v[g.flatten(i, j)];
}

}  // namespace

std::vector<GridField> gradient(const GridField& u) {
  const Grid& g = u.grid;
  std::vector<GridField> out;
  out.reserve(g.dim());
  for (int axis = 0; axis < g.dim(); ++axis) {
    GridField d(g);
    double inv2h = 1.0 / (2.0 * g.spacing(axis));
    for (std::size_t m = 0; m < g.size(); ++m) {
      auto [i, j] = g.unflatten(m);
      double up = axis == 0 ? value_or_zero(u.values, g, i + 1, j) : value_or_zero(u.values, g, i, j + 1);
      double dn = axis == 0 ? value_or_zero(u.values, g, i - 1, j) : value_or_zero(u.values, g, i, j - 1);
      d.values[m] = (up - dn) * inv2h;
    }
    out.push_back(std::move(d));
  }
  return out;
}

GridField divergence(const VectorField& vf, const Grid& grid) {
  GridField d(grid);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    auto [i, j] = grid.unflatten(m);
    double acc = 0.0;
    // closed-grid indices of the node are (i+1, j+1)
    acc += (vf.at_closed_node(grid, 0, i + 2, j + 1) - vf.at_closed_node(grid, 0, i, j + 1)) /
           (2.0 * grid.spacing(0));
    if (grid.dim() == 2) {
      acc += (vf.at_closed_node(grid, 1, i + 1, j + 2) - vf.at_closed_node(grid, 1, i + 1, j)) /
             (2.0 * grid.spacing(1));
    }
    d.values[m] = acc;
  }
  return d;
}

GridField advect(const VectorField& vf, const GridField& u) {
  const Grid& g = u.grid;
  auto grads = gradient(u);
  GridField out(g);
  for (int axis = 0; axis < g.dim(); ++axis) {
    Eigen::VectorXd comp = vf.interior_samples(g, axis);
    out.values += comp.cwiseProduct(grads[axis].values);
  }
  return out;
}

double integrate(const GridField& u) { return u.grid.node_weight() * u.values.sum(); }

double inner(const GridField& a, const GridField& b) {
  if (!a.grid.same_mesh(b.grid)) throw DomainError("inner product of fields on different meshes");
  return a.grid.node_weight() * a.values.dot(b.values);
}

double advection_identity_residual(const GridField& u, const VectorField& vf, double p) {
  if (p < 1.0) throw DomainError("advection identity requires p >= 1");
  if (u.min() < 0.0) throw DomainError("advection identity requires a nonnegative field");
  const Grid& g = u.grid;
  GridField conv = advect(vf, u);
  GridField div = divergence(vf, g);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    double um = u.values[m];
    lhs += std::pow(um, p) * conv.values[m];
    rhs += std::pow(um, p + 1.0) * div.values[m];
  }
  double w = g.node_weight();
  return p * w * lhs + (p / (p + 1.0)) * w * rhs;
}

}  // namespace nlbif
