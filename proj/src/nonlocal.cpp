#include "nlbif/nonlocal.hpp"

#include <cmath>
#include <sstream>

namespace nlbif {

// ---------------------------------------------------------------------------
// Kernel

Kernel Kernel::constant(double value) {
  if (value < 0.0) throw HypothesisError("constant kernel must be nonnegative");
  Kernel k(Kind::constant);
  k.p0_ = value;
  return k;
}

Kernel Kernel::gaussian(double length) {
  if (!(length > 0.0)) throw ConfigError("gaussian kernel needs a positive length scale");
  Kernel k(Kind::gaussian);
  k.p0_ = length;
  return k;
}

Kernel Kernel::band(double radius, double value) {
  if (!(radius > 0.0)) throw ConfigError("band kernel needs a positive radius");
  if (value < 0.0) throw HypothesisError("band kernel magnitude must be nonnegative");
  Kernel k(Kind::band);
  k.p0_ = radius;
  k.p1_ = value;
  return k;
}

Kernel Kernel::separable(Profile a, Profile b) {
  Kernel k(Kind::separable);
  k.a_ = std::move(a);
  k.b_ = std::move(b);
  return k;
}

Kernel Kernel::tabulated(Eigen::MatrixXd values) {
  Kernel k(Kind::tabulated);
  k.table_ = std::make_shared<Eigen::MatrixXd>(std::move(values));
  return k;
}

double Kernel::eval(std::array<double, 2> x, std::array<double, 2> y) const {
  switch (kind_) {
    case Kind::constant:
      return p0_;
    case Kind::gaussian: {
      double dx = x[0] - y[0], dy = x[1] - y[1];
      return std::exp(-(dx * dx + dy * dy) / (p0_ * p0_));
    }
    case Kind::band: {
      double dx = x[0] - y[0], dy = x[1] - y[1];
      return std::sqrt(dx * dx + dy * dy) < p0_ ? p1_ : 0.0;
    }
    case Kind::separable:
      return a_(x) * b_(y);
    case Kind::tabulated:
      throw DomainError("tabulated kernels are only evaluable at node pairs");
  }
  return 0.0;
}

double Kernel::eval_nodes(const Grid& g, std::size_t i, std::size_t j) const {
  if (kind_ == Kind::tabulated) {
    if (table_->rows() != static_cast<Eigen::Index>(g.size()) ||
        table_->cols() != static_cast<Eigen::Index>(g.size()))
      throw DomainError("tabulated kernel shape does not match the grid");
    return (*table_)(i, j);
  }
  return eval(g.point(i), g.point(j));
}

double Kernel::profile_a(std::array<double, 2> x) const {
  return kind_ == Kind::constant ? p0_ : a_(x);
}

double Kernel::profile_b(std::array<double, 2> y) const {
  return kind_ == Kind::constant ? 1.0 : b_(y);
}

// ---------------------------------------------------------------------------
// KernelMatrix

KernelMatrix::KernelMatrix(const Kernel& kernel, const Grid& grid) : grid_(grid) {
  const std::size_t n = grid.size();
  const double w = grid.node_weight();
  sup_ = 0.0;

  if (kernel.is_separable()) {
    rank1_ = true;
    col_a_.resize(n);
    row_bw_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      col_a_[i] = kernel.profile_a(grid.point(i));
      row_bw_[i] = kernel.profile_b(grid.point(i));
    }
    if (col_a_.minCoeff() < 0.0 || row_bw_.minCoeff() < 0.0) {
      // a sign-indefinite factorization can still be a nonnegative kernel
      // only if one factor is identically zero; treat as a violation
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (col_a_[i] * row_bw_[j] < 0.0)
            throw HypothesisError("kernel takes a negative value at a node pair");
    }
    dense_ = col_a_ * (w * row_bw_).transpose();
    sup_ = col_a_.maxCoeff() * row_bw_.maxCoeff();
    row_bw_ *= w;
  } else {
    dense_.resize(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double k = kernel.eval_nodes(grid, i, j);
        if (k < 0.0) {
          std::ostringstream os;
          os << "kernel is negative at node pair (" << i << ", " << j << "): " << k;
          throw HypothesisError(os.str());
        }
        sup_ = std::max(sup_, k);
        dense_(i, j) = k * w;
      }
    }
  }

  if (!(sup_ > 0.0))
    throw HypothesisError("kernel vanishes at every node pair; the positive set is empty");
}

Eigen::VectorXd KernelMatrix::apply(const Eigen::VectorXd& f) const {
  if (rank1_) return col_a_ * row_bw_.dot(f);
  return dense_ * f;
}

// ---------------------------------------------------------------------------
// Reaction

Reaction Reaction::power(Rational gamma, Major major) {
  if (!(gamma.value() > 0.0)) throw ConfigError("reaction gamma must be positive");
  return Reaction(Family::power, major, gamma);
}

Reaction Reaction::mixed(Rational gamma, Rational mu, Major major) {
  if (!(gamma.value() > 0.0)) throw ConfigError("reaction gamma must be positive");
  if (mu < Rational(0) || gamma < mu) throw ConfigError("mixed reaction needs 0 <= mu <= gamma");
  Reaction r(Family::mixed, major, gamma);
  r.mu_ = mu;
  return r;
}

Reaction Reaction::weighted(Rational gamma, double c1, double c2, Major major) {
  if (!(gamma.value() > 0.0)) throw ConfigError("reaction gamma must be positive");
  if (c1 < 0.0 || c2 < 0.0 || !(c1 + c2 > 0.0))
    throw ConfigError("weighted reaction needs c1, c2 >= 0 with c1 + c2 > 0");
  Reaction r(Family::weighted, major, gamma);
  r.c1_ = c1;
  r.c2_ = c2;
  return r;
}

namespace {
inline double pow_abs(double x, double e) {
  if (e == 0.0) return 1.0;
  double a = std::abs(x);
  return a == 0.0 ? 0.0 : std::pow(a, e);
}
}  // namespace

double Reaction::operator()(double t, double s) const {
  double m = major_ == Major::first ? t : s;
  double o = major_ == Major::first ? s : t;
  double g = gamma_.value();
  switch (family_) {
    case Family::power:
      return pow_abs(m, g);
    case Family::mixed:
      return pow_abs(m, g) + pow_abs(o, g - mu_.value()) * pow_abs(m, mu_.value());
    case Family::weighted:
      return c1_ * pow_abs(t, g) + c2_ * pow_abs(s, g);
  }
  return 0.0;
}

double Reaction::d_first(double t, double s) const {
  double g = gamma_.value();
  double sgn_t = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
  switch (family_) {
    case Family::power:
      if (major_ == Major::first) return g * pow_abs(t, g - 1.0) * sgn_t;
      return 0.0;
    case Family::mixed: {
      double mu = mu_.value();
      if (major_ == Major::first)
        return g * pow_abs(t, g - 1.0) * sgn_t + mu * pow_abs(s, g - mu) * pow_abs(t, mu - 1.0) * sgn_t;
      return (g - mu) * pow_abs(t, g - mu - 1.0) * sgn_t * pow_abs(s, mu);
    }
    case Family::weighted:
      return c1_ * g * pow_abs(t, g - 1.0) * sgn_t;
  }
  return 0.0;
}

double Reaction::d_second(double t, double s) const {
  double g = gamma_.value();
  double sgn_s = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
  switch (family_) {
    case Family::power:
      if (major_ == Major::second) return g * pow_abs(s, g - 1.0) * sgn_s;
      return 0.0;
    case Family::mixed: {
      double mu = mu_.value();
      if (major_ == Major::second)
        return g * pow_abs(s, g - 1.0) * sgn_s + mu * pow_abs(t, g - mu) * pow_abs(s, mu - 1.0) * sgn_s;
      return (g - mu) * pow_abs(s, g - mu - 1.0) * sgn_s * pow_abs(t, mu);
    }
    case Family::weighted:
      return c2_ * g * pow_abs(s, g - 1.0) * sgn_s;
  }
  return 0.0;
}

double Reaction::eps0() const {
  switch (family_) {
    case Family::power:
    case Family::mixed:
      return 1.0;
    case Family::weighted:
      return major_ == Major::first ? c1_ : c2_;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Operations

GridField apply_nonlocal(const KernelMatrix& M, const Reaction& f, const GridField& u,
                         const GridField& v) {
  if (!u.grid.same_mesh(M.grid()) || !v.grid.same_mesh(M.grid()))
    throw DomainError("fields and kernel matrix live on different meshes");
  Eigen::VectorXd fv(u.values.size());
  for (Eigen::Index m = 0; m < fv.size(); ++m)
    fv[m] = f(std::abs(u.values[m]), std::abs(v.values[m]));
  return GridField(M.grid(), M.apply(fv));
}

KernelClassReport check_kernel_class(const Kernel& kernel, const Grid& grid, double eps) {
  if (!(eps > 0.0)) throw ConfigError("kernel-class check needs eps > 0");
  double hmax = grid.spacing(0);
  if (grid.dim() == 2) hmax = std::max(hmax, grid.spacing(1));
  if (eps < 2.0 * hmax)
    throw ConfigError("kernel-class eps = " + std::to_string(eps) +
                      " is below 2h = " + std::to_string(2.0 * hmax) +
                      "; the ball is not resolvable on this grid");

  KernelClassReport rep;
  rep.eps = eps;
  const std::size_t n = grid.size();

  // nodes inside the eps-ball of each node, via coordinate distance
  auto in_ball = [&](std::size_t center, std::size_t other) {
    auto c = grid.point(center), o = grid.point(other);
    double dx = c[0] - o[0], dy = c[1] - o[1];
    return std::sqrt(dx * dx + dy * dy) < eps;
  };

  bool first = true;
  for (std::size_t m = 0; m < n; ++m) {
    // the diagonal pair usually settles it immediately
    bool found = kernel.eval_nodes(grid, m, m) > 0.0;
    if (found && first) {
      rep.witness_x = m;
      rep.witness_y = m;
      first = false;
    }
    if (!found) {
      std::vector<std::size_t> near;
      for (std::size_t i = 0; i < n; ++i)
        if (in_ball(m, i)) near.push_back(i);
      for (std::size_t a : near) {
        for (std::size_t b : near) {
          if (kernel.eval_nodes(grid, a, b) > 0.0) {
            if (first) {
              rep.witness_x = a;
              rep.witness_y = b;
              first = false;
            }
            found = true;
            break;
          }
        }
        if (found) break;
      }
    }
    if (!found) {
      rep.pass = false;
      rep.failing_node = m;
      std::ostringstream os;
      auto pt = grid.point(m);
      os << "no positive kernel pair within eps of node " << m << " at (" << pt[0];
      if (grid.dim() == 2) os << ", " << pt[1];
      os << ")";
      rep.detail = os.str();
      return rep;
    }
  }
  rep.pass = true;
  rep.detail = "every interior node has a positive kernel pair in its eps-ball";
  return rep;
}

double kernel_weighted_mass(const KernelMatrix& M, double gamma, const GridField& w) {
  if (!w.grid.same_mesh(M.grid())) throw DomainError("field and kernel matrix meshes differ");
  Eigen::VectorXd wg(w.values.size());
  for (Eigen::Index m = 0; m < wg.size(); ++m) wg[m] = pow_abs(w.values[m], gamma);
  Eigen::VectorXd row = M.apply(wg);  // int K(x,.) |w|^gamma dy
  double acc = 0.0;
  for (Eigen::Index m = 0; m < row.size(); ++m)
    acc += row[m] * w.values[m] * w.values[m];
  return M.grid().node_weight() * acc;
}

std::pair<double, double> check_phi_bound(const KernelMatrix& M, const Reaction& f,
                                          const GridField& u, const GridField& v) {
  GridField phi = apply_nonlocal(M, f, u, v);
  double fmax = 0.0;
  for (Eigen::Index m = 0; m < u.values.size(); ++m)
    fmax = std::max(fmax, f(std::abs(u.values[m]), std::abs(v.values[m])));
  return {phi.linf(), M.kernel_sup() * M.grid().measure() * fmax};
}

}  // namespace nlbif
