#include "nlbif/spectral.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace nlbif {

EllipticOperator::EllipticOperator(const Grid& grid, std::optional<VectorField> advection)
    : grid_(grid), advection_(std::move(advection)) {
  if (advection_ && advection_->is_zero()) advection_.reset();
  for (int k = 0; k < grid_.dim(); ++k) {
    double mu_max = advection_ ? advection_->max_component(grid_, k) : 0.0;
    // cell Peclet: central differences stay sign-stable only below 1
    if (mu_max * grid_.spacing(k) / 2.0 >= 1.0) {
      std::ostringstream os;
      os << "cell Peclet number " << mu_max * grid_.spacing(k) / 2.0 << " >= 1 on axis " << k
         << "; refine the mesh or weaken the advection";
      throw ConfigError(os.str());
    }
    mu_[k] = advection_ ? advection_->interior_samples(grid_, k)
                        : Eigen::VectorXd::Zero(grid_.size());
  }
  if (grid_.dim() == 1) mu_[1] = Eigen::VectorXd::Zero(grid_.size());
}

GridField EllipticOperator::apply(const GridField& u) const {
  if (!u.grid.same_mesh(grid_)) throw DomainError("operator applied to a field on another mesh");
  GridField out(grid_);
  const int nx = grid_.count(0);
  const int ny = grid_.dim() == 2 ? grid_.count(1) : 1;
  const double ihx2 = 1.0 / (grid_.spacing(0) * grid_.spacing(0));
  const double ihy2 = grid_.dim() == 2 ? 1.0 / (grid_.spacing(1) * grid_.spacing(1)) : 0.0;
  const double i2hx = 1.0 / (2.0 * grid_.spacing(0));
  const double i2hy = grid_.dim() == 2 ? 1.0 / (2.0 * grid_.spacing(1)) : 0.0;

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      std::size_t m = grid_.flatten(i, j);
      double c = u.values[m];
      double xm = i > 0 ? u.values[m - 1] : 0.0;
      double xp = i + 1 < nx ? u.values[m + 1] : 0.0;
      double acc = (2.0 * c - xm - xp) * ihx2 + mu_[0][m] * (xp - xm) * i2hx;
      if (grid_.dim() == 2) {
        double ym = j > 0 ? u.values[m - nx] : 0.0;
        double yp = j + 1 < ny ? u.values[m + nx] : 0.0;
        acc += (2.0 * c - ym - yp) * ihy2 + mu_[1][m] * (yp - ym) * i2hy;
      }
      out.values[m] = acc;
    }
  }
  return out;
}

Eigen::MatrixXd EllipticOperator::dense() const {
  const std::size_t n = grid_.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const int nx = grid_.count(0);
  const int ny = grid_.dim() == 2 ? grid_.count(1) : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      std::size_t m = grid_.flatten(i, j);
      for (int axis = 0; axis < grid_.dim(); ++axis) {
        double h = grid_.spacing(axis);
        double diff = 1.0 / (h * h);
        double conv = mu_[axis][m] / (2.0 * h);
        M(m, m) += 2.0 * diff;
        int lo = axis == 0 ? i : j;
        int count = axis == 0 ? nx : ny;
        std::ptrdiff_t stride = axis == 0 ? 1 : nx;
        if (lo > 0) M(m, m - stride) += -diff - conv;
        if (lo + 1 < count) M(m, m + stride) += -diff + conv;
      }
    }
  }
  return M;
}

EigenPair principal_eigenpair(const EllipticOperator& op, double tol, int max_iter) {
  if (tol <= 0.0) throw ConfigError("eigenpair tolerance must be positive");
  const Grid& g = op.grid();
  const std::size_t n = g.size();

  Eigen::MatrixXd M = op.dense();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);

  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  double lambda = 0.0, lambda_prev = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    Eigen::VectorXd y = lu.solve(w);
    lambda = y.dot(w) / y.dot(y);  // Rayleigh-type estimate along y
    double peak = y.cwiseAbs().maxCoeff();
    if (!(peak > 0.0) || !std::isfinite(peak)) throw SolverError("inverse power iteration broke down");
    w = y / peak;
    if (std::abs(lambda - lambda_prev) < tol) {
      // increments alone undersell the eigenvector; require the residual too
      GridField cand(g, w);
      double res = (op.apply(cand).values - lambda * w).cwiseAbs().maxCoeff();
      if (res <= tol * std::max(1.0, std::abs(lambda))) {
        ++it;
        converged = true;
        break;
      }
    }
    lambda_prev = lambda;
  }
  if (!converged)
    throw SolverError("inverse power iteration did not converge in " + std::to_string(max_iter) +
                      " iterations");

  // max-normalize with positive sign
  Eigen::Index peak_at;
  w.cwiseAbs().maxCoeff(&peak_at);
  if (w[peak_at] < 0.0) w = -w;
  w /= w.maxCoeff();

  GridField phi(g, w);
  if (phi.min() <= 0.0)
    throw PositivityError(
        "converged eigenvector is not strictly positive; the discretization is too coarse");

  GridField r = op.apply(phi);
  double res = (r.values - lambda * phi.values).cwiseAbs().maxCoeff();
  return EigenPair{lambda, std::move(phi), res, it};
}

MatrixEigen coupling_eigen(const CouplingMatrix& A) {
  if (!(A.a > 0.0) || !(A.b > 0.0) || !(A.c > 0.0) || !(A.d > 0.0))
    throw ConfigError("coupling matrix entries must all be positive");
  double half_diff = (A.a - A.d) / 2.0;
  double disc = std::sqrt(half_diff * half_diff + A.b * A.c);
  double lambda = (A.a + A.d) / 2.0 + disc;
  // (A - lambda I) z = 0 with z = (b, lambda - a); lambda - a >= disc - |a-d|/2 > 0
  std::array<double, 2> z{A.b, lambda - A.a};
  double nrm = std::hypot(z[0], z[1]);
  z[0] /= nrm;
  z[1] /= nrm;

  double sigma = std::sqrt(A.b / A.c);
  double b_hat = std::sqrt(A.b * A.c);
  return MatrixEigen{lambda, z, sigma, b_hat, CouplingMatrix{A.a, b_hat, b_hat, A.d}};
}

double threshold(const CouplingMatrix& A, const EllipticOperator& op, double eig_tol) {
  double lambda_A = coupling_eigen(A).lambda_A;
  EigenPair ep = principal_eigenpair(op, eig_tol);
  return ep.lambda / lambda_A;
}

}  // namespace nlbif
