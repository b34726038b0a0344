#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

#include "nlbif/geometry.hpp"

namespace nlbif {

/// Dirichlet operator -Lap + mu . grad on the interior nodes of a grid.
/// With the cell Peclet number max|mu_k| h_k / 2 < 1 the stencil has
/// nonpositive off-diagonal entries, so the inverse is entrywise positive and
/// the principal eigenpair is real and simple with a positive eigenvector.
class EllipticOperator {
 public:
  EllipticOperator(const Grid& grid, std::optional<VectorField> advection = std::nullopt);

  const Grid& grid() const { return grid_; }
  bool has_advection() const { return advection_.has_value(); }
  const std::optional<VectorField>& advection() const { return advection_; }

  /// Stencil action, O(N).
  GridField apply(const GridField& u) const;
  /// Dense assembly of the same action (for factorizations and oracles).
  Eigen::MatrixXd dense() const;

 private:
  Grid grid_;
  std::optional<VectorField> advection_;
  std::array<Eigen::VectorXd, 2> mu_;  // advection samples at interior nodes
};

struct EigenPair {
  double lambda = 0.0;
  GridField phi;  // positive, max-normalized to 1
  double residual = 0.0;
  int iterations = 0;
};

/// Principal eigenpair by inverse power iteration on a dense LU factorization
/// of the assembled operator. Stops when the eigenvalue increment falls below
/// tol; asserts positivity of the converged eigenvector.
EigenPair principal_eigenpair(const EllipticOperator& op, double tol = 1e-10, int max_iter = 500);

/// 2x2 interaction matrix (a b; c d), all entries positive.
struct CouplingMatrix {
  double a, b, c, d;
};

struct MatrixEigen {
  double lambda_A;               // largest eigenvalue, always > 0
  std::array<double, 2> z;       // positive eigenvector, unit Euclidean norm
  double sigma;                  // sigma^2 = b/c
  double b_hat;                  // b/sigma = c*sigma = sqrt(bc)
  CouplingMatrix A0;             // symmetrized (a b_hat; b_hat d), same lambda_A
};

/// Closed-form Perron data of the coupling matrix:
///   lambda_A = (a+d)/2 + sqrt(((a-d)/2)^2 + bc).
MatrixEigen coupling_eigen(const CouplingMatrix& A);

/// Bifurcation threshold lambda_1(op) / lambda_A(A).
double threshold(const CouplingMatrix& A, const EllipticOperator& op, double eig_tol = 1e-10);

}  // namespace nlbif
