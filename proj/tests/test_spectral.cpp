#include <doctest.h>

#include <cmath>

#include <lapacke.h>

#include <Eigen/Dense>

#include "nlbif/spectral.hpp"

using namespace nlbif;

namespace {

// smallest essentially-real eigenvalue from a full LAPACK eigensolve
double dense_min_real_eigenvalue(const Eigen::MatrixXd& M) {
  int n = static_cast<int>(M.rows());
  std::vector<double> a(M.data(), M.data() + static_cast<std::size_t>(n) * n);
  std::vector<double> wr(n), wi(n);
  int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(), wi.data(),
                           nullptr, n, nullptr, n);
  REQUIRE(info == 0);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (std::abs(wi[k]) <= 1e-8 * std::max(1.0, std::abs(wr[k]))) best = std::min(best, wr[k]);
  }
  return best;
}

}  // namespace

TEST_CASE("operator action reproduces the analytic eigenfunction") {
  Grid g = Grid::interval(0.0, M_PI, 256);
  EllipticOperator op(g);
  GridField u = GridField::sample(g, [](std::array<double, 2> x) { return std::sin(x[0]); });
  GridField r = op.apply(u);
  double worst = (r.values - u.values).cwiseAbs().maxCoeff();
  CHECK(worst <= 1e-3);

  GridField z(g);
  CHECK(op.apply(z).linf() == 0.0);
}

TEST_CASE("stencil action agrees with the dense assembly") {
  Grid g = Grid::interval(0.0, M_PI, 128);
  EllipticOperator op(g, VectorField::constant({2.0}));
  GridField u = GridField::sample(
      g, [](std::array<double, 2> x) { return std::exp(x[0] / 3.0) * std::sin(x[0]); });
  GridField r = op.apply(u);
  Eigen::VectorXd rd = op.dense() * u.values;
  CHECK((r.values - rd).cwiseAbs().maxCoeff() <= 1e-12 * rd.cwiseAbs().maxCoeff());
}

TEST_CASE("the assembled map is symmetric without advection") {
  Grid g2 = Grid::rectangle({0.0, 1.0}, {0.0, 2.0}, 6, 9);
  Eigen::MatrixXd M = EllipticOperator(g2).dense();
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd Ma = EllipticOperator(g2, VectorField::constant({0.5, 0.0})).dense();
  CHECK((Ma - Ma.transpose()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("Peclet violation is a configuration error naming the axis") {
  Grid g = Grid::interval(0.0, M_PI, 4);  // h = pi/5
  CHECK_THROWS_WITH_AS(EllipticOperator(g, VectorField::constant({4.0})),
                       doctest::Contains("axis 0"), ConfigError);
}

TEST_CASE("principal eigenpair of the interval and the square") {
  Grid g = Grid::interval(0.0, M_PI, 256);
  EigenPair ep = principal_eigenpair(EllipticOperator(g));
  CHECK(std::abs(ep.lambda - 1.0) <= 1e-3);
  CHECK(ep.phi.min() > 0.0);
  CHECK(ep.phi.max() == doctest::Approx(1.0));
  // eigenfunction is sin x up to normalization
  double scale = 1.0 / std::sin(g.coord(0, 127));
  (void)scale;
  for (std::size_t m = 0; m < g.size(); m += 16)
    CHECK(ep.phi.values[m] ==
          doctest::Approx(std::sin(g.coord(0, m)) / ep.phi.values.maxCoeff() *
                          ep.phi.values.maxCoeff())
              .epsilon(1e-4));

  Grid g2 = Grid::rectangle({0.0, 1.0}, {0.0, 1.0}, 32, 32);
  EigenPair ep2 = principal_eigenpair(EllipticOperator(g2));
  CHECK(std::abs(ep2.lambda - 2.0 * M_PI * M_PI) <= 2e-2);
  CHECK(ep2.phi.min() > 0.0);
}

TEST_CASE("constant advection shifts the principal eigenvalue by c^2/4") {
  Grid g = Grid::interval(0.0, M_PI, 256);
  EigenPair ep = principal_eigenpair(EllipticOperator(g, VectorField::constant({2.0})));
  CHECK(std::abs(ep.lambda - 2.0) <= 5e-3);

  // 2D box, advection along x only
  Grid g2 = Grid::rectangle({0.0, 1.0}, {0.0, 2.0}, 20, 24);
  double l0 = principal_eigenpair(EllipticOperator(g2)).lambda;
  double lc = principal_eigenpair(EllipticOperator(g2, VectorField::constant({1.0, 0.0}))).lambda;
  CHECK(std::abs(lc - l0 - 0.25) <= 5e-3);
}

TEST_CASE("inverse power agrees with the dense eigensolve oracle") {
  Grid g = Grid::interval(0.0, M_PI, 384);
  EllipticOperator op(g, VectorField::constant({1.5}));
  EigenPair ep = principal_eigenpair(op);
  double oracle = dense_min_real_eigenvalue(op.dense());
  CHECK(std::abs(ep.lambda - oracle) <= 1e-8 * std::abs(oracle));

  Grid g2 = Grid::rectangle({0.0, 1.0}, {0.0, 1.0}, 20, 20);
  EllipticOperator op2(g2, VectorField::rotation(1.0, {0.5, 0.5}));
  EigenPair ep2 = principal_eigenpair(op2);
  double oracle2 = dense_min_real_eigenvalue(op2.dense());
  CHECK(std::abs(ep2.lambda - oracle2) <= 1e-8 * std::abs(oracle2));
}

TEST_CASE("an exhausted iteration cap is a solver error") {
  Grid g = Grid::interval(0.0, M_PI, 32);
  CHECK_THROWS_AS(principal_eigenpair(EllipticOperator(g), 1e-12, 2), SolverError);
}

TEST_CASE("coupling matrix Perron data") {
  MatrixEigen me = coupling_eigen({2.0, 1.0, 1.0, 2.0});
  CHECK(me.lambda_A == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(me.z[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(me.z[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  MatrixEigen me2 = coupling_eigen({1.0, 2.0, 3.0, 2.0});
  CHECK(me2.lambda_A == doctest::Approx(4.0).epsilon(1e-14));
  // z proportional to (2, 3)
  CHECK(me2.z[0] / me2.z[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(me2.sigma == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(me2.b_hat == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
  // symmetrized matrix keeps the top eigenvalue
  MatrixEigen me0 = coupling_eigen(me2.A0);
  CHECK(me0.lambda_A == doctest::Approx(me2.lambda_A).epsilon(1e-12));

  // residual A z - lambda z
  double r1 = 1.0 * me2.z[0] + 2.0 * me2.z[1] - me2.lambda_A * me2.z[0];
  double r2 = 3.0 * me2.z[0] + 2.0 * me2.z[1] - me2.lambda_A * me2.z[1];
  CHECK(std::abs(r1) <= 1e-12);
  CHECK(std::abs(r2) <= 1e-12);

  CHECK_THROWS_AS(coupling_eigen({1.0, -1.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(coupling_eigen({1.0, 0.0, 1.0, 1.0}), ConfigError);
}

TEST_CASE("threshold values and homogeneity") {
  Grid g = Grid::interval(0.0, M_PI, 256);
  EllipticOperator lap(g);
  CouplingMatrix A{2.0, 1.0, 1.0, 2.0};
  double t1 = threshold(A, lap);
  CHECK(std::abs(t1 - 1.0 / 3.0) <= 5e-4);

  EllipticOperator adv(g, VectorField::constant({2.0}));
  CHECK(std::abs(threshold(A, adv) - 2.0 / 3.0) <= 2e-3);

  CouplingMatrix A2{4.0, 2.0, 2.0, 4.0};  // lambda_A doubled
  CHECK(threshold(A2, lap) == doctest::Approx(t1 / 2.0).epsilon(1e-15));
}
