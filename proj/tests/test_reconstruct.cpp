#include "dlsfem/error.hpp"
#include "dlsfem/reconstruct.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dlsfem;

namespace {

Mesh star_of_four() {
  return Mesh({{0, 0}, {1, 0}, {0.5, 0.8}, {0.5, -0.7}, {1.2, 0.7}, {-0.2, 0.7}},
              {{0, 1, 2}, {0, 3, 1}, {1, 4, 2}, {2, 5, 0}});
}

// Random polynomial of total degree <= m as a callable, with its exponent list.
struct RandomPolynomial {
  std::vector<std::pair<int, int>> exponents;
  std::vector<double> coefficients;

  RandomPolynomial(int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b) {
        exponents.emplace_back(a, b);
        coefficients.push_back(u(rng));
      }
  }
  double operator()(const Point& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < exponents.size(); ++i)
      s += coefficients[i] * std::pow(x.x(), exponents[i].first) * std::pow(x.y(), exponents[i].second);
    return s;
  }
};

}  // namespace

TEST(MonomialBasis, OrderAndCenterValue) {
  const MonomialBasis basis(3, Point(0.3, 0.4), 0.5);
  EXPECT_EQ(basis.size(), 10);
  EXPECT_EQ(basis.exponent(1), std::make_pair(1, 0));
  EXPECT_EQ(basis.exponent(2), std::make_pair(0, 1));
  EXPECT_EQ(basis.exponent(4), std::make_pair(1, 1));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(10);
  e[0] = 1.0;
  EXPECT_EQ(basis.values(Point(0.3, 0.4)), e);
  EXPECT_DOUBLE_EQ(basis.values(Point(0.8, 0.4))[3], 1.0);
}

TEST(MonomialBasis, DerivativesMatchFiniteDifferences) {
  const MonomialBasis basis(4, Point(0.1, -0.2), 0.3);
  const Point x(0.35, 0.05);
  Eigen::VectorXd v(basis.size()), dx(basis.size()), dy(basis.size());
  basis.evaluate(x, v, dx, dy);
  for (int i = 0; i < basis.size(); ++i) {
    const auto g = oracle::fd_gradient([&](const Point& p) { return basis.values(p)[i]; }, x, 1e-6);
    EXPECT_NEAR(dx[i], g.x(), 1e-6 * std::max(1.0, std::abs(g.x())));
    EXPECT_NEAR(dy[i], g.y(), 1e-6 * std::max(1.0, std::abs(g.y())));
  }
}

TEST(FitConstrainedLs, ConstantValues) {
  const auto pts = oracle::random_points(9, 3);
  const MonomialBasis basis(2, pts[0], 1.0);
  const std::vector<double> values(9, 2.5);
  const Eigen::VectorXd c = fit_constrained_ls(pts, basis, values);
  EXPECT_NEAR(c[0], 2.5, 1e-15);
  EXPECT_LT(c.tail(5).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FitConstrainedLs, ReproducesLinearFunction) {
  const std::vector<Point> pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const MonomialBasis basis(1, pts[0], 1.0);
  std::vector<double> values;
  for (const auto& p : pts) values.push_back(2 + 3 * p.x() + 4 * p.y());
  const Eigen::VectorXd c = fit_constrained_ls(pts, basis, values);
  EXPECT_NEAR(c[0], 2.0, 1e-14);
  EXPECT_NEAR(c[1], 3.0, 1e-14);
  EXPECT_NEAR(c[2], 4.0, 1e-14);
}

TEST(FitConstrainedLs, LinearMatchesNormalEquationOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto pts = oracle::random_points(4, 99);
  const MonomialBasis basis(1, pts[0], 1.0);
  std::vector<double> values(4);
  for (auto& v : values) v = u(rng);
  const Eigen::VectorXd c = fit_constrained_ls(pts, basis, values);
  const Eigen::MatrixXd op = oracle::linear_block_formula(pts);
  const Eigen::VectorXd expected = op * Eigen::Map<const Eigen::VectorXd>(values.data(), 4);
  EXPECT_LT((c - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Unisolvence, CollinearPointsFail) {
  const std::vector<Point> pts = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  EXPECT_FALSE(check_unisolvence(pts, MonomialBasis(1, pts[0], 1.0)).ok);
  EXPECT_THROW(fit_constrained_ls(pts, MonomialBasis(1, pts[0], 1.0), std::vector<double>(4, 1.0), 5), UnisolvenceError);
}

TEST(Unisolvence, GenericTrianglePatchPasses) {
  const Mesh mesh = star_of_four();
  const auto r = check_unisolvence(mesh, build_patch(mesh, 0, 4), 1);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.rows, 3);
  EXPECT_EQ(r.columns, 2);
  // rank of the 3x2 reduced matrix by an independent full-pivot LU
  std::vector<Point> pts;
  for (int k : build_patch(mesh, 0, 4).members) pts.push_back(mesh.barycenter(k));
  Eigen::MatrixXd a(3, 2);
  for (int j = 1; j < 4; ++j) a.row(j - 1) = (pts[j] - pts[0]).transpose();
  EXPECT_EQ(a.fullPivLu().rank(), 2);
}

TEST(Unisolvence, TooFewPointsFail) {
  const auto pts = oracle::random_points(5, 4);
  const auto r = check_unisolvence(pts, MonomialBasis(2, pts[0], 1.0));
  EXPECT_FALSE(r.ok);
  const Mesh mesh = generate_unit_square_triangular(2);
  try {
    ReconstructedSpace(mesh, 2, 5);
    FAIL() << "expected UnisolvenceError";
  } catch (const UnisolvenceError& e) {
    EXPECT_GE(e.element(), 0);
  }
}

TEST(BasisMatrix, StarPatchMatchesBlockFormula) {
  const Mesh mesh = star_of_four();
  const auto patch = build_patch(mesh, 0, 4);
  const auto rb = build_basis_matrix(mesh, patch, 1);
  std::vector<Point> pts;
  for (int k : patch.members) pts.push_back(mesh.barycenter(k));
  Eigen::MatrixXd expected = oracle::linear_block_formula(pts);
  // library monomials are scaled by h_K: coefficient of ((x - x_K)/h) is h times the unscaled one
  expected.bottomRows(2) *= mesh.geometry(0).diameter;
  EXPECT_LT((rb.coefficients - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BasisMatrix, PartitionOfUnityAndPolynomialReproduction) {
  const Mesh mesh = generate_voronoi_polygonal(80, 4, 13);
  std::mt19937_64 rng(5);
  for (int m = 1; m <= 3; ++m) {
    const ReconstructedSpace space(mesh, m);
    for (int k = 0; k < mesh.num_cells(); k += 7) {
      const auto& rb = space.basis(k);
      const Eigen::VectorXd ones = rb.coefficients * Eigen::VectorXd::Ones(rb.patch_size());
      EXPECT_NEAR(ones[0], 1.0, 1e-13);
      EXPECT_LT(ones.tail(ones.size() - 1).cwiseAbs().maxCoeff(), 1e-10);
      for (int trial = 0; trial < 50; ++trial) {
        const RandomPolynomial p(m, rng);
        Eigen::VectorXd samples(rb.patch_size());
        for (int j = 0; j < rb.patch_size(); ++j) samples[j] = p(mesh.barycenter(rb.members[j]));
        const Eigen::VectorXd c = rb.coefficients * samples;
        // compare against a direct interpolation of p in the same local basis
        const auto pts = oracle::random_points(rb.basis.size() + 4, 1000 + trial, 0.2, 0.8);
        Eigen::MatrixXd v(pts.size(), rb.basis.size());
        Eigen::VectorXd rhs(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
          v.row(i) = rb.basis.values(pts[i]).transpose();
          rhs[i] = p(pts[i]);
        }
        const Eigen::VectorXd direct = v.colPivHouseholderQr().solve(rhs);
        EXPECT_LT((c - direct).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(EvaluateBasis, ConstraintRowsAndGradients) {
  const Mesh mesh = generate_voronoi_polygonal(60, 4, 31);
  const ReconstructedSpace space(mesh, 2);
  for (int k = 0; k < mesh.num_cells(); k += 5) {
    const auto& rb = space.basis(k);
    const Point xk = mesh.barycenter(k);
    const auto at_center = evaluate_basis(rb, std::vector<Point>{xk});
    EXPECT_NEAR(at_center.values(0, 0), 1.0, 1e-13);
    EXPECT_LT(at_center.values.col(0).tail(rb.patch_size() - 1).cwiseAbs().maxCoeff(), 1e-13);

    const auto& tri = mesh.geometry(k).triangles.front();
    const std::vector<Point> pts = {(tri[0] + tri[1] + tri[2]) / 3.0, 0.6 * tri[0] + 0.2 * tri[1] + 0.2 * tri[2]};
    const auto table = evaluate_basis(rb, pts);
    const double h = 1e-6 * mesh.geometry(k).diameter;
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(table.values.col(i).sum(), 1.0, 1e-12);
      for (int j = 0; j < rb.patch_size(); ++j) {
        auto lam = [&](const Point& x) { return evaluate_basis(rb, std::vector<Point>{x}).values(j, 0); };
        const auto g = oracle::fd_gradient(lam, pts[i], h);
        const double scale = std::max(1.0, g.norm());
        EXPECT_NEAR(table.grad_x(j, i), g.x(), 1e-6 * scale);
        EXPECT_NEAR(table.grad_y(j, i), g.y(), 1e-6 * scale);
      }
    }
  }
}

TEST(ReconstructFunction, GlobalPolynomialIsExact) {
  const Mesh mesh = generate_unit_square_triangular(6);
  std::mt19937_64 rng(8);
  for (int m = 1; m <= 3; ++m) {
    const ReconstructedSpace space(mesh, m);
    const RandomPolynomial p(m, rng);
    const auto rg = reconstruct_function(space, std::function<double(const Point&)>(p));
    for (int k = 0; k < mesh.num_cells(); ++k)
      for (const auto& x : cell_sample_points(mesh, k, 3)) EXPECT_NEAR(rg.evaluate(k, x), p(x), 1e-10);
  }
}

TEST(ReconstructFunction, ConstantAndLinearity) {
  const Mesh mesh = generate_voronoi_polygonal(50, 3, 6);
  const ReconstructedSpace space(mesh, 2);
  const auto c = reconstruct_function(space, Eigen::VectorXd::Constant(mesh.num_cells(), 3.0));
  const auto g1 = sample_at_barycenters(mesh, [](const Point& x) { return std::sin(3 * x.x()) + x.y(); });
  const auto g2 = sample_at_barycenters(mesh, [](const Point& x) { return std::exp(x.x() * x.y()); });
  const auto r1 = reconstruct_function(space, g1);
  const auto r2 = reconstruct_function(space, g2);
  const auto r12 = reconstruct_function(space, Eigen::VectorXd(2.0 * g1 - 0.5 * g2));
  for (int k = 0; k < mesh.num_cells(); ++k)
    for (const auto& x : cell_sample_points(mesh, k, 2)) {
      EXPECT_NEAR(c.evaluate(k, x), 3.0, 1e-12);
      EXPECT_NEAR(r12.evaluate(k, x), 2.0 * r1.evaluate(k, x) - 0.5 * r2.evaluate(k, x), 1e-12);
    }
}

TEST(ReconstructFunction, ConstraintExactness) {
  const Mesh mesh = generate_voronoi_polygonal(70, 2, 12);
  const ReconstructedSpace space(mesh, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Eigen::VectorXd v(mesh.num_cells());
  for (int i = 0; i < v.size(); ++i) v[i] = n(rng);
  const auto r = reconstruct_function(space, v);
  for (int k = 0; k < mesh.num_cells(); ++k) EXPECT_NEAR(r.evaluate(k, mesh.barycenter(k)), v[k], 1e-13 * std::max(1.0, std::abs(v[k])));
}

TEST(LambdaEstimate, BoundsAndMonotonicity) {
  const Mesh mesh = generate_voronoi_polygonal(60, 5, 3);
  const auto patch = build_patch(mesh, 10, 8);
  EXPECT_DOUBLE_EQ(estimate_lambda(mesh, patch, 0, 100), 1.0);
  double previous = 0.0;
  for (int n : {100, 200, 400}) {
    const double lam = estimate_lambda(mesh, patch, 2, n, 4);
    EXPECT_GE(lam, 1.0);
    EXPECT_GE(lam, previous);
    previous = lam;
  }
}

TEST(LambdaEstimate, StabilityShape) {
  const Mesh mesh = generate_voronoi_polygonal(60, 5, 3);
  const ReconstructedSpace space(mesh, 2);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < mesh.num_cells(); k += 6) {
    const auto& rb = space.basis(k);
    const double lam = estimate_lambda(mesh, space.patch(k), 2, 200);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd v(rb.patch_size());
      for (int j = 0; j < v.size(); ++j) v[j] = u(rng);
      v /= v.cwiseAbs().maxCoeff();
      const Eigen::VectorXd c = rb.coefficients * v;
      double peak = 0.0;
      for (const auto& x : cell_sample_points(mesh, k, 6)) peak = std::max(peak, std::abs(rb.basis.values(x).dot(c)));
      EXPECT_LE(peak, lam * std::sqrt(static_cast<double>(rb.patch_size())) * 1.1);
    }
  }
}
