#include "dlsfem/assembly.hpp"
#include "dlsfem/error.hpp"
#include "dlsfem/solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

using namespace dlsfem;

namespace {

Eigen::SparseMatrix<double> diagonal_matrix(const Eigen::VectorXd& d) {
  Eigen::SparseMatrix<double> a(d.size(), d.size());
  for (int i = 0; i < d.size(); ++i) a.insert(i, i) = d[i];
  a.makeCompressed();
  return a;
}

DlsSystem small_system(int n, int m) {
  const ReconstructedSpace space(classify_boundary(generate_unit_square_triangular(n), parse_boundary_rule("x==1")), m);
  return assemble_system(space, {5, 1}, example1_solution({5, 1}));
}

}  // namespace

TEST(Solver, IdentityInOneIteration) {
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(10, -1, 2);
  const auto r = solve_spd(diagonal_matrix(Eigen::VectorXd::Ones(10)), b);
  EXPECT_LE(r.report.iterations, 1);
  EXPECT_LT((r.solution - b).norm(), 1e-14);
}

TEST(Solver, DiagonalClosedForm) {
  const int n = 50;
  const auto r = solve_spd(diagonal_matrix(Eigen::VectorXd::LinSpaced(n, 1, n)), Eigen::VectorXd::Ones(n));
  for (int i = 0; i < n; ++i) EXPECT_NEAR(r.solution[i], 1.0 / (i + 1), 1e-10);
  EXPECT_LE(r.report.relative_residual, 1e-10);
  EXPECT_EQ(r.report.method, "jacobi-pcg");
}

TEST(Solver, AgreesWithDenseFactorization) {
  const auto sys = small_system(8, 2);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(sys.matrix.to_sparse());
  const Eigen::VectorXd reference = dense.ldlt().solve(sys.rhs);
  SolveOptions options;
  options.tolerance = 1e-12;
  const auto cg = solve_spd(sys, options);
  EXPECT_LT((cg.solution - reference).norm(), 1e-8 * reference.norm());
  EXPECT_LE(cg.report.relative_residual, 1e-12);
  EXPECT_EQ(cg.report.residual_history.size(), static_cast<std::size_t>(cg.report.iterations) + 1);
  options.method = SolverMethod::cholesky;
  const auto direct = solve_spd(sys, options);
  EXPECT_LT((direct.solution - reference).norm(), 1e-8 * reference.norm());
  EXPECT_LE(direct.report.relative_residual, 1e-12);
}

TEST(Solver, InitialGuessDoesNotChangeTheAnswer) {
  const auto sys = small_system(4, 1);
  SolveOptions options;
  options.tolerance = 1e-12;
  const auto a = solve_spd(sys.matrix, sys.rhs, options);
  const Eigen::VectorXd guess = Eigen::VectorXd::Constant(sys.rhs.size(), 3.0);
  const auto b = solve_spd(sys.matrix, sys.rhs, options, &guess);
  EXPECT_LE((a.solution - b.solution).norm(), 10 * options.tolerance * a.solution.norm());
}

TEST(Solver, DeterministicAtOneThread) {
  const auto sys = small_system(4, 2);
  const auto a = solve_spd(sys);
  const auto b = solve_spd(sys);
  EXPECT_EQ(a.solution, b.solution);
  EXPECT_EQ(a.report.iterations, b.report.iterations);
}

TEST(Solver, RejectsAsymmetricMatrix) {
  Eigen::SparseMatrix<double> a = diagonal_matrix(Eigen::VectorXd::Constant(3, 2.0));
  a.insert(0, 1) = 0.5;
  a.makeCompressed();
  EXPECT_THROW(solve_spd(a, Eigen::VectorXd::Ones(3)), SolverError);
}

TEST(Solver, ReportsNonConvergenceWithHistory) {
  const auto sys = small_system(4, 2);
  SolveOptions options;
  options.max_iterations = 5;
  try {
    solve_spd(sys, options);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GE(e.residual_history().size(), 6u);
  }
}

TEST(Solver, ToleranceMustBeInUnitInterval) {
  SolveOptions options;
  options.tolerance = 0.0;
  EXPECT_THROW(solve_spd(diagonal_matrix(Eigen::VectorXd::Ones(2)), Eigen::VectorXd::Ones(2), options), ValidationError);
  options.tolerance = 1.0;
  EXPECT_THROW(solve_spd(diagonal_matrix(Eigen::VectorXd::Ones(2)), Eigen::VectorXd::Ones(2), options), ValidationError);
}

TEST(Solver, ZeroRightHandSide) {
  const auto r = solve_spd(diagonal_matrix(Eigen::VectorXd::Ones(4)), Eigen::VectorXd::Zero(4));
  EXPECT_EQ(r.solution, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(r.report.iterations, 0);
}

TEST(Solver, MethodNames) {
  EXPECT_EQ(parse_solver_method("jacobi-cg"), SolverMethod::jacobi_cg);
  EXPECT_EQ(parse_solver_method("cholesky"), SolverMethod::cholesky);
  EXPECT_THROW(parse_solver_method("gmres"), ValidationError);
}
