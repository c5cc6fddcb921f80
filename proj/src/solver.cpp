#include "dlsfem/solver.hpp"

#include "dlsfem/error.hpp"

#ifdef DLSFEM_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#else
#include <Eigen/SparseCholesky>
#endif

#include <chrono>
#include <cmath>
#include <string>

namespace dlsfem {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
// Restarts allowed when the recurrence residual drifts from the true one.
constexpr int kMaxRestarts = 5;

template <class Apply>
SolveResult preconditioned_cg(Apply&& apply, const Eigen::VectorXd& diagonal, const Eigen::VectorXd& b,
                              const SolveOptions& options, const Eigen::VectorXd* initial_guess) {
  const auto start = std::chrono::steady_clock::now();
  if (!(options.tolerance > 0.0 && options.tolerance < 1.0))
    throw ValidationError("solver: tolerance must lie in (0, 1)");
  const Eigen::Index n = b.size();
  if (diagonal.size() != n) throw ValidationError("solver: dimension mismatch");
  if (initial_guess && initial_guess->size() != n) throw ValidationError("solver: initial guess has wrong size");
  const long long max_iter = options.max_iterations > 0 ? options.max_iterations : 20LL * n;

  SolveResult result;
  auto finish = [&] {
    result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  };
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    result.solution = Eigen::VectorXd::Zero(n);
    return finish();
  }

  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(diagonal[i] > 0.0)) throw SolverError("solver: non-positive diagonal entry " + std::to_string(i), {});
    inv_diag[i] = 1.0 / diagonal[i];
  }

  Eigen::VectorXd x = initial_guess ? *initial_guess : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r(n), z(n), p(n), q(n);
  auto& history = result.report.residual_history;
  long long iterations = 0;

  for (int restart = 0; restart <= kMaxRestarts; ++restart) {
    apply(x, q);
    r = b - q;
    double rel = r.norm() / bnorm;
    if (restart == 0) history.push_back(rel);
    if (rel <= options.tolerance) {
      result.solution = std::move(x);
      result.report.iterations = static_cast<int>(iterations);
      result.report.relative_residual = rel;
      return finish();
    }
    z = inv_diag.cwiseProduct(r);
    p = z;
    double rz = r.dot(z);
    while (iterations < max_iter) {
      apply(p, q);
      const double pq = p.dot(q);
      if (!(pq > 0.0)) throw SolverError("solver: matrix is not positive definite", history);
      const double alpha = rz / pq;
      x += alpha * p;
      r -= alpha * q;
      ++iterations;
      rel = r.norm() / bnorm;
      history.push_back(rel);
      if (rel <= options.tolerance) break;
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    if (iterations >= max_iter && rel > options.tolerance) break;
  }
  apply(x, q);
  const double final_rel = (b - q).norm() / bnorm;
  if (final_rel <= options.tolerance) {
    result.solution = std::move(x);
    result.report.iterations = static_cast<int>(iterations);
    result.report.relative_residual = final_rel;
    return finish();
  }
  throw SolverError("solver: no convergence after " + std::to_string(iterations) + " iterations (relative residual " +
                        std::to_string(final_rel) + ")",
                    history);
}

SolveResult direct_cholesky(const BlockSparseMatrix& a, const Eigen::VectorXd& b, const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (!(options.tolerance > 0.0 && options.tolerance < 1.0))
    throw ValidationError("solver: tolerance must lie in (0, 1)");
  SolveResult result;
#ifdef DLSFEM_HAVE_CHOLMOD
  result.report.method = "cholmod-llt";
  Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>> factor;
#else
  result.report.method = "eigen-ldlt";
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
#endif
  const Eigen::SparseMatrix<double> sparse = a.to_sparse();
  factor.compute(sparse);
  if (factor.info() != Eigen::Success) throw SolverError("solver: Cholesky factorization failed (matrix not positive definite)", {});
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  auto& history = result.report.residual_history;
  history.push_back(bnorm > 0.0 ? 1.0 : 0.0);
  if (bnorm > 0.0) {
    x = factor.solve(b);
    Eigen::VectorXd r = b - sparse * x;
    history.push_back(r.norm() / bnorm);
    // Iterative refinement for badly scaled systems.
    for (int step = 0; step < kMaxRestarts && history.back() > options.tolerance; ++step) {
      x += factor.solve(r);
      r = b - sparse * x;
      history.push_back(r.norm() / bnorm);
      ++result.report.iterations;
    }
    if (history.back() > options.tolerance)
      throw SolverError("solver: direct solve missed the tolerance (relative residual " + std::to_string(history.back()) + ")",
                        history);
  }
  result.solution = std::move(x);
  result.report.relative_residual = history.back();
  result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

SolverMethod parse_solver_method(const std::string& text) {
  if (text == "jacobi-cg") return SolverMethod::jacobi_cg;
  if (text == "cholesky") return SolverMethod::cholesky;
  throw ValidationError("unknown solver '" + text + "' (expected jacobi-cg or cholesky)");
}

const char* to_string(SolverMethod method) { return method == SolverMethod::jacobi_cg ? "jacobi-cg" : "cholesky"; }

SolveResult solve_spd(const BlockSparseMatrix& a, const Eigen::VectorXd& b, const SolveOptions& options,
                      const Eigen::VectorXd* initial_guess) {
  if (a.rows() != b.size()) throw ValidationError("solver: dimension mismatch");
  if (a.max_asymmetry() > kSymmetryTolerance * a.max_abs()) throw SolverError("solver: matrix is not symmetric", {});
  if (options.method == SolverMethod::cholesky) {
    if (initial_guess) throw ValidationError("solver: the direct method takes no initial guess");
    return direct_cholesky(a, b, options);
  }
  const int threads = options.threads;
  return preconditioned_cg([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { a.multiply(x, y, threads); },
                           a.diagonal(), b, options, initial_guess);
}

SolveResult solve_spd(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b, const SolveOptions& options,
                      const Eigen::VectorXd* initial_guess) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw ValidationError("solver: dimension mismatch");
  if (options.method != SolverMethod::jacobi_cg) throw ValidationError("solver: sparse-matrix overload supports jacobi-cg only");
  const Eigen::SparseMatrix<double> transposed = a.transpose();
  const Eigen::SparseMatrix<double> diff = a - transposed;
  double asym = 0.0, scale = 0.0;
  for (Eigen::Index i = 0; i < diff.nonZeros(); ++i) asym = std::max(asym, std::abs(diff.valuePtr()[i]));
  for (Eigen::Index i = 0; i < a.nonZeros(); ++i) scale = std::max(scale, std::abs(a.valuePtr()[i]));
  if (asym > kSymmetryTolerance * scale) throw SolverError("solver: matrix is not symmetric", {});
  return preconditioned_cg([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; }, a.diagonal(), b, options,
                           initial_guess);
}

SolveResult solve_spd(const DlsSystem& system, const SolveOptions& options) {
  return solve_spd(system.matrix, system.rhs, options);
}

}  // namespace dlsfem
