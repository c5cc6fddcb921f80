#pragma once

#include "dlsfem/assembly.hpp"
#include "dlsfem/sparse.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace dlsfem {

enum class SolverMethod {
  jacobi_cg,  ///< conjugate gradients with diagonal preconditioning
  cholesky,   ///< sparse Cholesky factorization (CHOLMOD when available)
};

SolverMethod parse_solver_method(const std::string& text);
const char* to_string(SolverMethod method);

struct SolveOptions {
  SolverMethod method = SolverMethod::jacobi_cg;
  double tolerance = 1e-10;  ///< relative residual ||b - A x|| / ||b||
  int max_iterations = 0;    ///< 0 selects 20 x the number of unknowns
  int threads = 1;
};

/// Iterations counts CG steps, or refinement steps for the direct method.
struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  double seconds = 0.0;
  std::string method = "jacobi-pcg";
  std::vector<double> residual_history;
};

struct SolveResult {
  Eigen::VectorXd solution;
  SolveReport report;
};

/// Solves A x = b to ||b - A x|| <= tolerance ||b||. Throws SolverError when the matrix is
/// not symmetric, not positive definite or the iteration limit is reached, ValidationError
/// for a tolerance outside (0, 1). The Eigen overload supports only jacobi_cg.
SolveResult solve_spd(const BlockSparseMatrix& a, const Eigen::VectorXd& b, const SolveOptions& options = {},
                      const Eigen::VectorXd* initial_guess = nullptr);
SolveResult solve_spd(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b, const SolveOptions& options = {},
                      const Eigen::VectorXd* initial_guess = nullptr);
SolveResult solve_spd(const DlsSystem& system, const SolveOptions& options = {});

}  // namespace dlsfem
