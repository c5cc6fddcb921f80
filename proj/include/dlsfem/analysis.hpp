#pragma once

#include "dlsfem/assembly.hpp"
#include "dlsfem/elasticity.hpp"
#include "dlsfem/reconstruct.hpp"
#include "dlsfem/solver.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dlsfem {

/// Error quadrature defaults to 2m + 2 when `degree` is non-positive.
double l2_error(const Mesh& mesh, const PiecewisePolynomial& field, const std::function<double(const Point&)>& exact,
                int degree);
/// Maximum of |field - exact| over the sample lattice of every cell.
double max_error(const Mesh& mesh, const PiecewisePolynomial& field, const std::function<double(const Point&)>& exact,
                 int per_edge = 6);

double l2_error_sigma(const ReconstructedSpace& space, const Eigen::VectorXd& w, const ManufacturedSolution& exact,
                      int degree = 0);
double l2_error_u(const ReconstructedSpace& space, const Eigen::VectorXd& w, const ManufacturedSolution& exact,
                  int degree = 0);

/// |||tau|||^2 = sum_K (||tau||^2 + ||div tau||^2) + sum over interior and Neumann faces (1/h_e)||[tau]||^2,
/// for tau = sigma - sigma_h when `exact` is given and tau = sigma_h otherwise.
double energy_norm_sigma(const ReconstructedSpace& space, const Eigen::VectorXd& w,
                         const ManufacturedSolution* exact = nullptr, int degree = 0);
/// |||v|||^2 = sum_K ||eps(v)||^2 + sum over interior and Dirichlet faces (1/h_e)||[v]||^2.
double energy_norm_u(const ReconstructedSpace& space, const Eigen::VectorXd& w, const ManufacturedSolution* exact = nullptr,
                     int degree = 0);

/// 5 unknowns per element.
int dof_count(const Mesh& mesh);

struct ErrorSummary {
  double jh = 0.0;
  double jh_sqrt = 0.0;
  double l2_sigma = 0.0;
  double l2_u = 0.0;
  double energy_sigma = 0.0;
  double energy_u = 0.0;
};

ErrorSummary compute_errors(const ReconstructedSpace& space, const MaterialParams& params, const ManufacturedSolution& exact,
                            const Eigen::VectorXd& w, int threads = 1);

/// "example1" or "polynomial" (degree-m fixture).
ManufacturedSolution make_problem(const std::string& name, int degree, const MaterialParams& params);

/// One discrete solve with everything needed to report on it.
struct SolveRun {
  ReconstructedSpace space;
  DlsSystem system;
  SolveReport report;
  Eigen::VectorXd solution;
  ErrorSummary errors;
};

SolveRun run_solve(Mesh mesh, int degree, const MaterialParams& params, const ManufacturedSolution& data,
                   const SolveOptions& solve_options);

enum class MeshKind { triangular, voronoi };
MeshKind parse_mesh_kind(const std::string& text);
const char* to_string(MeshKind kind);

struct StudyConfig {
  int degree = 2;
  MaterialParams material{5.0, 1.0};
  MeshKind mesh_kind = MeshKind::triangular;
  /// n per side for triangular meshes, number of cells for Voronoi meshes.
  std::vector<int> levels{8, 16, 32, 64};
  int lloyd = 20;
  std::uint64_t seed = 7;
  std::string problem = "example1";
  std::string neumann_rule = "x==1";
  SolveOptions solve;
};

struct LevelResult {
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  ErrorSummary errors;
  SolveReport solve;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<LevelResult> levels;

  /// log(e_coarse / e_fine) / log(h_coarse / h_fine) for consecutive levels.
  std::vector<double> rates(const std::function<double(const LevelResult&)>& column) const;
  double finest_rate(const std::function<double(const LevelResult&)>& column) const;

  void write_csv(std::ostream& out) const;
  std::string to_json() const;
};

/// Mesh of one study level with the boundary classification applied.
Mesh study_mesh(const StudyConfig& config, int level);

ConvergenceReport convergence_study(const StudyConfig& config,
                                    const std::function<void(const LevelResult&)>& on_level = {});

}  // namespace dlsfem
