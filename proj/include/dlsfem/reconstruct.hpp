#pragma once

#include "dlsfem/mesh.hpp"
#include "dlsfem/patch.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dlsfem {

/// Scaled monomials ((x - c_x)/s)^a ((y - c_y)/s)^b, a + b <= degree, in graded
/// lexicographic order: 1, X, Y, X^2, XY, Y^2, ...
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int degree, Point center, double scale);

  int degree() const noexcept { return degree_; }
  int size() const noexcept { return static_cast<int>(exponents_.size()); }
  const Point& center() const noexcept { return center_; }
  double scale() const noexcept { return scale_; }
  std::pair<int, int> exponent(int i) const { return exponents_[i]; }

  Eigen::VectorXd values(const Point& x) const;
  /// Values and physical-coordinate derivatives (includes the 1/scale chain factor).
  void evaluate(const Point& x, Eigen::Ref<Eigen::VectorXd> value, Eigen::Ref<Eigen::VectorXd> dx,
                Eigen::Ref<Eigen::VectorXd> dy) const;

  static int dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

 private:
  int degree_ = 0;
  Point center_ = Point::Zero();
  double scale_ = 1.0;
  std::vector<std::pair<int, int>> exponents_;
};

/// Condition of the reduced collocation matrix of a patch.
struct UnisolvenceReport {
  double condition = 0.0;
  int rows = 0;     ///< collocation points other than the constraint point
  int columns = 0;  ///< non-constant monomials
  bool ok = false;

  static constexpr double max_condition = 1e12;
};

/// Reduced design matrix: rows are the non-constraint points, columns the non-constant
/// monomials of `basis`.
Eigen::MatrixXd reduced_design_matrix(std::span<const Point> points, const MonomialBasis& basis);

UnisolvenceReport check_unisolvence(std::span<const Point> points, const MonomialBasis& basis);
UnisolvenceReport check_unisolvence(const Mesh& mesh, const ElementPatch& patch, int degree);

/// Least-squares fit over `points` with exact interpolation at points[0], which must be
/// the basis center. Returns monomial coefficients. Throws UnisolvenceError
/// (tagged with `element`) when the reduced system is rank-deficient or too ill-conditioned.
Eigen::VectorXd fit_constrained_ls(std::span<const Point> points, const MonomialBasis& basis,
                                   std::span<const double> values, int element = -1);

/// Monomial basis attached to a mesh element: centered at its barycenter, scaled by h_K.
MonomialBasis element_basis(const Mesh& mesh, int element, int degree);

/// Coefficient matrix of the reconstruction on one element.
///
/// Column j maps the value at the collocation point of patch member j to the monomial
/// coefficients of the local polynomial, so column j holds lambda_{members[j]} restricted
/// to the element. Column 0 belongs to the element itself.
struct ReconstructionBasis {
  int element = -1;
  std::vector<int> members;
  MonomialBasis basis;
  Eigen::MatrixXd coefficients;  ///< basis.size() x members.size()
  double condition = 0.0;

  int patch_size() const noexcept { return static_cast<int>(members.size()); }
};

/// Points version: coefficient matrix [[1, 0], [-P 1, P]] with P the pseudo-inverse of
/// the reduced design matrix.
Eigen::MatrixXd constrained_ls_operator(std::span<const Point> points, const MonomialBasis& basis, int element = -1);

ReconstructionBasis build_basis_matrix(const Mesh& mesh, const ElementPatch& patch, int degree);

/// Values and gradients of every lambda_{K'} (rows, patch order) at each point (columns).
struct BasisTable {
  Eigen::MatrixXd values;
  Eigen::MatrixXd grad_x;
  Eigen::MatrixXd grad_y;
};

BasisTable evaluate_basis(const ReconstructionBasis& basis, std::span<const Point> points);

/// The reconstructed approximation space U_h on a mesh: patches plus per-element bases.
class ReconstructedSpace {
 public:
  ReconstructedSpace(Mesh mesh, int degree, int patch_size = 0, int threads = 1);

  const Mesh& mesh() const noexcept { return mesh_; }
  int degree() const noexcept { return degree_; }
  int patch_size() const noexcept { return patch_size_; }
  int num_elements() const noexcept { return mesh_.num_cells(); }
  const std::vector<ElementPatch>& patches() const noexcept { return patches_; }
  const ElementPatch& patch(int k) const { return patches_[k]; }
  const ReconstructionBasis& basis(int k) const { return bases_[k]; }

  /// Monomial coefficients on element k of R g, where g's collocation values are
  /// `element_values` (one per element, indexed by element id).
  Eigen::VectorXd local_coefficients(int k, const Eigen::Ref<const Eigen::VectorXd>& element_values) const;

 private:
  Mesh mesh_;
  int degree_ = 1;
  int patch_size_ = 0;
  std::vector<ElementPatch> patches_;
  std::vector<ReconstructionBasis> bases_;
};

/// Piecewise polynomial R g with per-element monomial coefficients.
struct PiecewisePolynomial {
  std::vector<MonomialBasis> bases;
  std::vector<Eigen::VectorXd> coefficients;

  double evaluate(int element, const Point& x) const { return bases[element].values(x).dot(coefficients[element]); }
};

/// Collocation values of g at every barycenter.
Eigen::VectorXd sample_at_barycenters(const Mesh& mesh, const std::function<double(const Point&)>& g);

PiecewisePolynomial reconstruct_function(const ReconstructedSpace& space, const Eigen::VectorXd& element_values);
PiecewisePolynomial reconstruct_function(const ReconstructedSpace& space, const std::function<double(const Point&)>& g);

/// Sample points inside a cell: a barycentric lattice with `per_edge` subdivisions on
/// every fan triangle (vertices included).
std::vector<Point> cell_sample_points(const Mesh& mesh, int cell, int per_edge);

/// Sampled lower bound of Lambda(m, S(K)) = max_p max_{S(K)}|p| / max_{I_K}|p|.
/// The first sample is the constant polynomial, the others use random coefficients
/// drawn from `rng_seed`, so the estimate is >= 1 and nondecreasing in n_samples.
double estimate_lambda(const Mesh& mesh, const ElementPatch& patch, int degree, int n_samples,
                       std::uint64_t rng_seed = 1, int per_edge = 6);

}  // namespace dlsfem
