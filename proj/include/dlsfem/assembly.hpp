#pragma once

#include "dlsfem/elasticity.hpp"
#include "dlsfem/reconstruct.hpp"
#include "dlsfem/sparse.hpp"

#include <Eigen/Core>

namespace dlsfem {

/// Average and jump of a vector field across a face: jump = u+ (x) n+ + u- (x) n-.
struct VectorTrace {
  Eigen::Vector2d average;
  Eigen::Matrix2d jump;
};

/// Average and jump of a tensor field across a face: jump = sigma+ n+ + sigma- n-.
struct TensorTrace {
  SymTensor2 average;
  Eigen::Vector2d jump;
};

VectorTrace jump_average_vector(const Eigen::Vector2d& plus, const Eigen::Vector2d& minus, const Eigen::Vector2d& normal_plus);
/// Boundary face: average = u, jump = u (x) n.
VectorTrace jump_average_vector(const Eigen::Vector2d& value, const Eigen::Vector2d& normal);
TensorTrace jump_average_tensor(const SymTensor2& plus, const SymTensor2& minus, const Eigen::Vector2d& normal_plus);
/// Boundary face: average = sigma, jump = sigma n.
TensorTrace jump_average_tensor(const SymTensor2& value, const Eigen::Vector2d& normal);

/// Quadrature degrees; non-positive values select 2m (volume) and 2m + 1 (faces).
struct AssemblyOptions {
  int volume_degree = 0;
  int face_degree = 0;
  int threads = 1;
};

/// Normal equations of the discrete least-squares functional:
/// J_h(w) = w^T A w - 2 b^T w + data_constant.
struct DlsSystem {
  DofMap dofs;
  BlockSparseMatrix matrix;
  Eigen::VectorXd rhs;
  double data_constant = 0.0;
};

/// Block sparsity of the system: elements i and j couple when both belong to the patch
/// of one cell, or to the union of the patches on the two sides of one interior face.
std::vector<std::vector<int>> system_pattern(const ReconstructedSpace& space);

/// Integrates a_h and l_h with the reconstructed basis. Throws ValidationError when
/// the mesh has no Dirichlet face or the quadrature degrees are below 2m / 2m + 1.
DlsSystem assemble_system(const ReconstructedSpace& space, const MaterialParams& params,
                          const ManufacturedSolution& data, const AssemblyOptions& options = {});

/// Discrete (sigma_h, u_h) restricted to one element, evaluated from its polynomial
/// coefficients. `w` uses the DofMap layout.
class LocalFields {
 public:
  LocalFields(const ReconstructedSpace& space, int element, const Eigen::VectorXd& w);

  struct Value {
    SymTensor2 sigma;
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    Eigen::Vector2d div_sigma = Eigen::Vector2d::Zero();
    Eigen::Matrix2d grad_u = Eigen::Matrix2d::Zero();
  };

  Value operator()(const Point& x) const;

 private:
  MonomialBasis basis_;
  Eigen::Matrix<double, Eigen::Dynamic, kFieldsPerElement> coefficients_;
};

/// The individual sums of J_h.
struct FunctionalTerms {
  double constitutive = 0.0;       ///< sum_K ||A sigma - eps(u)||^2
  double equilibrium = 0.0;        ///< sum_K ||div sigma + f||^2
  double displacement_jump = 0.0;  ///< interior faces, (1/h_e) ||[u]||^2
  double stress_jump = 0.0;        ///< interior faces, (1/h_e) ||[sigma]||^2
  double dirichlet = 0.0;          ///< (1/h_e) ||u - g||^2
  double neumann = 0.0;            ///< (1/h_e) ||sigma n - h||^2

  double total() const { return constitutive + equilibrium + displacement_jump + stress_jump + dirichlet + neumann; }
};

/// J_h(sigma_h, u_h) by direct quadrature of the residuals (independent of the assembled system).
FunctionalTerms evaluate_functional(const ReconstructedSpace& space, const MaterialParams& params,
                                    const ManufacturedSolution& data, const Eigen::VectorXd& w,
                                    const AssemblyOptions& options = {});

/// w^T A w - 2 b^T w + c.
double quadratic_form_value(const DlsSystem& system, const Eigen::VectorXd& w);

/// Collocation values of the exact fields: w[5e + c] = field c at the barycenter of e.
Eigen::VectorXd interpolate_exact(const Mesh& mesh, const ManufacturedSolution& data);

}  // namespace dlsfem
