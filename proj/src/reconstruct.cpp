#include "dlsfem/reconstruct.hpp"

#include "dlsfem/error.hpp"
#include "dlsfem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dlsfem {

MonomialBasis::MonomialBasis(int degree, Point center, double scale)
    : degree_(degree), center_(std::move(center)), scale_(scale) {
  if (degree < 0) throw ValidationError("monomial basis: negative degree");
  if (!(scale > 0.0)) throw ValidationError("monomial basis: scale must be positive");
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) exponents_.emplace_back(a, d - a);
}

Eigen::VectorXd MonomialBasis::values(const Point& x) const {
  Eigen::VectorXd v(size());
  const double X = (x.x() - center_.x()) / scale_;
  const double Y = (x.y() - center_.y()) / scale_;
  // Powers up to the degree, reused across monomials.
  Eigen::VectorXd px(degree_ + 1), py(degree_ + 1);
  px[0] = py[0] = 1.0;
  for (int i = 1; i <= degree_; ++i) {
    px[i] = px[i - 1] * X;
    py[i] = py[i - 1] * Y;
  }
  for (int i = 0; i < size(); ++i) v[i] = px[exponents_[i].first] * py[exponents_[i].second];
  return v;
}

void MonomialBasis::evaluate(const Point& x, Eigen::Ref<Eigen::VectorXd> value, Eigen::Ref<Eigen::VectorXd> dx,
                             Eigen::Ref<Eigen::VectorXd> dy) const {
  const double X = (x.x() - center_.x()) / scale_;
  const double Y = (x.y() - center_.y()) / scale_;
  Eigen::VectorXd px(degree_ + 1), py(degree_ + 1);
  px[0] = py[0] = 1.0;
  for (int i = 1; i <= degree_; ++i) {
    px[i] = px[i - 1] * X;
    py[i] = py[i - 1] * Y;
  }
  const double inv = 1.0 / scale_;
  for (int i = 0; i < size(); ++i) {
    const auto [a, b] = exponents_[i];
    value[i] = px[a] * py[b];
    dx[i] = a > 0 ? a * px[a - 1] * py[b] * inv : 0.0;
    dy[i] = b > 0 ? b * px[a] * py[b - 1] * inv : 0.0;
  }
}

Eigen::MatrixXd reduced_design_matrix(std::span<const Point> points, const MonomialBasis& basis) {
  const int rows = static_cast<int>(points.size()) - 1;
  const int cols = basis.size() - 1;
  Eigen::MatrixXd a(std::max(rows, 0), cols);
  for (int i = 0; i < rows; ++i) a.row(i) = basis.values(points[i + 1]).tail(cols).transpose();
  return a;
}

UnisolvenceReport check_unisolvence(std::span<const Point> points, const MonomialBasis& basis) {
  UnisolvenceReport report;
  report.rows = static_cast<int>(points.size()) - 1;
  report.columns = basis.size() - 1;
  if (report.columns == 0) {
    report.condition = 1.0;
    report.ok = !points.empty();
    return report;
  }
  if (report.rows < report.columns) {
    report.condition = std::numeric_limits<double>::infinity();
    return report;
  }
  const Eigen::MatrixXd a = reduced_design_matrix(points, basis);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double smax = s[0];
  const double smin = s[s.size() - 1];
  report.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  report.ok = std::isfinite(report.condition) && report.condition <= UnisolvenceReport::max_condition;
  return report;
}

MonomialBasis element_basis(const Mesh& mesh, int element, int degree) {
  return MonomialBasis(degree, mesh.barycenter(element), mesh.geometry(element).diameter);
}

namespace {

std::vector<Point> collocation_points(const Mesh& mesh, const ElementPatch& patch) {
  std::vector<Point> points;
  points.reserve(patch.members.size());
  for (int k : patch.members) points.push_back(mesh.barycenter(k));
  return points;
}

void require_unisolvent(std::span<const Point> points, const MonomialBasis& basis, int element) {
  if (points.empty()) throw ValidationError("reconstruction: no collocation points");
  const auto report = check_unisolvence(points, basis);
  if (report.ok) return;
  if (report.rows < report.columns)
    throw UnisolvenceError(element, "patch has " + std::to_string(points.size()) + " collocation points, fewer than dim P_" +
                                        std::to_string(basis.degree()) + " = " + std::to_string(basis.size()));
  throw UnisolvenceError(element, "collocation points are not unisolvent for degree " + std::to_string(basis.degree()) +
                                      " (condition " + std::to_string(report.condition) + ")");
}

}  // namespace

UnisolvenceReport check_unisolvence(const Mesh& mesh, const ElementPatch& patch, int degree) {
  const auto points = collocation_points(mesh, patch);
  return check_unisolvence(points, element_basis(mesh, patch.center, degree));
}

Eigen::VectorXd fit_constrained_ls(std::span<const Point> points, const MonomialBasis& basis,
                                   std::span<const double> values, int element) {
  if (values.size() != points.size()) throw ValidationError("fit: one value per collocation point required");
  require_unisolvent(points, basis, element);
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(basis.size());
  coefficients[0] = values[0];
  if (basis.size() == 1) return coefficients;
  const Eigen::MatrixXd a = reduced_design_matrix(points, basis);
  Eigen::VectorXd rhs(a.rows());
  for (int i = 0; i < a.rows(); ++i) rhs[i] = values[i + 1] - values[0];
  coefficients.tail(basis.size() - 1) = a.colPivHouseholderQr().solve(rhs);
  return coefficients;
}

Eigen::MatrixXd constrained_ls_operator(std::span<const Point> points, const MonomialBasis& basis, int element) {
  require_unisolvent(points, basis, element);
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis.size(), n);
  c(0, 0) = 1.0;
  if (basis.size() == 1) return c;
  const Eigen::MatrixXd a = reduced_design_matrix(points, basis);
  const Eigen::MatrixXd pinv = a.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
  c.bottomLeftCorner(basis.size() - 1, 1) = -pinv.rowwise().sum();
  c.bottomRightCorner(basis.size() - 1, n - 1) = pinv;
  return c;
}

ReconstructionBasis build_basis_matrix(const Mesh& mesh, const ElementPatch& patch, int degree) {
  ReconstructionBasis out;
  out.element = patch.center;
  out.members = patch.members;
  out.basis = element_basis(mesh, patch.center, degree);
  const auto points = collocation_points(mesh, patch);
  out.coefficients = constrained_ls_operator(points, out.basis, patch.center);
  out.condition = check_unisolvence(points, out.basis).condition;
  return out;
}

BasisTable evaluate_basis(const ReconstructionBasis& basis, std::span<const Point> points) {
  const int dim = basis.basis.size();
  const int np = static_cast<int>(points.size());
  Eigen::MatrixXd phi(dim, np), phx(dim, np), phy(dim, np);
  for (int i = 0; i < np; ++i) basis.basis.evaluate(points[i], phi.col(i), phx.col(i), phy.col(i));
  BasisTable table;
  table.values = basis.coefficients.transpose() * phi;
  table.grad_x = basis.coefficients.transpose() * phx;
  table.grad_y = basis.coefficients.transpose() * phy;
  return table;
}

ReconstructedSpace::ReconstructedSpace(Mesh mesh, int degree, int patch_size, int threads)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree < 1) throw ValidationError("space: degree must be >= 1");
  patch_size_ = patch_size > 0 ? patch_size : default_patch_size(degree);
  patches_ = build_all_patches(mesh_, patch_size_, threads);
  bases_.resize(patches_.size());
  parallel_chunks(num_elements(), threads, [&](int, int begin, int end) {
    for (int k = begin; k < end; ++k) bases_[k] = build_basis_matrix(mesh_, patches_[k], degree_);
  });
}

Eigen::VectorXd ReconstructedSpace::local_coefficients(int k, const Eigen::Ref<const Eigen::VectorXd>& element_values) const {
  const auto& b = bases_[k];
  Eigen::VectorXd local(b.patch_size());
  for (int j = 0; j < b.patch_size(); ++j) local[j] = element_values[b.members[j]];
  return b.coefficients * local;
}

Eigen::VectorXd sample_at_barycenters(const Mesh& mesh, const std::function<double(const Point&)>& g) {
  Eigen::VectorXd v(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) v[k] = g(mesh.barycenter(k));
  return v;
}

PiecewisePolynomial reconstruct_function(const ReconstructedSpace& space, const Eigen::VectorXd& element_values) {
  if (element_values.size() != space.num_elements()) throw ValidationError("reconstruct: one value per element required");
  PiecewisePolynomial out;
  out.bases.reserve(space.num_elements());
  out.coefficients.reserve(space.num_elements());
  for (int k = 0; k < space.num_elements(); ++k) {
    out.bases.push_back(space.basis(k).basis);
    out.coefficients.push_back(space.local_coefficients(k, element_values));
  }
  return out;
}

PiecewisePolynomial reconstruct_function(const ReconstructedSpace& space, const std::function<double(const Point&)>& g) {
  return reconstruct_function(space, sample_at_barycenters(space.mesh(), g));
}

std::vector<Point> cell_sample_points(const Mesh& mesh, int cell, int per_edge) {
  per_edge = std::max(per_edge, 1);
  std::vector<Point> out;
  for (const auto& t : mesh.geometry(cell).triangles)
    for (int i = 0; i <= per_edge; ++i)
      for (int j = 0; i + j <= per_edge; ++j) {
        const double a = static_cast<double>(i) / per_edge;
        const double b = static_cast<double>(j) / per_edge;
        out.push_back(t[0] + a * (t[1] - t[0]) + b * (t[2] - t[0]));
      }
  return out;
}

double estimate_lambda(const Mesh& mesh, const ElementPatch& patch, int degree, int n_samples, std::uint64_t rng_seed,
                       int per_edge) {
  if (n_samples < 100) throw ValidationError("lambda estimate: n_samples must be at least 100");
  const MonomialBasis basis = element_basis(mesh, patch.center, degree);
  std::vector<Point> grid;
  for (int k : patch.members) {
    auto pts = cell_sample_points(mesh, k, per_edge);
    grid.insert(grid.end(), pts.begin(), pts.end());
  }
  Eigen::MatrixXd on_grid(basis.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) on_grid.col(i) = basis.values(grid[i]);
  Eigen::MatrixXd on_points(basis.size(), patch.members.size());
  for (std::size_t i = 0; i < patch.members.size(); ++i) on_points.col(i) = basis.values(mesh.barycenter(patch.members[i]));

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal;
  double best = 1.0;
  Eigen::VectorXd p(basis.size());
  for (int s = 1; s < n_samples; ++s) {
    for (int i = 0; i < p.size(); ++i) p[i] = normal(rng);
    const double denominator = (on_points.transpose() * p).cwiseAbs().maxCoeff();
    if (!(denominator > 0.0)) continue;
    const double numerator = (on_grid.transpose() * p).cwiseAbs().maxCoeff();
    best = std::max(best, numerator / denominator);
  }
  return best;
}

}  // namespace dlsfem
