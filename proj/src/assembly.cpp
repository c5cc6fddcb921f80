#include "dlsfem/assembly.hpp"

#include "dlsfem/error.hpp"
#include "dlsfem/parallel.hpp"
#include "dlsfem/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dlsfem {

VectorTrace jump_average_vector(const Eigen::Vector2d& plus, const Eigen::Vector2d& minus, const Eigen::Vector2d& normal_plus) {
  const Eigen::Vector2d normal_minus = -normal_plus;
  return {0.5 * (plus + minus), plus * normal_plus.transpose() + minus * normal_minus.transpose()};
}

VectorTrace jump_average_vector(const Eigen::Vector2d& value, const Eigen::Vector2d& normal) {
  return {value, value * normal.transpose()};
}

TensorTrace jump_average_tensor(const SymTensor2& plus, const SymTensor2& minus, const Eigen::Vector2d& normal_plus) {
  return {0.5 * (plus + minus), plus.times(normal_plus) + minus.times(-normal_plus)};
}

TensorTrace jump_average_tensor(const SymTensor2& value, const Eigen::Vector2d& normal) {
  return {value, value.times(normal)};
}

namespace {

struct Degrees {
  int volume;
  int face;
};

Degrees resolve_degrees(const ReconstructedSpace& space, const AssemblyOptions& options) {
  const int m = space.degree();
  Degrees d{options.volume_degree > 0 ? options.volume_degree : 2 * m, options.face_degree > 0 ? options.face_degree : 2 * m + 1};
  if (d.volume < 2 * m || d.face < 2 * m + 1)
    throw ValidationError("assembly: quadrature degrees must be at least 2m (volume) and 2m+1 (faces)");
  return d;
}

// Union of the patches on both sides of a face, in first-seen order.
std::vector<int> face_elements(const ReconstructedSpace& space, const Face& f) {
  std::vector<int> elems = space.patch(f.cells[0]).members;
  if (!f.is_boundary())
    for (int k : space.patch(f.cells[1]).members)
      if (std::find(elems.begin(), elems.end(), k) == elems.end()) elems.push_back(k);
  return elems;
}

int local_index(const std::vector<int>& elems, int element) {
  return static_cast<int>(std::find(elems.begin(), elems.end(), element) - elems.begin());
}

// Target for the accumulation of one local least-squares block.
struct Accumulator {
  const BlockSparseMatrix& pattern;
  double* values;
  Eigen::VectorXd& rhs;
  double& constant;

  // Adds B^T B, B^T t and t^T t, with B's columns grouped by element as in `elems`.
  void add(const std::vector<int>& elems, const Eigen::MatrixXd& b, const Eigen::VectorXd& t) {
    constexpr int nf = kFieldsPerElement;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(b.cols(), b.cols());
    local.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
    local.triangularView<Eigen::StrictlyUpper>() = local.transpose();
    const Eigen::VectorXd local_rhs = b.transpose() * t;
    constant += t.squaredNorm();
    const int n = static_cast<int>(elems.size());
    for (int a = 0; a < n; ++a) {
      rhs.segment<nf>(nf * elems[a]) += local_rhs.segment<nf>(nf * a);
      for (int c = 0; c < n; ++c) {
        const auto idx = pattern.find(elems[a], elems[c]);
        double* blk = values + idx * BlockSparseMatrix::block_entries;
        for (int r = 0; r < nf; ++r)
          for (int s = 0; s < nf; ++s) blk[r * nf + s] += local(nf * a + r, nf * c + s);
      }
    }
  }
};

void assemble_cell(const ReconstructedSpace& space, const MaterialParams& params, const ManufacturedSolution& data,
                   int degree, int k, Accumulator& acc) {
  constexpr int nf = kFieldsPerElement;
  const auto& basis = space.basis(k);
  const auto qps = cell_quadrature(space.mesh(), k, degree);
  std::vector<Point> points;
  points.reserve(qps.size());
  for (const auto& q : qps) points.push_back(q.point);
  const BasisTable table = evaluate_basis(basis, points);

  const double kappa = params.lambda / (MaterialParams::dim * params.lambda + 2.0 * params.mu);
  const double diag = (1.0 - kappa) / (2.0 * params.mu);
  const double off = -kappa / (2.0 * params.mu);
  const double shear = std::numbers::sqrt2 / (2.0 * params.mu);
  const double half_root2 = 0.5 * std::numbers::sqrt2;

  const int ns = basis.patch_size();
  const int nq = static_cast<int>(qps.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nf * nq, nf * ns);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(nf * nq);
  for (int i = 0; i < nq; ++i) {
    const double sw = std::sqrt(qps[i].weight);
    const int r = nf * i;
    for (int j = 0; j < ns; ++j) {
      const double v = sw * table.values(j, i);
      const double gx = sw * table.grad_x(j, i);
      const double gy = sw * table.grad_y(j, i);
      const int c = nf * j;
      // A sigma - eps(u), xx / sqrt(2) xy / yy components
      b(r, c + sigma_xx) = diag * v;
      b(r, c + sigma_yy) = off * v;
      b(r, c + u_x) = -gx;
      b(r + 1, c + sigma_xy) = shear * v;
      b(r + 1, c + u_x) = -half_root2 * gy;
      b(r + 1, c + u_y) = -half_root2 * gx;
      b(r + 2, c + sigma_yy) = diag * v;
      b(r + 2, c + sigma_xx) = off * v;
      b(r + 2, c + u_y) = -gy;
      // div sigma
      b(r + 3, c + sigma_xx) = gx;
      b(r + 3, c + sigma_xy) = gy;
      b(r + 4, c + sigma_xy) = gx;
      b(r + 4, c + sigma_yy) = gy;
    }
    const Eigen::Vector2d f = data.body_force(qps[i].point);
    t[r + 3] = -sw * f.x();
    t[r + 4] = -sw * f.y();
  }
  acc.add(basis.members, b, t);
}

void assemble_face(const ReconstructedSpace& space, const ManufacturedSolution& data, int degree, int fi, Accumulator& acc) {
  constexpr int nf = kFieldsPerElement;
  const Face& f = space.mesh().face(fi);
  const auto qps = face_quadrature(space.mesh(), fi, degree);
  std::vector<Point> points;
  points.reserve(qps.size());
  for (const auto& q : qps) points.push_back(q.point);
  const std::vector<int> elems = face_elements(space, f);
  const int nq = static_cast<int>(qps.size());
  const Eigen::Vector2d n = f.normal;

  const bool interior = f.kind == FaceKind::interior;
  const bool has_u = interior || f.kind == FaceKind::dirichlet;
  const bool has_sigma = interior || f.kind == FaceKind::neumann;
  const int rows_per_point = (has_u ? 2 : 0) + (has_sigma ? 2 : 0);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows_per_point * nq, nf * static_cast<int>(elems.size()));
  Eigen::VectorXd t = Eigen::VectorXd::Zero(rows_per_point * nq);

  const int sides = interior ? 2 : 1;
  for (int side = 0; side < sides; ++side) {
    const auto& basis = space.basis(f.cells[side]);
    const BasisTable table = evaluate_basis(basis, points);
    const double sign = side == 0 ? 1.0 : -1.0;
    for (int i = 0; i < nq; ++i) {
      const double sc = sign * std::sqrt(qps[i].weight / f.length);
      int r = rows_per_point * i;
      for (int j = 0; j < basis.patch_size(); ++j) {
        const double v = sc * table.values(j, i);
        const int c = nf * local_index(elems, basis.members[j]);
        int row = r;
        if (has_u) {
          b(row, c + u_x) += v;
          b(row + 1, c + u_y) += v;
          row += 2;
        }
        if (has_sigma) {
          b(row, c + sigma_xx) += v * n.x();
          b(row, c + sigma_xy) += v * n.y();
          b(row + 1, c + sigma_xy) += v * n.x();
          b(row + 1, c + sigma_yy) += v * n.y();
        }
      }
    }
  }
  if (!interior) {
    for (int i = 0; i < nq; ++i) {
      const double sc = std::sqrt(qps[i].weight / f.length);
      const Eigen::Vector2d target = f.kind == FaceKind::dirichlet ? data.dirichlet(qps[i].point) : data.traction(qps[i].point, n);
      t.segment<2>(rows_per_point * i) = sc * target;
    }
  }
  acc.add(elems, b, t);
}

}  // namespace

std::vector<std::vector<int>> system_pattern(const ReconstructedSpace& space) {
  const Mesh& mesh = space.mesh();
  std::vector<std::vector<int>> rows(mesh.num_cells());
  auto couple = [&](const std::vector<int>& elems) {
    for (int a : elems) rows[a].insert(rows[a].end(), elems.begin(), elems.end());
  };
  for (int k = 0; k < mesh.num_cells(); ++k) couple(space.patch(k).members);
  for (const auto& f : mesh.faces())
    if (!f.is_boundary()) couple(face_elements(space, f));
  for (auto& row : rows) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return rows;
}

DlsSystem assemble_system(const ReconstructedSpace& space, const MaterialParams& params, const ManufacturedSolution& data,
                          const AssemblyOptions& options) {
  params.validate();
  const Mesh& mesh = space.mesh();
  if (mesh.count_faces(FaceKind::dirichlet) == 0)
    throw ValidationError("empty Dirichlet boundary: Γ_D is assumed to be non-empty");
  const Degrees degrees = resolve_degrees(space, options);

  DlsSystem system;
  system.dofs = DofMap(mesh.num_cells());
  system.matrix = BlockSparseMatrix(mesh.num_cells(), system_pattern(space));
  system.rhs = Eigen::VectorXd::Zero(system.dofs.num_dofs());

  const int threads = std::max(1, options.threads);
  const int work = mesh.num_cells() + mesh.num_faces();
  // Worker 0 writes into the system; the others into private copies summed afterwards.
  std::vector<std::vector<double>> values(threads - 1);
  std::vector<Eigen::VectorXd> rhs(threads - 1);
  std::vector<double> constants(threads, 0.0);
  parallel_chunks(work, threads, [&](int worker, int begin, int end) {
    double* vals = system.matrix.values().data();
    Eigen::VectorXd* b = &system.rhs;
    if (worker > 0) {
      values[worker - 1].assign(system.matrix.values().size(), 0.0);
      rhs[worker - 1] = Eigen::VectorXd::Zero(system.dofs.num_dofs());
      vals = values[worker - 1].data();
      b = &rhs[worker - 1];
    }
    Accumulator acc{system.matrix, vals, *b, constants[worker]};
    for (int item = begin; item < end; ++item) {
      if (item < mesh.num_cells())
        assemble_cell(space, params, data, degrees.volume, item, acc);
      else
        assemble_face(space, data, degrees.face, item - mesh.num_cells(), acc);
    }
  });
  for (int w = 1; w < threads && w <= static_cast<int>(values.size()); ++w) {
    if (values[w - 1].empty()) continue;
    auto& dst = system.matrix.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += values[w - 1][i];
    system.rhs += rhs[w - 1];
  }
  for (double c : constants) system.data_constant += c;
  return system;
}

LocalFields::LocalFields(const ReconstructedSpace& space, int element, const Eigen::VectorXd& w)
    : basis_(space.basis(element).basis) {
  const auto& b = space.basis(element);
  Eigen::Matrix<double, Eigen::Dynamic, kFieldsPerElement> local(b.patch_size(), kFieldsPerElement);
  for (int j = 0; j < b.patch_size(); ++j) local.row(j) = w.segment<kFieldsPerElement>(kFieldsPerElement * b.members[j]).transpose();
  coefficients_ = b.coefficients * local;
}

LocalFields::Value LocalFields::operator()(const Point& x) const {
  const int dim = basis_.size();
  Eigen::VectorXd phi(dim), dx(dim), dy(dim);
  basis_.evaluate(x, phi, dx, dy);
  const Eigen::Matrix<double, 1, kFieldsPerElement> v = phi.transpose() * coefficients_;
  const Eigen::Matrix<double, 1, kFieldsPerElement> gx = dx.transpose() * coefficients_;
  const Eigen::Matrix<double, 1, kFieldsPerElement> gy = dy.transpose() * coefficients_;
  Value out;
  out.sigma = {v[sigma_xx], v[sigma_xy], v[sigma_yy]};
  out.u = {v[u_x], v[u_y]};
  out.div_sigma = {gx[sigma_xx] + gy[sigma_xy], gx[sigma_xy] + gy[sigma_yy]};
  out.grad_u << gx[u_x], gy[u_x], gx[u_y], gy[u_y];
  return out;
}

FunctionalTerms evaluate_functional(const ReconstructedSpace& space, const MaterialParams& params,
                                    const ManufacturedSolution& data, const Eigen::VectorXd& w, const AssemblyOptions& options) {
  const Degrees degrees = resolve_degrees(space, options);
  const Mesh& mesh = space.mesh();
  FunctionalTerms terms;
  std::vector<LocalFields> fields;
  fields.reserve(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) fields.emplace_back(space, k, w);

  for (int k = 0; k < mesh.num_cells(); ++k) {
    for (const auto& q : cell_quadrature(mesh, k, degrees.volume)) {
      const auto v = fields[k](q.point);
      terms.constitutive += q.weight * (compliance_apply(v.sigma, params) - strain(v.grad_u)).squared_norm();
      terms.equilibrium += q.weight * (v.div_sigma + data.body_force(q.point)).squaredNorm();
    }
  }
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    const Face& f = mesh.face(fi);
    for (const auto& q : face_quadrature(mesh, fi, degrees.face)) {
      const double wq = q.weight / f.length;
      const auto plus = fields[f.cells[0]](q.point);
      if (f.kind == FaceKind::interior) {
        const auto minus = fields[f.cells[1]](q.point);
        terms.displacement_jump += wq * jump_average_vector(plus.u, minus.u, f.normal).jump.squaredNorm();
        terms.stress_jump += wq * jump_average_tensor(plus.sigma, minus.sigma, f.normal).jump.squaredNorm();
      } else if (f.kind == FaceKind::dirichlet) {
        terms.dirichlet += wq * (plus.u - data.dirichlet(q.point)).squaredNorm();
      } else {
        const Eigen::Vector2d traction = jump_average_tensor(plus.sigma, f.normal).jump;
        terms.neumann += wq * (traction - data.traction(q.point, f.normal)).squaredNorm();
      }
    }
  }
  return terms;
}

double quadratic_form_value(const DlsSystem& system, const Eigen::VectorXd& w) {
  Eigen::VectorXd aw;
  system.matrix.multiply(w, aw);
  return w.dot(aw) - 2.0 * system.rhs.dot(w) + system.data_constant;
}

Eigen::VectorXd interpolate_exact(const Mesh& mesh, const ManufacturedSolution& data) {
  Eigen::VectorXd w(kFieldsPerElement * mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Point& x = mesh.barycenter(k);
    const SymTensor2 s = data.stress(x);
    const Eigen::Vector2d u = data.displacement(x);
    w.segment<kFieldsPerElement>(kFieldsPerElement * k) << s.xx, s.xy, s.yy, u.x(), u.y();
  }
  return w;
}

}  // namespace dlsfem
