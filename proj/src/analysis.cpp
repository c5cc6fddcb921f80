#include "dlsfem/analysis.hpp"

#include "dlsfem/error.hpp"
#include "dlsfem/quadrature.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace dlsfem {

namespace {

int error_degree(const ReconstructedSpace& space, int degree) { return degree > 0 ? degree : 2 * space.degree() + 2; }

std::vector<LocalFields> all_fields(const ReconstructedSpace& space, const Eigen::VectorXd& w) {
  if (w.size() != dof_count(space.mesh())) throw ValidationError("analysis: coefficient vector has wrong size");
  std::vector<LocalFields> fields;
  fields.reserve(space.num_elements());
  for (int k = 0; k < space.num_elements(); ++k) fields.emplace_back(space, k, w);
  return fields;
}

}  // namespace

double l2_error(const Mesh& mesh, const PiecewisePolynomial& field, const std::function<double(const Point&)>& exact,
                int degree) {
  if (degree <= 0) {
    degree = 2;
    if (!field.bases.empty()) degree = 2 * field.bases.front().degree() + 2;
  }
  double sum = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k)
    for (const auto& q : cell_quadrature(mesh, k, degree)) {
      const double e = field.evaluate(k, q.point) - exact(q.point);
      sum += q.weight * e * e;
    }
  return std::sqrt(sum);
}

double max_error(const Mesh& mesh, const PiecewisePolynomial& field, const std::function<double(const Point&)>& exact,
                 int per_edge) {
  double out = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k)
    for (const auto& x : cell_sample_points(mesh, k, per_edge))
      out = std::max(out, std::abs(field.evaluate(k, x) - exact(x)));
  return out;
}

double l2_error_sigma(const ReconstructedSpace& space, const Eigen::VectorXd& w, const ManufacturedSolution& exact,
                      int degree) {
  const auto fields = all_fields(space, w);
  degree = error_degree(space, degree);
  double sum = 0.0;
  for (int k = 0; k < space.num_elements(); ++k)
    for (const auto& q : cell_quadrature(space.mesh(), k, degree))
      sum += q.weight * (exact.stress(q.point) - fields[k](q.point).sigma).squared_norm();
  return std::sqrt(sum);
}

double l2_error_u(const ReconstructedSpace& space, const Eigen::VectorXd& w, const ManufacturedSolution& exact, int degree) {
  const auto fields = all_fields(space, w);
  degree = error_degree(space, degree);
  double sum = 0.0;
  for (int k = 0; k < space.num_elements(); ++k)
    for (const auto& q : cell_quadrature(space.mesh(), k, degree))
      sum += q.weight * (exact.displacement(q.point) - fields[k](q.point).u).squaredNorm();
  return std::sqrt(sum);
}

double energy_norm_sigma(const ReconstructedSpace& space, const Eigen::VectorXd& w, const ManufacturedSolution* exact,
                         int degree) {
  const auto fields = all_fields(space, w);
  degree = error_degree(space, degree);
  const Mesh& mesh = space.mesh();
  double sum = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k)
    for (const auto& q : cell_quadrature(mesh, k, degree)) {
      const auto v = fields[k](q.point);
      SymTensor2 e = -1.0 * v.sigma;
      Eigen::Vector2d div = -v.div_sigma;
      if (exact) {
        e = exact->stress(q.point) + e;
        div -= exact->body_force(q.point);
      }
      sum += q.weight * (e.squared_norm() + div.squaredNorm());
    }
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    const Face& f = mesh.face(fi);
    if (f.kind == FaceKind::dirichlet) continue;
    for (const auto& q : face_quadrature(mesh, fi, degree)) {
      Eigen::Vector2d jump = fields[f.cells[0]](q.point).sigma.times(f.normal);
      if (f.kind == FaceKind::interior)
        jump -= fields[f.cells[1]](q.point).sigma.times(f.normal);
      else if (exact)
        jump -= exact->stress(q.point).times(f.normal);
      sum += q.weight / f.length * jump.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double energy_norm_u(const ReconstructedSpace& space, const Eigen::VectorXd& w, const ManufacturedSolution* exact, int degree) {
  const auto fields = all_fields(space, w);
  degree = error_degree(space, degree);
  const Mesh& mesh = space.mesh();
  double sum = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k)
    for (const auto& q : cell_quadrature(mesh, k, degree)) {
      Eigen::Matrix2d grad = -fields[k](q.point).grad_u;
      if (exact) grad += exact->displacement_gradient(q.point);
      sum += q.weight * strain(grad).squared_norm();
    }
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    const Face& f = mesh.face(fi);
    if (f.kind == FaceKind::neumann) continue;
    for (const auto& q : face_quadrature(mesh, fi, degree)) {
      Eigen::Vector2d jump = fields[f.cells[0]](q.point).u;
      if (f.kind == FaceKind::interior)
        jump -= fields[f.cells[1]](q.point).u;
      else if (exact)
        jump -= exact->displacement(q.point);
      sum += q.weight / f.length * jump.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

int dof_count(const Mesh& mesh) { return kFieldsPerElement * mesh.num_cells(); }

ErrorSummary compute_errors(const ReconstructedSpace& space, const MaterialParams& params, const ManufacturedSolution& exact,
                            const Eigen::VectorXd& w, int threads) {
  ErrorSummary s;
  AssemblyOptions options;
  options.threads = threads;
  s.jh = evaluate_functional(space, params, exact, w, options).total();
  s.jh_sqrt = std::sqrt(s.jh);
  s.l2_sigma = l2_error_sigma(space, w, exact);
  s.l2_u = l2_error_u(space, w, exact);
  s.energy_sigma = energy_norm_sigma(space, w, &exact);
  s.energy_u = energy_norm_u(space, w, &exact);
  return s;
}

ManufacturedSolution make_problem(const std::string& name, int degree, const MaterialParams& params) {
  if (name == "example1") return example1_solution(params);
  if (name == "polynomial") return polynomial_solution(degree, params);
  throw ValidationError("unknown problem '" + name + "' (expected example1 or polynomial)");
}

SolveRun run_solve(Mesh mesh, int degree, const MaterialParams& params, const ManufacturedSolution& data,
                   const SolveOptions& solve_options) {
  const int threads = std::max(1, solve_options.threads);
  SolveRun run{ReconstructedSpace(std::move(mesh), degree, 0, threads), DlsSystem{}, SolveReport{}, Eigen::VectorXd{}, ErrorSummary{}};
  AssemblyOptions assembly;
  assembly.threads = threads;
  run.system = assemble_system(run.space, params, data, assembly);
  auto result = solve_spd(run.system, solve_options);
  run.solution = std::move(result.solution);
  run.report = std::move(result.report);
  run.errors = compute_errors(run.space, params, data, run.solution, threads);
  return run;
}

MeshKind parse_mesh_kind(const std::string& text) {
  if (text == "tri") return MeshKind::triangular;
  if (text == "voronoi") return MeshKind::voronoi;
  throw ValidationError("unknown mesh kind '" + text + "' (expected tri or voronoi)");
}

const char* to_string(MeshKind kind) { return kind == MeshKind::triangular ? "tri" : "voronoi"; }

std::vector<double> ConvergenceReport::rates(const std::function<double(const LevelResult&)>& column) const {
  std::vector<double> out;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const auto& c = levels[i - 1];
    const auto& f = levels[i];
    out.push_back(std::log(column(c) / column(f)) / std::log(c.h / f.h));
  }
  return out;
}

double ConvergenceReport::finest_rate(const std::function<double(const LevelResult&)>& column) const {
  const auto r = rates(column);
  return r.empty() ? std::numeric_limits<double>::quiet_NaN() : r.back();
}

namespace {

const auto kJh = [](const LevelResult& l) { return l.errors.jh_sqrt; };
const auto kSigma = [](const LevelResult& l) { return l.errors.l2_sigma; };
const auto kU = [](const LevelResult& l) { return l.errors.l2_u; };

}  // namespace

void ConvergenceReport::write_csv(std::ostream& out) const {
  const auto rj = rates(kJh);
  const auto rs = rates(kSigma);
  const auto ru = rates(kU);
  out << "level,h,dofs,Jh_sqrt,l2_sigma,l2_u,energy_sigma,energy_u,rate_Jh,rate_l2_sigma,rate_l2_u\n";
  std::ostringstream line;
  line << std::setprecision(10);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    line.str("");
    line << l.level << ',' << l.h << ',' << l.dofs << ',' << l.errors.jh_sqrt << ',' << l.errors.l2_sigma << ','
         << l.errors.l2_u << ',' << l.errors.energy_sigma << ',' << l.errors.energy_u << ',';
    if (i > 0) line << rj[i - 1] << ',' << rs[i - 1] << ',' << ru[i - 1];
    else line << ",,";
    out << line.str() << '\n';
  }
}

std::string ConvergenceReport::to_json() const {
  const auto rj = rates(kJh);
  const auto rs = rates(kSigma);
  const auto ru = rates(kU);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    nlohmann::json row = {{"level", l.level},
                          {"h", l.h},
                          {"dofs", l.dofs},
                          {"Jh_sqrt", l.errors.jh_sqrt},
                          {"l2_sigma", l.errors.l2_sigma},
                          {"l2_u", l.errors.l2_u},
                          {"energy_sigma", l.errors.energy_sigma},
                          {"energy_u", l.errors.energy_u},
                          {"rate_Jh", nullptr},
                          {"rate_l2_sigma", nullptr},
                          {"rate_l2_u", nullptr},
                          {"solver_iterations", l.solve.iterations}};
    if (i > 0) {
      row["rate_Jh"] = rj[i - 1];
      row["rate_l2_sigma"] = rs[i - 1];
      row["rate_l2_u"] = ru[i - 1];
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json doc = {{"degree", config.degree},
                        {"lambda", config.material.lambda},
                        {"mu", config.material.mu},
                        {"mesh", to_string(config.mesh_kind)},
                        {"problem", config.problem},
                        {"levels", rows}};
  return doc.dump(2);
}

Mesh study_mesh(const StudyConfig& config, int level) {
  Mesh mesh = config.mesh_kind == MeshKind::triangular ? generate_unit_square_triangular(level)
                                                       : generate_voronoi_polygonal(level, config.lloyd, config.seed);
  return classify_boundary(mesh, parse_boundary_rule(config.neumann_rule));
}

ConvergenceReport convergence_study(const StudyConfig& config, const std::function<void(const LevelResult&)>& on_level) {
  config.material.validate();
  if (config.degree < 1 || config.degree > 4) throw ValidationError("convergence study: degree must lie in [1, 4]");
  if (config.levels.size() < 3) throw ValidationError("convergence study: at least three levels required");
  ConvergenceReport report;
  report.config = config;
  const ManufacturedSolution data = make_problem(config.problem, config.degree, config.material);
  for (int level : config.levels) {
    Mesh mesh = study_mesh(config, level);
    LevelResult result;
    result.level = level;
    result.h = mesh.nominal_h();
    result.dofs = dof_count(mesh);
    if (!report.levels.empty() && !(result.h < report.levels.back().h))
      throw ValidationError("convergence study: levels must have strictly decreasing h");
    auto run = run_solve(std::move(mesh), config.degree, config.material, data, config.solve);
    result.errors = run.errors;
    result.solve = run.report;
    result.solve.residual_history.clear();
    report.levels.push_back(result);
    if (on_level) on_level(result);
  }
  return report;
}

}  // namespace dlsfem
