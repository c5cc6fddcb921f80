#include "dlsfem/cli.hpp"

#include "dlsfem/analysis.hpp"
#include "dlsfem/error.hpp"
#include "dlsfem/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace dlsfem {

using nlohmann::json;

std::string RunConfig::to_json() const {
  json j = {{"subcommand", subcommand},
            {"mesh_file", mesh_file},
            {"mesh_kind", mesh_kind},
            {"n", n},
            {"lloyd", lloyd},
            {"seed", seed},
            {"neumann_rule", neumann_rule},
            {"degree", degree},
            {"lambda", lambda},
            {"mu", mu},
            {"problem", problem},
            {"solver", solver},
            {"tol", tol},
            {"max_iter", max_iter},
            {"threads", threads},
            {"levels", levels},
            {"lambda_samples", lambda_samples},
            {"out", out},
            {"dump_system", dump_system},
            {"vtk", vtk}};
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  try {
    get("subcommand", c.subcommand);
    get("mesh_file", c.mesh_file);
    get("mesh_kind", c.mesh_kind);
    get("n", c.n);
    get("lloyd", c.lloyd);
    get("seed", c.seed);
    get("neumann_rule", c.neumann_rule);
    get("degree", c.degree);
    get("lambda", c.lambda);
    get("mu", c.mu);
    get("problem", c.problem);
    get("solver", c.solver);
    get("tol", c.tol);
    get("max_iter", c.max_iter);
    get("threads", c.threads);
    get("levels", c.levels);
    get("lambda_samples", c.lambda_samples);
    get("out", c.out);
    get("dump_system", c.dump_system);
    get("vtk", c.vtk);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

void RunConfig::validate() const {
  static const std::vector<std::string> commands{"mesh-gen", "solve", "converge", "patch-stats"};
  if (std::find(commands.begin(), commands.end(), subcommand) == commands.end())
    throw ValidationError("unknown subcommand '" + subcommand + "'");
  parse_mesh_kind(mesh_kind);
  parse_boundary_rule(neumann_rule);
  if (n < 1) throw ValidationError("--n must be positive");
  if (lloyd < 0) throw ValidationError("--lloyd must be non-negative");
  if (subcommand != "mesh-gen") {
    if (degree < 1 || degree > 5) throw ValidationError("--degree must lie in [1, 5]");
    MaterialParams{lambda, mu}.validate();
  }
  parse_solver_method(solver);
  if (!(tol > 0.0 && tol < 1.0)) throw ValidationError("--tol must lie in (0, 1)");
  if (max_iter < 0) throw ValidationError("--max-iter must be non-negative");
  if (threads < 1) throw ValidationError("--threads must be positive");
  if (subcommand == "solve" || subcommand == "converge") make_problem(problem, degree, {lambda, mu});
  if (subcommand == "converge" && levels.size() < 3) throw ValidationError("--levels needs at least three entries");
  if (subcommand == "mesh-gen" && out.empty()) throw ValidationError("--out is required");
  if (subcommand == "patch-stats" && lambda_samples < 100) throw ValidationError("--samples must be at least 100");
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string replace_extension(const std::string& path, const std::string& ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

Mesh load_mesh(const RunConfig& c) {
  if (!c.mesh_file.empty()) return read_mesh_json(c.mesh_file);
  const MeshKind kind = parse_mesh_kind(c.mesh_kind);
  Mesh mesh = kind == MeshKind::triangular ? generate_unit_square_triangular(c.n) : generate_voronoi_polygonal(c.n, c.lloyd, c.seed);
  return classify_boundary(mesh, parse_boundary_rule(c.neumann_rule));
}

SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.method = parse_solver_method(c.solver);
  o.tolerance = c.tol;
  o.max_iterations = c.max_iter;
  o.threads = c.threads;
  return o;
}

void write_vtk(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& w) {
  auto out = open_output(path);
  out << "# vtk DataFile Version 3.0\ndlsfem cell data\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << " 0\n";
  std::size_t total = 0;
  for (const auto& c : mesh.cells()) total += c.size() + 1;
  out << "CELLS " << mesh.num_cells() << ' ' << total << '\n';
  for (const auto& c : mesh.cells()) {
    out << c.size();
    for (int v : c) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int k = 0; k < mesh.num_cells(); ++k) out << "7\n";
  out << "CELL_DATA " << mesh.num_cells() << '\n';
  static const char* names[] = {"sigma_xx", "sigma_xy", "sigma_yy", "u_x", "u_y"};
  for (int c = 0; c < kFieldsPerElement; ++c) {
    out << "SCALARS " << names[c] << " double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < mesh.num_cells(); ++k) out << w[kFieldsPerElement * k + c] << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

json errors_json(const ErrorSummary& e) {
  return {{"Jh", e.jh},           {"Jh_sqrt", e.jh_sqrt},       {"l2_sigma", e.l2_sigma},
          {"l2_u", e.l2_u},       {"energy_sigma", e.energy_sigma}, {"energy_u", e.energy_u}};
}

void cmd_mesh_gen(const RunConfig& c, std::ostream& out) {
  const Mesh mesh = load_mesh(c);
  write_mesh_json(mesh, c.out);
  out << "wrote " << c.out << ": " << mesh.num_cells() << " cells, " << mesh.num_faces() << " faces ("
      << mesh.count_faces(FaceKind::dirichlet) << " Dirichlet, " << mesh.count_faces(FaceKind::neumann) << " Neumann)\n";
}

void cmd_solve(const RunConfig& c, std::ostream& out) {
  const MaterialParams params{c.lambda, c.mu};
  const ManufacturedSolution data = make_problem(c.problem, c.degree, params);
  const SolveRun run = run_solve(load_mesh(c), c.degree, params, data, solve_options(c));
  const Mesh& mesh = run.space.mesh();
  const std::string prefix = c.out.empty() ? "solve" : c.out;

  json summary = {{"problem", c.problem},
                  {"degree", c.degree},
                  {"lambda", c.lambda},
                  {"mu", c.mu},
                  {"cells", mesh.num_cells()},
                  {"dofs", dof_count(mesh)},
                  {"patch_size", run.space.patch_size()},
                  {"h", mesh.nominal_h()},
                  {"solver",
                   {{"method", run.report.method},
                    {"iterations", run.report.iterations},
                    {"relative_residual", run.report.relative_residual}}},
                  {"Jh_quadratic_form", quadratic_form_value(run.system, run.solution)},
                  {"errors", errors_json(run.errors)}};
  write_text(prefix + ".summary.json", summary.dump(2) + "\n");

  auto csv = open_output(prefix + ".solution.csv");
  csv << "element,x,y,sigma_xx,sigma_xy,sigma_yy,u_x,u_y\n";
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Point& x = mesh.barycenter(k);
    csv << k << ',' << x.x() << ',' << x.y();
    for (int f = 0; f < kFieldsPerElement; ++f) csv << ',' << run.solution[kFieldsPerElement * k + f];
    csv << '\n';
  }
  if (!csv) throw IoError("failed writing '" + prefix + ".solution.csv'");

  if (!c.dump_system.empty()) {
    auto dump = open_output(c.dump_system);
    run.system.matrix.write_coordinate(dump);
    if (!dump) throw IoError("failed writing '" + c.dump_system + "'");
  }
  if (!c.vtk.empty()) write_vtk(c.vtk, mesh, run.solution);

  out << std::setprecision(6) << "cells " << mesh.num_cells() << ", dofs " << dof_count(mesh) << ", "
      << run.report.method << " " << run.report.iterations << " iterations in " << run.report.seconds << " s (residual "
      << run.report.relative_residual << ")\n"
      << "Jh^1/2 " << run.errors.jh_sqrt << ", |sigma - sigma_h| " << run.errors.l2_sigma << ", |u - u_h| "
      << run.errors.l2_u << "\nwrote " << prefix << ".summary.json, " << prefix << ".solution.csv\n";
}

void cmd_converge(const RunConfig& c, std::ostream& out) {
  StudyConfig study;
  study.degree = c.degree;
  study.material = {c.lambda, c.mu};
  study.mesh_kind = parse_mesh_kind(c.mesh_kind);
  study.levels = c.levels;
  study.lloyd = c.lloyd;
  study.seed = c.seed;
  study.problem = c.problem;
  study.neumann_rule = c.neumann_rule;
  study.solve = solve_options(c);
  const std::string path = c.out.empty() ? "report.csv" : c.out;
  out << std::setprecision(4);
  const ConvergenceReport report = convergence_study(study, [&](const LevelResult& l) {
    out << "level " << l.level << ": h " << l.h << ", dofs " << l.dofs << ", Jh^1/2 " << l.errors.jh_sqrt
        << ", " << l.solve.method << " " << l.solve.iterations << " it / " << l.solve.seconds << " s\n";
  });
  auto csv = open_output(path);
  report.write_csv(csv);
  if (!csv) throw IoError("failed writing '" + path + "'");
  write_text(replace_extension(path, ".json"), report.to_json() + "\n");
  report.write_csv(out);
}

void cmd_patch_stats(const RunConfig& c, std::ostream& out) {
  const Mesh mesh = load_mesh(c);
  const ReconstructedSpace space(mesh, c.degree, 0, c.threads);
  const std::string prefix = c.out.empty() ? "patch-stats" : c.out;
  auto csv = open_output(prefix + ".csv");
  csv << "element,cardinality,graph_radius,condition,lambda_estimate\n";
  int min_card = space.patch_size() + 1000, max_card = 0, max_radius = 0;
  double max_cond = 0.0, max_lambda = 0.0, sum_lambda = 0.0;
  for (int k = 0; k < space.num_elements(); ++k) {
    const auto& p = space.patch(k);
    const int radius = graph_radius(space.mesh(), p);
    const double cond = space.basis(k).condition;
    const double lam = estimate_lambda(space.mesh(), p, c.degree, c.lambda_samples, c.seed);
    min_card = std::min(min_card, p.size());
    max_card = std::max(max_card, p.size());
    max_radius = std::max(max_radius, radius);
    max_cond = std::max(max_cond, cond);
    max_lambda = std::max(max_lambda, lam);
    sum_lambda += lam;
    csv << k << ',' << p.size() << ',' << radius << ',' << cond << ',' << lam << '\n';
  }
  if (!csv) throw IoError("failed writing '" + prefix + ".csv'");
  out << std::setprecision(6) << "elements          " << space.num_elements() << "\n"
      << "degree            " << c.degree << "\n"
      << "patch cardinality " << min_card << (min_card == max_card ? "" : " .. " + std::to_string(max_card)) << "\n"
      << "max graph radius  " << max_radius << "\n"
      << "max condition     " << max_cond << "\n"
      << "Lambda estimate   mean " << sum_lambda / space.num_elements() << ", max " << max_lambda << "\n"
      << "wrote " << prefix << ".csv\n";
}

std::string echo_path(const RunConfig& c) {
  if (c.subcommand == "mesh-gen" || c.subcommand == "converge")
    return replace_extension(c.out.empty() ? "report.csv" : c.out, ".config.json");
  if (c.subcommand == "solve") return (c.out.empty() ? "solve" : c.out) + ".config.json";
  return (c.out.empty() ? "patch-stats" : c.out) + ".config.json";
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      levels.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--levels: '" + item + "' is not an integer");
    }
  }
  return levels;
}

}  // namespace

int execute(const RunConfig& config, std::ostream& out) {
  config.validate();
  write_text(echo_path(config), config.to_json());
  if (config.subcommand == "mesh-gen") cmd_mesh_gen(config, out);
  else if (config.subcommand == "solve") cmd_solve(config, out);
  else if (config.subcommand == "converge") cmd_converge(config, out);
  else cmd_patch_stats(config, out);
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discontinuous least-squares FEM for 2D linear elasticity on reconstructed spaces", "dlsfem"};
  app.require_subcommand(1);
  RunConfig c;
  c.threads = default_thread_count();
  std::string levels_text, replay_file;

  auto add_mesh_source = [&](CLI::App* cmd, bool allow_file) {
    if (allow_file) cmd->add_option("--mesh", c.mesh_file, "Mesh JSON file (overrides the generator flags)");
    cmd->add_option("--kind", c.mesh_kind, "Generated mesh kind: tri or voronoi")->capture_default_str();
    cmd->add_option("--n", c.n, "Squares per side (tri) or number of seeds (voronoi)")->capture_default_str();
    cmd->add_option("--lloyd", c.lloyd, "Lloyd sweeps for voronoi meshes")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--neumann", c.neumann_rule, "Neumann boundary rule for generated meshes")->capture_default_str();
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--degree", c.degree, "Reconstruction degree m")->capture_default_str();
    cmd->add_option("--lambda", c.lambda, "Lame parameter lambda")->capture_default_str();
    cmd->add_option("--mu", c.mu, "Lame parameter mu")->capture_default_str();
    cmd->add_option("--problem", c.problem, "example1 or polynomial")->capture_default_str();
  };
  auto add_solver = [&](CLI::App* cmd) {
    cmd->add_option("--solver", c.solver, "jacobi-cg or cholesky")->capture_default_str();
    cmd->add_option("--tol", c.tol, "Relative residual tolerance")->capture_default_str();
    cmd->add_option("--max-iter", c.max_iter, "Iteration limit (0: 20 x unknowns)")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (default from DLSFEM_THREADS)")->capture_default_str();
  };

  auto* mesh_gen = app.add_subcommand("mesh-gen", "Generate a mesh file");
  add_mesh_source(mesh_gen, false);
  mesh_gen->add_option("--out", c.out, "Output mesh JSON")->required();

  auto* solve = app.add_subcommand("solve", "Solve one problem and report errors");
  add_mesh_source(solve, true);
  add_model(solve);
  add_solver(solve);
  solve->add_option("--out", c.out, "Output prefix")->capture_default_str();
  solve->add_option("--dump-system", c.dump_system, "Write the matrix as 'row col value' lines");
  solve->add_option("--vtk", c.vtk, "Write a legacy VTK file with cell data");

  auto* converge = app.add_subcommand("converge", "Multi-level convergence study");
  converge->add_option("--mesh", c.mesh_kind, "tri or voronoi")->capture_default_str();
  converge->add_option("--levels", levels_text, "Comma-separated n (tri) or cell counts (voronoi)")->required();
  converge->add_option("--lloyd", c.lloyd, "Lloyd sweeps for voronoi meshes")->capture_default_str();
  converge->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  converge->add_option("--neumann", c.neumann_rule, "Neumann boundary rule")->capture_default_str();
  add_model(converge);
  add_solver(converge);
  converge->add_option("--out", c.out, "CSV report (a JSON mirror is written next to it)");

  auto* patch_stats = app.add_subcommand("patch-stats", "Patch and reconstruction diagnostics");
  add_mesh_source(patch_stats, true);
  patch_stats->add_option("--degree", c.degree, "Reconstruction degree m")->capture_default_str();
  patch_stats->add_option("--samples", c.lambda_samples, "Random polynomials per Lambda estimate")->capture_default_str();
  patch_stats->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
  patch_stats->add_option("--out", c.out, "Output prefix for the per-element CSV");

  auto* replay = app.add_subcommand("replay", "Re-run from a config echo file");
  replay->add_option("--config", replay_file, "Config JSON written by an earlier run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (replay->parsed()) {
      std::ifstream in(replay_file);
      if (!in) throw IoError("cannot open config '" + replay_file + "'");
      std::stringstream text;
      text << in.rdbuf();
      return execute(RunConfig::from_json(text.str()), out);
    }
    c.subcommand = app.get_subcommands().front()->get_name();
    if (converge->parsed()) c.levels = parse_levels(levels_text);
    return execute(c, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace dlsfem
