#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dlsfem {

/// Everything a CLI run depends on. Serialized next to the outputs so `replay` can repeat it.
struct RunConfig {
  std::string subcommand;

  // Mesh source: a JSON file, or generator parameters.
  std::string mesh_file;
  std::string mesh_kind = "tri";
  int n = 8;
  int lloyd = 20;
  std::uint64_t seed = 7;
  std::string neumann_rule = "x==1";

  int degree = 2;
  double lambda = 5.0;
  double mu = 1.0;
  std::string problem = "example1";

  std::string solver = "jacobi-cg";
  double tol = 1e-10;
  int max_iter = 0;
  int threads = 1;

  std::vector<int> levels;
  int lambda_samples = 100;

  std::string out;
  std::string dump_system;
  std::string vtk;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  /// Throws ValidationError for out-of-range values.
  void validate() const;
};

/// Runs one validated configuration. Returns the process exit code.
int execute(const RunConfig& config, std::ostream& out);

/// Parses argv and runs. Exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dlsfem
