#pragma once

// Experiment runner behind the `nldd` command line tool.
//
// Config files are plain `key = value` lines; `#` starts a comment. Keys:
//
//   problem        example1 | example2 | custom            (example1)
//   method         dn | rr | nn | all                      (dn)
//   width, height  domain size                             (3, 2)
//   h              comma list of mesh sizes, "1/64" allowed (1/16,1/32,1/64)
//   interface      vertical[:x] | L | polyline x,y;x,y;... (vertical, x = width/2)
//   s              DN relaxation                           (0.36 example1, 0.31 example2, else 0.36)
//   s_rr           Robin parameter                         (46)
//   s1, s2         Neumann-Neumann weights                 (0.02, 0.02)
//   formulation    subdomain | interface                   (subdomain)
//   eta0           zero | reference                        (zero)
//   reference      true | false: compute the error column  (true)
//   max_iter       iteration cap                           (100)
//   stop_tol       dual residual stop                      (1e-11)
//   error_stop     stop once e <= value                    (unset)
//   eps            p-Laplace regularization                (1e-8)
//   alpha, beta_linear, beta_cubic   custom problem coefficients (1, 0, 10)
//   output         output directory                        (nldd_out)
//   cache          reference cache directory, empty = none (empty)
//   workers        concurrent cells in sweep/compare       (1)
//   timing         write wall times into the CSV           (false)
//   seed           recorded in the summary                 (0)
//   sweep_method   dn | rr | nn                            (dn)
//   sweep_values   explicit comma list of s                (unset)
//   sweep_min, sweep_max, sweep_count   geometric grid     (0.1, 0.9, 9)
//   sweep_tol      error target for the sweep table        (1e-6)

#include "nldd/dd_iterations.hpp"
#include "nldd/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nldd {

struct ExperimentConfig {
  std::string problem = "example1";
  std::string method = "dn";
  double width = 3.0;
  double height = 2.0;
  std::vector<double> hs = {1.0 / 16, 1.0 / 32, 1.0 / 64};
  std::string interface_spec = "vertical";
  std::optional<double> s_dn;
  double s_rr = 46.0;
  double s1 = 0.02;
  double s2 = 0.02;
  Formulation formulation = Formulation::Subdomain;
  bool eta0_reference = false;
  bool with_reference = true;
  int max_iter = 100;
  double stop_tol = 1e-11;
  std::optional<double> error_stop;
  double eps = 1e-8;
  double alpha = 1.0;
  double beta_linear = 0.0;
  double beta_cubic = 10.0;
  std::filesystem::path output_dir = "nldd_out";
  std::filesystem::path cache_dir;
  int workers = 1;
  bool record_timing = false;
  std::uint64_t seed = 0;

  std::string sweep_method = "dn";
  std::vector<double> sweep_values;
  double sweep_min = 0.1;
  double sweep_max = 0.9;
  int sweep_count = 9;
  double sweep_tol = 1e-6;

  /// s for DN: explicit value, else the near-optimal value for the problem.
  [[nodiscard]] double dn_parameter() const;
};

/// Parses "0.25" or "1/64". Throws Error(ConfigError).
[[nodiscard]] double parse_number(const std::string& text);

/// Sets one key. Throws Error(ConfigError) for unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key = value` lines. Throws Error(ConfigError) on malformed lines,
/// Error(IoError) if the file cannot be read.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// File settings first, then `overrides` in order.
[[nodiscard]] ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                                           const std::vector<std::pair<std::string, std::string>>& overrides);

[[nodiscard]] SemilinearProblem make_problem(const ExperimentConfig& cfg);
[[nodiscard]] Decomposition make_decomposition(const ExperimentConfig& cfg, const TriMesh& mesh);
[[nodiscard]] std::vector<Method> selected_methods(const std::string& method);

/// File stem for a mesh size, e.g. "h64" for 1/64.
[[nodiscard]] std::string mesh_tag(double h);

/// Everything needed to run the methods on one mesh.
struct MeshSetup {
  double h = 0.0;
  TriMesh mesh;
  Decomposition dec;
  std::optional<MonolithicSolution> reference;
  std::optional<ErrorMetric> metric;
};

[[nodiscard]] MeshSetup prepare_mesh(const ExperimentConfig& cfg, const SemilinearProblem& problem, double h);

/// One method on one mesh with the configured parameters (s overrides the
/// method's configured parameter; for NN it sets s1 = s2 = s).
[[nodiscard]] MethodReport run_method(const ExperimentConfig& cfg, const SemilinearProblem& problem,
                                      const MeshSetup& setup, Method method, std::optional<double> s = std::nullopt);

struct SweepCell {
  double s = 0.0;
  std::optional<int> iterations;  // to sweep_tol
  bool converged = false;
  bool diverged = false;
  bool no_progress = false;
  std::optional<double> min_error;
  std::string termination;
  std::string failure;
};

[[nodiscard]] std::vector<double> sweep_grid(const ExperimentConfig& cfg);
[[nodiscard]] std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg, const SemilinearProblem& problem,
                                               const MeshSetup& setup, Method method);
[[nodiscard]] std::string sweep_csv(const std::vector<SweepCell>& cells);

/// Exit codes: 0 success, 1 solver failure, 2 configuration error.
int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_mesh_export(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace nldd
