// nldd: run domain decomposition experiments from the command line.
//
//   nldd run --problem example1 --method dn --h 1/64
//   nldd sweep --problem example1 --h 1/32 --sweep-values 0.1,0.2,0.3
//   nldd compare --problem example2 --h 1/64
//   nldd mesh-export --h 1/2 --output mesh
//
// Any config key can also be set with --set key=value; flags are applied
// after the file given by --config.

#include "nldd/errors.hpp"
#include "nldd/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace {

struct Flags {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// Each flag maps onto one config key and is recorded in command-line order.
void add_key(CLI::App* app, Flags& flags, const std::string& name, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      name, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); }, help);
}

void add_common(CLI::App* app, Flags& flags) {
  app->set_help_flag("--help", "print this help and exit");
  app->add_option("-c,--config", flags.config_file, "key = value config file");
  app->add_option("--set", flags.sets, "override any config key (key=value)");
  add_key(app, flags, "--problem", "problem", "example1 | example2 | custom");
  add_key(app, flags, "--h", "h", "mesh sizes, comma separated (1/64 style allowed)");
  add_key(app, flags, "--width", "width", "domain width");
  add_key(app, flags, "--height", "height", "domain height");
  add_key(app, flags, "--interface", "interface", "L | vertical[:x] | polyline x,y;x,y;...");
  add_key(app, flags, "-o,--output", "output", "output directory");
  add_key(app, flags, "--cache", "cache", "reference cache directory");
  add_key(app, flags, "--workers", "workers", "concurrent cells");
  add_key(app, flags, "--max-iter", "max_iter", "iteration cap");
  add_key(app, flags, "--stop-tol", "stop_tol", "dual residual stop");
  add_key(app, flags, "--error-stop", "error_stop", "stop once the error is below this");
  add_key(app, flags, "--s", "s", "DN relaxation parameter");
  add_key(app, flags, "--s-rr", "s_rr", "Robin parameter");
  add_key(app, flags, "--s1", "s1", "Neumann-Neumann weight, side 1");
  add_key(app, flags, "--s2", "s2", "Neumann-Neumann weight, side 2");
  add_key(app, flags, "--eta0", "eta0", "zero | reference");
  add_key(app, flags, "--formulation", "formulation", "subdomain | interface");
  add_key(app, flags, "--eps", "eps", "p-Laplace regularization");
  add_key(app, flags, "--seed", "seed", "recorded in the summary");
  app->add_flag_callback("--timing", [&flags] { flags.overrides.emplace_back("timing", "true"); },
                         "write wall times into the CSV");
  app->add_flag_callback("--fine-meshes", [&flags] { flags.overrides.emplace_back("h", "1/64,1/128,1/256"); },
                         "use h = 1/64, 1/128, 1/256");
  app->add_flag_callback("--no-reference", [&flags] { flags.overrides.emplace_back("reference", "false"); },
                         "skip the monolithic reference and the error column");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonoverlapping domain decomposition for semilinear elliptic equations"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  Flags run_flags;
  Flags sweep_flags;
  Flags compare_flags;
  Flags mesh_flags;

  CLI::App* run = app.add_subcommand("run", "run one or more methods and write CSV + JSON");
  add_common(run, run_flags);
  add_key(run, run_flags, "--method", "method", "dn | rr | nn | all");

  CLI::App* sweep = app.add_subcommand("sweep", "scan the method parameter");
  add_common(sweep, sweep_flags);
  add_key(sweep, sweep_flags, "--method", "sweep_method", "dn | rr | nn");
  add_key(sweep, sweep_flags, "--sweep-values", "sweep_values", "explicit parameter list");
  add_key(sweep, sweep_flags, "--sweep-min", "sweep_min", "geometric grid start");
  add_key(sweep, sweep_flags, "--sweep-max", "sweep_max", "geometric grid end");
  add_key(sweep, sweep_flags, "--sweep-count", "sweep_count", "geometric grid size");
  add_key(sweep, sweep_flags, "--sweep-tol", "sweep_tol", "error target");

  CLI::App* compare = app.add_subcommand("compare", "DN, RR and NN on the same meshes");
  add_common(compare, compare_flags);

  CLI::App* mesh = app.add_subcommand("mesh-export", "write mesh and decomposition as text");
  add_common(mesh, mesh_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Flags* flags = run->parsed()       ? &run_flags
                 : sweep->parsed()   ? &sweep_flags
                 : compare->parsed() ? &compare_flags
                                     : &mesh_flags;

  nldd::ExperimentConfig cfg;
  try {
    auto overrides = flags->overrides;
    for (const auto& kv : flags->sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw nldd::Error(nldd::ErrorCode::ConfigError, "--set expects key=value");
      overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    std::optional<std::filesystem::path> file;
    if (!flags->config_file.empty()) file = flags->config_file;
    cfg = nldd::load_config(file, overrides);
  } catch (const nldd::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  if (run->parsed()) return nldd::cmd_run(cfg, std::cout, std::cerr);
  if (sweep->parsed()) return nldd::cmd_sweep(cfg, std::cout, std::cerr);
  if (compare->parsed()) return nldd::cmd_compare(cfg, std::cout, std::cerr);
  return nldd::cmd_mesh_export(cfg, std::cout, std::cerr);
}
