#include "nldd/experiment.hpp"

#include "nldd/errors.hpp"
#include "nldd/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace nldd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

double parse_plain(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) config_error("not a number: '" + text + "'");
  return v;
}

int parse_int(const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) config_error("not an integer: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  config_error("not a boolean: '" + text + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (!item.empty()) out.push_back(parse_number(item));
  }
  if (out.empty()) config_error("empty list");
  return out;
}

bool is_config_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonIntegerSubdivision:
    case ErrorCode::CutOffGrid:
    case ErrorCode::DisconnectedPath:
    case ErrorCode::PathNotOnGrid:
    case ErrorCode::UnsupportedDegree:
      return true;
    default:
      return false;
  }
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
  if (n_threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(n_threads, count); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

double method_parameter(const ExperimentConfig& cfg, Method m) {
  switch (m) {
    case Method::DirichletNeumann: return cfg.dn_parameter();
    case Method::RobinRobin: return cfg.s_rr;
    case Method::NeumannNeumann: return cfg.s1;
  }
  return 0.0;
}

std::string lower_name(Method m) {
  std::string s = to_string(m);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<MeshSetup> prepare_all(const ExperimentConfig& cfg, const SemilinearProblem& problem) {
  std::vector<MeshSetup> out;
  out.reserve(cfg.hs.size());
  for (double h : cfg.hs) out.push_back(prepare_mesh(cfg, problem, h));
  return out;
}

// Geometry is validated before any solve so that bad configs exit with 2.
void check_geometry(const ExperimentConfig& cfg) {
  for (double h : cfg.hs) {
    const TriMesh mesh = build_rect_mesh(cfg.width, cfg.height, h);
    (void)make_decomposition(cfg, mesh);
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_config_code(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

double ExperimentConfig::dn_parameter() const {
  if (s_dn) return *s_dn;
  return problem == "example2" ? 0.31 : 0.36;
}

double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_plain(text);
  const double num = parse_plain(text.substr(0, slash));
  const double den = parse_plain(text.substr(slash + 1));
  if (den == 0.0) config_error("division by zero in '" + text + "'");
  return num / den;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "problem") {
    if (value != "example1" && value != "example2" && value != "custom") config_error("unknown problem '" + value + "'");
    cfg.problem = value;
  } else if (key == "method") {
    (void)selected_methods(value);
    cfg.method = value;
  } else if (key == "width") {
    cfg.width = parse_number(value);
  } else if (key == "height") {
    cfg.height = parse_number(value);
  } else if (key == "h") {
    cfg.hs = parse_list(value);
    for (double h : cfg.hs) {
      if (!(h > 0.0)) config_error("mesh size must be positive");
    }
  } else if (key == "interface") {
    cfg.interface_spec = value;
  } else if (key == "s") {
    cfg.s_dn = parse_number(value);
  } else if (key == "s_rr") {
    cfg.s_rr = parse_number(value);
  } else if (key == "s1") {
    cfg.s1 = parse_number(value);
  } else if (key == "s2") {
    cfg.s2 = parse_number(value);
  } else if (key == "formulation") {
    if (value == "subdomain") {
      cfg.formulation = Formulation::Subdomain;
    } else if (value == "interface") {
      cfg.formulation = Formulation::Interface;
    } else {
      config_error("unknown formulation '" + value + "'");
    }
  } else if (key == "eta0") {
    if (value != "zero" && value != "reference") config_error("eta0 must be zero or reference");
    cfg.eta0_reference = value == "reference";
  } else if (key == "reference") {
    cfg.with_reference = parse_bool(value);
  } else if (key == "max_iter") {
    cfg.max_iter = parse_int(value);
    if (cfg.max_iter < 0) config_error("max_iter must be >= 0");
  } else if (key == "stop_tol") {
    cfg.stop_tol = parse_number(value);
  } else if (key == "error_stop") {
    if (value.empty() || value == "none") {
      cfg.error_stop.reset();
    } else {
      cfg.error_stop = parse_number(value);
    }
  } else if (key == "eps") {
    cfg.eps = parse_number(value);
  } else if (key == "alpha") {
    cfg.alpha = parse_number(value);
  } else if (key == "beta_linear") {
    cfg.beta_linear = parse_number(value);
  } else if (key == "beta_cubic") {
    cfg.beta_cubic = parse_number(value);
  } else if (key == "output") {
    cfg.output_dir = value;
  } else if (key == "cache") {
    cfg.cache_dir = value;
  } else if (key == "workers") {
    cfg.workers = parse_int(value);
    if (cfg.workers < 1) config_error("workers must be >= 1");
  } else if (key == "timing") {
    cfg.record_timing = parse_bool(value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(value));
  } else if (key == "sweep_method") {
    if (value != "dn" && value != "rr" && value != "nn") config_error("sweep_method must be dn, rr or nn");
    cfg.sweep_method = value;
  } else if (key == "sweep_values") {
    cfg.sweep_values = parse_list(value);
  } else if (key == "sweep_min") {
    cfg.sweep_min = parse_number(value);
  } else if (key == "sweep_max") {
    cfg.sweep_max = parse_number(value);
  } else if (key == "sweep_count") {
    cfg.sweep_count = parse_int(value);
  } else if (key == "sweep_tol") {
    cfg.sweep_tol = parse_number(value);
  } else {
    config_error("unknown key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      config_error(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  if (file) {
    for (const auto& [k, v] : read_config_file(*file)) apply_setting(cfg, k, v);
  }
  for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
  return cfg;
}

SemilinearProblem make_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "example1") return cubic_reaction_problem();
  if (cfg.problem == "example2") return plaplace_problem(cfg.eps);
  if (cfg.problem == "custom") {
    if (!(cfg.alpha > 0.0)) config_error("alpha must be positive");
    if (cfg.beta_cubic < 0.0) config_error("beta_cubic must be >= 0");
    return polynomial_problem(cfg.alpha, cfg.beta_linear, cfg.beta_cubic);
  }
  config_error("unknown problem '" + cfg.problem + "'");
}

Decomposition make_decomposition(const ExperimentConfig& cfg, const TriMesh& mesh) {
  const std::string& spec = cfg.interface_spec;
  if (spec == "L") {
    return decompose_staircase(mesh, {{cfg.width / 3.0, 0.0}, {cfg.width / 3.0, cfg.height / 2.0},
                                      {cfg.width, cfg.height / 2.0}});
  }
  if (spec.rfind("vertical", 0) == 0) {
    double x = cfg.width / 2.0;
    if (spec.size() > 8) {
      if (spec[8] != ':') config_error("interface must be vertical or vertical:<x>");
      x = parse_number(spec.substr(9));
    }
    return decompose_vertical(mesh, x);
  }
  if (spec.rfind("polyline", 0) == 0) {
    std::vector<Point> pts;
    for (const auto& item : split(trim(spec.substr(8)), ';')) {
      if (item.empty()) continue;
      const auto xy = split(item, ',');
      if (xy.size() != 2) config_error("polyline points are 'x,y' separated by ';'");
      pts.push_back({parse_number(xy[0]), parse_number(xy[1])});
    }
    if (pts.size() < 2) config_error("polyline needs at least two points");
    return decompose_staircase(mesh, pts);
  }
  config_error("unknown interface '" + spec + "'");
}

std::vector<Method> selected_methods(const std::string& method) {
  if (method == "dn") return {Method::DirichletNeumann};
  if (method == "rr") return {Method::RobinRobin};
  if (method == "nn") return {Method::NeumannNeumann};
  if (method == "all") return {Method::DirichletNeumann, Method::RobinRobin, Method::NeumannNeumann};
  config_error("unknown method '" + method + "'");
}

std::string mesh_tag(double h) {
  const double inv = 1.0 / h;
  if (std::abs(inv - std::round(inv)) < 1e-9) return "h" + std::to_string(std::lround(inv));
  return "h" + format_double(h);
}

MeshSetup prepare_mesh(const ExperimentConfig& cfg, const SemilinearProblem& problem, double h) {
  MeshSetup setup;
  setup.h = h;
  setup.mesh = build_rect_mesh(cfg.width, cfg.height, h);
  setup.dec = make_decomposition(cfg, setup.mesh);
  if (cfg.with_reference || cfg.eta0_reference) {
    setup.reference = solve_monolithic_cached(problem, setup.mesh, SolverOptions{}, cfg.cache_dir);
    setup.metric.emplace(setup.mesh, setup.dec, *setup.reference);
  }
  return setup;
}

MethodReport run_method(const ExperimentConfig& cfg, const SemilinearProblem& problem, const MeshSetup& setup,
                        Method method, std::optional<double> s) {
  DDSolver solver(setup.mesh, setup.dec, problem);
  const ErrorMetric* metric = cfg.with_reference && setup.metric ? &*setup.metric : nullptr;
  std::optional<Trace> eta0;
  if (cfg.eta0_reference) eta0 = setup.reference->interface_trace(setup.dec);

  switch (method) {
    case Method::DirichletNeumann: {
      DNConfig c;
      c.s = s.value_or(cfg.dn_parameter());
      c.eta0 = eta0;
      c.max_iter = cfg.max_iter;
      c.stop_tol = cfg.stop_tol;
      c.error_stop = cfg.error_stop;
      c.formulation = cfg.formulation;
      return solver.run_dirichlet_neumann(c, metric);
    }
    case Method::RobinRobin: {
      RRConfig c;
      c.s = s.value_or(cfg.s_rr);
      c.eta0 = eta0;
      c.max_iter = cfg.max_iter;
      c.stop_tol = cfg.stop_tol;
      c.error_stop = cfg.error_stop;
      return solver.run_robin_robin(c, metric);
    }
    case Method::NeumannNeumann: {
      NNConfig c;
      c.s1 = s.value_or(cfg.s1);
      c.s2 = s.value_or(cfg.s2);
      c.eta0 = eta0;
      c.max_iter = cfg.max_iter;
      c.stop_tol = cfg.stop_tol;
      c.error_stop = cfg.error_stop;
      return solver.run_neumann_neumann(c, metric);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

std::vector<double> sweep_grid(const ExperimentConfig& cfg) {
  std::vector<double> grid = cfg.sweep_values;
  if (grid.empty()) {
    if (cfg.sweep_count < 1) config_error("sweep_count must be >= 1");
    if (!(cfg.sweep_min > 0.0) || !(cfg.sweep_max >= cfg.sweep_min)) {
      config_error("geometric sweep needs 0 < sweep_min <= sweep_max");
    }
    if (cfg.sweep_count == 1) return {cfg.sweep_min};
    const double ratio = std::pow(cfg.sweep_max / cfg.sweep_min, 1.0 / (cfg.sweep_count - 1));
    for (int k = 0; k < cfg.sweep_count; ++k) grid.push_back(cfg.sweep_min * std::pow(ratio, k));
    grid.back() = cfg.sweep_max;
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg, const SemilinearProblem& problem,
                                 const MeshSetup& setup, Method method) {
  if (!setup.metric) throw Error(ErrorCode::ConfigError, "sweep needs the reference solution");
  const std::vector<double> grid = sweep_grid(cfg);
  std::vector<SweepCell> cells(grid.size());
  ExperimentConfig run_cfg = cfg;
  run_cfg.with_reference = true;
  run_cfg.error_stop = cfg.sweep_tol;

  parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
    SweepCell& cell = cells[i];
    cell.s = grid[i];
    if (cell.s == 0.0) {
      // The update degenerates to eta^{n+1} = eta^n.
      cell.no_progress = true;
      cell.termination = "no-progress";
      return;
    }
    try {
      const MethodReport r = run_method(run_cfg, problem, setup, method, cell.s);
      cell.iterations = r.iterations_to(cfg.sweep_tol);
      cell.converged = cell.iterations.has_value();
      cell.diverged = r.termination == Termination::Diverged;
      cell.min_error = r.min_error();
      cell.termination = to_string(r.termination);
      if (r.records.size() > 1 && r.records.front().error == r.records.back().error) cell.no_progress = true;
    } catch (const std::exception& e) {
      cell.termination = "failed";
      cell.failure = e.what();
    }
  });
  return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string out = "s,iterations,converged,diverged,no_progress,min_error,termination,failure\n";
  for (const auto& c : cells) {
    std::string failure = c.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    out += format_double(c.s) + ',' + (c.iterations ? std::to_string(*c.iterations) : "") + ',' +
           (c.converged ? "true" : "false") + ',' + (c.diverged ? "true" : "false") + ',' +
           (c.no_progress ? "true" : "false") + ',' + (c.min_error ? format_double(*c.min_error) : "") + ',' +
           c.termination + ',' + failure + '\n';
  }
  return out;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SemilinearProblem problem = make_problem(cfg);
    const std::vector<Method> methods = selected_methods(cfg.method);
    check_geometry(cfg);
    std::vector<RunSummary> summaries;
    for (const MeshSetup& setup : prepare_all(cfg, problem)) {
      for (Method m : methods) {
        const MethodReport report = run_method(cfg, problem, setup, m);
        const auto path = cfg.output_dir / (lower_name(m) + "_" + mesh_tag(setup.h) + ".csv");
        write_file_atomic(path, report_csv(report, cfg.record_timing));
        RunSummary s = summarize(report, setup.h, method_parameter(cfg, m),
                                 m == Method::NeumannNeumann ? std::optional<double>(cfg.s2) : std::nullopt);
        s.problem = cfg.problem;
        out << to_string(m) << ' ' << mesh_tag(setup.h) << ": " << to_string(report.termination) << " after "
            << report.iterations() << " iterations";
        if (s.final_error) out << ", error " << format_double(*s.final_error);
        out << " -> " << path.string() << '\n';
        summaries.push_back(std::move(s));
      }
    }
    write_file_atomic(cfg.output_dir / "summary.json", summaries_json(summaries));
    return 0;
  });
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SemilinearProblem problem = make_problem(cfg);
    const Method method = selected_methods(cfg.sweep_method).front();
    (void)sweep_grid(cfg);
    check_geometry(cfg);
    ExperimentConfig c = cfg;
    c.with_reference = true;
    for (const MeshSetup& setup : prepare_all(c, problem)) {
      const std::vector<SweepCell> cells = run_sweep(c, problem, setup, method);
      const auto path = cfg.output_dir / ("sweep_" + lower_name(method) + "_" + mesh_tag(setup.h) + ".csv");
      write_file_atomic(path, sweep_csv(cells));
      const SweepCell* best = nullptr;
      for (const auto& cell : cells) {
        if (cell.iterations && (!best || *cell.iterations < *best->iterations)) best = &cell;
      }
      out << to_string(method) << ' ' << mesh_tag(setup.h) << ": ";
      if (best) {
        out << "best s = " << format_double(best->s) << " (" << *best->iterations << " iterations)";
      } else {
        out << "no cell reached " << format_double(cfg.sweep_tol);
      }
      out << " -> " << path.string() << '\n';
    }
    return 0;
  });
}

int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SemilinearProblem problem = make_problem(cfg);
    check_geometry(cfg);
    ExperimentConfig c = cfg;
    c.with_reference = true;
    const std::vector<Method> methods = selected_methods("all");
    std::vector<RunSummary> summaries;
    for (const MeshSetup& setup : prepare_all(c, problem)) {
      std::vector<MethodReport> reports(methods.size());
      std::vector<std::string> failures(methods.size());
      parallel_for(methods.size(), c.workers, [&](std::size_t i) {
        try {
          reports[i] = run_method(c, problem, setup, methods[i]);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      });
      for (std::size_t i = 0; i < methods.size(); ++i) {
        if (!failures[i].empty()) {
          throw Error(ErrorCode::NonConvergence, std::string(to_string(methods[i])) + ": " + failures[i]);
        }
      }

      std::string csv = "n";
      for (Method m : methods) csv += std::string(",error_") + lower_name(m);
      for (Method m : methods) csv += std::string(",residual_") + lower_name(m);
      csv += '\n';
      std::size_t rows = 0;
      for (const auto& r : reports) rows = std::max(rows, r.records.size());
      for (std::size_t n = 0; n < rows; ++n) {
        csv += std::to_string(n);
        for (const auto& r : reports) {
          csv += ',';
          if (n < r.records.size() && r.records[n].error) csv += format_double(*r.records[n].error);
        }
        for (const auto& r : reports) {
          csv += ',';
          if (n < r.records.size()) csv += format_double(r.records[n].residual);
        }
        csv += '\n';
      }
      const auto path = cfg.output_dir / ("compare_" + mesh_tag(setup.h) + ".csv");
      write_file_atomic(path, csv);

      for (std::size_t i = 0; i < methods.size(); ++i) {
        const Method m = methods[i];
        RunSummary s = summarize(reports[i], setup.h, method_parameter(c, m),
                                 m == Method::NeumannNeumann ? std::optional<double>(c.s2) : std::nullopt);
        s.problem = c.problem;
        const auto to6 = reports[i].iterations_to(1e-6);
        out << to_string(m) << ' ' << mesh_tag(setup.h) << ": " << to_string(reports[i].termination)
            << ", iterations to 1e-6: " << (to6 ? std::to_string(*to6) : std::string("not reached")) << '\n';
        summaries.push_back(std::move(s));
      }
      out << "-> " << path.string() << '\n';
    }
    write_file_atomic(cfg.output_dir / "compare_summary.json", summaries_json(summaries));
    return 0;
  });
}

int cmd_mesh_export(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    for (double h : cfg.hs) {
      const TriMesh mesh = build_rect_mesh(cfg.width, cfg.height, h);
      const Decomposition dec = make_decomposition(cfg, mesh);
      std::ostringstream nodes;
      std::ostringstream tris;
      std::ostringstream iface;
      mesh.write_nodes(nodes);
      mesh.write_triangles(tris);
      for (std::size_t t = 0; t < mesh.num_triangles(); ++t) iface << dec.subdomain_of_triangle[t] << '\n';
      std::ostringstream gamma;
      for (NodeId n : dec.interface_nodes) gamma << n << '\n';
      const std::string tag = mesh_tag(h);
      write_file_atomic(cfg.output_dir / ("mesh_" + tag + "_nodes.txt"), nodes.str());
      write_file_atomic(cfg.output_dir / ("mesh_" + tag + "_triangles.txt"), tris.str());
      write_file_atomic(cfg.output_dir / ("mesh_" + tag + "_subdomain.txt"), iface.str());
      write_file_atomic(cfg.output_dir / ("mesh_" + tag + "_interface.txt"), gamma.str());
      out << tag << ": " << mesh.num_nodes() << " nodes, " << mesh.num_triangles() << " triangles, "
          << dec.num_interface() << " interface nodes\n";
    }
    return 0;
  });
}

}  // namespace nldd
