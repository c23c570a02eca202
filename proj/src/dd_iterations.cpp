#include "nldd/dd_iterations.hpp"

#include "nldd/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace nldd {

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::DirichletNeumann: return "DN";
    case Method::RobinRobin: return "RR";
    case Method::NeumannNeumann: return "NN";
  }
  return "?";
}

namespace {

SparseMatrix h1_gram(const TriMesh& mesh, const DofMap& dofs) {
  const Assembler a(mesh, dofs, linear_problem(1.0, 0.0));
  return a.stiffness() + a.mass();
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool diverging(double res, double res0, double factor) {
  return !std::isfinite(res) || (res0 > 0.0 && res > factor * res0);
}

}  // namespace

ErrorMetric::ErrorMetric(const TriMesh& mesh, const Decomposition& dec, const MonolithicSolution& reference)
    : ErrorMetric(mesh, dec, reference.restrict_to(dec.side(1)), reference.restrict_to(dec.side(2))) {}

ErrorMetric::ErrorMetric(const TriMesh& mesh, const Decomposition& dec, FieldVector u1_ref, FieldVector u2_ref)
    : gram_{h1_gram(mesh, dec.side(1)), h1_gram(mesh, dec.side(2))}, ref_{std::move(u1_ref), std::move(u2_ref)} {
  for (int s = 1; s <= 2; ++s) {
    if (reference(s).size() != dec.side(s).size()) {
      throw Error(ErrorCode::MeshMismatch, "reference does not match subdomain " + std::to_string(s));
    }
  }
  denominator_ = h1_norm(1, ref_[0]) + h1_norm(2, ref_[1]);
}

double ErrorMetric::h1_norm(int side, const FieldVector& u) const {
  const SparseMatrix& g = gram_.at(static_cast<std::size_t>(side - 1));
  if (u.size() != g.rows()) {
    throw Error(ErrorCode::MeshMismatch, "field does not match subdomain " + std::to_string(side));
  }
  return std::sqrt(std::max(0.0, u.dot(g * u)));
}

double ErrorMetric::operator()(const FieldVector& u1, const FieldVector& u2) const {
  for (int s = 1; s <= 2; ++s) {
    const FieldVector& u = s == 1 ? u1 : u2;
    if (u.size() != ref_.at(static_cast<std::size_t>(s - 1)).size()) {
      throw Error(ErrorCode::MeshMismatch, "field does not match subdomain " + std::to_string(s));
    }
  }
  const double num = h1_norm(1, u1 - ref_[0]) + h1_norm(2, u2 - ref_[1]);
  if (denominator_ == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / denominator_;
}

double compute_error(const ErrorMetric& metric, const FieldVector& u1, const FieldVector& u2) {
  return metric(u1, u2);
}

std::optional<double> MethodReport::final_error() const {
  if (records.empty()) return std::nullopt;
  return records.back().error;
}

std::optional<double> MethodReport::min_error() const {
  std::optional<double> best;
  for (const auto& r : records) {
    if (r.error && (!best || *r.error < *best)) best = r.error;
  }
  return best;
}

std::optional<int> MethodReport::iterations_to(double tol) const {
  for (const auto& r : records) {
    if (r.error && *r.error <= tol) return r.n;
  }
  return std::nullopt;
}

std::optional<double> fitted_convergence_factor(const MethodReport& report, double lo, double hi) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : report.records) {
    if (r.error && *r.error >= lo && *r.error <= hi) {
      xs.push_back(r.n);
      ys.push_back(std::log(*r.error));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const auto m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx));
}

Vector SteklovPoincareOperator::apply(const Vector& x) const {
  return ws_->apply_steklov_poincare(Trace(x)).values();
}

DenseMatrix SteklovPoincareOperator::jacobian(const Vector& x) const { return ws_->sp_derivative_matrix(Trace(x)); }

DDSolver::DDSolver(const TriMesh& mesh, const Decomposition& dec, const SemilinearProblem& problem,
                   SolverOptions options)
    : ws_{SubdomainWorkspace(mesh, dec, problem, 1, options), SubdomainWorkspace(mesh, dec, problem, 2, options)},
      interface_mass_(interface_mass_matrix(mesh, dec)) {}

void DDSolver::reset() {
  ws_[0].reset();
  ws_[1].reset();
}

Trace DDSolver::initial_trace(const std::optional<Trace>& eta0) const {
  if (!eta0) return Trace::zeros(num_interface());
  if (eta0->size() != num_interface()) throw Error(ErrorCode::InvalidArgument, "eta0 has wrong size");
  return *eta0;
}

Flux DDSolver::sp_residual(const Trace& eta) {
  return ws_[0].apply_steklov_poincare(eta) + ws_[1].apply_steklov_poincare(eta);
}

MethodReport DDSolver::run_dirichlet_neumann(const DNConfig& cfg, const ErrorMetric* metric) {
  if (!(cfg.s > 0.0)) throw Error(ErrorCode::InvalidArgument, "DN relaxation parameter must be > 0");
  if (cfg.max_iter < 0) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 0");
  reset();
  return cfg.formulation == Formulation::Subdomain ? run_dn_subdomain(cfg, metric) : run_dn_interface(cfg, metric);
}

MethodReport DDSolver::run_dn_subdomain(const DNConfig& cfg, const ErrorMetric* metric) {
  MethodReport report;
  report.method = Method::DirichletNeumann;
  const Stopwatch clock;
  auto& ws1 = ws_[0];
  auto& ws2 = ws_[1];

  Trace eta = initial_trace(cfg.eta0);
  double res0 = 0.0;
  for (int n = 0;; ++n) {
    MethodRecord rec;
    rec.n = n;
    FieldVector u1 = ws1.dirichlet_solve(eta);
    rec.newton1 = ws1.last_newton_iterations();
    const Flux s1 = ws1.interface_residual(u1);
    FieldVector u2 = ws2.neumann_solve(-s1);
    rec.newton2 = ws2.last_newton_iterations();

    rec.residual = (s1 + ws2.apply_steklov_poincare(eta)).norm();
    if (n == 0) res0 = rec.residual;
    if (metric) rec.error = (*metric)(u1, u2);
    rec.seconds = clock.seconds();
    report.records.push_back(rec);
    if (cfg.keep_iterates) report.etas.push_back(eta);

    const Trace next = cfg.s * ws2.trace(u2) + (1.0 - cfg.s) * eta;
    report.final_eta = eta;
    report.u1 = std::move(u1);
    report.u2 = std::move(u2);

    if (rec.residual <= cfg.stop_tol || (cfg.error_stop && rec.error && *rec.error <= *cfg.error_stop)) {
      report.termination = Termination::Converged;
      break;
    }
    if (diverging(rec.residual, res0, cfg.divergence_factor)) {
      report.termination = Termination::Diverged;
      break;
    }
    if (n == cfg.max_iter) {
      report.termination = Termination::MaxIterations;
      break;
    }
    eta = next;
  }
  return report;
}

MethodReport DDSolver::run_dn_interface(const DNConfig& cfg, const ErrorMetric* metric) {
  MethodReport report;
  report.method = Method::DirichletNeumann;
  const Stopwatch clock;
  auto& ws1 = ws_[0];
  auto& ws2 = ws_[1];

  const NewtonOptions saved = ws1.options().newton;
  NewtonOptions tight = saved;
  tight.rtol = cfg.interface_subdomain_rtol;
  ws1.set_newton_options(tight);
  ws2.set_newton_options(tight);
  struct Restore {
    SubdomainWorkspace& a;
    SubdomainWorkspace& b;
    NewtonOptions opts;
    ~Restore() {
      a.set_newton_options(opts);
      b.set_newton_options(opts);
    }
  } restore{ws1, ws2, saved};

  auto s1 = std::make_shared<SteklovPoincareOperator>(ws1);
  auto s2 = std::make_shared<SteklovPoincareOperator>(ws2);
  const SplittingProblem problem(s1, s2, Vector::Zero(num_interface()));
  IterationConfig ic;
  ic.s = cfg.s;
  ic.eta0 = initial_trace(cfg.eta0).values();
  ic.max_outer = std::max(1, cfg.max_iter);
  ic.outer_tol = std::max(cfg.stop_tol, std::numeric_limits<double>::min());
  ic.newton_tol = cfg.interface_newton_tol;
  ic.newton_max = cfg.interface_newton_max;
  ic.divergence_factor = cfg.divergence_factor;
  ic.keep_iterates = true;
  IterationTrace trace = splitting_iterate(problem, ic);
  if (cfg.max_iter == 0 && trace.iterates.size() > 1) trace.iterates.resize(1);

  // One more interface step so the last record has eta^{n+1} as well.
  const Vector& last = trace.iterates.back();
  const InversionResult extra =
      invert_operator(*s2, -s1->apply(last), last, cfg.interface_newton_tol, cfg.interface_newton_max);
  std::vector<Vector> etas = trace.iterates;
  etas.push_back((1.0 - cfg.s) * last + cfg.s * extra.x);

  const std::size_t count = trace.iterates.size();
  for (std::size_t n = 0; n < count; ++n) {
    MethodRecord rec;
    rec.n = static_cast<int>(n);
    rec.residual = trace.records[n].residual;
    rec.newton2 = n + 1 < trace.records.size() ? trace.records[n + 1].inner_iterations : extra.iterations;
    const Trace eta(etas[n]);
    // u1^{n+1} = F1 eta^n, u2^{n+1} = F2((eta^{n+1} - (1 - s) eta^n) / s).
    FieldVector u1 = ws1.dirichlet_solve(eta);
    FieldVector u2 = ws2.dirichlet_solve(Trace((etas[n + 1] - (1.0 - cfg.s) * etas[n]) / cfg.s));
    if (metric) rec.error = (*metric)(u1, u2);
    rec.seconds = clock.seconds();
    report.records.push_back(rec);
    if (cfg.keep_iterates) report.etas.push_back(eta);
    report.final_eta = eta;
    report.u1 = std::move(u1);
    report.u2 = std::move(u2);
  }
  report.termination = trace.termination;
  return report;
}

MethodReport DDSolver::run_robin_robin(const RRConfig& cfg, const ErrorMetric* metric) {
  if (!(cfg.s > 0.0)) throw Error(ErrorCode::InvalidArgument, "RR parameter must be > 0");
  reset();
  MethodReport report;
  report.method = Method::RobinRobin;
  const Stopwatch clock;
  auto& ws1 = ws_[0];
  auto& ws2 = ws_[1];
  const Eigen::MatrixXd& mass = interface_mass_;

  // Robin data for side 1 generated by the side-2 state F2 eta0.
  const Trace eta0 = initial_trace(cfg.eta0);
  Flux g1 = Flux(cfg.s * (mass * eta0.values())) - ws2.apply_steklov_poincare(eta0);

  double res0 = 0.0;
  for (int n = 0;; ++n) {
    MethodRecord rec;
    rec.n = n;
    FieldVector u1 = ws1.robin_solve(g1, cfg.s, mass);
    rec.newton1 = ws1.last_newton_iterations();
    const Flux g2 = Flux(cfg.s * (mass * ws1.trace(u1).values())) - ws1.interface_residual(u1);
    FieldVector u2 = ws2.robin_solve(g2, cfg.s, mass);
    rec.newton2 = ws2.last_newton_iterations();
    g1 = Flux(cfg.s * (mass * ws2.trace(u2).values())) - ws2.interface_residual(u2);

    const Trace lambda = ws2.trace(u2);
    rec.residual = sp_residual(lambda).norm();
    if (n == 0) res0 = rec.residual;
    if (metric) rec.error = (*metric)(u1, u2);
    rec.seconds = clock.seconds();
    report.records.push_back(rec);
    if (cfg.keep_iterates) report.etas.push_back(lambda);
    report.final_eta = lambda;
    report.u1 = std::move(u1);
    report.u2 = std::move(u2);

    if (rec.residual <= cfg.stop_tol || (cfg.error_stop && rec.error && *rec.error <= *cfg.error_stop)) {
      report.termination = Termination::Converged;
      break;
    }
    if (diverging(rec.residual, res0, cfg.divergence_factor)) {
      report.termination = Termination::Diverged;
      break;
    }
    if (n == cfg.max_iter) {
      report.termination = Termination::MaxIterations;
      break;
    }
  }
  return report;
}

MethodReport DDSolver::run_neumann_neumann(const NNConfig& cfg, const ErrorMetric* metric) {
  if (!(cfg.s1 > 0.0) || !(cfg.s2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "NN parameters must be > 0");
  reset();
  MethodReport report;
  report.method = Method::NeumannNeumann;
  const Stopwatch clock;
  auto& ws1 = ws_[0];
  auto& ws2 = ws_[1];

  Trace eta = initial_trace(cfg.eta0);
  double res0 = 0.0;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int n = 0;; ++n) {
    MethodRecord rec;
    rec.n = n;
    FieldVector u1 = ws1.dirichlet_solve(eta);
    rec.newton1 = ws1.last_newton_iterations();
    FieldVector u2 = ws2.dirichlet_solve(eta);
    rec.newton2 = ws2.last_newton_iterations();
    const Flux psi = ws1.interface_residual(u1) + ws2.interface_residual(u2);
    rec.residual = psi.norm();
    if (n == 0) res0 = rec.residual;
    if (metric) rec.error = (*metric)(u1, u2);
    rec.seconds = clock.seconds();
    report.records.push_back(rec);
    if (cfg.keep_iterates) report.etas.push_back(eta);
    report.final_eta = eta;
    report.u1 = std::move(u1);
    report.u2 = std::move(u2);

    if (rec.residual <= cfg.stop_tol || (cfg.error_stop && rec.error && *rec.error <= *cfg.error_stop)) {
      report.termination = Termination::Converged;
      break;
    }
    if (diverging(rec.residual, res0, cfg.divergence_factor)) {
      report.termination = Termination::Diverged;
      break;
    }
    const double progress = rec.error ? *rec.error : rec.residual;
    if (progress < cfg.plateau_factor * best) {
      best = progress;
      since_best = 0;
    } else if (++since_best >= cfg.plateau_window) {
      report.termination = Termination::Stagnated;
      break;
    }
    if (n == cfg.max_iter) {
      report.termination = Termination::MaxIterations;
      break;
    }

    // Source-free Neumann corrections driven by the flux mismatch.
    const FieldVector w1 = ws1.neumann_solve(psi, true);
    const FieldVector w2 = ws2.neumann_solve(psi, true);
    eta -= cfg.s1 * ws1.trace(w1) + cfg.s2 * ws2.trace(w2);
  }
  return report;
}

EquivalenceReport DDSolver::verify_lemma_equivalence(DNConfig cfg, int steps, double threshold) {
  cfg.max_iter = steps;
  cfg.stop_tol = std::numeric_limits<double>::min();
  cfg.error_stop.reset();
  cfg.keep_iterates = true;

  cfg.formulation = Formulation::Subdomain;
  const MethodReport sub = run_dirichlet_neumann(cfg);
  cfg.formulation = Formulation::Interface;
  const MethodReport inter = run_dirichlet_neumann(cfg);

  EquivalenceReport out;
  const std::size_t count = std::min(sub.etas.size(), inter.etas.size());
  for (std::size_t n = 0; n < count; ++n) {
    const double d = (sub.etas[n].values() - inter.etas[n].values()).cwiseAbs().maxCoeff();
    out.discrepancy.push_back(d);
    out.max_discrepancy = std::max(out.max_discrepancy, d);
    if (!(d <= threshold)) {
      throw Error(ErrorCode::EquivalenceViolation,
                  "formulations differ by " + std::to_string(d) + " at step " + std::to_string(n));
    }
  }
  return out;
}

}  // namespace nldd
