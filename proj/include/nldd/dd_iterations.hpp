#pragma once

#include "nldd/oracle.hpp"
#include "nldd/splitting.hpp"
#include "nldd/subdomain.hpp"

#include <array>
#include <optional>
#include <vector>

namespace nldd {

enum class Method { DirichletNeumann, RobinRobin, NeumannNeumann };

[[nodiscard]] const char* to_string(Method m) noexcept;

/// Relative error of a subdomain pair against the monolithic solution,
///   e = (|u1 - u1h| + |u2 - u2h|) / (|u1h| + |u2h|),
/// in the discrete H1 norm of each subdomain.
class ErrorMetric {
 public:
  ErrorMetric(const TriMesh& mesh, const Decomposition& dec, const MonolithicSolution& reference);
  ErrorMetric(const TriMesh& mesh, const Decomposition& dec, FieldVector u1_ref, FieldVector u2_ref);

  /// Throws Error(MeshMismatch) if a field does not fit its subdomain.
  [[nodiscard]] double operator()(const FieldVector& u1, const FieldVector& u2) const;

  [[nodiscard]] double h1_norm(int side, const FieldVector& u) const;
  [[nodiscard]] const FieldVector& reference(int side) const { return ref_.at(static_cast<std::size_t>(side - 1)); }

 private:
  std::array<SparseMatrix, 2> gram_;
  std::array<FieldVector, 2> ref_;
  double denominator_ = 0.0;
};

[[nodiscard]] double compute_error(const ErrorMetric& metric, const FieldVector& u1, const FieldVector& u2);

enum class Formulation {
  /// Subdomain solves: Dirichlet on side 1, Neumann on side 2.
  Subdomain,
  /// eta <- (1 - s) eta + s S2^{-1}(-S1 eta) through the generic splitting
  /// engine, with S2^{-1} by Newton on the interface.
  Interface,
};

struct DNConfig {
  double s = 0.36;
  std::optional<Trace> eta0;  // zero when unset
  int max_iter = 100;
  /// Stop when |S1 eta + S2 eta| (coefficient 2-norm) falls below this.
  double stop_tol = 1e-11;
  /// Optional extra stop once the error against the reference is this small.
  std::optional<double> error_stop;
  Formulation formulation = Formulation::Subdomain;
  double divergence_factor = 1e6;
  bool keep_iterates = false;
  /// Interface-form only: tolerance and cap for the Newton inverse of S2.
  double interface_newton_tol = 1e-11;
  int interface_newton_max = 50;
  /// Interface-form only: relative Newton tolerance of the subdomain solves
  /// behind S1 and S2. Tight, so the interface Newton sees a clean operator.
  double interface_subdomain_rtol = 1e-15;
};

struct RRConfig {
  double s = 46.0;
  std::optional<Trace> eta0;
  int max_iter = 300;
  double stop_tol = 1e-11;
  std::optional<double> error_stop;
  double divergence_factor = 1e6;
  bool keep_iterates = false;
};

struct NNConfig {
  double s1 = 0.02;
  double s2 = 0.02;
  std::optional<Trace> eta0;
  int max_iter = 300;
  double stop_tol = 1e-11;
  std::optional<double> error_stop;
  double divergence_factor = 1e6;
  /// Stagnation: no improvement below plateau_factor * best for this many
  /// consecutive iterations.
  int plateau_window = 20;
  double plateau_factor = 0.99;
  bool keep_iterates = false;
};

struct MethodRecord {
  int n = 0;
  std::optional<double> error;
  double residual = 0.0;
  int newton1 = 0;
  int newton2 = 0;
  double seconds = 0.0;
};

struct MethodReport {
  Method method = Method::DirichletNeumann;
  std::vector<MethodRecord> records;
  Termination termination = Termination::MaxIterations;
  Trace final_eta;
  FieldVector u1;
  FieldVector u2;
  std::vector<Trace> etas;  // eta^n per record, when keep_iterates

  [[nodiscard]] bool converged() const noexcept { return termination == Termination::Converged; }
  [[nodiscard]] int iterations() const noexcept { return records.empty() ? 0 : records.back().n; }
  [[nodiscard]] std::optional<double> final_error() const;
  [[nodiscard]] std::optional<double> min_error() const;
  /// First n with error <= tol.
  [[nodiscard]] std::optional<int> iterations_to(double tol) const;
};

/// exp of the least-squares slope of log e_n over records with lo <= e_n <= hi.
[[nodiscard]] std::optional<double> fitted_convergence_factor(const MethodReport& report, double lo = 1e-8,
                                                              double hi = 1e-2);

struct EquivalenceReport {
  std::vector<double> discrepancy;  // max-norm difference of eta^n between the two forms
  double max_discrepancy = 0.0;
};

/// S_i as an operator for the splitting engine; the jacobian is the dense
/// Schur complement S'_i(x).
class SteklovPoincareOperator final : public MonotoneOperator {
 public:
  explicit SteklovPoincareOperator(SubdomainWorkspace& ws) : ws_(&ws) {}

  [[nodiscard]] Eigen::Index dim() const override { return ws_->num_interface(); }
  [[nodiscard]] Vector apply(const Vector& x) const override;
  [[nodiscard]] bool has_jacobian() const override { return true; }
  [[nodiscard]] DenseMatrix jacobian(const Vector& x) const override;

 private:
  SubdomainWorkspace* ws_;
};

/// Owns one workspace per side and runs the interface iterations.
class DDSolver {
 public:
  DDSolver(const TriMesh& mesh, const Decomposition& dec, const SemilinearProblem& problem,
           SolverOptions options = {});

  [[nodiscard]] MethodReport run_dirichlet_neumann(const DNConfig& cfg, const ErrorMetric* metric = nullptr);
  [[nodiscard]] MethodReport run_robin_robin(const RRConfig& cfg, const ErrorMetric* metric = nullptr);
  [[nodiscard]] MethodReport run_neumann_neumann(const NNConfig& cfg, const ErrorMetric* metric = nullptr);

  /// Runs both DN formulations for `steps` iterations from the same eta0 and
  /// compares iterates. Throws Error(EquivalenceViolation) naming the first
  /// step whose discrepancy exceeds `threshold`.
  [[nodiscard]] EquivalenceReport verify_lemma_equivalence(DNConfig cfg, int steps = 20, double threshold = 1e-10);

  /// S1 eta + S2 eta.
  [[nodiscard]] Flux sp_residual(const Trace& eta);

  [[nodiscard]] SubdomainWorkspace& workspace(int side) { return ws_.at(static_cast<std::size_t>(side - 1)); }
  [[nodiscard]] Eigen::Index num_interface() const noexcept { return ws_[0].num_interface(); }
  [[nodiscard]] const Eigen::MatrixXd& interface_mass() const noexcept { return interface_mass_; }

 private:
  MethodReport run_dn_subdomain(const DNConfig& cfg, const ErrorMetric* metric);
  MethodReport run_dn_interface(const DNConfig& cfg, const ErrorMetric* metric);
  [[nodiscard]] Trace initial_trace(const std::optional<Trace>& eta0) const;
  void reset();

  std::array<SubdomainWorkspace, 2> ws_;
  Eigen::MatrixXd interface_mass_;
};

}  // namespace nldd
