#pragma once

// Discrete solution operators on one subdomain:
//   F_i eta        Dirichlet solve with interface trace eta
//   F'_i(nu) eta   linearized Dirichlet solve at F_i nu
//   S_i eta        interface block of the residual of F_i eta
//   S'_i(nu) eta   interface block of A'_i(F_i nu) F'_i(nu) eta
//   S_i^{-1} psi   coupled Neumann-type solve (returned as the field F_i S_i^{-1} psi)

#include "nldd/assembly.hpp"
#include "nldd/interface_vector.hpp"
#include "nldd/newton.hpp"

#include <optional>

namespace nldd {

struct SolverOptions {
  NewtonOptions newton;
  int quad_degree = 4;
};

/// Discrete L2(Gamma) mass matrix on the interface nodes (P1 along the
/// interface polyline; endpoints on the outer boundary are eliminated).
[[nodiscard]] Eigen::MatrixXd interface_mass_matrix(const TriMesh& mesh, const Decomposition& dec);

/// Single-owner solver state for one side of a Decomposition.
class SubdomainWorkspace {
 public:
  SubdomainWorkspace(const TriMesh& mesh, const Decomposition& dec, const SemilinearProblem& problem, int side,
                     SolverOptions options = {});

  [[nodiscard]] int side() const noexcept { return side_; }
  [[nodiscard]] const DofMap& dofs() const noexcept { return assembler_.dofs(); }
  [[nodiscard]] const Assembler& assembler() const noexcept { return assembler_; }
  [[nodiscard]] Eigen::Index num_interior() const noexcept { return n_interior_; }
  [[nodiscard]] Eigen::Index num_interface() const noexcept { return n_interface_; }
  [[nodiscard]] const SolverOptions& options() const noexcept { return options_; }
  void set_newton_options(const NewtonOptions& newton) { options_.newton = newton; }

  [[nodiscard]] FieldVector dirichlet_solve(const Trace& eta);
  [[nodiscard]] FieldVector dirichlet_tangent_solve(const Trace& nu, const Trace& eta);
  [[nodiscard]] Flux apply_steklov_poincare(const Trace& eta);
  [[nodiscard]] Flux apply_sp_derivative(const Trace& nu, const Trace& eta);
  /// Dense S'_i(nu) (Schur complement of the Jacobian at F_i nu).
  [[nodiscard]] Eigen::MatrixXd sp_derivative_matrix(const Trace& nu);

  /// Solves interior residual = 0, interface residual = psi over all local
  /// unknowns. With `homogeneous` the source term is dropped.
  [[nodiscard]] FieldVector neumann_solve(const Flux& psi, bool homogeneous = false);

  /// Solves interior residual = 0, interface residual + s M u_Gamma = g.
  [[nodiscard]] FieldVector robin_solve(const Flux& g, double s, const Eigen::MatrixXd& interface_mass);

  [[nodiscard]] Trace trace(const FieldVector& u) const;
  /// Interface block of the residual (the discrete conormal flux of u).
  [[nodiscard]] Flux interface_residual(const FieldVector& u) const;

  /// Newton steps taken by the most recent solve.
  [[nodiscard]] int last_newton_iterations() const noexcept { return last_stats_.iterations; }
  [[nodiscard]] const NewtonStats& last_stats() const noexcept { return last_stats_; }

  /// Drops warm starts and cached factorizations.
  void reset();

 private:
  void check_size(Eigen::Index n, const char* what) const;
  void linearize_at(const Trace& nu);
  FieldVector coupled_solve(const Vector& interface_data, bool homogeneous, std::optional<SparseMatrix> robin,
                            std::optional<FieldVector>& warm);

  int side_;
  SolverOptions options_;
  Assembler assembler_;
  Eigen::Index n_interior_;
  Eigen::Index n_interface_;

  SparseDirectSolver interior_solver_;
  SparseDirectSolver full_solver_;
  SparseDirectSolver tangent_solver_;
  NewtonStats last_stats_;

  std::optional<FieldVector> dirichlet_warm_;
  std::optional<FieldVector> neumann_warm_;
  std::optional<FieldVector> homogeneous_warm_;
  std::optional<FieldVector> robin_warm_;

  // Linearization cache for F'_i(nu) / S'_i(nu).
  std::optional<Trace> tangent_point_;
  SparseMatrix j_ig_;
  SparseMatrix j_gi_;
  SparseMatrix j_gg_;
};

}  // namespace nldd
