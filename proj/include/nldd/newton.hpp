#pragma once

#include "nldd/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <functional>
#include <vector>

namespace nldd {

struct NewtonOptions {
  /// Converged when |r| <= rtol * max(|r(cold start)|, |r(initial guess)|) + atol.
  double rtol = 1e-12;
  double atol = 0.0;
  int max_iter = 50;
  double armijo = 1e-4;
  int max_halvings = 30;
  /// A full step smaller than this (relative, max norm) is treated as
  /// having reached the rounding floor.
  double step_floor = 1e-13;
};

struct NewtonStats {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  double tolerance = 0.0;
};

/// Sparse symmetric direct solver that keeps the symbolic analysis as long as
/// the sparsity pattern does not change.
class SparseDirectSolver {
 public:
  /// Throws SolverError(SingularJacobian) if the factorization fails.
  void factorize(const SparseMatrix& a);
  [[nodiscard]] Vector solve(const Vector& b) const;
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  [[nodiscard]] bool ready() const noexcept { return ready_; }
  void reset() noexcept { ready_ = false; analyzed_ = false; }

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  std::vector<SparseMatrix::StorageIndex> outer_;
  std::vector<SparseMatrix::StorageIndex> inner_;
  bool analyzed_ = false;
  bool ready_ = false;
};

struct NonlinearSystem {
  std::function<Vector(const Vector&)> residual;
  std::function<SparseMatrix(const Vector&)> jacobian;
};

/// Damped Newton with Armijo backtracking on the Euclidean residual norm.
/// x holds the initial guess on entry and the solution on exit. `scale` is
/// the reference residual norm for the relative tolerance.
/// Throws SolverError(NewtonDivergence | SingularJacobian).
NewtonStats newton_solve(const NonlinearSystem& system, Vector& x, SparseDirectSolver& solver,
                         const NewtonOptions& options, double scale);

}  // namespace nldd
