#pragma once

// Relaxed nonlinear splitting iteration
//
//   eta^{n+1} = (1 - s) eta^n + s G2^{-1}(chi - G1 eta^n)
//
// for G = G1 + G2 : X -> X^*, together with a damped Newton inverse for the
// individual operators. The engine knows nothing about finite elements; the
// Steklov-Poincare layer plugs in through MonotoneOperator.

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <vector>

namespace nldd {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

class MonotoneOperator {
 public:
  virtual ~MonotoneOperator() = default;

  [[nodiscard]] virtual Eigen::Index dim() const = 0;
  [[nodiscard]] virtual Vector apply(const Vector& x) const = 0;

  [[nodiscard]] virtual bool has_jacobian() const { return false; }
  /// Symmetric derivative at x. Only called when has_jacobian() is true.
  [[nodiscard]] virtual DenseMatrix jacobian(const Vector& x) const;
};

/// x -> A x + b for a fixed matrix A.
class AffineOperator final : public MonotoneOperator {
 public:
  explicit AffineOperator(DenseMatrix a, std::optional<Vector> b = std::nullopt);

  [[nodiscard]] Eigen::Index dim() const override { return a_.rows(); }
  [[nodiscard]] Vector apply(const Vector& x) const override;
  [[nodiscard]] bool has_jacobian() const override { return true; }
  [[nodiscard]] DenseMatrix jacobian(const Vector& x) const override;

 private:
  DenseMatrix a_;
  Vector b_;
};

/// x -> A x + c * x.^3 componentwise (c >= 0 keeps it monotone when A is SPD).
class CubicOperator final : public MonotoneOperator {
 public:
  CubicOperator(DenseMatrix a, double cubic);

  [[nodiscard]] Eigen::Index dim() const override { return a_.rows(); }
  [[nodiscard]] Vector apply(const Vector& x) const override;
  [[nodiscard]] bool has_jacobian() const override { return true; }
  [[nodiscard]] DenseMatrix jacobian(const Vector& x) const override;

 private:
  DenseMatrix a_;
  double cubic_;
};

/// Norm on X^* induced by an SPD Gram matrix P: |r|_* = sqrt(r^T P^{-1} r).
/// The factorization of P is computed once.
class DualNorm {
 public:
  DualNorm() = default;  // Euclidean
  explicit DualNorm(const DenseMatrix& gram);

  [[nodiscard]] double operator()(const Vector& r) const;
  [[nodiscard]] double primal(const Vector& x) const;
  [[nodiscard]] bool euclidean() const noexcept { return !llt_; }

 private:
  std::shared_ptr<const Eigen::LLT<DenseMatrix>> llt_;
  DenseMatrix gram_;
};

struct InversionResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;
};

/// Solves g(x) = psi by damped Newton (Armijo backtracking on the dual
/// residual norm), starting from x0. Throws SolverError with
/// NonConvergence or SingularJacobian.
[[nodiscard]] InversionResult invert_operator(const MonotoneOperator& g, const Vector& psi,
                                              const Vector& x0, double tol, int max_iter,
                                              const DualNorm& norm = {});

struct SplittingProblem {
  std::shared_ptr<const MonotoneOperator> g1;
  std::shared_ptr<const MonotoneOperator> g2;
  Vector chi;
  DualNorm norm;

  SplittingProblem(std::shared_ptr<const MonotoneOperator> g1,
                   std::shared_ptr<const MonotoneOperator> g2, Vector chi,
                   std::optional<DenseMatrix> inner_product = std::nullopt);

  [[nodiscard]] Eigen::Index dim() const { return chi.size(); }
};

struct IterationConfig {
  double s = 0.5;
  Vector eta0;
  int max_outer = 500;
  double outer_tol = 1e-10;
  double newton_tol = 1e-13;
  int newton_max = 50;
  /// Declared diverged once the residual exceeds this multiple of the initial one.
  double divergence_factor = 1e6;
  bool keep_iterates = false;

  void validate(Eigen::Index dim) const;
};

enum class Termination { Converged, MaxIterations, Diverged, Stagnated };

[[nodiscard]] const char* to_string(Termination t) noexcept;

struct IterationRecord {
  int n = 0;
  double iterate_norm = 0.0;
  double residual = 0.0;
  std::optional<double> error;
  int inner_iterations = 0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIterations;
  Vector final_iterate;
  std::vector<Vector> iterates;  // filled when IterationConfig::keep_iterates

  [[nodiscard]] bool converged() const { return termination == Termination::Converged; }
};

[[nodiscard]] IterationTrace splitting_iterate(const SplittingProblem& problem,
                                               const IterationConfig& config,
                                               const std::optional<Vector>& reference = std::nullopt);

/// Least-squares contraction factor exp(slope of log e_n against n).
[[nodiscard]] double fitted_rate(const std::vector<double>& errors);

}  // namespace nldd
