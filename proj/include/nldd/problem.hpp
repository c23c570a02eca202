#pragma once

#include "nldd/mesh.hpp"

#include <functional>
#include <string>

namespace nldd {

enum class ProblemKind {
  /// -div(alpha(x) grad u) + beta(x, u) = f
  Semilinear,
  /// -div(alpha(x) |grad u|_eps grad u) + beta(x, u) = f, with
  /// |g|_eps = sqrt(|g|^2 + eps^2)
  PLaplace,
};

/// Coefficients of the model equation with homogeneous Dirichlet data on the
/// outer boundary. Callbacks must be pure functions.
struct SemilinearProblem {
  /// Identifies the problem in reference cache keys; leave empty for ad-hoc
  /// problems, which are then never cached.
  std::string name;
  ProblemKind kind = ProblemKind::Semilinear;
  std::function<double(Point)> alpha;
  std::function<double(Point, double)> beta;
  std::function<double(Point, double)> beta_y;
  std::function<double(Point)> source;
  double regularization = 1e-8;

  /// Growth/coercivity notes (constants L0..L2, exponent p*, h(x)). Not used
  /// at runtime.
  std::string notes;
};

/// f(x, y) = x (3 - x) y (2 - y)
[[nodiscard]] double rectangle_source(Point p);

/// alpha = 1, beta(y) = 10 |y|^2 y.
[[nodiscard]] SemilinearProblem cubic_reaction_problem();

/// alpha(grad u) = |grad u| (p = 3), beta(y) = y; regularized.
[[nodiscard]] SemilinearProblem plaplace_problem(double eps = 1e-8);

/// alpha = a, beta(y) = c y. Linear; Newton converges in one step.
[[nodiscard]] SemilinearProblem linear_problem(double a = 1.0, double c = 1.0,
                                               std::function<double(Point)> source = rectangle_source);

/// alpha = a, beta(y) = c1 y + c3 |y|^2 y.
[[nodiscard]] SemilinearProblem polynomial_problem(double a, double c1, double c3,
                                                   std::function<double(Point)> source = rectangle_source);

struct CoefficientProbe {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  /// Smallest beta_y over the probes; -min(0, .) is the observed h(x) bound.
  double beta_y_min = 0.0;
};

/// Evaluates alpha at element centroids and beta_y at the given sample
/// values. Throws InvalidArgument if alpha is not bounded away from zero.
[[nodiscard]] CoefficientProbe probe_coefficients(const SemilinearProblem& problem, const TriMesh& mesh,
                                                  const std::vector<double>& y_samples = {-2, -1, -0.1, 0, 0.1, 1, 2});

}  // namespace nldd
