#include "nldd/problem.hpp"

#include "nldd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nldd {

double rectangle_source(Point p) { return p.x * (3.0 - p.x) * p.y * (2.0 - p.y); }

SemilinearProblem cubic_reaction_problem() {
  SemilinearProblem p;
  p.name = "example1";
  p.alpha = [](Point) { return 1.0; };
  p.beta = [](Point, double y) { return 10.0 * y * y * y; };
  p.beta_y = [](Point, double y) { return 30.0 * y * y; };
  p.source = rectangle_source;
  p.notes = "beta_y Lipschitz with L1 = 30(|y|+|y'|); monotone with h = 0; p* = 4";
  return p;
}

SemilinearProblem plaplace_problem(double eps) {
  SemilinearProblem p;
  std::ostringstream name;
  name.precision(17);
  name << "example2-plaplace-eps" << eps;
  p.name = name.str();
  p.kind = ProblemKind::PLaplace;
  p.alpha = [](Point) { return 1.0; };
  p.beta = [](Point, double y) { return y; };
  p.beta_y = [](Point, double) { return 1.0; };
  p.source = rectangle_source;
  p.regularization = eps;
  p.notes = "degenerate quasilinear (p = 3); outside the semilinear hypotheses";
  return p;
}

SemilinearProblem linear_problem(double a, double c, std::function<double(Point)> source) {
  return polynomial_problem(a, c, 0.0, std::move(source));
}

SemilinearProblem polynomial_problem(double a, double c1, double c3, std::function<double(Point)> source) {
  SemilinearProblem p;
  p.alpha = [a](Point) { return a; };
  p.beta = [c1, c3](Point, double y) { return c1 * y + c3 * y * y * y; };
  p.beta_y = [c1, c3](Point, double y) { return c1 + 3.0 * c3 * y * y; };
  p.source = std::move(source);
  return p;
}

CoefficientProbe probe_coefficients(const SemilinearProblem& problem, const TriMesh& mesh,
                                    const std::vector<double>& y_samples) {
  CoefficientProbe probe;
  probe.alpha_min = std::numeric_limits<double>::infinity();
  probe.alpha_max = -std::numeric_limits<double>::infinity();
  probe.beta_y_min = std::numeric_limits<double>::infinity();
  const auto& nodes = mesh.nodes();
  for (const Triangle& t : mesh.triangles()) {
    const Point c{(nodes[t[0]].x + nodes[t[1]].x + nodes[t[2]].x) / 3.0,
                  (nodes[t[0]].y + nodes[t[1]].y + nodes[t[2]].y) / 3.0};
    const double a = problem.alpha(c);
    probe.alpha_min = std::min(probe.alpha_min, a);
    probe.alpha_max = std::max(probe.alpha_max, a);
    for (double y : y_samples) probe.beta_y_min = std::min(probe.beta_y_min, problem.beta_y(c, y));
  }
  if (!(probe.alpha_min > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha is not positive on the mesh");
  }
  return probe;
}

}  // namespace nldd
