#include "nldd/newton.hpp"

#include "nldd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nldd {

void SparseDirectSolver::factorize(const SparseMatrix& a) {
  ready_ = false;
  const auto n_outer = static_cast<std::size_t>(a.outerSize() + 1);
  const auto nnz = static_cast<std::size_t>(a.nonZeros());
  const bool same = analyzed_ && outer_.size() == n_outer && inner_.size() == nnz &&
                    std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr()) &&
                    std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
  if (!same) {
    ldlt_.analyzePattern(a);
    outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + n_outer);
    inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + nnz);
    analyzed_ = true;
  }
  ldlt_.factorize(a);
  if (ldlt_.info() != Eigen::Success) {
    throw SolverError(ErrorCode::SingularJacobian, "sparse LDLT factorization failed", 0.0, 0);
  }
  const Vector d = ldlt_.vectorD();
  const double dmax = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
  const double dmin = d.size() ? d.cwiseAbs().minCoeff() : 0.0;
  if (d.size() && (!std::isfinite(dmax) || dmin <= 1e-15 * dmax)) {
    throw SolverError(ErrorCode::SingularJacobian,
                      "numerically singular matrix (pivot ratio " + std::to_string(dmin / dmax) + ")", 0.0, 0);
  }
  ready_ = true;
}

Vector SparseDirectSolver::solve(const Vector& b) const { return ldlt_.solve(b); }

Eigen::MatrixXd SparseDirectSolver::solve(const Eigen::MatrixXd& b) const { return ldlt_.solve(b); }

NewtonStats newton_solve(const NonlinearSystem& system, Vector& x, SparseDirectSolver& solver,
                         const NewtonOptions& options, double scale) {
  NewtonStats stats;
  Vector r = system.residual(x);
  double res = r.norm();
  stats.initial_residual = res;
  stats.tolerance = options.atol + options.rtol * std::max(scale, res);

  for (int it = 0;; ++it) {
    stats.iterations = it;
    stats.final_residual = res;
    if (res <= stats.tolerance) return stats;
    if (!std::isfinite(res)) {
      throw SolverError(ErrorCode::NewtonDivergence, "non-finite residual", res, it);
    }
    if (it == options.max_iter) {
      throw SolverError(ErrorCode::NewtonDivergence,
                        "no convergence in " + std::to_string(it) + " iterations, residual " + format_residual(res),
                        res, it);
    }

    try {
      solver.factorize(system.jacobian(x));
    } catch (const SolverError& e) {
      throw SolverError(e.code(), std::string(e.what()) + " at Newton iteration " + std::to_string(it), res, it);
    }
    const Vector dx = -solver.solve(r);
    const double xmax = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    const double dmax = dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0;

    double t = 1.0;
    Vector xt;
    Vector rt;
    double rest = 0.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, t *= 0.5) {
      xt = x + t * dx;
      rt = system.residual(xt);
      rest = rt.norm();
      if (std::isfinite(rest) && rest <= (1.0 - options.armijo * t) * res) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (dmax <= options.step_floor * xmax) {
        // Rounding floor: the full step no longer changes the iterate.
        x += dx;
        stats.iterations = it + 1;
        stats.final_residual = system.residual(x).norm();
        return stats;
      }
      throw SolverError(ErrorCode::NewtonDivergence,
                        "line search failed at Newton iteration " + std::to_string(it) + ", residual " +
                            format_residual(res),
                        res, it);
    }
    x = std::move(xt);
    r = std::move(rt);
    res = rest;
    if (t == 1.0 && dmax <= options.step_floor * xmax) {
      stats.iterations = it + 1;
      stats.final_residual = res;
      return stats;
    }
  }
}

}  // namespace nldd
