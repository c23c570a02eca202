#include "nldd/splitting.hpp"

#include "nldd/errors.hpp"

#include <cmath>
#include <string>

namespace nldd {

DenseMatrix MonotoneOperator::jacobian(const Vector&) const {
  throw Error(ErrorCode::InvalidArgument, "operator has no jacobian capability");
}

AffineOperator::AffineOperator(DenseMatrix a, std::optional<Vector> b) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw Error(ErrorCode::InvalidArgument, "AffineOperator: matrix not square");
  b_ = b ? std::move(*b) : Vector::Zero(a_.rows());
  if (b_.size() != a_.rows()) throw Error(ErrorCode::InvalidArgument, "AffineOperator: offset size mismatch");
}

Vector AffineOperator::apply(const Vector& x) const { return a_ * x + b_; }

DenseMatrix AffineOperator::jacobian(const Vector&) const { return a_; }

CubicOperator::CubicOperator(DenseMatrix a, double cubic) : a_(std::move(a)), cubic_(cubic) {
  if (a_.rows() != a_.cols()) throw Error(ErrorCode::InvalidArgument, "CubicOperator: matrix not square");
}

Vector CubicOperator::apply(const Vector& x) const {
  return a_ * x + cubic_ * x.array().cube().matrix();
}

DenseMatrix CubicOperator::jacobian(const Vector& x) const {
  DenseMatrix j = a_;
  j.diagonal() += (3.0 * cubic_ * x.array().square()).matrix();
  return j;
}

DualNorm::DualNorm(const DenseMatrix& gram) : gram_(gram) {
  if (gram.rows() != gram.cols()) throw Error(ErrorCode::InvalidArgument, "inner product matrix not square");
  if (!gram.isApprox(gram.transpose(), 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "inner product matrix not symmetric");
  }
  // Basis probe: every diagonal entry <e_k, e_k> must be positive.
  if ((gram.diagonal().array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "inner product not positive on basis vectors");
  }
  auto llt = std::make_shared<Eigen::LLT<DenseMatrix>>(gram);
  if (llt->info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "inner product matrix not positive definite");
  }
  llt_ = std::move(llt);
}

double DualNorm::operator()(const Vector& r) const {
  if (!llt_) return r.norm();
  return std::sqrt(std::max(0.0, r.dot(llt_->solve(r))));
}

double DualNorm::primal(const Vector& x) const {
  if (!llt_) return x.norm();
  return std::sqrt(std::max(0.0, x.dot(gram_ * x)));
}

InversionResult invert_operator(const MonotoneOperator& g, const Vector& psi, const Vector& x0,
                                double tol, int max_iter, const DualNorm& norm) {
  if (!g.has_jacobian()) throw Error(ErrorCode::InvalidArgument, "invert_operator needs a jacobian");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "invert_operator: tol must be positive");
  if (psi.size() != g.dim() || x0.size() != g.dim()) {
    throw Error(ErrorCode::InvalidArgument, "invert_operator: dimension mismatch");
  }

  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-10;

  Vector x = x0;
  Vector r = psi - g.apply(x);
  double res = norm(r);
  for (int it = 0; it < max_iter; ++it) {
    if (res <= tol) return {std::move(x), it, res};

    const DenseMatrix j = g.jacobian(x);
    Eigen::PartialPivLU<DenseMatrix> lu(j);
    const double rcond = lu.rcond();
    if (!std::isfinite(rcond) || rcond < 1e-14) {
      throw SolverError(ErrorCode::SingularJacobian,
                        "jacobian reciprocal condition " + std::to_string(rcond), res, it);
    }
    const Vector dx = lu.solve(r);

    double t = 1.0;
    Vector xt;
    Vector rt;
    double rest = 0.0;
    for (;;) {
      xt = x + t * dx;
      rt = psi - g.apply(xt);
      rest = norm(rt);
      if (std::isfinite(rest) && rest <= (1.0 - kArmijo * t) * res) break;
      t *= 0.5;
      if (t < kMinStep) {
        throw SolverError(ErrorCode::NonConvergence,
                          "line search stalled at residual " + format_residual(res), res, it);
      }
    }
    x = std::move(xt);
    r = std::move(rt);
    res = rest;
  }
  if (res <= tol) return {std::move(x), max_iter, res};
  throw SolverError(ErrorCode::NonConvergence,
                    "max iterations reached, residual " + format_residual(res), res, max_iter);
}

SplittingProblem::SplittingProblem(std::shared_ptr<const MonotoneOperator> op1,
                                   std::shared_ptr<const MonotoneOperator> op2, Vector rhs,
                                   std::optional<DenseMatrix> inner_product)
    : g1(std::move(op1)), g2(std::move(op2)), chi(std::move(rhs)) {
  if (!g1 || !g2) throw Error(ErrorCode::InvalidArgument, "SplittingProblem: null operator");
  if (g1->dim() != chi.size() || g2->dim() != chi.size()) {
    throw Error(ErrorCode::InvalidArgument, "SplittingProblem: dimension mismatch");
  }
  if (inner_product) {
    if (inner_product->rows() != chi.size()) {
      throw Error(ErrorCode::InvalidArgument, "SplittingProblem: inner product size mismatch");
    }
    norm = DualNorm(*inner_product);
  }
}

void IterationConfig::validate(Eigen::Index dim) const {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "relaxation parameter s must be > 0");
  if (!(outer_tol > 0.0) || !(newton_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be > 0");
  }
  if (max_outer < 1 || newton_max < 1) throw Error(ErrorCode::InvalidArgument, "iteration limits must be >= 1");
  if (eta0.size() != dim) throw Error(ErrorCode::InvalidArgument, "eta0 has wrong dimension");
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::Diverged: return "diverged";
    case Termination::Stagnated: return "stagnated";
  }
  return "unknown";
}

IterationTrace splitting_iterate(const SplittingProblem& problem, const IterationConfig& config,
                                 const std::optional<Vector>& reference) {
  config.validate(problem.dim());
  if (reference && reference->size() != problem.dim()) {
    throw Error(ErrorCode::InvalidArgument, "reference has wrong dimension");
  }

  IterationTrace trace;
  Vector eta = config.eta0;
  Vector inner = config.eta0;

  Vector g1_eta = problem.g1->apply(eta);
  auto residual_of = [&](const Vector& g1v, const Vector& x) {
    return problem.norm(g1v + problem.g2->apply(x) - problem.chi);
  };
  auto record = [&](int n, double res, int inner_its) {
    IterationRecord rec;
    rec.n = n;
    rec.iterate_norm = problem.norm.primal(eta);
    rec.residual = res;
    if (reference) rec.error = problem.norm.primal(eta - *reference);
    rec.inner_iterations = inner_its;
    trace.records.push_back(rec);
    if (config.keep_iterates) trace.iterates.push_back(eta);
  };

  const double res0 = residual_of(g1_eta, eta);
  record(0, res0, 0);
  if (res0 <= config.outer_tol) {
    trace.termination = Termination::Converged;
    trace.final_iterate = eta;
    return trace;
  }

  trace.termination = Termination::MaxIterations;
  for (int n = 0; n < config.max_outer; ++n) {
    InversionResult inv;
    try {
      inv = invert_operator(*problem.g2, problem.chi - g1_eta, inner, config.newton_tol,
                            config.newton_max, problem.norm);
    } catch (const SolverError& e) {
      throw SolverError(e.code(), "outer step " + std::to_string(n) + ": " + e.what(), e.residual(),
                        e.iterations());
    }
    inner = inv.x;
    eta = (1.0 - config.s) * eta + config.s * inv.x;
    g1_eta = problem.g1->apply(eta);
    const double res = residual_of(g1_eta, eta);
    record(n + 1, res, inv.iterations);

    if (res <= config.outer_tol) {
      trace.termination = Termination::Converged;
      break;
    }
    if (!std::isfinite(res) || res > config.divergence_factor * res0) {
      trace.termination = Termination::Diverged;
      break;
    }
  }
  trace.final_iterate = std::move(eta);
  return trace;
}

double fitted_rate(const std::vector<double>& errors) {
  const auto m = static_cast<double>(errors.size());
  if (errors.size() < 2) return std::nan("");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double x = static_cast<double>(i);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return std::exp(slope);
}

}  // namespace nldd
