#include "nldd/assembly.hpp"

#include "nldd/errors.hpp"

#include <cmath>
#include <string>

namespace nldd {

Assembler::Assembler(const TriMesh& mesh, const DofMap& dofs, SemilinearProblem problem, int quad_degree)
    : dofs_(dofs), problem_(std::move(problem)), rule_(quadrature_rule(quad_degree)) {
  if (!problem_.alpha || !problem_.beta || !problem_.beta_y || !problem_.source) {
    throw Error(ErrorCode::InvalidArgument, "problem has unset coefficient callbacks");
  }
  for (const auto& q : rule_.nodes) shape_.push_back({1.0 - q.xi - q.eta, q.xi, q.eta});

  const auto& nodes = mesh.nodes();
  elements_.reserve(dofs_.triangles.size());
  for (std::size_t t : dofs_.triangles) {
    const Triangle& tri = mesh.triangles()[t];
    const Point& p0 = nodes[tri[0]];
    const Point& p1 = nodes[tri[1]];
    const Point& p2 = nodes[tri[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    if (!(det > 0.0)) throw Error(ErrorCode::InvalidArgument, "triangle " + std::to_string(t) + " is not positively oriented");

    Element e;
    for (int a = 0; a < 3; ++a) e.dof[a] = dofs_.global_to_local[static_cast<std::size_t>(tri[a])];
    // Gradients of barycentric coordinates.
    e.grad[0] = Eigen::Vector2d(p1.y - p2.y, p2.x - p1.x) / det;
    e.grad[1] = Eigen::Vector2d(p2.y - p0.y, p0.x - p2.x) / det;
    e.grad[2] = Eigen::Vector2d(p0.y - p1.y, p1.x - p0.x) / det;
    e.area = 0.5 * det;
    e.alpha_integral = 0.0;
    for (const auto& q : rule_.nodes) {
      const Point x{p0.x + q.xi * (p1.x - p0.x) + q.eta * (p2.x - p0.x),
                    p0.y + q.xi * (p1.y - p0.y) + q.eta * (p2.y - p0.y)};
      const double w = q.weight * det;
      const double a = problem_.alpha(x);
      if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha is not positive at a quadrature point");
      e.points.push_back(x);
      e.weights.push_back(w);
      e.source.push_back(problem_.source(x));
      e.alpha_integral += w * a;
    }
    elements_.push_back(std::move(e));
  }
}

double Assembler::flux_coefficient(const Element& e, const Eigen::Vector2d& grad_u) const {
  if (problem_.kind == ProblemKind::PLaplace) {
    const double eps = problem_.regularization;
    return e.alpha_integral * std::sqrt(grad_u.squaredNorm() + eps * eps);
  }
  return e.alpha_integral;
}

Vector Assembler::residual(const FieldVector& u, bool with_source) const {
  if (u.size() != size()) throw Error(ErrorCode::InvalidArgument, "residual: vector size does not match dof map");
  Vector r = Vector::Zero(size());
  for (const Element& e : elements_) {
    std::array<double, 3> ul{};
    for (int a = 0; a < 3; ++a) ul[a] = e.dof[a] >= 0 ? u[e.dof[a]] : 0.0;
    const Eigen::Vector2d grad_u = ul[0] * e.grad[0] + ul[1] * e.grad[1] + ul[2] * e.grad[2];
    const double coef = flux_coefficient(e, grad_u);

    std::array<double, 3> re{};
    for (int a = 0; a < 3; ++a) re[a] = coef * grad_u.dot(e.grad[a]);
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      const auto& phi = shape_[q];
      const double uq = ul[0] * phi[0] + ul[1] * phi[1] + ul[2] * phi[2];
      double val = problem_.beta(e.points[q], uq);
      if (with_source) val -= e.source[q];
      val *= e.weights[q];
      for (int a = 0; a < 3; ++a) re[a] += val * phi[a];
    }
    for (int a = 0; a < 3; ++a) {
      if (e.dof[a] >= 0) r[e.dof[a]] += re[a];
    }
  }
  return r;
}

SparseMatrix Assembler::jacobian(const FieldVector& w) const {
  if (w.size() != size()) throw Error(ErrorCode::InvalidArgument, "jacobian: vector size does not match dof map");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(elements_.size() * 9);
  const bool plaplace = problem_.kind == ProblemKind::PLaplace;
  const double eps = problem_.regularization;
  for (const Element& e : elements_) {
    std::array<double, 3> wl{};
    for (int a = 0; a < 3; ++a) wl[a] = e.dof[a] >= 0 ? w[e.dof[a]] : 0.0;
    const Eigen::Vector2d grad_w = wl[0] * e.grad[0] + wl[1] * e.grad[1] + wl[2] * e.grad[2];
    const double coef = flux_coefficient(e, grad_w);

    Eigen::Matrix3d ke;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) ke(a, b) = coef * e.grad[a].dot(e.grad[b]);
    }
    if (plaplace) {
      const double scale = e.alpha_integral / std::sqrt(grad_w.squaredNorm() + eps * eps);
      Eigen::Vector3d proj;
      for (int a = 0; a < 3; ++a) proj[a] = grad_w.dot(e.grad[a]);
      ke += scale * proj * proj.transpose();
    }
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      const auto& phi = shape_[q];
      const double wq = wl[0] * phi[0] + wl[1] * phi[1] + wl[2] * phi[2];
      const double by = problem_.beta_y(e.points[q], wq) * e.weights[q];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) ke(a, b) += by * phi[a] * phi[b];
      }
    }
    for (int a = 0; a < 3; ++a) {
      if (e.dof[a] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        if (e.dof[b] >= 0) triplets.emplace_back(e.dof[a], e.dof[b], ke(a, b));
      }
    }
  }
  SparseMatrix j(size(), size());
  j.setFromTriplets(triplets.begin(), triplets.end());
  return j;
}

SparseMatrix Assembler::stiffness() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const Element& e : elements_) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (e.dof[a] >= 0 && e.dof[b] >= 0) {
          triplets.emplace_back(e.dof[a], e.dof[b], e.area * e.grad[a].dot(e.grad[b]));
        }
      }
    }
  }
  SparseMatrix k(size(), size());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

SparseMatrix Assembler::mass() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const Element& e : elements_) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (e.dof[a] >= 0 && e.dof[b] >= 0) {
          triplets.emplace_back(e.dof[a], e.dof[b], e.area * (a == b ? 1.0 / 6.0 : 1.0 / 12.0));
        }
      }
    }
  }
  SparseMatrix m(size(), size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Vector assemble_residual(const TriMesh& mesh, const DofMap& dofs, const SemilinearProblem& problem,
                         const FieldVector& u) {
  return Assembler(mesh, dofs, problem).residual(u);
}

SparseMatrix assemble_jacobian(const TriMesh& mesh, const DofMap& dofs, const SemilinearProblem& problem,
                               const FieldVector& w) {
  return Assembler(mesh, dofs, problem).jacobian(w);
}

}  // namespace nldd
