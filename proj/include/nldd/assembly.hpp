#pragma once

#include "nldd/mesh.hpp"
#include "nldd/problem.hpp"
#include "nldd/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <vector>

namespace nldd {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
/// Nodal coefficients in a DofMap's numbering (interior block, then interface block).
using FieldVector = Eigen::VectorXd;

/// P1 assembly of the operator and its derivative over one DofMap. Geometry,
/// alpha and f at quadrature points are cached at construction.
///
/// residual(u)_k = int alpha grad u . grad phi_k + beta(x, u) phi_k - f phi_k
/// jacobian(w)_jk = int alpha grad phi_j . grad phi_k + beta_y(x, w) phi_j phi_k
/// (plus the rank-one flux term for the p-Laplace variant).
class Assembler {
 public:
  Assembler(const TriMesh& mesh, const DofMap& dofs, SemilinearProblem problem, int quad_degree = 4);

  [[nodiscard]] Vector residual(const FieldVector& u, bool with_source = true) const;
  [[nodiscard]] SparseMatrix jacobian(const FieldVector& w) const;

  /// int grad phi_j . grad phi_k (alpha ignored).
  [[nodiscard]] SparseMatrix stiffness() const;
  /// int phi_j phi_k, exact.
  [[nodiscard]] SparseMatrix mass() const;

  [[nodiscard]] const DofMap& dofs() const noexcept { return dofs_; }
  [[nodiscard]] const SemilinearProblem& problem() const noexcept { return problem_; }
  [[nodiscard]] int size() const noexcept { return dofs_.size(); }

 private:
  struct Element {
    std::array<int, 3> dof;
    std::array<Eigen::Vector2d, 3> grad;
    double area;
    double alpha_integral;      // sum_q w_q alpha(x_q)
    std::vector<Point> points;  // quadrature points
    std::vector<double> weights;  // reference weight times 2 * area
    std::vector<double> source;
  };

  [[nodiscard]] double flux_coefficient(const Element& e, const Eigen::Vector2d& grad_u) const;

  DofMap dofs_;
  SemilinearProblem problem_;
  QuadratureRule rule_;
  std::vector<std::array<double, 3>> shape_;  // shape values per quadrature node
  std::vector<Element> elements_;
};

[[nodiscard]] Vector assemble_residual(const TriMesh& mesh, const DofMap& dofs, const SemilinearProblem& problem,
                                       const FieldVector& u);
[[nodiscard]] SparseMatrix assemble_jacobian(const TriMesh& mesh, const DofMap& dofs,
                                             const SemilinearProblem& problem, const FieldVector& w);

}  // namespace nldd
