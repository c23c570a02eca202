#include "nldd/assembly.hpp"

#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace nldd;
using nldd::test::random_vector;
using nldd::test::throws_code;

namespace {

double zero_source(Point) { return 0.0; }
double unit_source(Point) { return 1.0; }

// Dof map over the given triangles that keeps every node, boundary included,
// in the given order.
DofMap full_map(const TriMesh& mesh, std::vector<std::size_t> triangles, std::vector<NodeId> order) {
  DofMap d;
  d.triangles = std::move(triangles);
  d.local_to_global = std::move(order);
  d.global_to_local.assign(mesh.num_nodes(), -1);
  for (std::size_t k = 0; k < d.local_to_global.size(); ++k) {
    d.global_to_local[static_cast<std::size_t>(d.local_to_global[k])] = static_cast<int>(k);
  }
  d.num_interior = static_cast<int>(d.local_to_global.size());
  return d;
}

DofMap all_nodes(const TriMesh& mesh) {
  std::vector<std::size_t> tris(mesh.num_triangles());
  for (std::size_t t = 0; t < tris.size(); ++t) tris[t] = t;
  std::vector<NodeId> nodes(mesh.num_nodes());
  for (std::size_t n = 0; n < nodes.size(); ++n) nodes[n] = static_cast<NodeId>(n);
  return full_map(mesh, tris, nodes);
}

Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }

}  // namespace

TEST(Assembly, ZeroProblemZeroResidual) {
  const TriMesh mesh = build_rect_mesh(3, 2, 0.5);
  const DofMap dofs = global_dof_map(mesh);
  const Vector r = assemble_residual(mesh, dofs, linear_problem(1.0, 0.0, zero_source), Vector::Zero(dofs.size()));
  EXPECT_EQ(r.norm(), 0.0);
}

TEST(Assembly, ElementStiffness) {
  // Triangle 0 of a single cell is (0,0), (h,0), (h,h) with the right angle
  // at (h,0); list that vertex first.
  for (double h : {1.0, 0.25}) {
    const TriMesh mesh = build_rect_mesh(h, h, h);
    const DofMap dofs = full_map(mesh, {0}, {1, 0, 3});
    const Eigen::MatrixXd k = dense(assemble_jacobian(mesh, dofs, linear_problem(1.0, 0.0), Vector::Zero(3)));
    Eigen::Matrix3d expected;
    expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    EXPECT_LT((k - expected).cwiseAbs().maxCoeff(), 1e-14) << "h = " << h;
  }
}

TEST(Assembly, ConstantLoad) {
  const TriMesh mesh = build_rect_mesh(1, 1, 1);
  const DofMap dofs = full_map(mesh, {0}, {0, 1, 3});
  const Vector r = assemble_residual(mesh, dofs, linear_problem(1.0, 0.0, unit_source), Vector::Zero(3));
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(r[k], -1.0 / 6, 1e-15);
}

TEST(Assembly, CubicReactionOnConstant) {
  const TriMesh mesh = build_rect_mesh(2, 2, 0.5);
  const DofMap dofs = all_nodes(mesh);
  const double c = 0.7;
  const SemilinearProblem p = polynomial_problem(1.0, 0.0, 10.0, zero_source);
  const Vector r = assemble_residual(mesh, dofs, p, Vector::Constant(dofs.size(), c));
  const Assembler a(mesh, dofs, p);
  const Vector integrals = a.mass() * Vector::Ones(dofs.size());
  EXPECT_LT((r - 10 * c * c * c * integrals).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, JacobianOnConstantIsScaledMass) {
  const TriMesh mesh = build_rect_mesh(2, 2, 0.5);
  const DofMap dofs = all_nodes(mesh);
  const double c = -0.4;
  const Assembler a(mesh, dofs, cubic_reaction_problem());
  const Eigen::MatrixXd j = dense(a.jacobian(Vector::Constant(dofs.size(), c)));
  const Eigen::MatrixXd expected = dense(a.stiffness()) + 30 * c * c * dense(a.mass());
  EXPECT_LT((j - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, MassAndStiffnessBasics) {
  const TriMesh mesh = build_rect_mesh(3, 2, 0.25);
  const DofMap dofs = all_nodes(mesh);
  const Assembler a(mesh, dofs, linear_problem());
  const Vector ones = Vector::Ones(dofs.size());
  EXPECT_NEAR(ones.dot(a.mass() * ones), 6.0, 1e-13);
  EXPECT_LT((a.stiffness() * ones).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Assembly, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  const TriMesh mesh = build_rect_mesh(3, 2, 0.25);
  const DofMap dofs = global_dof_map(mesh);
  for (const SemilinearProblem& p : {cubic_reaction_problem(), plaplace_problem()}) {
    const Assembler a(mesh, dofs, p);
    const Vector w = random_vector(dofs.size(), rng);
    const Vector v = random_vector(dofs.size(), rng);
    const Vector jv = a.jacobian(w) * v;
    std::array<double, 2> err{};
    const std::array<double, 2> deltas{1e-4, 1e-5};
    for (std::size_t k = 0; k < 2; ++k) {
      err[k] = ((a.residual(w + deltas[k] * v) - a.residual(w)) / deltas[k] - jv).norm();
    }
    EXPECT_LT(err[0], 1e-2 * jv.norm()) << p.name;
    // First-order remainder: one decade in delta buys about one decade.
    EXPECT_LT(err[1], 0.2 * err[0]) << p.name;
  }
}

TEST(Assembly, JacobianSymmetricAndCoercive) {
  std::mt19937_64 rng(22);
  const TriMesh mesh = build_rect_mesh(3, 2, 0.25);
  const DofMap dofs = global_dof_map(mesh);
  for (const SemilinearProblem& p : {cubic_reaction_problem(), plaplace_problem()}) {
    const Assembler a(mesh, dofs, p);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::MatrixXd j = dense(a.jacobian(random_vector(dofs.size(), rng, 2.0)));
      EXPECT_LE((j - j.transpose()).norm(), 1e-12 * j.norm());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
      EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    }
  }
}

TEST(Assembly, AdditiveOverSubdomains) {
  std::mt19937_64 rng(23);
  const TriMesh mesh = build_rect_mesh(3, 2, 0.25);
  const DofMap global = global_dof_map(mesh);
  const Decomposition dec = decompose_staircase(mesh, {{1, 0}, {1, 1}, {3, 1}});
  const SemilinearProblem p = cubic_reaction_problem();
  const Vector u = random_vector(global.size(), rng);
  const Vector r = assemble_residual(mesh, global, p, u);

  Vector sum = Vector::Zero(global.size());
  for (int s = 1; s <= 2; ++s) {
    const DofMap& local = dec.side(s);
    Vector ul(local.size());
    for (int k = 0; k < local.size(); ++k) {
      ul[k] = u[global.global_to_local[static_cast<std::size_t>(local.local_to_global[static_cast<std::size_t>(k)])]];
    }
    const Vector rl = assemble_residual(mesh, local, p, ul);
    for (int k = 0; k < local.size(); ++k) {
      sum[global.global_to_local[static_cast<std::size_t>(local.local_to_global[static_cast<std::size_t>(k)])]] += rl[k];
    }
  }
  EXPECT_LT((sum - r).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, Deterministic) {
  std::mt19937_64 rng(24);
  const TriMesh mesh = build_rect_mesh(3, 2, 0.25);
  const DofMap dofs = global_dof_map(mesh);
  const Vector w = random_vector(dofs.size(), rng);
  const SparseMatrix a = assemble_jacobian(mesh, dofs, plaplace_problem(), w);
  const SparseMatrix b = assemble_jacobian(mesh, dofs, plaplace_problem(), w);
  EXPECT_TRUE((dense(a).array() == dense(b).array()).all());
  const Vector ra = assemble_residual(mesh, dofs, plaplace_problem(), w);
  const Vector rb = assemble_residual(mesh, dofs, plaplace_problem(), w);
  EXPECT_TRUE((ra.array() == rb.array()).all());
}

TEST(Assembly, RejectsNonPositiveAlpha) {
  const TriMesh mesh = build_rect_mesh(1, 1, 0.5);
  SemilinearProblem p = linear_problem();
  p.alpha = [](Point x) { return x.x - 0.5; };
  EXPECT_TRUE(throws_code([&] { Assembler a(mesh, global_dof_map(mesh), p); }, ErrorCode::InvalidArgument));
  EXPECT_TRUE(throws_code([&] { (void)probe_coefficients(p, mesh); }, ErrorCode::InvalidArgument));
}

TEST(Assembly, ProbeRecordsCoefficientRange) {
  const TriMesh mesh = build_rect_mesh(3, 2, 0.5);
  const CoefficientProbe probe = probe_coefficients(cubic_reaction_problem(), mesh);
  EXPECT_DOUBLE_EQ(probe.alpha_min, 1.0);
  EXPECT_DOUBLE_EQ(probe.alpha_max, 1.0);
  EXPECT_DOUBLE_EQ(probe.beta_y_min, 0.0);
}
