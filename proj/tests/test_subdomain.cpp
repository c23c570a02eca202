#include "nldd/oracle.hpp"
#include "nldd/subdomain.hpp"

#include "test_support.hpp"

#include <Eigen/SparseCholesky>

#include <random>

using namespace nldd;
using nldd::test::random_vector;
using nldd::test::throws_code;

namespace {

double zero_source(Point) { return 0.0; }

struct Split {
  TriMesh mesh;
  Decomposition dec;
};

Split vertical(double h) {
  Split s{build_rect_mesh(3, 2, h), {}};
  s.dec = decompose_vertical(s.mesh, 1.5);
  return s;
}

Split lshape(double h) {
  Split s{build_rect_mesh(3, 2, h), {}};
  s.dec = decompose_staircase(s.mesh, {{1, 0}, {1, 1}, {3, 1}});
  return s;
}

double h1_norm(const SubdomainWorkspace& ws, const FieldVector& u) {
  const SparseMatrix g = ws.assembler().stiffness() + ws.assembler().mass();
  return std::sqrt(u.dot(g * u));
}

}  // namespace

TEST(DirichletSolve, ZeroDataZeroSolution) {
  const Split s = vertical(0.25);
  SubdomainWorkspace ws(s.mesh, s.dec, polynomial_problem(1.0, 0.0, 10.0, zero_source), 1);
  const FieldVector u = ws.dirichlet_solve(Trace::zeros(ws.num_interface()));
  EXPECT_EQ(u.norm(), 0.0);
}

TEST(DirichletSolve, TraceIsExact) {
  std::mt19937_64 rng(31);
  const Split s = lshape(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 2);
  const Trace eta(random_vector(ws.num_interface(), rng));
  const FieldVector u = ws.dirichlet_solve(eta);
  EXPECT_TRUE(ws.trace(u) == eta);
  EXPECT_LE(ws.assembler().residual(u).head(ws.num_interior()).norm(), ws.last_stats().tolerance);
}

TEST(DirichletSolve, MonolithicTraceReproducesRestriction) {
  const Split s = vertical(1.0 / 16);
  const SemilinearProblem p = cubic_reaction_problem();
  const MonolithicSolution ref = solve_monolithic(p, s.mesh);
  for (int side = 1; side <= 2; ++side) {
    SubdomainWorkspace ws(s.mesh, s.dec, p, side);
    const FieldVector u = ws.dirichlet_solve(ref.interface_trace(s.dec));
    EXPECT_LT(h1_norm(ws, u - ref.restrict_to(s.dec.side(side))), 1e-8);
  }
}

TEST(DirichletSolve, LinearCaseIsOneSparseSolve) {
  std::mt19937_64 rng(32);
  const Split s = lshape(0.125);
  const SemilinearProblem p = linear_problem(1.0, 1.0);
  SubdomainWorkspace ws(s.mesh, s.dec, p, 1);
  const Trace eta(random_vector(ws.num_interface(), rng));
  const FieldVector u = ws.dirichlet_solve(eta);
  EXPECT_EQ(ws.last_newton_iterations(), 1);

  const Eigen::Index ni = ws.num_interior();
  const SparseMatrix a = ws.assembler().jacobian(FieldVector::Zero(ws.dofs().size()));
  const Vector load = -ws.assembler().residual(FieldVector::Zero(ws.dofs().size())).head(ni);
  const SparseMatrix a_ii = a.topLeftCorner(ni, ni);
  const SparseMatrix a_ig = a.block(0, ni, ni, ws.num_interface());
  Eigen::SimplicialLDLT<SparseMatrix> solver(a_ii);
  const Vector direct = solver.solve(Vector(load - a_ig * eta.values()));
  EXPECT_LT((u.head(ni) - direct).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TangentSolve, ZeroDirection) {
  std::mt19937_64 rng(33);
  const Split s = vertical(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 1);
  const Trace nu(random_vector(ws.num_interface(), rng));
  EXPECT_EQ(ws.dirichlet_tangent_solve(nu, Trace::zeros(ws.num_interface())).norm(), 0.0);
}

TEST(TangentSolve, LinearProblemIsDifference) {
  std::mt19937_64 rng(34);
  const Split s = lshape(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, linear_problem(2.0, 3.0), 2);
  const Trace nu(random_vector(ws.num_interface(), rng));
  const Trace eta(random_vector(ws.num_interface(), rng));
  const FieldVector expected = ws.dirichlet_solve(eta) - ws.dirichlet_solve(Trace::zeros(ws.num_interface()));
  EXPECT_LT((ws.dirichlet_tangent_solve(nu, eta) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TangentSolve, SecondOrderRemainder) {
  std::mt19937_64 rng(35);
  const Split s = vertical(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 1);
  const Vector nu = random_vector(ws.num_interface(), rng, 0.5);
  const Vector dir = random_vector(ws.num_interface(), rng, 0.5);
  const std::array<double, 3> deltas{1e-2, 1e-3, 1e-4};
  const FdResult fd = fd_check([&](const Vector& x) { return Vector(ws.dirichlet_solve(Trace(x))); },
                               [&](const Vector& x, const Vector& d) {
                                 return Vector(ws.dirichlet_tangent_solve(Trace(x), Trace(d)));
                               },
                               nu, dir, deltas);
  EXPECT_GE(fd.slope, 1.9);
}

TEST(SteklovPoincare, MonolithicTraceSolvesInterfaceEquation) {
  for (const Split& s : {vertical(1.0 / 16), lshape(1.0 / 16)}) {
    const SemilinearProblem p = cubic_reaction_problem();
    const MonolithicSolution ref = solve_monolithic(p, s.mesh);
    SubdomainWorkspace ws1(s.mesh, s.dec, p, 1);
    SubdomainWorkspace ws2(s.mesh, s.dec, p, 2);
    const Trace eta = ref.interface_trace(s.dec);
    const Flux r = ws1.apply_steklov_poincare(eta) + ws2.apply_steklov_poincare(eta);
    EXPECT_LT(r.norm(), 1e-12);
  }
}

TEST(SteklovPoincare, MirrorSymmetricLaplace) {
  // With beta = 0 and f = 0 only the stiffness acts, and on this mesh it is
  // the five-point stencil, which is mirror symmetric about x = 1.5.
  std::mt19937_64 rng(36);
  const Split s = vertical(0.125);
  const SemilinearProblem p = linear_problem(1.0, 0.0, zero_source);
  SubdomainWorkspace ws1(s.mesh, s.dec, p, 1);
  SubdomainWorkspace ws2(s.mesh, s.dec, p, 2);
  const Trace eta(random_vector(ws1.num_interface(), rng));
  EXPECT_LT((ws1.apply_steklov_poincare(eta) - ws2.apply_steklov_poincare(eta)).norm(), 1e-12);
}

TEST(SteklovPoincare, EqualsInterfaceResidualOfDirichletSolve) {
  std::mt19937_64 rng(37);
  const Split s = lshape(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 1);
  const Trace eta(random_vector(ws.num_interface(), rng));
  const Flux sp = ws.apply_steklov_poincare(eta);
  const FieldVector u = ws.dirichlet_solve(eta);
  const Vector full = ws.assembler().residual(u);
  EXPECT_TRUE(sp.values() == full.tail(ws.num_interface()));
}

TEST(SteklovPoincare, DerivativeSymmetric) {
  std::mt19937_64 rng(38);
  const Split s = lshape(0.125);
  for (const SemilinearProblem& p : {cubic_reaction_problem(), plaplace_problem()}) {
    SubdomainWorkspace ws(s.mesh, s.dec, p, 2);
    for (int trial = 0; trial < 5; ++trial) {
      const Trace nu(random_vector(ws.num_interface(), rng, 0.3));
      const Trace eta(random_vector(ws.num_interface(), rng));
      const Trace mu(random_vector(ws.num_interface(), rng));
      const double a = pairing(ws.apply_sp_derivative(nu, eta), mu);
      const double b = pairing(ws.apply_sp_derivative(nu, mu), eta);
      EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST(SteklovPoincare, DerivativeMatrixMatchesAction) {
  std::mt19937_64 rng(39);
  const Split s = vertical(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 1);
  const Trace nu(random_vector(ws.num_interface(), rng, 0.3));
  const Trace eta(random_vector(ws.num_interface(), rng));
  const Eigen::MatrixXd sd = ws.sp_derivative_matrix(nu);
  EXPECT_LT((sd * eta.values() - ws.apply_sp_derivative(nu, eta).values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SteklovPoincare, LinearDerivativeIndependentOfPoint) {
  std::mt19937_64 rng(40);
  const Split s = vertical(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, linear_problem(1.0, 2.0), 2);
  const Eigen::MatrixXd a = ws.sp_derivative_matrix(Trace(random_vector(ws.num_interface(), rng)));
  const Eigen::MatrixXd b = ws.sp_derivative_matrix(Trace(random_vector(ws.num_interface(), rng)));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
}

TEST(SteklovPoincare, SecondOrderRemainder) {
  std::mt19937_64 rng(41);
  const Split s = vertical(1.0 / 16);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 2);
  const Vector nu = random_vector(ws.num_interface(), rng, 0.5);
  const Vector dir = random_vector(ws.num_interface(), rng, 0.5);
  const std::array<double, 3> deltas{1e-2, 1e-3, 1e-4};
  const FdResult fd = fd_check([&](const Vector& x) { return ws.apply_steklov_poincare(Trace(x)).values(); },
                               [&](const Vector& x, const Vector& d) {
                                 return ws.apply_sp_derivative(Trace(x), Trace(d)).values();
                               },
                               nu, dir, deltas);
  EXPECT_GE(fd.slope, 1.9);
}

TEST(SteklovPoincare, Monotone) {
  std::mt19937_64 rng(42);
  const Split s = lshape(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 1);
  for (int k = 0; k < 30; ++k) {
    const Trace eta(random_vector(ws.num_interface(), rng));
    const Trace lambda(random_vector(ws.num_interface(), rng));
    EXPECT_GE(pairing(ws.apply_steklov_poincare(eta) - ws.apply_steklov_poincare(lambda), eta - lambda), 0.0);
  }
}

TEST(NeumannSolve, InvertsSteklovPoincare) {
  std::mt19937_64 rng(43);
  const Split s = lshape(0.125);
  for (const SemilinearProblem& p : {cubic_reaction_problem(), plaplace_problem()}) {
    for (int side = 1; side <= 2; ++side) {
      SubdomainWorkspace ws(s.mesh, s.dec, p, side);
      const Trace eta(random_vector(ws.num_interface(), rng, 0.2));
      const FieldVector u = ws.neumann_solve(ws.apply_steklov_poincare(eta));
      EXPECT_LT((ws.trace(u) - eta).values().cwiseAbs().maxCoeff(), 1e-8) << p.name << " side " << side;
    }
  }
}

TEST(NeumannSolve, ZeroDataZeroSolution) {
  const Split s = vertical(0.25);
  SubdomainWorkspace ws(s.mesh, s.dec, polynomial_problem(1.0, 1.0, 10.0, zero_source), 2);
  EXPECT_EQ(ws.neumann_solve(Flux::zeros(ws.num_interface())).norm(), 0.0);
}

TEST(NeumannSolve, ResidualBlocks) {
  std::mt19937_64 rng(44);
  const Split s = lshape(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 2);
  const Flux psi(random_vector(ws.num_interface(), rng, 0.05));
  const FieldVector u = ws.neumann_solve(psi);
  const Vector r = ws.assembler().residual(u);
  EXPECT_LT(r.head(ws.num_interior()).norm(), 1e-12);
  EXPECT_LT((r.tail(ws.num_interface()) - psi.values()).norm(), 1e-12);
}

TEST(NeumannSolve, LinearMatchesDirectSolve) {
  std::mt19937_64 rng(45);
  const Split s = vertical(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, linear_problem(1.0, 1.0), 1);
  const Flux psi(random_vector(ws.num_interface(), rng));
  const FieldVector u = ws.neumann_solve(psi);
  const Eigen::Index n = ws.dofs().size();
  const SparseMatrix a = ws.assembler().jacobian(FieldVector::Zero(n));
  Vector rhs = -ws.assembler().residual(FieldVector::Zero(n));
  rhs.tail(ws.num_interface()) += psi.values();
  Eigen::SimplicialLDLT<SparseMatrix> solver(a);
  EXPECT_LT((u - solver.solve(rhs)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RobinSolve, SatisfiesRobinCondition) {
  std::mt19937_64 rng(46);
  const Split s = lshape(0.125);
  const Eigen::MatrixXd m = interface_mass_matrix(s.mesh, s.dec);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 1);
  const Flux g(random_vector(ws.num_interface(), rng, 0.1));
  const double sr = 46.0;
  const FieldVector u = ws.robin_solve(g, sr, m);
  const Vector r = ws.assembler().residual(u);
  EXPECT_LT(r.head(ws.num_interior()).norm(), 1e-11);
  EXPECT_LT((r.tail(ws.num_interface()) + sr * m * ws.trace(u).values() - g.values()).norm(), 1e-11);
}

TEST(InterfaceMass, IntegratesHatFunctions) {
  for (double h : {0.5, 0.125}) {
    const Split v = vertical(h);
    const Eigen::MatrixXd mv = interface_mass_matrix(v.mesh, v.dec);
    // Sum of entries is int (sum phi)^2: 1 on the interior segments, t^2 on
    // the two end segments.
    EXPECT_NEAR(mv.sum(), 2.0 - 4.0 * h / 3.0, 1e-13);
    EXPECT_LT((mv - mv.transpose()).norm(), 1e-15);
    const Split l = lshape(h);
    EXPECT_NEAR(interface_mass_matrix(l.mesh, l.dec).sum(), 3.0 - 4.0 * h / 3.0, 1e-13);
  }
}

TEST(Workspace, Validation) {
  const Split s = vertical(0.25);
  EXPECT_TRUE(throws_code([&] { SubdomainWorkspace ws(s.mesh, s.dec, linear_problem(), 3); },
                          ErrorCode::InvalidArgument));
  SubdomainWorkspace ws(s.mesh, s.dec, linear_problem(), 1);
  EXPECT_TRUE(throws_code([&] { (void)ws.dirichlet_solve(Trace::zeros(ws.num_interface() + 1)); },
                          ErrorCode::InvalidArgument));
  EXPECT_TRUE(throws_code([&] { (void)ws.neumann_solve(Flux::zeros(1)); }, ErrorCode::InvalidArgument));
}

TEST(Workspace, ResetGivesIdenticalResults) {
  std::mt19937_64 rng(47);
  const Split s = lshape(0.125);
  SubdomainWorkspace ws(s.mesh, s.dec, cubic_reaction_problem(), 2);
  const Trace eta(random_vector(ws.num_interface(), rng));
  const FieldVector a = ws.dirichlet_solve(eta);
  (void)ws.dirichlet_solve(Trace(random_vector(ws.num_interface(), rng)));
  ws.reset();
  const FieldVector b = ws.dirichlet_solve(eta);
  EXPECT_TRUE((a.array() == b.array()).all());
}
