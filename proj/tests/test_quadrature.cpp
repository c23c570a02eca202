#include "nldd/quadrature.hpp"

#include "test_support.hpp"

#include <cmath>

using namespace nldd;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Closed form of the integral of xi^a eta^b over the reference triangle.
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

double apply_rule(const QuadratureRule& r, int a, int b) {
  double s = 0.0;
  for (const auto& n : r.nodes) s += n.weight * std::pow(n.xi, a) * std::pow(n.eta, b);
  return s;
}

}  // namespace

TEST(Quadrature, Centroid) {
  const QuadratureRule r = quadrature_rule(1);
  ASSERT_EQ(r.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(r.nodes[0].xi, 1.0 / 3);
  EXPECT_DOUBLE_EQ(r.nodes[0].eta, 1.0 / 3);
  EXPECT_DOUBLE_EQ(r.nodes[0].weight, 0.5);
}

TEST(Quadrature, EdgeMidpoints) {
  const QuadratureRule r = quadrature_rule(2);
  ASSERT_EQ(r.nodes.size(), 3u);
  for (const auto& n : r.nodes) EXPECT_DOUBLE_EQ(n.weight, 1.0 / 6);
}

TEST(Quadrature, ExactForRequestedDegree) {
  for (int degree : {1, 2, 4}) {
    const QuadratureRule r = quadrature_rule(degree);
    EXPECT_EQ(r.degree, degree);
    double total = 0.0;
    for (const auto& n : r.nodes) total += n.weight;
    EXPECT_NEAR(total, 0.5, 1e-15);
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        EXPECT_NEAR(apply_rule(r, a, b), monomial_integral(a, b), 1e-15) << "degree " << degree << " x^" << a
                                                                         << " y^" << b;
      }
    }
  }
}

TEST(Quadrature, DegreeFourHasSixPoints) {
  const QuadratureRule r = quadrature_rule(4);
  EXPECT_EQ(r.nodes.size(), 6u);
  for (const auto& n : r.nodes) {
    EXPECT_GT(n.weight, 0.0);
    EXPECT_GT(n.xi, 0.0);
    EXPECT_GT(n.eta, 0.0);
    EXPECT_LT(n.xi + n.eta, 1.0);
  }
  // Not exact beyond its degree.
  EXPECT_GT(std::abs(apply_rule(r, 5, 0) - monomial_integral(5, 0)) + std::abs(apply_rule(r, 6, 0) - monomial_integral(6, 0)),
            1e-8);
}

TEST(Quadrature, UnsupportedDegree) {
  for (int d : {0, 3, 5, 7}) {
    EXPECT_TRUE(nldd::test::throws_code([d] { (void)quadrature_rule(d); }, ErrorCode::UnsupportedDegree));
  }
}
