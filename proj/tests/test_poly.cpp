#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stochper/model.hpp"
#include "stochper/poly.hpp"

using namespace stochper;

namespace {

MultiPoly P(const char* text) { return MultiPoly::parse(text); }

Vecd random_point(std::mt19937_64& rng, int n, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vecd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST(MultiPoly, ParseEvaluateAndRoundTrip) {
  const MultiPoly p = P("((4,0), 1.0) ((0,2), -0.5), ((1,1), 3)");
  EXPECT_EQ(p.dim(), 2);
  EXPECT_EQ(p.degree(), 4);
  const Vecd x(Eigen::Vector2d(2.0, -1.0));
  EXPECT_DOUBLE_EQ(p(x), 16.0 - 0.5 - 6.0);
  const MultiPoly q = MultiPoly::parse(p.to_string());
  EXPECT_EQ(q.terms().size(), p.terms().size());
  EXPECT_DOUBLE_EQ(q(x), p(x));
  EXPECT_DOUBLE_EQ(P("[((2), 1.0)]")(Vecd(Vecd::Constant(1, 3.0))), 9.0);
}

TEST(MultiPoly, ParseRejectsRepeatedAndMixedTuples) {
  EXPECT_THROW(P("((2,0), 1.0) ((2,0), 2.0)"), Error);
  EXPECT_THROW(P("((2,0), 1.0) ((2), 2.0)"), Error);
  EXPECT_THROW(P("((2,0) 1.0)"), Error);
  EXPECT_THROW(P("((-1), 1.0)"), Error);
}

TEST(MultiPoly, DerivativesMatchFiniteDifferences) {
  const MultiPoly p = P("((3,1,0), 2.0) ((0,2,2), -1.0) ((1,0,0), 0.5) ((0,0,0), 7)");
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vecd x = random_point(rng, 3);
    const Vecd g = p.gradient<double>(x);
    const auto f = [&](const Vecd& z) { return p(z); };
    EXPECT_LE((g - fd_gradient(f, x)).norm(), 1e-6 * (1 + g.norm()));
    const Matd H = p.hessian<double>(x);
    EXPECT_LE((H - fd_hessian(f, x)).norm(), 1e-4 * (1 + H.norm()));
    EXPECT_NEAR(p.derivative(1)(x), g(1), 1e-12 * (1 + std::abs(g(1))));
  }
}

TEST(MultiPoly, NormPowerExpansion) {
  const MultiPoly p = MultiPoly::norm_power(3, 2);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const Vecd x = random_point(rng, 3);
    EXPECT_NEAR(p(x), std::pow(x.squaredNorm(), 2), 1e-12 * (1 + std::pow(x.squaredNorm(), 2)));
  }
}

TEST(LeadingForm, SelectsTopDegree) {
  const HomogeneousForm a = leading_form(P("((4), 0.083333333333333333) ((2), -0.5)"));
  EXPECT_EQ(a.degree(), 4);
  EXPECT_EQ(a.poly().size(), 1u);
  EXPECT_DOUBLE_EQ(a.poly().coefficient({4}), 1.0 / 12);

  const MultiPoly n2 = MultiPoly::norm_power(2, 2) + MultiPoly::norm_power(2, 1);
  const HomogeneousForm b = leading_form(n2);
  EXPECT_EQ(b.degree(), 4);
  EXPECT_DOUBLE_EQ(b.poly().coefficient({4, 0}), 1.0);
  EXPECT_DOUBLE_EQ(b.poly().coefficient({2, 2}), 2.0);
  EXPECT_DOUBLE_EQ(b.poly().coefficient({0, 4}), 1.0);
  EXPECT_EQ(b.poly().size(), 3u);

  const HomogeneousForm c = leading_form(P("((3,1), 1.0) ((1,1), 1.0)"));
  EXPECT_EQ(c.poly().size(), 1u);
  EXPECT_DOUBLE_EQ(c.poly().coefficient({3, 1}), 1.0);
}

TEST(LeadingForm, ZeroPolynomialIsEmptyInput) {
  try {
    leading_form(MultiPoly(2));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
}

TEST(HomogeneousForm, RejectsMixedDegrees) { EXPECT_THROW(HomogeneousForm(P("((2), 1) ((1), 1)")), Error); }

TEST(MinOnSphere, AxisMinimum) {
  const auto m = min_on_sphere(HomogeneousForm(P("((2,0), 1.0) ((0,2), 2.0)")), 64);
  EXPECT_NEAR(m.value, 1.0, 1e-9);
  EXPECT_NEAR(std::abs(m.witness(0)), 1.0, 1e-6);
  EXPECT_TRUE(m.positive_definite);
}

TEST(MinOnSphere, NormPowerIsConstant) {
  const auto m = min_on_sphere(leading_form(MultiPoly::norm_power(3, 2)), 64);
  EXPECT_NEAR(m.value, 1.0, 1e-12);
}

TEST(MinOnSphere, IndefiniteForm) {
  const auto m = min_on_sphere(HomogeneousForm(P("((4,0), 1.0) ((0,4), -1.0)")), 64);
  EXPECT_NEAR(m.value, -1.0, 1e-9);
  EXPECT_NEAR(std::abs(m.witness(1)), 1.0, 1e-6);
  EXPECT_FALSE(m.positive_definite);
}

TEST(MinOnSphere, ContractErrors) {
  EXPECT_THROW(min_on_sphere(HomogeneousForm(P("((3), 1.0)")), 64), Error);
  EXPECT_THROW(min_on_sphere(HomogeneousForm(P("((2), 1.0)")), 4), Error);
}

TEST(MinOnSphere, RefinementNeverRaisesMinimum) {
  const std::vector<MultiPoly> forms = {
      P("((4,0), 1.0) ((2,2), -1.5) ((0,4), 2.0) ((3,1), 0.7)"),
      P("((2,0,0), 1.0) ((0,2,0), 3.0) ((0,0,2), 0.5) ((1,1,0), 1.2) ((0,1,1), -0.4)"),
      P("((6,0), 1.0) ((0,6), 1.0) ((3,3), -1.9)"),
      P("((4,0,0), 1.0) ((0,4,0), -0.2) ((2,0,2), 1.0)"),
  };
  for (const auto& f : forms) {
    const HomogeneousForm h(f);
    double prev = min_on_sphere(h, 8).value;
    for (int res = 16; res <= 512; res *= 2) {
      const double cur = min_on_sphere(h, res).value;
      EXPECT_LE(cur, prev + 1e-9) << f.to_string() << " at resolution " << res;
      prev = cur;
    }
  }
}

TEST(SpherePoints, NestedAndUnit) {
  const auto a = sphere_points(3, 32), b = sphere_points(3, 64);
  ASSERT_EQ(a.size(), 32u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_NEAR(a[i].norm(), 1.0, 1e-14);
  }
}

TEST(HomogeneousForm, HomogeneityAndEulerIdentity) {
  const std::vector<MultiPoly> forms = {P("((4,0), 1.0) ((2,2), -1.5) ((0,4), 2.0) ((3,1), 0.7)"),
                                        P("((1,1,1), 2.0) ((3,0,0), -1.0)"),
                                        MultiPoly::norm_power(3, 3)};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> us(0.1, 3.0);
  for (const auto& f : forms) {
    const HomogeneousForm h(f);
    const int d = h.degree();
    for (int i = 0; i < 100; ++i) {
      const Vecd x = random_point(rng, f.dim());
      const double s = us(rng);
      const double fx = h(x);
      const Vecd sx = s * x;
      EXPECT_NEAR(h(sx), std::pow(s, d) * fx, 1e-10 * (1 + std::abs(std::pow(s, d) * fx)));
      const double euler = x.dot(f.gradient<double>(x));
      EXPECT_NEAR(euler, d * fx, 1e-10 * (1 + std::abs(d * fx)));
    }
  }
}

TEST(Uf1Constants, QuadraticPotentialQuarticFriction) {
  for (int n : {1, 2}) {
    const auto c = uf1_constants(MultiPoly::norm_power(n, 1), MultiPoly::norm_power(n, 2));
    EXPECT_EQ(c.p, 1);
    EXPECT_EQ(c.q, 2);
    EXPECT_NEAR(c.nu, 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(c.a, 1.0);
    EXPECT_NEAR(c.c_max_formula, std::min(4.0 * 1 * 2 * 1.0, 2.0), 1e-9);
    EXPECT_EQ(c.m, 2);
    EXPECT_TRUE(c.literal_norm_power);
    EXPECT_GT(c.nu, 0.0);
    EXPECT_GT(c.c_max, 0.0);
  }
}

TEST(Uf1Constants, QuadraticPotentialQuadraticFriction) {
  const auto c = uf1_constants(P("((2), 1.0)"), P("((2), 1.0)"));
  EXPECT_EQ(c.p, 1);
  EXPECT_EQ(c.q, 1);
  EXPECT_NEAR(c.lambda, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(c.a, 1.0);
  EXPECT_NEAR(c.c_max_formula, std::min(2.0 * (2.0 * 1.0 - 1.0), 2.0), 1e-9);
  EXPECT_EQ(c.m, 1);
  // a-window of the p = q = 1 branch
  EXPECT_GT(c.a, 0.0);
  EXPECT_LT(c.a, 2 * c.lambda);
  EXPECT_GT(c.lambda + c.lambda * c.a - c.a * c.a / 2, 0.0);
}

TEST(Uf1Constants, NegativeLeadingFrictionFails) {
  try {
    uf1_constants(P("((2), 1.0)"), P("((4), -1.0)"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CertificateFailure);
    ASSERT_EQ(e.witness().size(), 1u);
    EXPECT_NEAR(std::abs(e.witness()[0]), 1.0, 1e-9);
  }
}

TEST(Uf1Constants, OverrideOfA) {
  const auto c = uf1_constants(P("((2), 1.0)"), P("((4), 1.0)"), 0.5);
  EXPECT_DOUBLE_EQ(c.a, 0.5);
  EXPECT_NEAR(c.c_max_formula, 1.0, 1e-9);
}

TEST(Uf1Constants, ScaledLeadingFormReportedNotFailed) {
  const auto c = uf1_constants(P("((2), 3.0)"), P("((4), 2.0)"));
  EXPECT_FALSE(c.literal_norm_power);
  EXPECT_GT(c.c_max, 0.0);
}

TEST(InnerProductPoly, MatchesDirectEvaluation) {
  const MultiPoly V = P("((2,0), 1.0) ((0,4), 0.5)");
  const MultiPoly F = P("((4,0), 1.0) ((1,1), 0.25)");
  const MultiPoly g = inner_product_poly(V, F, 0.7);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Vecd x = random_point(rng, 2);
    const double direct = V.gradient<double>(x).dot(F.gradient<double>(x) - 0.7 * x);
    EXPECT_NEAR(g(x), direct, 1e-10 * (1 + std::abs(direct)));
  }
}

TEST(FitInnerBound, Example41GrowsQuadratically) {
  const SystemSpec sys = builtin("example-4.1", {{"n", "2"}});
  const auto& F = std::get<HessianFriction<double>>(sys.fields.friction).F;
  const std::vector<double> radii{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto fit = fit_inner_bound(sys.fields.potential, F, 2, 8.0, radii, 64, 16);
  EXPECT_NEAR(fit.m_hat, 1.0, 0.1);
  EXPECT_TRUE(fit.grows);
  EXPECT_GT(fit.b_hat, 0.0);
}

TEST(FitInnerBound, ExplicitQuartic) {
  const std::vector<double> radii{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto fit = fit_inner_bound(P("((2), 1.0)"), P("((4), 0.5)"), 1.0, radii, 16);
  // g = 4 x^4 - 2 x^2
  EXPECT_NEAR(fit.m_hat, 2.0, 0.05);
  EXPECT_NEAR(fit.b_hat, 2.0, 0.2);
  for (double r : {0.3, 0.7, 1.0, 2.5, 10.0}) {
    const double g = 4 * std::pow(r, 4) - 2 * r * r;
    if (r >= 1.0) {
      EXPECT_GE(g - fit.b_hat * std::pow(r, 2 * fit.m_hat) + fit.M_hat, -1e-9);
    }
  }
}

TEST(FitInnerBound, ConstantPotentialFails) {
  const std::vector<double> radii{1, 2, 3, 4, 5};
  try {
    fit_inner_bound(P("((0), 3.0)"), P("((4), 1.0)"), 1.0, radii, 16);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DissipativityFailure);
  }
}
