#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "polyact/polyring.hpp"

using namespace polyact;

namespace {

Polynomial z(std::size_t n, std::size_t i) { return Polynomial::variable(n, i); }

// Every exponent vector with |alpha| <= d, sorted by degree then by the
// larger leading exponent first. Built without MonomialBasis.
std::vector<std::vector<int>> brute_basis(std::size_t n, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[i] = e;
      self(self, i + 1, left - e);
    }
    cur[i] = 0;
  };
  rec(rec, 0, d);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int da = 0, db = 0;
    for (int v : a) da += v;
    for (int v : b) db += v;
    if (da != db) return da < db;
    return a > b;
  });
  return out;
}

Polynomial random_poly(std::size_t n, int deg, std::mt19937_64& rng, bool integer) {
  std::uniform_int_distribution<int> ci(-3, 3);
  std::uniform_real_distribution<double> cr(-1.0, 1.0);
  Polynomial p(n);
  for (const auto& m : basis(n, deg)) {
    if (rng() % 2) p.add_term(m, integer ? ci(rng) : cr(rng));
  }
  return p;
}

}  // namespace

TEST(Basis, UnivariateDegreeTwo) {
  const auto b = basis(1, 2);
  ASSERT_EQ(b.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(b[static_cast<std::size_t>(i)][0], i);
}

TEST(Basis, TwoVariablesDegreeTwoOrder) {
  const auto b = basis(2, 2);
  const std::vector<std::vector<int>> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  ASSERT_EQ(b.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(std::vector<int>(b[i].exponents().begin(), b[i].exponents().end()), want[i]) << i;
  }
}

TEST(Basis, FiveVariablesDegreeTwoLength) { EXPECT_EQ(basis(5, 2).size(), 21u); }

TEST(Basis, SizeMatchesBinomialAndBruteForce) {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int d = 0; d <= 6; ++d) {
      const auto b = basis(n, d);
      ASSERT_EQ(b.size(), binomial(n + static_cast<std::size_t>(d), static_cast<std::size_t>(d)));
      if (n <= 4) {
        const auto brute = brute_basis(n, d);
        ASSERT_EQ(brute.size(), b.size());
        for (std::size_t i = 0; i < brute.size(); ++i) {
          ASSERT_EQ(std::vector<int>(b[i].exponents().begin(), b[i].exponents().end()), brute[i]);
        }
      }
    }
  }
}

TEST(Basis, PrefixProperty) {
  for (std::size_t n = 1; n <= 5; ++n) {
    for (int d1 = 0; d1 <= 4; ++d1) {
      const auto small = basis(n, d1);
      const auto big = basis(n, d1 + 2);
      for (std::size_t i = 0; i < small.size(); ++i) ASSERT_EQ(small[i], big[i]);
    }
  }
}

TEST(PolyAdd, IdentityInverseAndHandCase) {
  const std::size_t n = 2;
  const Polynomial p = z(n, 0) * z(n, 0) + Polynomial::constant(n, 1.0);
  EXPECT_EQ(poly_add(p, Polynomial(n)), p);
  EXPECT_TRUE(poly_add(p, -p).is_zero());
  const Polynomial q = 2.0 * z(n, 0) * z(n, 1) - Polynomial::constant(n, 1.0);
  const Polynomial want = z(n, 0) * z(n, 0) + 2.0 * z(n, 0) * z(n, 1);
  EXPECT_EQ(poly_add(p, q), want);
}

TEST(PolyAdd, DimensionMismatchThrows) {
  EXPECT_THROW(poly_add(Polynomial(2), Polynomial(3)), DimensionError);
  EXPECT_THROW(poly_mul(Polynomial(2), Polynomial(3)), DimensionError);
}

TEST(PolyMul, SosIdentityExpansion) {
  const std::size_t n = 2;
  const Polynomial one = Polynomial::constant(n, 1.0);
  const Polynomial z1 = z(n, 0), z2 = z(n, 1);
  const Polynomial s = one - z1 * z1 + z1 * z2;
  const Polynomial lhs = z1 * z1 + poly_mul(s, s);
  const Polynomial rhs = poly_pow(z1, 4) - z1 * z1 * (one + 2.0 * z1 * z2) + z1 * z1 * z2 * z2 + 2.0 * z1 * z2 + one;
  EXPECT_EQ(lhs, rhs);
}

TEST(PolyMul, BinomialSquareAndIdentity) {
  const std::size_t n = 2;
  const Polynomial s = z(n, 0) + z(n, 1);
  EXPECT_EQ(poly_mul(s, s), z(n, 0) * z(n, 0) + 2.0 * z(n, 0) * z(n, 1) + z(n, 1) * z(n, 1));
  EXPECT_EQ(poly_mul(s, Polynomial::constant(n, 1.0)), s);
}

TEST(PolyMul, DegreeAdds) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_poly(3, 1 + t % 3, rng, true);
    const auto q = random_poly(3, 1 + t % 2, rng, true);
    if (p.is_zero() || q.is_zero()) continue;
    EXPECT_EQ(poly_mul(p, q).degree(), p.degree() + q.degree());
  }
}

TEST(PolyEval, Cases) {
  const std::size_t n = 2;
  const std::vector<double> pt = {1.0, 2.0};
  EXPECT_EQ(poly_eval(Polynomial(n), pt), 0.0);
  EXPECT_EQ(poly_eval(Polynomial::constant(n, 7.0), pt), 7.0);
  const Polynomial p = z(n, 0) * z(n, 0) + 2.0 * z(n, 0) * z(n, 1) + Polynomial::constant(n, 1.0);
  EXPECT_DOUBLE_EQ(poly_eval(p, pt), 6.0);
  EXPECT_THROW(poly_eval(p, std::vector<double>{1.0}), DimensionError);
}

TEST(PolyEval, ProductHomomorphism) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_poly(4, 3, rng, false);
    const auto q = random_poly(4, 2, rng, false);
    std::vector<double> pt(4);
    for (auto& v : pt) v = u(rng);
    const double lhs = poly_eval(poly_mul(p, q), pt);
    const double rhs = poly_eval(p, pt) * poly_eval(q, pt);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Ring, AxiomsOnIntegerCoefficients) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto a = random_poly(3, 2, rng, true);
    const auto b = random_poly(3, 2, rng, true);
    const auto c = random_poly(3, 2, rng, true);
    EXPECT_EQ(poly_mul(poly_mul(a, b), c), poly_mul(a, poly_mul(b, c)));
    EXPECT_EQ(poly_mul(a, poly_add(b, c)), poly_add(poly_mul(a, b), poly_mul(a, c)));
    EXPECT_EQ(poly_add(poly_add(a, b), c), poly_add(a, poly_add(b, c)));
    EXPECT_EQ(poly_mul(a, b), poly_mul(b, a));
  }
}

TEST(Canonical, NoZeroCoefficientsStored) {
  const std::size_t n = 2;
  Polynomial p = z(n, 0) + z(n, 1);
  p.add_term(Monomial::unit(n, 0), -1.0);
  EXPECT_EQ(p.num_terms(), 1u);
  for (const auto& [m, c] : p.terms()) EXPECT_NE(c, 0.0);
  Polynomial tiny(n);
  tiny.add_term(Monomial::unit(n, 0), 1.0);
  tiny.add_term(Monomial::unit(n, 0), -1.0 + 1e-16);
  EXPECT_TRUE(tiny.is_zero());
  EXPECT_EQ(Polynomial(n).degree(), 0);
}

TEST(ComposeAffine, IdentityConstantAndSquare) {
  const std::size_t n = 2;
  const std::vector<Polynomial> args = {z(n, 0) + z(n, 1)};
  const std::vector<double> ident = {1.0, 0.0};
  EXPECT_EQ(compose_affine(ident, args)[0], args[0]);
  const std::vector<double> constant = {0.0, 0.0, 4.5};
  EXPECT_EQ(compose_affine(constant, args)[0], Polynomial::constant(n, 4.5));
  const std::vector<double> sq = {1.0, 0.0, 1.0};
  const Polynomial want =
      z(n, 0) * z(n, 0) + 2.0 * z(n, 0) * z(n, 1) + z(n, 1) * z(n, 1) + Polynomial::constant(n, 1.0);
  EXPECT_EQ(compose_affine(sq, args)[0], want);
  EXPECT_THROW(compose_affine(std::vector<double>{}, args), std::invalid_argument);
}

TEST(Render, GradedLexWithNames) {
  const std::size_t n = 3;
  const std::vector<std::string> names = {"c12", "c20", "c21"};
  const Polynomial p = 3.0 * z(n, 2) + 29.0 * z(n, 0) * z(n, 2) - Polynomial::constant(n, 52.0);
  EXPECT_EQ(p.to_string(names), "3*c21 + 29*c12*c21 - 52");
}
