#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bwave/errors.hpp"
#include "bwave/reaction.hpp"
#include "oracles.hpp"

using namespace bwave;

namespace {
constexpr double pi8 = std::numbers::pi / 8.0;

std::vector<ReactionTerm> ignition_terms() {
  return {make_bump(0.5, pi8), make_bump(0.25, pi8), make_bump(0.05, pi8), make_tent(0.25, pi8), make_tent(0.4, 1.0)};
}
}  // namespace

TEST(Bump, AmplitudeAndValues) {
  const ReactionTerm f = make_bump(0.5, pi8);
  EXPECT_NEAR(f.amplitude(), 6.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(f.amplitude(), 18.8495559, 1e-6);
  EXPECT_NEAR(f(0.25), f.amplitude() * 0.25 * 0.25, 1e-14);
  EXPECT_EQ(f(0.5), 0.0);
  EXPECT_EQ(f(0.0), 0.0);
  EXPECT_NEAR(f.lipschitz(), f.amplitude() * 0.5, 1e-14);
}

TEST(Bump, MassByQuadrature) {
  for (double alpha : {0.5, 0.25, 0.05}) {
    const ReactionTerm f = make_bump(alpha, pi8);
    const double quad = oracle::simpson([&f](double u) { return f(u); }, 0.0, alpha, 2000);
    EXPECT_NEAR(quad, pi8, 1e-12);
    EXPECT_NEAR(mass(f), pi8, 1e-12);
    EXPECT_NEAR(f.mass(), pi8, 1e-15);
  }
}

TEST(Antiderivative, BumpPolynomial) {
  const double alpha = 0.25;
  const ReactionTerm f = make_bump(alpha, pi8);
  const double u = alpha / 2.0;
  const double lambda = 6.0 * pi8 / (alpha * alpha * alpha);
  EXPECT_NEAR(antiderivative(f, u), lambda * (alpha * u * u / 2.0 - u * u * u / 3.0), 1e-13);
  EXPECT_NEAR(antiderivative(f, u), oracle::simpson([&f](double s) { return f(s); }, 0.0, u, 2000), 1e-12);
  EXPECT_EQ(antiderivative(f, 0.0), 0.0);
  EXPECT_NEAR(antiderivative(f, 1.0), pi8, 1e-13);
  EXPECT_THROW(antiderivative(f, 1.5), DomainError);
}

TEST(Antiderivative, TentAgainstQuadrature) {
  const ReactionTerm f = make_tent(0.3, 0.7);
  for (double u : {0.05, 0.15, 0.2, 0.3, 0.9}) {
    // split at the kink so Simpson stays exact on each linear piece
    const double k = std::min(u, 0.15);
    const double q = oracle::simpson([&f](double s) { return f(s); }, 0.0, k, 200) +
                     (u > 0.15 ? oracle::simpson([&f](double s) { return f(s); }, 0.15, std::min(u, 0.3), 200) : 0.0);
    EXPECT_NEAR(antiderivative(f, u), q, 1e-12);
  }
}

TEST(IgnitionProperty, SupportAndPositivity) {
  std::mt19937_64 rng(3);
  for (const auto& f : ignition_terms()) {
    const double a = f.alpha();
    std::uniform_real_distribution<double> inside(0.0, a), outside(a, 2.0), negative(-1.0, 0.0);
    for (int k = 0; k < 10000; ++k) {
      const double u = inside(rng);
      if (u > 0.0) EXPECT_GT(f(u), 0.0);
      EXPECT_EQ(f(outside(rng)), 0.0);
      EXPECT_EQ(f(negative(rng)), 0.0);
    }
    EXPECT_EQ(f(a), 0.0);
  }
}

TEST(IgnitionProperty, LipschitzBound) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& f : ignition_terms()) {
    double worst = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const double u = unit(rng), w = unit(rng) * f.alpha() * 1.2;
      if (u == w) continue;
      worst = std::max(worst, std::abs(f(u) - f(w)) / std::abs(u - w));
    }
    EXPECT_LE(worst, f.lipschitz() * (1.0 + 1e-10)) << f.describe();
    // the bound is attained at the edges of the support
    EXPECT_GT(worst, 0.9 * f.lipschitz()) << f.describe();
  }
}

TEST(IgnitionProperty, MassMatchesQuadrature) {
  for (const auto& f : ignition_terms()) {
    const double a = f.alpha();
    const double q = oracle::simpson([&f](double u) { return f(u); }, 0.0, a / 2.0, 2000) +
                     oracle::simpson([&f](double u) { return f(u); }, a / 2.0, a, 2000);
    EXPECT_NEAR(mass(f), q, 1e-10);
    EXPECT_NEAR(f.mass(), q, 1e-10);
  }
}

TEST(Reaction, ParameterErrors) {
  EXPECT_THROW(make_bump(0.0, 1.0), DomainError);
  EXPECT_THROW(make_bump(1.0, 1.0), DomainError);
  EXPECT_THROW(make_bump(0.3, -1.0), DomainError);
  EXPECT_THROW(make_tent(1.2, 1.0), DomainError);
  EXPECT_THROW(parse_ignition_family("kpp"), std::invalid_argument);
  EXPECT_EQ(parse_ignition_family("tent"), ReactionFamily::tent);
}

TEST(Reaction, ZeroStub) {
  const ReactionTerm z = make_zero_stub();
  EXPECT_EQ(mass(z), 0.0);
  EXPECT_EQ(z(0.3), 0.0);
  EXPECT_FALSE(z.threshold().has_value());
  EXPECT_THROW(z.alpha(), std::logic_error);
}

TEST(Reaction, DerivativeMatchesDifferences) {
  const double h = 1e-7;
  for (const auto& f : ignition_terms())
    for (double u = 0.013; u < f.alpha() - 2 * h; u += f.alpha() / 37.0) {
      if (f.family() == ReactionFamily::tent && std::abs(u - f.alpha() / 2) < 1e-3) continue;
      EXPECT_NEAR(f.derivative(u), (f(u + h) - f(u - h)) / (2 * h), 1e-5 * f.lipschitz());
    }
}

TEST(Regularized, MassConcentratesAtTheOrigin) {
  // int_0^1 g dv = int_0^inf Phi_c'(u)^2 beta_delta(u) du, and beta_delta
  // tends to (pi/8) delta_0, so the mass tends to Phi_c'(0)^2 pi/8 = c/2
  const double c = 1.0;
  double last_gap = 1.0;
  for (double delta : {1.0, 0.3, 0.1, 0.03}) {
    const ReactionTerm g = make_regularized(ClosedFormParams(delta, c));
    const double q = oracle::simpson(
        [&](double u) {
          const double d = 2.0 * std::sqrt(c / std::numbers::pi) * std::exp(-c * u * u);
          return d * d * (u / delta) / (1.0 + 4.0 * std::pow(u / delta, 4)) / delta;
        },
        0.0, 12.0, 400000);
    EXPECT_NEAR(g.mass(), q, 1e-9);
    EXPECT_NEAR(mass(g), q, 1e-8);
    const double gap = std::abs(g.mass() - 0.5 * c);
    EXPECT_LT(gap, last_gap);
    last_gap = gap;
  }
  EXPECT_LT(last_gap, 0.02);
}

TEST(Regularized, LipschitzBound) {
  const ReactionTerm g = make_regularized(ClosedFormParams(1.0, 1.0));
  double worst = 0.0;
  for (int k = 0; k < 4000; ++k) {
    const double u = k / 4000.0, w = (k + 1) / 4000.0;
    worst = std::max(worst, std::abs(g(u) - g(w)) / (w - u));
  }
  EXPECT_LE(worst, g.lipschitz());
}
