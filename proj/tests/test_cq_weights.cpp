#include "hnmx/cq_weights.hpp"
#include "hnmx/special_fn.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

namespace {

using hnmx::Scheme;

void expect_weights(const hnmx::CQWeights& w, const std::vector<double>& ref, double tol) {
  ASSERT_EQ(w.size(), ref.size());
  for (std::size_t j = 0; j < ref.size(); ++j)
    EXPECT_NEAR(w[j], ref[j], tol) << "j = " << j;
}

// quadrature of s^3 on [0,1] against the exact convolution
double cubic_error(Scheme s, double a, double b, int n) {
  const double tau = 1.0 / n;
  const auto w = hnmx::make_weights(s, a, b, tau, n);
  std::vector<double> u(n + 1);
  for (int k = 0; k <= n; ++k)
    u[k] = std::pow(k * tau, 3);
  return std::fabs(hnmx::discrete_convolution(w.view(), u) -
                   hnmx::prabhakar_integral_monomial(a, b, 3, 1.0));
}

TEST(SchemeNames, RoundTrip) {
  for (Scheme s : {Scheme::CM2, Scheme::BDF1, Scheme::BDF2})
    EXPECT_EQ(hnmx::parse_scheme(hnmx::to_string(s)), s);
  EXPECT_FALSE(hnmx::parse_scheme("bdf3").has_value());
}

TEST(CM2Constants, Invariants) {
  for (int i = 1; i <= 19; ++i) {
    const double a = 0.05 * i;
    const auto k = hnmx::CM2Constants::for_alpha(a);
    EXPECT_GT(k.c, 1.0);
    EXPECT_GT(k.d, 0.0);
    EXPECT_LT(k.d, 1.0);
    EXPECT_NEAR(k.gamma0 + k.gamma1, -1.0, 4e-16 * std::fabs(k.gamma0));
    EXPECT_NEAR(k.c * (1.0 - k.d), 1.0, 4e-16 * k.c);
  }
  EXPECT_THROW(hnmx::CM2Constants::for_alpha(1.0), std::domain_error);
  EXPECT_THROW(hnmx::CM2Constants::for_alpha(0.0), std::domain_error);
}

TEST(CM2Weights, SmallExample) {
  expect_weights(hnmx::cm2_weights(0.5, 1.0, 1.0, 2),
                 {0.449489742783178, 0.16496580927726, 0.0742907308379089}, 1e-14);
}

TEST(CM2Weights, FrozenHighPrecisionValues) {
  expect_weights(hnmx::cm2_weights(0.3, 0.7, 0.1, 6),
                 {0.43486838851301752, 0.089687602674056235, 0.037540764732936603,
                  0.02320733296950082, 0.016985247704847651, 0.013429078131572843,
                  0.011090787502713185},
                 1e-15);
}

TEST(CM2Weights, LeadingWeightClosedForm) {
  for (double a : {0.1, 0.5, 0.9})
    for (double b : {0.2, 0.7, 1.0})
      for (double tau : {0.5, 0.01}) {
        const double c = (2.0 - a) / (2.0 - 2.0 * a);
        const double w0 = std::pow(1.0 + std::pow(tau, -a) * std::pow(c, 1.0 - a), -b);
        EXPECT_NEAR(hnmx::cm2_weights(a, b, tau, 0)[0], w0, 1e-13);
      }
}

TEST(CM2Weights, MatchCauchyIntegralOracle) {
  for (auto [a, b] : {std::pair{0.5, 0.5}, {0.1, 0.9}, {0.9, 0.1}, {0.7, 1.0}}) {
    const double tau = 0.05;
    const auto w = hnmx::cm2_weights(a, b, tau, 16);
    const auto ref = oracle::cauchy_coefficients(
        [=](auto z) { return oracle::cm2_generating(a, b, tau, z); }, 16, 512, 0.5);
    for (std::size_t j = 0; j <= 16; ++j)
      EXPECT_NEAR(w[j], ref[j], 1e-10) << a << ' ' << b << " j=" << j;
  }
}

TEST(CM2Weights, MatchCauchyIntegralOracleLongSequence) {
  // radius chosen so the 1/r^N amplification of rounding stays near 1e4
  const int N = 256;
  const double r = std::pow(1e-4, 1.0 / N);
  const double a = 0.5, b = 0.5, tau = 0.01;
  const auto w = hnmx::cm2_weights(a, b, tau, N);
  const auto ref = oracle::cauchy_coefficients(
      [=](auto z) { return oracle::cm2_generating(a, b, tau, z); }, N, 16384, r);
  for (int j = 0; j <= N; ++j)
    ASSERT_NEAR(w[j], ref[j], 1e-10) << "j=" << j;
}

TEST(CM2Weights, PositiveAndNonincreasing) {
  for (double a : {0.05, 0.5, 0.95})
    for (double b : {0.05, 0.5, 1.0}) {
      const auto w = hnmx::cm2_weights(a, b, 0.01, 500);
      for (std::size_t j = 0; j <= 500; ++j) {
        ASSERT_GT(w[j], 0.0);
        if (j)
          ASSERT_LE(w[j], w[j - 1]);
      }
    }
}

TEST(CM2Weights, DomainErrors) {
  EXPECT_THROW(hnmx::cm2_weights(1.0, 0.5, 0.1, 4), std::domain_error);
  EXPECT_THROW(hnmx::cm2_weights(0.5, 1.2, 0.1, 4), std::domain_error);
  EXPECT_THROW(hnmx::cm2_weights(0.5, 0.5, 0.0, 4), std::domain_error);
}

TEST(BdfWeights, FrozenBdf2Values) {
  expect_weights(hnmx::bdf_cq_weights(2, 0.6, 0.8, 0.1, 5),
                 {0.2360569558367394, 0.1262183604252144, 0.078027938026956047,
                  0.054006950970772023, 0.040561848261402946, 0.032207096126982945},
                 1e-15);
}

TEST(BdfWeights, DebyeBdf1IsGeometric) {
  // (1 + (1-z)/tau)^-1 = tau/(1+tau) * sum (z/(1+tau))^j
  const double tau = 0.1;
  const auto w = hnmx::bdf_cq_weights(1, 1.0, 1.0, tau, 20);
  for (int j = 0; j <= 20; ++j)
    EXPECT_NEAR(w[j], tau / (1 + tau) * std::pow(1 + tau, -j), 1e-15);
}

TEST(BdfWeights, Bdf2MatchesCauchyOracle) {
  const double a = 0.4, b = 0.6, tau = 0.02;
  const auto w = hnmx::bdf_cq_weights(2, a, b, tau, 16);
  const auto ref = oracle::cauchy_coefficients(
      [=](std::complex<double> z) {
        const auto d = (1.0 - z) + 0.5 * (1.0 - z) * (1.0 - z);
        return std::pow(1.0 + std::pow(d / tau, a), -b);
      },
      16, 512, 0.5);
  for (int j = 0; j <= 16; ++j)
    EXPECT_NEAR(w[j], ref[j], 1e-10) << j;
}

TEST(BdfWeights, InvalidOrder) {
  EXPECT_THROW(hnmx::bdf_cq_weights(3, 0.5, 0.5, 0.1, 4), std::invalid_argument);
}

TEST(ConsistencyResidual, FrozenValues) {
  EXPECT_NEAR(hnmx::delta_consistency_residual(0.5, 0.1), -0.00309459532928217, 1e-15);
  EXPECT_NEAR(hnmx::delta_consistency_residual(0.5, 0.05), -0.000802799668964632, 1e-16);
  EXPECT_NEAR(hnmx::delta_consistency_residual(0.5, 0.1), -3.094e-3, 1e-6);
}

TEST(ConsistencyResidual, SecondOrder) {
  for (int i = 1; i <= 8; ++i) {
    const double a = 0.1 * i;
    const double q = std::fabs(hnmx::delta_consistency_residual(a, 0.1) /
                               hnmx::delta_consistency_residual(a, 0.05));
    EXPECT_GE(q, 3.5) << a;
    EXPECT_LE(q, 4.5) << a;
  }
}

TEST(ConsistencyResidual, AlphaNearOneIsPreAsymptoticAtCoarseTau) {
  // 40-digit values of r(0.1)/r(0.05) and r(0.05)/r(0.025) at alpha = 0.9
  const auto r = [](double tau) { return hnmx::delta_consistency_residual(0.9, tau); };
  EXPECT_NEAR(r(0.1) / r(0.05), 3.4892960027851077, 1e-12);
  EXPECT_NEAR(r(0.05) / r(0.025), 3.7077478111177675, 1e-12);
  EXPECT_NEAR(r(0.01) / r(0.005), 4.0, 0.1);
}

TEST(ConsistencyResidual, SmallTauStaysAccurate) {
  // O(tau^2) decay must survive without cancellation
  const double r1 = hnmx::delta_consistency_residual(0.5, 1e-4);
  const double r2 = hnmx::delta_consistency_residual(0.5, 5e-5);
  EXPECT_NEAR(r1 / r2, 4.0, 1e-3);
}

TEST(DiscreteConvolution, Basics) {
  const std::vector<double> w{1, 2, 3};
  EXPECT_DOUBLE_EQ(hnmx::discrete_convolution(w, std::vector<double>{5}), 5.0);
  EXPECT_DOUBLE_EQ(hnmx::discrete_convolution(w, std::vector<double>{1, 1, 1}), 6.0);
  EXPECT_DOUBLE_EQ(hnmx::discrete_convolution(w, std::vector<double>{1, 0, 0}), 3.0);
  EXPECT_THROW(hnmx::discrete_convolution(w, std::vector<double>(4, 1.0)), std::invalid_argument);
}

TEST(QuadratureOrder, CM2IsSecondOrder) {
  for (auto [a, b] : {std::pair{0.1, 0.1}, {0.5, 0.5}, {0.3, 1.0}}) {
    const double e1 = cubic_error(Scheme::CM2, a, b, 20);
    const double e2 = cubic_error(Scheme::CM2, a, b, 40);
    const double e3 = cubic_error(Scheme::CM2, a, b, 80);
    EXPECT_NEAR(e1 / e2, 4.0, 0.6) << a << ' ' << b;
    EXPECT_NEAR(e2 / e3, 4.0, 0.6) << a << ' ' << b;
  }
  // slower pre-asymptotics near alpha = beta = 1, still approaching 4
  EXPECT_NEAR(cubic_error(Scheme::CM2, 0.9, 0.9, 40) / cubic_error(Scheme::CM2, 0.9, 0.9, 80),
              4.0, 0.6);
}

TEST(QuadratureOrder, Bdf1IsFirstOrderBdf2IsSecond) {
  const double q1 = cubic_error(Scheme::BDF1, 0.5, 0.5, 40) / cubic_error(Scheme::BDF1, 0.5, 0.5, 80);
  const double q2 = cubic_error(Scheme::BDF2, 0.5, 0.5, 40) / cubic_error(Scheme::BDF2, 0.5, 0.5, 80);
  EXPECT_NEAR(q1, 2.0, 0.3);
  EXPECT_NEAR(q2, 4.0, 0.6);
}

} // namespace
