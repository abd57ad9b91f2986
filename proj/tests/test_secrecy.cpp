#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "secrelay/channel.hpp"
#include "secrelay/secrecy.hpp"

using namespace secrelay;

TEST(Secrecy, AmplificationFactor) {
  EXPECT_NEAR(amplification_factor(2.0, 3.0, 4.0, 1.0), std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(amplification_factor(0.0, 2.0, 4.0, 0.5), 2.0, 1e-15);
}

TEST(Secrecy, SnrMatchesClosedForm) {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int n = 0; n < 200; ++n) {
    const LinkGains g{e(rng), e(rng), e(rng)};
    const double p = u(rng), q = u(rng);
    const auto s = snr_pair(g, p, q);
    EXPECT_NEAR(s.user, g.a * g.b * p * q / (g.a * p + g.b * q + 1.0), 1e-12 * (1.0 + s.user));
    EXPECT_NEAR(s.eve, g.a * g.c * p * q / (g.a * p + g.c * q + 1.0), 1e-12 * (1.0 + s.eve));
  }
}

TEST(Secrecy, KnownRate) {
  // b(1+ap+qc) / ((1+ap+qb)c) = 4*6 / (12*1) = 2 -> half a bit.
  EXPECT_NEAR(secrecy_rate({1.0, 4.0, 1.0}, 3.0, 2.0), 0.5, 1e-12);
}

TEST(Secrecy, EqualGainsGiveZero) {
  for (double p : {0.0, 0.1, 1.0, 100.0}) EXPECT_EQ(secrecy_rate({2.0, 1.5, 1.5}, p, 1.0), 0.0);
}

TEST(Secrecy, WeakerUserIsClippedToZero) {
  for (double p : {0.1, 1.0, 100.0}) EXPECT_EQ(secrecy_rate({2.0, 0.5, 1.5}, p, 1.0), 0.0);
}

TEST(Secrecy, NoTransmissionNoRate) { EXPECT_EQ(secrecy_rate({1.0, 10.0, 0.1}, 0.0, 1.0), 0.0); }

TEST(Secrecy, NoEavesdropperChannel) {
  const LinkGains g{1.0, 3.0, 0.0};
  const double snr = 1.0 * 3.0 * 2.0 * 1.0 / (1.0 * 2.0 + 3.0 * 1.0 + 1.0);
  EXPECT_NEAR(secrecy_rate(g, 2.0, 1.0), 0.5 * std::log2(1.0 + snr), 1e-14);
}

TEST(Secrecy, MonotoneInUserAndEavesdropperGain) {
  const double p = 2.0, q = 1.5;
  double prev = -1.0;
  for (double b = 0.6; b < 10.0; b += 0.3) {
    const double r = secrecy_rate({1.0, b, 0.5}, p, q);
    EXPECT_GE(r, prev);
    prev = r;
  }
  prev = 1e9;
  for (double c = 0.05; c < 5.0; c += 0.2) {
    const double r = secrecy_rate({1.0, 5.0, c}, p, q);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Secrecy, HighSnrFormTracksExactRate) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 500) {
    const LinkGains g{std::exp(8.0 * u(rng)), std::exp(8.0 * u(rng)), std::exp(8.0 * u(rng))};
    const double p = std::exp(6.0 * u(rng)), q = std::exp(6.0 * u(rng));
    const auto s = snr_pair(g, p, q);
    if (std::min(s.user, s.eve) < 100.0) continue;
    const double exact = std::max(0.0, 0.5 * std::log2((1.0 + s.user) / (1.0 + s.eve)));
    EXPECT_NEAR(secrecy_rate(g, p, q), exact, 0.05);
    ++checked;
  }
}

TEST(Secrecy, SumMatchesTripleLoop) {
  std::mt19937_64 rng(5);
  for (std::size_t n = 1; n <= 8; ++n) {
    const std::size_t j = 3, k = 2;
    const auto gains = oracle::exponential_gains(n, j, k, rng);
    std::uniform_int_distribution<std::size_t> pick(0, j * k - 1);
    Assignment as(n, j, k);
    PowerAllocation pw(n, j);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = pick(rng);
      as.set(i, v / k, v % k, true);
      pw.p[i] = u(rng);
      for (std::size_t jj = 0; jj < j; ++jj) pw.relay(i, jj) = u(rng);
    }
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t jj = 0; jj < j; ++jj)
        for (std::size_t kk = 0; kk < k; ++kk)
          if (as.eta(i, jj, kk) && pw.p[i] > 0.0)
            expected += oracle::link_rate(gains.a(i, jj), gains.b(i, jj, kk), gains.c(i, jj), pw.relay(i, jj),
                                          pw.p[i]);
    EXPECT_NEAR(sum_secrecy_rate(gains, as, pw), expected, 1e-12 * (1.0 + expected));
  }
}

TEST(Secrecy, SumWithSingleRelayMatchesUserIndicatorForm) {
  // With one relay, eta(i,0,k) = alpha(i,k) * beta(0,k).
  std::mt19937_64 rng(8);
  const std::size_t n = 6, k = 3;
  const auto gains = oracle::exponential_gains(n, 1, k, rng);
  Assignment as(n, 1, k);
  PowerAllocation pw(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    as.set(i, 0, i % 2, true);
    pw.p[i] = 1.0;
    pw.relay(i, 0) = 0.5;
  }
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t kk = 0; kk < k; ++kk)
      expected += as.alpha(i, kk) * as.beta(0, kk) * secrecy_rate(gains.at(i, 0, kk), pw.p[i], pw.relay(i, 0));
  EXPECT_NEAR(sum_secrecy_rate(gains, as, pw), expected, 1e-12);
}

TEST(Secrecy, SumRejectsNonExclusiveAssignment) {
  std::mt19937_64 rng(1);
  const auto gains = oracle::exponential_gains(2, 2, 2, rng);
  Assignment as(2, 2, 2);
  as.set(0, 0, 0, true);
  as.set(0, 1, 1, true);
  as.set(1, 0, 1, true);
  EXPECT_THROW(sum_secrecy_rate(gains, as, PowerAllocation(2, 2)), invalid_assignment);
  Assignment empty(2, 2, 2);
  empty.set(0, 0, 0, true);
  EXPECT_THROW(sum_secrecy_rate(gains, empty, PowerAllocation(2, 2)), invalid_assignment);
}

TEST(Secrecy, SumRejectsMismatchedDimensions) {
  std::mt19937_64 rng(1);
  const auto gains = oracle::exponential_gains(2, 2, 2, rng);
  const auto as = Assignment::from_pairs(2, 3, {{0, 0}, {1, 2}});
  EXPECT_THROW(sum_secrecy_rate(gains, as, PowerAllocation(2, 2)), invalid_assignment);
}

TEST(Assignment, FromPairsRejectsOutOfRange) {
  EXPECT_THROW(Assignment::from_pairs(2, 2, {{0, 0}, {2, 0}}), invalid_assignment);
}

TEST(Assignment, IndicatorViews) {
  const auto as = Assignment::from_pairs(2, 3, {{1, 2}, {0, 2}, {1, 0}});
  EXPECT_TRUE(as.exclusive());
  EXPECT_EQ(as.alpha(0, 2), 1);
  EXPECT_EQ(as.alpha(0, 0), 0);
  EXPECT_EQ(as.beta(1, 2), 1);
  EXPECT_EQ(as.beta(0, 0), 0);
  EXPECT_EQ(as.relay_loads(), (std::vector<std::size_t>{1, 2}));
}
