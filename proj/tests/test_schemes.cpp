#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "secrelay/schemes.hpp"

using namespace secrelay;

namespace {

SystemConfig system_with(std::size_t n, std::size_t j, std::size_t k, double pt = 10.0, std::uint64_t seed = 7) {
  SystemConfig c;
  c.n = n;
  c.j = j;
  c.k = k;
  c.pt = pt;
  c.seed = seed;
  c.num_taps = std::min<std::size_t>(6, n);
  return c;
}

void expect_feasible(const AllocationResult& r, const SystemConfig& cfg) {
  ASSERT_TRUE(r.assignment.exclusive());
  EXPECT_LE(r.power.bs_total(), 1.01 * cfg.pt);
  EXPECT_GE(r.sum_rate, 0.0);
  const auto pairs = r.assignment.pairs();
  const auto budgets = cfg.budgets();
  std::vector<double> sum(cfg.j, 0.0);
  std::vector<bool> used(cfg.j, false);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    EXPECT_GE(r.power.p[i], 0.0);
    sum[pairs[i].relay] += r.power.relay(i, pairs[i].relay);
    used[pairs[i].relay] = true;
  }
  for (std::size_t j = 0; j < cfg.j; ++j)
    if (used[j]) {
      EXPECT_NEAR(sum[j], budgets[j], 1e-12);
    }
}

}  // namespace

TEST(Schemes, SinglePairSystemOptEqualsSubopt) {
  auto cfg = system_with(1, 1, 1);
  cfg.num_taps = 1;
  const auto gains = normalize_gains(generate_channels(cfg));
  const auto opt = run_opt(cfg, gains);
  const auto sub = run_subopt(cfg, gains, 3);
  EXPECT_EQ(opt.assignment, sub.assignment);
  EXPECT_NEAR(opt.sum_rate, sub.sum_rate, 1e-9);
}

TEST(Schemes, SameSeedSameResult) {
  const auto cfg = system_with(32, 4, 12);
  const auto gains = normalize_gains(generate_channels(cfg));
  for (Scheme s : {Scheme::opt, Scheme::subopt, Scheme::nonopt}) {
    const auto a = run_scheme(s, cfg, gains, 99);
    const auto b = run_scheme(s, cfg, gains, 99);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.sum_rate, b.sum_rate);
    EXPECT_EQ(a.power.p, b.power.p);
  }
}

TEST(Schemes, SuboptAndNonoptShareAssignment) {
  const auto cfg = system_with(32, 4, 12);
  const auto gains = normalize_gains(generate_channels(cfg));
  EXPECT_EQ(run_subopt(cfg, gains, 5).assignment, run_nonopt(cfg, gains, 5).assignment);
  EXPECT_FALSE(run_subopt(cfg, gains, 5).assignment == run_subopt(cfg, gains, 6).assignment);
}

TEST(Schemes, FixedAssignmentLoopReproducesOpt) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto cfg = system_with(32, 4, 12, 10.0, seed);
    const auto gains = normalize_gains(generate_channels(cfg));
    const auto opt = run_opt(cfg, gains);
    const auto fixed = run_fixed_assignment(cfg, gains, opt.assignment.pairs());
    EXPECT_EQ(fixed.assignment, opt.assignment);
    EXPECT_NEAR(fixed.sum_rate, opt.sum_rate, 1e-6 * opt.sum_rate);
  }
}

TEST(Schemes, SingleSubcarrierUsesPowerUpToBudget) {
  // One subcarrier: the rate is non-decreasing in p, so the whole budget is worth using.
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    auto cfg = system_with(1, 2, 2, 5.0);
    cfg.num_taps = 1;
    auto gains = oracle::exponential_gains(1, 2, 2, rng);
    const auto r = run_subopt(cfg, gains, rep);
    const auto [j, k] = r.assignment.pairs().front();
    if (!(gains.b(0, j, k) > gains.c(0, j))) {
      EXPECT_EQ(r.sum_rate, 0.0);
      continue;
    }
    EXPECT_GE(r.power.p[0], 0.99 * cfg.pt);
    EXPECT_LE(r.power.p[0], cfg.pt);
    // 1-D grid over [0, PT] finds nothing better.
    const double q = cfg.budgets()[j];
    const auto grid = oracle::lattice_argmax(
        [&](double p) { return oracle::link_rate(gains.a(0, j), gains.b(0, j, k), gains.c(0, j), q, p); }, cfg.pt,
        1e-4);
    EXPECT_GE(r.sum_rate, grid.value - 1e-3);
  }
}

TEST(Schemes, NonoptSpendsExactlyTheBudget) {
  const auto cfg = system_with(64, 4, 12);
  const auto gains = normalize_gains(generate_channels(cfg));
  const auto r = run_nonopt(cfg, gains, 1);
  EXPECT_NEAR(r.power.bs_total(), cfg.pt, 1e-12 * cfg.pt);
  for (double p : r.power.p) EXPECT_DOUBLE_EQ(p, cfg.pt / 64.0);
  EXPECT_TRUE(r.converged);
}

TEST(Schemes, SuboptNeverWorseThanNonoptOnSameAssignment) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cfg = system_with(32, 4, 12, 10.0, seed);
    const auto gains = normalize_gains(generate_channels(cfg));
    EXPECT_GE(run_subopt(cfg, gains, seed).sum_rate, run_nonopt(cfg, gains, seed).sum_rate) << "seed " << seed;
  }
}

TEST(Schemes, AllResultsFeasible) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (double pt : {1.0, 20.0}) {
      const auto cfg = system_with(32, 4, 12, pt, seed);
      const auto gains = normalize_gains(generate_channels(cfg));
      for (Scheme s : {Scheme::opt, Scheme::subopt, Scheme::nonopt}) {
        SCOPED_TRACE(std::string(to_string(s)));
        expect_feasible(run_scheme(s, cfg, gains, seed), cfg);
      }
    }
  }
}

TEST(Schemes, RandomPairsAreUniform) {
  const auto pairs = random_pairs(48000, 4, 12, 3);
  std::vector<int> count(48, 0);
  for (const auto& p : pairs) ++count[p.relay * 12 + p.user];
  for (int c : count) EXPECT_NEAR(c, 1000, 150);
}

TEST(Schemes, ParseScheme) {
  EXPECT_EQ(parse_scheme("opt"), Scheme::opt);
  EXPECT_EQ(parse_scheme("subopt"), Scheme::subopt);
  EXPECT_EQ(parse_scheme("nonopt"), Scheme::nonopt);
  EXPECT_FALSE(parse_scheme("OPT").has_value());
}
