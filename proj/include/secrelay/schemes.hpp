#pragma once

// The three compared allocation schemes over one channel realization:
// joint optimization, power-only optimization on a random assignment, and
// a random assignment with an even power split.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "secrelay/allocation.hpp"
#include "secrelay/channel.hpp"
#include "secrelay/config.hpp"
#include "secrelay/dual_optimizer.hpp"
#include "secrelay/secrecy.hpp"

namespace secrelay {

/// Uniform (relay, user) pair per subcarrier, drawn independently.
inline std::vector<RelayUser> random_pairs(std::size_t n, std::size_t j, std::size_t k,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(detail::splitmix64(seed ^ 0x5a17c0deULL));
  std::uniform_int_distribution<std::size_t> pick(0, j * k - 1);
  std::vector<RelayUser> out(n);
  for (auto& pr : out) {
    const std::size_t v = pick(rng);
    pr = {v / k, v % k};
  }
  return out;
}

inline AllocationResult run_opt(const SystemConfig& cfg, const NormalizedGains& gains) {
  auto r = solve_joint(cfg, gains);
  r.scheme = Scheme::opt;
  return r;
}

/// Power-only optimization on a fixed assignment.
inline AllocationResult run_fixed_assignment(const SystemConfig& cfg, const NormalizedGains& gains,
                                             std::vector<RelayUser> pairs) {
  cfg.validate();
  const auto budgets = cfg.budgets();
  auto rec = recover_primal(gains, budgets, std::move(pairs), cfg.pt, cfg.solver,
                            cfg.effective_lambda0(), cfg.effective_step0());
  auto r = make_result(Scheme::subopt, gains, rec);
  r.converged = rec.loop.converged;
  r.iterations = rec.loop.iterations;
  r.dual_history = std::move(rec.loop.history);
  return r;
}

inline AllocationResult run_subopt(const SystemConfig& cfg, const NormalizedGains& gains,
                                   std::uint64_t seed) {
  return run_fixed_assignment(cfg, gains, random_pairs(cfg.n, cfg.j, cfg.k, seed));
}

/// Same random assignment as run_subopt for the same seed, PT/N per subcarrier.
inline AllocationResult run_nonopt(const SystemConfig& cfg, const NormalizedGains& gains,
                                   std::uint64_t seed) {
  cfg.validate();
  const auto pairs = random_pairs(cfg.n, cfg.j, cfg.k, seed);
  AllocationResult r;
  r.scheme = Scheme::nonopt;
  r.assignment = Assignment::from_pairs(cfg.j, cfg.k, pairs);
  const auto table = relay_power_update(r.assignment, cfg.budgets(), cfg.n);
  r.power = PowerAllocation(cfg.n, cfg.j);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    r.power.p[i] = cfg.pt / double(cfg.n);
    r.power.relay(i, pairs[i].relay) = table.at(i, pairs[i].relay);
  }
  r.sum_rate = sum_secrecy_rate(gains, r.assignment, r.power);
  r.converged = true;
  return r;
}

inline AllocationResult run_scheme(Scheme s, const SystemConfig& cfg, const NormalizedGains& gains,
                                   std::uint64_t assignment_seed) {
  switch (s) {
    case Scheme::opt:
      return run_opt(cfg, gains);
    case Scheme::subopt:
      return run_subopt(cfg, gains, assignment_seed);
    case Scheme::nonopt:
      return run_nonopt(cfg, gains, assignment_seed);
  }
  return {};
}

}  // namespace secrelay
