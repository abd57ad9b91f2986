#pragma once

// Lagrangian dual decomposition of the joint subcarrier / relay / BS power
// problem. The BS budget is priced by a single multiplier lambda; for a fixed
// price every subcarrier solves its own power problem in closed form and
// picks the (relay, user) pair with the best priced rate, and lambda follows
// a projected subgradient on the budget violation.
//
// Two price scales appear here. The dual price `lambda` of the outer loop is
// in bits per unit power, because it is traded against secrecy rates that
// carry the 1/2 log2 of the two-slot transmission. The closed-form power
// solver prices against the natural log of the rate fraction, so
// inner_price() converts between the two.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <set>
#include <span>
#include <vector>

#include "secrelay/allocation.hpp"
#include "secrelay/channel.hpp"
#include "secrelay/config.hpp"
#include "secrelay/error.hpp"
#include "secrelay/secrecy.hpp"

namespace secrelay {

/// Coefficients of quadratic * p^2 + linear * p + constant = 0 whose positive
/// root is the interior optimum, and zeta = 1 + a p at the returned power.
struct QuadraticCoefficients {
  double quadratic = 0.0;
  double linear = 0.0;
  double constant = 0.0;
  double zeta_at_root = 1.0;
};

struct PowerSolution {
  double p = 0.0;
  QuadraticCoefficients coeffs;
};

/// Price of the closed-form solver equivalent to a dual price in bits.
inline double inner_price(double lambda_bits) { return 2.0 * std::numbers::ln2 * lambda_bits; }

/// Marginal value d/dp ln F(p) of BS power, where F is the secrecy-rate
/// fraction b(zeta + q c) / ((zeta + q b) c). An interior optimum is where
/// this equals the price.
inline double marginal_log_rate(const LinkGains& g, double q, double p) {
  const double zeta = 1.0 + g.a * p;
  return g.a * q * (g.b - g.c) / ((zeta + q * g.c) * (zeta + q * g.b));
}

/// Maximizer over p >= 0 of ln F(p) - lambda p.
///
/// The stationarity condition multiplied out gives a quadratic in p with
///   quadratic = a^2 b c
///   linear    = 2abc + a b^2 c q + a b c^2 q
///   constant  = bc + b^2 c q + b c^2 q + b^2 c^2 q^2 - (a b^2 c q - a b c^2 q) / lambda
/// It is solved in zeta = 1 + a p instead, where it reads
///   zeta^2 + q(b + c) zeta + q^2 b c - a q (b - c) / lambda = 0,
/// whose discriminant q^2 (b-c)^2 + 4 a q (b-c) / lambda is positive whenever
/// b > c. That form also stays well-posed for c = 0, where the objective is
/// ln(1 + SNR_user) and the p-form coefficients vanish.
inline PowerSolution optimal_power(const LinkGains& g, double q, double lambda) {
  if (!g.finite() || !std::isfinite(q) || !std::isfinite(lambda))
    throw invalid_input("optimal_power: non-finite input");
  if (g.a < 0.0 || g.b < 0.0 || g.c < 0.0 || q < 0.0)
    throw invalid_input("optimal_power: gains and relay power must be non-negative");
  if (!(lambda > 0.0)) throw invalid_input("optimal_power: price must be positive");

  PowerSolution out;
  const double a = g.a, b = g.b, c = g.c;
  out.coeffs.quadratic = a * a * b * c;
  out.coeffs.linear = 2.0 * a * b * c + a * b * b * c * q + a * b * c * c * q;
  out.coeffs.constant = b * c + b * b * c * q + b * c * c * q + b * b * c * c * q * q -
                        (a * b * b * c * q - a * b * c * c * q) / lambda;
  if (b <= c || q == 0.0 || a == 0.0) return out;

  const double s = q * (b + c);
  const double r = a * q * (b - c) / lambda - q * q * b * c;
  const double disc = q * q * (b - c) * (b - c) + 4.0 * a * q * (b - c) / lambda;
  if (!(disc >= 0.0)) return out;
  // (-s + sqrt(s^2 + 4r)) / 2 without cancellation.
  const double zeta = 2.0 * r / (s + std::sqrt(disc));
  if (zeta > 1.0) {
    out.p = (zeta - 1.0) / a;
    out.coeffs.zeta_at_root = zeta;
  }
  return out;
}

/// The best rate reachable at power p or just above it: the high-SNR rate
/// clipped at zero, without the "no transmission" convention at p = 0.
inline double attainable_rate(const LinkGains& g, double p, double q) {
  if (g.b == 0.0) return 0.0;
  return std::max(0.0, high_snr_secrecy_rate(g, p, q));
}

struct Candidate {
  double p = 0.0;
  double metric = 0.0;  ///< attainable rate minus lambda * p, in bits
};

inline Candidate evaluate_candidate(const LinkGains& g, double q, double lambda_bits) {
  Candidate c;
  c.p = optimal_power(g, q, inner_price(lambda_bits)).p;
  c.metric = attainable_rate(g, c.p, q) - lambda_bits * c.p;
  return c;
}

/// Relay power per (subcarrier, relay) under the uniform split Q_j / N_j.
/// Entries of relays that do not serve subcarrier i hold the value a
/// candidate on that relay is evaluated with.
struct RelayPowerTable {
  std::size_t n = 0;
  std::size_t relays = 0;
  std::vector<double> q;      ///< row-major [i][j]
  std::vector<double> loads;  ///< N_j

  double at(std::size_t i, std::size_t jj) const { return q[i * relays + jj]; }
};

/// Table for an even spread N_j = N / J, used before any assignment exists.
inline RelayPowerTable uniform_relay_power(std::size_t n, std::span<const double> budgets) {
  RelayPowerTable t{n, budgets.size(), std::vector<double>(n * budgets.size()),
                    std::vector<double>(budgets.size(), double(n) / double(budgets.size()))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t jj = 0; jj < t.relays; ++jj) t.q[i * t.relays + jj] = budgets[jj] / t.loads[jj];
  return t;
}

inline RelayPowerTable relay_power_update(const Assignment& assign, std::span<const double> budgets,
                                          std::size_t n) {
  if (assign.n() != n) throw invalid_assignment("assignment covers a different number of subcarriers");
  if (assign.j() != budgets.size()) throw invalid_assignment("one budget per relay is required");
  const auto pairs = assign.pairs();
  RelayPowerTable t{n, budgets.size(), std::vector<double>(n * budgets.size()),
                    std::vector<double>(budgets.size(), 0.0)};
  for (const auto& pr : pairs) t.loads[pr.relay] += 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t jj = 0; jj < t.relays; ++jj)
      t.q[i * t.relays + jj] = budgets[jj] / std::max(t.loads[jj], 1.0);
  return t;
}

struct AssignmentStep {
  Assignment assign;
  std::vector<RelayUser> pairs;
  std::vector<double> p;
  std::vector<double> metric;
};

/// Per subcarrier, the (relay, user) pair maximizing rate - lambda p at its
/// own optimal power. Ties go to the lowest (relay, user) index.
inline AssignmentStep assign_subcarriers(const NormalizedGains& gains, const RelayPowerTable& q,
                                         double lambda) {
  if (!(lambda > 0.0)) throw invalid_input("assign_subcarriers: price must be positive");
  if (q.n != gains.n() || q.relays != gains.j())
    throw invalid_input("relay power table does not match the gains");
  const std::size_t n = gains.n(), nj = gains.j(), nk = gains.k();
  AssignmentStep out{Assignment(n, nj, nk), std::vector<RelayUser>(n), std::vector<double>(n),
                     std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t jj = 0; jj < nj; ++jj) {
      for (std::size_t kk = 0; kk < nk; ++kk) {
        const auto cand = evaluate_candidate(gains.at(i, jj, kk), q.at(i, jj), lambda);
        if (cand.metric > best) {
          best = cand.metric;
          out.pairs[i] = {jj, kk};
          out.p[i] = cand.p;
        }
      }
    }
    out.metric[i] = best;
    out.assign.set(i, out.pairs[i].relay, out.pairs[i].user, true);
  }
  return out;
}

struct DualState {
  double lambda = 0.0;
  std::size_t t = 0;
  double step0 = 0.1;
  std::vector<DualRecord> history;

  /// delta(t) for the next update.
  double next_step() const { return step0 / std::sqrt(double(t + 1)); }
};

/// lambda <- max(0, lambda + delta(t) (power_sum - pt)); records the price
/// the power demand was computed at.
inline DualState subgradient_step(DualState state, double power_sum, double pt,
                                  double dual_value = std::numeric_limits<double>::quiet_NaN()) {
  const double step = state.next_step();
  state.history.push_back({state.lambda, power_sum, dual_value});
  state.lambda = std::max(0.0, state.lambda + step * (power_sum - pt));
  ++state.t;
  return state;
}

inline DualState subgradient_step(DualState state, const Assignment& assign, std::span<const double> p,
                                  double pt) {
  assign.validate();
  if (p.size() != assign.n()) throw invalid_input("one BS power per subcarrier is required");
  double s = 0.0;
  for (double v : p) s += v;
  return subgradient_step(std::move(state), s, pt);
}

/// Prices known to over- and under-spend the budget. Power demand falls as
/// the price rises, so the budget-meeting price lies in (lo, hi). A
/// subgradient step that lands outside is replaced by the bracket midpoint
/// (geometric once both ends are positive).
struct PriceBracket {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  void observe(double lambda, double power_sum, double pt) {
    if (power_sum > pt) {
      lo = std::max(lo, lambda);
      if (hi <= lo) hi = std::numeric_limits<double>::infinity();
    } else {
      hi = std::min(hi, lambda);
      if (lo >= hi) lo = 0.0;
    }
  }

  double safeguard(double proposed) const {
    if (proposed > lo && proposed < hi) return proposed;
    if (!std::isfinite(hi)) return 2.0 * std::max(lo, proposed);
    return lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
  }
};

/// Outcome of the power-only dual loop for a fixed assignment.
struct PowerLoopResult {
  std::vector<double> p;
  double lambda = 0.0;
  std::vector<DualRecord> history;
  bool converged = false;
  std::size_t iterations = 0;
};

inline double price_floor(double lambda0) { return 1e-12 * lambda0; }

/// Subgradient loop on the BS budget with every subcarrier's link fixed.
/// `links[i]` and `q[i]` are the gains and relay power of subcarrier i.
/// Steps are safeguarded by a PriceBracket, which keeps small systems, where
/// the demand jumps from 0 to far above PT, from oscillating.
inline PowerLoopResult solve_power_fixed(std::span<const LinkGains> links, std::span<const double> q,
                                         double pt, const SolverParams& params, double lambda0,
                                         double step0) {
  const std::size_t n = links.size();
  DualState state{lambda0, 0, step0, {}};
  PowerLoopResult out;
  out.p.assign(n, 0.0);
  const double floor = price_floor(lambda0);
  PriceBracket bracket;
  for (std::size_t t = 0; t < params.t_max; ++t) {
    const double lam = std::max(state.lambda, floor);
    double sum = 0.0, dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = evaluate_candidate(links[i], q[i], lam);
      out.p[i] = c.p;
      sum += c.p;
      dual += c.metric;
    }
    dual += lam * pt;
    bracket.observe(state.lambda, sum, pt);
    const double prev = state.lambda;
    state = subgradient_step(std::move(state), sum, pt, dual);
    state.lambda = bracket.safeguard(state.lambda);
    out.lambda = lam;
    if (std::abs(sum - pt) <= params.eps_pt * pt || std::abs(state.lambda - prev) <= params.eps_lambda) {
      out.converged = true;
      break;
    }
  }
  out.iterations = state.t;
  out.history = std::move(state.history);
  return out;
}

/// Subcarriers whose rate at vanishing power is positive.
inline bool active_link(const LinkGains& g) { return g.c > 0.0 && g.b > g.c; }

/// Makes a power vector reportable: active subcarriers the price switched
/// off get the activation power, then everything is scaled into the budget.
inline void finalize_power(std::span<const LinkGains> links, std::span<double> p, double pt,
                           double activation_fraction) {
  const double floor = activation_fraction * pt / double(std::max<std::size_t>(p.size(), 1));
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0 && active_link(links[i])) p[i] = floor;
    sum += p[i];
  }
  if (sum > pt) {
    const double scale = pt / sum;
    for (double& v : p) v *= scale;
  }
}

/// Everything needed to report one fixed assignment as a primal solution.
struct RecoveredPrimal {
  std::vector<RelayUser> pairs;
  PowerAllocation power;
  double rate = 0.0;
  double lambda = 0.0;
  std::vector<double> loads;
  PowerLoopResult loop;
};

inline RecoveredPrimal recover_primal(const NormalizedGains& gains, std::span<const double> budgets,
                                      std::vector<RelayUser> pairs, double pt,
                                      const SolverParams& params, double lambda0, double step0) {
  const std::size_t n = gains.n(), nj = gains.j();
  RecoveredPrimal out;
  out.loads.assign(nj, 0.0);
  for (const auto& pr : pairs) out.loads[pr.relay] += 1.0;
  std::vector<LinkGains> links(n);
  std::vector<double> q(n);
  out.power = PowerAllocation(n, nj);
  for (std::size_t i = 0; i < n; ++i) {
    links[i] = gains.at(i, pairs[i].relay, pairs[i].user);
    q[i] = budgets[pairs[i].relay] / out.loads[pairs[i].relay];
    out.power.relay(i, pairs[i].relay) = q[i];
  }
  out.loop = solve_power_fixed(links, q, pt, params, lambda0, step0);
  out.power.p = out.loop.p;
  finalize_power(links, out.power.p, pt, params.activation_fraction);
  for (std::size_t i = 0; i < n; ++i) out.rate += secrecy_rate(links[i], out.power.p[i], q[i]);
  out.lambda = out.loop.lambda;
  out.pairs = std::move(pairs);
  return out;
}

struct RefinedAssignment {
  std::vector<RelayUser> pairs;
  std::vector<double> p;
  std::vector<double> metric;
  std::size_t moves = 0;
};

/// Coordinate ascent on the Lagrangian at a fixed price that accounts for
/// the uniform relay split: moving subcarrier i onto relay j lowers the
/// power of every subcarrier already there, and leaving relay j raises it.
/// Single-subcarrier moves are taken while they strictly improve the sum of
/// priced rates, for at most `max_passes` sweeps over the subcarriers.
inline RefinedAssignment refine_relay_loads(const NormalizedGains& gains,
                                            std::span<const double> budgets,
                                            std::vector<RelayUser> pairs, double lambda,
                                            std::size_t max_passes = 20) {
  const std::size_t n = gains.n(), nj = gains.j(), nk = gains.k();
  std::vector<std::vector<std::size_t>> members(nj);
  for (std::size_t i = 0; i < n; ++i) members[pairs[i].relay].push_back(i);

  auto metric_at = [&](std::size_t i, std::size_t jj, std::size_t kk, double load) {
    return evaluate_candidate(gains.at(i, jj, kk), budgets[jj] / load, lambda).metric;
  };
  // sums[jj][d] = sum over members of relay jj at load (|members| - 1 + d),
  // d = 0, 1, 2; NaN where that load is zero.
  std::vector<std::array<double, 3>> sums(nj);
  auto rebuild = [&](std::size_t jj) {
    const double n_cur = double(members[jj].size());
    for (int d = 0; d < 3; ++d) {
      const double load = n_cur - 1.0 + d;
      double s = 0.0;
      if (load >= 1.0)
        for (std::size_t x : members[jj]) s += metric_at(x, jj, pairs[x].user, load);
      sums[jj][d] = s;
    }
  };
  for (std::size_t jj = 0; jj < nj; ++jj) rebuild(jj);

  RefinedAssignment out;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j0 = pairs[i].relay, k0 = pairs[i].user;
      const double n0 = double(members[j0].size());
      // Priced value of relay j's other members with and without i.
      double best_gain = -std::numeric_limits<double>::infinity(), cur_gain = 0.0;
      RelayUser best_pair = pairs[i];
      for (std::size_t jj = 0; jj < nj; ++jj) {
        double with_others, without;
        double load;
        if (jj == j0) {
          load = n0;
          with_others = sums[jj][1] - metric_at(i, jj, k0, n0);
          without = n0 > 1.0 ? sums[jj][0] - metric_at(i, jj, k0, n0 - 1.0) : 0.0;
        } else {
          load = double(members[jj].size()) + 1.0;
          with_others = sums[jj][2];
          without = sums[jj][1];
        }
        for (std::size_t kk = 0; kk < nk; ++kk) {
          const double gain = with_others + metric_at(i, jj, kk, load) - without;
          if (jj == j0 && kk == k0) cur_gain = gain;
          if (gain > best_gain) {
            best_gain = gain;
            best_pair = {jj, kk};
          }
        }
      }
      const double tol = 1e-12 * (1.0 + std::abs(cur_gain));
      if (best_pair != pairs[i] && best_gain > cur_gain + tol) {
        if (best_pair.relay != j0) {
          auto& from = members[j0];
          from.erase(std::find(from.begin(), from.end(), i));
          members[best_pair.relay].push_back(i);
        }
        pairs[i] = best_pair;
        rebuild(j0);
        if (best_pair.relay != j0) rebuild(best_pair.relay);
        moved = true;
        ++out.moves;
      }
    }
    if (!moved) break;
  }

  out.p.resize(n);
  out.metric.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [jj, kk] = pairs[i];
    const auto c = evaluate_candidate(gains.at(i, jj, kk), budgets[jj] / double(members[jj].size()), lambda);
    out.p[i] = c.p;
    out.metric[i] = c.metric;
  }
  out.pairs = std::move(pairs);
  return out;
}

/// Dual function at `lambda` with the relay split frozen at `loads`
/// (relays without subcarriers are evaluated as if they had one).
inline double dual_value_fixed_loads(const NormalizedGains& gains, std::span<const double> budgets,
                                     std::span<const double> loads, double lambda, double pt) {
  double d = lambda * pt;
  for (std::size_t i = 0; i < gains.n(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t jj = 0; jj < gains.j(); ++jj) {
      const double q = budgets[jj] / std::max(loads[jj], 1.0);
      for (std::size_t kk = 0; kk < gains.k(); ++kk)
        best = std::max(best, evaluate_candidate(gains.at(i, jj, kk), q, lambda).metric);
    }
    d += best;
  }
  return d;
}

inline AllocationResult make_result(Scheme scheme, const NormalizedGains& gains, const RecoveredPrimal& rec) {
  AllocationResult r;
  r.scheme = scheme;
  r.assignment = Assignment::from_pairs(gains.j(), gains.k(), rec.pairs);
  r.power = rec.power;
  r.sum_rate = sum_secrecy_rate(gains, r.assignment, r.power);
  r.lambda = rec.lambda;
  return r;
}

/// Joint subcarrier, relay and BS power allocation.
///
/// Each iteration evaluates candidates with the relay split of the previous
/// iterate, assigns, optionally refines relay loads, and takes a
/// bracket-safeguarded subgradient step. Every distinct assignment met along
/// the way is turned into a feasible primal point by re-solving its power;
/// the best one is returned. `converged` reports whether the price loop met
/// its stopping rule before t_max.
inline AllocationResult solve_joint(const SystemConfig& cfg, const NormalizedGains& gains) {
  cfg.validate();
  if (gains.n() != cfg.n || gains.j() != cfg.j || gains.k() != cfg.k)
    throw invalid_configuration("gains do not match the configured dimensions");
  const auto budgets = cfg.budgets();
  const auto& params = cfg.solver;
  const double pt = cfg.pt;
  const double lambda0 = cfg.effective_lambda0();
  const double step0 = cfg.effective_step0();
  const double floor = price_floor(lambda0);

  DualState state{lambda0, 0, step0, {}};
  RelayPowerTable table = uniform_relay_power(cfg.n, budgets);
  PriceBracket bracket;
  std::set<std::vector<std::size_t>> seen;
  RecoveredPrimal best;
  bool have_best = false;
  bool converged = false;

  for (std::size_t t = 0; t < params.t_max; ++t) {
    const double lam = std::max(state.lambda, floor);
    auto step = assign_subcarriers(gains, table, lam);
    std::vector<RelayUser> pairs = std::move(step.pairs);
    std::vector<double> p = std::move(step.p), metric = std::move(step.metric);
    if (params.refine_relay_loads) {
      auto refined = refine_relay_loads(gains, budgets, std::move(pairs), lam);
      pairs = std::move(refined.pairs);
      p = std::move(refined.p);
      metric = std::move(refined.metric);
    }
    double sum = 0.0, dual = lam * pt;
    for (std::size_t i = 0; i < cfg.n; ++i) {
      sum += p[i];
      dual += metric[i];
    }

    std::vector<std::size_t> key(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) key[i] = pairs[i].relay * cfg.k + pairs[i].user;
    if (seen.insert(std::move(key)).second) {
      auto rec = recover_primal(gains, budgets, pairs, pt, params, lam, step0);
      if (!have_best || rec.rate > best.rate) {
        best = std::move(rec);
        have_best = true;
      }
    }

    bracket.observe(state.lambda, sum, pt);
    const double prev = state.lambda;
    state = subgradient_step(std::move(state), sum, pt, dual);
    state.lambda = bracket.safeguard(state.lambda);
    table = relay_power_update(Assignment::from_pairs(cfg.j, cfg.k, pairs), budgets, cfg.n);
    if (std::abs(sum - pt) <= params.eps_pt * pt || std::abs(state.lambda - prev) <= params.eps_lambda) {
      converged = true;
      break;
    }
  }

  AllocationResult r = make_result(Scheme::opt, gains, best);
  r.converged = converged;
  r.iterations = state.t;
  r.dual_history = std::move(state.history);
  r.dual_bound = dual_value_fixed_loads(gains, budgets, best.loads, std::max(best.lambda, floor), pt);
  return r;
}

}  // namespace secrelay
