#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "secrelay/error.hpp"

namespace secrelay {

/// Tunables of the dual (subgradient) loops.
struct SolverParams {
  /// Initial multiplier; <= 0 selects 1/PT.
  double lambda0 = 0.0;
  /// Step scale of delta(t) = step0/sqrt(t); <= 0 selects lambda0/PT.
  double step0 = 0.0;
  std::size_t t_max = 5000;
  /// Relative slack on the BS budget used as the stopping band.
  double eps_pt = 0.01;
  /// Absolute change of lambda below which the loop stops.
  double eps_lambda = 1e-6;
  /// Power handed to active subcarriers that the price switched off, as a
  /// fraction of PT/N. Zero keeps them silent.
  double activation_fraction = 1e-9;
  /// Run the relay-load coordinate pass after each assignment step.
  bool refine_relay_loads = true;
};

/// Dimensions, budgets and channel statistics of one simulated system.
struct SystemConfig {
  std::size_t n = 64;  ///< subcarriers
  std::size_t k = 12;  ///< users
  std::size_t j = 4;   ///< relays
  double pt = 10.0;    ///< BS power budget (absolute)
  /// Per-relay budgets Q_j. Empty means `relay_budget` for every relay.
  std::vector<double> q;
  double relay_budget = 1.0;
  double sigma2 = 1.0;
  std::size_t num_taps = 6;
  /// Per-tap variance; <= 0 selects 1/num_taps (unit mean subcarrier gain).
  double tap_variance = 0.0;
  std::uint64_t seed = 7;
  SolverParams solver;

  /// Budgets with the scalar default expanded to length j.
  std::vector<double> budgets() const {
    if (!q.empty()) return q;
    return std::vector<double>(j, relay_budget);
  }

  double effective_tap_variance() const {
    return tap_variance > 0.0 ? tap_variance : 1.0 / static_cast<double>(num_taps);
  }

  double effective_lambda0() const {
    return solver.lambda0 > 0.0 ? solver.lambda0 : 1.0 / pt;
  }

  double effective_step0() const {
    return solver.step0 > 0.0 ? solver.step0 : effective_lambda0() / pt;
  }

  void validate() const {
    if (n == 0 || k == 0 || j == 0)
      throw invalid_configuration("N, K and J must all be at least 1");
    if (!(pt > 0.0) || !std::isfinite(pt))
      throw invalid_configuration("PT must be positive and finite");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw invalid_configuration("noise variance must be positive and finite");
    if (num_taps == 0) throw invalid_configuration("num_taps must be at least 1");
    if (num_taps > n)
      throw invalid_configuration("num_taps (" + std::to_string(num_taps) +
                                  ") exceeds the subcarrier count (" + std::to_string(n) + ")");
    if (!q.empty() && q.size() != j)
      throw invalid_configuration("expected " + std::to_string(j) + " relay budgets, got " +
                                  std::to_string(q.size()));
    for (double b : budgets())
      if (!(b > 0.0) || !std::isfinite(b))
        throw invalid_configuration("relay budgets must be positive and finite");
    if (solver.t_max == 0) throw invalid_configuration("t_max must be at least 1");
    if (!(solver.eps_pt >= 0.0) || !(solver.eps_lambda >= 0.0) ||
        !(solver.activation_fraction >= 0.0))
      throw invalid_configuration("solver tolerances must be non-negative");
  }
};

}  // namespace secrelay
