#pragma once

// Link SNRs, AF amplification and secrecy rates of the two-hop link.
// Powers are absolute; gains are already divided by the noise variance.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "secrelay/allocation.hpp"
#include "secrelay/channel.hpp"
#include "secrelay/error.hpp"

namespace secrelay {

/// AF gain sqrt(q / (p |h|^2 + sigma^2)).
inline double amplification_factor(double p, double q, double h_gain_sq, double sigma2) {
  return std::sqrt(q / (p * h_gain_sq + sigma2));
}

struct SnrPair {
  double user = 0.0;
  double eve = 0.0;
};

/// Exact end-to-end SNRs at the user and at the eavesdropper. Evaluated in
/// noise-normalized units (sigma^2 = 1), which leaves both ratios unchanged.
inline SnrPair snr_pair(const LinkGains& g, double p, double q) {
  const double amp2 = std::pow(amplification_factor(p, q, g.a, 1.0), 2);
  auto snr = [&](double second_hop) {
    return amp2 * p * second_hop * g.a / (amp2 * second_hop + 1.0);
  };
  return {snr(g.b), snr(g.c)};
}

/// High-SNR secrecy rate without clipping and without the p = 0 convention:
/// 1/2 log2( b(1 + a p + q c) / ((1 + a p + q b) c) ). With c = 0 the
/// eavesdropper costs nothing and the rate is 1/2 log2(1 + SNR_user).
inline double high_snr_secrecy_rate(const LinkGains& g, double p, double q) {
  if (g.c == 0.0) return 0.5 * std::log2(1.0 + snr_pair(g, p, q).user);
  const double zeta = 1.0 + g.a * p;
  return 0.5 * (std::log2(g.b / g.c) + std::log2((zeta + q * g.c) / (zeta + q * g.b)));
}

/// Secrecy rate in bits/s/Hz over the two-slot transmission, clipped at 0;
/// zero when the BS does not transmit.
inline double secrecy_rate(const LinkGains& g, double p, double q) {
  if (!(p > 0.0)) return 0.0;
  if (g.b == 0.0) return 0.0;
  return std::max(0.0, high_snr_secrecy_rate(g, p, q));
}

/// Sum over all subcarriers of the rate of their assigned triple.
inline double sum_secrecy_rate(const NormalizedGains& gains, const Assignment& assign,
                               const PowerAllocation& power) {
  if (assign.n() != gains.n() || assign.j() != gains.j() || assign.k() != gains.k())
    throw invalid_assignment("assignment dimensions do not match the gains");
  if (power.p.size() != gains.n() || power.relays != gains.j())
    throw invalid_input("power allocation dimensions do not match the gains");
  const auto pairs = assign.pairs();
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [jj, kk] = pairs[i];
    total += secrecy_rate(gains.at(i, jj, kk), power.p[i], power.relay(i, jj));
  }
  return total;
}

}  // namespace secrelay
