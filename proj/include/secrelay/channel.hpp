#pragma once

// Frequency-selective fading for the BS -> relay -> {user, eavesdropper}
// links and the noise-normalized per-subcarrier gains derived from it.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "secrelay/config.hpp"
#include "secrelay/error.hpp"

namespace secrelay {

using cplx = std::complex<double>;

struct TapProfile {
  std::size_t num_taps = 6;
  double tap_variance = 1.0 / 6.0;
  std::uint64_t seed = 0;

  static TapProfile from(const SystemConfig& cfg) {
    return {cfg.num_taps, cfg.effective_tap_variance(), cfg.seed};
  }
};

/// Complex subcarrier gains. h(i,j): BS -> relay j, g(i,j,k): relay j ->
/// user k, f(i,j): relay j -> eavesdropper.
class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(std::size_t n, std::size_t j, std::size_t k, double sigma2)
      : n_(n), j_(j), k_(k), sigma2_(sigma2), h_(n * j), g_(n * j * k), f_(n * j) {}

  std::size_t n() const { return n_; }
  std::size_t j() const { return j_; }
  std::size_t k() const { return k_; }
  double sigma2() const { return sigma2_; }

  cplx& h(std::size_t i, std::size_t jj) { return h_[i * j_ + jj]; }
  cplx h(std::size_t i, std::size_t jj) const { return h_[i * j_ + jj]; }
  cplx& g(std::size_t i, std::size_t jj, std::size_t kk) { return g_[(i * j_ + jj) * k_ + kk]; }
  cplx g(std::size_t i, std::size_t jj, std::size_t kk) const {
    return g_[(i * j_ + jj) * k_ + kk];
  }
  cplx& f(std::size_t i, std::size_t jj) { return f_[i * j_ + jj]; }
  cplx f(std::size_t i, std::size_t jj) const { return f_[i * j_ + jj]; }

  friend bool operator==(const ChannelRealization&, const ChannelRealization&) = default;

 private:
  std::size_t n_ = 0, j_ = 0, k_ = 0;
  double sigma2_ = 1.0;
  std::vector<cplx> h_, g_, f_;
};

/// Gains of a single (subcarrier, relay, user) triple.
struct LinkGains {
  double a = 0.0;  ///< |h|^2 / sigma^2
  double b = 0.0;  ///< |g|^2 / sigma^2
  double c = 0.0;  ///< |f|^2 / sigma^2

  bool finite() const { return std::isfinite(a) && std::isfinite(b) && std::isfinite(c); }
  bool valid() const { return finite() && a >= 0.0 && b >= 0.0 && c >= 0.0; }
};

class NormalizedGains {
 public:
  NormalizedGains() = default;
  NormalizedGains(std::size_t n, std::size_t j, std::size_t k)
      : n_(n), j_(j), k_(k), a_(n * j), b_(n * j * k), c_(n * j) {}

  std::size_t n() const { return n_; }
  std::size_t j() const { return j_; }
  std::size_t k() const { return k_; }

  double& a(std::size_t i, std::size_t jj) { return a_[i * j_ + jj]; }
  double a(std::size_t i, std::size_t jj) const { return a_[i * j_ + jj]; }
  double& b(std::size_t i, std::size_t jj, std::size_t kk) { return b_[(i * j_ + jj) * k_ + kk]; }
  double b(std::size_t i, std::size_t jj, std::size_t kk) const {
    return b_[(i * j_ + jj) * k_ + kk];
  }
  double& c(std::size_t i, std::size_t jj) { return c_[i * j_ + jj]; }
  double c(std::size_t i, std::size_t jj) const { return c_[i * j_ + jj]; }

  LinkGains at(std::size_t i, std::size_t jj, std::size_t kk) const {
    return {a(i, jj), b(i, jj, kk), c(i, jj)};
  }

 private:
  std::size_t n_ = 0, j_ = 0, k_ = 0;
  std::vector<double> a_, b_, c_;
};

enum class LinkKind : std::uint64_t { bs_relay = 1, relay_user = 2, relay_eve = 3 };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed of the independent stream for one link. Streams are keyed by
/// (kind, relay, user) rather than a running index so that a given link
/// draws the same taps whatever N, K or J the surrounding system has.
inline std::uint64_t link_seed(std::uint64_t seed, LinkKind kind, std::size_t relay,
                               std::size_t user = 0) {
  std::uint64_t s = detail::splitmix64(seed);
  s = detail::splitmix64(s ^ static_cast<std::uint64_t>(kind));
  s = detail::splitmix64(s ^ (static_cast<std::uint64_t>(relay) << 32));
  return detail::splitmix64(s ^ static_cast<std::uint64_t>(user));
}

/// Circularly-symmetric complex Gaussian taps with per-tap variance
/// `variance` (each quadrature carries half of it).
inline std::vector<cplx> draw_taps(std::uint64_t stream_seed, std::size_t num_taps,
                                   double variance) {
  std::mt19937_64 rng(stream_seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  std::vector<cplx> taps(num_taps);
  for (auto& t : taps) {
    const double re = normal(rng);
    const double im = normal(rng);
    t = {re, im};
  }
  return taps;
}

/// N-point DFT of a tap vector zero-padded to length N.
inline std::vector<cplx> taps_to_subcarriers(std::span<const cplx> taps, std::size_t n) {
  std::vector<cplx> out(n);
  const double w = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc{0.0, 0.0};
    for (std::size_t l = 0; l < taps.size(); ++l) {
      // (i*l) mod n keeps the angle small for large i*l.
      const double ang = w * static_cast<double>((i * l) % n);
      acc += taps[l] * cplx(std::cos(ang), std::sin(ang));
    }
    out[i] = acc;
  }
  return out;
}

inline ChannelRealization generate_channels(const SystemConfig& cfg, const TapProfile& profile) {
  if (profile.num_taps == 0) throw invalid_configuration("num_taps must be at least 1");
  if (profile.num_taps > cfg.n)
    throw invalid_configuration("num_taps exceeds the number of subcarriers");
  if (!(profile.tap_variance > 0.0)) throw invalid_configuration("tap variance must be positive");
  if (!(cfg.sigma2 > 0.0)) throw invalid_configuration("noise variance must be positive");
  if (cfg.j == 0 || cfg.k == 0) throw invalid_configuration("J and K must be at least 1");

  ChannelRealization ch(cfg.n, cfg.j, cfg.k, cfg.sigma2);
  auto link = [&](LinkKind kind, std::size_t relay, std::size_t user) {
    const auto taps = draw_taps(link_seed(profile.seed, kind, relay, user), profile.num_taps,
                                profile.tap_variance);
    return taps_to_subcarriers(taps, cfg.n);
  };
  for (std::size_t jj = 0; jj < cfg.j; ++jj) {
    const auto h = link(LinkKind::bs_relay, jj, 0);
    const auto f = link(LinkKind::relay_eve, jj, 0);
    for (std::size_t i = 0; i < cfg.n; ++i) {
      ch.h(i, jj) = h[i];
      ch.f(i, jj) = f[i];
    }
    for (std::size_t kk = 0; kk < cfg.k; ++kk) {
      const auto g = link(LinkKind::relay_user, jj, kk);
      for (std::size_t i = 0; i < cfg.n; ++i) ch.g(i, jj, kk) = g[i];
    }
  }
  return ch;
}

inline ChannelRealization generate_channels(const SystemConfig& cfg) {
  return generate_channels(cfg, TapProfile::from(cfg));
}

inline NormalizedGains normalize_gains(const ChannelRealization& ch) {
  NormalizedGains out(ch.n(), ch.j(), ch.k());
  const double s2 = ch.sigma2();
  for (std::size_t i = 0; i < ch.n(); ++i) {
    for (std::size_t jj = 0; jj < ch.j(); ++jj) {
      out.a(i, jj) = std::norm(ch.h(i, jj)) / s2;
      out.c(i, jj) = std::norm(ch.f(i, jj)) / s2;
      for (std::size_t kk = 0; kk < ch.k(); ++kk) out.b(i, jj, kk) = std::norm(ch.g(i, jj, kk)) / s2;
    }
  }
  return out;
}

}  // namespace secrelay
