#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secrelay/error.hpp"

namespace secrelay {

/// The (relay, user) pair serving one subcarrier.
struct RelayUser {
  std::size_t relay = 0;
  std::size_t user = 0;
  friend bool operator==(const RelayUser&, const RelayUser&) = default;
};

/// Binary subcarrier/relay/user indicator eta(i,j,k). alpha and beta are
/// derived from it. A well-formed assignment has exactly one set entry per
/// subcarrier; the tensor form can also hold malformed ones so that
/// evaluators can reject them.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::size_t n, std::size_t j, std::size_t k) : n_(n), j_(j), k_(k), eta_(n * j * k, 0) {}

  static Assignment from_pairs(std::size_t j, std::size_t k, const std::vector<RelayUser>& pairs) {
    Assignment a(pairs.size(), j, k);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].relay >= j || pairs[i].user >= k)
        throw invalid_assignment("pair index out of range on subcarrier " + std::to_string(i));
      a.set(i, pairs[i].relay, pairs[i].user, true);
    }
    return a;
  }

  std::size_t n() const { return n_; }
  std::size_t j() const { return j_; }
  std::size_t k() const { return k_; }

  bool eta(std::size_t i, std::size_t jj, std::size_t kk) const {
    return eta_[(i * j_ + jj) * k_ + kk] != 0;
  }
  void set(std::size_t i, std::size_t jj, std::size_t kk, bool v) {
    eta_[(i * j_ + jj) * k_ + kk] = v ? 1 : 0;
  }

  int alpha(std::size_t i, std::size_t kk) const {
    int s = 0;
    for (std::size_t jj = 0; jj < j_; ++jj) s += eta(i, jj, kk) ? 1 : 0;
    return s;
  }

  int beta(std::size_t jj, std::size_t kk) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (eta(i, jj, kk)) return 1;
    return 0;
  }

  std::size_t count(std::size_t i) const {
    std::size_t s = 0;
    for (std::size_t e = i * j_ * k_; e < (i + 1) * j_ * k_; ++e) s += eta_[e];
    return s;
  }

  bool exclusive() const {
    for (std::size_t i = 0; i < n_; ++i)
      if (count(i) != 1) return false;
    return true;
  }

  void validate() const {
    for (std::size_t i = 0; i < n_; ++i)
      if (count(i) != 1)
        throw invalid_assignment("subcarrier " + std::to_string(i) + " is assigned to " +
                                 std::to_string(count(i)) + " pairs, expected exactly 1");
  }

  /// The serving pair of every subcarrier. Throws on a non-exclusive assignment.
  std::vector<RelayUser> pairs() const {
    validate();
    std::vector<RelayUser> out(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t jj = 0; jj < j_; ++jj)
        for (std::size_t kk = 0; kk < k_; ++kk)
          if (eta(i, jj, kk)) out[i] = {jj, kk};
    return out;
  }

  /// Subcarriers per relay (N_j).
  std::vector<std::size_t> relay_loads() const {
    std::vector<std::size_t> loads(j_, 0);
    for (const auto& p : pairs()) ++loads[p.relay];
    return loads;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::size_t n_ = 0, j_ = 0, k_ = 0;
  std::vector<std::uint8_t> eta_;
};

/// BS power per subcarrier and relay power per (subcarrier, relay).
struct PowerAllocation {
  std::vector<double> p;
  std::vector<double> q;  ///< row-major [i][j]
  std::size_t relays = 0;

  PowerAllocation() = default;
  PowerAllocation(std::size_t n, std::size_t j) : p(n, 0.0), q(n * j, 0.0), relays(j) {}

  double& relay(std::size_t i, std::size_t jj) { return q[i * relays + jj]; }
  double relay(std::size_t i, std::size_t jj) const { return q[i * relays + jj]; }

  double bs_total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
};

/// One subgradient iteration: the price used, the resulting power demand and
/// the dual function value at that price.
struct DualRecord {
  double lambda = 0.0;
  double power_sum = 0.0;
  double dual_value = 0.0;
};

enum class Scheme { opt, subopt, nonopt };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::opt:
      return "opt";
    case Scheme::subopt:
      return "subopt";
    case Scheme::nonopt:
      return "nonopt";
  }
  return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view s) {
  if (s == "opt") return Scheme::opt;
  if (s == "subopt") return Scheme::subopt;
  if (s == "nonopt") return Scheme::nonopt;
  return std::nullopt;
}

struct AllocationResult {
  Scheme scheme = Scheme::opt;
  Assignment assignment;
  PowerAllocation power;
  double sum_rate = 0.0;  ///< bits/s/Hz
  bool converged = false;
  std::size_t iterations = 0;
  double lambda = 0.0;  ///< final price of the loop that produced `power`
  std::optional<std::vector<DualRecord>> dual_history;
  /// Dual function value at the recovery price with the reported relay
  /// loads held fixed; an upper bound on any assignment with those loads.
  std::optional<double> dual_bound;
};

}  // namespace secrelay
