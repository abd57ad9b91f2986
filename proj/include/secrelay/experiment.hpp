#pragma once

// Monte Carlo sweeps over PT or K, aggregated per (value, scheme), and
// their CSV / trace / gnuplot outputs.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "secrelay/allocation.hpp"
#include "secrelay/channel.hpp"
#include "secrelay/config.hpp"
#include "secrelay/error.hpp"
#include "secrelay/schemes.hpp"

namespace secrelay {

enum class SweepVar { pt, k };

inline std::string_view to_string(SweepVar v) { return v == SweepVar::pt ? "pt" : "k"; }

inline std::optional<SweepVar> parse_sweep_var(std::string_view s) {
  if (s == "pt") return SweepVar::pt;
  if (s == "k") return SweepVar::k;
  return std::nullopt;
}

struct SweepSpec {
  SweepVar variable = SweepVar::pt;
  std::vector<double> values;
  std::size_t trials = 100;
  std::vector<Scheme> schemes{Scheme::opt, Scheme::subopt, Scheme::nonopt};

  void validate() const {
    if (values.empty()) throw invalid_configuration("sweep needs at least one value");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1]))
        throw invalid_configuration("sweep values must be strictly increasing");
    if (trials == 0) throw invalid_configuration("trials must be at least 1");
    if (schemes.empty()) throw invalid_configuration("no scheme selected");
    if (variable == SweepVar::k)
      for (double v : values)
        if (v < 1.0 || v != std::floor(v))
          throw invalid_configuration("K values must be positive integers");
  }
};

/// Parses "a:b" (unit step), "a:b:step" or a comma-separated list.
inline std::vector<double> parse_values(std::string_view text) {
  auto to_double = [](std::string_view s) {
    std::string tmp(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tmp, &used);
    } catch (const std::exception&) {
      throw invalid_configuration("not a number: '" + tmp + "'");
    }
    if (used != tmp.size()) throw invalid_configuration("not a number: '" + tmp + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const auto pos = text.find(':', start);
      parts.push_back(to_double(text.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) throw invalid_configuration("range must be a:b or a:b:step");
    const double lo = parts[0], hi = parts[1], step = parts.size() == 3 ? parts[2] : 1.0;
    if (!(step > 0.0) || hi < lo) throw invalid_configuration("empty or descending range");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + double(i) * step);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    out.push_back(to_double(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<Scheme> parse_schemes(std::string_view text) {
  std::vector<Scheme> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const auto tok = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (!tok.empty()) {
      const auto s = parse_scheme(tok);
      if (!s) throw invalid_configuration("unknown scheme '" + std::string(tok) + "'");
      if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Seeds derived from the base seed and the trial index only, so a trial
/// sees the same channels at every sweep value and in any execution order.
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t trial) {
  return detail::splitmix64(base ^ detail::splitmix64(0x7219a1ULL + trial));
}

inline std::uint64_t assignment_seed(std::uint64_t trial_seed_value) {
  return detail::splitmix64(trial_seed_value ^ 0xa551c0ffeeULL);
}

inline SystemConfig config_at(const SystemConfig& base, SweepVar var, double value) {
  SystemConfig cfg = base;
  if (var == SweepVar::pt)
    cfg.pt = value;
  else
    cfg.k = static_cast<std::size_t>(value);
  return cfg;
}

struct TrialOutcome {
  std::vector<AllocationResult> results;  ///< in the order of the requested schemes
};

/// One Monte Carlo trial: a fresh realization and every requested scheme on it.
inline TrialOutcome run_trial(const SystemConfig& cfg, std::size_t trial, const std::vector<Scheme>& schemes) {
  SystemConfig c = cfg;
  c.seed = trial_seed(cfg.seed, trial);
  const auto gains = normalize_gains(generate_channels(c));
  TrialOutcome out;
  for (Scheme s : schemes) out.results.push_back(run_scheme(s, c, gains, assignment_seed(c.seed)));
  return out;
}

struct SweepRow {
  SweepVar variable = SweepVar::pt;
  double value = 0.0;
  Scheme scheme = Scheme::opt;
  double mean_rate = 0.0;
  double stderr_rate = 0.0;
  std::size_t trials = 0;
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// Solves of the iterative schemes that hit t_max, and their total count.
  std::size_t unconverged = 0;
  std::size_t iterative_solves = 0;
};

namespace detail {

inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace detail

struct MeanStderr {
  double mean = 0.0;
  double stderr_value = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const double mean = detail::pairwise_sum(x.data(), n) / double(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (x[i] - mean) * (x[i] - mean);
  const double var = detail::pairwise_sum(dev.data(), n) / double(n - 1);
  return {mean, std::sqrt(var / double(n))};
}

/// Runs every (value, trial) job on up to `jobs` threads. Results land in
/// fixed slots, so the table does not depend on scheduling.
inline SweepTable run_sweep(const SystemConfig& base, const SweepSpec& spec, std::size_t jobs = 1,
                            std::vector<std::vector<TrialOutcome>>* raw = nullptr) {
  spec.validate();
  for (double v : spec.values) config_at(base, spec.variable, v).validate();

  const std::size_t nv = spec.values.size(), nt = spec.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(nv, std::vector<TrialOutcome>(nt));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(jobs, 1));
  auto worker = [&](std::size_t w) {
    try {
      for (std::size_t job = next++; job < nv * nt; job = next++) {
        const std::size_t vi = job / nt, ti = job % nt;
        outcomes[vi][ti] = run_trial(config_at(base, spec.variable, spec.values[vi]), ti, spec.schemes);
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = nv * nt;
    }
  };
  if (jobs <= 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SweepTable table;
  for (std::size_t vi = 0; vi < nv; ++vi) {
    for (std::size_t si = 0; si < spec.schemes.size(); ++si) {
      std::vector<double> rates(nt);
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const auto& r = outcomes[vi][ti].results[si];
        rates[ti] = r.sum_rate;
        if (r.scheme != Scheme::nonopt) {
          ++table.iterative_solves;
          if (!r.converged) ++table.unconverged;
        }
      }
      const auto ms = mean_stderr(rates);
      table.rows.push_back({spec.variable, spec.values[vi], spec.schemes[si], ms.mean, ms.stderr_value, nt});
    }
  }
  if (raw) *raw = std::move(outcomes);
  return table;
}

namespace detail {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

inline void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw io_error("write to '" + path + "' failed");
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "sweep_var,value,scheme,mean_rate,stderr,trials";

inline std::string to_csv(const SweepTable& table) {
  if (table.rows.empty()) throw invalid_configuration("refusing to write an empty table");
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& r : table.rows) {
    s += to_string(r.variable);
    s += ',' + detail::format_double(r.value);
    s += ',';
    s += to_string(r.scheme);
    s += ',' + detail::format_double(r.mean_rate);
    s += ',' + detail::format_double(r.stderr_rate);
    s += ',' + std::to_string(r.trials) + '\n';
  }
  return s;
}

inline void emit_csv(const SweepTable& table, const std::string& path) {
  const auto text = to_csv(table);
  auto out = detail::open_for_write(path);
  out << text;
  detail::finish_write(out, path);
}

inline SweepTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw invalid_input("missing or unexpected CSV header");
  SweepTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw invalid_input("expected 6 CSV fields: " + line);
    const auto var = parse_sweep_var(f[0]);
    const auto sch = parse_scheme(f[2]);
    if (!var || !sch) throw invalid_input("bad CSV row: " + line);
    t.rows.push_back({*var, std::stod(f[1]), *sch, std::stod(f[3]), std::stod(f[4]),
                      static_cast<std::size_t>(std::stoull(f[5]))});
  }
  return t;
}

inline SweepTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  return parse_csv(in);
}

inline void emit_convergence_trace(const AllocationResult& result, const std::string& path) {
  if (!result.dual_history || result.dual_history->empty())
    throw invalid_input("result carries no dual history to trace");
  std::string s = "t,lambda,power_sum,dual_value\n";
  std::size_t t = 1;
  for (const auto& rec : *result.dual_history) {
    s += std::to_string(t++) + ',' + detail::format_double(rec.lambda) + ',' +
         detail::format_double(rec.power_sum) + ',' + detail::format_double(rec.dual_value) + '\n';
  }
  auto out = detail::open_for_write(path);
  out << s;
  detail::finish_write(out, path);
}

/// Gnuplot script plotting mean rate with error bars per scheme.
inline std::string gnuplot_script(const SweepTable& table, const std::string& csv_path) {
  std::vector<Scheme> schemes;
  for (const auto& r : table.rows)
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
  const bool pt = !table.rows.empty() && table.rows.front().variable == SweepVar::pt;
  std::string s;
  s += "set datafile separator ','\n";
  s += "set key top left\n";
  s += std::string("set xlabel '") + (pt ? "Total transmit power PT" : "Number of users K") + "'\n";
  s += "set ylabel 'Sum secrecy rate (bits/s/Hz)'\n";
  s += "plot ";
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const std::string name(to_string(schemes[i]));
    if (i) s += ", \\\n     ";
    s += "'" + csv_path + "' using 2:(strcol(3) eq '" + name + "' ? $4 : 1/0):5 with yerrorlines title '" +
         name + "'";
  }
  s += "\n";
  return s;
}

}  // namespace secrelay
