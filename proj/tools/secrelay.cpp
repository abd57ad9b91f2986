#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "secrelay/secrelay.hpp"

namespace {

enum ExitCode : int { ok = 0, usage = 2, io = 3, unconverged = 4, internal = 5 };

struct SweepOptions {
  std::string var = "pt";
  std::string values = "1:20";
  std::size_t trials = 100;
  std::string schemes = "opt,subopt,nonopt";
  std::string out = "results.csv";
  std::size_t jobs = 1;
  std::string trace;
  std::string gnuplot;
  double max_unconverged = 0.05;
};

void print_summary(const secrelay::SweepTable& t, std::ostream& os) {
  char line[160];
  std::snprintf(line, sizeof line, "%-4s %10s  %-7s %14s %12s %7s\n", "var", "value", "scheme", "mean_rate",
                "stderr", "trials");
  os << line;
  for (const auto& r : t.rows) {
    std::snprintf(line, sizeof line, "%-4s %10g  %-7s %14.6f %12.6f %7zu\n",
                  std::string(secrelay::to_string(r.variable)).c_str(), r.value,
                  std::string(secrelay::to_string(r.scheme)).c_str(), r.mean_rate, r.stderr_rate, r.trials);
    os << line;
  }
  if (t.iterative_solves > 0)
    os << "unconverged solves: " << t.unconverged << " of " << t.iterative_solves << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw secrelay::io_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw secrelay::io_error("write to '" + path + "' failed");
}

int run_sweep_command(secrelay::SystemConfig cfg, const SweepOptions& o) {
  using namespace secrelay;
  if (const char* env = std::getenv("SECRELAY_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw invalid_configuration("SECRELAY_SEED is not an unsigned integer");
    cfg.seed = v;
  }

  SweepSpec spec;
  const auto var = parse_sweep_var(o.var);
  if (!var) throw invalid_configuration("--var must be pt or k");
  spec.variable = *var;
  spec.values = parse_values(o.values);
  spec.trials = o.trials;
  spec.schemes = parse_schemes(o.schemes);
  spec.validate();
  if (!(o.max_unconverged >= 0.0 && o.max_unconverged <= 1.0))
    throw invalid_configuration("--max-unconverged must lie in [0, 1]");

  const std::size_t jobs = o.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.jobs;
  const auto table = run_sweep(cfg, spec, jobs);
  emit_csv(table, o.out);
  print_summary(table, std::cout);

  if (!o.trace.empty()) {
    Scheme traced = Scheme::nonopt;
    for (Scheme s : {Scheme::opt, Scheme::subopt})
      if (std::find(spec.schemes.begin(), spec.schemes.end(), s) != spec.schemes.end()) {
        traced = s;
        break;
      }
    if (traced == Scheme::nonopt) throw invalid_configuration("--trace needs opt or subopt among the schemes");
    const auto outcome = run_trial(config_at(cfg, spec.variable, spec.values.front()), 0, {traced});
    emit_convergence_trace(outcome.results.front(), o.trace);
  }
  if (!o.gnuplot.empty()) write_text(o.gnuplot, gnuplot_script(table, o.out));

  if (table.iterative_solves > 0) {
    const double frac = double(table.unconverged) / double(table.iterative_solves);
    if (frac > o.max_unconverged) {
      std::cerr << "error: " << table.unconverged << " of " << table.iterative_solves
                << " solves hit t_max (limit " << o.max_unconverged << ")\n";
      return unconverged;
    }
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sum secrecy rate allocation for OFDMA amplify-and-forward relay networks"};
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);

  secrelay::SystemConfig cfg;
  SweepOptions o;
  std::vector<double> q;

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over PT or K; writes a CSV table");
  sweep->configurable();
  sweep->add_option("--var", o.var, "Swept variable")->check(CLI::IsMember({"pt", "k"}))->capture_default_str();
  sweep->add_option("--values", o.values, "a:b, a:b:step or a comma list")->capture_default_str();
  sweep->add_option("--n", cfg.n, "Subcarriers")->capture_default_str();
  sweep->add_option("--k", cfg.k, "Users")->capture_default_str();
  sweep->add_option("--j", cfg.j, "Relays")->capture_default_str();
  sweep->add_option("--pt", cfg.pt, "BS power budget when sweeping K")->capture_default_str();
  sweep->add_option("--q", q, "Per-relay budgets (one value for all, or J values)")->delimiter(',');
  sweep->add_option("--sigma2", cfg.sigma2, "Noise variance")->capture_default_str();
  sweep->add_option("--taps", cfg.num_taps, "Channel taps")->capture_default_str();
  sweep->add_option("--trials", o.trials, "Trials per sweep value")->capture_default_str();
  sweep->add_option("--seed", cfg.seed, "Base seed (SECRELAY_SEED overrides)")->capture_default_str();
  sweep->add_option("--schemes", o.schemes, "Comma list of opt, subopt, nonopt")->capture_default_str();
  sweep->add_option("--out", o.out, "Output CSV path")->capture_default_str();
  sweep->add_option("--jobs", o.jobs, "Worker threads, 0 for all cores")->capture_default_str();
  sweep->add_option("--trace", o.trace, "Write the dual trace of trial 0 at the first value");
  sweep->add_option("--gnuplot", o.gnuplot, "Write a gnuplot script for the CSV");
  sweep->add_option("--max-unconverged", o.max_unconverged,
                    "Largest tolerated fraction of solves that hit t_max before exiting with 4")
      ->capture_default_str();
  sweep->add_option("--t-max", cfg.solver.t_max, "Subgradient iteration cap")->capture_default_str();
  sweep->add_option("--eps-pt", cfg.solver.eps_pt, "Relative BS budget stopping band")->capture_default_str();
  sweep->add_option("--eps-lambda", cfg.solver.eps_lambda, "Multiplier change stopping threshold")
      ->capture_default_str();
  sweep->add_option("--lambda0", cfg.solver.lambda0, "Initial multiplier, 0 for 1/PT");
  sweep->add_option("--step0", cfg.solver.step0, "Step scale, 0 for lambda0/PT");
  sweep->add_option("--activation", cfg.solver.activation_fraction,
                    "Power for switched-off active subcarriers as a fraction of PT/N")
      ->capture_default_str();
  sweep->add_flag("!--no-refine", cfg.solver.refine_relay_loads, "Skip the relay-load coordinate pass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return e.get_name() == "FileError" ? io : usage;
  }

  try {
    if (q.size() == 1)
      cfg.relay_budget = q.front();
    else
      cfg.q = q;
    return run_sweep_command(cfg, o);
  } catch (const secrelay::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io;
  } catch (const secrelay::invalid_configuration& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return internal;
  }
}
