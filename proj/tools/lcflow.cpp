// lcflow: command-line driver for the solver, the twin experiment and the lemma harness.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical divergence,
// 4 verification failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lcflow/harness.hpp"
#include "lcflow/io.hpp"
#include "lcflow/littlewood_paley.hpp"
#include "lcflow/osgood.hpp"

namespace {

using namespace lcflow;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_divergence = 3;
constexpr int exit_verification = 4;

struct Globals {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

ExperimentConfig make_config(const Globals& g, Mode mode) {
  ExperimentConfig cfg = g.config_path.empty() ? parse_config("", mode) : load_config(g.config_path, mode);
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (g.seed) {
    cfg.initial.seed = *g.seed;
    cfg.verify.seed = *g.seed;
  }
  cfg.validate();
  return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_run(const Globals& g) {
  const auto cfg = make_config(g, Mode::run);
  const RunResult res = run_experiment(cfg);
  if (!g.quiet) {
    const auto& first = res.energy.front().record;
    const auto& last = res.energy.back().record;
    std::printf("run: %zu steps, N=%d, dt=%g\n", cfg.solver.steps(), cfg.solver.grid.n, cfg.solver.dt);
    std::printf("  E(0) = %.10g  E(T) = %.10g  max energy-law residual = %.3e\n", first.e_total, last.e_total,
                res.max_residual);
    std::printf("  traces in %s\n", cfg.out_dir.c_str());
  }
  return exit_ok;
}

int cmd_twin(const Globals& g) {
  const auto cfg = make_config(g, Mode::twin);
  const TwinResult res = twin_experiment(cfg);
  if (!g.quiet) {
    std::printf("twin: %zu samples, max Phi = %.3e\n", res.records.size(), res.max_phi);
    std::printf("  master inequality: holds=%s  C_fit=%.6g  max violation=%.3e\n", res.report.holds ? "yes" : "no",
                res.report.c_fit, res.report.max_violation);
  }
  return res.report.holds ? exit_ok : exit_verification;
}

void write_ratio_rows(CsvWriter& csv, const RatioReport& r) {
  for (const auto& row : r.rows) {
    csv.cells({r.lemma, row.family + " " + row.param, csv_number(row.ratio_max), csv_number(row.ratio_median),
               row.verdict ? "pass" : "fail"});
  }
}

void write_identity_row(CsvWriter& csv, const IdentityReport& r) {
  csv.cells({r.name, "relative_residual", csv_number(r.max_relative), csv_number(r.median_relative),
             r.passes() ? "pass" : "fail"});
}

bool run_osgood(const ExperimentConfig& cfg, bool quiet) {
  const std::vector<double> eps{1e-6, 1e-12, 1e-24, 1e-48};
  const Certificate mu = osgood_divergence_certificate(eps, osgood_mu);
  const Certificate ctl = osgood_divergence_certificate(eps, log_squared_modulus);
  CsvWriter csv(out_path(cfg, "osgood.csv"), {"eps", "I_mu", "increment_mu", "I_control", "increment_control"});
  for (std::size_t k = 0; k < eps.size(); ++k) {
    csv.row({eps[k], mu.rows[k].integral, mu.rows[k].increment, ctl.rows[k].integral, ctl.rows[k].increment});
  }
  if (!quiet) {
    std::printf("osgood: integral of 1/mu over [eps, 1]\n");
    for (std::size_t k = 0; k < eps.size(); ++k) {
      std::printf("  eps=%-7g I_mu=%.12f (+%.3e)  I_control=%.12f (+%.3e)\n", eps[k], mu.rows[k].integral,
                  mu.rows[k].increment, ctl.rows[k].integral, ctl.rows[k].increment);
    }
    std::printf("  mu: %s\n", mu.strictly_increasing ? "strictly increasing" : "NOT strictly increasing");
  }
  return mu.strictly_increasing;
}

int cmd_verify(const Globals& g, const std::string& which) {
  const auto cfg = make_config(g, Mode::verify);
  ensure_dir(cfg.out_dir);
  EnsembleSpec spec;
  spec.grid = cfg.solver.grid;
  spec.seed = cfg.verify.seed;
  spec.n_trials = cfg.verify.trials;
  spec.decay = cfg.verify.decay;
  const bool all = which == "all";
  bool ok = true;
  std::optional<CsvWriter> csv;
  auto sheet = [&]() -> CsvWriter& {
    if (!csv) csv.emplace(out_path(cfg, "verify.csv"),
                          std::vector<std::string>{"lemma", "param", "ratio_max", "ratio_median", "verdict"});
    return *csv;
  };
  auto ratio = [&](const char* name, auto fn) {
    if (!all && which != name) return;
    const RatioReport r = fn();
    write_ratio_rows(sheet(), r);
    ok = ok && r.verdict;
    if (!g.quiet) {
      std::printf("%-11s %s  uniformity=%.3g (limit %g)  max ratio=%.3g (cap %g)\n", r.lemma.c_str(),
                  r.verdict ? "pass" : "FAIL", r.uniformity, uniformity_limit, r.max_ratio, r.cap);
    }
  };
  auto identity = [&](const char* name, auto fn) {
    if (!all && which != name) return;
    const IdentityReport r = fn();
    write_identity_row(sheet(), r);
    ok = ok && r.passes();
    if (!g.quiet) {
      std::printf("%-11s %s  max relative residual=%.3e (tolerance %g)\n", r.name.c_str(), r.passes() ? "pass" : "FAIL",
                  r.max_relative, r.tolerance);
    }
  };
  ratio("bernstein", [&] { return verify_bernstein(spec); });
  ratio("snlinf", [&] { return verify_sn_linf(spec); });
  ratio("sobolev", [&] { return verify_sobolev_sqrtp(spec); });
  ratio("product", [&] { return verify_product_rules(spec); });
  ratio("commutator", [&] { return verify_commutator(spec); });
  ratio("tails", [&] { return verify_tail_bounds(spec); });
  identity("cancel", [&] { return verify_cancellation(spec); });
  identity("skew", [&] { return verify_skew_symmetry(spec); });
  if (all || which == "osgood") ok = run_osgood(cfg, g.quiet) && ok;
  return ok ? exit_ok : exit_verification;
}

int cmd_decompose(const Globals& g, const std::string& input, int component) {
  const auto cfg = make_config(g, Mode::decompose);
  ensure_dir(cfg.out_dir);
  if (component < 0 || component > 3) throw ConfigError("--component must be 0..3 (u1, u2, d1, d2)");
  State s = input.empty() ? generate_initial(cfg.initial, cfg.solver.grid) : load_state(input, cfg.solver.grid);
  const SpectralField* fields[4] = {&s.u[0], &s.u[1], &s.d[0], &s.d[1]};
  const SpectralField& f = *fields[component];
  const auto& part = DyadicPartition::shared(f.grid());
  CsvWriter csv(out_path(cfg, "decompose.csv"), {"q", "L2", "L2_weighted"});
  for (int q = -1; q <= part.q_max(); ++q) {
    const double l2 = l2_norm(delta_q(f, q, part));
    csv.row({static_cast<double>(q), l2, std::pow(2.0, -0.5 * q) * l2});
    if (!g.quiet) std::printf("q=%2d  |Delta_q f|=%.6e\n", q, l2);
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral nematic liquid-crystal flow on the 2-torus"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "Sectioned key=value configuration file");
  app.add_option("--out", g.out_dir, "Output directory (overrides [output] dir)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&g](const std::uint64_t& s) { g.seed = s; }, "Seed for initial data and ensembles");
  app.add_flag("--quiet", g.quiet, "Suppress the human-readable summary");

  auto* run = app.add_subcommand("run", "Integrate from the configured initial data; write energy traces");
  auto* twin = app.add_subcommand("twin", "Run two solver instances and check the master inequality");
  auto* verify = app.add_subcommand("verify", "Ensemble checks of the harmonic-analysis inequalities");
  std::string which = "all";
  verify->add_option("which", which, "Which check")
      ->check(CLI::IsMember(
          {"all", "bernstein", "snlinf", "sobolev", "commutator", "product", "tails", "cancel", "skew", "osgood"}));
  auto* decompose = app.add_subcommand("decompose", "Dyadic block energies of one field component");
  std::string input;
  int component = 2;
  decompose->add_option("--input", input, "LCSF snapshot (default: the configured initial data)");
  decompose->add_option("--component", component, "Component index: 0,1 = u; 2,3 = d")->check(CLI::Range(0, 3));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run) return cmd_run(g);
    if (*twin) return cmd_twin(g);
    if (*verify) return cmd_verify(g, which);
    if (*decompose) return cmd_decompose(g, input, component);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "lcflow: %s\n", e.what());
    return exit_divergence;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "lcflow: %s\n", e.what());
    return exit_divergence;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "lcflow: configuration error: %s\n", e.what());
    return exit_config;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "lcflow: %s\n", e.what());
    return exit_config;
  } catch (const IoError& e) {
    std::fprintf(stderr, "lcflow: %s\n", e.what());
    return exit_config;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "lcflow: %s\n", e.what());
    return exit_config;
  }
  return exit_config;
}
