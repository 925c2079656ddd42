// Acceptance run: one PASS/FAIL line per criterion, thresholds fixed below.
// Exit status is 0 only if every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lcflow/harness.hpp"
#include "lcflow/io.hpp"
#include "lcflow/littlewood_paley.hpp"
#include "lcflow/osgood.hpp"
#include "lcflow/run.hpp"

using namespace lcflow;

namespace {

namespace tol {
constexpr double spectral_rel = 1e-12;
constexpr double spectral_seconds = 30.0;
constexpr double energy_budget = 5.0;  // residual <= budget * dt * E(0)
constexpr double halving_lo = 1.7, halving_hi = 2.3;
constexpr double energy_seconds = 300.0;
constexpr double twin_phi = 1e-20;
constexpr double ordering_slack = 1.05;
constexpr double control_stable = 1e-6;
constexpr double identity_rel = 1e-11;
constexpr double lemma_seconds = 600.0;
constexpr double ode_rel = 1e-6;
constexpr double steady_abs = 1e-14;
}  // namespace tol

constexpr int grid_n = 64;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s  [%d] %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(const std::string& what) {
  std::printf("INFO      %s\n", what.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double rel_l2(const SpectralField& a, const SpectralField& b, double scale) { return l2_norm(a - b) / scale; }

void spectral_exactness() {
  const GridSpec g{grid_n};
  const auto& part = DyadicPartition::shared(g);
  Stopwatch sw;
  double unity = 0.0, ortho = 0.0, bony = 0.0, blocks = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + trial);
    const SpectralField f = random_field(g, rng, 0.5);
    const SpectralField h = random_field(g, rng, 0.5);
    const double fn = l2_norm(f);

    SpectralField sum(g);
    std::vector<SpectralField> dq;
    for (int q = -1; q <= part.q_max(); ++q) {
      dq.push_back(delta_q(f, q, part));
      sum += dq.back();
    }
    unity = std::max(unity, rel_l2(sum, f, fn));
    for (int q = -1; q <= part.q_max(); ++q) {
      for (int p = q + 2; p <= part.q_max(); ++p) {
        ortho = std::max(ortho, l2_norm(delta_q(dq[static_cast<std::size_t>(q + 1)], p, part)) / fn);
      }
    }

    const SpectralField fh = product(f, h);
    const double fhn = l2_norm(fh);
    BlockCache cache(f, h, part);
    bony = std::max(bony, rel_l2(bony_split(cache).sum(), fh, fhn));
    for (int q = -1; q <= part.q_max(); ++q) {
      blocks = std::max(blocks, rel_l2(bony_block_decompose(cache, q).sum(), delta_q(fh, q, part), fhn));
    }
  }
  const double secs = sw.seconds();
  const double worst = std::max({unity, ortho, bony, blocks});
  report(1, worst <= tol::spectral_rel && secs < tol::spectral_seconds,
         fmt("spectral exactness, 100 fields N=64: unity %.1e, quasi-orth %.1e, Bony %.1e, blocks %.1e "
             "(tol %.0e); %.1f s (limit %.0f s)",
             unity, ortho, bony, blocks, tol::spectral_rel, secs, tol::spectral_seconds));
}

void energy_inequality() {
  const GridSpec g{grid_n};
  Stopwatch sw;
  double worst_budget = 0.0;  // max residual / (dt E0)
  double min_factor = INFINITY, max_factor = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    InitialSpec spec;
    spec.seed = seed;
    spec.decay = 4.0;
    const State s0 = generate_initial(spec, g);
    const double e0 = total_energy(s0).e_total;
    double res[2];
    for (int k = 0; k < 2; ++k) {
      SolverConfig cfg;
      cfg.grid = g;
      cfg.dt = k == 0 ? 1e-3 : 5e-4;
      cfg.t_end = 1.0;
      res[k] = run(cfg, s0).max_residual;
      if (k == 0) worst_budget = std::max(worst_budget, res[0] / (cfg.dt * e0));
    }
    const double factor = res[0] / res[1];
    min_factor = std::min(min_factor, factor);
    max_factor = std::max(max_factor, factor);
  }
  const double secs = sw.seconds();
  report(2,
         worst_budget <= tol::energy_budget && min_factor >= tol::halving_lo && max_factor <= tol::halving_hi &&
             secs < tol::energy_seconds,
         fmt("energy inequality, 10 data N=64 dt=1e-3: max residual %.2f dt E0 (limit %.0f); halving factor "
             "%.3f..%.3f (range [%.1f, %.1f]); %.0f s (limit %.0f s)",
             worst_budget, tol::energy_budget, min_factor, max_factor, tol::halving_lo, tol::halving_hi, secs,
             tol::energy_seconds));
}

TwinResult twin(double delta) {
  const GridSpec g{grid_n};
  InitialSpec spec;
  spec.decay = 4.0;
  const State a = generate_initial(spec, g);
  PerturbationSpec p;
  p.identical = delta == 0.0;
  p.amplitude = delta;
  p.decay = 4.0;
  SolverConfig cfg;
  cfg.grid = g;
  return run_twin(cfg, a, perturb(a, p));
}

void uniqueness_and_master_inequality() {
  const TwinResult same = twin(0.0);
  report(3, same.max_phi <= tol::twin_phi,
         fmt("identical twin N=64, t in [0,1]: max Phi = %.1e (limit %.0e)", same.max_phi, tol::twin_phi));

  const double deltas[3] = {1e-8, 1e-6, 1e-4};
  std::vector<TwinResult> runs;
  for (double d : deltas) runs.push_back(twin(d));
  bool holds = true;
  std::string detail;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k].report;
    holds = holds && r.holds && std::isfinite(r.c_fit) && runs[k].records.front().phi > 0.0;
    detail += fmt("delta=%.0e holds=%d C_fit=%.3g max Phi=%.2e; ", deltas[k], r.holds ? 1 : 0, r.c_fit,
                  runs[k].max_phi);
  }
  double worst_order = 0.0;  // max over samples of Phi_small / Phi_large
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const auto& lo = runs[k].records;
    const auto& hi = runs[k + 1].records;
    for (std::size_t m = 0; m < lo.size() && m < hi.size(); ++m) {
      worst_order = std::max(worst_order, lo[m].phi / hi[m].phi);
    }
  }
  report(4, holds && worst_order <= tol::ordering_slack,
         detail + fmt("ordering max Phi_small/Phi_large = %.2e (limit %.2f)", worst_order, tol::ordering_slack));
}

void osgood_condition() {
  const std::vector<double> eps{1e-6, 1e-12, 1e-24, 1e-48};
  const Certificate mu = osgood_divergence_certificate(eps, osgood_mu);
  const Certificate ctl = osgood_divergence_certificate(eps, log_squared_modulus);
  double ctl_drift = 0.0;
  for (std::size_t k = 1; k < ctl.rows.size(); ++k) ctl_drift = std::max(ctl_drift, std::abs(ctl.rows[k].increment));
  const bool ctl_stable = ctl_drift <= tol::control_stable;
  report(5, mu.strictly_increasing && ctl_stable,
         fmt("Osgood sweep eps 1e-6..1e-48: mu integral %.4f -> %.4f (%s); control modulus increments up to "
             "%.3g (stable limit %.0e, %s)",
             mu.rows.front().integral, mu.rows.back().integral,
             mu.strictly_increasing ? "strictly increasing" : "not strictly increasing", ctl_drift,
             tol::control_stable, ctl_stable ? "stable" : "not stable"));
  const Certificate sq = osgood_divergence_certificate(eps, [](double r) { return std::sqrt(r); });
  info(fmt("sqrt(r) control integral %.12f -> %.12f (largest increment %.1e)", sq.rows.front().integral,
           sq.rows.back().integral, std::abs(sq.rows.back().increment)));
}

void lemma_suite() {
  Stopwatch sw;
  bool ok = true;
  std::string detail;
  double identity_worst = 0.0;
  for (int n : {64, 128}) {
    EnsembleSpec spec;
    spec.grid = GridSpec{n};
    spec.n_trials = 100;
    const RatioReport reports[6] = {verify_bernstein(spec),     verify_sn_linf(spec),    verify_sobolev_sqrtp(spec),
                                    verify_product_rules(spec), verify_commutator(spec), verify_tail_bounds(spec)};
    double uni = 0.0;
    for (const auto& r : reports) {
      ok = ok && r.verdict;
      uni = std::max(uni, r.uniformity);
    }
    const IdentityReport c = verify_cancellation(spec), s = verify_skew_symmetry(spec);
    identity_worst = std::max({identity_worst, c.max_relative, s.max_relative});
    detail += fmt("N=%d worst uniformity %.2f; ", n, uni);
  }
  const double secs = sw.seconds();
  ok = ok && identity_worst <= tol::identity_rel && secs < tol::lemma_seconds;
  report(6, ok,
         detail + fmt("cancel/skew residual %.1e (limit %.0e); %.0f s (limit %.0f s)", identity_worst,
                      tol::identity_rel, secs, tol::lemma_seconds));
}

double ode_error(Scheme scheme) {
  const GridSpec g{grid_n};
  SolverConfig cfg;
  cfg.grid = g;
  cfg.scheme = scheme;
  const double d0 = 2.0;
  const State end = run(cfg, State::rest(g, d0, 0.0)).final_state;
  // d' = -(d^2 - 1) d gives d(t)^2 = 1 / (1 - (1 - 1/d0^2) e^{-2t}).
  const double exact = 1.0 / std::sqrt(1.0 - (1.0 - 1.0 / (d0 * d0)) * std::exp(-2.0));
  return std::abs(end.d[0](0, 0).real() - exact) / exact;
}

void ode_oracle() {
  const double e1 = ode_error(Scheme::if_euler);
  report(7, e1 <= tol::ode_rel,
         fmt("constant director d0=(2,0), dt=1e-3, first-order scheme: relative error at t=1 %.2e (limit %.0e)", e1,
             tol::ode_rel));
  info(fmt("same run with the second-order scheme: relative error %.2e", ode_error(Scheme::if_rk2)));
}

void steady_state() {
  const GridSpec g{grid_n};
  SolverConfig cfg;
  cfg.grid = g;
  const Integrator it(cfg);
  const State s0 = State::rest(g, 0.6, 0.8);
  State s = s0;
  for (std::size_t k = 0; k < 1000; ++k) s = it.advance(s, k);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (const cplx& z : s.u[i].coeffs()) worst = std::max(worst, std::abs(z));
    const SpectralField dd = s.d[i] - s0.d[i];
    for (const cplx& z : dd.coeffs()) worst = std::max(worst, std::abs(z));
  }
  report(8, worst <= tol::steady_abs,
         fmt("steady state u=0, d=(0.6,0.8), 1000 steps: max coefficient drift %.1e (limit %.0e)", worst,
             tol::steady_abs));
}

}  // namespace

int main() {
  spectral_exactness();
  energy_inequality();
  uniqueness_and_master_inequality();
  osgood_condition();
  lemma_suite();
  ode_oracle();
  steady_state();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
