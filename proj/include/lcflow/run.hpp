#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "lcflow/energy.hpp"
#include "lcflow/ericksen_leslie.hpp"
#include "lcflow/osgood.hpp"

namespace lcflow {

/// Energy sample plus the running energy-law bookkeeping:
/// residual = E(t_m) + sum_{k<m} dt D(t_k) - E(0).
struct EnergySample {
  EnergyRecord record;
  std::size_t step = 0;
  double cum_dissipation = 0.0;
  double residual = 0.0;
};

struct RunCallbacks {
  std::function<void(const EnergySample&)> on_energy;
  std::function<void(const State&, std::size_t step)> on_snapshot;
};

struct RunResult {
  State final_state;
  std::vector<EnergySample> energy;
  double max_residual = 0.0;
};

/// Integrates from `initial` to cfg.t_end. Energy samples are taken at every
/// energy_cadence-th step and at the last step; snapshots likewise.
inline RunResult run(const SolverConfig& cfg, const State& initial, const RunCallbacks& cb = {}) {
  cfg.validate();
  if (initial.grid().n != cfg.grid.n) throw ConfigError("initial data grid does not match config");
  const Integrator integ(cfg);
  const std::size_t steps = cfg.steps();
  RunResult res;
  State s = initial;
  const double e0 = total_energy(s).e_total;
  double cum = 0.0;
  for (std::size_t m = 0;; ++m) {
    const bool last = m == steps;
    DissipationTerms diss;
    std::optional<State> next;
    if (!last) {
      next = integ.advance(s, m, &diss);
    } else {
      diss = total_dissipation(s, cfg.coefficients);
    }
    if (last || m % static_cast<std::size_t>(cfg.energy_cadence) == 0) {
      EnergySample e;
      e.record = energy_record(s, diss);
      e.step = m;
      e.cum_dissipation = cum;
      e.residual = e.record.e_total + cum - e0;
      res.max_residual = std::max(res.max_residual, e.residual);
      if (cb.on_energy) cb.on_energy(e);
      res.energy.push_back(e);
    }
    if (cb.on_snapshot && cfg.snapshot_cadence > 0 &&
        (last || m % static_cast<std::size_t>(cfg.snapshot_cadence) == 0)) {
      cb.on_snapshot(s, m);
    }
    if (last) break;
    cum += cfg.dt * diss.total();
    s = std::move(*next);
    s.t = initial.t + static_cast<double>(m + 1) * cfg.dt;  // no accumulated roundoff in t
  }
  res.final_state = std::move(s);
  return res;
}

struct TwinCallbacks {
  std::function<void(const UniquenessRecord&)> on_record;
  std::function<void(const State&, const State&, std::size_t step)> on_snapshot;
};

struct TwinResult {
  State first, second;
  std::vector<UniquenessRecord> records;
  MasterReport report;
  double max_phi = 0.0;
};

/// Two solver instances advanced in lockstep. Uniqueness records are sampled at
/// uniqueness_cadence (and at the last step) and fed to the master inequality.
inline TwinResult run_twin(const SolverConfig& cfg, const State& s1, const State& s2, const TwinCallbacks& cb = {},
                           double gamma = 1.0 / 6.0, std::optional<double> c_cap = std::nullopt) {
  cfg.validate();
  if (s1.grid().n != cfg.grid.n || s2.grid().n != cfg.grid.n) throw ConfigError("twin data grid does not match config");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  const Integrator integ(cfg);
  const std::size_t steps = cfg.steps();
  TwinResult res;
  State a = s1, b = s2;
  std::vector<double> frak;
  OsgoodTrace trace;
  trace.gamma = gamma;
  for (std::size_t m = 0;; ++m) {
    const bool last = m == steps;
    if (last || m % static_cast<std::size_t>(cfg.uniqueness_cadence) == 0) {
      auto r = uniqueness_record(a, b, cfg.coefficients.nu);
      res.max_phi = std::max(res.max_phi, r.phi);
      trace.t.push_back(r.t);
      trace.phi.push_back(r.phi);
      trace.f.push_back(r.f_hat);
      frak.push_back(r.frak_d);
      if (cb.on_record) cb.on_record(r);
      res.records.push_back(r);
    }
    if (cb.on_snapshot && cfg.snapshot_cadence > 0 &&
        (last || m % static_cast<std::size_t>(cfg.snapshot_cadence) == 0)) {
      cb.on_snapshot(a, b, m);
    }
    if (last) break;
    a = integ.advance(a, m);
    b = integ.advance(b, m);
    a.t = b.t = s1.t + static_cast<double>(m + 1) * cfg.dt;
  }
  res.report = check_master_inequality(trace, frak, c_cap);
  res.first = std::move(a);
  res.second = std::move(b);
  return res;
}

}  // namespace lcflow
