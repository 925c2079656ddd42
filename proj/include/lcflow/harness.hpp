#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstdio>
#include <span>
#include <random>
#include <string>
#include <vector>

#include "lcflow/ericksen_leslie.hpp"
#include "lcflow/littlewood_paley.hpp"
#include "lcflow/norms.hpp"
#include "lcflow/random_field.hpp"
#include "lcflow/spectral_field.hpp"

namespace lcflow {

// Trial fields are drawn from one of three laws. `mixed` cycles through them.
//   gaussian: random_field with (1+|n|)^{-decay} standard deviation
//   coherent: amplitude (1+|n|)^{-decay} with every phase aligned at a random centre (a bump)
//   block:    a single dyadic block of a flat gaussian field, the block index cycling with the trial
enum class FieldLaw { gaussian, coherent, block, mixed };

struct EnsembleSpec {
  GridSpec grid{};
  std::uint64_t seed = 1;
  int n_trials = 100;
  double decay = 1.0;
  FieldLaw law = FieldLaw::mixed;

  void validate() const {
    grid.validate();
    if (n_trials < 30) throw ConfigError("an ensemble needs at least 30 trials");
    if (!std::isfinite(decay)) throw ConfigError("decay must be finite");
  }
};

// One swept parameter value of one ratio family.
struct RatioRow {
  std::string family;
  std::string param;
  double ratio_max = 0.0;     // the empirical constant: max over trials
  double ratio_median = 0.0;  // median over trials
  int samples = 0;
  bool verdict = false;  // verdict of the whole family this row belongs to
};

struct RatioReport {
  std::string lemma;
  std::vector<RatioRow> rows;
  double cap = 0.0;         // absolute cap on every ratio
  double uniformity = 0.0;  // worst family: max over params / median over params of ratio_max
  double max_ratio = 0.0;
  bool verdict = false;
};

inline constexpr double uniformity_limit = 10.0;
inline constexpr double inf_exponent = std::numeric_limits<double>::infinity();

// Absolute caps, one per lemma: twice the largest ratio seen over 100 trials at N = 64 and 128.
namespace caps {
inline constexpr double bernstein = 4.5;
inline constexpr double sn_linf = 0.45;
inline constexpr double sobolev_sqrtp = 0.7;
inline constexpr double product = 0.45;
inline constexpr double commutator = 1.6;
inline constexpr double tails = 1.5;
}  // namespace caps

inline constexpr double cancellation_tolerance = 1e-11;
inline constexpr double skew_tolerance = 1e-12;

struct IdentityReport {
  std::string name;
  double max_relative = 0.0;
  double median_relative = 0.0;  // of the per-trial maxima
  double max_absolute = 0.0;
  int trials = 0;
  double tolerance = 0.0;
  bool passes() const { return max_relative <= tolerance; }
};

namespace detail {

inline Rng trial_rng(const EnsembleSpec& spec, int trial, int stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline FieldLaw law_of(const EnsembleSpec& spec, int trial) {
  if (spec.law != FieldLaw::mixed) return spec.law;
  static constexpr FieldLaw cycle[3] = {FieldLaw::gaussian, FieldLaw::coherent, FieldLaw::block};
  return cycle[trial % 3];
}

inline SpectralField coherent_field(const GridSpec& grid, Rng& rng, double decay) {
  std::uniform_real_distribution<double> centre(0.0, two_pi);
  const double x0 = centre(rng), x1 = centre(rng);
  const int n = grid.n;
  std::vector<cplx> c(static_cast<std::size_t>(n) * n);
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      const int k0 = wavenumber(i0, n), k1 = wavenumber(i1, n);
      c[static_cast<std::size_t>(i0) * n + i1] =
          std::pow(1.0 + std::hypot(k0, k1), -decay) * std::polar(1.0, -(k0 * x0 + k1 * x1));
    }
  }
  return SpectralField::from_coefficients(grid, std::move(c), true);
}

inline SpectralField draw(const EnsembleSpec& spec, int trial, int stream) {
  Rng rng = trial_rng(spec, trial, stream);
  switch (law_of(spec, trial)) {
    case FieldLaw::coherent:
      return coherent_field(spec.grid, rng, spec.decay);
    case FieldLaw::block: {
      const auto& part = DyadicPartition::shared(spec.grid);
      const int period = part.q_max() + 2;
      const int slot = spec.law == FieldLaw::mixed ? trial / 3 : trial;
      return delta_q(random_field(spec.grid, rng, 0.0), (slot + stream) % period - 1, part);
    }
    default:
      return random_field(spec.grid, rng, spec.decay);
  }
}

inline VectorField2 draw_vector(const EnsembleSpec& spec, int trial, int stream) {
  return {draw(spec, trial, 2 * stream), draw(spec, trial, 2 * stream + 1)};
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  const double upper = v[h];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
}

// Collects ratios keyed by (family, param) in insertion order.
class RatioCollector {
 public:
  explicit RatioCollector(std::string lemma, double cap) : lemma_(std::move(lemma)), cap_(cap) {}

  void add(const std::string& family, const std::string& param, double num, double den) {
    auto& slot = entry(family, param);
    // Empty blocks (both sides zero up to roundoff) carry no information.
    if (!(den > 0.0) || !(num > 0.0)) return;
    slot.push_back(num / den);
  }

  RatioReport finish() const {
    RatioReport rep;
    rep.lemma = lemma_;
    rep.cap = cap_;
    rep.verdict = true;
    for (const auto& fam : families_) {
      std::vector<double> constants;
      bool finite = true;
      for (const auto& [param, ratios] : fam.params) {
        if (ratios.empty()) continue;
        const double mx = *std::max_element(ratios.begin(), ratios.end());
        finite = finite && std::isfinite(mx);
        constants.push_back(mx);
      }
      const double mx = constants.empty() ? 0.0 : *std::max_element(constants.begin(), constants.end());
      const double med = median(constants);
      const double uni = med > 0.0 ? mx / med : std::numeric_limits<double>::infinity();
      const bool ok = finite && !constants.empty() && uni <= uniformity_limit && mx <= cap_;
      for (const auto& [param, ratios] : fam.params) {
        if (ratios.empty()) continue;
        RatioRow row;
        row.family = fam.name;
        row.param = param;
        row.ratio_max = *std::max_element(ratios.begin(), ratios.end());
        row.ratio_median = median(ratios);
        row.samples = static_cast<int>(ratios.size());
        row.verdict = ok;
        rep.rows.push_back(row);
      }
      rep.uniformity = std::max(rep.uniformity, uni);
      rep.max_ratio = std::max(rep.max_ratio, mx);
      rep.verdict = rep.verdict && ok;
    }
    return rep;
  }

 private:
  struct Family {
    std::string name;
    std::vector<std::pair<std::string, std::vector<double>>> params;
  };

  std::vector<double>& entry(const std::string& family, const std::string& param) {
    auto fit = std::find_if(families_.begin(), families_.end(), [&](const Family& f) { return f.name == family; });
    if (fit == families_.end()) fit = families_.insert(families_.end(), Family{family, {}});
    auto pit = std::find_if(fit->params.begin(), fit->params.end(), [&](const auto& p) { return p.first == param; });
    if (pit == fit->params.end()) pit = fit->params.insert(fit->params.end(), {param, {}});
    return pit->second;
  }

  std::string lemma_;
  double cap_;
  std::vector<Family> families_;
};

inline std::string fmt_exp(double p) {
  if (std::isinf(p)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

// Values below this fraction of the field scale are treated as exact zeros.
inline constexpr double zero_floor = 1e-13;

inline std::vector<PhysicalField> padded(std::initializer_list<const SpectralField*> fields) {
  std::vector<const SpectralField*> v(fields);
  return to_physical(std::span<const SpectralField* const>(v), v.front()->grid().padded_size());
}

}  // namespace detail

/// Bernstein: ||Delta_q d^k f||_r <= C 2^{q(k + 2(1/p - 1/r))} ||Delta_q f||_p for
/// (p, r) in {(2,2), (2,inf), (1,2)}, k in {0,1}, and the reverse bound
/// 2^q ||Delta_q f||_p <= C ||Delta_q grad f||_p on annuli (q >= 0).
inline RatioReport verify_bernstein(const EnsembleSpec& spec) {
  spec.validate();
  const auto& part = DyadicPartition::shared(spec.grid);
  detail::RatioCollector col("bernstein", caps::bernstein);
  struct Pr {
    double p, r;
  };
  const Pr pairs[3] = {{2.0, 2.0}, {2.0, inf_exponent}, {1.0, 2.0}};
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const SpectralField f = detail::draw(spec, trial, 0);
    const double scale = l2_norm(f);
    for (int q = 0; q <= part.q_max(); ++q) {
      const SpectralField b = delta_q(f, q, part);
      if (l2_norm(b) <= detail::zero_floor * scale) continue;
      const VectorField2 gb = gradient(b);
      const std::string param = "q=" + std::to_string(q);
      auto norm_k = [&](int k, double r) { return k == 0 ? lp_norm(b, r) : lp_norm(gb, r); };
      for (const auto& pr : pairs) {
        for (int k = 0; k <= 1; ++k) {
          const double gain = std::pow(2.0, q * (k + 2.0 * (1.0 / pr.p - 1.0 / pr.r)));
          col.add("p=" + detail::fmt_exp(pr.p) + " r=" + detail::fmt_exp(pr.r) + " k=" + std::to_string(k), param,
                  norm_k(k, pr.r), gain * lp_norm(b, pr.p));
        }
      }
      for (double p : {2.0, inf_exponent}) {
        col.add("reverse p=" + detail::fmt_exp(p), param, std::ldexp(lp_norm(b, p), q), lp_norm(gb, p));
      }
    }
  }
  return col.finish();
}

/// ||S_N f||_inf <= C sqrt(N) ||f||_{H^1} on the 2-torus, N = 1..q_max.
inline RatioReport verify_sn_linf(const EnsembleSpec& spec) {
  spec.validate();
  const auto& part = DyadicPartition::shared(spec.grid);
  detail::RatioCollector col("snlinf", caps::sn_linf);
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const SpectralField f = detail::draw(spec, trial, 0);
    const double h1 = hs_norm(f, 1.0);
    for (int n = 1; n <= part.q_max(); ++n) {
      const SpectralField sn = s_q(f, n, part);
      if (l2_norm(sn) <= detail::zero_floor * l2_norm(f)) continue;
      col.add("S_N", "N=" + std::to_string(n), lp_norm(sn, inf_exponent), std::sqrt(static_cast<double>(n)) * h1);
    }
  }
  return col.finish();
}

/// Ratio ||f||_{L^p} / (sqrt(p) ||f||_{H^s}) with p = 2/(1-s); s must lie in [0, 1).
inline double sobolev_sqrtp_ratio(const SpectralField& f, double s) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError("Sobolev exponent must lie in [0, 1)");
  const double p = 2.0 / (1.0 - s);
  const double den = std::sqrt(p) * hs_norm(f, s);
  return den > 0.0 ? lp_norm(f, p) / den : 0.0;
}

/// ||f||_{L^p} <= C sqrt(p) ||f||_{H^s}, s = 1 - 2/p, for p in {4, 8, 16, 32, 64}.
inline RatioReport verify_sobolev_sqrtp(const EnsembleSpec& spec) {
  spec.validate();
  detail::RatioCollector col("sobolev", caps::sobolev_sqrtp);
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const SpectralField f = detail::draw(spec, trial, 0);
    for (double p : {4.0, 8.0, 16.0, 32.0, 64.0}) {
      const double s = 1.0 - 2.0 / p;
      col.add("sqrt(p)", "p=" + detail::fmt_exp(p), lp_norm(f, p), std::sqrt(p) * hs_norm(f, s));
    }
  }
  return col.finish();
}

/// ||fg||_{H^{s+t-1}} <= C ||f||_{H^s} ||g||_{H^t} (s + t > 0, s, t < 1), swept over
/// the band limit 2^j of both factors.
inline RatioReport verify_product_rule(const EnsembleSpec& spec, double s, double t) {
  spec.validate();
  if (!(s + t > 0.0 && s < 1.0 && t < 1.0)) throw DomainError("product rule needs s + t > 0 and s, t < 1");
  const auto& part = DyadicPartition::shared(spec.grid);
  detail::RatioCollector col("product", caps::product);
  const std::string family = "s=" + detail::fmt_exp(s) + " t=" + detail::fmt_exp(t);
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const SpectralField f0 = detail::draw(spec, trial, 0);
    const SpectralField g0 = detail::draw(spec, trial, 1);
    for (int j = 1; j <= part.q_max() + 1; ++j) {
      const double band = std::ldexp(1.0, j);
      auto cut = [band](int k0, int k1) { return std::hypot(k0, k1) <= band ? 1.0 : 0.0; };
      const SpectralField f = apply_symbol(f0, cut), g = apply_symbol(g0, cut);
      col.add(family, "band=" + std::to_string(1 << j), hs_norm(product(f, g), s + t - 1.0),
              hs_norm(f, s) * hs_norm(g, t));
    }
  }
  return col.finish();
}

/// The four exponent pairs used for the velocity and director estimates, merged.
inline RatioReport verify_product_rules(const EnsembleSpec& spec) {
  RatioReport all;
  all.lemma = "product";
  all.cap = caps::product;
  all.verdict = true;
  for (auto [s, t] : {std::pair{0.5, 0.0}, {0.75, -0.25}, {0.75, 0.75}, {0.0, 0.5}}) {
    RatioReport r = verify_product_rule(spec, s, t);
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    all.uniformity = std::max(all.uniformity, r.uniformity);
    all.max_ratio = std::max(all.max_ratio, r.max_ratio);
    all.verdict = all.verdict && r.verdict;
  }
  return all;
}

/// 2^q ||[Delta_q, f] g||_r <= C ||grad f||_p ||g||_h with 1/p + 1/h = 1/r, and the same
/// with S_N, for (r, p, h) in {(2,4,4), (2,2,inf), (4/3,2,4)}.
inline RatioReport verify_commutator(const EnsembleSpec& spec) {
  spec.validate();
  const auto& part = DyadicPartition::shared(spec.grid);
  detail::RatioCollector col("commutator", caps::commutator);
  struct Triple {
    double r, p, h;
    const char* name;
  };
  const Triple triples[3] = {{2.0, 4.0, 4.0, "r=2 p=4 h=4"}, {2.0, 2.0, inf_exponent, "r=2 p=2 h=inf"},
                             {4.0 / 3.0, 2.0, 4.0, "r=4/3 p=2 h=4"}};
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const SpectralField f = detail::draw(spec, trial, 0);
    const SpectralField g = detail::draw(spec, trial, 1);
    const VectorField2 gf = gradient(f);
    double den[3];
    for (int k = 0; k < 3; ++k) den[k] = lp_norm(gf, triples[k].p) * lp_norm(g, triples[k].h);
    const double scale = l2_norm(f) * l2_norm(g);
    auto record = [&](CommutatorKind ck) {
      const SpectralField c = commutator(f, g, ck);
      if (l2_norm(c) <= detail::zero_floor * scale) return;
      const bool delta = ck.op == CommutatorKind::Op::delta;
      for (int k = 0; k < 3; ++k) {
        col.add(std::string(delta ? "delta " : "low_pass ") + triples[k].name,
                (delta ? "q=" : "N=") + std::to_string(ck.index), std::ldexp(lp_norm(c, triples[k].r), ck.index),
                den[k]);
      }
    };
    for (int q = 0; q <= part.q_max(); ++q) record(CommutatorKind::delta(q));
    for (int n = 1; n <= part.q_max(); ++n) record(CommutatorKind::low_pass(n));
  }
  return col.finish();
}

/// High-frequency tails:
///   ||(Id - S_N) f||_inf       <= C 2^{-N/2} ||f||_{H^1}^{1/2} ||f||_{H^2}^{1/2}
///   ||(Id - S_N) f||_{H^{1/4}} <= C 2^{-3N/4} ||f||_{H^1}
inline RatioReport verify_tail_bounds(const EnsembleSpec& spec) {
  spec.validate();
  const auto& part = DyadicPartition::shared(spec.grid);
  detail::RatioCollector col("tails", caps::tails);
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const SpectralField f = detail::draw(spec, trial, 0);
    const double h1 = hs_norm(f, 1.0), h2 = hs_norm(f, 2.0);
    for (int n = 0; n <= part.q_max(); ++n) {
      const SpectralField tail = f - s_q(f, n, part);
      if (l2_norm(tail) <= detail::zero_floor * l2_norm(f)) continue;
      const std::string param = "N=" + std::to_string(n);
      col.add("linf", param, lp_norm(tail, inf_exponent), std::pow(2.0, -0.5 * n) * std::sqrt(h1 * h2));
      col.add("h1/4", param, hs_norm(tail, 0.25), std::pow(2.0, -0.75 * n) * h1);
    }
  }
  return col.finish();
}

/// I3 + J3 with
///   I3 = -sum_q 2^-q integral (Delta_q grad du  S_{q-1} d1) . Delta_q Lap dd
///   J3 =  sum_q 2^-q integral (S_{q-1} d1 (x) Delta_q Lap dd) : Delta_q grad^t du
/// Relative residual is |I3 + J3| over sum_q 2^-q |I3_q|.
inline IdentityReport verify_cancellation(const EnsembleSpec& spec) {
  spec.validate();
  const auto& part = DyadicPartition::shared(spec.grid);
  IdentityReport rep;
  rep.name = "cancel";
  rep.tolerance = cancellation_tolerance;
  std::vector<double> per_trial;
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const VectorField2 du = leray_project(detail::draw_vector(spec, trial, 0));
    const VectorField2 dd = detail::draw_vector(spec, trial, 1);
    const VectorField2 d1 = detail::draw_vector(spec, trial, 2);
    const TensorField22 g = vector_gradient(du);  // g(i, j) = d_j du_i
    const VectorField2 lap = laplacian(dd);
    double i3 = 0.0, j3 = 0.0, scale = 0.0;
    for (int q = -1; q <= part.q_max(); ++q) {
      const SpectralField g00 = delta_q(g(0, 0), q, part), g01 = delta_q(g(0, 1), q, part);
      const SpectralField g10 = delta_q(g(1, 0), q, part), g11 = delta_q(g(1, 1), q, part);
      const SpectralField l0 = delta_q(lap[0], q, part), l1 = delta_q(lap[1], q, part);
      const SpectralField s0 = s_q(d1[0], q - 1, part), s1 = s_q(d1[1], q - 1, part);
      auto v = detail::padded({&g00, &g01, &g10, &g11, &l0, &l1, &s0, &s1});
      const auto& G00 = v[0].v;
      const auto& G01 = v[1].v;
      const auto& G10 = v[2].v;
      const auto& G11 = v[3].v;
      const auto& L0 = v[4].v;
      const auto& L1 = v[5].v;
      const auto& S0 = v[6].v;
      const auto& S1 = v[7].v;
      PhysicalField wi(v[0].m), wj(v[0].m);
      for (std::size_t k = 0; k < wi.size(); ++k) {
        // (G Sd) . L
        wi.v[k] = -((G00[k] * S0[k] + G01[k] * S1[k]) * L0[k] + (G10[k] * S0[k] + G11[k] * S1[k]) * L1[k]);
        // (Sd (x) L) : G^t, with (G^t)(i, j) = G(j, i)
        wj.v[k] = S0[k] * L0[k] * G00[k] + S0[k] * L1[k] * G10[k] + S1[k] * L0[k] * G01[k] + S1[k] * L1[k] * G11[k];
      }
      const double w = std::ldexp(1.0, -q);
      const double iq = w * integrate(wi);
      i3 += iq;
      j3 += w * integrate(wj);
      scale += std::abs(iq);
    }
    const double res = std::abs(i3 + j3);
    rep.max_absolute = std::max(rep.max_absolute, res);
    per_trial.push_back(scale > 0.0 ? res / scale : 0.0);
    rep.max_relative = std::max(rep.max_relative, per_trial.back());
    ++rep.trials;
  }
  rep.median_relative = detail::median(per_trial);
  return rep;
}

/// Symmetric tensors integrate to zero against Delta_q d(omega): checks
/// Delta_q dA : Delta_q d(omega) and (v (x) Mv' + Mv' (x) v) : Delta_q d(omega) with
/// v = S_{q-1} d1 and M = Delta_q dA. Relative to the product of the L^2 norms.
inline IdentityReport verify_skew_symmetry(const EnsembleSpec& spec) {
  spec.validate();
  const auto& part = DyadicPartition::shared(spec.grid);
  IdentityReport rep;
  rep.name = "skew";
  rep.tolerance = skew_tolerance;
  std::vector<double> per_trial;
  for (int trial = 0; trial < spec.n_trials; ++trial) {
    const VectorField2 du = leray_project(detail::draw_vector(spec, trial, 0));
    const VectorField2 d1 = detail::draw_vector(spec, trial, 1);
    const StrainVorticity sv = strain_and_vorticity(du);
    double worst = 0.0;
    for (int q = -1; q <= part.q_max(); ++q) {
      const SpectralField a00 = delta_q(sv.a(0, 0), q, part), a01 = delta_q(sv.a(0, 1), q, part);
      const SpectralField a11 = delta_q(sv.a(1, 1), q, part);
      const SpectralField w01 = delta_q(sv.omega(0, 1), q, part), w10 = delta_q(sv.omega(1, 0), q, part);
      const SpectralField s0 = s_q(d1[0], q - 1, part), s1 = s_q(d1[1], q - 1, part);
      auto v = detail::padded({&a00, &a01, &a11, &w01, &w10, &s0, &s1});
      PhysicalField c1(v[0].m), c2(v[0].m), aa(v[0].m), ww(v[0].m), ss(v[0].m);
      for (std::size_t k = 0; k < c1.size(); ++k) {
        const double A00 = v[0].v[k], A01 = v[1].v[k], A11 = v[2].v[k];
        const double W01 = v[3].v[k], W10 = v[4].v[k];
        const double V0 = v[5].v[k], V1 = v[6].v[k];
        c1.v[k] = A01 * W01 + A01 * W10;  // diagonal of omega vanishes
        const double m0 = A00 * V0 + A01 * V1, m1 = A01 * V0 + A11 * V1;
        const double t01 = V0 * m1 + m0 * V1;  // (v (x) m + m (x) v)(0, 1) = (1, 0)
        c2.v[k] = t01 * W01 + t01 * W10;
        aa.v[k] = A00 * A00 + 2.0 * A01 * A01 + A11 * A11;
        ww.v[k] = W01 * W01 + W10 * W10;
        ss.v[k] = 4.0 * V0 * V0 * m0 * m0 + 2.0 * t01 * t01 + 4.0 * V1 * V1 * m1 * m1;
      }
      const double nw = std::sqrt(integrate(ww));
      const double r1 = std::abs(integrate(c1)), r2 = std::abs(integrate(c2));
      rep.max_absolute = std::max({rep.max_absolute, r1, r2});
      const double n1 = std::sqrt(integrate(aa)) * nw, n2 = std::sqrt(integrate(ss)) * nw;
      if (n1 > 0.0) worst = std::max(worst, r1 / n1);
      if (n2 > 0.0) worst = std::max(worst, r2 / n2);
    }
    per_trial.push_back(worst);
    rep.max_relative = std::max(rep.max_relative, worst);
    ++rep.trials;
  }
  rep.median_relative = detail::median(per_trial);
  return rep;
}

}  // namespace lcflow
