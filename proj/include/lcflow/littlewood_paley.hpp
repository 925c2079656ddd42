#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "lcflow/errors.hpp"
#include "lcflow/spectral_field.hpp"

namespace lcflow {

/// Radial cut-off chi and the dyadic multiplier tables of one grid size.
///
/// Delta_{-1} = chi(|n|), Delta_q = chi(2^{-q-1}|n|) - chi(2^{-q}|n|) for q >= 0,
/// S_q = Delta_{-1} + ... + Delta_{q-1} (so S_0 = Delta_{-1}, S_q = 0 for q < 0).
class DyadicPartition {
 public:
  static constexpr double inner = 0.75;
  static constexpr double outer = 4.0 / 3.0;

  /// chi = 1 on [0, 3/4], 0 on [4/3, inf), C-infinity ramp from e^{-1/t} in between.
  static double chi(double r) {
    if (r <= inner) return 1.0;
    if (r >= outer) return 0.0;
    const double a = (r - inner) / (outer - inner);
    const double up = std::exp(-1.0 / (1.0 - a));
    const double down = std::exp(-1.0 / a);
    return up / (up + down);
  }

  static double phi(double r) { return chi(0.5 * r) - chi(r); }

  explicit DyadicPartition(const GridSpec& grid) : grid_(grid) {
    grid.validate();
    const double radius_max = std::sqrt(2.0) * grid.k_max();
    q_max_ = -1;
    while (inner * std::ldexp(1.0, q_max_ + 1) <= radius_max) ++q_max_;

    const int n = grid.n;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    radius_.resize(nn);
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n; ++i1) {
        radius_[static_cast<std::size_t>(i0) * n + i1] = std::hypot(wavenumber(i0, n), wavenumber(i1, n));
      }
    }
    delta_.assign(static_cast<std::size_t>(q_max_ + 2), std::vector<double>(nn));
    for (std::size_t k = 0; k < nn; ++k) {
      const double r = radius_[k];
      delta_[0][k] = chi(r);
      for (int q = 0; q <= q_max_; ++q) {
        delta_[static_cast<std::size_t>(q + 1)][k] = chi(std::ldexp(r, -q - 1)) - chi(std::ldexp(r, -q));
      }
    }
    // s_[q] holds S_q for q = 0 .. q_max+1, as running sums of the block tables.
    s_.assign(static_cast<std::size_t>(q_max_ + 2), std::vector<double>(nn, 0.0));
    for (int q = 0; q <= q_max_ + 1; ++q) {
      auto& dst = s_[static_cast<std::size_t>(q)];
      if (q > 0) dst = s_[static_cast<std::size_t>(q - 1)];
      const auto& blk = delta_[static_cast<std::size_t>(q)];
      for (std::size_t k = 0; k < nn; ++k) dst[k] += blk[k];
    }
    zero_.assign(nn, 0.0);
  }

  /// Shared immutable partition for grids of size n (padding is irrelevant here).
  static const DyadicPartition& shared(const GridSpec& grid) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<DyadicPartition>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[grid.n];
    if (!slot) slot = std::make_unique<DyadicPartition>(GridSpec{grid.n, Padding::two});
    return *slot;
  }

  const GridSpec& grid() const { return grid_; }

  /// Largest q whose block is not identically zero on the grid.
  int q_max() const { return q_max_; }

  /// Multiplier table of Delta_q; all zeros above q_max.
  std::span<const double> delta_table(int q) const {
    if (q < -1) throw DomainError("dyadic block index must be >= -1");
    if (q > q_max_) return zero_;
    return delta_[static_cast<std::size_t>(q + 1)];
  }

  /// Multiplier table of S_q; zeros for q <= -1, the identity (as a sum of blocks) from q_max+1 on.
  std::span<const double> s_table(int q) const {
    if (q < 0) return zero_;
    return s_[static_cast<std::size_t>(std::min(q, q_max_ + 1))];
  }

  std::span<const double> radius() const { return radius_; }

 private:
  GridSpec grid_;
  int q_max_ = 0;
  std::vector<double> radius_;
  std::vector<std::vector<double>> delta_;
  std::vector<std::vector<double>> s_;
  std::vector<double> zero_;
};

inline SpectralField apply_table(const SpectralField& f, std::span<const double> table) {
  SpectralField out = f;
  auto c = out.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= table[k];
  return out;
}

inline SpectralField delta_q(const SpectralField& f, int q, const DyadicPartition& part) {
  return apply_table(f, part.delta_table(q));
}
inline SpectralField delta_q(const SpectralField& f, int q) {
  return delta_q(f, q, DyadicPartition::shared(f.grid()));
}

inline SpectralField s_q(const SpectralField& f, int q, const DyadicPartition& part) {
  return apply_table(f, part.s_table(q));
}
inline SpectralField s_q(const SpectralField& f, int q) { return s_q(f, q, DyadicPartition::shared(f.grid())); }

inline VectorField2 delta_q(const VectorField2& u, int q) { return {delta_q(u[0], q), delta_q(u[1], q)}; }
inline VectorField2 s_q(const VectorField2& u, int q) { return {s_q(u[0], q), s_q(u[1], q)}; }

/// ||Delta_q f||^2_{L^2} for every q = -1 .. q_max, by Parseval.
inline std::vector<double> block_energies(const SpectralField& f, const DyadicPartition& part) {
  std::vector<double> e(static_cast<std::size_t>(part.q_max() + 2), 0.0);
  auto c = f.coeffs();
  for (int q = -1; q <= part.q_max(); ++q) {
    auto t = part.delta_table(q);
    double sum = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (t[k] != 0.0) sum += t[k] * t[k] * std::norm(c[k]);
    }
    e[static_cast<std::size_t>(q + 1)] = torus_area * sum;
  }
  return e;
}

struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;

  void validate() const {
    if (!(p >= 1.0) || !(r >= 1.0)) throw DomainError("Besov exponents p, r must be >= 1");
    if (!std::isfinite(s)) throw DomainError("Besov regularity must be finite");
  }
};

enum class BesovVariant { blocks, low_pass };

namespace detail {

struct LrAccumulator {
  double r;
  double acc = 0.0;
  void add(double x) {
    if (std::isinf(r)) {
      acc = std::max(acc, x);
    } else {
      acc += std::pow(x, r);
    }
  }
  double result() const { return std::isinf(r) ? acc : std::pow(acc, 1.0 / r); }
};

}  // namespace detail

/// ||(2^{qs} ||Delta_q f||_{L^p})_q||_{l^r}. The low_pass variant replaces Delta_q by S_q, q >= 0,
/// and is only defined for s < 0; S_q f = f for q > q_max, and that geometric tail is summed exactly.
inline double besov_norm(const SpectralField& f, const BesovParams& bp,
                         BesovVariant variant = BesovVariant::blocks) {
  bp.validate();
  const auto& part = DyadicPartition::shared(f.grid());
  detail::LrAccumulator acc{bp.r};
  if (variant == BesovVariant::blocks) {
    if (bp.p == 2.0) {
      auto e = block_energies(f, part);
      for (int q = -1; q <= part.q_max(); ++q) acc.add(std::pow(2.0, q * bp.s) * std::sqrt(e[static_cast<std::size_t>(q + 1)]));
    } else {
      for (int q = -1; q <= part.q_max(); ++q) acc.add(std::pow(2.0, q * bp.s) * lp_norm(delta_q(f, q, part), bp.p));
    }
    return acc.result();
  }
  if (bp.s >= 0.0) throw DomainError("the S_q characterisation needs s < 0");
  const int q_top = part.q_max() + 1;
  for (int q = 0; q <= q_top; ++q) {
    const SpectralField low = s_q(f, q, part);
    const double norm = bp.p == 2.0 ? l2_norm(low) : lp_norm(low, bp.p);
    acc.add(std::pow(2.0, q * bp.s) * norm);
  }
  // q > q_top: S_q f = S_{q_top} f.
  const SpectralField top = s_q(f, q_top, part);
  const double top_norm = bp.p == 2.0 ? l2_norm(top) : lp_norm(top, bp.p);
  if (std::isinf(bp.r)) return acc.result();  // the tail is dominated by the q = q_top term
  const double ratio = std::pow(2.0, bp.s * bp.r);
  const double tail = std::pow(top_norm, bp.r) * std::pow(2.0, (q_top + 1) * bp.s * bp.r) / (1.0 - ratio);
  acc.acc += tail;
  return acc.result();
}

// ---------------------------------------------------------------------------
// Paraproducts

/// f g = T_f g + T_g f + R(f, g).
struct BonySplit {
  SpectralField t_fg;
  SpectralField t_gf;
  SpectralField remainder;

  SpectralField sum() const { return t_fg + t_gf + remainder; }
};

/// Padded point values of every dyadic block of two real fields and of their low-pass sums.
class BlockCache {
 public:
  BlockCache(const SpectralField& f, const SpectralField& g, const DyadicPartition& part)
      : part_(&part), grid_(f.grid()), m_(f.grid().padded_size()) {
    require_same_grid(f, g);
    if (!f.is_real() || !g.is_real()) throw DomainError("BlockCache needs real fields");
    const int nb = part.q_max() + 2;
    std::vector<SpectralField> blocks;
    blocks.reserve(2 * static_cast<std::size_t>(nb));
    for (int q = -1; q <= part.q_max(); ++q) blocks.push_back(delta_q(f, q, part));
    for (int q = -1; q <= part.q_max(); ++q) blocks.push_back(delta_q(g, q, part));
    std::vector<const SpectralField*> ptr;
    for (const auto& b : blocks) ptr.push_back(&b);
    auto phys = to_physical(ptr, m_);
    df_.assign(phys.begin(), phys.begin() + nb);
    dg_.assign(phys.begin() + nb, phys.end());
    sf_ = running_sums(df_);
    sg_ = running_sums(dg_);
    g_blocks_.assign(blocks.begin() + nb, blocks.end());
  }

  const DyadicPartition& partition() const { return *part_; }
  const GridSpec& grid() const { return grid_; }
  int m() const { return m_; }
  int q_max() const { return part_->q_max(); }

  /// Delta_q f / Delta_q g on the padded grid; nullptr when identically zero.
  const PhysicalField* df(int q) const { return block(df_, q); }
  const PhysicalField* dg(int q) const { return block(dg_, q); }
  /// S_q f / S_q g on the padded grid; nullptr for q <= -1.
  const PhysicalField* sf(int q) const { return low(sf_, q); }
  const PhysicalField* sg(int q) const { return low(sg_, q); }
  const SpectralField& g_block(int q) const { return g_blocks_[static_cast<std::size_t>(q + 1)]; }

 private:
  static std::vector<PhysicalField> running_sums(const std::vector<PhysicalField>& blocks) {
    std::vector<PhysicalField> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
      PhysicalField next = out.empty() ? PhysicalField(b.m) : out.back();
      for (std::size_t k = 0; k < next.size(); ++k) next.v[k] += b.v[k];
      out.push_back(std::move(next));
    }
    return out;
  }
  const PhysicalField* block(const std::vector<PhysicalField>& v, int q) const {
    if (q < -1 || q > part_->q_max()) return nullptr;
    return &v[static_cast<std::size_t>(q + 1)];
  }
  const PhysicalField* low(const std::vector<PhysicalField>& v, int q) const {
    if (q < 0) return nullptr;
    return &v[static_cast<std::size_t>(std::min(q, part_->q_max() + 1))];
  }

  const DyadicPartition* part_;
  GridSpec grid_;
  int m_;
  std::vector<PhysicalField> df_, dg_, sf_, sg_;
  std::vector<SpectralField> g_blocks_;
};

namespace detail {

inline void add_product(PhysicalField& acc, const PhysicalField* a, const PhysicalField* b, double w = 1.0) {
  if (!a || !b) return;
  for (std::size_t k = 0; k < acc.size(); ++k) acc.v[k] += w * a->v[k] * b->v[k];
}

inline SpectralField combine_parts(const SpectralField& rr, const SpectralField& ii, const SpectralField& ri,
                                   const SpectralField& ir) {
  return SpectralField::combine(rr - ii, ri + ir);
}

}  // namespace detail

inline BonySplit bony_split(const BlockCache& c) {
  const int m = c.m();
  PhysicalField tfg(m), tgf(m), rem(m);
  for (int q = -1; q <= c.q_max(); ++q) {
    detail::add_product(tfg, c.sf(q - 1), c.dg(q));
    detail::add_product(tgf, c.sg(q - 1), c.df(q));
    for (int k = q - 1; k <= q + 1; ++k) detail::add_product(rem, c.df(q), c.dg(k));
  }
  const PhysicalField* in[3] = {&tfg, &tgf, &rem};
  auto spec = from_physical(in, c.grid());
  return {std::move(spec[0]), std::move(spec[1]), std::move(spec[2])};
}

/// T_f g = sum_q S_{q-1} f Delta_q g, R(f, g) = sum_q Delta_q f (Delta_{q-1} + Delta_q + Delta_{q+1}) g,
/// all products dealiased as in product().
inline BonySplit bony_split(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  const auto& part = DyadicPartition::shared(f.grid());
  if (f.is_real() && g.is_real()) return bony_split(BlockCache(f, g, part));
  const SpectralField fr = f.real_part(), fi = f.imag_part(), gr = g.real_part(), gi = g.imag_part();
  const BonySplit rr = bony_split(BlockCache(fr, gr, part));
  const BonySplit ii = bony_split(BlockCache(fi, gi, part));
  const BonySplit ri = bony_split(BlockCache(fr, gi, part));
  const BonySplit ir = bony_split(BlockCache(fi, gr, part));
  return {detail::combine_parts(rr.t_fg, ii.t_fg, ri.t_fg, ir.t_fg),
          detail::combine_parts(rr.t_gf, ii.t_gf, ri.t_gf, ir.t_gf),
          detail::combine_parts(rr.remainder, ii.remainder, ri.remainder, ir.remainder)};
}

/// The four pieces of Delta_q(f g):
///   commutator  sum_{|j-q|<=5} [Delta_q, S_{j-1} f] Delta_j g
///   low_shift   sum_{|j-q|<=5} (S_{j-1} - S_{q-1}) f Delta_q Delta_j g
///   paraproduct S_{q-1} f Delta_q g
///   high        sum_{j>=q-5} Delta_q(Delta_j f S_{j+2} g)
struct BlockDecomposition {
  std::array<SpectralField, 4> terms;

  SpectralField sum() const { return terms[0] + terms[1] + terms[2] + terms[3]; }
};

inline BlockDecomposition bony_block_decompose(const BlockCache& c, int q) {
  if (q < -1) throw DomainError("dyadic block index must be >= -1");
  const auto& part = c.partition();
  const int m = c.m();
  const int j_lo = std::max(-1, q - 5);
  const int j_hi = std::min(c.q_max(), q + 5);

  PhysicalField para_sum(m), inner(m), shift(m), para(m), high(m);
  for (int j = j_lo; j <= j_hi; ++j) detail::add_product(para_sum, c.sf(j - 1), c.dg(j));

  // Delta_q Delta_j g vanishes for |j - q| >= 2; only those blocks are transformed.
  std::vector<SpectralField> dqdj;
  std::vector<int> js;
  for (int j = std::max(j_lo, q - 1); j <= std::min(j_hi, q + 1); ++j) {
    dqdj.push_back(delta_q(c.g_block(j), q, part));
    js.push_back(j);
  }
  std::vector<const SpectralField*> ptr;
  for (const auto& b : dqdj) ptr.push_back(&b);
  auto dqdj_phys = to_physical(ptr, m);
  const PhysicalField* sq1 = c.sf(q - 1);
  for (std::size_t i = 0; i < js.size(); ++i) {
    const int j = js[i];
    detail::add_product(inner, c.sf(j - 1), &dqdj_phys[i]);
    detail::add_product(shift, c.sf(j - 1), &dqdj_phys[i]);
    detail::add_product(shift, sq1, &dqdj_phys[i], -1.0);
  }
  detail::add_product(para, sq1, c.dg(q));
  for (int j = std::max(-1, q - 5); j <= c.q_max(); ++j) detail::add_product(high, c.df(j), c.sg(j + 2));

  const PhysicalField* in[5] = {&para_sum, &inner, &shift, &para, &high};
  auto spec = from_physical(in, c.grid());
  BlockDecomposition out;
  out.terms[0] = delta_q(spec[0], q, part) - spec[1];
  out.terms[1] = std::move(spec[2]);
  out.terms[2] = std::move(spec[3]);
  out.terms[3] = delta_q(spec[4], q, part);
  return out;
}

inline BlockDecomposition bony_block_decompose(const SpectralField& f, const SpectralField& g, int q) {
  require_same_grid(f, g);
  const auto& part = DyadicPartition::shared(f.grid());
  if (f.is_real() && g.is_real()) return bony_block_decompose(BlockCache(f, g, part), q);
  const SpectralField fr = f.real_part(), fi = f.imag_part(), gr = g.real_part(), gi = g.imag_part();
  const auto rr = bony_block_decompose(BlockCache(fr, gr, part), q);
  const auto ii = bony_block_decompose(BlockCache(fi, gi, part), q);
  const auto ri = bony_block_decompose(BlockCache(fr, gi, part), q);
  const auto ir = bony_block_decompose(BlockCache(fi, gr, part), q);
  BlockDecomposition out;
  for (std::size_t t = 0; t < 4; ++t) {
    out.terms[t] = detail::combine_parts(rr.terms[t], ii.terms[t], ri.terms[t], ir.terms[t]);
  }
  return out;
}

/// Which multiplier the commutator [M, f] g = M(f g) - f M g is taken with.
struct CommutatorKind {
  enum class Op { delta, low_pass } op = Op::delta;
  int index = 0;

  static CommutatorKind delta(int q) { return {Op::delta, q}; }
  static CommutatorKind low_pass(int n) { return {Op::low_pass, n}; }
};

inline SpectralField apply_kind(const SpectralField& f, CommutatorKind kind) {
  return kind.op == CommutatorKind::Op::delta ? delta_q(f, kind.index) : s_q(f, kind.index);
}

inline SpectralField commutator(const SpectralField& f, const SpectralField& g, CommutatorKind kind) {
  return apply_kind(product(f, g), kind) - product(f, apply_kind(g, kind));
}

}  // namespace lcflow
