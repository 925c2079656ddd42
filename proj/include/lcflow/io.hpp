#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lcflow/energy.hpp"
#include "lcflow/ericksen_leslie.hpp"
#include "lcflow/random_field.hpp"
#include "lcflow/run.hpp"

namespace lcflow {

// ---------------------------------------------------------------------------
// Configuration

enum class Mode { run, twin, verify, decompose };

inline Mode parse_mode(const std::string& s) {
  if (s == "run") return Mode::run;
  if (s == "twin") return Mode::twin;
  if (s == "verify") return Mode::verify;
  if (s == "decompose") return Mode::decompose;
  throw ConfigError("unknown mode '" + s + "'");
}

/// Initial data. Profiles:
///   random             seeded solenoidal u, d = e1 + perturbation (see generate_initial)
///   rest-unit          u = 0, d = (1, 0)
///   shear              u = (sin y, 0), d = (1, 0)
///   constant-director  u = 0, d = (director_value, 0)
struct InitialSpec {
  std::string profile = "random";
  std::uint64_t seed = 1;
  double decay = 4.0;
  double velocity_amplitude = 1.0;  // ||u0||_{L^2}
  double director_amplitude = 0.3;  // ||d0 - e1||_{L^2}
  double director_value = 2.0;

  void validate() const {
    static const std::set<std::string> known{"random", "rest-unit", "shear", "constant-director"};
    if (!known.count(profile)) throw ConfigError("unknown initial profile '" + profile + "'");
    if (!std::isfinite(decay)) throw ConfigError("initial decay must be finite");
    if (!(velocity_amplitude >= 0.0) || !(director_amplitude >= 0.0)) {
      throw ConfigError("initial amplitudes must be >= 0");
    }
    if (!std::isfinite(director_value)) throw ConfigError("director_value must be finite");
  }
};

/// Second twin's data: identical, or u + delta P(noise), d + delta noise with unit-L^2 noise.
struct PerturbationSpec {
  bool identical = true;
  std::uint64_t seed = 2;
  double amplitude = 0.0;
  double decay = 4.0;

  void validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("perturbation amplitude must be >= 0");
    if (!std::isfinite(decay)) throw ConfigError("perturbation decay must be finite");
  }
};

struct OsgoodSpec {
  double gamma = 1.0 / 6.0;
  double eta = 1.0 / 600.0;  // reported only; the fitted constant absorbs C_eta
  std::optional<double> c_cap;
};

struct VerifySpec {
  int trials = 100;
  std::uint64_t seed = 1;
  double decay = 1.0;
};

struct ExperimentConfig {
  Mode mode = Mode::run;
  SolverConfig solver{};
  InitialSpec initial{};
  std::optional<PerturbationSpec> perturbation;
  OsgoodSpec osgood{};
  VerifySpec verify{};
  std::string out_dir = "out";

  void validate() const {
    solver.validate();
    initial.validate();
    if (perturbation) perturbation->validate();
    if (mode == Mode::twin && !perturbation) {
      throw ConfigError("twin mode needs a [perturbation] section (mode = identical or mode = random)");
    }
    if (!(osgood.gamma > 0.0 && osgood.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(osgood.eta > 0.0)) throw ConfigError("eta must be positive");
    if (osgood.c_cap && !(*osgood.c_cap >= 1.0)) throw ConfigError("c_cap must be >= 1");
    if (verify.trials < 30) throw ConfigError("verify.trials must be >= 30");
  }
};

namespace detail {

/// Numbers may be written as fractions ("1/6").
inline double parse_number(const std::string& key, const std::string& text) {
  auto one = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "': not a number: '" + text + "'");
    }
    if (used != t.size()) throw ConfigError("'" + key + "': trailing characters in '" + text + "'");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return one(text);
  const double den = one(text.substr(slash + 1));
  if (den == 0.0) throw ConfigError("'" + key + "': zero denominator");
  return one(text.substr(0, slash)) / den;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("'" + key + "': expected an unsigned integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': out of range");
  }
}

inline int parse_int(const std::string& key, const std::string& text) {
  const std::uint64_t v = parse_u64(key, text);
  if (v > 1'000'000'000ULL) throw ConfigError("'" + key + "': out of range");
  return static_cast<int>(v);
}

// Reads one section and rejects keys it does not know.
class Section {
 public:
  Section(const boost::property_tree::ptree& root, std::string name, std::set<std::string> allowed)
      : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) {
      present_ = true;
      for (const auto& [key, node] : *child) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
        values_.emplace_back(key, strip_comment(node.get_value<std::string>()));
      }
    }
  }

  bool present() const { return present_; }

  std::optional<std::string> text(const std::string& key) const {
    for (const auto& [k, v] : values_) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
  void read(const std::string& key, double& out) const {
    if (auto t = text(key)) out = parse_number(qualified(key), *t);
  }
  void read(const std::string& key, int& out) const {
    if (auto t = text(key)) out = parse_int(qualified(key), *t);
  }
  void read(const std::string& key, std::uint64_t& out) const {
    if (auto t = text(key)) out = parse_u64(qualified(key), *t);
  }
  void read(const std::string& key, std::string& out) const {
    if (auto t = text(key)) out = *t;
  }

 private:
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  // The ini reader only knows whole-line comments; "n = 64  ; note" keeps "64".
  static std::string strip_comment(std::string v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if ((v[i] == ';' || v[i] == '#') && (v[i - 1] == ' ' || v[i - 1] == '\t')) {
        v.erase(i);
        break;
      }
    }
    v.erase(v.find_last_not_of(" \t") + 1);
    return v;
  }

  std::string name_;
  bool present_ = false;
  std::vector<std::pair<std::string, std::string>> values_;
};

}  // namespace detail

/// Parses sectioned key = value text. Absent keys keep their defaults.
inline ExperimentConfig parse_config(const std::string& text, Mode mode = Mode::run) {
  boost::property_tree::ptree root;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  static const std::set<std::string> sections{"grid",   "time",    "coefficients", "initial",
                                              "output", "perturbation", "osgood", "verify"};
  for (const auto& [name, node] : root) {
    if (node.empty() && !node.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
  }

  ExperimentConfig cfg;
  cfg.mode = mode;
  auto& s = cfg.solver;

  detail::Section grid(root, "grid", {"n", "padding"});
  grid.read("n", s.grid.n);
  if (auto p = grid.text("padding")) s.grid.padding = parse_padding(*p);

  detail::Section tm(root, "time", {"dt", "t_end", "scheme"});
  tm.read("dt", s.dt);
  tm.read("t_end", s.t_end);
  if (auto sc = tm.text("scheme")) s.scheme = parse_scheme(*sc);

  detail::Section co(root, "coefficients", {"preset", "nu", "mu1", "mu2", "mu3", "mu4", "mu5", "mu6"});
  double nu = 1.0;
  co.read("nu", nu);
  std::string preset = "ansatz";
  co.read("preset", preset);
  if (preset == "ansatz") {
    for (const char* k : {"mu1", "mu2", "mu3", "mu4", "mu5", "mu6"}) {
      if (co.text(k)) throw ConfigError(std::string("coefficients.") + k + " is fixed by preset = ansatz");
    }
    s.coefficients = LeslieCoefficients::ansatz(nu);
  } else if (preset == "general") {
    std::array<double, 6> mu{};
    for (int i = 0; i < 6; ++i) {
      const std::string k = "mu" + std::to_string(i + 1);
      if (!co.text(k)) throw ConfigError("coefficients." + k + " is required for preset = general");
      co.read(k, mu[static_cast<std::size_t>(i)]);
    }
    s.coefficients = LeslieCoefficients::general(mu, nu);
  } else {
    throw ConfigError("coefficients.preset must be ansatz or general");
  }

  detail::Section ini(root, "initial",
                      {"profile", "seed", "decay", "velocity_amplitude", "director_amplitude", "director_value"});
  ini.read("profile", cfg.initial.profile);
  ini.read("seed", cfg.initial.seed);
  ini.read("decay", cfg.initial.decay);
  ini.read("velocity_amplitude", cfg.initial.velocity_amplitude);
  ini.read("director_amplitude", cfg.initial.director_amplitude);
  ini.read("director_value", cfg.initial.director_value);

  detail::Section out(root, "output", {"dir", "energy_cadence", "uniqueness_cadence", "snapshot_cadence"});
  out.read("dir", cfg.out_dir);
  out.read("energy_cadence", s.energy_cadence);
  out.read("uniqueness_cadence", s.uniqueness_cadence);
  out.read("snapshot_cadence", s.snapshot_cadence);

  detail::Section pert(root, "perturbation", {"mode", "seed", "amplitude", "decay"});
  if (pert.present()) {
    PerturbationSpec p;
    p.decay = cfg.initial.decay;
    std::string pm = "random";
    pert.read("mode", pm);
    if (pm == "identical") {
      for (const char* k : {"seed", "amplitude", "decay"}) {
        if (pert.text(k)) throw ConfigError(std::string("perturbation.") + k + " conflicts with mode = identical");
      }
    } else if (pm == "random") {
      p.identical = false;
      pert.read("seed", p.seed);
      pert.read("amplitude", p.amplitude);
      pert.read("decay", p.decay);
    } else {
      throw ConfigError("perturbation.mode must be identical or random");
    }
    cfg.perturbation = p;
  }

  detail::Section osg(root, "osgood", {"gamma", "eta", "c_cap"});
  osg.read("gamma", cfg.osgood.gamma);
  osg.read("eta", cfg.osgood.eta);
  if (osg.text("c_cap")) {
    double cap = 0.0;
    osg.read("c_cap", cap);
    cfg.osgood.c_cap = cap;
  }

  detail::Section ver(root, "verify", {"trials", "seed", "decay"});
  ver.read("trials", cfg.verify.trials);
  ver.read("seed", cfg.verify.seed);
  ver.read("decay", cfg.verify.decay);

  cfg.validate();
  return cfg;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ExperimentConfig load_config(const std::string& path, Mode mode = Mode::run) {
  return parse_config(read_text_file(path), mode);
}

// ---------------------------------------------------------------------------
// Initial data

/// Deterministic in (spec, grid). For the random profile u0 = a P(g)/||P(g)|| with gaussian
/// coefficients of decay s0, and d0 = e1 + b h/||h|| with h of decay s0 + 1 (one derivative
/// smoother, so grad d0 has the same decay as u0).
inline State generate_initial(const InitialSpec& spec, const GridSpec& grid) {
  spec.validate();
  grid.validate();
  if (spec.profile == "rest-unit") return State::rest(grid);
  if (spec.profile == "constant-director") return State::rest(grid, spec.director_value, 0.0);
  if (spec.profile == "shear") {
    State s = State::rest(grid);
    s.u[0] = SpectralField::sine(grid, 0, 1);
    return s;
  }
  Rng rng(spec.seed);
  State s = State::rest(grid);
  VectorField2 u = random_solenoidal(grid, rng, spec.decay);
  const double un = l2_norm(u);
  s.u = un > 0.0 ? (spec.velocity_amplitude / un) * u : u;
  VectorField2 h = random_vector_field(grid, rng, spec.decay + 1.0);
  const double hn = l2_norm(h);
  if (hn > 0.0) s.d += (spec.director_amplitude / hn) * h;
  return s;
}

/// The second twin. delta = 0 or "identical" returns an exact copy.
inline State perturb(const State& s, const PerturbationSpec& p) {
  p.validate();
  if (p.identical || p.amplitude == 0.0) return s;
  const GridSpec& grid = s.grid();
  Rng rng(p.seed);
  State out = s;
  VectorField2 nu = random_solenoidal(grid, rng, p.decay);
  VectorField2 nd = random_vector_field(grid, rng, p.decay);
  const double a = l2_norm(nu), b = l2_norm(nd);
  if (a > 0.0) out.u += (p.amplitude / a) * nu;
  if (b > 0.0) out.d += (p.amplitude / b) * nd;
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots: "LCSF", u32 version, u32 N, u32 component count, then each
// component's N*N complex coefficients as little-endian f64 (re, im) pairs.

inline constexpr std::uint32_t lcsf_version = 1;

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline void put_f64(std::string& buf, double x) {
  std::uint64_t v;
  std::memcpy(&v, &x, sizeof v);
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline std::uint32_t get_u32(const std::string& buf, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + b])) << (8 * b);
  return v;
}
inline double get_f64(const std::string& buf, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at + b])) << (8 * b);
  double x;
  std::memcpy(&x, &v, sizeof x);
  return x;
}

}  // namespace detail

struct Snapshot {
  int n = 0;
  std::vector<std::vector<cplx>> components;
};

inline std::string encode_snapshot(const std::vector<const SpectralField*>& fields) {
  if (fields.empty()) throw DomainError("snapshot needs at least one component");
  const int n = fields.front()->n();
  std::string buf("LCSF");
  detail::put_u32(buf, lcsf_version);
  detail::put_u32(buf, static_cast<std::uint32_t>(n));
  detail::put_u32(buf, static_cast<std::uint32_t>(fields.size()));
  for (const auto* f : fields) {
    if (f->n() != n) throw ConfigError("snapshot components must share a grid");
    for (const cplx& z : f->coeffs()) {
      detail::put_f64(buf, z.real());
      detail::put_f64(buf, z.imag());
    }
  }
  return buf;
}

inline Snapshot decode_snapshot(const std::string& buf) {
  constexpr std::size_t header = 16;
  if (buf.size() < 4) throw IoError("truncated snapshot: missing magic");
  if (buf.compare(0, 4, "LCSF") != 0) throw FormatError(0, "bad magic (expected LCSF)");
  if (buf.size() < header) throw IoError("truncated snapshot header");
  const std::uint32_t version = detail::get_u32(buf, 4);
  if (version != lcsf_version) throw FormatError(4, "unsupported version " + std::to_string(version));
  const std::uint32_t n = detail::get_u32(buf, 8);
  const std::uint32_t count = detail::get_u32(buf, 12);
  if (n == 0 || n > 65536) throw FormatError(8, "implausible grid size " + std::to_string(n));
  const std::size_t per = static_cast<std::size_t>(n) * n;
  const std::size_t need = header + static_cast<std::size_t>(count) * per * 16;
  if (buf.size() < need) {
    throw IoError("truncated snapshot: " + std::to_string(buf.size()) + " of " + std::to_string(need) + " bytes");
  }
  if (buf.size() > need) throw FormatError(need, "trailing bytes after the last component");
  Snapshot s;
  s.n = static_cast<int>(n);
  s.components.resize(count);
  std::size_t at = header;
  for (auto& c : s.components) {
    c.resize(per);
    for (auto& z : c) {
      z = cplx(detail::get_f64(buf, at), detail::get_f64(buf, at + 8));
      at += 16;
    }
  }
  return s;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

/// State as four components u1, u2, d1, d2. Time is not stored.
inline void persist(const State& s, const std::string& path) {
  write_file(path, encode_snapshot({&s.u[0], &s.u[1], &s.d[0], &s.d[1]}));
}

inline State load_state(const std::string& path, const GridSpec& grid) {
  const Snapshot snap = decode_snapshot(read_text_file(path));
  if (snap.n != grid.n) {
    throw ConfigError("snapshot grid " + std::to_string(snap.n) + " does not match configured grid " +
                      std::to_string(grid.n));
  }
  if (snap.components.size() != 4) throw FormatError(12, "a state has 4 components");
  State s;
  // The stored bits are kept as written (load(persist(s)) == s bit for bit), after checking
  // that they already describe a real field with empty Nyquist lines.
  auto field = [&](std::size_t k) {
    const auto& raw = snap.components[k];
    SpectralField f = SpectralField::from_coefficients(grid, raw, true);
    auto c = f.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] != raw[i]) {
        throw FormatError(16 + (k * c.size() + i) * 16, "component " + std::to_string(k) +
                                                             " is not the spectrum of a real band-limited field");
      }
      c[i] = raw[i];
    }
    return f;
  };
  s.u = VectorField2(field(0), field(1));
  s.d = VectorField2(field(2), field(3));
  return s;
}

// ---------------------------------------------------------------------------
// CSV: header row, numbers with 17 significant digits.

inline std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
    cells(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> c;
    c.reserve(values.size());
    for (double v : values) c.push_back(csv_number(v));
    cells(c);
  }

  void cells(const std::vector<std::string>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << values[k];
    out_ << '\n';
    if (!out_) throw IoError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

inline const std::vector<std::string>& energy_csv_header() {
  static const std::vector<std::string> h{"t",       "E_total", "E_kin",   "E_elastic", "D_total",     "D_term1",
                                          "D_term2", "D_term3", "D_term4", "D_term5",   "div_residual"};
  return h;
}

inline std::vector<double> energy_csv_row(const EnergyRecord& r) {
  return {r.t,          r.e_total,    r.e_kinetic,  r.e_elastic,  r.d_total,       r.d_terms[0],
          r.d_terms[1], r.d_terms[2], r.d_terms[3], r.d_terms[4], r.div_residual};
}

inline const std::vector<std::string>& twin_csv_header() {
  static const std::vector<std::string> h{"t",        "Phi",     "frakD",           "grad_du_Hm12",
                                          "grad_dd_H12", "strain_director", "strain_dyad", "F_hat"};
  return h;
}

inline std::vector<double> twin_csv_row(const UniquenessRecord& r) {
  return {r.t, r.phi, r.frak_d, r.grad_du_hm12, r.grad_dd_h12, r.strain_director, r.strain_dyad, r.f_hat};
}

// ---------------------------------------------------------------------------
// Experiment drivers

inline std::string snapshot_name(const std::string& dir, const std::string& stem, std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%08zu.lcsf", step);
  return (std::filesystem::path(dir) / (stem + buf)).string();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

/// Single run. Writes energy.csv (trace columns) and energy_law.csv (t, cumulative
/// dissipation, residual), plus snapshots at the configured cadence.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  const State init = generate_initial(cfg.initial, cfg.solver.grid);
  const auto dir = std::filesystem::path(cfg.out_dir);
  CsvWriter trace((dir / "energy.csv").string(), energy_csv_header());
  CsvWriter law((dir / "energy_law.csv").string(), {"t", "cum_dissipation", "residual"});
  RunCallbacks cb;
  cb.on_energy = [&](const EnergySample& e) {
    trace.row(energy_csv_row(e.record));
    law.row({e.record.t, e.cum_dissipation, e.residual});
  };
  cb.on_snapshot = [&](const State& s, std::size_t step) { persist(s, snapshot_name(cfg.out_dir, "state", step)); };
  return run(cfg.solver, init, cb);
}

/// Twin run. Writes twin.csv and osgood_report.csv, plus paired snapshots.
inline TwinResult twin_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.perturbation) throw ConfigError("twin experiment needs a perturbation spec");
  ensure_dir(cfg.out_dir);
  const State first = generate_initial(cfg.initial, cfg.solver.grid);
  const State second = perturb(first, *cfg.perturbation);
  const auto dir = std::filesystem::path(cfg.out_dir);
  CsvWriter trace((dir / "twin.csv").string(), twin_csv_header());
  TwinCallbacks cb;
  cb.on_record = [&](const UniquenessRecord& r) { trace.row(twin_csv_row(r)); };
  cb.on_snapshot = [&](const State& a, const State& b, std::size_t step) {
    persist(a, snapshot_name(cfg.out_dir, "twin_a", step));
    persist(b, snapshot_name(cfg.out_dir, "twin_b", step));
  };
  TwinResult res = run_twin(cfg.solver, first, second, cb, cfg.osgood.gamma, cfg.osgood.c_cap);
  CsvWriter rep((dir / "osgood_report.csv").string(),
                {"holds", "C_fit", "max_violation", "first_violation", "max_Phi", "gamma", "eta"});
  const auto& r = res.report;
  rep.cells({r.holds ? "1" : "0", csv_number(r.c_fit), csv_number(r.max_violation),
             r.first_violation ? std::to_string(*r.first_violation) : "-1", csv_number(res.max_phi),
             csv_number(cfg.osgood.gamma), csv_number(cfg.osgood.eta)});
  return res;
}

}  // namespace lcflow
