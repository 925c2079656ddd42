#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "lcflow/io.hpp"

using namespace lcflow;
namespace fs = std::filesystem;

namespace {

// A fresh directory per test, removed afterwards.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("lcflow_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) { return read_text_file(path); }

bool bit_equal(const SpectralField& a, const SpectralField& b) {
  auto x = a.coeffs(), y = b.coeffs();
  if (x.size() != y.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::memcmp(&x[k], &y[k], sizeof(cplx)) != 0) return false;
  }
  return true;
}

bool bit_equal(const State& a, const State& b) {
  return bit_equal(a.u[0], b.u[0]) && bit_equal(a.u[1], b.u[1]) && bit_equal(a.d[0], b.d[0]) &&
         bit_equal(a.d[1], b.d[1]);
}

}  // namespace

TEST(Config, DefaultsFromEmptyText) {
  const auto cfg = parse_config("");
  EXPECT_EQ(cfg.solver.grid.n, 64);
  EXPECT_TRUE(cfg.solver.coefficients.is_ansatz());
  EXPECT_EQ(cfg.initial.profile, "random");
  EXPECT_FALSE(cfg.perturbation.has_value());
  EXPECT_EQ(cfg.out_dir, "out");
  EXPECT_EQ(cfg.verify.trials, 100);
}

TEST(Config, FullFile) {
  const auto cfg = parse_config(
      "# comment\n"
      "[grid]\nn = 32\npadding = 3/2\n"
      "[time]\ndt = 5e-4\nt_end = 0.5\nscheme = rk2\n"
      "[coefficients]\npreset = general\nnu = 0.5\nmu1 = 1\nmu2 = -1\nmu3 = 0\nmu4 = 1\nmu5 = 3\nmu6 = 1\n"
      "[initial]\nprofile = random\nseed = 99\ndecay = 2\n"
      "[output]\ndir = results\nenergy_cadence = 10\n"
      "[perturbation]\nmode = random\nseed = 5\namplitude = 1e-6\n"
      "[osgood]\ngamma = 1/6\nc_cap = 10\n",
      Mode::twin);
  EXPECT_EQ(cfg.solver.grid.n, 32);
  EXPECT_EQ(cfg.solver.grid.padding, Padding::three_halves);
  EXPECT_EQ(cfg.solver.dt, 5e-4);
  EXPECT_EQ(cfg.solver.scheme, Scheme::if_rk2);
  EXPECT_EQ(cfg.solver.coefficients.nu, 0.5);
  EXPECT_EQ(cfg.solver.coefficients.lambda2, 2.0);
  EXPECT_EQ(cfg.initial.seed, 99u);
  EXPECT_EQ(cfg.out_dir, "results");
  EXPECT_EQ(cfg.solver.energy_cadence, 10);
  ASSERT_TRUE(cfg.perturbation.has_value());
  EXPECT_FALSE(cfg.perturbation->identical);
  EXPECT_EQ(cfg.perturbation->amplitude, 1e-6);
  EXPECT_EQ(cfg.perturbation->decay, 2.0);  // inherits the initial decay
  EXPECT_DOUBLE_EQ(cfg.osgood.gamma, 1.0 / 6.0);
  EXPECT_EQ(cfg.osgood.c_cap, 10.0);
}

TEST(Config, Rejections) {
  auto bad = [](const std::string& text, Mode mode = Mode::run) {
    EXPECT_THROW(parse_config(text, mode), ConfigError) << text;
  };
  bad("[grid]\nn = 7\n");
  bad("[grid]\nnn = 64\n");
  bad("[gird]\nn = 64\n");
  bad("n = 64\n");
  bad("[grid]\nn = sixty\n");
  bad("[grid]\nn = 64\npadding = 3\n");
  bad("[time]\ndt = -1\n");
  bad("[time]\ndt = 1/0\n");
  bad("[time]\nscheme = rk4\n");
  bad("[coefficients]\nmu1 = 2\n");
  bad("[coefficients]\npreset = general\nmu1 = 1\n");
  bad("[coefficients]\npreset = general\nmu1 = 1\nmu2 = 1\nmu3 = 0\nmu4 = 2\nmu5 = 3\nmu6 = 1\n");
  bad("[coefficients]\npreset = custom\n");
  bad("[initial]\nseed = -3\n");
  bad("[initial]\nprofile = vortex\n");
  bad("[perturbation]\nmode = identical\namplitude = 1e-6\n", Mode::twin);
  bad("[perturbation]\nmode = random\namplitude = -1\n", Mode::twin);
  bad("", Mode::twin);
  bad("[osgood]\nc_cap = 0.5\n");
  bad("[osgood]\ngamma = 1\n");
  bad("[verify]\ntrials = 10\n");
  bad("[grid\nn = 64\n");
  EXPECT_THROW(load_config("/nonexistent/lcflow.ini"), IoError);
  EXPECT_THROW(parse_mode("plot"), ConfigError);
  EXPECT_EQ(parse_mode("twin"), Mode::twin);
}

TEST(Config, TrailingComments) {
  const auto cfg = parse_config("[grid]\nn = 32   ; even, >= 8\n[output]\ndir = a#b  # kept: no space before #\n");
  EXPECT_EQ(cfg.solver.grid.n, 32);
  EXPECT_EQ(cfg.out_dir, "a#b");
}

TEST(Config, IdenticalPerturbation) {
  const auto cfg = parse_config("[perturbation]\nmode = identical\n", Mode::twin);
  ASSERT_TRUE(cfg.perturbation.has_value());
  EXPECT_TRUE(cfg.perturbation->identical);
}

TEST(Snapshot, RoundTripIsBitExact) {
  TempDir dir;
  const State s = generate_initial(InitialSpec{}, GridSpec{32});
  persist(s, dir / "s.lcsf");
  const State back = load_state(dir / "s.lcsf", GridSpec{32});
  EXPECT_TRUE(bit_equal(s, back));
  EXPECT_EQ(slurp(dir / "s.lcsf").size(), 16u + 4u * 32u * 32u * 16u);
}

TEST(Snapshot, CorruptionsAreReported) {
  const State s = State::rest(GridSpec{8});
  const std::string good = encode_snapshot({&s.u[0], &s.u[1], &s.d[0], &s.d[1]});
  EXPECT_EQ(good.substr(0, 4), "LCSF");

  std::string magic = good;
  magic[1] = 'X';
  try {
    decode_snapshot(magic);
    FAIL() << "bad magic accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }

  std::string version = good;
  version[4] = 9;
  try {
    decode_snapshot(version);
    FAIL() << "bad version accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }

  EXPECT_THROW(decode_snapshot(good.substr(0, good.size() - 1)), IoError);
  EXPECT_THROW(decode_snapshot(good.substr(0, 10)), IoError);
  EXPECT_THROW(decode_snapshot(good + "x"), FormatError);
  EXPECT_NO_THROW(decode_snapshot(good));
}

TEST(Snapshot, LoadChecksGridAndComponents) {
  TempDir dir;
  const State s = State::rest(GridSpec{16});
  persist(s, dir / "s.lcsf");
  EXPECT_THROW(load_state(dir / "s.lcsf", GridSpec{32}), ConfigError);
  write_file(dir / "two.lcsf", encode_snapshot({&s.u[0], &s.u[1]}));
  try {
    load_state(dir / "two.lcsf", GridSpec{16});
    FAIL() << "two-component snapshot accepted as a state";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 12u);
  }
  EXPECT_THROW(load_state(dir / "missing.lcsf", GridSpec{16}), IoError);
  SpectralField complex_field(GridSpec{16}, false);
  complex_field.at(1, 0) = cplx(1.0, 0.0);  // no conjugate partner at (-1, 0)
  write_file(dir / "cplx.lcsf", encode_snapshot({&s.u[0], &s.u[1], &complex_field, &s.d[1]}));
  EXPECT_THROW(load_state(dir / "cplx.lcsf", GridSpec{16}), FormatError);
}

TEST(Csv, SeventeenDigitsAndHeader) {
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(csv_number(1.0), "1");
  EXPECT_EQ(std::stod(csv_number(1.0 / 3.0)), 1.0 / 3.0);
  TempDir dir;
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w.row({1.5, -2.0});
    w.cells({"x", "y"});
  }
  EXPECT_EQ(slurp(dir / "t.csv"), "a,b\n1.5,-2\nx,y\n");
  EXPECT_THROW(CsvWriter("/nonexistent/dir/t.csv", {"a"}), IoError);
}

TEST(InitialData, Profiles) {
  const GridSpec g{16};
  InitialSpec spec;
  spec.profile = "rest-unit";
  EXPECT_TRUE(bit_equal(generate_initial(spec, g), State::rest(g)));
  spec.profile = "constant-director";
  spec.director_value = 1.5;
  EXPECT_EQ(generate_initial(spec, g).d[0](0, 0), cplx(1.5));
  spec.profile = "shear";
  EXPECT_NEAR(l2_norm(generate_initial(spec, g).u), std::sqrt(2.0) * std::numbers::pi, 1e-13);
}

TEST(InitialData, RandomIsDeterministicAndSolenoidal) {
  const GridSpec g{64};
  InitialSpec spec;
  spec.seed = 17;
  spec.decay = 2.0;
  const State a = generate_initial(spec, g), b = generate_initial(spec, g);
  EXPECT_TRUE(bit_equal(a, b));
  EXPECT_LE(divergence_residual(a.u), 1e-13);
  EXPECT_EQ(a.u[0](0, 0), cplx(0.0));
  EXPECT_NEAR(l2_norm(a.u), spec.velocity_amplitude, 1e-13);
  EXPECT_NEAR(l2_norm(a.d - State::rest(g).d), spec.director_amplitude, 1e-13);
  EXPECT_TRUE(std::isfinite(hs_norm(a.d, 1.0)));
  spec.seed = 18;
  EXPECT_FALSE(bit_equal(a, generate_initial(spec, g)));
}

TEST(Perturbation, ZeroAmplitudeEqualsIdentical) {
  const GridSpec g{32};
  const State s = generate_initial(InitialSpec{}, g);
  PerturbationSpec zero;
  zero.identical = false;
  zero.amplitude = 0.0;
  EXPECT_TRUE(bit_equal(perturb(s, zero), s));
  PerturbationSpec same;
  EXPECT_TRUE(bit_equal(perturb(s, same), s));
  PerturbationSpec small;
  small.identical = false;
  small.amplitude = 1e-6;
  const State p = perturb(s, small);
  // Differences of O(1) states: cancellation leaves ~1e-16 absolute error.
  EXPECT_NEAR(l2_norm(p.u - s.u), 1e-6, 1e-14);
  EXPECT_NEAR(l2_norm(p.d - s.d), 1e-6, 1e-14);
  EXPECT_LE(divergence_residual(p.u), 1e-13);
}

TEST(Experiments, RunWritesTracesAndSnapshots) {
  TempDir dir;
  auto cfg = parse_config("[grid]\nn = 16\n[time]\nt_end = 0.02\n[output]\nenergy_cadence = 5\nsnapshot_cadence = 10\n");
  cfg.out_dir = dir.str();
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.energy.size(), 5u);
  const std::string csv = slurp(dir / "energy.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,E_total,E_kin,E_elastic,D_total,D_term1,D_term2,D_term3,D_term4,D_term5,div_residual");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_TRUE(fs::exists(dir / "energy_law.csv"));
  EXPECT_TRUE(fs::exists(dir / "state_00000000.lcsf"));
  EXPECT_TRUE(fs::exists(dir / "state_00000020.lcsf"));
  const State last = load_state(dir / "state_00000020.lcsf", cfg.solver.grid);
  EXPECT_TRUE(bit_equal(last, res.final_state));
}

TEST(Experiments, ZeroDeltaTwinMatchesIdenticalByteForByte) {
  TempDir a, b;
  const std::string base = "[grid]\nn = 16\n[time]\nt_end = 0.02\n[output]\nuniqueness_cadence = 5\n";
  auto ca = parse_config(base + "[perturbation]\nmode = identical\n", Mode::twin);
  auto cb = parse_config(base + "[perturbation]\nmode = random\namplitude = 0\n", Mode::twin);
  ca.out_dir = a.str();
  cb.out_dir = b.str();
  const auto ra = twin_experiment(ca);
  twin_experiment(cb);
  EXPECT_EQ(slurp(a / "twin.csv"), slurp(b / "twin.csv"));
  EXPECT_EQ(slurp(a / "osgood_report.csv"), slurp(b / "osgood_report.csv"));
  EXPECT_LE(ra.max_phi, 1e-20);
  EXPECT_TRUE(ra.report.holds);
}

TEST(Experiments, PerturbedTwinHasPositivePhi) {
  TempDir dir;
  auto cfg = parse_config(
      "[grid]\nn = 16\n[time]\nt_end = 0.02\n[output]\nuniqueness_cadence = 5\n"
      "[perturbation]\nmode = random\namplitude = 1e-6\n",
      Mode::twin);
  cfg.out_dir = dir.str();
  const auto res = twin_experiment(cfg);
  EXPECT_GT(res.records.front().phi, 0.0);
  EXPECT_TRUE(res.report.holds);
  EXPECT_TRUE(std::isfinite(res.report.c_fit));
}
