// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "jetedmd/cli.hpp"
#include "jetedmd/errors.hpp"
#include "jetedmd/io.hpp"
#include "jetedmd/numerics.hpp"

using namespace jetedmd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::path(JETEDMD_BINARY_DIR) / "test_tmp" / tag;
  fs::create_directories(p);
  return p;
}

fs::path write_config(const std::string& tag, const std::string& text) {
  const fs::path dir = temp_dir(tag);
  const fs::path p = dir / "config.toml";
  write_text_atomic(p, text);
  return p;
}

}  // namespace

TEST_CASE("toml parsing") {
  const TomlTable t = TomlTable::parse_string(R"(
# comment
top = 3
[system]
name = "van_der_pol"
mu = 1.5            # inline comment
flag = true
[sampling]
seed = 42
box = [[-1.0, 1.0], [-2, 2]]
counts = [1, 2, 3]
label = "a \"quoted\" string"
)");
  CHECK(t.get_int("top", 0) == 3);
  CHECK(t.require_string("system.name") == "van_der_pol");
  CHECK(t.get_number("system.mu", 0.0) == 1.5);
  CHECK(t.get_bool("system.flag", false));
  CHECK(t.get_int("sampling.seed", 0) == 42);
  const auto box = t.get_box("sampling.box");
  REQUIRE(box.has_value());
  CHECK((*box)[1][0] == -2.0);
  const auto v = t.get_vector("sampling.counts");
  REQUIRE(v.has_value());
  CHECK(v->size() == 3);
  CHECK(t.get_string("sampling.label", "") == "a \"quoted\" string");
  CHECK_FALSE(t.contains("missing.key"));
  CHECK_THROWS_AS(t.at("missing.key"), ConfigError);

  CHECK_THROWS_AS(TomlTable::parse_string("key 3"), ConfigError);
  CHECK_THROWS_AS(TomlTable::parse_string("a = [1, 2"), ConfigError);
  CHECK_THROWS_AS(TomlTable::parse_string("a = 1\na = 2"), ConfigError);
}

TEST_CASE("csv round trips") {
  const fs::path dir = temp_dir("csv");
  const Provenance prov{kVersion, 0x1234, 7};

  SUBCASE("spectrum") {
    const std::vector<SpectrumRow> rows{
        {1.0, -2.0, "jetedmd"}, {0.3333333333333333, 0.1, "theory"}};
    const fs::path p = dir / "spectrum.csv";
    write_spectrum_csv(p, rows, prov);
    const auto back = read_spectrum_csv(p);
    REQUIRE(back.size() == 2);
    CHECK(back[0].re == 1.0);
    CHECK(back[0].im == -2.0);
    CHECK(back[0].source == "jetedmd");
    CHECK(back[1].re == 0.3333333333333333);
    // Provenance comment is present.
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    CHECK(first.find("# jetedmd") == 0);
    CHECK(first.find("seed=7") != std::string::npos);
  }

  SUBCASE("snapshots") {
    Eigen::MatrixXd x(2, 3), y(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    y << -1, -2, -3, 0.12345678901234567, -5, -6;
    const fs::path p = dir / "pairs.csv";
    write_snapshot_csv(p, x, y, prov);
    Eigen::MatrixXd xb, yb;
    read_snapshot_csv(p, xb, yb);
    CHECK(xb == x);
    CHECK(yb == y);
  }

  SUBCASE("matrix") {
    Eigen::MatrixXcd m(2, 2);
    m << Complex(1.0, 2.0), Complex(-0.5, 0.0), Complex(0.0, -3.0),
        Complex(1e-17, 1e17);
    const fs::path p = dir / "matrix.csv";
    write_matrix_csv(p, m, prov);
    CHECK(read_matrix_csv(p) == m);
  }

  SUBCASE("points") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    const fs::path p = dir / "points.csv";
    write_points_csv(p, x, prov);
    CHECK(read_points_csv(p) == x);
  }
}

TEST_CASE("config errors carry the offending field") {
  const fs::path cfg = write_config("bad_mn", R"(
[system]
name = "van_der_pol"
mu = 1.0
[kernel]
kind = "exponential"
sigma = 2.0
[estimator]
m = 7
n = 5
base_point = [0.0, 0.0]
[sampling]
seed = 1
count = 36
box = [[-1.0, 1.0], [-1.0, 1.0]]
[data]
mode = "velocity"
)");
  RunOptions opts;
  opts.config_path = cfg;
  opts.out_dir = temp_dir("bad_mn") / "out";
  try {
    run(Subcommand::Spectrum, opts);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("estimator.m") != std::string::npos);
  }
}

TEST_CASE("spectrum pipeline is deterministic and self-consistent") {
  const std::string config_text = R"(
[system]
name = "van_der_pol"
mu = 1.0
[kernel]
kind = "exponential"
sigma = 2.0
[estimator]
m = 3
n = 5
base_point = [0.0, 0.0]
[sampling]
seed = 11
count = 36
box = [[-1.0, 1.0], [-1.0, 1.0]]
[data]
mode = "velocity"
[spectrum]
theory = true
)";
  const fs::path cfg = write_config("spectrum_det", config_text);
  RunOptions opts;
  opts.config_path = cfg;
  opts.out_dir = temp_dir("spectrum_det") / "out_a";
  const ResultBundle a = run(Subcommand::Spectrum, opts);
  opts.out_dir = temp_dir("spectrum_det") / "out_b";
  const ResultBundle b = run(Subcommand::Spectrum, opts);
  CHECK(read_text(a.artifacts.at("spectrum")) == read_text(b.artifacts.at("spectrum")));

  // Round trip: the emitted spectrum re-parses into the same values.
  const auto rows = read_spectrum_csv(a.artifacts.at("spectrum"));
  std::vector<Complex> est, theory;
  for (const auto& r : rows) {
    if (r.source == "jetedmd") est.emplace_back(r.re, r.im);
    if (r.source == "theory") theory.emplace_back(r.re, r.im);
  }
  REQUIRE(est.size() == 10);  // r_3 in 2d
  REQUIRE(theory.size() == 10);
  CHECK(hausdorff(est, theory) < 1e-6);
}

TEST_CASE("compare_spectra") {
  const fs::path dir = temp_dir("compare");
  const Provenance prov{kVersion, 1, 1};
  const std::vector<SpectrumRow> a{{0.0, 0.0, "theory"}, {1.0, 0.0, "theory"}};
  std::vector<SpectrumRow> shifted = a;
  for (auto& r : shifted) r.re += 0.5;
  write_spectrum_csv(dir / "a.csv", a, prov);
  write_spectrum_csv(dir / "b.csv", shifted, prov);
  const SpectraComparison self = compare_spectra(dir / "a.csv", dir / "a.csv", dir);
  CHECK(self.hausdorff_distance == 0.0);
  const SpectraComparison off = compare_spectra(dir / "a.csv", dir / "b.csv", dir);
  CHECK(off.hausdorff_distance == doctest::Approx(0.5));
  CHECK(off.matches.size() == 2);
  CHECK(fs::exists(dir / "compare.json"));
}

TEST_CASE("sample and estimate pipelines write artifacts") {
  const std::string config_text = R"(
[system]
name = "quadratic_map"
[kernel]
kind = "exponential"
sigma = 1.0
[estimator]
m = 2
n = 4
base_point = [0.0, 0.0]
[sampling]
seed = 3
count = 40
box = [[-1.0, 1.0], [-1.0, 1.0]]
[data]
mode = "map"
)";
  const fs::path cfg = write_config("estimate", config_text);
  RunOptions opts;
  opts.config_path = cfg;
  opts.out_dir = temp_dir("estimate") / "out";
  const ResultBundle sample = run(Subcommand::Sample, opts);
  CHECK(fs::exists(sample.artifacts.at("samples")));
  CHECK(read_points_csv(sample.artifacts.at("samples")).cols() == 40);

  const ResultBundle est = run(Subcommand::Estimate, opts);
  const Eigen::MatrixXcd m = read_matrix_csv(est.artifacts.at("estimate_matrix"));
  CHECK(m.rows() == 6);
  CHECK(m.cols() == 6);
  CHECK(fs::exists(est.artifacts.at("summary")));
  CHECK(est.summary_json.find("config_hash") != std::string::npos);

  // Seed override changes the samples.
  RunOptions seeded = opts;
  seeded.seed = 99;
  seeded.out_dir = temp_dir("estimate") / "out_seeded";
  const ResultBundle sample2 = run(Subcommand::Sample, seeded);
  CHECK(read_text(sample.artifacts.at("samples")) !=
        read_text(sample2.artifacts.at("samples")));
}

TEST_CASE("reconstruct + predict pipeline") {
  const std::string config_text = R"(
[system]
name = "van_der_pol"
mu = 1.0
[kernel]
kind = "exponential"
sigma = 2.0
[sampling]
seed = 5
count = 50
box = [[-1.0, 1.0], [-1.0, 1.0]]
[data]
mode = "velocity"
[reconstruct]
variant = "field"
sigma = 2.0
m = 4
n = 8
anchor = [0.0, 0.0]
grid_lo = [-1.0, -1.0]
grid_hi = [1.0, 1.0]
grid_count = [5, 5]
[predict]
x0 = [0.5, 0.0]
steps = 100
dt = 0.01
)";
  const fs::path cfg = write_config("recon", config_text);
  RunOptions opts;
  opts.config_path = cfg;
  opts.out_dir = temp_dir("recon") / "out";
  const ResultBundle bundle = run(Subcommand::Predict, opts);
  CHECK(fs::exists(bundle.artifacts.at("model")));
  CHECK(fs::exists(bundle.artifacts.at("trajectory")));
  CHECK(fs::exists(bundle.artifacts.at("field_grid")));
  // Grid export holds the reconstructed field values on the nodes.
  Eigen::MatrixXd nodes, values;
  read_snapshot_csv(bundle.artifacts.at("field_grid"), nodes, values);
  CHECK(nodes.cols() == 25);

  // A standalone predict run can reload the serialized model.
  const std::string predict_only = std::string(R"(
[predict]
model = ")") + (opts.out_dir.value() / "model.json").string() + R"("
x0 = [0.5, 0.0]
steps = 10
dt = 0.01
)";
  const fs::path cfg2 = write_config("predict_only", predict_only);
  RunOptions opts2;
  opts2.config_path = cfg2;
  opts2.out_dir = temp_dir("predict_only") / "out";
  const ResultBundle again = run(Subcommand::Predict, opts2);
  CHECK(fs::exists(again.artifacts.at("trajectory")));
}

TEST_CASE("eigenfunctions pipeline exports normalized grids") {
  const std::string config_text = R"(
[system]
name = "duffing"
alpha = -1.0
beta = 1.0
delta = 0.5
[kernel]
kind = "exponential"
sigma = 1.0
[estimator]
m = 3
n = 6
[sampling]
seed = 13
count = 120
box = [[-1.5, 1.5], [-0.5, 0.5]]
[data]
mode = "velocity"
[eigenfunctions]
base_points = [[-1.0, 0.0], [1.0, 0.0]]
select = [[-1.0, 0.0]]
side = "left"
grid_lo = [-1.5, -0.5]
grid_hi = [1.5, 0.5]
grid_count = [11, 7]
)";
  const fs::path cfg = write_config("eigf", config_text);
  RunOptions opts;
  opts.config_path = cfg;
  opts.out_dir = temp_dir("eigf") / "out";
  const ResultBundle bundle = run(Subcommand::Eigenfunctions, opts);
  const fs::path grid = bundle.artifacts.at("eigenfunction_0");
  REQUIRE(fs::exists(grid));
  // Normalized: max modulus on the grid is 1.
  const std::string text = read_text(grid);
  std::istringstream in(text);
  std::string line;
  double max_abs = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    const auto last_comma = line.rfind(',');
    const auto second_last = line.rfind(',', last_comma - 1);
    const double abs_val = std::stod(line.substr(second_last + 1,
                                                 last_comma - second_last - 1));
    max_abs = std::max(max_abs, abs_val);
    ++rows;
  }
  CHECK(rows == 77);
  CHECK(max_abs == doctest::Approx(1.0));
}

TEST_CASE("exit-code mapping helpers") {
  CHECK(parse_subcommand("sample") == Subcommand::Sample);
  CHECK(parse_subcommand("ricker-study") == Subcommand::RickerStudy);
  CHECK_THROWS_AS(parse_subcommand("bogus"), ConfigError);
}

TEST_CASE("quadratic-map spectrum run emits all three source blocks") {
  const fs::path cfg = write_config("fig1", R"(
[system]
name = "quadratic_map"
[kernel]
kind = "exponential"
sigma = 1.0
[estimator]
m = 5
n = 10
base_point = [0.0, 0.0]
[sampling]
seed = 1
count = 100
box = [[-1.0, 1.0], [-1.0, 1.0]]
[data]
mode = "map"
[spectrum]
theory = true
edmd = true
)");
  RunOptions opts;
  opts.config_path = cfg;
  opts.out_dir = temp_dir("fig1") / "out";
  const ResultBundle bundle = run(Subcommand::Spectrum, opts);
  const auto rows = read_spectrum_csv(bundle.artifacts.at("spectrum"));
  int jet = 0, edmd = 0, theory = 0;
  for (const auto& r : rows) {
    jet += r.source == "jetedmd";
    edmd += r.source == "edmd";
    theory += r.source == "theory";
  }
  CHECK(jet == 21);     // r_5 in 2d
  CHECK(edmd == 66);    // r_10 in 2d
  CHECK(theory == 21);
}

TEST_CASE("grid and trajectory csv round trips") {
  const fs::path dir = temp_dir("grid_traj");
  const Provenance prov{kVersion, 2, 3};
  Eigen::MatrixXd nodes(2, 4);
  nodes << -1, -1, 1, 1, -2, 2, -2, 2;
  Eigen::VectorXcd values(4);
  values << Complex(0.5, -0.25), Complex(1.0, 0.0), Complex(-0.125, 0.75),
      Complex(1e-16, -1e16);
  write_grid_csv(dir / "grid.csv", nodes, values, prov);
  Eigen::MatrixXd nodes_back;
  Eigen::VectorXcd values_back;
  read_grid_csv(dir / "grid.csv", nodes_back, values_back);
  CHECK(nodes_back == nodes);
  CHECK(values_back == values);

  Eigen::VectorXd times(3);
  times << 0.0, 0.1, 0.2;
  Eigen::MatrixXd states(3, 3);
  states << 1, 2, 3, 4, 5, 6, 7, 8, 0.1234567890123456789;
  write_trajectory_csv(dir / "traj.csv", times, states, prov);
  Eigen::VectorXd times_back;
  Eigen::MatrixXd states_back;
  read_trajectory_csv(dir / "traj.csv", times_back, states_back);
  CHECK(times_back == times);
  CHECK(states_back == states);
}

TEST_CASE("estimate from an external snapshot file") {
  // Produce pairs with one run, re-consume them via data.input.
  const fs::path dir = temp_dir("external");
  const std::string gen_text = R"(
[system]
name = "van_der_pol"
mu = 1.0
[sampling]
seed = 4
count = 40
box = [[-1.0, 1.0], [-1.0, 1.0]]
[data]
mode = "velocity"
)";
  RunOptions gen_opts;
  gen_opts.config_path = write_config("external_gen", gen_text);
  gen_opts.out_dir = dir / "gen";
  const ResultBundle gen = run(Subcommand::Velocities, gen_opts);

  const std::string est_text = std::string(R"(
[kernel]
kind = "exponential"
sigma = 2.0
[estimator]
m = 3
n = 5
base_point = [0.0, 0.0]
[data]
mode = "velocity"
input = ")") + gen.artifacts.at("pairs").string() + R"("
)";
  RunOptions est_opts;
  est_opts.config_path = write_config("external_est", est_text);
  est_opts.out_dir = dir / "est";
  const ResultBundle est = run(Subcommand::Estimate, est_opts);
  const Eigen::MatrixXcd m = read_matrix_csv(est.artifacts.at("estimate_matrix"));
  CHECK(m.rows() == 10);  // r_3 in 2d

  // Identical to the in-process pipeline on the same data.
  const std::string direct_text = R"(
[system]
name = "van_der_pol"
mu = 1.0
[kernel]
kind = "exponential"
sigma = 2.0
[estimator]
m = 3
n = 5
base_point = [0.0, 0.0]
[sampling]
seed = 4
count = 40
box = [[-1.0, 1.0], [-1.0, 1.0]]
[data]
mode = "velocity"
)";
  RunOptions direct_opts;
  direct_opts.config_path = write_config("external_direct", direct_text);
  direct_opts.out_dir = dir / "direct";
  const ResultBundle direct = run(Subcommand::Estimate, direct_opts);
  const Eigen::MatrixXcd md = read_matrix_csv(direct.artifacts.at("estimate_matrix"));
  CHECK((m - md).norm() == 0.0);
}
