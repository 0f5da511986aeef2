// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "husimi/errors.hpp"
#include "oracles.hpp"

using husimi::FieldKind;
using husimi::RunConfig;

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "husimi_test_pipeline" / name;
  fs::remove_all(dir);
  return dir;
}

std::string config_error(const std::string& json) {
  try {
    husimi::parse_config(json);
  } catch (const husimi::ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"({
  "schema_version": 1,
  "hamiltonian": [{"m": 1, "n": 1, "re": 1.0, "im": -0.15}, {"m": 0, "n": 0, "re": 0.5, "im": -0.075}],
  "initial_state": {"kind": "displaced_fock", "n": 2, "qc": 4.0, "pc": 2.0},
  "grid": {"q_min": -7, "q_max": 7, "p_min": -7, "p_max": 7, "nq": 15, "np": 13},
  "times": [0.0, 1.0]
})";

RunConfig small_config(const fs::path& dir) {
  RunConfig cfg = husimi::parse_config(kMinimal);
  cfg.outputs.dir = dir;
  return cfg;
}

}  // namespace

TEST_CASE("field file names") {
  CHECK(husimi::field_filename(FieldKind::kHusimiClassical, 2.0 * M_PI / 3.0) ==
        "husimi_classical_t2.094395.hgrd");
  CHECK(husimi::field_filename(FieldKind::kLogNormLandscape, 8.0, "csv") ==
        "log_norm_landscape_t8.000000.csv");
}

TEST_CASE("config parsing") {
  SUBCASE("minimal document and defaults") {
    const RunConfig cfg = husimi::parse_config(kMinimal);
    CHECK(cfg.hamiltonian == husimi::Hamiltonian::complex_oscillator(1.0, 0.15));
    CHECK(cfg.initial_state.n == 2);
    CHECK(cfg.initial_state.center.q == 4.0);
    CHECK(cfg.grid.nq == 15);
    CHECK(cfg.times.size() == 2);
    CHECK(cfg.integrator.dt == 1e-3);
    CHECK(cfg.propagation.n_max == husimi::default_truncation(cfg.initial_state));
    CHECK(cfg.output_dir() == fs::path("out"));
  }
  SUBCASE("dump and parse round trip") {
    for (const auto& cfg : husimi::preset("fig3")) {
      const std::string text = husimi::dump_config(cfg);
      const RunConfig back = husimi::parse_config(text);
      CHECK(husimi::dump_config(back) == text);
      CHECK(back.hamiltonian == cfg.hamiltonian);
      CHECK(back.times == cfg.times);
      CHECK(back.trajectories.starts.size() == cfg.trajectories.starts.size());
    }
  }
  SUBCASE("errors name the field") {
    CHECK(config_error("{") .find("config: invalid JSON") == 0);
    CHECK(config_error(R"({"schema_version": 2, "hamiltonian": [], "times": []})")
              .find("config.schema_version") == 0);
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [], "times": [], "colour": 1})") ==
          "config.colour: unknown key");
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [], "times": [],
                          "grid": {"nq": 1.5}})") == "config.grid.nq: expected an integer");
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [{"m": -1, "n": 0}], "times": []})") ==
          "config.hamiltonian[0].m: must be >= 0");
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [{"m": 1, "n": 0, "x": 0}], "times": []})") ==
          "config.hamiltonian[0].x: unknown key");
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [], "times": [1.0, 0.5]})")
              .find("config.times[1]") == 0);
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [], "times": [-1.0]})")
              .find("config.times[0]") == 0);
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": []})") ==
          "config.times: missing required key");
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [], "times": [],
                          "grid": {"q_min": 3, "q_max": 1}})")
              .find("config.grid") == 0);
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [], "times": [],
                          "initial_state": {"kind": "squeezed"}})") ==
          "config.initial_state.kind: expected \"coherent\" or \"displaced_fock\"");
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [{"m": 3, "n": 3, "re": 1}],
                          "times": [], "propagation": {"n_max": 4}})")
              .find("config.propagation.n_max") == 0);
    CHECK(config_error(R"({"schema_version": 1, "hamiltonian": [], "times": [],
                          "integrator": {"scheme": "euler"}})") ==
          "config.integrator.scheme: expected \"rk4\" or \"rk45\"");
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(husimi::load_config("/nonexistent/husimi.json"), husimi::ConfigError);
  }
}

TEST_CASE("presets") {
  const auto fig1 = husimi::preset("fig1");
  REQUIRE(fig1.size() == 2);
  CHECK(fig1[0].initial_state.excitation() == 0);
  CHECK(fig1[1].initial_state.excitation() == 2);
  CHECK(fig1[0].times.back() == doctest::Approx(4 * M_PI / 3));
  CHECK(fig1[0].outputs.renormalize);
  const auto fig2 = husimi::preset("fig2");
  REQUIRE(fig2.size() == 1);
  CHECK(fig2[0].hamiltonian == husimi::Hamiltonian::damped_kerr(0.05, 0.05, 1.0));
  CHECK(fig2[0].times == std::vector<double>{0.5, 2.0, 8.0});
  const auto fig3 = husimi::preset("fig3");
  CHECK(fig3[0].initial_state.n == 3);
  CHECK(fig3[0].grid == husimi::PhaseGrid{});
  CHECK_THROWS_AS(husimi::preset("fig4"), husimi::ConfigError);
}

TEST_CASE("classical run writes readable fields") {
  const fs::path dir = fresh_dir("classical");
  RunConfig cfg = small_config(dir);
  cfg.outputs.renormalize = true;
  cfg.outputs.csv = true;
  const auto written = husimi::run_classical(cfg, 2);
  CHECK(written.size() == 12);
  const auto q = husimi::read_field(dir / "husimi_classical_t1.000000.hgrd");
  CHECK(q.meta.kind == FieldKind::kHusimiClassical);
  CHECK(q.meta.time == 1.0);
  CHECK(q.meta.digest == cfg.hamiltonian.digest());
  CHECK(q.max_valid() == 1.0);
  CHECK(q.meta.scale < 1.0);
  const auto w = husimi::read_field(dir / "norm_landscape_t1.000000.hgrd");
  const auto lw = husimi::read_field(dir / "log_norm_landscape_t1.000000.hgrd");
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double ref = husimi::complex_ho_norm_landscape_oracle(1.0, 0.15, 1.0, w.grid.point(i));
    CHECK(w.values[i] == doctest::Approx(ref).epsilon(1e-9));
    CHECK(lw.values[i] == doctest::Approx(std::log(ref)).epsilon(1e-9));
  }
  const auto w0 = husimi::read_field(dir / "norm_landscape_t0.000000.hgrd");
  for (double v : w0.values) CHECK(v == 1.0);
  CHECK(fs::exists(dir / "husimi_classical_t0.000000.csv"));
}

TEST_CASE("norm landscape run") {
  const fs::path dir = fresh_dir("norm");
  const auto written = husimi::run_norm_landscape(small_config(dir), 1);
  CHECK(written.size() == 4);
  for (const auto& p : written) CHECK(fs::exists(p));
}

TEST_CASE("quantum run writes fields and the expectation path") {
  const fs::path dir = fresh_dir("quantum");
  RunConfig cfg = small_config(dir);
  const auto written = husimi::run_quantum(cfg, 2);
  CHECK(written.size() == 3);
  const auto q1 = husimi::read_field(dir / "husimi_quantum_t1.000000.hgrd");
  CHECK(q1.meta.time == 1.0);
  const husimi::Complex zc = cfg.initial_state.zc();
  for (std::size_t i = 0; i < q1.size(); ++i) {
    const double ref = husimi::complex_ho_husimi_oracle(2, zc, 1.0, 0.15, 1.0, q1.grid.point(i));
    CHECK(std::abs(q1.values[i] - ref) < 1e-7);
  }
  std::istringstream csv(read_text(dir / "expectation.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,q,p,norm2");
  std::getline(csv, line);
  CHECK(line.rfind("0,", 0) == 0);
  int rows = 1;
  std::string last;
  while (std::getline(csv, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 1 + 100);  // every 10th of 1000 steps
  CHECK(last.rfind("1,", 0) == 0);
}

TEST_CASE("trajectories and fixed points") {
  const fs::path dir = fresh_dir("structure");
  auto cfg = husimi::preset("fig3").front();
  cfg.outputs.dir = dir;
  cfg.trajectories.duration = 0.5;
  const auto trajs = husimi::run_trajectories(cfg);
  CHECK(trajs.size() == cfg.trajectories.starts.size());
  CHECK(read_text(trajs.front()).rfind("t,q,p,log_w\n0,0,-6,0\n", 0) == 0);
  const auto fp = husimi::run_fixed_points(cfg);
  std::istringstream csv(read_text(fp));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "q,p,eig1_re,eig1_im,eig2_re,eig2_im,kind,residual");
  CHECK(row.find(",center,") != std::string::npos);
  CHECK_FALSE(std::getline(csv, extra));
  const double p0 = std::stod(row.substr(row.find(',') + 1));
  CHECK(p0 == doctest::Approx(oracle::pt_fixed_point_momentum(0.25, 1.0)).epsilon(1e-12));
}

TEST_CASE("compare report for a bilinear hamiltonian") {
  const fs::path dir = fresh_dir("compare");
  RunConfig cfg = small_config(dir);
  cfg.label = "cho";
  const auto report = husimi::compare(cfg, 2);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    CHECK(row.sup < 1e-4);
    CHECK(row.invalid_cells == 0);
  }
  CHECK(report.rows[0].quantum_norm2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs::exists(dir / "cho" / "compare.json"));
  CHECK(read_text(dir / "cho" / "compare.json").find("\"sup\"") != std::string::npos);
}

TEST_CASE("outputs do not depend on the worker count") {
  RunConfig cfg = small_config(fresh_dir("det1"));
  cfg.hamiltonian = husimi::Hamiltonian::damped_kerr(0.05, 0.05, 1.0);
  cfg.propagation.n_max = 110;
  cfg.outputs.renormalize = true;
  const auto a = husimi::run_classical(cfg, 1);
  const auto qa = husimi::run_quantum(cfg, 1);
  cfg.outputs.dir = fresh_dir("det3");
  const auto b = husimi::run_classical(cfg, 3);
  const auto qb = husimi::run_quantum(cfg, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(read_text(a[i]) == read_text(b[i]));
  for (std::size_t i = 0; i < qa.size(); ++i) CHECK(read_text(qa[i]) == read_text(qb[i]));
}
