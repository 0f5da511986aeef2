// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "husimi/errors.hpp"
#include "json.hpp"

namespace husimi {

namespace {

namespace fs = std::filesystem;

fs::path prepare_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.output_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("config.outputs.dir: cannot create " + dir.string());
  }
  return dir;
}

void export_field(const ScalarField& field, const fs::path& dir, bool csv,
                  std::vector<fs::path>& written) {
  const fs::path path = dir / field_filename(field.meta.kind, field.meta.time);
  write_field(field, path);
  written.push_back(path);
  if (csv) {
    const fs::path cpath = dir / field_filename(field.meta.kind, field.meta.time, "csv");
    write_csv(field, cpath);
    written.push_back(cpath);
  }
}

ScalarField maybe_renormalize(const ScalarField& f, bool on) {
  if (!on) return f;
  // An all-zero Husimi field has nothing to rescale.
  if (!(f.max_valid() > 0.0)) return f;
  return renormalize_max(f);
}

std::vector<ScalarField> classical_fields(const RunConfig& cfg, int threads,
                                          std::vector<BacktraceField>* traces_out) {
  auto traces = backtrace_grid(cfg.hamiltonian, cfg.grid, cfg.times, cfg.integrator, threads);
  const InitialStateSpec spec = cfg.initial_state;
  std::vector<ScalarField> fields;
  for (const auto& tr : traces) {
    fields.push_back(classical_husimi(tr, [&spec](PhasePoint pt) {
      return initial_husimi(spec, pt);
    }));
  }
  if (traces_out) *traces_out = std::move(traces);
  return fields;
}

std::vector<ScalarField> quantum_fields(const RunConfig& cfg, int threads,
                                        std::vector<double>* norms,
                                        std::vector<std::array<double, 4>>* expectation) {
  FockState psi = initial_fock_state(cfg.initial_state, cfg.propagation.n_max);
  const std::string digest = cfg.hamiltonian.digest();
  std::vector<ScalarField> fields;
  double now = 0.0;
  long counter = 0;
  auto record = [&](double t, const FockState& s) {
    if (!expectation) return;
    const double n2 = s.norm2();
    if (!(n2 > 0.0)) return;
    const Complex a = expectation_a(s);
    expectation->push_back({t, kSqrt2 * a.real(), kSqrt2 * a.imag(), n2});
  };
  record(0.0, psi);
  for (double t : cfg.times) {
    if (t > now) {
      const double base = now;
      psi = propagate(cfg.hamiltonian, psi, t - now, cfg.propagation,
                      [&](double dt_now, const FockState& s) {
                        if (++counter % 10 == 0) record(base + dt_now, s);
                      });
      now = t;
    }
    ScalarField f = quantum_husimi(psi, cfg.grid, threads);
    f.meta.time = t;
    f.meta.digest = digest;
    fields.push_back(std::move(f));
    if (norms) norms->push_back(psi.norm2());
  }
  return fields;
}

}  // namespace

std::string field_filename(FieldKind kind, double time, std::string_view ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "_t%.6f.", time);
  return std::string(to_string(kind)) + buf + std::string(ext);
}

std::vector<fs::path> run_classical(const RunConfig& cfg, int threads) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  std::vector<BacktraceField> traces;
  const auto fields = classical_fields(cfg, threads, &traces);
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    export_field(maybe_renormalize(fields[k], cfg.outputs.renormalize), dir, cfg.outputs.csv,
                 written);
    const NormLandscape nl = norm_landscape(traces[k]);
    export_field(nl.w, dir, cfg.outputs.csv, written);
    export_field(nl.log_w, dir, cfg.outputs.csv, written);
  }
  return written;
}

std::vector<fs::path> run_norm_landscape(const RunConfig& cfg, int threads) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  std::vector<fs::path> written;
  for (const auto& tr :
       backtrace_grid(cfg.hamiltonian, cfg.grid, cfg.times, cfg.integrator, threads)) {
    const NormLandscape nl = norm_landscape(tr);
    export_field(nl.w, dir, cfg.outputs.csv, written);
    export_field(nl.log_w, dir, cfg.outputs.csv, written);
  }
  return written;
}

std::vector<fs::path> run_quantum(const RunConfig& cfg, int threads) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  std::vector<std::array<double, 4>> expectation;
  const auto fields = quantum_fields(cfg, threads, nullptr, &expectation);
  std::vector<fs::path> written;
  for (const auto& f : fields) {
    export_field(maybe_renormalize(f, cfg.outputs.renormalize), dir, cfg.outputs.csv, written);
  }
  std::string text = "t,q,p,norm2\n";
  char buf[160];
  for (const auto& row : expectation) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", row[0], row[1], row[2],
                  row[3]);
    text += buf;
  }
  write_file_atomic(dir / "expectation.csv", text);
  written.push_back(dir / "expectation.csv");
  return written;
}

std::vector<fs::path> run_trajectories(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < cfg.trajectories.starts.size(); ++k) {
    const Trajectory traj = integrate_characteristic(
        cfg.hamiltonian, cfg.trajectories.starts[k], cfg.trajectories.duration, cfg.integrator);
    const fs::path path = dir / ("trajectory_" + std::to_string(k) + ".csv");
    write_trajectory_csv(traj, path);
    written.push_back(path);
  }
  return written;
}

fs::path run_fixed_points(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  const auto seeds = seed_lattice(cfg.grid, cfg.fixed_points.seeds_per_axis);
  const FixedPointSearch found =
      find_fixed_points(cfg.hamiltonian, seeds, cfg.fixed_points.tol);
  std::string text = "q,p,eig1_re,eig1_im,eig2_re,eig2_im,kind,residual\n";
  char buf[320];
  for (const FixedPoint& fp : found.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.3e\n",
                  fp.location.q, fp.location.p, fp.eigenvalues[0].real(),
                  fp.eigenvalues[0].imag(), fp.eigenvalues[1].real(),
                  fp.eigenvalues[1].imag(), std::string(to_string(fp.kind)).c_str(),
                  fp.residual);
    text += buf;
  }
  const fs::path path = dir / "fixed_points.csv";
  write_file_atomic(path, text);
  return path;
}

CompareReport compare(const RunConfig& cfg, int threads) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  const auto classical = classical_fields(cfg, threads, nullptr);
  std::vector<double> norms;
  const auto quantum = quantum_fields(cfg, threads, &norms, nullptr);

  CompareReport report{cfg.label, {}};
  for (std::size_t k = 0; k < cfg.times.size(); ++k) {
    CompareRow row;
    row.time = cfg.times[k];
    row.classical_mass = integrate_field(classical[k]);
    row.quantum_norm2 = norms[k];
    const ScalarField c = maybe_renormalize(classical[k], true);
    const ScalarField q = maybe_renormalize(quantum[k], true);
    ScalarField diff(cfg.grid, c.meta);
    for (std::size_t i = 0; i < diff.size(); ++i) {
      if (!c.is_valid(i) || !q.is_valid(i)) {
        diff.invalidate(i);
        ++row.invalid_cells;
        continue;
      }
      diff.values[i] = std::abs(c.values[i] - q.values[i]);
      row.sup = std::max(row.sup, diff.values[i]);
    }
    row.l1 = integrate_field(diff);
    report.rows.push_back(row);
  }

  nlohmann::json doc;
  doc["label"] = cfg.label;
  doc["hamiltonian_digest"] = cfg.hamiltonian.digest();
  doc["rows"] = nlohmann::json::array();
  for (const CompareRow& r : report.rows) {
    doc["rows"].push_back({{"time", r.time},
                           {"sup", r.sup},
                           {"l1", r.l1},
                           {"classical_mass", r.classical_mass},
                           {"quantum_norm2", r.quantum_norm2},
                           {"invalid_cells", r.invalid_cells}});
  }
  write_file_atomic(dir / "compare.json", doc.dump(2) + "\n");
  return report;
}

std::vector<RunConfig> preset(std::string_view name) {
  const double pi = std::numbers::pi;
  RunConfig base;
  base.outputs.renormalize = true;
  std::vector<RunConfig> out;
  if (name == "fig1") {
    base.hamiltonian = Hamiltonian::complex_oscillator(1.0, 0.15);
    base.times = {0.0, 2.0 * pi / 3.0, 4.0 * pi / 3.0};
    base.propagation.n_max = 128;
    base.trajectories.starts = {{4.0, 2.0}};
    base.trajectories.duration = 4.0 * pi / 3.0;
    for (int n : {0, 2}) {
      RunConfig cfg = base;
      cfg.label = "fig1_n" + std::to_string(n);
      cfg.initial_state = {n == 0 ? StateKind::kCoherent : StateKind::kDisplacedFock, n,
                           {4.0, 2.0}};
      out.push_back(cfg);
    }
  } else if (name == "fig2") {
    base.label = "fig2";
    base.hamiltonian = Hamiltonian::damped_kerr(0.05, 0.05, 1.0);
    base.initial_state = {StateKind::kDisplacedFock, 2, {-3.0, 5.0}};
    base.times = {0.5, 2.0, 8.0};
    base.propagation.n_max = 110;
    base.trajectories.starts = {{-6.0, 0.0}, {-3.0, 0.0}, {-1.0, 0.0}, {0.5, 0.0},
                                {2.0, 0.0},  {3.0, 0.0},  {5.0, 0.0},  {6.5, 0.0}};
    base.trajectories.duration = 20.0;
    out.push_back(base);
  } else if (name == "fig3") {
    base.label = "fig3";
    base.hamiltonian = Hamiltonian::pt_kerr(0.25, 1.0);
    base.initial_state = {StateKind::kDisplacedFock, 3, {5.0, 3.0}};
    base.times = {pi / 10.0, pi / 4.0, pi};
    base.propagation.n_max = 110;
    base.trajectories.starts = {{0.0, -6.0}, {0.0, -4.0}, {0.0, -3.0}, {0.0, -2.0},
                                {0.0, 0.0},  {0.0, 1.0},  {0.0, 2.5},  {0.0, 5.0}};
    base.trajectories.duration = 10.0;
    out.push_back(base);
  } else {
    throw ConfigError("unknown preset '" + std::string(name) +
                      "' (expected fig1, fig2 or fig3)");
  }
  for (auto& cfg : out) cfg.validate();
  return out;
}

}  // namespace husimi
