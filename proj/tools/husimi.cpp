// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// husimi: command-line front end for classical and quantum Husimi flows.
//
//   husimi classical      --config run.json [--out DIR] [--threads N] [--renormalize] [--csv]
//   husimi quantum        --config run.json ...
//   husimi norm-landscape --config run.json ...
//   husimi trajectories   --config run.json ...
//   husimi fixed-points   --config run.json ...
//   husimi compare        --config run.json ...
//   husimi preset fig1|fig2|fig3 [--out DIR] [--threads N] [--no-renormalize] [--grid N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "husimi/errors.hpp"
#include "husimi/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config;
  std::string out;
  int threads = 0;
  bool renormalize = false;
  bool csv = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* opt = cmd->add_option("--config", f.config, "JSON run configuration");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory (overrides outputs.dir)");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--renormalize", f.renormalize, "Scale exported Husimi fields to max 1");
  cmd->add_flag("--csv", f.csv, "Also write CSV copies of every field");
}

husimi::RunConfig load(const CommonFlags& f) {
  husimi::RunConfig cfg = husimi::load_config(f.config);
  if (!f.out.empty()) cfg.outputs.dir = f.out;
  if (f.renormalize) cfg.outputs.renormalize = true;
  if (f.csv) cfg.outputs.csv = true;
  return cfg;
}

void report_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& p : files) std::cout << p.string() << "\n";
}

void print_compare(const husimi::CompareReport& r) {
  std::printf("%-10s %14s %14s %14s %14s\n", "time", "sup", "l1", "classical_mass",
              "quantum_norm2");
  for (const auto& row : r.rows) {
    std::printf("%-10.6f %14.6e %14.6e %14.6e %14.6e\n", row.time, row.sup, row.l1,
                row.classical_mass, row.quantum_norm2);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical and quantum Husimi dynamics for non-Hermitian Hamiltonians"};
  app.require_subcommand(1);

  CommonFlags classical_f, quantum_f, norm_f, traj_f, fixed_f, compare_f, preset_f;
  auto* classical = app.add_subcommand("classical", "Characteristic-based Husimi fields");
  add_common(classical, classical_f, true);
  auto* quantum = app.add_subcommand("quantum", "Fock-basis Husimi fields");
  add_common(quantum, quantum_f, true);
  auto* norm = app.add_subcommand("norm-landscape", "Norm landscape w(z, t)");
  add_common(norm, norm_f, true);
  auto* traj = app.add_subcommand("trajectories", "Characteristic trajectories as CSV");
  add_common(traj, traj_f, true);
  auto* fixed = app.add_subcommand("fixed-points", "Fixed points of the characteristic flow");
  add_common(fixed, fixed_f, true);
  auto* cmp = app.add_subcommand("compare", "Classical vs quantum distance report");
  add_common(cmp, compare_f, true);

  auto* pre = app.add_subcommand("preset", "Run every pipeline for a figure preset");
  std::string preset_name;
  bool no_renormalize = false;
  bool dump_only = false;
  int grid_points = 0;
  pre->add_option("name", preset_name, "fig1, fig2 or fig3")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  add_common(pre, preset_f, false);
  pre->add_flag("--no-renormalize", no_renormalize, "Export raw Husimi magnitudes");
  pre->add_option("--grid", grid_points, "Points per axis (default 201)")
      ->check(CLI::Range(2, 100000));
  pre->add_flag("--dump-config", dump_only, "Print the preset configurations and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*classical) report_files(husimi::run_classical(load(classical_f), classical_f.threads));
    if (*quantum) report_files(husimi::run_quantum(load(quantum_f), quantum_f.threads));
    if (*norm) report_files(husimi::run_norm_landscape(load(norm_f), norm_f.threads));
    if (*traj) report_files(husimi::run_trajectories(load(traj_f)));
    if (*fixed) std::cout << husimi::run_fixed_points(load(fixed_f)).string() << "\n";
    if (*cmp) {
      const husimi::RunConfig cfg = load(compare_f);
      print_compare(husimi::compare(cfg, compare_f.threads));
      std::cout << (cfg.output_dir() / "compare.json").string() << "\n";
    }
    if (*pre) {
      for (husimi::RunConfig cfg : husimi::preset(preset_name)) {
        if (!preset_f.out.empty()) cfg.outputs.dir = preset_f.out;
        if (no_renormalize) cfg.outputs.renormalize = false;
        if (preset_f.csv) cfg.outputs.csv = true;
        if (grid_points > 0) cfg.grid.nq = cfg.grid.np = grid_points;
        if (dump_only) {
          std::cout << husimi::dump_config(cfg);
          continue;
        }
        std::cout << "# " << cfg.label << "\n";
        report_files(husimi::run_classical(cfg, preset_f.threads));
        report_files(husimi::run_quantum(cfg, preset_f.threads));
        report_files(husimi::run_trajectories(cfg));
        std::cout << husimi::run_fixed_points(cfg).string() << "\n";
        print_compare(husimi::compare(cfg, preset_f.threads));
      }
    }
  } catch (const husimi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const husimi::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const husimi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
