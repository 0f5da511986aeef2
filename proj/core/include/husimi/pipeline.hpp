// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// File-producing pipelines behind the command-line tool.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "husimi/config.hpp"

namespace husimi {

/// "<kind>_t<time with 6 decimals>.hgrd"
std::string field_filename(FieldKind kind, double time, std::string_view ext = "hgrd");

/// Classical Husimi plus norm landscape (linear and log) for every time.
std::vector<std::filesystem::path> run_classical(const RunConfig& cfg, int threads = 0);

/// Norm landscape (linear and log) for every time.
std::vector<std::filesystem::path> run_norm_landscape(const RunConfig& cfg, int threads = 0);

/// Fock-basis Husimi for every time plus expectation.csv with the <a> path.
std::vector<std::filesystem::path> run_quantum(const RunConfig& cfg, int threads = 0);

/// trajectory_<k>.csv per configured start.
std::vector<std::filesystem::path> run_trajectories(const RunConfig& cfg);

/// fixed_points.csv from a seed lattice over the grid bounds.
std::filesystem::path run_fixed_points(const RunConfig& cfg);

struct CompareRow {
  double time = 0.0;
  double sup = 0.0;  ///< max |Qc - Qq| over cells valid in both, after max-renormalization.
  double l1 = 0.0;   ///< int |Qc - Qq| dq dp / (2 pi), same fields.
  double classical_mass = 0.0;  ///< int Qc dq dp / (2 pi) before renormalization.
  double quantum_norm2 = 0.0;
  std::size_t invalid_cells = 0;
};

struct CompareReport {
  std::string label;
  std::vector<CompareRow> rows;
};

/// Runs both pipelines in memory and writes compare.json into the output dir.
CompareReport compare(const RunConfig& cfg, int threads = 0);

/// Run configurations for "fig1", "fig2", "fig3". Throws ConfigError otherwise.
std::vector<RunConfig> preset(std::string_view name);

}  // namespace husimi
