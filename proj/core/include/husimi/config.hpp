// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// JSON run configuration. Unknown keys are rejected; every error message
// names the offending field path, e.g. "config.grid.nq".

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "husimi/classical_flow.hpp"
#include "husimi/grid_io.hpp"
#include "husimi/hamiltonian.hpp"
#include "husimi/quantum_flow.hpp"
#include "husimi/states.hpp"

namespace husimi {

inline constexpr int kConfigSchemaVersion = 1;

struct OutputSettings {
  std::filesystem::path dir = "out";
  bool csv = false;
  bool renormalize = false;
};

struct TrajectorySettings {
  std::vector<PhasePoint> starts;
  double duration = 20.0;
};

struct FixedPointSettings {
  double tol = 1e-8;
  int seeds_per_axis = 15;
};

struct RunConfig {
  std::string label;  ///< Optional; presets write into <dir>/<label>.
  Hamiltonian hamiltonian;
  InitialStateSpec initial_state;
  PhaseGrid grid;
  std::vector<double> times;
  IntegratorSettings integrator;
  PropagationSettings propagation;
  OutputSettings outputs;
  TrajectorySettings trajectories;
  FixedPointSettings fixed_points;

  /// Throws ConfigError naming the failing field.
  void validate() const;
  /// outputs.dir, extended by label when one is set.
  std::filesystem::path output_dir() const;
};

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& config);

}  // namespace husimi
