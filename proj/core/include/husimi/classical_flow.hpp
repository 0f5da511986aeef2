// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// Semiclassical Husimi evolution by the method of characteristics.
//
// The first-order Husimi equation transports Q along dzeta/dt = -i dK*/dzeta*
// while multiplying it by exp(2 Gamma) per unit time. A grid point z at time
// t is traced backwards to its initial condition zeta0(z, t); the rate is
// integrated along the same path,
//
//   Q(z, t) = Q0(zeta0(z, t)) w(z, t),   log w(z, t) = 2 int_0^t Gamma(zeta(s)) ds,
//
// with the exponent carried as a third ODE component so w never overflows.

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "husimi/grid_io.hpp"
#include "husimi/hamiltonian.hpp"

namespace husimi {

enum class Scheme { kRk4, kRk45 };

struct IntegratorSettings {
  double dt = 1e-3;          ///< Fixed step (rk4) or initial step (rk45).
  Scheme scheme = Scheme::kRk4;
  double rk45_tol = 1e-10;   ///< Absolute and relative tolerance for rk45.
  double max_log_w = 700.0;  ///< |log w| beyond this is reported as saturated.

  void validate() const;
};

/// Samples of a characteristic. `times` run monotonically in the direction
/// of integration; log_w[k] is 2 int Gamma ds from times[0] to times[k].
struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> points;
  std::vector<double> log_w;

  std::size_t size() const { return times.size(); }
};

enum class BacktraceStatus { kOk, kSaturated, kNonFinite };

struct BacktraceResult {
  PhasePoint zeta0;
  double log_w = 0.0;
  BacktraceStatus status = BacktraceStatus::kOk;

  bool ok() const { return status == BacktraceStatus::kOk; }
};

/// Integrates the characteristic flow from `start` over [0, t_final];
/// t_final may be negative. Throws NonFiniteError on divergence.
Trajectory integrate_characteristic(const Hamiltonian& h, PhasePoint start, double t_final,
                                    const IntegratorSettings& settings);

/// Traces z back over a duration t >= 0.
BacktraceResult backtrace(const Hamiltonian& h, PhasePoint z, double t,
                          const IntegratorSettings& settings);

/// One backward sweep serving several non-decreasing, non-negative times.
std::vector<BacktraceResult> backtrace_times(const Hamiltonian& h, PhasePoint z,
                                             std::span<const double> times,
                                             const IntegratorSettings& settings);

/// Backtraces of every grid point for one time.
struct BacktraceField {
  PhaseGrid grid;
  double time = 0.0;
  std::string digest;
  std::vector<BacktraceResult> cells;

  std::size_t invalid_count() const;
};

/// Backtraces every grid point; entry k of the result belongs to times[k].
/// Bitwise independent of `threads` (0 = all cores).
std::vector<BacktraceField> backtrace_grid(const Hamiltonian& h, const PhaseGrid& grid,
                                           std::span<const double> times,
                                           const IntegratorSettings& settings,
                                           int threads = 0);

using InitialHusimi = std::function<double(PhasePoint)>;

/// Q0(zeta0) w per cell; failed backtraces become invalid cells.
ScalarField classical_husimi(const BacktraceField& traces, const InitialHusimi& q0);

ScalarField classical_husimi(const Hamiltonian& h, const InitialHusimi& q0,
                             const PhaseGrid& grid, double t,
                             const IntegratorSettings& settings, int threads = 0);

struct NormLandscape {
  ScalarField w;
  ScalarField log_w;
};

NormLandscape norm_landscape(const BacktraceField& traces);

NormLandscape norm_landscape(const Hamiltonian& h, const PhaseGrid& grid, double t,
                             const IntegratorSettings& settings, int threads = 0);

enum class FixedPointKind {
  kCenter,
  kStableSpiral,
  kUnstableSpiral,
  kStableNode,
  kUnstableNode,
  kSaddle,
  kDegenerate,
};

std::string_view to_string(FixedPointKind kind);

struct FixedPoint {
  PhasePoint location;
  std::array<Complex, 2> eigenvalues;  ///< Of the linearized flow.
  double residual = 0.0;               ///< |velocity| at `location`.
  FixedPointKind kind = FixedPointKind::kDegenerate;
};

struct FixedPointSearch {
  std::vector<FixedPoint> points;  ///< Sorted by (q, p).
  int nonconvergent = 0;           ///< Seeds whose Newton iteration failed.
};

/// Newton iteration on the flow from each seed. Converged points within
/// `tol` of each other are merged, keeping the smallest residual.
FixedPointSearch find_fixed_points(const Hamiltonian& h, std::span<const PhasePoint> seeds,
                                   double tol = 1e-8);

/// per_axis x per_axis lattice spanning the grid bounds.
std::vector<PhasePoint> seed_lattice(const PhaseGrid& grid, int per_axis = 15);

FixedPointKind classify_linearization(const FlowJacobian& j);

struct OrbitReturn {
  double period = 0.0;
  PhasePoint point;    ///< Where the orbit meets the section again.
  double log_w = 0.0;  ///< 2 int Gamma dt over the orbit.
};

/// First return to the line through `start` normal to the flow there.
/// Throws NoReturnError when nothing returns before `horizon`.
OrbitReturn orbit_period(const Hamiltonian& h, PhasePoint start,
                         const IntegratorSettings& settings, double horizon = 200.0);

/// Columns t,q,p,log_w.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace husimi
