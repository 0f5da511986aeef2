// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// Initial states in both representations and closed-form Husimi results for
// the complex harmonic oscillator (omega - i gamma)(a^dag a + 1/2).

#pragma once

#include <vector>

#include "husimi/hamiltonian.hpp"

namespace husimi {

/// Amplitudes of |0>, ..., |n_max>. Not assumed normalized.
struct FockState {
  FockState() = default;
  explicit FockState(int n_max) : amps(static_cast<std::size_t>(n_max + 1)) {}
  explicit FockState(std::vector<Complex> a) : amps(std::move(a)) {}

  static FockState number(int n, int n_max);

  int n_max() const { return static_cast<int>(amps.size()) - 1; }
  double norm2() const;

  std::vector<Complex> amps;
};

enum class StateKind { kCoherent, kDisplacedFock };

/// D(zc)|n>; a coherent state is the n = 0 case.
struct InitialStateSpec {
  StateKind kind = StateKind::kDisplacedFock;
  int n = 0;
  PhasePoint center;

  Complex zc() const { return center.z(); }
  int excitation() const { return kind == StateKind::kCoherent ? 0 : n; }
};

/// <z|psi> = exp(-|z|^2/2) sum_n conj(z)^n / sqrt(n!) amps_n.
Complex coherent_overlap(const FockState& psi, PhasePoint pt);

/// |z - zc|^{2n} exp(-|z - zc|^2) / n!.
double displaced_fock_husimi(int n, Complex zc, PhasePoint pt);

/// D(zc)|n> truncated at n_max, built as (a^dag - conj(zc))^n |zc> / sqrt(n!).
/// Throws LeakageError when the top five levels hold more than 1e-10 of the norm.
FockState displaced_fock_vector(int n, Complex zc, int n_max);

/// Population fraction in the top `levels` number states.
double tail_fraction(const FockState& psi, int levels = 5);

/// Husimi function at time t of D(zc)|n> evolved by the complex oscillator:
/// exp(-2 gamma (n + 1/2) t - |z - zc(t)|^2 - |zc|^2 (1 - exp(-2 gamma t)))
///   * |z - zc exp(-i(omega + i gamma) t)|^{2n} / n!,  zc(t) = zc exp(-i(omega - i gamma) t).
double complex_ho_husimi_oracle(int n, Complex zc, double omega, double gamma, double t,
                                PhasePoint pt);

/// exp(-gamma t) exp(-|z|^2 (1 - exp(-2 gamma t))).
double complex_ho_norm_landscape_oracle(double omega, double gamma, double t, PhasePoint pt);

double initial_husimi(const InitialStateSpec& spec, PhasePoint pt);
FockState initial_fock_state(const InitialStateSpec& spec, int n_max);

}  // namespace husimi
