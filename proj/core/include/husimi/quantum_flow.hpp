// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// Non-unitary evolution i d(psi)/dt = K psi in a truncated number basis.

#pragma once

#include <filesystem>
#include <functional>

#include "husimi/grid_io.hpp"
#include "husimi/hamiltonian.hpp"
#include "husimi/states.hpp"

namespace husimi {

struct PropagationSettings {
  int n_max = 128;
  double dt = 1e-3;
  double leakage_tol = 1e-8;  ///< Allowed population fraction in the top 5 levels.
  bool renormalize_each_step = false;

  void validate() const;
};

/// ceil(|zc|^2 + 10 |zc| + 20), raised so that n + 20 levels fit.
int default_truncation(const InitialStateSpec& spec);

/// Called after every macro step of length ~dt with (t, psi).
using PropagationObserver = std::function<void(double, const FockState&)>;

/// RK4 on i psi' = K psi over [0, t]; t may be negative. The norm is kept
/// unless renormalize_each_step is set. Sub-steps are shortened when dt
/// exceeds the stability bound of the truncated operator.
/// Throws LeakageError when the top 5 levels exceed leakage_tol of the norm.
FockState propagate(const Hamiltonian& h, const FockState& psi0, double t,
                    const PropagationSettings& settings,
                    const PropagationObserver& observe = {});

/// |<z|psi>|^2 on every grid point.
ScalarField quantum_husimi(const FockState& psi, const PhaseGrid& grid, int threads = 0);

/// <psi|a|psi> / <psi|psi>. Throws ZeroNormError for the zero vector.
Complex expectation_a(const FockState& psi);

/// <psi|op|psi> without normalization.
Complex expectation(const FockOperator& op, const FockState& psi);

/// || U^dag |z> ||^2, by evolving |z> under -K^dag for time t.
double adjoint_coherent_norm(const Hamiltonian& h, PhasePoint pt, double t,
                             const PropagationSettings& settings);

/// Antiunitary reflection q -> -q, p -> p, i -> -i: amps_n -> (-1)^n conj(amps_n).
FockState pt_reflect(const FockState& psi);

/// Columns n,re,im.
void write_state_csv(const FockState& psi, const std::filesystem::path& path);

}  // namespace husimi
