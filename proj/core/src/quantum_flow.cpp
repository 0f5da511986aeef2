// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/quantum_flow.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "husimi/errors.hpp"
#include "husimi/parallel.hpp"

namespace husimi {

namespace {

// RK4 is stable for |h lambda| up to ~2.8 on the imaginary axis; stay well inside.
constexpr double kStabilityBound = 2.0;
constexpr int kLeakageLevels = 5;

void check_leakage(const FockState& psi, double tol, double t) {
  const double leak = tail_fraction(psi, kLeakageLevels);
  if (leak > tol) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "population %.3g in the top %d levels at t=%.6g exceeds leakage_tol %.3g; "
                  "increase n_max (currently %d)",
                  leak, kLeakageLevels, t, tol, psi.n_max());
    throw LeakageError(buf, leak);
  }
}

}  // namespace

void PropagationSettings::validate() const {
  if (n_max < 1) throw ConfigError("propagation n_max must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("propagation dt must be > 0");
  if (!(leakage_tol > 0.0 && leakage_tol < 1.0)) {
    throw ConfigError("propagation leakage_tol must lie in (0, 1)");
  }
}

int default_truncation(const InitialStateSpec& spec) {
  const double r2 = std::norm(spec.zc());
  const int base = static_cast<int>(std::ceil(r2 + 10.0 * std::sqrt(r2) + 20.0));
  return std::max(base, spec.excitation() + 20);
}

FockState propagate(const Hamiltonian& h, const FockState& psi0, double t,
                    const PropagationSettings& settings, const PropagationObserver& observe) {
  settings.validate();
  if (psi0.n_max() != settings.n_max) {
    throw ConfigError("state truncation " + std::to_string(psi0.n_max()) +
                      " differs from propagation n_max " + std::to_string(settings.n_max));
  }
  const FockOperator k = h.fock_matrix(settings.n_max);
  FockState psi = psi0;
  if (t == 0.0) return psi;

  const long macro = std::max(1L, static_cast<long>(std::ceil(std::abs(t) / settings.dt - 1e-9)));
  const double macro_step = t / static_cast<double>(macro);
  const double bound = k.one_norm();
  const long sub = std::max(
      1L, static_cast<long>(std::ceil(std::abs(macro_step) * bound / kStabilityBound)));
  const double step = macro_step / static_cast<double>(sub);

  const std::size_t dim = psi.amps.size();
  std::vector<Complex> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  // y' = -i K y
  auto rhs = [&](const std::vector<Complex>& y, std::vector<Complex>& out) {
    k.apply(y, out);
    for (auto& v : out) v = Complex{v.imag(), -v.real()};
  };
  for (long m = 1; m <= macro; ++m) {
    for (long s = 0; s < sub; ++s) {
      rhs(psi.amps, k1);
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi.amps[i] + (0.5 * step) * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi.amps[i] + (0.5 * step) * k2[i];
      rhs(tmp, k3);
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi.amps[i] + step * k3[i];
      rhs(tmp, k4);
      const double w = step / 6.0;
      for (std::size_t i = 0; i < dim; ++i) {
        psi.amps[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      if (settings.renormalize_each_step) {
        const double n2 = psi.norm2();
        if (n2 > 0.0) {
          const double inv = 1.0 / std::sqrt(n2);
          for (auto& a : psi.amps) a *= inv;
        }
      }
    }
    const double now = t * (static_cast<double>(m) / static_cast<double>(macro));
    for (const auto& a : psi.amps) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
        throw NonFiniteError("Fock propagation produced non-finite amplitudes", now);
      }
    }
    check_leakage(psi, settings.leakage_tol, now);
    if (observe) observe(now, psi);
  }
  return psi;
}

ScalarField quantum_husimi(const FockState& psi, const PhaseGrid& grid, int threads) {
  grid.validate();
  ScalarField f(grid, {FieldKind::kHusimiQuantum, 0.0, "", 1.0});
  parallel_for(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      f.values[i] = std::norm(coherent_overlap(psi, grid.point(i)));
    }
  });
  return f;
}

Complex expectation_a(const FockState& psi) {
  const double n2 = psi.norm2();
  if (!(n2 > 0.0)) throw ZeroNormError("expectation_a: state has zero norm");
  Complex s{};
  for (std::size_t n = 0; n + 1 < psi.amps.size(); ++n) {
    s += std::sqrt(static_cast<double>(n + 1)) * std::conj(psi.amps[n]) * psi.amps[n + 1];
  }
  return s / n2;
}

Complex expectation(const FockOperator& op, const FockState& psi) {
  std::vector<Complex> out(psi.amps.size());
  op.apply(psi.amps, out);
  Complex s{};
  for (std::size_t i = 0; i < out.size(); ++i) s += std::conj(psi.amps[i]) * out[i];
  return s;
}

double adjoint_coherent_norm(const Hamiltonian& h, PhasePoint pt, double t,
                             const PropagationSettings& settings) {
  const FockState z = displaced_fock_vector(0, pt.z(), settings.n_max);
  return propagate(h.adjoint().scaled(-1.0), z, t, settings).norm2();
}

FockState pt_reflect(const FockState& psi) {
  FockState out = psi;
  for (std::size_t n = 0; n < out.amps.size(); ++n) {
    out.amps[n] = std::conj(out.amps[n]);
    if (n % 2 == 1) out.amps[n] = -out.amps[n];
  }
  return out;
}

void write_state_csv(const FockState& psi, const std::filesystem::path& path) {
  std::string text = "n,re,im\n";
  char buf[128];
  for (std::size_t n = 0; n < psi.amps.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", n, psi.amps[n].real(),
                  psi.amps[n].imag());
    text += buf;
  }
  write_file_atomic(path, text);
}

}  // namespace husimi
