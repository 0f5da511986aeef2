// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/states.hpp"

#include <cmath>
#include <string>

#include "husimi/errors.hpp"

namespace husimi {

namespace {

constexpr double kLeakageLimit = 1e-10;

double ring_profile(int n, double r2) {
  if (n == 0) return std::exp(-r2);
  if (r2 == 0.0) return 0.0;
  return std::exp(n * std::log(r2) - std::lgamma(n + 1.0) - r2);
}

}  // namespace

FockState FockState::number(int n, int n_max) {
  if (n < 0 || n > n_max) {
    throw ConfigError("number state |" + std::to_string(n) + "> outside truncation " +
                      std::to_string(n_max));
  }
  FockState s(n_max);
  s.amps[static_cast<std::size_t>(n)] = 1.0;
  return s;
}

double FockState::norm2() const {
  double s = 0.0;
  for (const Complex& a : amps) s += std::norm(a);
  return s;
}

Complex coherent_overlap(const FockState& psi, PhasePoint pt) {
  const Complex zc = std::conj(pt.z());
  // c_n = exp(-|z|^2/2) conj(z)^n / sqrt(n!), built one factor at a time.
  if (psi.amps.empty()) return {};
  Complex c = std::exp(-0.5 * std::norm(zc));
  Complex sum = c * psi.amps[0];
  for (std::size_t n = 1; n < psi.amps.size(); ++n) {
    c *= zc / std::sqrt(static_cast<double>(n));
    sum += c * psi.amps[n];
  }
  return sum;
}

double displaced_fock_husimi(int n, Complex zc, PhasePoint pt) {
  return ring_profile(n, std::norm(pt.z() - zc));
}

double tail_fraction(const FockState& psi, int levels) {
  const double total = psi.norm2();
  if (total == 0.0) return 0.0;
  double tail = 0.0;
  const int top = psi.n_max();
  for (int k = std::max(0, top - levels + 1); k <= top; ++k) {
    tail += std::norm(psi.amps[static_cast<std::size_t>(k)]);
  }
  return tail / total;
}

FockState displaced_fock_vector(int n, Complex zc, int n_max) {
  if (n < 0) throw ConfigError("excitation number must be non-negative");
  if (n_max < n) throw ConfigError("n_max must be at least the excitation number");
  FockState v(n_max);
  Complex c = std::exp(-0.5 * std::norm(zc));
  v.amps[0] = c;
  for (int k = 1; k <= n_max; ++k) {
    c *= zc / std::sqrt(static_cast<double>(k));
    v.amps[static_cast<std::size_t>(k)] = c;
  }
  // D a^dag D^dag = a^dag - conj(zc), hence D|n> = (a^dag - conj(zc))^n |zc> / sqrt(n!).
  const Complex shift = std::conj(zc);
  std::vector<Complex> next(v.amps.size());
  for (int j = 1; j <= n; ++j) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(j));
    for (int k = 0; k <= n_max; ++k) {
      Complex raised = k > 0 ? std::sqrt(static_cast<double>(k)) *
                                   v.amps[static_cast<std::size_t>(k - 1)]
                             : Complex{};
      next[static_cast<std::size_t>(k)] =
          (raised - shift * v.amps[static_cast<std::size_t>(k)]) * norm;
    }
    v.amps.swap(next);
  }
  const double leak = tail_fraction(v);
  if (leak > kLeakageLimit) {
    throw LeakageError("displaced Fock state |" + std::to_string(n) +
                           "> leaks into the top of the truncated basis (n_max=" +
                           std::to_string(n_max) + ")",
                       leak);
  }
  return v;
}

double complex_ho_husimi_oracle(int n, Complex zc, double omega, double gamma, double t,
                                PhasePoint pt) {
  const Complex z = pt.z();
  const Complex rot = std::polar(1.0, -omega * t);
  const Complex coherent_center = zc * rot * std::exp(-gamma * t);
  const Complex ring_center = zc * rot * std::exp(gamma * t);
  const double r2 = std::norm(z - ring_center);
  // The last term is the norm lost by the displacement itself; without it the
  // expression only holds up to a time-dependent constant.
  double log_q = -2.0 * gamma * (n + 0.5) * t - std::norm(z - coherent_center) -
                 std::norm(zc) * (1.0 - std::exp(-2.0 * gamma * t));
  if (n > 0) {
    if (r2 == 0.0) return 0.0;
    log_q += n * std::log(r2) - std::lgamma(n + 1.0);
  }
  return std::exp(log_q);
}

double complex_ho_norm_landscape_oracle(double /*omega*/, double gamma, double t,
                                        PhasePoint pt) {
  return std::exp(-gamma * t - std::norm(pt.z()) * (1.0 - std::exp(-2.0 * gamma * t)));
}

double initial_husimi(const InitialStateSpec& spec, PhasePoint pt) {
  return displaced_fock_husimi(spec.excitation(), spec.zc(), pt);
}

FockState initial_fock_state(const InitialStateSpec& spec, int n_max) {
  return displaced_fock_vector(spec.excitation(), spec.zc(), n_max);
}

}  // namespace husimi
