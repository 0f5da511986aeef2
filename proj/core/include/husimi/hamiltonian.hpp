// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// Normal-ordered polynomial Hamiltonians K = sum K_mn a^dag^m a^n.
//
// Phase-space conventions (hbar = 1):
//   z      = (q + i p) / sqrt(2)
//   K(z)   = sum K_mn conj(z)^m z^n          classical symbol
//   H      = Re K,  Gamma = Im K = (K - K*)/2i
//   dz/dt  = -i dK*/dz*                       characteristic flow
// In real coordinates the characteristic flow reads
//   dq/dt =  dH/dp - dGamma/dq,   dp/dt = -dH/dq - dGamma/dp,
// so for Gamma < 0 (loss) trajectories are pushed up the Gamma gradient.

#pragma once

#include <complex>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace husimi {

using Complex = std::complex<double>;

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// A point of the real phase plane.
struct PhasePoint {
  double q = 0.0;
  double p = 0.0;

  Complex z() const { return {q * kInvSqrt2, p * kInvSqrt2}; }
  static PhasePoint from_z(Complex z) {
    return {z.real() * kSqrt2, z.imag() * kSqrt2};
  }
  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// One normal-ordered monomial K_mn a^dag^m a^n.
struct Term {
  int m = 0;
  int n = 0;
  Complex coeff;
};

/// (dq/dt, dp/dt) of the characteristic flow.
struct Velocity {
  double dq = 0.0;
  double dp = 0.0;
};

/// Jacobian of (dq/dt, dp/dt) with respect to (q, p), row-major.
struct FlowJacobian {
  double dq_dq = 0.0;
  double dq_dp = 0.0;
  double dp_dq = 0.0;
  double dp_dp = 0.0;
};

/// Characteristic velocity dzeta/dt and local rate Gamma at one point.
struct FlowSample {
  Complex dzeta;
  double gamma = 0.0;
};

/// Banded matrix of K in the number basis |0>, ..., |n_max>.
/// Band with offset d holds entries (k + d, k).
class FockOperator {
 public:
  FockOperator() = default;
  FockOperator(int n_max, std::vector<int> offsets,
               std::vector<std::vector<Complex>> bands);

  int n_max() const { return n_max_; }
  int dim() const { return n_max_ + 1; }
  const std::vector<int>& offsets() const { return offsets_; }

  Complex operator()(int row, int col) const;

  /// out = K * in. `out` must not alias `in`.
  void apply(std::span<const Complex> in, std::span<Complex> out) const;

  /// Row-major dense copy, dim() x dim().
  std::vector<Complex> dense() const;

  /// Max column sum of |K_ij|; bounds the spectral radius.
  double one_norm() const;

 private:
  int n_max_ = 0;
  std::vector<int> offsets_;
  std::vector<std::vector<Complex>> bands_;
};

class Hamiltonian {
 public:
  using TermMap = std::map<std::pair<int, int>, Complex>;

  /// The zero Hamiltonian.
  Hamiltonian() = default;

  /// Duplicate (m, n) keys are summed; exact zeros are dropped.
  explicit Hamiltonian(std::span<const Term> terms);
  Hamiltonian(std::initializer_list<Term> terms);

  /// (omega - i gamma)(a^dag a + 1/2).
  static Hamiltonian complex_oscillator(double omega, double gamma);

  /// -(1 + i gamma) a^dag a + beta a^dag^2 a^2 + delta/sqrt(2) (a^dag + a).
  static Hamiltonian damped_kerr(double gamma, double beta, double delta);

  /// a^dag a + beta a^dag^2 a^2 - i epsilon/sqrt(2) (a^dag + a).
  static Hamiltonian pt_kerr(double beta, double epsilon);

  const TermMap& terms() const { return terms_; }
  std::vector<Term> term_list() const;
  int max_degree() const { return max_degree_; }
  bool is_zero() const { return terms_.empty(); }

  /// Exact test K_mn == conj(K_nm) for every key.
  bool is_hermitian() const;

  /// K_mn -> conj(K_nm).
  Hamiltonian adjoint() const;
  Hamiltonian scaled(Complex factor) const;
  Hamiltonian operator+(const Hamiltonian& other) const;
  Hamiltonian operator-(const Hamiltonian& other) const;

  friend bool operator==(const Hamiltonian& a, const Hamiltonian& b) {
    return a.terms_ == b.terms_;
  }

  Complex symbol(PhasePoint pt) const;
  double hermitian_part(PhasePoint pt) const { return symbol(pt).real(); }
  double gamma(PhasePoint pt) const { return symbol(pt).imag(); }

  Velocity flow_velocity(PhasePoint pt) const;
  FlowJacobian flow_jacobian(PhasePoint pt) const;

  /// Hot-path evaluation used by the integrators.
  FlowSample flow_sample(Complex zeta) const {
    if (max_degree_ < kInlineDegree) return flow_sample_small(zeta);
    return flow_sample_general(zeta);
  }

  /// Throws ConfigError when n_max < max_degree().
  FockOperator fock_matrix(int n_max) const;

  /// Short hex digest of the canonical coefficient table.
  std::string digest() const;

 private:
  struct Packed {
    int m;
    int n;
    double re;
    double im;
  };

  static constexpr int kInlineDegree = 12;

  void rebuild();
  FlowSample flow_sample_general(Complex zeta) const;

  FlowSample flow_sample_small(Complex zeta) const {
    // Powers of z and conj(z) as split real/imag parts; conj(z)^k is the
    // conjugate of z^k, so one table serves both.
    double pr[kInlineDegree];
    double pi[kInlineDegree];
    pr[0] = 1.0;
    pi[0] = 0.0;
    const double zr = zeta.real();
    const double zi = zeta.imag();
    for (int k = 1; k <= max_degree_; ++k) {
      pr[k] = pr[k - 1] * zr - pi[k - 1] * zi;
      pi[k] = pr[k - 1] * zi + pi[k - 1] * zr;
    }
    // conj(z)^m z^n = (pr_m - i pi_m)(pr_n + i pi_n)
    auto mono_re = [&](int m, int n) { return pr[m] * pr[n] + pi[m] * pi[n]; };
    auto mono_im = [&](int m, int n) { return pr[m] * pi[n] - pi[m] * pr[n]; };
    double k_im = 0.0;
    for (const Packed& t : packed_) {
      k_im += t.re * mono_im(t.m, t.n) + t.im * mono_re(t.m, t.n);
    }
    double g_re = 0.0;
    double g_im = 0.0;
    for (const Packed& t : derivative_) {
      const double a = mono_re(t.m, t.n);
      const double b = mono_im(t.m, t.n);
      g_re += t.re * a - t.im * b;
      g_im += t.re * b + t.im * a;
    }
    // -i * conj(dK/dz)
    return {Complex{-g_im, -g_re}, k_im};
  }

  TermMap terms_;
  std::vector<Packed> packed_;
  std::vector<Packed> derivative_;  ///< n K_mn at exponents (m, n - 1).
  int max_degree_ = 0;
};

}  // namespace husimi
