// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/hamiltonian.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "husimi/errors.hpp"

namespace husimi {

namespace {

// Complex product without the NaN/Inf recovery path of operator*.
inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

constexpr int kStackDegree = 16;

// Powers z^0..z^d and conj(z)^0..conj(z)^d.
class PowerTable {
 public:
  PowerTable(Complex z, int degree) {
    if (degree + 1 > kStackDegree) {
      heap_.resize(2 * static_cast<std::size_t>(degree + 1));
      zp_ = heap_.data();
      zcp_ = heap_.data() + degree + 1;
    } else {
      zp_ = stack_z_.data();
      zcp_ = stack_zc_.data();
    }
    const Complex zc = std::conj(z);
    zp_[0] = 1.0;
    zcp_[0] = 1.0;
    for (int k = 1; k <= degree; ++k) {
      zp_[k] = cmul(zp_[k - 1], z);
      zcp_[k] = cmul(zcp_[k - 1], zc);
    }
  }
  // conj(z)^m z^n; negative exponents never occur for nonzero prefactors.
  Complex mono(int m, int n) const { return cmul(zcp_[m], zp_[n]); }

 private:
  std::array<Complex, kStackDegree> stack_z_;
  std::array<Complex, kStackDegree> stack_zc_;
  std::vector<Complex> heap_;
  Complex* zp_ = nullptr;
  Complex* zcp_ = nullptr;
};

}  // namespace

// ---------------------------------------------------------------------------
// FockOperator

FockOperator::FockOperator(int n_max, std::vector<int> offsets,
                           std::vector<std::vector<Complex>> bands)
    : n_max_(n_max), offsets_(std::move(offsets)), bands_(std::move(bands)) {}

Complex FockOperator::operator()(int row, int col) const {
  const int d = row - col;
  for (std::size_t b = 0; b < offsets_.size(); ++b) {
    if (offsets_[b] == d) return bands_[b][static_cast<std::size_t>(col)];
  }
  return 0.0;
}

void FockOperator::apply(std::span<const Complex> in,
                         std::span<Complex> out) const {
  std::fill(out.begin(), out.end(), Complex{});
  const int dim = n_max_ + 1;
  for (std::size_t b = 0; b < offsets_.size(); ++b) {
    const int d = offsets_[b];
    const auto& band = bands_[b];
    const int k0 = std::max(0, -d);
    const int k1 = std::min(dim, dim - d);
    for (int k = k0; k < k1; ++k) {
      out[static_cast<std::size_t>(k + d)] +=
          cmul(band[static_cast<std::size_t>(k)], in[static_cast<std::size_t>(k)]);
    }
  }
}

std::vector<Complex> FockOperator::dense() const {
  const auto dim = static_cast<std::size_t>(n_max_ + 1);
  std::vector<Complex> out(dim * dim);
  for (std::size_t b = 0; b < offsets_.size(); ++b) {
    const int d = offsets_[b];
    for (int k = std::max(0, -d); k < std::min<int>(dim, dim - d); ++k) {
      out[static_cast<std::size_t>(k + d) * dim + static_cast<std::size_t>(k)] =
          bands_[b][static_cast<std::size_t>(k)];
    }
  }
  return out;
}

double FockOperator::one_norm() const {
  std::vector<double> colsum(static_cast<std::size_t>(n_max_ + 1), 0.0);
  for (const auto& band : bands_) {
    for (std::size_t k = 0; k < band.size(); ++k) colsum[k] += std::abs(band[k]);
  }
  return colsum.empty() ? 0.0 : *std::max_element(colsum.begin(), colsum.end());
}

// ---------------------------------------------------------------------------
// Hamiltonian

Hamiltonian::Hamiltonian(std::span<const Term> terms) {
  for (const Term& t : terms) {
    if (t.m < 0 || t.n < 0) {
      throw ConfigError("hamiltonian term has negative power (m=" +
                        std::to_string(t.m) + ", n=" + std::to_string(t.n) + ")");
    }
    terms_[{t.m, t.n}] += t.coeff;
  }
  std::erase_if(terms_, [](const auto& kv) { return kv.second == Complex{}; });
  rebuild();
}

Hamiltonian::Hamiltonian(std::initializer_list<Term> terms)
    : Hamiltonian(std::span<const Term>(terms.begin(), terms.size())) {}

void Hamiltonian::rebuild() {
  packed_.clear();
  derivative_.clear();
  max_degree_ = 0;
  for (const auto& [key, c] : terms_) {
    packed_.push_back({key.first, key.second, c.real(), c.imag()});
    if (key.second > 0) {
      derivative_.push_back(
          {key.first, key.second - 1, key.second * c.real(), key.second * c.imag()});
    }
    max_degree_ = std::max(max_degree_, key.first + key.second);
  }
}

Hamiltonian Hamiltonian::complex_oscillator(double omega, double gamma) {
  const Complex w{omega, -gamma};
  return Hamiltonian{{1, 1, w}, {0, 0, 0.5 * w}};
}

Hamiltonian Hamiltonian::damped_kerr(double gamma, double beta, double delta) {
  const double drive = delta * kInvSqrt2;
  return Hamiltonian{{1, 1, Complex{-1.0, -gamma}},
                     {2, 2, beta},
                     {1, 0, drive},
                     {0, 1, drive}};
}

Hamiltonian Hamiltonian::pt_kerr(double beta, double epsilon) {
  const Complex drive{0.0, -epsilon * kInvSqrt2};
  return Hamiltonian{{1, 1, 1.0}, {2, 2, beta}, {1, 0, drive}, {0, 1, drive}};
}

std::vector<Term> Hamiltonian::term_list() const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& [key, c] : terms_) out.push_back({key.first, key.second, c});
  return out;
}

bool Hamiltonian::is_hermitian() const {
  for (const auto& [key, c] : terms_) {
    auto it = terms_.find({key.second, key.first});
    if (it == terms_.end() || it->second != std::conj(c)) return false;
  }
  return true;
}

Hamiltonian Hamiltonian::adjoint() const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& [key, c] : terms_) out.push_back({key.second, key.first, std::conj(c)});
  return Hamiltonian(out);
}

Hamiltonian Hamiltonian::scaled(Complex factor) const {
  std::vector<Term> out;
  for (const auto& [key, c] : terms_) out.push_back({key.first, key.second, c * factor});
  return Hamiltonian(out);
}

Hamiltonian Hamiltonian::operator+(const Hamiltonian& other) const {
  std::vector<Term> all = term_list();
  for (const Term& t : other.term_list()) all.push_back(t);
  return Hamiltonian(all);
}

Hamiltonian Hamiltonian::operator-(const Hamiltonian& other) const {
  return *this + other.scaled(-1.0);
}

Complex Hamiltonian::symbol(PhasePoint pt) const {
  const PowerTable pw(pt.z(), max_degree_);
  Complex k{};
  for (const Packed& t : packed_) k += cmul({t.re, t.im}, pw.mono(t.m, t.n));
  return k;
}

FlowSample Hamiltonian::flow_sample_general(Complex zeta) const {
  const PowerTable pw(zeta, max_degree_);
  Complex k{};
  Complex dk_dz{};
  for (const Packed& t : packed_) {
    const Complex c{t.re, t.im};
    k += cmul(c, pw.mono(t.m, t.n));
    if (t.n > 0) dk_dz += static_cast<double>(t.n) * cmul(c, pw.mono(t.m, t.n - 1));
  }
  // -i * conj(dK/dz)
  return {Complex{-dk_dz.imag(), -dk_dz.real()}, k.imag()};
}

Velocity Hamiltonian::flow_velocity(PhasePoint pt) const {
  const FlowSample s = flow_sample(pt.z());
  return {kSqrt2 * s.dzeta.real(), kSqrt2 * s.dzeta.imag()};
}

FlowJacobian Hamiltonian::flow_jacobian(PhasePoint pt) const {
  const PowerTable pw(pt.z(), max_degree_);
  // G = dK/dz; derivatives of G with respect to z and conj(z).
  Complex g_z{};
  Complex g_zc{};
  for (const Packed& t : packed_) {
    const Complex c{t.re, t.im};
    if (t.n > 1) g_z += static_cast<double>(t.n * (t.n - 1)) * cmul(c, pw.mono(t.m, t.n - 2));
    if (t.n > 0 && t.m > 0) {
      g_zc += static_cast<double>(t.m * t.n) * cmul(c, pw.mono(t.m - 1, t.n - 1));
    }
  }
  const Complex i{0.0, 1.0};
  const Complex g_q = (g_z + g_zc) * kInvSqrt2;
  const Complex g_p = i * (g_z - g_zc) * kInvSqrt2;
  // v = -i conj(G); (dq/dt, dp/dt) = sqrt(2) (Re v, Im v).
  const Complex v_q = -i * std::conj(g_q);
  const Complex v_p = -i * std::conj(g_p);
  return {kSqrt2 * v_q.real(), kSqrt2 * v_p.real(), kSqrt2 * v_q.imag(),
          kSqrt2 * v_p.imag()};
}

namespace {

// sqrt(k!/(k-n)!) * sqrt((k-n+m)!/(k-n)!). While the integer product is exactly
// representable the square root is taken once, so diagonal entries come out as
// exact integers; otherwise fall back to running products of square roots.
double ladder_factor(int k, int m, int n) {
  constexpr double kExactLimit = 9007199254740992.0;  // 2^53
  double product = 1.0;
  bool exact = true;
  for (int j = k - n + 1; j <= k && exact; ++j) {
    product *= j;
    exact = product < kExactLimit;
  }
  for (int j = k - n + 1; j <= k - n + m && exact; ++j) {
    product *= j;
    exact = product < kExactLimit;
  }
  if (exact) return std::sqrt(product);
  double factor = 1.0;
  for (int j = k - n + 1; j <= k; ++j) factor *= std::sqrt(static_cast<double>(j));
  for (int j = k - n + 1; j <= k - n + m; ++j) factor *= std::sqrt(static_cast<double>(j));
  return factor;
}

}  // namespace

FockOperator Hamiltonian::fock_matrix(int n_max) const {
  if (n_max < max_degree_ || n_max < 0) {
    throw ConfigError("fock truncation n_max=" + std::to_string(n_max) +
                      " is below the Hamiltonian degree " +
                      std::to_string(max_degree_));
  }
  const auto dim = static_cast<std::size_t>(n_max + 1);
  std::vector<int> offsets;
  std::vector<std::vector<Complex>> bands;
  auto band_for = [&](int d) -> std::vector<Complex>& {
    for (std::size_t b = 0; b < offsets.size(); ++b) {
      if (offsets[b] == d) return bands[b];
    }
    offsets.push_back(d);
    bands.emplace_back(dim, Complex{});
    return bands.back();
  };
  for (const auto& [key, c] : terms_) {
    const auto [m, n] = key;
    auto& band = band_for(m - n);
    for (int k = n; k <= n_max && k - n + m <= n_max; ++k) {
      band[static_cast<std::size_t>(k)] += c * ladder_factor(k, m, n);
    }
  }
  // Deterministic band order.
  std::vector<std::size_t> order(offsets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return offsets[a] < offsets[b]; });
  std::vector<int> sorted_offsets;
  std::vector<std::vector<Complex>> sorted_bands;
  for (std::size_t i : order) {
    sorted_offsets.push_back(offsets[i]);
    sorted_bands.push_back(std::move(bands[i]));
  }
  return FockOperator(n_max, std::move(sorted_offsets), std::move(sorted_bands));
}

std::string Hamiltonian::digest() const {
  std::string canon;
  char buf[128];
  for (const auto& [key, c] : terms_) {
    std::snprintf(buf, sizeof buf, "%d,%d,%a,%a;", key.first, key.second, c.real(),
                  c.imag());
    canon += buf;
  }
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(canon.data()),
                          static_cast<uInt>(canon.size()));
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace husimi
