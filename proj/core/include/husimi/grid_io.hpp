// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

// Phase-space grids, sampled scalar fields and their on-disk formats.
//
// HGRD layout (all integers little-endian):
//   "HGRD" 0x01                       magic + format version
//   u32 L, L bytes                    metadata, space separated key=value
//   nq*np f64                         values, row-major with q fastest
//   ceil(nq*np/8) bytes               validity bits, LSB first
//   u32                               CRC32 of every preceding byte

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "husimi/hamiltonian.hpp"

namespace husimi {

/// Inclusive rectangular lattice over (q, p).
struct PhaseGrid {
  double q_min = -7.0;
  double q_max = 7.0;
  double p_min = -7.0;
  double p_max = 7.0;
  int nq = 201;
  int np = 201;

  /// Throws ConfigError on empty or inverted bounds, or fewer than 2 points.
  void validate() const;

  std::size_t size() const {
    return static_cast<std::size_t>(nq) * static_cast<std::size_t>(np);
  }
  double q_step() const { return (q_max - q_min) / (nq - 1); }
  double p_step() const { return (p_max - p_min) / (np - 1); }
  double q(int i) const { return q_min + i * (q_max - q_min) / (nq - 1); }
  double p(int j) const { return p_min + j * (p_max - p_min) / (np - 1); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nq) +
           static_cast<std::size_t>(i);
  }
  PhasePoint point(std::size_t index) const {
    const auto i = static_cast<int>(index % static_cast<std::size_t>(nq));
    const auto j = static_cast<int>(index / static_cast<std::size_t>(nq));
    return {q(i), p(j)};
  }
  int nearest_q_index(double qv) const;
  int nearest_p_index(double pv) const;

  friend bool operator==(const PhaseGrid&, const PhaseGrid&) = default;
};

enum class FieldKind {
  kHusimiClassical,
  kHusimiQuantum,
  kNormLandscape,
  kLogNormLandscape,
};

std::string_view to_string(FieldKind kind);
FieldKind field_kind_from_string(std::string_view name);

struct FieldMeta {
  FieldKind kind = FieldKind::kHusimiClassical;
  double time = 0.0;
  std::string digest;  ///< Hamiltonian digest, hex.
  double scale = 1.0;  ///< Product of all renormalization divisors applied.

  friend bool operator==(const FieldMeta&, const FieldMeta&) = default;
};

/// Real field sampled on a PhaseGrid. Invalid cells carry NaN.
struct ScalarField {
  ScalarField() = default;
  ScalarField(const PhaseGrid& g, FieldMeta m);

  PhaseGrid grid;
  FieldMeta meta;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return values.size(); }
  bool is_valid(std::size_t i) const { return valid[i] != 0; }
  void invalidate(std::size_t i);
  std::size_t valid_count() const;
  double valid_fraction() const;
  /// Largest valid value; NaN when no cell is valid.
  double max_valid() const;
  /// Index of the largest valid value; size() when no cell is valid.
  std::size_t argmax_valid() const;
};

/// Divides every valid value by the maximum over valid cells.
/// Throws AllInvalidError when no valid positive value exists.
ScalarField renormalize_max(const ScalarField& field);

/// Trapezoid rule with measure dq dp / (2 pi); invalid cells count as 0.
double integrate_field(const ScalarField& field);

/// True when grids, metadata, masks and value bit patterns all agree.
bool bitwise_equal(const ScalarField& a, const ScalarField& b);

/// Serializes to HGRD bytes / parses HGRD bytes.
std::vector<std::uint8_t> encode_field(const ScalarField& field);
ScalarField decode_field(std::span<const std::uint8_t> bytes);

void write_field(const ScalarField& field, const std::filesystem::path& path);
ScalarField read_field(const std::filesystem::path& path);

/// Columns q,p,value,valid with 17 significant digits.
void write_csv(const ScalarField& field, const std::filesystem::path& path);

/// Writes `bytes` through a sibling temporary file and renames it in place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace husimi
