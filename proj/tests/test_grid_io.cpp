// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/grid_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "husimi/errors.hpp"
#include "husimi/states.hpp"
#include "oracles.hpp"

using husimi::FieldKind;
using husimi::FieldMeta;
using husimi::FormatError;
using husimi::FormatErrorKind;
using husimi::PhaseGrid;
using husimi::ScalarField;

namespace fs = std::filesystem;

namespace {

// Bitwise reflected CRC-32 (polynomial 0xEDB88320).
std::uint32_t crc32_reference(const std::uint8_t* data, std::size_t size) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) {
    crc ^= data[i];
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

ScalarField random_field(std::mt19937_64& gen, int nq, int np) {
  PhaseGrid g{-3.25, 4.5, -1.0, 2.0 / 3.0, nq, np};
  ScalarField f(g, FieldMeta{FieldKind::kHusimiQuantum, 2.0 * M_PI / 3.0, "0a1b2c3d", 0.125});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.values[i] = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
    if (gen() % 7 == 0) f.invalidate(i);
  }
  return f;
}

FormatErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    husimi::decode_field(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("decode unexpectedly succeeded");
  return FormatErrorKind::kIo;
}

void refresh_crc(std::vector<std::uint8_t>& bytes) {
  const std::uint32_t crc = crc32_reference(bytes.data(), bytes.size() - 4);
  for (int k = 0; k < 4; ++k) bytes[bytes.size() - 4 + k] = static_cast<std::uint8_t>(crc >> (8 * k));
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "husimi_test_grid_io";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(PhaseGrid{}.validate());
  CHECK_THROWS_AS((PhaseGrid{1.0, 1.0, 0.0, 1.0, 3, 3}.validate()), husimi::ConfigError);
  CHECK_THROWS_AS((PhaseGrid{0.0, 1.0, 2.0, 1.0, 3, 3}.validate()), husimi::ConfigError);
  CHECK_THROWS_AS((PhaseGrid{0.0, 1.0, 0.0, 1.0, 1, 3}.validate()), husimi::ConfigError);
  CHECK_THROWS_AS((PhaseGrid{0.0, NAN, 0.0, 1.0, 3, 3}.validate()), husimi::ConfigError);
}

TEST_CASE("index and coordinate mapping") {
  const PhaseGrid g{-7.0, 7.0, -3.0, 5.0, 201, 101};
  CHECK(g.q(0) == -7.0);
  CHECK(g.q(200) == 7.0);
  CHECK(g.q(100) == 0.0);
  CHECK(g.p(100) == 5.0);
  CHECK(g.index(3, 2) == 2u * 201u + 3u);
  for (int j = 0; j < g.np; j += 7) {
    for (int i = 0; i < g.nq; i += 11) {
      const auto pt = g.point(g.index(i, j));
      CHECK(pt.q == g.q(i));
      CHECK(pt.p == g.p(j));
      CHECK(g.nearest_q_index(pt.q) == i);
      CHECK(g.nearest_p_index(pt.p) == j);
    }
  }
}

TEST_CASE("field kind names") {
  for (FieldKind k : {FieldKind::kHusimiClassical, FieldKind::kHusimiQuantum,
                      FieldKind::kNormLandscape, FieldKind::kLogNormLandscape}) {
    CHECK(husimi::field_kind_from_string(husimi::to_string(k)) == k);
  }
  CHECK(husimi::to_string(FieldKind::kLogNormLandscape) == "log_norm_landscape");
  CHECK_THROWS_AS(husimi::field_kind_from_string("husimi"), husimi::ConfigError);
}

TEST_CASE("renormalize_max") {
  SUBCASE("constant field") {
    ScalarField f(PhaseGrid{0, 1, 0, 1, 4, 3}, {});
    std::fill(f.values.begin(), f.values.end(), 0.5);
    const ScalarField r = husimi::renormalize_max(f);
    for (double v : r.values) CHECK(v == 1.0);
    CHECK(r.meta.scale == 0.5);
  }
  SUBCASE("vacuum husimi already peaks at one") {
    ScalarField f(PhaseGrid{-3, 3, -3, 3, 61, 61}, {});
    for (std::size_t i = 0; i < f.size(); ++i) {
      f.values[i] = husimi::displaced_fock_husimi(0, {}, f.grid.point(i));
    }
    const ScalarField r = husimi::renormalize_max(f);
    CHECK(husimi::bitwise_equal(r, f));
    CHECK(r.values[f.grid.index(30, 30)] == 1.0);
  }
  SUBCASE("idempotent with invalid cells") {
    auto gen = oracle::rng(53);
    const ScalarField f = random_field(gen, 17, 9);
    const ScalarField once = husimi::renormalize_max(f);
    const ScalarField twice = husimi::renormalize_max(once);
    CHECK(husimi::bitwise_equal(once, twice));
    CHECK(once.max_valid() == 1.0);
    CHECK(once.valid_count() == f.valid_count());
  }
  SUBCASE("no positive valid value") {
    ScalarField f(PhaseGrid{0, 1, 0, 1, 2, 2}, {});
    CHECK_THROWS_AS(husimi::renormalize_max(f), husimi::AllInvalidError);
    for (std::size_t i = 0; i < f.size(); ++i) f.invalidate(i);
    CHECK_THROWS_AS(husimi::renormalize_max(f), husimi::AllInvalidError);
    CHECK(std::isnan(f.max_valid()));
    CHECK(f.argmax_valid() == f.size());
  }
}

TEST_CASE("integrate_field") {
  SUBCASE("vacuum") {
    ScalarField f(PhaseGrid{-6, 6, -6, 6, 241, 241}, {});
    for (std::size_t i = 0; i < f.size(); ++i) {
      f.values[i] = husimi::displaced_fock_husimi(0, {}, f.grid.point(i));
    }
    CHECK(husimi::integrate_field(f) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("zero") {
    ScalarField f(PhaseGrid{}, {});
    CHECK(husimi::integrate_field(f) == 0.0);
  }
  SUBCASE("second excited ring") {
    ScalarField f(PhaseGrid{-9, 9, -9, 9, 241, 241}, {});
    const husimi::Complex zc{1.0, -0.5};
    for (std::size_t i = 0; i < f.size(); ++i) {
      f.values[i] = husimi::displaced_fock_husimi(2, zc, f.grid.point(i));
    }
    CHECK(husimi::integrate_field(f) == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("constant over a known area") {
    ScalarField f(PhaseGrid{0, 2 * M_PI, 0, 1, 5, 9}, {});
    std::fill(f.values.begin(), f.values.end(), 1.0);
    CHECK(husimi::integrate_field(f) == doctest::Approx(1.0).epsilon(1e-14));
    f.invalidate(0);
    CHECK(husimi::integrate_field(f) < 1.0);
  }
}

TEST_CASE("encoding matches the documented layout") {
  ScalarField f(PhaseGrid{-1.0, 1.0, 0.0, 0.5, 3, 3},
                FieldMeta{FieldKind::kNormLandscape, 0.5, "deadbeef", 1.0});
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = 0.25 * static_cast<double>(i);
  f.invalidate(4);
  const auto bytes = husimi::encode_field(f);
  REQUIRE(bytes.size() > 9);
  CHECK(std::memcmp(bytes.data(), "HGRD\x01", 5) == 0);
  const std::uint32_t meta_len = bytes[5] | bytes[6] << 8 | bytes[7] << 16 |
                                 static_cast<std::uint32_t>(bytes[8]) << 24;
  const std::string meta(bytes.begin() + 9, bytes.begin() + 9 + meta_len);
  CHECK(meta.find("nq=3") != std::string::npos);
  CHECK(meta.find("kind=norm_landscape") != std::string::npos);
  CHECK(meta.find("digest=deadbeef") != std::string::npos);
  CHECK(bytes.size() == 9 + meta_len + 9 * 8 + 2 + 4);
  std::uint64_t raw = 0;
  for (int k = 0; k < 8; ++k) raw |= std::uint64_t{bytes[9 + meta_len + 8 + k]} << (8 * k);
  CHECK(std::bit_cast<double>(raw) == 0.25);
  std::memcpy(&raw, &bytes[9 + meta_len + 4 * 8], 8);
  CHECK(std::isnan(std::bit_cast<double>(raw)));
  // Validity bits: every cell but #4 set.
  CHECK(bytes[9 + meta_len + 72] == 0xEF);
  CHECK(bytes[9 + meta_len + 73] == 0x01);
  const std::size_t crc_pos = bytes.size() - 4;
  const std::uint32_t stored = bytes[crc_pos] | bytes[crc_pos + 1] << 8 |
                               bytes[crc_pos + 2] << 16 |
                               static_cast<std::uint32_t>(bytes[crc_pos + 3]) << 24;
  CHECK(stored == crc32_reference(bytes.data(), crc_pos));
}

TEST_CASE("binary round trip is bitwise") {
  auto gen = oracle::rng(59);
  const fs::path dir = scratch_dir();
  for (int trial = 0; trial < 25; ++trial) {
    const ScalarField f = random_field(gen, 2 + static_cast<int>(gen() % 40),
                                       2 + static_cast<int>(gen() % 40));
    const auto decoded = husimi::decode_field(husimi::encode_field(f));
    CHECK(husimi::bitwise_equal(decoded, f));
    const fs::path path = dir / ("f" + std::to_string(trial) + ".hgrd");
    husimi::write_field(f, path);
    CHECK(husimi::bitwise_equal(husimi::read_field(path), f));
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  }
  SUBCASE("awkward doubles") {
    ScalarField f(PhaseGrid{-0.1, 0.30000000000000004, 1e-300, 1e300, 2, 3},
                  FieldMeta{FieldKind::kLogNormLandscape, -0.0, "", 3.0e-310});
    f.values = {-0.0, 5e-324, 1.7976931348623157e308, -2.5, 1.0 / 3.0, 0.1};
    const auto back = husimi::decode_field(husimi::encode_field(f));
    CHECK(husimi::bitwise_equal(back, f));
    CHECK(std::signbit(back.values[0]));
  }
}

TEST_CASE("malformed inputs") {
  auto gen = oracle::rng(61);
  const auto good = husimi::encode_field(random_field(gen, 5, 4));

  SUBCASE("bad magic") {
    auto b = good;
    b[0] = 'X';
    CHECK(decode_error(b) == FormatErrorKind::kMalformedHeader);
  }
  SUBCASE("empty and truncated") {
    CHECK(decode_error({}) == FormatErrorKind::kMalformedHeader);
    CHECK(decode_error({good.begin(), good.begin() + 7}) == FormatErrorKind::kMalformedHeader);
  }
  SUBCASE("version bump") {
    auto b = good;
    b[4] = 2;
    CHECK(decode_error(b) == FormatErrorKind::kUnsupportedVersion);
  }
  SUBCASE("corrupted metadata") {
    auto b = good;
    b[9] = '#';  // first key no longer recognized
    refresh_crc(b);
    CHECK(decode_error(b) == FormatErrorKind::kMalformedHeader);
    auto c = good;
    c[5] = 0xFF;
    c[6] = 0xFF;
    CHECK(decode_error(c) == FormatErrorKind::kMalformedHeader);
  }
  SUBCASE("payload bit flip") {
    auto b = good;
    b[b.size() - 20] ^= 0x10;
    CHECK(decode_error(b) == FormatErrorKind::kChecksumMismatch);
    auto c = good;
    c.back() ^= 0x01;
    CHECK(decode_error(c) == FormatErrorKind::kChecksumMismatch);
  }
  SUBCASE("dimensions larger than the data") {
    ScalarField f(PhaseGrid{0, 1, 0, 1, 2, 2}, {});
    auto b = husimi::encode_field(f);
    const std::uint32_t meta_len = b[5] | b[6] << 8;
    std::string meta(b.begin() + 9, b.begin() + 9 + meta_len);
    const auto pos = meta.find("nq=2");
    REQUIRE(pos != std::string::npos);
    meta.replace(pos, 4, "nq=9");
    std::copy(meta.begin(), meta.end(), b.begin() + 9);
    refresh_crc(b);
    CHECK(decode_error(b) == FormatErrorKind::kDimensionOverflow);

    meta.replace(pos, 4, "nq=99999999999");
    std::vector<std::uint8_t> big(b.begin(), b.begin() + 5);
    const auto len = static_cast<std::uint32_t>(meta.size());
    for (int k = 0; k < 4; ++k) big.push_back(static_cast<std::uint8_t>(len >> (8 * k)));
    big.insert(big.end(), meta.begin(), meta.end());
    big.insert(big.end(), 64, 0);
    CHECK(decode_error(big) == FormatErrorKind::kDimensionOverflow);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(husimi::read_field(scratch_dir() / "absent.hgrd"), FormatError);
  }
}

TEST_CASE("csv export") {
  ScalarField f(PhaseGrid{0.0, 1.0, -1.0, 0.0, 2, 2},
                FieldMeta{FieldKind::kHusimiClassical, 0.0, "x", 1.0});
  f.values = {0.1, 1.0 / 3.0, 2.0, 5e-20};
  f.invalidate(3);
  const fs::path path = scratch_dir() / "field.csv";
  husimi::write_csv(f, path);
  std::ifstream in(path);
  std::stringstream all;
  all << in.rdbuf();
  const std::string text = all.str();
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "q,p,value,valid");
  std::getline(lines, line);
  CHECK(line == "0,-1,0.10000000000000001,1");
  std::getline(lines, line);
  CHECK(line == "1,-1,0.33333333333333331,1");
  std::getline(lines, line);
  CHECK(line == "0,0,2,1");
  std::getline(lines, line);
  CHECK(line == "1,0,nan,0");
  std::getline(lines, line);
  CHECK(line.empty());
  // Values parse back to the identical doubles.
  CHECK(std::stod("0.33333333333333331") == 1.0 / 3.0);
}
