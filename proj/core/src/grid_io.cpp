// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/grid_io.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "husimi/errors.hpp"

namespace husimi {

namespace {

constexpr std::uint8_t kMagic[4] = {'H', 'G', 'R', 'D'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kMaxMetaBytes = 1 << 16;
constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 32;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  while (n > 0) {
    const auto piece = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, piece);
    data += piece;
    n -= piece;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void malformed(const std::string& why) {
  throw FormatError(FormatErrorKind::kMalformedHeader, "HGRD: malformed header: " + why);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    malformed("bad number for '" + key + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    malformed("bad integer for '" + key + "'");
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

void PhaseGrid::validate() const {
  if (!(std::isfinite(q_min) && std::isfinite(q_max) && std::isfinite(p_min) &&
        std::isfinite(p_max))) {
    throw ConfigError("grid bounds must be finite");
  }
  if (!(q_min < q_max)) throw ConfigError("grid requires q_min < q_max");
  if (!(p_min < p_max)) throw ConfigError("grid requires p_min < p_max");
  if (nq < 2 || np < 2) throw ConfigError("grid requires at least 2 points per axis");
}

int PhaseGrid::nearest_q_index(double qv) const {
  return static_cast<int>(std::lround((qv - q_min) / q_step()));
}

int PhaseGrid::nearest_p_index(double pv) const {
  return static_cast<int>(std::lround((pv - p_min) / p_step()));
}

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::kHusimiClassical: return "husimi_classical";
    case FieldKind::kHusimiQuantum: return "husimi_quantum";
    case FieldKind::kNormLandscape: return "norm_landscape";
    case FieldKind::kLogNormLandscape: return "log_norm_landscape";
  }
  return "unknown";
}

FieldKind field_kind_from_string(std::string_view name) {
  for (FieldKind k : {FieldKind::kHusimiClassical, FieldKind::kHusimiQuantum,
                      FieldKind::kNormLandscape, FieldKind::kLogNormLandscape}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown field kind '" + std::string(name) + "'");
}

ScalarField::ScalarField(const PhaseGrid& g, FieldMeta m)
    : grid(g), meta(std::move(m)), values(g.size(), 0.0), valid(g.size(), 1) {}

void ScalarField::invalidate(std::size_t i) {
  values[i] = std::numeric_limits<double>::quiet_NaN();
  valid[i] = 0;
}

std::size_t ScalarField::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v != 0;
  return n;
}

double ScalarField::valid_fraction() const {
  return values.empty() ? 0.0 : static_cast<double>(valid_count()) / values.size();
}

std::size_t ScalarField::argmax_valid() const {
  std::size_t best = size();
  for (std::size_t i = 0; i < size(); ++i) {
    if (valid[i] && (best == size() || values[i] > values[best])) best = i;
  }
  return best;
}

double ScalarField::max_valid() const {
  const std::size_t i = argmax_valid();
  return i == size() ? std::numeric_limits<double>::quiet_NaN() : values[i];
}

ScalarField renormalize_max(const ScalarField& field) {
  const double peak = field.max_valid();
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw AllInvalidError("renormalize_max: no valid positive value in field");
  }
  ScalarField out = field;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.valid[i]) out.values[i] /= peak;
  }
  out.meta.scale *= peak;
  return out;
}

double integrate_field(const ScalarField& field) {
  const PhaseGrid& g = field.grid;
  double total = 0.0;
  for (int j = 0; j < g.np; ++j) {
    const double wj = (j == 0 || j == g.np - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int i = 0; i < g.nq; ++i) {
      const std::size_t idx = g.index(i, j);
      if (!field.valid[idx]) continue;
      const double wi = (i == 0 || i == g.nq - 1) ? 0.5 : 1.0;
      row += wi * field.values[idx];
    }
    total += wj * row;
  }
  return total * g.q_step() * g.p_step() / (2.0 * std::numbers::pi);
}

bool bitwise_equal(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid) || !(a.meta == b.meta) || a.valid != b.valid ||
      a.values.size() != b.values.size()) {
    return false;
  }
  return std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0;
}

std::vector<std::uint8_t> encode_field(const ScalarField& field) {
  const PhaseGrid& g = field.grid;
  g.validate();
  if (field.values.size() != g.size() || field.valid.size() != g.size()) {
    throw ConfigError("field storage does not match its grid");
  }
  std::string meta;
  meta += "nq=" + std::to_string(g.nq);
  meta += " np=" + std::to_string(g.np);
  meta += " q_min=" + format_double(g.q_min);
  meta += " q_max=" + format_double(g.q_max);
  meta += " p_min=" + format_double(g.p_min);
  meta += " p_max=" + format_double(g.p_max);
  meta += " kind=" + std::string(to_string(field.meta.kind));
  meta += " time=" + format_double(field.meta.time);
  meta += " digest=" + field.meta.digest;
  meta += " scale=" + format_double(field.meta.scale);

  std::vector<std::uint8_t> out;
  const std::size_t cells = g.size();
  out.reserve(5 + 4 + meta.size() + cells * 8 + cells / 8 + 1 + 4);
  for (std::uint8_t b : kMagic) out.push_back(b);
  out.push_back(kVersion);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  for (std::size_t i = 0; i < cells; ++i) {
    const double v =
        field.valid[i] ? field.values[i] : std::numeric_limits<double>::quiet_NaN();
    put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  std::vector<std::uint8_t> bits((cells + 7) / 8, 0);
  for (std::size_t i = 0; i < cells; ++i) {
    if (field.valid[i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  out.insert(out.end(), bits.begin(), bits.end());
  put_u32(out, crc_of(out.data(), out.size()));
  return out;
}

ScalarField decode_field(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0) malformed("bad magic");
  if (bytes[4] != kVersion) {
    throw FormatError(FormatErrorKind::kUnsupportedVersion,
                      "HGRD: unsupported version " + std::to_string(bytes[4]));
  }
  if (bytes.size() < 9) malformed("truncated before metadata length");
  const std::size_t meta_len = get_u32(bytes.data() + 5);
  if (meta_len > kMaxMetaBytes || 9 + meta_len > bytes.size()) {
    malformed("metadata length out of range");
  }
  const std::string meta(reinterpret_cast<const char*>(bytes.data() + 9), meta_len);

  std::map<std::string, std::string> kv;
  std::istringstream tokens(meta);
  std::string tok;
  while (tokens >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) malformed("token '" + tok + "' is not key=value");
    if (!kv.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second) {
      malformed("duplicate key '" + tok.substr(0, eq) + "'");
    }
  }
  static const char* kKeys[] = {"nq",   "np",   "q_min",  "q_max", "p_min",
                                "p_max", "kind", "time", "digest", "scale"};
  for (const char* k : kKeys) {
    if (!kv.contains(k)) malformed(std::string("missing key '") + k + "'");
  }
  if (kv.size() != std::size(kKeys)) malformed("unknown metadata key");

  const std::int64_t nq = parse_int("nq", kv["nq"]);
  const std::int64_t np = parse_int("np", kv["np"]);
  if (nq < 2 || np < 2) malformed("grid needs at least 2 points per axis");
  if (nq > std::numeric_limits<int>::max() || np > std::numeric_limits<int>::max() ||
      static_cast<std::uint64_t>(nq) * static_cast<std::uint64_t>(np) > kMaxCells) {
    throw FormatError(FormatErrorKind::kDimensionOverflow, "HGRD: grid dimensions overflow");
  }
  PhaseGrid g;
  g.nq = static_cast<int>(nq);
  g.np = static_cast<int>(np);
  g.q_min = parse_double("q_min", kv["q_min"]);
  g.q_max = parse_double("q_max", kv["q_max"]);
  g.p_min = parse_double("p_min", kv["p_min"]);
  g.p_max = parse_double("p_max", kv["p_max"]);
  try {
    g.validate();
  } catch (const ConfigError& e) {
    malformed(e.what());
  }
  FieldMeta m;
  try {
    m.kind = field_kind_from_string(kv["kind"]);
  } catch (const ConfigError& e) {
    malformed(e.what());
  }
  m.time = parse_double("time", kv["time"]);
  m.digest = kv["digest"];
  m.scale = parse_double("scale", kv["scale"]);

  const std::uint64_t cells = g.size();
  const std::uint64_t need = 9 + meta_len + cells * 8 + (cells + 7) / 8 + 4;
  if (need > bytes.size()) {
    throw FormatError(FormatErrorKind::kDimensionOverflow,
                      "HGRD: declared dimensions exceed the file size");
  }
  if (need < bytes.size()) malformed("trailing bytes after checksum");

  const std::size_t crc_pos = bytes.size() - 4;
  if (crc_of(bytes.data(), crc_pos) != get_u32(bytes.data() + crc_pos)) {
    throw FormatError(FormatErrorKind::kChecksumMismatch, "HGRD: checksum mismatch");
  }

  ScalarField f(g, m);
  const std::uint8_t* data = bytes.data() + 9 + meta_len;
  const std::uint8_t* bits = data + cells * 8;
  for (std::size_t i = 0; i < cells; ++i) {
    f.values[i] = std::bit_cast<double>(get_u64(data + 8 * i));
    f.valid[i] = (bits[i / 8] >> (i % 8)) & 1u;
  }
  return f;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::kIo, "cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError(FormatErrorKind::kIo, "cannot rename into " + path.string());
}

void write_field(const ScalarField& field, const std::filesystem::path& path) {
  const auto bytes = encode_field(field);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_field(bytes);
}

void write_csv(const ScalarField& field, const std::filesystem::path& path) {
  std::string text = "q,p,value,valid\n";
  char buf[128];
  for (std::size_t i = 0; i < field.size(); ++i) {
    const PhasePoint pt = field.grid.point(i);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", pt.q, pt.p, field.values[i],
                  field.valid[i] ? 1 : 0);
    text += buf;
  }
  write_file_atomic(path, text);
}

}  // namespace husimi
