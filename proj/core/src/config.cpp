// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "husimi/errors.hpp"
#include "json.hpp"

namespace husimi {

namespace {

using nlohmann::json;

// Cursor into the document that remembers its path for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(path_ + ": " + why);
  }

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) throw ConfigError(path_ + "." + key + ": unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": missing required key");
    return {j_.at(key), path_ + "." + key};
  }

  Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    const auto v = j_.get<long long>();
    if (v < -2147483647LL || v > 2147483647LL) fail("integer out of range");
    return static_cast<int>(v);
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  double number_or(const char* key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }
  int integer_or(const char* key, int fallback) const {
    return has(key) ? at(key).integer() : fallback;
  }
  bool boolean_or(const char* key, bool fallback) const {
    return has(key) ? at(key).boolean() : fallback;
  }

 private:
  const json& j_;
  std::string path_;
};

PhasePoint read_point(const Node& n) {
  n.expect_object({"q", "p"});
  return {n.at("q").number(), n.at("p").number()};
}

template <typename F>
void rethrow_with_path(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  rethrow_with_path("config.grid", [&] { grid.validate(); });
  rethrow_with_path("config.integrator", [&] { integrator.validate(); });
  rethrow_with_path("config.propagation", [&] { propagation.validate(); });
  if (initial_state.n < 0) throw ConfigError("config.initial_state.n: must be >= 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    const std::string path = "config.times[" + std::to_string(k) + "]";
    if (!(times[k] >= 0.0)) throw ConfigError(path + ": times must be non-negative");
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw ConfigError(path + ": times must be strictly increasing");
    }
  }
  if (propagation.n_max < hamiltonian.max_degree()) {
    throw ConfigError("config.propagation.n_max: below the Hamiltonian degree");
  }
  if (propagation.n_max < initial_state.excitation()) {
    throw ConfigError("config.propagation.n_max: below the initial excitation");
  }
  if (!(trajectories.duration > 0.0)) {
    throw ConfigError("config.trajectories.duration: must be > 0");
  }
  if (!(fixed_points.tol > 0.0)) throw ConfigError("config.fixed_points.tol: must be > 0");
  if (fixed_points.seeds_per_axis < 2) {
    throw ConfigError("config.fixed_points.seeds_per_axis: must be >= 2");
  }
}

std::filesystem::path RunConfig::output_dir() const {
  return label.empty() ? outputs.dir : outputs.dir / label;
}

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  const Node root(doc, "config");
  root.expect_object({"schema_version", "label", "hamiltonian", "initial_state", "grid",
                      "times", "integrator", "propagation", "outputs", "trajectories",
                      "fixed_points"});
  const int version = root.at("schema_version").integer();
  if (version != kConfigSchemaVersion) {
    root.at("schema_version").fail("unsupported schema version " + std::to_string(version));
  }

  RunConfig cfg;
  if (root.has("label")) cfg.label = root.at("label").string();

  const Node terms = root.at("hamiltonian");
  std::vector<Term> parsed;
  for (std::size_t i = 0; i < terms.array_size(); ++i) {
    const Node t = terms.at(i);
    t.expect_object({"m", "n", "re", "im"});
    const int m = t.at("m").integer();
    const int n = t.at("n").integer();
    if (m < 0) t.at("m").fail("must be >= 0");
    if (n < 0) t.at("n").fail("must be >= 0");
    parsed.push_back({m, n, Complex{t.number_or("re", 0.0), t.number_or("im", 0.0)}});
  }
  cfg.hamiltonian = Hamiltonian(parsed);

  if (root.has("initial_state")) {
    const Node s = root.at("initial_state");
    s.expect_object({"kind", "n", "qc", "pc"});
    const std::string kind = s.at("kind").string();
    if (kind == "coherent") {
      cfg.initial_state.kind = StateKind::kCoherent;
    } else if (kind == "displaced_fock") {
      cfg.initial_state.kind = StateKind::kDisplacedFock;
    } else {
      s.at("kind").fail("expected \"coherent\" or \"displaced_fock\"");
    }
    cfg.initial_state.n = s.integer_or("n", 0);
    if (cfg.initial_state.n < 0) s.at("n").fail("must be >= 0");
    if (cfg.initial_state.kind == StateKind::kCoherent && cfg.initial_state.n != 0) {
      s.at("n").fail("coherent states have n = 0");
    }
    cfg.initial_state.center = {s.number_or("qc", 0.0), s.number_or("pc", 0.0)};
  }

  if (root.has("grid")) {
    const Node g = root.at("grid");
    g.expect_object({"q_min", "q_max", "p_min", "p_max", "nq", "np"});
    cfg.grid.q_min = g.number_or("q_min", cfg.grid.q_min);
    cfg.grid.q_max = g.number_or("q_max", cfg.grid.q_max);
    cfg.grid.p_min = g.number_or("p_min", cfg.grid.p_min);
    cfg.grid.p_max = g.number_or("p_max", cfg.grid.p_max);
    cfg.grid.nq = g.integer_or("nq", cfg.grid.nq);
    cfg.grid.np = g.integer_or("np", cfg.grid.np);
  }

  const Node times = root.at("times");
  for (std::size_t i = 0; i < times.array_size(); ++i) {
    cfg.times.push_back(times.at(i).number());
  }

  if (root.has("integrator")) {
    const Node in = root.at("integrator");
    in.expect_object({"dt", "scheme", "rk45_tol", "max_log_w"});
    cfg.integrator.dt = in.number_or("dt", cfg.integrator.dt);
    if (in.has("scheme")) {
      const std::string scheme = in.at("scheme").string();
      if (scheme == "rk4") {
        cfg.integrator.scheme = Scheme::kRk4;
      } else if (scheme == "rk45") {
        cfg.integrator.scheme = Scheme::kRk45;
      } else {
        in.at("scheme").fail("expected \"rk4\" or \"rk45\"");
      }
    }
    cfg.integrator.rk45_tol = in.number_or("rk45_tol", cfg.integrator.rk45_tol);
    cfg.integrator.max_log_w = in.number_or("max_log_w", cfg.integrator.max_log_w);
  }

  cfg.propagation.n_max = default_truncation(cfg.initial_state);
  if (root.has("propagation")) {
    const Node pr = root.at("propagation");
    pr.expect_object({"n_max", "dt", "leakage_tol", "renormalize_each_step"});
    cfg.propagation.n_max = pr.integer_or("n_max", cfg.propagation.n_max);
    cfg.propagation.dt = pr.number_or("dt", cfg.propagation.dt);
    cfg.propagation.leakage_tol = pr.number_or("leakage_tol", cfg.propagation.leakage_tol);
    cfg.propagation.renormalize_each_step =
        pr.boolean_or("renormalize_each_step", cfg.propagation.renormalize_each_step);
  }

  if (root.has("outputs")) {
    const Node out = root.at("outputs");
    out.expect_object({"dir", "csv", "renormalize"});
    if (out.has("dir")) cfg.outputs.dir = out.at("dir").string();
    cfg.outputs.csv = out.boolean_or("csv", cfg.outputs.csv);
    cfg.outputs.renormalize = out.boolean_or("renormalize", cfg.outputs.renormalize);
  }

  if (root.has("trajectories")) {
    const Node tr = root.at("trajectories");
    tr.expect_object({"starts", "duration"});
    if (tr.has("starts")) {
      const Node starts = tr.at("starts");
      for (std::size_t i = 0; i < starts.array_size(); ++i) {
        cfg.trajectories.starts.push_back(read_point(starts.at(i)));
      }
    }
    cfg.trajectories.duration = tr.number_or("duration", cfg.trajectories.duration);
  }

  if (root.has("fixed_points")) {
    const Node fp = root.at("fixed_points");
    fp.expect_object({"tol", "seeds_per_axis"});
    cfg.fixed_points.tol = fp.number_or("tol", cfg.fixed_points.tol);
    cfg.fixed_points.seeds_per_axis =
        fp.integer_or("seeds_per_axis", cfg.fixed_points.seeds_per_axis);
  }

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& cfg) {
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  if (!cfg.label.empty()) doc["label"] = cfg.label;
  doc["hamiltonian"] = json::array();
  for (const Term& t : cfg.hamiltonian.term_list()) {
    doc["hamiltonian"].push_back(
        {{"m", t.m}, {"n", t.n}, {"re", t.coeff.real()}, {"im", t.coeff.imag()}});
  }
  doc["initial_state"] = {
      {"kind", cfg.initial_state.kind == StateKind::kCoherent ? "coherent" : "displaced_fock"},
      {"n", cfg.initial_state.n},
      {"qc", cfg.initial_state.center.q},
      {"pc", cfg.initial_state.center.p}};
  doc["grid"] = {{"q_min", cfg.grid.q_min}, {"q_max", cfg.grid.q_max},
                 {"p_min", cfg.grid.p_min}, {"p_max", cfg.grid.p_max},
                 {"nq", cfg.grid.nq},       {"np", cfg.grid.np}};
  doc["times"] = cfg.times;
  doc["integrator"] = {{"dt", cfg.integrator.dt},
                       {"scheme", cfg.integrator.scheme == Scheme::kRk4 ? "rk4" : "rk45"},
                       {"rk45_tol", cfg.integrator.rk45_tol},
                       {"max_log_w", cfg.integrator.max_log_w}};
  doc["propagation"] = {{"n_max", cfg.propagation.n_max},
                        {"dt", cfg.propagation.dt},
                        {"leakage_tol", cfg.propagation.leakage_tol},
                        {"renormalize_each_step", cfg.propagation.renormalize_each_step}};
  doc["outputs"] = {{"dir", cfg.outputs.dir.string()},
                    {"csv", cfg.outputs.csv},
                    {"renormalize", cfg.outputs.renormalize}};
  json starts = json::array();
  for (const PhasePoint& s : cfg.trajectories.starts) starts.push_back({{"q", s.q}, {"p", s.p}});
  doc["trajectories"] = {{"starts", starts}, {"duration", cfg.trajectories.duration}};
  doc["fixed_points"] = {{"tol", cfg.fixed_points.tol},
                         {"seeds_per_axis", cfg.fixed_points.seeds_per_axis}};
  return doc.dump(2) + "\n";
}

}  // namespace husimi
