// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/ao.hpp"
#include "maisac/apm.hpp"
#include "maisac/beampattern.hpp"
#include "maisac/error.hpp"
#include "maisac/rp_search.hpp"
#include "maisac/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace maisac {

using json = nlohmann::json;

// Configuration documents use dB/dBm and multiples of the wavelength where
// the reference table does; conversion to linear SI units happens only in
// settings_from_json. docs/config.md lists every key.

/// The complete default document, reproducing the reference parameter table.
inline json default_config() {
  return json{
      {"wavelength_m", 0.01},
      {"region_side_wavelengths", 100.0},
      {"region_gap_wavelengths", 10.0},
      {"min_spacing_wavelengths", 0.5},
      {"num_tx", 8},
      {"num_rx", 8},
      {"num_targets", 2},
      {"num_ul", 2},
      {"num_dl", 2},
      {"si_loss_db", -100.0},
      {"round_trip_db", -50.0},
      {"p_ul_max_dbm", 10.0},
      {"p_dl_max_dbm", 40.0},
      {"noise_bs_dbm", -70.0},
      {"noise_dl_dbm", -70.0},
      {"bs_height_m", 15.0},
      {"ring_min_m", 25.0},
      {"ring_max_m", 30.0},
      {"weights", nullptr},
      {"targets", nullptr},
      {"ul_users", nullptr},
      {"dl_users", nullptr},
      {"gamma", 100},
      {"seeds", json::array({1})},
      {"solver",
       {{"ao_max_iterations", 100},
        {"ao_tolerance", 1e-3},
        {"sca_max_rounds", 100},
        {"sca_tolerance", 1e-3},
        {"max_ascent_steps", 2000},
        {"initial_step", 1.0},
        {"shrink", 0.5},
        {"armijo_slope", 1e-4},
        {"max_backtracks", 50},
        {"pg_tolerance", 1e-6},
        {"ascent_floor", 1e-9},
        {"spectral_steps", true},
        {"layout_attempts", 1000000}}},
      {"sweep",
       {{"region_side_wavelengths", json::array({5.0, 30.0, 100.0})},
        {"schemes", json::array({"MA", "FPAF", "FPAH"})}}},
      {"apm", {{"methods", json::array({"greedy", "identity", "exhaustive", "optimal"})}}},
      {"beampattern",
       {{"layout", "fpaf"},
        {"num_antennas", 128},
        {"focus", "nodes"},
        {"grid",
         {{"kind", "rect"},
          {"a_min", -30.0},
          {"a_max", 30.0},
          {"na", 256},
          {"b_min", 0.0},
          {"b_max", 30.0},
          {"nb", 256},
          {"z", -15.0}}},
        {"binary", false}}},
  };
}

/// Desk-scale preset: N = M = 4, L = J = K = 1, gamma = 5.
inline json desk_config() {
  json j = default_config();
  j["num_tx"] = 4;
  j["num_rx"] = 4;
  j["num_targets"] = 1;
  j["num_ul"] = 1;
  j["num_dl"] = 1;
  j["gamma"] = 5;
  j["beampattern"]["grid"]["na"] = 64;
  j["beampattern"]["grid"]["nb"] = 64;
  return j;
}

struct SweepSettings {
  std::vector<double> sides_wavelengths;
  std::vector<Scheme> schemes;
};

enum class BeamLayout { kFpaf, kFpah, kRandom, kOptimized };

struct BeamSettings {
  BeamLayout layout = BeamLayout::kFpaf;
  std::size_t num_antennas = 128;
  std::optional<std::vector<Position3>> focus;  // empty optional: scenario nodes
  GridSpec grid;
  bool binary = false;
};

/// Typed view of a validated configuration document.
struct Settings {
  SceneParams scene;
  RpOptions rp;
  std::size_t gamma = 100;
  std::vector<std::uint64_t> seeds;
  SweepSettings sweep;
  std::vector<MatchMethod> apm_methods;
  BeamSettings beam;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& key, const std::string& what) {
  fail(ErrorKind::kConfig, "'" + key + "': " + what);
}

inline void check_keys(const json& obj, const json& reference, const std::string& prefix) {
  for (const auto& item : obj.items()) {
    if (!reference.contains(item.key())) config_fail(prefix + item.key(), "unknown key");
  }
}

inline double num(const json& obj, const std::string& key, const std::string& prefix) {
  const json& v = obj.at(key);
  if (!v.is_number()) config_fail(prefix + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_fail(prefix + key, "must be finite");
  return d;
}

inline std::size_t count(const json& obj, const std::string& key, const std::string& prefix) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) config_fail(prefix + key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

inline Position3 position(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) config_fail(key, "expected [x, y, z]");
  for (const auto& c : v) {
    if (!c.is_number()) config_fail(key, "coordinates must be numbers");
  }
  const Position3 p{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  if (!p.finite()) config_fail(key, "coordinates must be finite");
  return p;
}

inline std::optional<std::vector<Node>> nodes(const json& v, const std::string& key, const char* coeff_key) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_array()) config_fail(key, "expected a list of nodes or null");
  std::vector<Node> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string k = key + "[" + std::to_string(i) + "]";
    const json& e = v[i];
    if (!e.is_object() || !e.contains("position")) config_fail(k, "expected {\"position\": [x, y, z]}");
    for (const auto& item : e.items()) {
      if (item.key() != "position" && item.key() != coeff_key) config_fail(k + "." + item.key(), "unknown key");
    }
    Node n{position(e["position"], k + ".position"), 0.0};
    if (e.contains(coeff_key)) n.coeff = db_to_amplitude(num(e, coeff_key, k + "."));
    out.push_back(n);
  }
  return out;
}

inline std::vector<double> numbers(const json& v, const std::string& key) {
  if (!v.is_array()) config_fail(key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) config_fail(key, "expected a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

/// Fills every key missing from `doc` with its default, so that the
/// serialized result fully describes the run.
inline json effective_config(const json& doc) {
  json d = default_config();
  if (!doc.is_object()) fail(ErrorKind::kConfig, "configuration must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (!d.contains(k)) detail::config_fail(k, "unknown key");
    if (d[k].is_object()) {
      if (!v.is_object()) detail::config_fail(k, "expected an object");
      for (const auto& [k2, v2] : v.items()) {
        if (!d[k].contains(k2)) detail::config_fail(k + "." + k2, "unknown key");
        if (d[k][k2].is_object()) {
          if (!v2.is_object()) detail::config_fail(k + "." + k2, "expected an object");
          for (const auto& [k3, v3] : v2.items()) {
            if (!d[k][k2].contains(k3)) detail::config_fail(k + "." + k2 + "." + k3, "unknown key");
            d[k][k2][k3] = v3;
          }
        } else {
          d[k][k2] = v2;
        }
      }
    } else {
      d[k] = v;
    }
  }
  return d;
}

/// Validates `doc` against the schema of default_config() and converts to
/// linear SI units. Throws a config error naming the offending key.
inline Settings settings_from_json(const json& doc) {
  using namespace detail;
  const json d = effective_config(doc);

  Settings s;
  SceneParams& p = s.scene;
  p.wavelength = num(d, "wavelength_m", "");
  if (!(p.wavelength > 0.0)) config_fail("wavelength_m", "must be positive");
  const double side = num(d, "region_side_wavelengths", "");
  if (!(side > 0.0)) config_fail("region_side_wavelengths", "must be positive");
  p.region_side = side * p.wavelength;
  const double gap = num(d, "region_gap_wavelengths", "");
  if (gap < 0.0) config_fail("region_gap_wavelengths", "must be nonnegative");
  p.region_gap = gap * p.wavelength;
  const double spacing = num(d, "min_spacing_wavelengths", "");
  if (spacing < 0.0) config_fail("min_spacing_wavelengths", "must be nonnegative");
  p.min_spacing = spacing * p.wavelength;

  p.num_tx = count(d, "num_tx", "");
  p.num_rx = count(d, "num_rx", "");
  if (p.num_tx == 0) config_fail("num_tx", "must be at least 1");
  if (p.num_rx == 0) config_fail("num_rx", "must be at least 1");
  p.num_targets = count(d, "num_targets", "");
  p.num_ul = count(d, "num_ul", "");
  p.num_dl = count(d, "num_dl", "");

  p.si_coeff = db_to_amplitude(num(d, "si_loss_db", ""));
  if (!(p.si_coeff < 1.0)) config_fail("si_loss_db", "must be negative");
  p.round_trip_coeff = db_to_amplitude(num(d, "round_trip_db", ""));
  p.p_ul_max = dbm_to_watt(num(d, "p_ul_max_dbm", ""));
  p.p_dl_max = dbm_to_watt(num(d, "p_dl_max_dbm", ""));
  p.noise_bs = dbm_to_watt(num(d, "noise_bs_dbm", ""));
  p.noise_dl = dbm_to_watt(num(d, "noise_dl_dbm", ""));
  p.bs_height = num(d, "bs_height_m", "");
  p.ring_min = num(d, "ring_min_m", "");
  p.ring_max = num(d, "ring_max_m", "");
  if (!(p.ring_min > 0.0) || p.ring_max < p.ring_min) config_fail("ring_min_m", "need 0 < ring_min_m <= ring_max_m");

  p.targets = nodes(d["targets"], "targets", "coeff_db");
  p.ul_users = nodes(d["ul_users"], "ul_users", "path_loss_db");
  p.dl_users = nodes(d["dl_users"], "dl_users", "path_loss_db");
  if (p.targets) p.num_targets = p.targets->size();
  if (p.ul_users) p.num_ul = p.ul_users->size();
  if (p.dl_users) p.num_dl = p.dl_users->size();
  if (p.num_targets + p.num_ul + p.num_dl == 0) config_fail("num_targets", "need at least one target or user");

  if (!d["weights"].is_null()) {
    const json& w = d["weights"];
    if (!w.is_object()) config_fail("weights", "expected {\"sensing\": [...], \"ul\": [...], \"dl\": [...]}");
    check_keys(w, json{{"sensing", 0}, {"ul", 0}, {"dl", 0}}, "weights.");
    RateWeights rw;
    if (w.contains("sensing")) rw.sensing = numbers(w["sensing"], "weights.sensing");
    if (w.contains("ul")) rw.ul = numbers(w["ul"], "weights.ul");
    if (w.contains("dl")) rw.dl = numbers(w["dl"], "weights.dl");
    if (rw.sensing.size() != p.num_targets || rw.ul.size() != p.num_ul || rw.dl.size() != p.num_dl) {
      config_fail("weights", "counts must match num_targets, num_ul and num_dl");
    }
    for (const auto* ws : {&rw.sensing, &rw.ul, &rw.dl}) {
      for (double v : *ws) {
        if (!(v >= 0.0) || !std::isfinite(v)) config_fail("weights", "must be nonnegative and finite");
      }
    }
    if (std::abs(rw.sum() - 1.0) > 1e-9) config_fail("weights", "must sum to 1");
    p.weights = rw;
  }

  s.gamma = count(d, "gamma", "");
  if (s.gamma == 0) config_fail("gamma", "must be at least 1");
  if (!d["seeds"].is_array()) config_fail("seeds", "expected a list of nonnegative integers");
  for (const auto& e : d["seeds"]) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 0) config_fail("seeds", "expected nonnegative integers");
    s.seeds.push_back(e.get<std::uint64_t>());
  }

  const json& so = d["solver"];
  const std::string sp = "solver.";
  AoOptions& ao = s.rp.ao;
  ao.max_iterations = count(so, "ao_max_iterations", sp);
  ao.tolerance = num(so, "ao_tolerance", sp);
  ao.sca.max_rounds = count(so, "sca_max_rounds", sp);
  ao.sca.tolerance = num(so, "sca_tolerance", sp);
  ao.sca.max_ascent_steps = count(so, "max_ascent_steps", sp);
  ao.sca.initial_step = num(so, "initial_step", sp);
  ao.sca.shrink = num(so, "shrink", sp);
  ao.sca.armijo_slope = num(so, "armijo_slope", sp);
  ao.sca.max_backtracks = count(so, "max_backtracks", sp);
  ao.sca.pg_tolerance = num(so, "pg_tolerance", sp);
  ao.sca.ascent_floor = num(so, "ascent_floor", sp);
  if (!so["spectral_steps"].is_boolean()) config_fail("solver.spectral_steps", "expected true or false");
  ao.sca.spectral_steps = so["spectral_steps"].get<bool>();
  s.rp.layout_attempts = count(so, "layout_attempts", sp);
  if (ao.max_iterations == 0) config_fail("solver.ao_max_iterations", "must be at least 1");
  if (ao.sca.max_rounds == 0) config_fail("solver.sca_max_rounds", "must be at least 1");
  if (!(ao.sca.initial_step > 0.0)) config_fail("solver.initial_step", "must be positive");
  if (!(ao.sca.shrink > 0.0 && ao.sca.shrink < 1.0)) config_fail("solver.shrink", "must lie in (0, 1)");
  if (!(ao.sca.armijo_slope > 0.0 && ao.sca.armijo_slope < 1.0)) config_fail("solver.armijo_slope", "must lie in (0, 1)");
  if (s.rp.layout_attempts == 0) config_fail("solver.layout_attempts", "must be at least 1");

  const json& sw = d["sweep"];
  s.sweep.sides_wavelengths = numbers(sw["region_side_wavelengths"], "sweep.region_side_wavelengths");
  for (double a : s.sweep.sides_wavelengths) {
    if (!(a > 0.0)) config_fail("sweep.region_side_wavelengths", "entries must be positive");
  }
  if (!sw["schemes"].is_array()) config_fail("sweep.schemes", "expected a list of MA, FPAF, FPAH");
  for (const auto& e : sw["schemes"]) {
    if (!e.is_string()) config_fail("sweep.schemes", "expected a list of MA, FPAF, FPAH");
    try {
      s.sweep.schemes.push_back(parse_scheme(e.get<std::string>()));
    } catch (const Error& err) {
      config_fail("sweep.schemes", err.what());
    }
  }

  const json& am = d["apm"]["methods"];
  if (!am.is_array()) config_fail("apm.methods", "expected a list");
  for (const auto& e : am) {
    const std::string m = e.is_string() ? e.get<std::string>() : "";
    if (m == "greedy") s.apm_methods.push_back(MatchMethod::kGreedy);
    else if (m == "identity") s.apm_methods.push_back(MatchMethod::kIdentity);
    else if (m == "exhaustive") s.apm_methods.push_back(MatchMethod::kExhaustive);
    else if (m == "optimal") s.apm_methods.push_back(MatchMethod::kOptimal);
    else config_fail("apm.methods", "entries must be greedy, identity, exhaustive or optimal");
  }

  const json& bp = d["beampattern"];
  const std::string layout = bp["layout"].is_string() ? bp["layout"].get<std::string>() : "";
  if (layout == "fpaf") s.beam.layout = BeamLayout::kFpaf;
  else if (layout == "fpah") s.beam.layout = BeamLayout::kFpah;
  else if (layout == "random") s.beam.layout = BeamLayout::kRandom;
  else if (layout == "optimized") s.beam.layout = BeamLayout::kOptimized;
  else config_fail("beampattern.layout", "must be fpaf, fpah, random or optimized");
  s.beam.num_antennas = count(bp, "num_antennas", "beampattern.");
  if (s.beam.num_antennas == 0) config_fail("beampattern.num_antennas", "must be at least 1");
  if (bp["focus"].is_string()) {
    if (bp["focus"].get<std::string>() != "nodes") config_fail("beampattern.focus", "expected \"nodes\" or a list of points");
  } else if (bp["focus"].is_array() && !bp["focus"].empty()) {
    std::vector<Position3> pts;
    for (std::size_t i = 0; i < bp["focus"].size(); ++i) {
      pts.push_back(position(bp["focus"][i], "beampattern.focus[" + std::to_string(i) + "]"));
    }
    s.beam.focus = pts;
  } else {
    config_fail("beampattern.focus", "expected \"nodes\" or a nonempty list of points");
  }
  const json& g = bp["grid"];
  const std::string gp = "beampattern.grid.";
  const std::string kind = g["kind"].is_string() ? g["kind"].get<std::string>() : "";
  if (kind == "rect") s.beam.grid.kind = GridKind::kRect;
  else if (kind == "polar") s.beam.grid.kind = GridKind::kPolar;
  else config_fail(gp + "kind", "must be rect or polar");
  s.beam.grid.a_min = num(g, "a_min", gp);
  s.beam.grid.a_max = num(g, "a_max", gp);
  s.beam.grid.na = count(g, "na", gp);
  s.beam.grid.b_min = num(g, "b_min", gp);
  s.beam.grid.b_max = num(g, "b_max", gp);
  s.beam.grid.nb = count(g, "nb", gp);
  s.beam.grid.z = num(g, "z", gp);
  if (!bp["binary"].is_boolean()) config_fail("beampattern.binary", "expected true or false");
  s.beam.binary = bp["binary"].get<bool>();
  return s;
}

/// Applies "dotted.key=value". The value is parsed as JSON, falling back to
/// a plain string, and must have the same JSON type as the default for
/// that key (integers for counts, numbers for reals).
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorKind::kConfig, "override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  const json ref = default_config();
  const json* ref_node = &ref;
  json* node = &doc;
  std::string part;
  std::stringstream ss(key);
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& k = parts[i];
    if (!ref_node->is_object() || !ref_node->contains(k)) detail::config_fail(key, "unknown override key");
    ref_node = &(*ref_node)[k];
    if (i + 1 < parts.size()) {
      if (!node->contains(k) || !(*node)[k].is_object()) (*node)[k] = json::object();
      node = &(*node)[k];
    }
  }
  const json& want = *ref_node;
  bool ok = true;
  if (want.is_number_integer()) ok = value.is_number_integer();
  else if (want.is_number()) ok = value.is_number();
  else if (want.is_boolean()) ok = value.is_boolean();
  else if (want.is_string()) ok = value.is_string();
  else if (want.is_array()) ok = value.is_array();
  else if (want.is_object()) ok = value.is_object();
  if (!ok) detail::config_fail(key, "override value '" + text + "' has the wrong type (expected " + want.type_name() + ")");
  (*node)[parts.back()] = value;
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot read configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false, true);
  if (doc.is_discarded()) fail(ErrorKind::kConfig, "'" + path + "' is not valid JSON");
  return doc;
}

}  // namespace maisac
