#include "hrelay/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hrelay/errors.hpp"
#include "json.hpp"

#ifndef HRELAY_VERSION
#define HRELAY_VERSION "unknown"
#endif

namespace hrelay {

namespace {

using nlohmann::json;

enum class Kind { Density, Power, Noise, Energy, Threshold, Duration, Rate, Bandwidth, Distance, Plain, Repulsion, Count };

struct Field {
  const char* name;
  Kind kind;
  double SystemConfig::*value = nullptr;
  Repulsion SystemConfig::*rep = nullptr;
  int SystemConfig::*count = nullptr;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"emitter_density", Kind::Density, &SystemConfig::emitter_density},
      {"interferer_density", Kind::Density, &SystemConfig::interferer_density},
      {"emitter_repulsion", Kind::Repulsion, nullptr, &SystemConfig::emitter_repulsion},
      {"interferer_repulsion", Kind::Repulsion, nullptr, &SystemConfig::interferer_repulsion},
      {"emitter_power", Kind::Power, &SystemConfig::emitter_power},
      {"interferer_power", Kind::Power, &SystemConfig::interferer_power},
      {"source_power", Kind::Power, &SystemConfig::source_power},
      {"pathloss_ambient", Kind::Plain, &SystemConfig::pathloss_ambient},
      {"pathloss_active", Kind::Plain, &SystemConfig::pathloss_active},
      {"noise_ambient", Kind::Noise, &SystemConfig::noise_ambient},
      {"noise_active", Kind::Noise, &SystemConfig::noise_active},
      {"conversion_efficiency", Kind::Plain, &SystemConfig::conversion_efficiency},
      {"reflection_fraction", Kind::Plain, &SystemConfig::reflection_fraction},
      {"backscatter_efficiency", Kind::Plain, &SystemConfig::backscatter_efficiency},
      {"harvest_fraction", Kind::Plain, &SystemConfig::harvest_fraction},
      {"slot_duration", Kind::Duration, &SystemConfig::slot_duration},
      {"capacitor_energy", Kind::Energy, &SystemConfig::capacitor_energy},
      {"wpr_circuit_energy", Kind::Energy, &SystemConfig::wpr_circuit_energy},
      {"abr_circuit_energy", Kind::Energy, &SystemConfig::abr_circuit_energy},
      {"sinr_threshold_active", Kind::Threshold, &SystemConfig::sinr_threshold_active},
      {"snr_threshold_backscatter", Kind::Threshold, &SystemConfig::snr_threshold_backscatter},
      {"backscatter_capacity", Kind::Rate, &SystemConfig::backscatter_capacity},
      {"bandwidth_active", Kind::Bandwidth, &SystemConfig::bandwidth_active},
      {"d_sr", Kind::Distance, &SystemConfig::d_sr},
      {"d_rd", Kind::Distance, &SystemConfig::d_rd},
      {"window_radius", Kind::Distance, &SystemConfig::window_radius},
      {"etcp_exploration", Kind::Count, nullptr, nullptr, &SystemConfig::etcp_exploration},
  };
  return f;
}

double dbm_to_w(double x) { return std::pow(10.0, (x - 30.0) / 10.0); }
double db_to_linear(double x) { return std::pow(10.0, x / 10.0); }

// Linear suffixes as (suffix, factor to SI). Logarithmic ones are handled in from_json().
std::vector<std::pair<std::string, double>> linear_suffixes(Kind k) {
  switch (k) {
    case Kind::Density: return {{"_per_m2", 1.0}, {"_per_km2", 1e-6}};
    case Kind::Power: return {{"_w", 1.0}, {"_mw", 1e-3}};
    case Kind::Noise: return {{"_w", 1.0}};
    case Kind::Energy: return {{"_j", 1.0}, {"_mj", 1e-3}, {"_uj", 1e-6}};
    case Kind::Threshold: return {{"_linear", 1.0}};
    case Kind::Duration: return {{"_s", 1.0}, {"_ms", 1e-3}};
    case Kind::Rate: return {{"_bps", 1.0}, {"_kbps", 1e3}};
    case Kind::Bandwidth: return {{"_hz", 1.0}, {"_khz", 1e3}, {"_mhz", 1e6}};
    case Kind::Distance: return {{"_m", 1.0}, {"_km", 1e3}};
    default: return {{"", 1.0}};
  }
}

std::vector<std::string> suffixes(Kind k) {
  std::vector<std::string> out;
  for (const auto& [s, f] : linear_suffixes(k)) out.push_back(s);
  if (k == Kind::Power || k == Kind::Noise) out.push_back("_dbm");
  if (k == Kind::Noise) {
    out.push_back("_dbm_per_hz");
    out.push_back("_band_hz");
  }
  if (k == Kind::Threshold) out.push_back("_db");
  return out;
}

// Splits a key into its field and suffix; returns nullptr for unknown keys.
const Field* match(const std::string& key, std::string& suffix) {
  for (const auto& f : fields()) {
    const std::string name = f.name;
    if (key.compare(0, name.size(), name) != 0) continue;
    const std::string rest = key.substr(name.size());
    for (const auto& s : suffixes(f.kind)) {
      if (s == rest) {
        suffix = rest;
        return &f;
      }
    }
  }
  return nullptr;
}

std::string expected(const Field& f) {
  std::string out;
  for (const auto& s : suffixes(f.kind)) {
    if (s == "_band_hz") continue;
    if (!out.empty()) out += ", ";
    out += std::string(f.name) + s;
  }
  return out;
}

json read_json(const std::string& text, std::vector<std::string>& problems) {
  try {
    auto doc = json::parse(text);
    if (!doc.is_object()) problems.push_back("configuration root must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    problems.push_back(std::string("malformed JSON: ") + e.what());
    return json::object();
  }
}

void apply_overrides(json& doc, const std::map<std::string, double>& overrides, std::vector<std::string>& problems) {
  for (const auto& [key, value] : overrides) {
    std::string suffix;
    const Field* f = match(key, suffix);
    if (!f) {
      problems.push_back("override names unknown key '" + key + "'");
      continue;
    }
    // Drop other spellings of the same field so the override wins.
    if (suffix != "_band_hz") {
      for (auto it = doc.begin(); it != doc.end();) {
        std::string s;
        const Field* g = match(it.key(), s);
        const bool keep_band = s == "_band_hz" && suffix == "_dbm_per_hz";
        if (g == f && it.key() != key && !keep_band)
          it = doc.erase(it);
        else
          ++it;
      }
    }
    doc[key] = value;
  }
}

SystemConfig from_json(const json& doc, std::vector<std::string>& problems) {
  SystemConfig cfg;
  std::map<const Field*, std::vector<std::pair<std::string, const json*>>> seen;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "description") continue;
    std::string suffix;
    const Field* f = match(it.key(), suffix);
    if (!f) {
      problems.push_back("unknown key '" + it.key() + "'");
      continue;
    }
    seen[f].emplace_back(suffix, &it.value());
  }
  for (const auto& f : fields()) {
    auto found = seen.find(&f);
    if (found == seen.end()) {
      problems.push_back(std::string("missing field '") + f.name + "' (expected one of " + expected(f) + ")");
      continue;
    }
    auto entries = found->second;
    const json* band = nullptr;
    std::erase_if(entries, [&](const auto& e) {
      if (e.first != "_band_hz") return false;
      band = e.second;
      return true;
    });
    if (entries.size() != 1) {
      problems.push_back(std::string("field '") + f.name + "' given " + std::to_string(entries.size()) +
                         " times (expected one of " + expected(f) + ")");
      continue;
    }
    const auto& [suffix, node] = entries.front();
    const std::string key = std::string(f.name) + suffix;
    if (f.kind == Kind::Repulsion) {
      if (node->is_string() && node->get<std::string>() == "ppp") {
        cfg.*f.rep = Repulsion::poisson();
      } else if (node->is_number()) {
        cfg.*f.rep = Repulsion::ginibre(node->get<double>());
      } else {
        problems.push_back("'" + key + "' must be a number in [-1, 0) or \"ppp\"");
      }
      continue;
    }
    if (!node->is_number()) {
      problems.push_back("'" + key + "' must be a number");
      continue;
    }
    const double x = node->get<double>();
    if (f.kind == Kind::Count) {
      if (x != std::floor(x)) problems.push_back("'" + key + "' must be an integer");
      cfg.*f.count = static_cast<int>(x);
      continue;
    }
    double si = x;
    if (suffix == "_dbm") {
      si = dbm_to_w(x);
    } else if (suffix == "_db") {
      si = db_to_linear(x);
    } else if (suffix == "_dbm_per_hz") {
      const std::string band_key = std::string(f.name) + "_band_hz";
      if (!band || !band->is_number()) {
        problems.push_back("'" + key + "' requires a numeric '" + band_key + "'");
        continue;
      }
      si = dbm_to_w(x) * band->get<double>();
    } else {
      for (const auto& [s, factor] : linear_suffixes(f.kind))
        if (s == suffix) si = x * factor;
    }
    if (band && suffix != "_dbm_per_hz")
      problems.push_back(std::string("'") + f.name + "_band_hz' is only meaningful with '" + f.name + "_dbm_per_hz'");
    if (!std::isfinite(si)) {
      problems.push_back("'" + key + "' is not finite after unit conversion");
      continue;
    }
    cfg.*f.value = si;
  }
  return cfg;
}

SystemConfig finish(const std::string& text, const std::map<std::string, double>& overrides) {
  std::vector<std::string> problems;
  json doc = read_json(text, problems);
  if (!problems.empty()) throw ConfigError(problems);
  apply_overrides(doc, overrides, problems);
  SystemConfig cfg = from_json(doc, problems);
  // Invariant messages about fields that already failed to load would only
  // describe the built-in default, so they are dropped.
  for (auto& v : validate(cfg)) {
    const bool stale = std::any_of(problems.begin(), problems.end(), [&](const std::string& p) {
      for (const auto& f : fields()) {
        const std::string name = f.name;
        if (p.find("'" + name) != std::string::npos && v.find(name) != std::string::npos) return true;
      }
      return false;
    });
    if (!stale) problems.push_back(std::move(v));
  }
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

const char* canonical_suffix(Kind k) {
  switch (k) {
    case Kind::Density: return "_per_m2";
    case Kind::Power:
    case Kind::Noise: return "_w";
    case Kind::Energy: return "_j";
    case Kind::Threshold: return "_linear";
    case Kind::Duration: return "_s";
    case Kind::Rate: return "_bps";
    case Kind::Bandwidth: return "_hz";
    case Kind::Distance: return "_m";
    default: return "";
  }
}

json canonical(const SystemConfig& cfg) {
  json out = json::object();
  for (const auto& f : fields()) {
    const std::string key = std::string(f.name) + canonical_suffix(f.kind);
    if (f.kind == Kind::Repulsion) {
      const Repulsion r = cfg.*f.rep;
      out[key] = r.is_ppp() ? json("ppp") : json(r.alpha);
    } else if (f.kind == Kind::Count) {
      out[key] = cfg.*f.count;
    } else {
      out[key] = cfg.*f.value;
    }
  }
  return out;
}

}  // namespace

SystemConfig load_config(const std::string& path, const std::map<std::string, double>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return finish(ss.str(), overrides);
}

SystemConfig parse_config(const std::string& json_text, const std::map<std::string, double>& overrides) {
  return finish(json_text, overrides);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields())
    for (const auto& s : suffixes(f.kind)) out.push_back(std::string(f.name) + s);
  return out;
}

std::string config_to_json(const SystemConfig& cfg) { return canonical(cfg).dump(2); }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const SystemConfig& cfg) { return fnv1a_hex(canonical(cfg).dump()); }

const char* library_version() { return HRELAY_VERSION; }

namespace {

json manifest_body(const RunManifest& m) {
  json out;
  out["command"] = m.command;
  out["config"] = canonical(m.cfg);
  out["config_hash"] = config_hash(m.cfg);
  out["options"] = m.options;
  out["outputs"] = m.outputs;
  out["seed"] = m.seed;
  out["engine_version"] = library_version();
  return out;
}

}  // namespace

std::string manifest_hash(const RunManifest& m) { return fnv1a_hex(manifest_body(m).dump()); }

std::string manifest_to_json(const RunManifest& m) {
  json out = manifest_body(m);
  out["manifest_hash"] = manifest_hash(m);
  out["wall_clock_s"] = m.wall_clock_s;
  return out.dump(2);
}

}  // namespace hrelay
