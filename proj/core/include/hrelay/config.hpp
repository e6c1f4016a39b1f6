#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hrelay/model.hpp"

namespace hrelay {

// JSON configuration with unit-suffixed keys, e.g. "source_power_dbm": 20 or
// "interferer_density_per_km2": 2000. Every field of SystemConfig must be
// present exactly once. Repulsion fields take a number in [-1, 0) or "ppp".
//
// Accepted suffixes:
//   densities           _per_m2 _per_km2
//   powers              _w _mw _dbm
//   noises              _w _dbm, or _dbm_per_hz together with <field>_band_hz
//   energies            _j _mj _uj
//   thresholds          _db _linear
//   slot_duration       _s _ms
//   capacities          _bps _kbps       bandwidth  _hz _khz _mhz
//   distances           _m _km
//   dimensionless       no suffix
//
// All problems (unknown keys, missing fields, bad units, invariant
// violations) are collected and thrown together as ConfigError.
SystemConfig load_config(const std::string& path, const std::map<std::string, double>& overrides = {});
SystemConfig parse_config(const std::string& json_text, const std::map<std::string, double>& overrides = {});

// Keys accepted by the loader, e.g. for validating --sweep field names.
std::vector<std::string> config_keys();

// Canonical SI form: a loadable JSON document with _w, _j, _per_m2, _linear
// and _m suffixes, keys sorted, numbers printed with round-trip precision.
std::string config_to_json(const SystemConfig& cfg);

// FNV-1a 64 as 16 hex digits.
std::string fnv1a_hex(const std::string& text);
// Hash of the compact canonical form.
std::string config_hash(const SystemConfig& cfg);

const char* library_version();

struct RunManifest {
  std::string command;
  SystemConfig cfg;
  std::map<std::string, std::string> options;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  double wall_clock_s = 0.0;
};

// Identifies the run: hash over everything except the wall-clock time.
std::string manifest_hash(const RunManifest& m);
std::string manifest_to_json(const RunManifest& m);

}  // namespace hrelay
