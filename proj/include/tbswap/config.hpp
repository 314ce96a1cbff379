#pragma once

// Versioned JSON run configuration. Every object is checked against its key
// set and unknown keys are rejected.

#include "tbswap/experiments.hpp"
#include "tbswap/sweep.hpp"
#include "tbswap/timetags.hpp"

#include <optional>
#include <string>

#include "json.hpp"

namespace tbswap {

inline constexpr int kConfigSchemaVersion = 1;

struct QkdSettings {
  double kappa = 1.22;
  double e_t = 0.011;
  double sigma_e_t = 0.0;
  std::optional<double> e_p;
  double sigma_e_p = 0.0;
};

struct MeasuredVisibility {
  std::string kind = "SWAP";
  double value = 0.0;
  double sigma = 0.0;
};

struct PairSettings {
  double mu = 0.01;
  double eta_signal = 1.0;
  double eta_idler = 1.0;
};

struct DipSettings {
  double sigma_ps = 25.0;
  double start_ps = -100.0;
  double stop_ps = 100.0;
  int points = 41;
};

struct RunConfig {
  std::optional<CircuitKind> circuit;
  SourceParams source;
  InterferenceParams interference;
  std::optional<SweepSpec> sweep;
  QkdSettings qkd;
  std::optional<MeasuredVisibility> measured;
  TagSimConfig simulation;
  std::optional<CoincidenceConfig> coincidence;
  PairSettings pair;
  DipSettings dip;
  std::uint64_t seed = 0;
  int workers = 1;
  nlohmann::json raw = nlohmann::json::object();
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

CircuitKind circuit_kind_from_string(const std::string& s);
SourceParams source_preset(const std::string& name);

}  // namespace tbswap
