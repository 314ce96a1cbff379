#pragma once

// Threshold (click / no-click) detection on Gaussian states.
//
// A detector owns a set of modes and clicks unless all of them are empty.
// Dark counts enter through |0><0| -> (1 - nu)|0><0|.

#include "tbswap/gaussian.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tbswap {

struct DetectorSpec {
  std::string name;
  std::vector<int> modes;
  double dark_count_prob = 0.0;
};

// Detectors with disjoint, non-empty mode sets and unique names.
class DetectorRegistry {
 public:
  DetectorRegistry() = default;
  explicit DetectorRegistry(std::vector<DetectorSpec> detectors);

  int size() const { return static_cast<int>(detectors_.size()); }
  const std::vector<DetectorSpec>& detectors() const { return detectors_; }
  const DetectorSpec& operator[](int i) const { return detectors_.at(i); }
  int index_of(const std::string& name) const;
  bool contains(const std::string& name) const;
  // Throws unless every mode index is below num_modes.
  void check_modes(int num_modes) const;

  DetectorRegistry with_dark_counts(const std::map<std::string, double>& nu) const;

 private:
  std::vector<DetectorSpec> detectors_;
};

// Detectors not listed in either set are left unconditioned.
struct ClickPattern {
  std::vector<std::string> must_click;
  std::vector<std::string> must_not_click;
};

// Bit i of the mask refers to detector i of the registry.
using DetectorMask = std::uint32_t;

double no_click_probability(const GaussianState& state, std::span<const DetectorSpec> detectors);
double no_click_probability(const GaussianState& state, const DetectorRegistry& registry,
                            DetectorMask detectors);

double click_pattern_probability(const GaussianState& state, const DetectorRegistry& registry,
                                 const ClickPattern& pattern);

// Evaluates many patterns on one state, caching the vacuum term of each
// detector subset so that repeated inclusion-exclusion terms are shared.
class PatternEvaluator {
 public:
  PatternEvaluator(const GaussianState& state, const DetectorRegistry& registry);

  double probability(const ClickPattern& pattern);
  double probability(DetectorMask must_click, DetectorMask must_not_click);
  // log of the no-click probability of the detectors in mask.
  long double log_no_click(DetectorMask mask);

  const DetectorRegistry& registry() const { return registry_; }

 private:
  DetectorMask mask_of(const std::vector<std::string>& names) const;

  const GaussianState& state_;
  const DetectorRegistry& registry_;
  std::map<DetectorMask, long double> cache_;
};

struct PatternDistribution {
  std::vector<std::string> detectors;
  // probabilities[mask] is the chance that exactly the detectors in mask click.
  std::vector<double> probabilities;

  double total() const;
};

inline constexpr int kMaxDistributionDetectors = 10;

PatternDistribution pattern_distribution(const GaussianState& state, const DetectorRegistry& registry);

}  // namespace tbswap
