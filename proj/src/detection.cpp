#include "tbswap/detection.hpp"

#include "tbswap/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>

namespace tbswap {

namespace {

constexpr double kNegativeTolerance = 1e-10;

double clamp_probability(double p) {
  if (!std::isfinite(p)) throw NumericalError("non-finite pattern probability");
  if (p < -kNegativeTolerance) {
    throw NumericalError("pattern probability " + std::to_string(p) + " is negative beyond tolerance");
  }
  if (p > 1.0 + kNegativeTolerance) {
    throw NumericalError("pattern probability " + std::to_string(p) + " exceeds one beyond tolerance");
  }
  return std::clamp(p, 0.0, 1.0);
}

long double log_no_click_of(const GaussianState& state, std::span<const DetectorSpec> detectors) {
  std::vector<int> modes;
  long double log_dark = 0.0L;
  for (const auto& d : detectors) {
    modes.insert(modes.end(), d.modes.begin(), d.modes.end());
    log_dark += std::log1p(-static_cast<long double>(d.dark_count_prob));
  }
  std::vector<int> sorted = modes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("detectors share output modes");
  }
  return log_dark + log_vacuum_probability_extended(state, modes);
}

}  // namespace

DetectorRegistry::DetectorRegistry(std::vector<DetectorSpec> detectors) : detectors_(std::move(detectors)) {
  if (detectors_.size() > 32) throw CapacityError("at most 32 detectors per registry");
  std::set<std::string> names;
  std::set<int> modes;
  for (auto& d : detectors_) {
    if (d.name.empty()) throw ConfigError("detector without a name");
    if (!names.insert(d.name).second) throw ConfigError("duplicate detector name " + d.name);
    if (d.modes.empty()) throw ConfigError("detector " + d.name + " owns no modes");
    if (!(d.dark_count_prob >= 0.0 && d.dark_count_prob < 1.0)) {
      throw ConfigError("dark-count probability of " + d.name + " must lie in [0, 1)");
    }
    for (int m : d.modes) {
      if (m < 0) throw ConfigError("negative mode index in detector " + d.name);
      if (!modes.insert(m).second) throw ConfigError("detector " + d.name + " overlaps another detector");
    }
  }
}

int DetectorRegistry::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < detectors_.size(); ++i) {
    if (detectors_[i].name == name) return static_cast<int>(i);
  }
  throw ConfigError("unknown detector " + name);
}

bool DetectorRegistry::contains(const std::string& name) const {
  return std::any_of(detectors_.begin(), detectors_.end(), [&](const auto& d) { return d.name == name; });
}

void DetectorRegistry::check_modes(int num_modes) const {
  for (const auto& d : detectors_) {
    for (int m : d.modes) {
      if (m >= num_modes) throw ConfigError("detector " + d.name + " refers to a mode outside the state");
    }
  }
}

DetectorRegistry DetectorRegistry::with_dark_counts(const std::map<std::string, double>& nu) const {
  std::vector<DetectorSpec> out = detectors_;
  for (const auto& [name, value] : nu) {
    out.at(index_of(name)).dark_count_prob = value;
  }
  return DetectorRegistry(std::move(out));
}

double no_click_probability(const GaussianState& state, std::span<const DetectorSpec> detectors) {
  return std::exp(log_no_click_of(state, detectors));
}

double no_click_probability(const GaussianState& state, const DetectorRegistry& registry,
                            DetectorMask detectors) {
  std::vector<DetectorSpec> chosen;
  for (int i = 0; i < registry.size(); ++i) {
    if (detectors & (DetectorMask{1} << i)) chosen.push_back(registry[i]);
  }
  return no_click_probability(state, chosen);
}

PatternEvaluator::PatternEvaluator(const GaussianState& state, const DetectorRegistry& registry)
    : state_(state), registry_(registry) {
  registry_.check_modes(state_.num_modes());
}

long double PatternEvaluator::log_no_click(DetectorMask mask) {
  if (mask == 0) return 0.0L;
  auto it = cache_.find(mask);
  if (it != cache_.end()) return it->second;
  std::vector<DetectorSpec> chosen;
  for (int i = 0; i < registry_.size(); ++i) {
    if (mask & (DetectorMask{1} << i)) chosen.push_back(registry_[i]);
  }
  const long double v = log_no_click_of(state_, chosen);
  cache_.emplace(mask, v);
  return v;
}

DetectorMask PatternEvaluator::mask_of(const std::vector<std::string>& names) const {
  DetectorMask m = 0;
  for (const auto& n : names) {
    const DetectorMask bit = DetectorMask{1} << registry_.index_of(n);
    if (m & bit) throw ConfigError("detector " + n + " listed twice in a pattern");
    m |= bit;
  }
  return m;
}

double PatternEvaluator::probability(const ClickPattern& pattern) {
  return probability(mask_of(pattern.must_click), mask_of(pattern.must_not_click));
}

double PatternEvaluator::probability(DetectorMask must_click, DetectorMask must_not_click) {
  if (must_click & must_not_click) throw ConfigError("a detector cannot both click and not click");
  if (must_click == 0) return clamp_probability(static_cast<double>(std::exp(log_no_click(must_not_click))));
  // Sum over T subset of must_click of (-1)^|T| exp(L(T u N)). The signs sum
  // to zero, so the terms are accumulated as expm1 to avoid cancelling ones.
  long double sum = 0.0L;
  DetectorMask t = 0;
  do {
    const long double term = std::expm1(log_no_click(t | must_not_click));
    sum += (std::popcount(t) % 2 == 0) ? term : -term;
    t = (t - must_click) & must_click;
  } while (t != 0);
  return clamp_probability(static_cast<double>(sum));
}

double click_pattern_probability(const GaussianState& state, const DetectorRegistry& registry,
                                 const ClickPattern& pattern) {
  PatternEvaluator eval(state, registry);
  return eval.probability(pattern);
}

double PatternDistribution::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

PatternDistribution pattern_distribution(const GaussianState& state, const DetectorRegistry& registry) {
  const int k = registry.size();
  if (k > kMaxDistributionDetectors) {
    throw CapacityError("pattern_distribution supports at most " +
                        std::to_string(kMaxDistributionDetectors) + " detectors, got " + std::to_string(k));
  }
  PatternEvaluator eval(state, registry);
  PatternDistribution out;
  for (const auto& d : registry.detectors()) out.detectors.push_back(d.name);
  const DetectorMask full = (DetectorMask{1} << k) - 1;
  out.probabilities.resize(std::size_t{1} << k);
  for (DetectorMask clicked = 0; clicked <= full; ++clicked) {
    out.probabilities[clicked] = eval.probability(clicked, full & ~clicked);
  }
  return out;
}

}  // namespace tbswap
