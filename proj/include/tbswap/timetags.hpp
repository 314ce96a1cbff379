#pragma once

// Headless stand-in for the time-to-digital converter: per-gate click
// assignments are drawn from the detection model and turned into tag
// streams, which are then reduced by windowed coincidence logic.

#include "tbswap/detection.hpp"
#include "tbswap/experiments.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tbswap {

// Counter-based generator: the value at (key, counter) is a fixed hash, so
// any block of draws can be regenerated without the ones before it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  // Uniform in (0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

struct TimeTagStream {
  std::string channel;
  std::vector<std::int64_t> tags;  // ps from run start, strictly increasing
  std::int64_t period_ps = 5000;
  std::int64_t duration_ps = 0;
};

struct TagSimConfig {
  double duration_s = 1.0;
  double clock_hz = 2e8;
  std::uint64_t seed = 0;
  double jitter_ps = 0.0;
  std::int64_t origin_ps = 1000;
  int workers = 1;
};

inline constexpr std::int64_t kTagBlockCycles = std::int64_t{1} << 20;

class TagSimulator {
 public:
  TagSimulator(const CircuitModel& circuit, const TagSimConfig& config);
  // From an explicit outcome distribution; timing maps detector -> channel.
  TagSimulator(PatternDistribution distribution, std::map<std::string, TagTiming> timing,
               const TagSimConfig& config);

  std::int64_t total_cycles() const { return total_cycles_; }
  std::int64_t period_ps() const { return period_ps_; }
  const std::vector<std::string>& channels() const { return channels_; }
  const PatternDistribution& distribution() const { return distribution_; }
  double nonempty_probability() const { return p_nonempty_; }

  // Tags from gates [begin, end); the result does not depend on how a run
  // is split into ranges.
  std::vector<TimeTagStream> simulate(std::int64_t begin_cycle, std::int64_t end_cycle) const;
  std::vector<TimeTagStream> simulate_all() const { return simulate(0, total_cycles_); }

 private:
  void init();
  void simulate_block(std::int64_t block, std::int64_t begin, std::int64_t end,
                      std::vector<std::vector<std::int64_t>>& out) const;

  PatternDistribution distribution_;
  std::map<std::string, TagTiming> timing_;
  TagSimConfig config_;
  std::int64_t period_ps_ = 5000;
  std::int64_t total_cycles_ = 0;
  double p_nonempty_ = 0.0;
  double log_empty_ = 0.0;
  std::vector<double> cdf_;           // over non-empty masks 1..2^k-1
  std::vector<std::string> channels_;
  std::vector<int> det_channel_;      // detector index -> channel index
  std::vector<std::int64_t> det_offset_;
};

std::vector<TimeTagStream> simulate_timetags(const CircuitModel& circuit, const TagSimConfig& config);

struct CoincidenceWindow {
  std::string channel;
  std::int64_t center_ps = 0;  // offset within the gate
  std::int64_t width_ps = 0;
};

struct MultiplexInput {
  std::string channel;
  std::int64_t delay_ps = 0;
};

struct WindowPattern {
  std::vector<std::string> must_click;
  std::vector<std::string> must_not_click;
};

struct CoincidenceConfig {
  std::int64_t period_ps = 5000;
  std::map<std::string, CoincidenceWindow> windows;
  // Virtual channels formed by electronically combining inputs with delays.
  std::map<std::string, std::vector<MultiplexInput>> multiplex;
  std::map<std::string, WindowPattern> patterns;

  void validate() const;
};

// One window per detector centred on its bin, and the circuit's patterns.
CoincidenceConfig default_coincidence_config(const CircuitModel& circuit, std::int64_t width_ps = 200,
                                             std::int64_t origin_ps = 1000, std::int64_t period_ps = 5000);

struct CountResult {
  std::int64_t counts = 0;
  double sigma = 0.0;
};

CountResult count_coincidences(std::span<const TimeTagStream> streams, const CoincidenceConfig& config,
                               const WindowPattern& pattern);
std::map<std::string, CountResult> count_all(std::span<const TimeTagStream> streams,
                                             const CoincidenceConfig& config);

// Simulates gate-aligned chunks and counts each one before discarding its
// tags, for acquisitions too long to keep in memory. Equal to count_all on
// the full run whenever windows and delays keep tags inside their gate.
std::map<std::string, CountResult> simulate_and_count(const TagSimulator& sim, const CoincidenceConfig& config,
                                                      std::int64_t chunk_cycles = 64 * kTagBlockCycles);

// Tags as CSV rows (detector, tag_ps), ordered by time.
std::string tags_to_csv(std::span<const TimeTagStream> streams);
std::vector<TimeTagStream> tags_from_csv(const std::string& text, std::int64_t period_ps = 5000);

}  // namespace tbswap
