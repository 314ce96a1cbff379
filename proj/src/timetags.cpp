#include "tbswap/timetags.hpp"

#include "tbswap/csv.hpp"
#include "tbswap/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>

namespace tbswap {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ull))) {}

std::uint64_t CounterRng::next() { return mix64(key_ ^ mix64(counter_++)); }

double CounterRng::uniform() {
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(next() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double CounterRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

TagSimulator::TagSimulator(const CircuitModel& circuit, const TagSimConfig& config)
    : distribution_(pattern_distribution(evaluate(circuit), circuit.detectors)),
      timing_(circuit.timing),
      config_(config) {
  init();
}

TagSimulator::TagSimulator(PatternDistribution distribution, std::map<std::string, TagTiming> timing,
                           const TagSimConfig& config)
    : distribution_(std::move(distribution)), timing_(std::move(timing)), config_(config) {
  init();
}

void TagSimulator::init() {
  const int k = static_cast<int>(distribution_.detectors.size());
  if (k > kMaxDistributionDetectors) throw CapacityError("too many detectors for tag simulation");
  if (distribution_.probabilities.size() != (std::size_t{1} << k)) throw ShapeError("distribution size mismatch");
  if (!(config_.clock_hz > 0.0) || !(config_.duration_s >= 0.0)) throw ConfigError("clock and duration must be positive");
  if (!(config_.jitter_ps >= 0.0)) throw ConfigError("jitter must be >= 0");
  if (config_.workers < 1) throw ConfigError("workers must be >= 1");
  const double period = 1e12 / config_.clock_hz;
  period_ps_ = std::llround(period);
  if (std::abs(period - static_cast<double>(period_ps_)) > 1e-6 * period || period_ps_ <= 0) {
    throw ConfigError("clock period must be a whole number of picoseconds");
  }
  total_cycles_ = std::llround(config_.duration_s * config_.clock_hz);

  for (int d = 0; d < k; ++d) {
    const std::string& name = distribution_.detectors[d];
    auto it = timing_.find(name);
    const TagTiming t = it == timing_.end() ? TagTiming{name, 0} : it->second;
    const std::int64_t at = config_.origin_ps + t.offset_ps;
    if (at < 0 || at >= period_ps_) throw ConfigError("tag offset of " + name + " falls outside the gate");
    auto pos = std::find(channels_.begin(), channels_.end(), t.channel);
    if (pos == channels_.end()) {
      channels_.push_back(t.channel);
      pos = channels_.end() - 1;
    }
    det_channel_.push_back(static_cast<int>(pos - channels_.begin()));
    det_offset_.push_back(t.offset_ps);
  }

  double nonempty = 0.0;
  for (std::size_t m = 1; m < distribution_.probabilities.size(); ++m) {
    const double p = distribution_.probabilities[m];
    if (!(p >= 0.0)) throw NumericalError("negative outcome probability");
    nonempty += p;
  }
  p_nonempty_ = std::min(1.0, nonempty);
  log_empty_ = std::log1p(-p_nonempty_);
  cdf_.clear();
  double acc = 0.0;
  for (std::size_t m = 1; m < distribution_.probabilities.size(); ++m) {
    acc += distribution_.probabilities[m];
    cdf_.push_back(nonempty > 0.0 ? acc / nonempty : 0.0);
  }
  if (!cdf_.empty()) cdf_.back() = 1.0;
}

void TagSimulator::simulate_block(std::int64_t block, std::int64_t begin, std::int64_t end,
                                  std::vector<std::vector<std::int64_t>>& out) const {
  if (p_nonempty_ <= 0.0) return;
  CounterRng rng(config_.seed, static_cast<std::uint64_t>(block));
  const std::int64_t block_begin = block * kTagBlockCycles;
  const std::int64_t block_end = std::min(block_begin + kTagBlockCycles, total_cycles_);
  std::int64_t cycle = block_begin;
  while (true) {
    if (p_nonempty_ < 1.0) {
      // Number of empty gates before the next occupied one.
      const double g = std::floor(std::log(rng.uniform()) / log_empty_);
      if (g >= static_cast<double>(block_end - cycle)) break;
      cycle += static_cast<std::int64_t>(g);
    }
    if (cycle >= block_end) break;
    const double u = rng.uniform();
    const auto idx = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
    const auto mask = static_cast<DetectorMask>(std::min<std::size_t>(idx, cdf_.size() - 1) + 1);
    for (DetectorMask rest = mask; rest; rest &= rest - 1) {
      const int d = std::countr_zero(rest);
      double jitter = 0.0;
      if (config_.jitter_ps > 0.0) jitter = config_.jitter_ps * rng.normal();
      if (cycle < begin || cycle >= end) continue;
      const std::int64_t t =
          cycle * period_ps_ + config_.origin_ps + det_offset_[d] + std::llround(jitter);
      out[det_channel_[d]].push_back(t);
    }
    ++cycle;
  }
}

std::vector<TimeTagStream> TagSimulator::simulate(std::int64_t begin, std::int64_t end) const {
  begin = std::clamp<std::int64_t>(begin, 0, total_cycles_);
  end = std::clamp<std::int64_t>(end, begin, total_cycles_);
  const std::int64_t first = begin / kTagBlockCycles;
  const std::int64_t last = end == begin ? first : (end - 1) / kTagBlockCycles + 1;
  const std::int64_t nblocks = last - first;
  const int workers = static_cast<int>(std::min<std::int64_t>(config_.workers, std::max<std::int64_t>(nblocks, 1)));

  std::vector<std::vector<std::vector<std::int64_t>>> parts(
      static_cast<std::size_t>(nblocks), std::vector<std::vector<std::int64_t>>(channels_.size()));
  auto run = [&](int w) {
    for (std::int64_t b = w; b < nblocks; b += workers) simulate_block(first + b, begin, end, parts[b]);
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }

  std::vector<TimeTagStream> streams(channels_.size());
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    auto& s = streams[c];
    s.channel = channels_[c];
    s.period_ps = period_ps_;
    s.duration_ps = total_cycles_ * period_ps_;
    for (auto& p : parts) s.tags.insert(s.tags.end(), p[c].begin(), p[c].end());
    std::sort(s.tags.begin(), s.tags.end());
    // Coincident tags on one channel register once.
    s.tags.erase(std::unique(s.tags.begin(), s.tags.end()), s.tags.end());
    while (!s.tags.empty() && s.tags.front() < 0) s.tags.erase(s.tags.begin());
    while (!s.tags.empty() && s.tags.back() >= s.duration_ps) s.tags.pop_back();
  }
  return streams;
}

std::vector<TimeTagStream> simulate_timetags(const CircuitModel& circuit, const TagSimConfig& config) {
  return TagSimulator(circuit, config).simulate_all();
}

void CoincidenceConfig::validate() const {
  if (period_ps <= 0) throw ConfigError("coincidence period must be positive");
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> by_channel;
  for (const auto& [name, w] : windows) {
    if (w.channel.empty()) throw ConfigError("window " + name + " has no channel");
    if (w.width_ps <= 0) throw ConfigError("window " + name + " needs a positive width");
    const std::int64_t lo = w.center_ps - w.width_ps / 2;
    const std::int64_t hi = lo + w.width_ps;
    if (lo < 0 || hi > period_ps) throw ConfigError("window " + name + " extends beyond one clock period");
    by_channel[w.channel].emplace_back(lo, hi);
  }
  for (auto& [ch, spans] : by_channel) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first < spans[i - 1].second) throw ConfigError("overlapping windows on channel " + ch);
    }
  }
  for (const auto& [name, inputs] : multiplex) {
    if (inputs.empty()) throw ConfigError("multiplexed channel " + name + " has no inputs");
  }
  for (const auto& [name, p] : patterns) {
    if (p.must_click.empty()) throw ConfigError("pattern " + name + " needs at least one clicking window");
    std::set<std::string> seen;
    for (const auto* list : {&p.must_click, &p.must_not_click}) {
      for (const auto& w : *list) {
        if (!windows.count(w)) throw ConfigError("pattern " + name + " refers to unknown window " + w);
        if (!seen.insert(w).second) throw ConfigError("pattern " + name + " lists window " + w + " twice");
      }
    }
  }
}

CoincidenceConfig default_coincidence_config(const CircuitModel& circuit, std::int64_t width_ps,
                                             std::int64_t origin_ps, std::int64_t period_ps) {
  CoincidenceConfig cfg;
  cfg.period_ps = period_ps;
  for (const auto& d : circuit.detectors.detectors()) {
    auto it = circuit.timing.find(d.name);
    const TagTiming t = it == circuit.timing.end() ? TagTiming{d.name, 0} : it->second;
    cfg.windows[d.name] = {t.channel, origin_ps + t.offset_ps, width_ps};
  }
  for (const auto& [name, p] : circuit.patterns) cfg.patterns[name] = {p.must_click, p.must_not_click};
  cfg.validate();
  return cfg;
}

namespace {

using CycleList = std::vector<std::int64_t>;

struct ChannelIndex {
  std::map<std::string, const std::vector<std::int64_t>*> physical;
  std::map<std::string, std::vector<std::int64_t>> virtual_tags;

  const std::vector<std::int64_t>& get(const std::string& name) const {
    if (auto it = virtual_tags.find(name); it != virtual_tags.end()) return it->second;
    if (auto it = physical.find(name); it != physical.end()) return *it->second;
    static const std::vector<std::int64_t> empty;
    return empty;
  }
};

ChannelIndex index_streams(std::span<const TimeTagStream> streams, const CoincidenceConfig& cfg) {
  ChannelIndex idx;
  for (const auto& s : streams) {
    if (s.period_ps != cfg.period_ps) throw ConfigError("stream clock differs from the coincidence clock");
    if (!idx.physical.emplace(s.channel, &s.tags).second) throw ConfigError("duplicate stream " + s.channel);
  }
  for (const auto& [name, inputs] : cfg.multiplex) {
    std::vector<std::int64_t> merged;
    for (const auto& in : inputs) {
      auto it = idx.physical.find(in.channel);
      if (it == idx.physical.end()) continue;
      for (auto t : *it->second) merged.push_back(t + in.delay_ps);
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    idx.virtual_tags[name] = std::move(merged);
  }
  return idx;
}

CycleList window_cycles(const std::vector<std::int64_t>& tags, const CoincidenceWindow& w, std::int64_t period) {
  const std::int64_t lo = w.center_ps - w.width_ps / 2;
  const std::int64_t hi = lo + w.width_ps;
  CycleList out;
  for (auto t : tags) {
    const std::int64_t c = floor_div(t, period);
    const std::int64_t phase = t - c * period;
    if (phase >= lo && phase < hi && (out.empty() || out.back() != c)) out.push_back(c);
  }
  return out;
}

CountResult count_with(const ChannelIndex& idx, const CoincidenceConfig& cfg, const WindowPattern& p,
                       std::map<std::string, CycleList>& cache) {
  auto cycles = [&](const std::string& w) -> const CycleList& {
    auto it = cache.find(w);
    if (it != cache.end()) return it->second;
    const auto& win = cfg.windows.at(w);
    return cache.emplace(w, window_cycles(idx.get(win.channel), win, cfg.period_ps)).first->second;
  };
  if (p.must_click.empty()) throw ConfigError("pattern needs at least one clicking window");
  CycleList acc = cycles(p.must_click.front());
  for (std::size_t i = 1; i < p.must_click.size(); ++i) {
    const CycleList& other = cycles(p.must_click[i]);
    CycleList next;
    std::set_intersection(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(next));
    acc.swap(next);
  }
  for (const auto& w : p.must_not_click) {
    const CycleList& other = cycles(w);
    CycleList next;
    std::set_difference(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(next));
    acc.swap(next);
  }
  const auto n = static_cast<std::int64_t>(acc.size());
  return {n, std::sqrt(static_cast<double>(n))};
}

}  // namespace

CountResult count_coincidences(std::span<const TimeTagStream> streams, const CoincidenceConfig& config,
                               const WindowPattern& pattern) {
  config.validate();
  for (const auto* list : {&pattern.must_click, &pattern.must_not_click}) {
    for (const auto& w : *list) {
      if (!config.windows.count(w)) throw ConfigError("pattern refers to unknown window " + w);
    }
  }
  const ChannelIndex idx = index_streams(streams, config);
  std::map<std::string, CycleList> cache;
  return count_with(idx, config, pattern, cache);
}

std::map<std::string, CountResult> count_all(std::span<const TimeTagStream> streams,
                                             const CoincidenceConfig& config) {
  config.validate();
  const ChannelIndex idx = index_streams(streams, config);
  std::map<std::string, CycleList> cache;
  std::map<std::string, CountResult> out;
  for (const auto& [name, p] : config.patterns) out[name] = count_with(idx, config, p, cache);
  return out;
}

std::string tags_to_csv(std::span<const TimeTagStream> streams) {
  std::vector<std::pair<std::int64_t, std::size_t>> all;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    for (auto t : streams[s].tags) all.emplace_back(t, s);
  }
  std::sort(all.begin(), all.end());
  std::string out = "detector,tag_ps\n";
  for (const auto& [t, s] : all) {
    out += streams[s].channel;
    out += ',';
    out += std::to_string(t);
    out += '\n';
  }
  return out;
}

std::vector<TimeTagStream> tags_from_csv(const std::string& text, std::int64_t period_ps) {
  const CsvTable t = CsvTable::parse(text);
  const int cd = t.column("detector");
  const int ct = t.column("tag_ps");
  std::map<std::string, std::vector<std::int64_t>> by;
  std::vector<std::string> order;
  for (const auto& row : t.rows()) {
    if (!by.count(row[cd])) order.push_back(row[cd]);
    try {
      by[row[cd]].push_back(std::stoll(row[ct]));
    } catch (const std::exception&) {
      throw ConfigError("malformed tag value " + row[ct]);
    }
  }
  std::vector<TimeTagStream> out;
  for (const auto& name : order) {
    TimeTagStream s;
    s.channel = name;
    s.tags = std::move(by[name]);
    std::sort(s.tags.begin(), s.tags.end());
    s.tags.erase(std::unique(s.tags.begin(), s.tags.end()), s.tags.end());
    s.period_ps = period_ps;
    s.duration_ps = s.tags.empty() ? 0 : (floor_div(s.tags.back(), period_ps) + 1) * period_ps;
    out.push_back(std::move(s));
  }
  return out;
}

std::map<std::string, CountResult> simulate_and_count(const TagSimulator& sim, const CoincidenceConfig& config,
                                                      std::int64_t chunk_cycles) {
  config.validate();
  if (chunk_cycles < 1) throw ConfigError("chunk size must be positive");
  if (config.period_ps != sim.period_ps()) throw ConfigError("coincidence period differs from the clock period");
  std::map<std::string, CountResult> out;
  for (const auto& [name, p] : config.patterns) out[name] = {};
  for (std::int64_t b = 0; b < sim.total_cycles(); b += chunk_cycles) {
    const auto streams = sim.simulate(b, std::min(b + chunk_cycles, sim.total_cycles()));
    for (const auto& [name, r] : count_all(streams, config)) out[name].counts += r.counts;
  }
  for (auto& [name, r] : out) r.sigma = std::sqrt(static_cast<double>(r.counts));
  return out;
}

}  // namespace tbswap
