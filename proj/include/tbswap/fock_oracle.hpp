#pragma once

// Brute-force photon-number simulation for validating the Gaussian pipeline.
//
// States are sparse maps from occupation tuples to complex amplitudes. Only
// passive optics is supported, so total photon number is conserved; sources
// are truncated by total pair number, which makes the discarded weight an
// exact bound on the error of any detection probability.

#include "tbswap/detection.hpp"
#include "tbswap/experiments.hpp"
#include "tbswap/gaussian.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

namespace tbswap {

using Complex = std::complex<double>;

struct Occupation {
  std::array<std::uint8_t, kMaxModes> n{};

  bool operator==(const Occupation&) const = default;
  int total() const;
};

struct OccupationHash {
  std::size_t operator()(const Occupation& o) const noexcept;
};

inline constexpr double kMaxTruncationBound = 1e-6;

class FockState {
 public:
  using Amplitudes = std::unordered_map<Occupation, Complex, OccupationHash>;

  FockState() = default;
  FockState(int num_modes, Amplitudes amplitudes, double truncation_bound);

  static FockState vacuum(int num_modes);

  int num_modes() const { return num_modes_; }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  Complex amplitude(const Occupation& occ) const;
  // Upper bound on the probability weight discarded by truncation.
  double truncation_bound() const { return truncation_bound_; }
  double norm_squared() const;
  std::size_t size() const { return amplitudes_.size(); }

  // Photon-number distribution of one mode.
  std::vector<double> photon_distribution(int mode) const;

 private:
  int num_modes_ = 0;
  Amplitudes amplitudes_;
  double truncation_bound_ = 0.0;
};

// Tail weight sum_{n > n_max} mu^n / (1 + mu)^(n + 1) of one pair.
double tmsv_tail(double mu, int n_max);
// Smallest n_max whose tail is at most kMaxTruncationBound.
int default_n_max(double mu);

// Two modes (signal 0, idler 1) with coefficients (-1)^n sqrt(mu^n / (1+mu)^(n+1)).
FockState tmsv_fock(double mu, int n_max);

// Product of independent pair sources, keeping every component with at most
// max_pairs pairs in total. max_pairs < 0 picks the smallest value whose
// discarded weight is at most kMaxTruncationBound.
FockState sources_fock(int num_modes, std::span<const TmsvSource> sources, int max_pairs = -1);
// Probability that independent pair sources emit more than max_pairs pairs.
double pair_count_tail(std::span<const double> mus, int max_pairs);
// Smallest max_pairs whose discarded weight is at most target.
int pairs_for_tail(std::span<const double> mus, double target);

FockState tensor(const FockState& a, const FockState& b);

// Passive op only (beamsplitters, phase shifters and products of them).
FockState apply_linear_optics_fock(const FockState& state, const SymplecticOp& op);

// Appends a vacuum mode and mixes it with `mode` at t = sqrt(eta). The
// ancilla is kept in the state; it is never read by a detector.
FockState apply_loss_fock(const FockState& state, int mode, double eta);

// Per-mode detection efficiency applied photon by photon just before the
// detectors. Modes not listed are detected with unit efficiency.
using DetectionLossMap = std::map<int, double>;

double oracle_click_probability(const FockState& state, const ClickPattern& pattern,
                                const DetectorRegistry& detectors, const DetectionLossMap& loss = {});

// Full circuit in the Fock picture: sources, ancilla losses, passive ops.
FockState evaluate_fock(const CircuitModel& circuit, int max_pairs = -1);

}  // namespace tbswap
