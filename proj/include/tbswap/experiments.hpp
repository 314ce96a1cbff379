#pragma once

// Builders for the three optical models: Hong-Ou-Mandel interference of two
// heralded sources, time-bin entanglement swapping, and the two-interferometer
// entanglement-visibility measurement of a single source.

#include "tbswap/detection.hpp"
#include "tbswap/gaussian.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace tbswap {

inline const double kBalanced = 1.0 / std::sqrt(2.0);

struct SourceParams {
  double mu_A = 0.0;
  double mu_B = 0.0;
  double eta_Ai = 1.0;
  double eta_As = 1.0;
  double eta_Bs = 1.0;
  double eta_Bi = 1.0;

  void validate() const;
};

struct InterferenceParams {
  double zeta = 1.0;
  double tau_A = kBalanced;
  double tau_B = kBalanced;
  double tau_C = kBalanced;
  double theta_A = 0.0;
  double theta_B = 0.0;
  // Dark-count probability per gate, keyed by detector name.
  std::map<std::string, double> nu_map;

  void validate() const;
};

// Measured source parameter sets used throughout the tests and figures.
namespace table {
SourceParams hom_a();
SourceParams swap_b();
// Rows with one mean photon number left free; the argument fills it in.
SourceParams swap_c(double mu_A);
SourceParams swap_d(double mu_B);
}  // namespace table

enum class CircuitKind { HOM, SWAP, PAIR_VIS };
const char* to_string(CircuitKind kind);

struct LossOp {
  int mode = 0;
  double eta = 1.0;
};

using CircuitOp = std::variant<SymplecticOp, LossOp>;

// Two-mode squeezed vacuum feeding (signal, idler) with mean photon number mu.
struct TmsvSource {
  int signal = 0;
  int idler = 1;
  double mu = 0.0;
};

// Where a detector's tags appear: physical channel plus offset in the gate.
struct TagTiming {
  std::string channel;
  std::int64_t offset_ps = 0;
};

inline constexpr std::int64_t kLateBinOffsetPs = 346;

struct CircuitModel {
  CircuitKind kind = CircuitKind::HOM;
  int num_modes = 0;
  // Modes not fed by a source start in vacuum.
  std::vector<TmsvSource> sources;
  ModeLayout layout;
  std::vector<CircuitOp> ops;
  DetectorRegistry detectors;
  std::map<std::string, ClickPattern> patterns;
  std::map<std::string, TagTiming> timing;

  GaussianState input_state() const;
  const ClickPattern& pattern(const std::string& name) const;
};

// Modes: 0 A signal, 1 A idler, 2 B signal, 3 B idler, 4 mismatched part of
// B signal, 5 vacuum partner of the mismatched part.
// Detectors: D5 (A idler), D7 (B idler), D1 and D2 (Charlie outputs).
// Patterns: P21, P521, P217, P5217.
CircuitModel build_hom_circuit(const SourceParams& src, const InterferenceParams& intf);

// Modes: 0..3 A (signal e, idler e, signal l, idler l), 4..7 B in the same
// order, 8 and 10 mismatched B signal (e, l), 9 and 11 their vacuum partners.
// Detectors: D4e/D4l and D6e/D6l at Charlie; D1/D2 Alice's interferometer
// outputs; D5/D7 Bob's.
// Patterns P{a}46{b} herald D4e with D6l, P{a}64{b} herald D4l with D6e, for
// a in {1, 2} and b in {5, 7}. P1467 is the reference fringe.
CircuitModel build_swap_circuit(const SourceParams& src, const InterferenceParams& intf);

// Modes: 0 signal e, 1 idler e, 2 signal l, 3 idler l. Signals pass Alice's
// interferometer (phase theta on the late mode), idlers Bob's.
// Detectors DA1/DA2 and DB1/DB2; patterns C11, C12, C21, C22.
CircuitModel build_pair_visibility_circuit(double mu, double eta_signal, double eta_idler, double tau_A,
                                           double tau_B, double theta);

GaussianState evaluate(const CircuitModel& circuit);
GaussianState evaluate(const CircuitModel& circuit, const GaussianState& input);

double pattern_probability(const CircuitModel& circuit, const GaussianState& output, const std::string& name);

// zeta(dt) = exp(-dt^2 / (4 sigma^2)); zeta^2 follows the Gaussian dip.
double delay_to_indistinguishability(double delta_t_ps, double sigma_ps);

}  // namespace tbswap
