#pragma once

// Grid evaluation of figures of merit over one or two circuit parameters.

#include "tbswap/csv.hpp"
#include "tbswap/experiments.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tbswap {

enum class Spacing { Linear, Log };

struct Axis {
  // mu_A, mu_B, mu (both), eta_Ai, eta_As, eta_Bs, eta_Bi, eta (all four),
  // zeta, zeta_sq, tau_A, tau_B, tau_C, theta_A, theta_B.
  std::string param;
  double start = 0.0;
  double stop = 0.0;
  int points = 2;
  Spacing spacing = Spacing::Linear;

  std::vector<double> values() const;
  void validate() const;
};

struct SweepSpec {
  CircuitKind kind = CircuitKind::SWAP;
  SourceParams src;
  InterferenceParams intf;
  std::vector<Axis> axes;
  // V_HOM2, V_HOM3A, V_HOM3B, V_HOM4, V_swap, V_err, F_swap, e_p, R_over_Rs,
  // V_ent, closed-form twins (V_HOM2_cf, V_HOM3_cf, V_HOM4_cf, V_swap_cf),
  // and P:<pattern> for raw probabilities at the fixed phases.
  std::vector<std::string> outputs;
  int workers = 1;
  std::uint64_t seed = 0;

  // Standard deviation of zeta^2 propagated into V_err.
  double sigma_zeta_sq = 0.0;
  // Key-rate bracket settings for R_over_Rs.
  double kappa = 1.22;
  double e_t = 0.011;

  void validate() const;
};

// Applies a named parameter value to the circuit inputs.
void set_param(SourceParams& src, InterferenceParams& intf, const std::string& name, double value);

// One row per grid point in grid order (first axis outermost). A point that
// fails keeps its row with empty outputs and the message in `error`.
CsvTable run_sweep(const SweepSpec& spec);

}  // namespace tbswap
