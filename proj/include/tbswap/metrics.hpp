#pragma once

// Scalar figures of merit derived from visibilities and count rates.

namespace tbswap {

// F = (3V + 1) / 4 for a Werner-like state.
double fidelity_from_visibility(double v);

struct ChshResult {
  double s = 0.0;
  bool violation = false;
  // (S - 2) in units of the propagated standard deviation; 0 when sigma_v = 0.
  double sigmas = 0.0;
};

ChshResult chsh_parameter(double v, double sigma_v = 0.0);

double binary_entropy(double x);

struct KeyFraction {
  double raw = 0.0;
  double clamped = 0.0;
};

// Bracket 1 - kappa H2(e_t) - H2(e_p) of the source-independent key rate.
KeyFraction secret_key_fraction(double kappa, double e_t, double e_p);

struct QkdBudget {
  double kappa = 1.0;
  double e_t = 0.0;
  double e_p = 0.0;
  double key_fraction = 0.0;
  double plus = 0.0;
  double minus = 0.0;
};

// Propagates +-1 sigma of both error rates through the bracket; error rates
// are clipped to [0, 1/2] at the extremes.
QkdBudget qkd_budget(double kappa, double e_t, double sigma_e_t, double e_p, double sigma_e_p);

// e_p = (1 - V) / 2.
double phase_error_from_visibility(double v);

struct KlyshkoEstimate {
  double mu = 0.0;
  double eta_s = 0.0;
  double eta_i = 0.0;
};

// Rates in Hz; clock is the pump repetition rate.
KlyshkoEstimate klyshko_estimate(double singles_s, double singles_i, double coincidences, double clock);

}  // namespace tbswap
