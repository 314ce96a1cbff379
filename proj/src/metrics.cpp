#include "tbswap/metrics.hpp"

#include "tbswap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tbswap {

double fidelity_from_visibility(double v) {
  if (!(v >= -1.0 / 3.0 - 1e-15 && v <= 1.0)) throw DomainError("visibility must lie in [-1/3, 1]");
  return (3.0 * v + 1.0) / 4.0;
}

ChshResult chsh_parameter(double v, double sigma_v) {
  if (!std::isfinite(v) || !(sigma_v >= 0.0)) throw DomainError("invalid visibility or uncertainty");
  ChshResult r;
  r.s = 2.0 * std::sqrt(2.0) * v;
  r.violation = v > 1.0 / std::sqrt(2.0);
  if (sigma_v > 0.0) r.sigmas = (r.s - 2.0) / (2.0 * std::sqrt(2.0) * sigma_v);
  return r;
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("binary entropy argument must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

KeyFraction secret_key_fraction(double kappa, double e_t, double e_p) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("error-correction efficiency must be >= 1");
  if (!(e_t >= 0.0 && e_t <= 0.5) || !(e_p >= 0.0 && e_p <= 0.5)) {
    throw DomainError("error rates must lie in [0, 1/2]");
  }
  const double raw = 1.0 - kappa * binary_entropy(e_t) - binary_entropy(e_p);
  return {raw, std::max(0.0, raw)};
}

QkdBudget qkd_budget(double kappa, double e_t, double sigma_e_t, double e_p, double sigma_e_p) {
  if (!(sigma_e_t >= 0.0) || !(sigma_e_p >= 0.0)) throw DomainError("uncertainties must be >= 0");
  auto clip = [](double e) { return std::clamp(e, 0.0, 0.5); };
  QkdBudget b;
  b.kappa = kappa;
  b.e_t = e_t;
  b.e_p = e_p;
  b.key_fraction = secret_key_fraction(kappa, e_t, e_p).raw;
  // The bracket falls with either error rate on [0, 1/2], so the extremes
  // come from moving both rates together.
  const double best = secret_key_fraction(kappa, clip(e_t - sigma_e_t), clip(e_p - sigma_e_p)).raw;
  const double worst = secret_key_fraction(kappa, clip(e_t + sigma_e_t), clip(e_p + sigma_e_p)).raw;
  b.plus = best - b.key_fraction;
  b.minus = b.key_fraction - worst;
  return b;
}

double phase_error_from_visibility(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("visibility must lie in [0, 1]");
  return (1.0 - v) / 2.0;
}

KlyshkoEstimate klyshko_estimate(double singles_s, double singles_i, double coincidences, double clock) {
  if (!(coincidences > 0.0)) throw FitError("no coincidences: efficiencies cannot be estimated");
  if (!(singles_s > 0.0 && singles_i > 0.0 && clock > 0.0)) throw DomainError("rates must be positive");
  if (coincidences > std::min(singles_s, singles_i)) {
    throw DomainError("coincidence rate exceeds a singles rate");
  }
  return {singles_s * singles_i / (coincidences * clock), coincidences / singles_i, coincidences / singles_s};
}

}  // namespace tbswap
