#include "tbswap/visibility.hpp"

#include "tbswap/errors.hpp"

#include <cmath>
#include <numbers>

namespace tbswap {

const char* to_string(VisKind kind) {
  switch (kind) {
    case VisKind::HOM2: return "HOM2";
    case VisKind::HOM3A: return "HOM3A";
    case VisKind::HOM3B: return "HOM3B";
    case VisKind::HOM4: return "HOM4";
    case VisKind::ENT: return "ENT";
    case VisKind::SWAP: return "SWAP";
  }
  return "?";
}

const char* to_string(VisMethod method) {
  switch (method) {
    case VisMethod::Pipeline: return "pipeline";
    case VisMethod::ClosedForm: return "closed_form";
    case VisMethod::Taylor: return "taylor";
    case VisMethod::Fit: return "fit";
  }
  return "?";
}

VisKind vis_kind_from_string(const std::string& name) {
  for (VisKind k : {VisKind::HOM2, VisKind::HOM3A, VisKind::HOM3B, VisKind::HOM4, VisKind::ENT, VisKind::SWAP}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown visibility kind " + name);
}

const char* hom_pattern(VisKind kind) {
  switch (kind) {
    case VisKind::HOM2: return "P21";
    case VisKind::HOM3A: return "P521";
    case VisKind::HOM3B: return "P217";
    case VisKind::HOM4: return "P5217";
    default: throw DomainError("not a HOM visibility kind");
  }
}

namespace {

double hom_probability(VisKind kind, const SourceParams& src, InterferenceParams intf, double zeta) {
  intf.zeta = zeta;
  const CircuitModel c = build_hom_circuit(src, intf);
  return pattern_probability(c, evaluate(c), hom_pattern(kind));
}

}  // namespace

VisibilityResult hom_visibility(VisKind kind, const SourceParams& src, const InterferenceParams& intf) {
  const double p0 = hom_probability(kind, src, intf, 0.0);
  const double p1 = hom_probability(kind, src, intf, intf.zeta);
  if (!(p0 > 0.0)) throw NumericalError("coincidence probability vanishes at zero overlap");
  return {(p0 - p1) / p0, 0.0, kind, VisMethod::Pipeline};
}

double swap_probability(const SourceParams& src, const InterferenceParams& intf, const std::string& pattern) {
  const CircuitModel c = build_swap_circuit(src, intf);
  return pattern_probability(c, evaluate(c), pattern);
}

VisibilityResult swap_visibility(const SourceParams& src, const InterferenceParams& intf,
                                 const std::string& pattern) {
  InterferenceParams shifted = intf;
  shifted.theta_A = intf.theta_A + std::numbers::pi;
  const double p0 = swap_probability(src, intf, pattern);
  const double p1 = swap_probability(src, shifted, pattern);
  if (!(p0 + p1 > 0.0)) throw NumericalError("degenerate fringe: both probabilities vanish");
  return {(p0 - p1) / (p0 + p1), 0.0, VisKind::SWAP, VisMethod::Pipeline};
}

VisibilityResult entanglement_visibility(double mu, double eta_signal, double eta_idler, double tau_A,
                                         double tau_B, const std::string& pattern) {
  auto prob = [&](double theta) {
    const CircuitModel c = build_pair_visibility_circuit(mu, eta_signal, eta_idler, tau_A, tau_B, theta);
    return pattern_probability(c, evaluate(c), pattern);
  };
  const double p0 = prob(0.0);
  const double p1 = prob(std::numbers::pi);
  if (!(p0 + p1 > 0.0)) throw NumericalError("degenerate fringe: both probabilities vanish");
  return {(p0 - p1) / (p0 + p1), 0.0, VisKind::ENT, VisMethod::Pipeline};
}

namespace {

// The closed forms are sums of O(1) rational terms that cancel down to the
// coincidence probability, so relative precision is lost as (eta mu)^-2.
// Quad precision (add/mul/div only; no libquadmath needed) keeps the result
// exact to double over the whole validity range.
using LD = __float128;

LD quad_sqrt(LD a) {
  LD s = std::sqrt(static_cast<long double>(a));
  for (int i = 0; i < 2; ++i) s = 0.5 * (s + a / s);
  return s;
}

LD hom3_term(LD x, LD eta, LD z2) {
  const LD q = 4 + 8 * x - 2 * eta * x + x * x * (3 - eta - z2 + eta * z2);
  return (1 + x + x * x) / ((1 + x) * (1 + x)) - 8 / (4 + 4 * x + (1 - z2) * x * x) + 8 / q -
         1 / ((1 + x) * (1 + 2 * x - eta * x));
}

LD hom4_term(LD x, LD eta, LD z2) {
  const LD q = 4 + 8 * x - 2 * eta * x + x * x * (3 - eta - z2 + eta * z2);
  const LD w = 2 + (3 - eta) * x;
  const LD r = w * w - z2 * (1 - eta) * (1 - eta) * x * x;
  const LD h = 1 + 2 * x - eta * x;
  return 1 - 2 / (1 + x) + 2 / ((1 + x) * (1 + x)) - 8 / (4 + 4 * x + (1 - z2) * x * x) + 16 / q +
         (-1 + (-3 + 2 * eta) * x) / ((1 + x) * h * h) - 8 / r;
}

}  // namespace

double closed_form_visibility(ClosedFormKind kind, double mu, double eta, double zeta) {
  if (!std::isfinite(mu) || mu < 0.0) throw ValidityError("closed forms need a finite mu >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidityError("closed forms need eta in (0, 1]");
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw ValidityError("closed forms need zeta in [0, 1]");
  if (mu == 0.0) throw ValidityError("closed forms are undefined at mu = 0");
  const LD e = eta;
  const LD x = e * static_cast<LD>(mu);
  const LD z2 = static_cast<LD>(zeta) * zeta;
  switch (kind) {
    case ClosedFormKind::HOM2:
      return static_cast<double>(8 * z2 * (1 + x) * (1 + x) /
                                 ((6 + 6 * x + x * x) * (4 + 4 * x + (1 - z2) * x * x)));
    case ClosedFormKind::HOM3:
      return static_cast<double>(1 - hom3_term(x, e, z2) / hom3_term(x, e, 0));
    case ClosedFormKind::HOM4:
      return static_cast<double>(1 - hom4_term(x, e, z2) / hom4_term(x, e, 0));
    case ClosedFormKind::SWAP: {
      if (eta != 1.0 || zeta != 1.0) throw ValidityError("the swap closed form holds only for eta = 1, zeta = 1");
      const LD m = mu;
      const LD a = 4 + 12 * m + 13 * m * m + 6 * m * m * m + m * m * m * m;
      const LD b = 16 + 48 * m + 48 * m * m + 16 * m * m * m;
      const LD num = -4 / a + 16 / b;
      const LD den = 2 + 4 / ((1 + m) * (1 + m)) - 8 / (1 + m) - 16 / (2 + 5 * m + 4 * m * m + m * m * m) +
                     4 / a + 32 / quad_sqrt(16 + 56 * m + 73 * m * m + 42 * m * m * m + 9 * m * m * m * m) +
                     16 / b;
      return static_cast<double>(num / den);
    }
  }
  throw ValidityError("unknown closed form");
}

double taylor_visibility(VisKind kind, const SourceParams& src, double zeta) {
  src.validate();
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw DomainError("zeta must lie in [0, 1]");
  const double z2 = zeta * zeta;
  const double a = src.eta_As * src.mu_A;
  const double b = src.eta_Bs * src.mu_B;
  switch (kind) {
    case VisKind::HOM2: {
      if (!(a > 0.0 && b > 0.0)) throw DomainError("both signal fluxes must be positive");
      const double r = b / a;
      return r * z2 / (1.0 + r + r * r);
    }
    case VisKind::HOM3A: {
      if (!(a > 0.0)) throw DomainError("Alice's signal flux must be positive");
      const double q = b / a;
      return z2 * q / (q + 2.0 - src.eta_Ai);
    }
    case VisKind::HOM3B: {
      if (!(a > 0.0)) throw DomainError("Alice's signal flux must be positive");
      return z2 / (1.0 + (2.0 - src.eta_Bi) * b / a);
    }
    case VisKind::HOM4: return z2;
    default: throw DomainError("Taylor forms exist only for HOM visibilities");
  }
}

double model_visibility(VisKind kind, const SourceParams& src, const InterferenceParams& intf, double zeta_sq) {
  if (!(zeta_sq >= 0.0 && zeta_sq <= 1.0)) throw DomainError("zeta^2 must lie in [0, 1]");
  InterferenceParams p = intf;
  p.zeta = std::sqrt(zeta_sq);
  switch (kind) {
    case VisKind::SWAP: return swap_visibility(src, p).value;
    case VisKind::ENT: throw DomainError("entanglement visibility does not depend on zeta");
    default: return hom_visibility(kind, src, p).value;
  }
}

ZetaEstimate infer_zeta(double measured_v, double sigma_v, VisKind kind, const SourceParams& src,
                        const InterferenceParams& intf) {
  if (!std::isfinite(measured_v)) throw DomainError("measured visibility must be finite");
  if (!(sigma_v >= 0.0)) throw DomainError("visibility uncertainty must be >= 0");
  if (measured_v < 0.0) throw DomainError("measured visibility below the attainable range [0, V(1)]");
  auto v = [&](double z2) { return model_visibility(kind, src, intf, z2); };
  const double v_max = v(1.0);
  if (measured_v > v_max) {
    throw InfeasibleError("measured visibility " + std::to_string(measured_v) +
                              " exceeds the attainable maximum " + std::to_string(v_max),
                          v_max);
  }
  double lo = 0.0;
  double hi = 1.0;
  double f_lo = v(lo) - measured_v;
  if (f_lo >= 0.0) return {0.0, 0.0, v_max};
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double f = v(mid) - measured_v;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  const double z2 = 0.5 * (lo + hi);
  const double h = 1e-4;
  const double a = std::max(0.0, z2 - h);
  const double b = std::min(1.0, z2 + h);
  const double slope = (v(b) - v(a)) / (b - a);
  if (!(std::abs(slope) > 0.0)) throw NumericalError("visibility is flat in zeta^2; cannot propagate uncertainty");
  return {z2, sigma_v / std::abs(slope), v_max};
}

}  // namespace tbswap
