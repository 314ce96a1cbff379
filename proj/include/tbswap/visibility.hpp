#pragma once

// Interference visibilities: full pipeline, closed forms, small-mu Taylor
// approximants, and inversion for the indistinguishability.

#include "tbswap/experiments.hpp"

#include <string>

namespace tbswap {

enum class VisKind { HOM2, HOM3A, HOM3B, HOM4, ENT, SWAP };
enum class VisMethod { Pipeline, ClosedForm, Taylor, Fit };

const char* to_string(VisKind kind);
const char* to_string(VisMethod method);
VisKind vis_kind_from_string(const std::string& name);

struct VisibilityResult {
  double value = 0.0;
  double uncertainty = 0.0;
  VisKind kind = VisKind::HOM4;
  VisMethod method = VisMethod::Pipeline;
};

// Name of the HOM coincidence pattern behind a visibility order.
const char* hom_pattern(VisKind kind);

// [P(zeta=0) - P(zeta)] / P(zeta=0) for the order's pattern.
VisibilityResult hom_visibility(VisKind kind, const SourceParams& src, const InterferenceParams& intf);

// Fringe of the given pattern between theta_A and theta_A + pi.
VisibilityResult swap_visibility(const SourceParams& src, const InterferenceParams& intf,
                                 const std::string& pattern = "P1467");
double swap_probability(const SourceParams& src, const InterferenceParams& intf,
                        const std::string& pattern = "P1467");

VisibilityResult entanglement_visibility(double mu, double eta_signal, double eta_idler,
                                         double tau_A = kBalanced, double tau_B = kBalanced,
                                         const std::string& pattern = "C11");

enum class ClosedFormKind { HOM2, HOM3, HOM4, SWAP };

// Equal mean photon numbers and efficiencies, balanced splitters, no dark
// counts. SWAP holds only for eta = 1 and zeta = 1.
double closed_form_visibility(ClosedFormKind kind, double mu, double eta, double zeta);

// Lowest-order expansion in the mean photon numbers.
double taylor_visibility(VisKind kind, const SourceParams& src, double zeta);

struct ZetaEstimate {
  double zeta_sq = 0.0;
  double uncertainty = 0.0;
  // Visibility at full overlap for the given parameters.
  double v_max = 0.0;
};

// Model visibility as a function of zeta^2 at fixed source parameters.
double model_visibility(VisKind kind, const SourceParams& src, const InterferenceParams& intf, double zeta_sq);

// Bisection on zeta^2 in [0, 1]; the uncertainty is sigma_V over the local slope.
ZetaEstimate infer_zeta(double measured_v, double sigma_v, VisKind kind, const SourceParams& src,
                        const InterferenceParams& intf = {});

}  // namespace tbswap
