#pragma once

// Weighted least-squares fits of coincidence fringes and HOM dips.

#include "tbswap/gaussian.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tbswap {

struct FitPoint {
  double x = 0.0;
  double counts = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  std::vector<std::string> names;
  Vector params;
  Matrix covariance;
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;

  double visibility = 0.0;
  double visibility_sigma = 0.0;

  double value(const std::string& name) const;
  double sigma(const std::string& name) const;
};

// AsGiven uses each point's sigma. PoissonModel starts there, then refits
// with sigma^2 = max(model, 1) until the parameters settle; weighting by
// observed counts pulls fitted minima low and biases V upward.
enum class FitWeighting { AsGiven, PoissonModel };

// Attaches Poisson errors sqrt(counts), with a floor of 1 for empty bins.
std::vector<FitPoint> poisson_points(std::span<const double> x, std::span<const double> counts);

// C [1 + V cos(2 omega x + phi0)]; parameters C, V, omega, phi0 with V >= 0
// and omega > 0 after normalization.
FitResult fit_sinusoid(std::span<const FitPoint> points, FitWeighting weighting = FitWeighting::AsGiven);
double sinusoid_model(double x, double c, double v, double omega, double phi0);

// C [1 - V exp(-(x - t0)^2 / (2 sigma^2))]; parameters C, V, sigma, t0.
// A fixed sigma removes it from the fit (its covariance row is zero).
FitResult fit_hom_dip(std::span<const FitPoint> points, std::optional<double> fixed_sigma = std::nullopt,
                      FitWeighting weighting = FitWeighting::AsGiven);
double dip_model(double x, double c, double v, double sigma, double t0);

}  // namespace tbswap
