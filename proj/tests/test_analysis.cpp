#include "tbswap/errors.hpp"
#include "tbswap/fit.hpp"
#include "tbswap/metrics.hpp"
#include "tbswap/visibility.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace tbswap;

namespace {

InterferenceParams zeta(double z) {
  InterferenceParams p;
  p.zeta = z;
  return p;
}

SourceParams equal(double mu, double eta) { return {mu, mu, eta, eta, eta, eta}; }

std::vector<FitPoint> exact_points(const std::vector<double>& x, auto model) {
  std::vector<FitPoint> pts;
  for (double xi : x) pts.push_back({xi, model(xi), 1.0});
  return pts;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

}  // namespace

// ---- visibilities ---------------------------------------------------------

TEST(HomVisibility, IdealLimits) {
  const SourceParams s = equal(1e-5, 1.0);
  EXPECT_NEAR(hom_visibility(VisKind::HOM2, s, {}).value, 1.0 / 3.0, 1e-4);
  EXPECT_NEAR(hom_visibility(VisKind::HOM3A, s, {}).value, 0.5, 1e-4);
  EXPECT_NEAR(hom_visibility(VisKind::HOM3B, s, {}).value, 0.5, 1e-4);
  EXPECT_NEAR(hom_visibility(VisKind::HOM4, s, {}).value, 1.0, 1e-4);
  const auto r = hom_visibility(VisKind::HOM4, s, {});
  EXPECT_EQ(r.kind, VisKind::HOM4);
  EXPECT_EQ(r.method, VisMethod::Pipeline);
  EXPECT_THROW(hom_visibility(VisKind::SWAP, s, {}), DomainError);
}

TEST(HomVisibility, ThreefoldOrderingAtMeasuredParameters) {
  // Measured: V3B = 28.4 %, V3A = 22.3 % with the same sources.
  const SourceParams a = table::hom_a();
  EXPECT_GT(hom_visibility(VisKind::HOM3B, a, {}).value, hom_visibility(VisKind::HOM3A, a, {}).value);
  // Exchanging the roles of the two parties flips the ordering.
  const SourceParams flipped{a.mu_B, a.mu_A, a.eta_Bi, a.eta_Bs, a.eta_As, a.eta_Ai};
  EXPECT_LT(hom_visibility(VisKind::HOM3B, flipped, {}).value, hom_visibility(VisKind::HOM3A, flipped, {}).value);
  EXPECT_NEAR(hom_visibility(VisKind::HOM3B, flipped, {}).value, hom_visibility(VisKind::HOM3A, a, {}).value, 1e-12);
}

TEST(ClosedForm, Examples) {
  EXPECT_NEAR(closed_form_visibility(ClosedFormKind::HOM2, 1e-9, 1.0, 1.0), 1.0 / 3.0, 1e-8);
  EXPECT_NEAR(closed_form_visibility(ClosedFormKind::HOM2, 1.0, 1.0, 1.0), 32.0 / 104.0, 1e-12);
  for (auto k : {ClosedFormKind::HOM2, ClosedFormKind::HOM3, ClosedFormKind::HOM4}) {
    EXPECT_NEAR(closed_form_visibility(k, 0.1, 0.5, 0.0), 0.0, 1e-14);
  }
  EXPECT_THROW(closed_form_visibility(ClosedFormKind::SWAP, 0.01, 0.5, 1.0), ValidityError);
  EXPECT_THROW(closed_form_visibility(ClosedFormKind::SWAP, 0.01, 1.0, 0.9), ValidityError);
  EXPECT_THROW(closed_form_visibility(ClosedFormKind::HOM2, 0.01, 1.2, 1.0), ValidityError);
  EXPECT_THROW(closed_form_visibility(ClosedFormKind::HOM2, 0.0, 1.0, 1.0), ValidityError);
}

TEST(ClosedForm, MatchesPipelineOnGrid) {
  // 20 x 20 x 5 grid in (mu, eta, zeta).
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double mu = 0.3 * (i + 1) / 20.0;
    for (int j = 0; j < 20; ++j) {
      const double eta = 0.05 + 0.95 * j / 19.0;
      for (int k = 0; k < 5; ++k) {
        const double z = k / 4.0;
        const SourceParams s = equal(mu, eta);
        worst = std::max(worst, std::abs(closed_form_visibility(ClosedFormKind::HOM2, mu, eta, z) -
                                         hom_visibility(VisKind::HOM2, s, zeta(z)).value));
        worst = std::max(worst, std::abs(closed_form_visibility(ClosedFormKind::HOM3, mu, eta, z) -
                                         hom_visibility(VisKind::HOM3A, s, zeta(z)).value));
        worst = std::max(worst, std::abs(closed_form_visibility(ClosedFormKind::HOM4, mu, eta, z) -
                                         hom_visibility(VisKind::HOM4, s, zeta(z)).value));
      }
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(ClosedForm, SwapMatchesPipeline) {
  for (double mu : {1e-4, 1e-3, 0.01, 0.1, 0.5, 1.0}) {
    EXPECT_NEAR(closed_form_visibility(ClosedFormKind::SWAP, mu, 1.0, 1.0), swap_visibility(equal(mu, 1.0), {}).value,
                1e-9);
  }
}

TEST(Taylor, Examples) {
  const SourceParams s = equal(1e-3, 0.3);
  EXPECT_NEAR(taylor_visibility(VisKind::HOM4, s, std::sqrt(0.92)), 0.92, 1e-15);
  EXPECT_NEAR(taylor_visibility(VisKind::HOM2, s, 1.0), 1.0 / 3.0, 1e-15);
  SourceParams bright_b{1e-6, 1e-2, 0.01, 1.0, 1.0, 1.0};
  EXPECT_GT(taylor_visibility(VisKind::HOM3A, bright_b, 1.0), 0.999);
}

TEST(Taylor, WithinFivePercentOfPipeline) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const SourceParams s{1e-3 * (0.1 + 0.9 * u(rng)), 1e-3 * (0.1 + 0.9 * u(rng)), 0.05 + 0.95 * u(rng),
                         0.05 + 0.95 * u(rng), 0.05 + 0.95 * u(rng), 0.05 + 0.95 * u(rng)};
    const double z = 0.3 + 0.7 * u(rng);
    for (auto k : {VisKind::HOM2, VisKind::HOM3A, VisKind::HOM3B, VisKind::HOM4}) {
      const double pipe = hom_visibility(k, s, zeta(z)).value;
      EXPECT_NEAR(taylor_visibility(k, s, z) / pipe, 1.0, 0.05) << to_string(k) << " trial " << trial;
    }
  }
}

TEST(SwapVisibility, MeasuredParameters) {
  const auto v = swap_visibility(table::swap_b(), {});
  EXPECT_NEAR(v.value, 0.965, 0.002);
  EXPECT_NEAR(fidelity_from_visibility(v.value), 0.974, 0.002);
  EXPECT_NEAR(swap_visibility(table::swap_b(), zeta(0.0)).value, 0.0, 1e-12);
  EXPECT_EQ(v.kind, VisKind::SWAP);
}

TEST(SwapVisibility, DegenerateFringe) {
  EXPECT_THROW(swap_visibility(equal(0.0, 1.0), {}), NumericalError);
}

TEST(SwapVisibility, Monotonicity) {
  double prev = 2.0;
  for (int i = 0; i <= 40; ++i) {
    const double mu = std::pow(10.0, -4.0 + 4.0 * i / 40);
    const double v = swap_visibility(equal(mu, 1.0), {}).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    const double v = swap_visibility(table::swap_b(), zeta(std::sqrt(i / 20.0))).value;
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(EntanglementVisibility, BellLimit) {
  EXPECT_NEAR(std::abs(entanglement_visibility(1e-6, 1, 1).value), 1.0, 1e-5);
  EXPECT_LT(std::abs(entanglement_visibility(0.1, 1, 1).value), std::abs(entanglement_visibility(0.01, 1, 1).value));
}

TEST(InferZeta, RoundTrips) {
  const auto a = infer_zeta(0.867, 0.018, VisKind::HOM4, table::hom_a());
  EXPECT_NEAR(a.zeta_sq, 0.92, 0.02);
  EXPECT_NEAR(a.uncertainty, 0.02, 0.005);
  const auto b = infer_zeta(0.831, 0.055, VisKind::SWAP, table::swap_b());
  EXPECT_NEAR(b.zeta_sq, 0.86, 0.06);
  EXPECT_NEAR(b.uncertainty, 0.06, 0.01);
  EXPECT_NEAR(model_visibility(VisKind::SWAP, table::swap_b(), {}, b.zeta_sq), 0.831, 1e-8);
  EXPECT_NEAR(infer_zeta(0.0, 0.01, VisKind::HOM4, table::hom_a()).zeta_sq, 0.0, 1e-9);
}

TEST(InferZeta, Infeasible) {
  try {
    infer_zeta(0.99, 0.01, VisKind::SWAP, table::swap_b());
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NEAR(e.attainable(), swap_visibility(table::swap_b(), {}).value, 1e-12);
  }
  EXPECT_THROW(infer_zeta(-0.1, 0.01, VisKind::HOM4, table::hom_a()), DomainError);
}

// ---- metrics --------------------------------------------------------------

TEST(Metrics, Fidelity) {
  EXPECT_DOUBLE_EQ(fidelity_from_visibility(1.0), 1.0);
  EXPECT_NEAR(fidelity_from_visibility(0.831), 0.87325, 1e-12);
  EXPECT_NEAR(fidelity_from_visibility(0.947), 0.96025, 1e-12);
  EXPECT_THROW(fidelity_from_visibility(1.1), DomainError);
  EXPECT_THROW(fidelity_from_visibility(-0.5), DomainError);
}

TEST(Metrics, Chsh) {
  EXPECT_NEAR(chsh_parameter(1.0).s, 2.828427, 1e-6);
  EXPECT_TRUE(chsh_parameter(1.0).violation);
  EXPECT_NEAR(chsh_parameter(1.0 / std::sqrt(2.0)).s, 2.0, 1e-15);
  EXPECT_FALSE(chsh_parameter(0.7).violation);
  EXPECT_NEAR(chsh_parameter(0.831, 0.055).sigmas, 2.25, 0.01);
}

TEST(Metrics, ChshConsistentWithFidelityBoundary) {
  const double f_bound = (3.0 / std::sqrt(2.0) + 1.0) / 4.0;
  EXPECT_NEAR(f_bound, 0.78, 0.001);
  for (int i = 0; i <= 1000; ++i) {
    const double v = i / 1000.0;
    EXPECT_EQ(chsh_parameter(v).violation, fidelity_from_visibility(v) > f_bound) << v;
  }
}

TEST(Metrics, BinaryEntropy) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.011), 0.08736, 1e-5);
  EXPECT_THROW(binary_entropy(1.5), DomainError);
}

TEST(Metrics, SecretKeyFraction) {
  EXPECT_NEAR(secret_key_fraction(1.22, 0.011, 0.079).raw, 0.50, 0.01);
  EXPECT_DOUBLE_EQ(secret_key_fraction(1.7, 0.0, 0.0).raw, 1.0);
  EXPECT_LE(secret_key_fraction(1.0, 0.11, 0.11).raw, 2e-4);
  const auto neg = secret_key_fraction(1.5, 0.2, 0.2);
  EXPECT_LT(neg.raw, 0.0);
  EXPECT_EQ(neg.clamped, 0.0);
  EXPECT_THROW(secret_key_fraction(0.9, 0.01, 0.01), DomainError);
  EXPECT_THROW(secret_key_fraction(1.2, 0.6, 0.01), DomainError);
}

TEST(Metrics, KeyRateThreshold) {
  double lo = 0.05;
  double hi = 0.2;
  for (int i = 0; i < 60; ++i) {
    const double m = 0.5 * (lo + hi);
    (secret_key_fraction(1.0, m, m).raw > 0 ? lo : hi) = m;
  }
  EXPECT_NEAR(lo, 0.110, 0.001);
}

TEST(Metrics, QkdBudgetBracket) {
  const auto b = qkd_budget(1.22, 0.011, 0.011, 0.079, 0.020);
  EXPECT_NEAR(b.key_fraction, 0.50, 0.01);
  EXPECT_NEAR(b.plus, 0.18, 0.01);
  EXPECT_NEAR(b.minus, 0.14, 0.01);
  EXPECT_GT(b.plus, 0.0);
  EXPECT_THROW(qkd_budget(1.22, 0.011, -0.1, 0.079, 0.02), DomainError);
}

TEST(Metrics, PhaseError) {
  EXPECT_DOUBLE_EQ(phase_error_from_visibility(1.0), 0.0);
  EXPECT_NEAR(phase_error_from_visibility(0.831), 0.0845, 1e-12);
  EXPECT_DOUBLE_EQ(phase_error_from_visibility(0.0), 0.5);
}

TEST(Metrics, Klyshko) {
  const auto k = klyshko_estimate(1000, 800, 40, 2e8);
  EXPECT_NEAR(k.eta_s, 0.05, 1e-15);
  EXPECT_NEAR(k.eta_i, 0.04, 1e-15);
  EXPECT_NEAR(k.mu, 1e-4, 1e-18);
  const auto t = klyshko_estimate(50, 50, 50, 1e6);
  EXPECT_DOUBLE_EQ(t.eta_s, 1.0);
  EXPECT_DOUBLE_EQ(t.mu, 50 / 1e6);
  EXPECT_THROW(klyshko_estimate(10, 10, 0, 1e6), FitError);
  EXPECT_THROW(klyshko_estimate(10, 10, 20, 1e6), DomainError);
}

TEST(Metrics, KlyshkoRoundTripThroughDetectionModel) {
  for (double mu : {1e-4, 5e-4, 1e-3}) {
    const double eta_s = 0.12;
    const double eta_i = 0.07;
    GaussianState s = apply_loss(apply_loss(tmsv_state(mu), 0, eta_s), 1, eta_i);
    const DetectorRegistry reg({{"S", {0}, 0.0}, {"I", {1}, 0.0}});
    const auto dist = pattern_distribution(s, reg);
    const double clock = 2e8;
    const double ss = clock * (dist.probabilities[1] + dist.probabilities[3]);
    const double si = clock * (dist.probabilities[2] + dist.probabilities[3]);
    const double c = clock * dist.probabilities[3];
    const auto k = klyshko_estimate(ss, si, c, clock);
    EXPECT_NEAR(k.mu / mu, 1.0, 0.01);
    EXPECT_NEAR(k.eta_s / eta_s, 1.0, 0.01);
    EXPECT_NEAR(k.eta_i / eta_i, 1.0, 0.01);
  }
}

// ---- fits -----------------------------------------------------------------

TEST(Fit, SinusoidExactRecovery) {
  const auto pts = exact_points(linspace(0, 12, 41), [](double x) { return sinusoid_model(x, 300, 0.95, 0.5, 0.3); });
  const FitResult r = fit_sinusoid(pts);
  EXPECT_NEAR(r.value("C"), 300, 1e-6 * 300);
  EXPECT_NEAR(r.value("V"), 0.95, 1e-6);
  EXPECT_NEAR(r.value("omega"), 0.5, 1e-6);
  EXPECT_NEAR(r.value("phi0"), 0.3, 1e-6);
  EXPECT_NEAR(r.visibility, 0.95, 1e-6);
  EXPECT_THROW(r.value("nope"), DomainError);
}

TEST(Fit, ModelWeightingKeepsExactRecovery) {
  auto pts = exact_points(linspace(0, 12, 41), [](double x) { return sinusoid_model(x, 300, 0.95, 0.5, 0.3); });
  const FitResult r = fit_sinusoid(pts, FitWeighting::PoissonModel);
  EXPECT_NEAR(r.value("V"), 0.95, 1e-6);
  const auto dip = exact_points(linspace(-100, 100, 41), [](double x) { return dip_model(x, 200, 0.867, 25, 3); });
  const FitResult d = fit_hom_dip(dip, 25.0, FitWeighting::PoissonModel);
  EXPECT_NEAR(d.value("V"), 0.867, 1e-6);
  EXPECT_NEAR(d.value("t0"), 3, 1e-6);
}

TEST(Fit, ModelWeightingRemovesLowCountBias) {
  // Weighting by observed counts favours downward fluctuations at the
  // fringe minimum and inflates V; model variances do not.
  double given = 0.0;
  double model = 0.0;
  const int n = 300;
  for (int t = 0; t < n; ++t) {
    std::mt19937_64 rng(700 + t);
    std::vector<double> x = linspace(0, 4 * std::numbers::pi, 24);
    std::vector<double> counts;
    for (double xi : x) counts.push_back(std::poisson_distribution<int>(sinusoid_model(xi, 250, 0.947, 0.5, 0.3))(rng));
    const auto pts = poisson_points(x, counts);
    given += fit_sinusoid(pts).visibility - 0.947;
    model += fit_sinusoid(pts, FitWeighting::PoissonModel).visibility - 0.947;
  }
  EXPECT_GT(given / n, 0.002);
  EXPECT_LT(std::abs(model / n), 0.001);
}

TEST(Fit, SinusoidVisibilityMatchesCurveExtremes) {
  std::mt19937_64 rng(4);
  std::vector<double> x = linspace(0, 12, 31);
  std::vector<double> counts;
  for (double xi : x) counts.push_back(std::poisson_distribution<int>(sinusoid_model(xi, 500, 0.9, 0.6, 1.0))(rng));
  const FitResult r = fit_sinusoid(poisson_points(x, counts));
  const double c = r.value("C");
  const double v = r.value("V");
  const double cmax = c * (1 + v);
  const double cmin = c * (1 - v);
  EXPECT_NEAR(r.visibility, (cmax - cmin) / (cmax + cmin), 1e-9);
  EXPECT_GT(r.visibility_sigma, 0.0);
  EXPECT_EQ(r.dof, 31 - 4);
}

TEST(Fit, DipExactRecovery) {
  const auto pts = exact_points(linspace(-100, 100, 41), [](double x) { return dip_model(x, 80, 0.867, 25, 3); });
  const FitResult r = fit_hom_dip(pts);
  EXPECT_NEAR(r.value("V"), 0.867, 1e-6);
  EXPECT_NEAR(r.value("sigma"), 25, 1e-6);
  EXPECT_NEAR(r.value("t0"), 3, 1e-6);
  EXPECT_NEAR(r.value("C"), 80, 1e-6);
}

TEST(Fit, FlatDipIsConsistentWithZero) {
  std::mt19937_64 rng(8);
  std::vector<double> x = linspace(-100, 100, 41);
  std::vector<double> counts;
  for (std::size_t i = 0; i < x.size(); ++i) counts.push_back(std::poisson_distribution<int>(200)(rng));
  const FitResult r = fit_hom_dip(poisson_points(x, counts), 25.0);
  EXPECT_LT(std::abs(r.visibility), 3 * r.visibility_sigma);
  EXPECT_EQ(r.sigma("sigma"), 0.0);
}

TEST(Fit, InputChecks) {
  std::vector<FitPoint> few = {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}};
  EXPECT_THROW(fit_sinusoid(few), FitError);
  EXPECT_THROW(fit_hom_dip(few), FitError);
  std::vector<FitPoint> bad = {{0, 1, 0}, {1, 2, 1}, {2, 3, 1}, {3, 3, 1}, {4, 3, 1}};
  EXPECT_THROW(fit_sinusoid(bad), FitError);
}

TEST(Fit, PoissonPoints) {
  const double x[] = {0, 1};
  const double c[] = {0, 16};
  const auto p = poisson_points(x, c);
  EXPECT_DOUBLE_EQ(p[0].sigma, 1.0);
  EXPECT_DOUBLE_EQ(p[1].sigma, 4.0);
}

TEST(Fit, MonteCarloCoverageSmall) {
  // A short version of the acceptance Monte Carlo: sinusoid at V = 0.947.
  std::mt19937_64 rng(99);
  const std::vector<double> x = linspace(0, 4 * std::numbers::pi, 25);
  int inside = 0;
  constexpr int trials = 60;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> counts;
    for (double xi : x) counts.push_back(std::poisson_distribution<int>(sinusoid_model(xi, 500, 0.947, 0.5, 0.3))(rng));
    const FitResult r = fit_sinusoid(poisson_points(x, counts));
    if (std::abs(r.visibility - 0.947) <= 2 * r.visibility_sigma) ++inside;
  }
  EXPECT_GE(inside, 51);  // 85 %; the binomial spread at n = 60 is about 3 %.
}
