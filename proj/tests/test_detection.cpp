#include "tbswap/detection.hpp"
#include "tbswap/errors.hpp"
#include "tbswap/experiments.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace tbswap;

namespace {

DetectorRegistry one_per_mode(int n, double nu = 0.0) {
  std::vector<DetectorSpec> d;
  for (int m = 0; m < n; ++m) d.push_back({"D" + std::to_string(m), {m}, nu});
  return DetectorRegistry(d);
}

// Lossy two-source state spread over four modes by a beamsplitter.
GaussianState mixed_state(double mu_a, double mu_b, double t) {
  GaussianState s = direct_sum(std::vector<GaussianState>{tmsv_state(mu_a), tmsv_state(mu_b)});
  s = apply_loss(s, 1, 0.7);
  return apply_symplectic(s, beamsplitter(t, 0, 2, 4));
}

}  // namespace

TEST(Registry, Validation) {
  EXPECT_THROW(DetectorRegistry({{"A", {0}, 0.0}, {"A", {1}, 0.0}}), ConfigError);
  EXPECT_THROW(DetectorRegistry({{"A", {0, 1}, 0.0}, {"B", {1}, 0.0}}), ConfigError);
  EXPECT_THROW(DetectorRegistry({{"A", {}, 0.0}}), ConfigError);
  EXPECT_THROW(DetectorRegistry({{"A", {0}, 1.0}}), ConfigError);
  EXPECT_THROW(DetectorRegistry({{"A", {0}, -0.1}}), ConfigError);
  const DetectorRegistry r({{"A", {0}, 0.0}, {"B", {3}, 0.0}});
  EXPECT_EQ(r.index_of("B"), 1);
  EXPECT_FALSE(r.contains("C"));
  EXPECT_THROW(r.index_of("C"), ConfigError);
  EXPECT_THROW(r.check_modes(3), ConfigError);
  EXPECT_NO_THROW(r.check_modes(4));
  EXPECT_DOUBLE_EQ(r.with_dark_counts({{"B", 0.2}})[1].dark_count_prob, 0.2);
  EXPECT_THROW(r.with_dark_counts({{"Z", 0.2}}), ConfigError);
}

TEST(NoClick, VacuumAndDarkCounts) {
  const GaussianState vac = GaussianState::vacuum(2);
  const DetectorSpec quiet[] = {{"A", {0}, 0.0}, {"B", {1}, 0.0}};
  EXPECT_NEAR(no_click_probability(vac, quiet), 1.0, 1e-15);
  const DetectorSpec dark[] = {{"A", {0}, 0.01}};
  EXPECT_NEAR(no_click_probability(vac, dark), 0.99, 1e-15);
  const DetectorRegistry reg({{"A", {0}, 0.01}});
  EXPECT_NEAR(click_pattern_probability(vac, reg, {{"A"}, {}}), 0.01, 1e-15);
}

TEST(NoClick, ThermalMode) {
  const GaussianState th = thermal_state(0.005);
  const DetectorSpec d[] = {{"A", {0}, 0.0}};
  EXPECT_NEAR(no_click_probability(th, d), 0.995025, 1e-6);
  const DetectorRegistry reg({{"A", {0}, 0.0}});
  EXPECT_NEAR(click_pattern_probability(th, reg, {{"A"}, {}}), 0.0049751, 1e-7);
}

TEST(NoClick, OverlapRejected) {
  const DetectorSpec d[] = {{"A", {0}, 0.0}, {"B", {0}, 0.0}};
  EXPECT_THROW(no_click_probability(GaussianState::vacuum(1), d), ConfigError);
}

TEST(ClickPattern, EmptyPatternIsOne) {
  EXPECT_NEAR(click_pattern_probability(mixed_state(0.1, 0.2, 0.6), one_per_mode(4), {}), 1.0, 1e-15);
}

TEST(ClickPattern, UnknownAndContradictoryNames) {
  const auto reg = one_per_mode(2);
  EXPECT_THROW(click_pattern_probability(GaussianState::vacuum(2), reg, {{"X"}, {}}), ConfigError);
  EXPECT_THROW(click_pattern_probability(GaussianState::vacuum(2), reg, {{"D0"}, {"D0"}}), ConfigError);
}

TEST(ClickPattern, TmsvCoincidence) {
  // Threshold coincidence of a lossless pair: 1 - 2/(1+mu) + 1/(1+mu).
  const double mu = 0.01;
  const auto reg = one_per_mode(2);
  EXPECT_NEAR(click_pattern_probability(tmsv_state(mu), reg, {{"D0", "D1"}, {}}), mu / (1 + mu), 1e-15);
  const auto dist = pattern_distribution(tmsv_state(mu), reg);
  EXPECT_NEAR(dist.probabilities[3], mu / (1 + mu), 1e-15);
  EXPECT_NEAR(dist.probabilities[1], 0.0, 1e-15);
  EXPECT_NEAR(dist.total(), 1.0, 1e-12);
}

TEST(ClickPattern, AddingMustClickNeverIncreases) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const GaussianState s = mixed_state(0.3 * u(rng), 0.3 * u(rng), u(rng));
    const auto reg = one_per_mode(4, 0.01 * u(rng));
    ClickPattern p;
    double prev = 1.0;
    for (int d = 0; d < 4; ++d) {
      p.must_click.push_back("D" + std::to_string((d + trial) % 4));
      const double now = click_pattern_probability(s, reg, p);
      EXPECT_LE(now, prev + 1e-15);
      prev = now;
    }
  }
}

TEST(ClickPattern, VacuumWithoutDarkCountsNeverClicks) {
  const auto reg = one_per_mode(4);
  for (DetectorMask m = 1; m < 16; ++m) {
    ClickPattern p;
    for (int d = 0; d < 4; ++d)
      if (m & (1u << d)) p.must_click.push_back("D" + std::to_string(d));
    EXPECT_NEAR(click_pattern_probability(GaussianState::vacuum(4), reg, p), 0.0, 1e-12);
  }
}

TEST(ClickPattern, EvaluatorMatchesDirect) {
  const GaussianState s = mixed_state(0.05, 0.02, 0.4);
  const auto reg = one_per_mode(4, 0.001);
  PatternEvaluator ev(s, reg);
  const ClickPattern p{{"D0", "D2"}, {"D3"}};
  EXPECT_NEAR(ev.probability(p), click_pattern_probability(s, reg, p), 1e-15);
  EXPECT_NEAR(ev.probability(0b0101, 0b1000), click_pattern_probability(s, reg, p), 1e-15);
}

TEST(Distribution, Vacuum) {
  const auto dist = pattern_distribution(GaussianState::vacuum(2), one_per_mode(2));
  ASSERT_EQ(dist.probabilities.size(), 4u);
  EXPECT_NEAR(dist.probabilities[0], 1.0, 1e-15);
  for (int m = 1; m < 4; ++m) EXPECT_NEAR(dist.probabilities[m], 0.0, 1e-15);
}

TEST(Distribution, NormalizedOnRandomStates) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const GaussianState s = mixed_state(u(rng), u(rng), u(rng));
    const auto dist = pattern_distribution(s, one_per_mode(4, 0.05 * u(rng)));
    EXPECT_NEAR(dist.total(), 1.0, 1e-9);
    for (double p : dist.probabilities) EXPECT_GE(p, 0.0);
  }
}

TEST(Distribution, SwapCircuitNormalized) {
  const CircuitModel c = build_swap_circuit(table::swap_b(), {});
  const auto dist = pattern_distribution(evaluate(c), c.detectors);
  EXPECT_EQ(dist.detectors.size(), 8u);
  EXPECT_NEAR(dist.total(), 1.0, 1e-9);
}

TEST(Distribution, CapacityLimit) {
  EXPECT_THROW(pattern_distribution(GaussianState::vacuum(11), one_per_mode(11)), CapacityError);
}
