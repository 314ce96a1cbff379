#include "oracle_cases.hpp"

#include "tbswap/errors.hpp"
#include "tbswap/fock_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tbswap;

namespace {

Occupation occ(std::initializer_list<int> n) {
  Occupation o;
  int i = 0;
  for (int v : n) o.n[i++] = static_cast<std::uint8_t>(v);
  return o;
}

FockState basis(int modes, std::initializer_list<int> n) {
  FockState::Amplitudes a;
  a[occ(n)] = 1.0;
  return FockState(modes, a, 0.0);
}

const double kHalf = 1.0 / std::sqrt(2.0);

}  // namespace

TEST(TmsvFock, VacuumAtZeroMu) {
  const FockState f = tmsv_fock(0.0, 1);
  EXPECT_EQ(f.size(), 1u);
  EXPECT_NEAR(std::abs(f.amplitude(occ({0, 0}))), 1.0, 1e-15);
  EXPECT_EQ(f.truncation_bound(), 0.0);
}

TEST(TmsvFock, PairRatio) {
  const FockState f = tmsv_fock(0.01, 3);
  const double r = std::norm(f.amplitude(occ({1, 1}))) / std::norm(f.amplitude(occ({0, 0})));
  EXPECT_NEAR(r, 0.0099010, 1e-7);
  EXPECT_LT(f.amplitude(occ({1, 1})).real(), 0.0);
  EXPECT_NEAR(f.norm_squared(), 1.0 - f.truncation_bound(), 1e-15);
  EXPECT_NEAR(f.truncation_bound(), tmsv_tail(0.01, 3), 1e-20);
}

TEST(TmsvFock, TruncationLimits) {
  EXPECT_THROW(tmsv_fock(0.05, 3), TruncationError);
  EXPECT_NO_THROW(tmsv_fock(0.05, default_n_max(0.05)));
  EXPECT_LE(tmsv_tail(0.05, default_n_max(0.05)), kMaxTruncationBound);
  EXPECT_GT(tmsv_tail(0.05, default_n_max(0.05) - 1), kMaxTruncationBound);
  EXPECT_THROW(tmsv_fock(0.01, 0), DomainError);
  EXPECT_THROW(tmsv_fock(-0.01, 3), DomainError);
}

TEST(TmsvFock, SignalIsThermal) {
  for (double mu : {0.001, 0.01, 0.05}) {
    const FockState f = tmsv_fock(mu, default_n_max(mu));
    const auto dist = f.photon_distribution(0);
    for (std::size_t n = 0; n < dist.size(); ++n) {
      EXPECT_NEAR(dist[n], std::pow(mu, n) / std::pow(1 + mu, n + 1), f.truncation_bound());
    }
  }
}

TEST(TmsvFock, OnePairSectorIsBellState) {
  // Early pair on modes (0, 1), late pair on (2, 3).
  const double mu = 0.01;
  const FockState f = tensor(tmsv_fock(mu, 3), tmsv_fock(mu, 3));
  const Complex ee = f.amplitude(occ({1, 1, 0, 0}));
  const Complex ll = f.amplitude(occ({0, 0, 1, 1}));
  double sector = 0.0;
  for (const auto& [o, a] : f.amplitudes())
    if (o.total() == 2) sector += std::norm(a);
  const double overlap = std::norm((ee + ll) * kHalf) / sector;
  EXPECT_NEAR(overlap, 1.0, 1e-12);
}

TEST(PairTruncation, TailsAreConsistent) {
  const double mus[] = {0.01, 0.02, 0.03};
  for (int k = 0; k < 6; ++k) {
    EXPECT_GT(pair_count_tail(mus, k), pair_count_tail(mus, k + 1));
  }
  const int k = pairs_for_tail(mus, 1e-9);
  EXPECT_LE(pair_count_tail(mus, k), 1e-9);
  EXPECT_GT(pair_count_tail(mus, k - 1), 1e-9);
  // One source: total pair cut equals the per-mode cut.
  const double one[] = {0.04};
  EXPECT_NEAR(pair_count_tail(one, 3), tmsv_tail(0.04, 3), 1e-9 * tmsv_tail(0.04, 3));
  const TmsvSource src[] = {{0, 1, 0.01}, {2, 3, 0.02}, {4, 5, 0.03}};
  const FockState f = sources_fock(6, src, k);
  EXPECT_NEAR(f.norm_squared(), 1.0 - f.truncation_bound(), 1e-14);
  EXPECT_THROW(sources_fock(6, src, 1), TruncationError);
}

TEST(LinearOptics, Identity) {
  const FockState f = tmsv_fock(0.01, 3);
  const FockState g = apply_linear_optics_fock(f, SymplecticOp::identity(2));
  for (const auto& [o, a] : f.amplitudes()) EXPECT_NEAR(std::abs(g.amplitude(o) - a), 0.0, 1e-15);
}

TEST(LinearOptics, HongOuMandelCancellation) {
  const FockState out = apply_linear_optics_fock(basis(2, {1, 1}), beamsplitter(kHalf, 0, 1, 2));
  EXPECT_NEAR(std::abs(out.amplitude(occ({1, 1}))), 0.0, 1e-12);
  EXPECT_NEAR(std::norm(out.amplitude(occ({2, 0}))), 0.5, 1e-12);
  EXPECT_NEAR(std::norm(out.amplitude(occ({0, 2}))), 0.5, 1e-12);
}

TEST(LinearOptics, SinglePhotonSplits) {
  const FockState out = apply_linear_optics_fock(basis(2, {1, 0}), beamsplitter(kHalf, 0, 1, 2));
  EXPECT_NEAR(std::norm(out.amplitude(occ({1, 0}))), 0.5, 1e-12);
  EXPECT_NEAR(std::norm(out.amplitude(occ({0, 1}))), 0.5, 1e-12);
}

TEST(LinearOptics, NormConservedUnderPassiveOps) {
  const TmsvSource src[] = {{0, 1, 0.03}, {2, 3, 0.02}};
  FockState f = sources_fock(4, src);
  const double before = f.norm_squared();
  f = apply_linear_optics_fock(f, beamsplitter(0.3, 1, 2, 4).then(phase_shifter(0.8, 2, 4)));
  f = apply_linear_optics_fock(f, beamsplitter(0.9, 0, 3, 4));
  EXPECT_NEAR(f.norm_squared(), before, 1e-10);
}

TEST(LinearOptics, RejectsActiveOps) {
  Matrix sq = Matrix::Identity(2, 2);
  sq(0, 0) = 2.0;
  sq(1, 1) = 0.5;
  EXPECT_THROW(apply_linear_optics_fock(FockState::vacuum(1), SymplecticOp::from_matrix(sq)),
               UnsupportedOpError);
}

TEST(OracleClicks, VacuumNeverClicks) {
  const DetectorRegistry reg({{"A", {0}, 0.0}, {"B", {1}, 0.0}});
  EXPECT_EQ(oracle_click_probability(FockState::vacuum(2), {{"A"}, {}}, reg), 0.0);
  EXPECT_EQ(oracle_click_probability(FockState::vacuum(2), {{"A", "B"}, {}}, reg), 0.0);
}

TEST(OracleClicks, HeraldedPhotonAlwaysPresent) {
  const double mu = 0.019;
  const FockState f = tmsv_fock(mu, default_n_max(mu));
  const DetectorRegistry reg({{"S", {0}, 0.0}, {"I", {1}, 0.0}});
  const double herald = oracle_click_probability(f, {{"I"}, {}}, reg);
  const double both = oracle_click_probability(f, {{"S", "I"}, {}}, reg);
  EXPECT_NEAR(both / herald, 1.0, f.truncation_bound() / herald);
  EXPECT_NEAR(herald, mu / (1 + mu), f.truncation_bound());
}

TEST(OracleClicks, DetectionLossMatchesAncillaLoss) {
  const double mu = 0.03;
  const FockState f = tmsv_fock(mu, default_n_max(mu));
  const DetectorRegistry reg({{"S", {0}, 0.0}, {"I", {1}, 0.0}});
  const double direct = oracle_click_probability(f, {{"S", "I"}, {}}, reg, {{0, 0.4}, {1, 0.7}});
  const FockState lossy = apply_loss_fock(apply_loss_fock(f, 0, 0.4), 1, 0.7);
  EXPECT_EQ(lossy.num_modes(), 4);
  EXPECT_NEAR(oracle_click_probability(lossy, {{"S", "I"}, {}}, reg), direct, 1e-15);
}

TEST(OracleVsGaussian, HomFourfoldAtMeasuredParameters) {
  const CircuitModel c = build_hom_circuit(table::hom_a(), {});
  std::vector<double> mus;
  for (const auto& s : c.sources) mus.push_back(s.mu);
  const FockState f = evaluate_fock(c, pairs_for_tail(mus, 1e-12));
  const double gauss = pattern_probability(c, evaluate(c), "P5217");
  EXPECT_NEAR(oracle_click_probability(f, c.pattern("P5217"), c.detectors), gauss, 1e-8);
  EXPECT_NEAR(oracle_click_probability(f, c.pattern("P5217"), c.detectors), gauss, 10 * f.truncation_bound());
}

TEST(OracleVsGaussian, RandomCircuitsWithinBound) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 9; ++i) {
    // Smaller mu keeps this unit suite quick; the acceptance run goes to 0.05.
    const auto cs = cases::random_circuit(rng, i, 0.02);
    const auto r = cases::compare_with_oracle(cs.circuit);
    EXPECT_LE(r.worst_diff, 10 * r.bound) << cs.label << " bound " << r.bound;
    EXPECT_LE(r.bound, 1e-6) << cs.label;
  }
}
