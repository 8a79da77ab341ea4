#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sewma/conditional.hpp"
#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"
#include "sewma/simulation.hpp"
#include "sewma/unconditional.hpp"

using namespace sewma;

namespace {

const ChartConfig kUpper{0.1, 5, Sided::Upper, 1.0};

double z_score(double estimate, double expected, double se) { return std::fabs(estimate - expected) / se; }

}  // namespace

TEST(PhaseI, ChiSquareModeMatchesScaledChiSquare) {
  const auto phase1 = PhaseIConfig::make(50, 5);
  auto rng = mc::replication_rng(3, 0);
  const int draws = 1'000'000;
  std::vector<double> x(draws);
  double sum = 0.0, sum_sq = 0.0;
  for (auto& v : x) {
    v = mc::simulate_phase1_estimate(phase1, 5, rng);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  EXPECT_LT(z_score(mean, 1.0, std::sqrt(2.0 / 200.0 / draws)), 4.0);
  EXPECT_NEAR(var / (2.0 / 200.0), 1.0, 0.01);

  std::sort(x.begin(), x.end());
  double ks = 0.0;
  for (int i = 0; i < draws; i += 97) {
    const double f = numerics::chi2_cdf(200.0 * x[i], 200.0);
    ks = std::max({ks, std::fabs(f - static_cast<double>(i) / draws), std::fabs(f - (i + 1.0) / draws)});
  }
  EXPECT_LT(ks, 1.63 / std::sqrt(static_cast<double>(draws)));  // 1% critical value
}

TEST(PhaseI, RawNormalsAgreeWithChiSquareMode) {
  const auto phase1 = PhaseIConfig::make(10, 5);
  auto a = mc::replication_rng(5, 0);
  auto b = mc::replication_rng(5, 1);
  const int draws = 200'000;
  double ma = 0.0, mb = 0.0, va = 0.0, vb = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = mc::simulate_phase1_estimate(phase1, 5, a, mc::PhaseIMode::ChiSquare);
    const double y = mc::simulate_phase1_estimate(phase1, 5, b, mc::PhaseIMode::RawNormals);
    ma += x, mb += y, va += x * x, vb += y * y;
  }
  ma /= draws, mb /= draws;
  va = va / draws - ma * ma;
  vb = vb / draws - mb * mb;
  const double se = std::sqrt(2.0 * (2.0 / 40.0) / draws);
  EXPECT_LT(z_score(ma, mb, se), 4.0);
  EXPECT_NEAR(va / vb, 1.0, 0.02);
  EXPECT_NEAR(vb / (2.0 / 40.0), 1.0, 0.02);
}

TEST(Simulation, SpecValidation) {
  mc::SimulationSpec spec;
  spec.replications = 0;
  EXPECT_THROW(estimate_unconditional(spec), DomainError);
  spec = {};
  spec.sigma = -1.0;
  EXPECT_THROW(estimate_unconditional(spec), DomainError);
  spec = {};
  spec.replications = 1000;
  spec.l_cap = 100;
  const auto rl = estimate_unconditional(spec);
  EXPECT_THROW(rl.sf(101), DomainError);
}

TEST(Simulation, DeterministicAndScheduleIndependent) {
  mc::SimulationSpec spec;
  spec.config = kUpper;
  spec.phase1 = PhaseIConfig::make(20, 5);
  spec.limits = Limits::upper_only(1.6453);
  spec.replications = 4000;
  spec.l_cap = 5000;
  spec.seed = 99;
  const auto a = estimate_unconditional(spec);
  const auto b = estimate_unconditional(spec);
  spec.parallel = true;
  const auto c = estimate_unconditional(spec);
  EXPECT_EQ(a.run_lengths, b.run_lengths);
  EXPECT_EQ(a.run_lengths, c.run_lengths);
  EXPECT_EQ(a.censored_count, c.censored_count);
  spec.seed = 100;
  EXPECT_NE(estimate_unconditional(spec).run_lengths, a.run_lengths);
}

TEST(Simulation, ShewhartRunLengthIsGeometric) {
  const ChartConfig shewhart{1.0, 5, Sided::Upper, 1.0};
  const Limits limits = Limits::upper_only(2.5);
  const double stay = numerics::chi2_cdf(4.0 * 2.5, 4.0);
  mc::SimulationSpec spec;
  spec.config = shewhart;
  spec.limits = limits;
  spec.replications = 100'000;
  spec.l_cap = 10'000;
  const auto rl = estimate_unconditional(spec);
  for (std::uint64_t l : {1u, 5u, 20u, 60u}) {
    EXPECT_LT(z_score(rl.sf(l), std::pow(stay, l), rl.sf_standard_error(l)), 4.0) << l;
  }
  const auto arl = rl.arl();
  EXPECT_FALSE(arl.lower_bound_only);
  EXPECT_LT(z_score(arl.mean, 1.0 / (1.0 - stay), arl.standard_error), 4.0);
}

TEST(Simulation, KnownCaseArlBenchmarks) {
  mc::SimulationSpec spec;
  spec.config = kUpper;
  spec.limits = Limits::upper_only(1.4781);
  spec.replications = 20'000;
  spec.seed = 7;
  auto arl = estimate_unconditional(spec).arl();
  EXPECT_LT(z_score(arl.mean, arl_conditional(kUpper, 1.0, spec.limits), arl.standard_error), 4.0);

  spec.limits = Limits::upper_only(1.6453);
  spec.sigma = 1.5;
  arl = estimate_unconditional(spec).arl();
  EXPECT_LT(z_score(arl.mean, 8.05, arl.standard_error), 4.0);
}

TEST(Simulation, DesignPointUnconditionalCdf) {
  mc::SimulationSpec spec;
  spec.config = kUpper;
  spec.phase1 = PhaseIConfig::make(50, 5);
  spec.limits = Limits::upper_only(1.719846);
  spec.replications = 20'000;
  spec.l_cap = 1000;
  const auto rl = estimate_unconditional(spec);
  EXPECT_LT(z_score(rl.cdf(1000), 0.25, rl.sf_standard_error(1000)), 4.0);
  const auto sf = sf_unconditional(1000, kUpper, *spec.phase1, 1.0, spec.limits);
  for (std::uint64_t l : {50u, 200u, 500u}) EXPECT_LT(z_score(rl.sf(l), sf[l - 1], rl.sf_standard_error(l)), 4.0);
}

TEST(Simulation, RawNormalPhaseIMatchesMixedSurvival) {
  const ChartConfig two{0.2, 5, Sided::TwoSided, 1.0};
  mc::SimulationSpec spec;
  spec.config = two;
  spec.phase1 = PhaseIConfig::make(20, 5);
  spec.phase1_mode = mc::PhaseIMode::RawNormals;
  spec.limits = Limits::two_sided(0.3947, 2.3077);
  spec.sigma = 1.2;
  spec.replications = 20'000;
  spec.l_cap = 400;
  const auto rl = estimate_unconditional(spec);
  const auto sf = sf_unconditional(400, two, *spec.phase1, 1.2, spec.limits);
  for (std::uint64_t l : {10u, 100u, 400u}) EXPECT_LT(z_score(rl.sf(l), sf[l - 1], rl.sf_standard_error(l)), 4.0);
}

TEST(Simulation, CensoringAndLowerBound) {
  mc::SimulationSpec spec;
  spec.config = kUpper;
  spec.phase1 = PhaseIConfig::make(10, 5);
  spec.limits = Limits::upper_only(1.4781);
  spec.replications = 5000;
  spec.l_cap = 100'000;
  const auto rl = estimate_unconditional(spec);
  EXPECT_NEAR(rl.censored_fraction(), 0.1, 0.02);
  EXPECT_NEAR(rl.sf(spec.l_cap), rl.censored_fraction(), 1e-15);
  EXPECT_TRUE(rl.arl().lower_bound_only);
}

TEST(Simulation, UnadjustedLimitsRaiseEarlyAlarms) {
  mc::SimulationSpec spec;
  spec.config = kUpper;
  spec.phase1 = PhaseIConfig::make(20, 5);
  spec.limits = Limits::upper_only(1.6453);
  spec.replications = 20'000;
  spec.l_cap = 1000;
  const auto rl = estimate_unconditional(spec);
  EXPECT_GT(rl.cdf(1000) - 4.0 * rl.sf_standard_error(1000), 0.25);
}
