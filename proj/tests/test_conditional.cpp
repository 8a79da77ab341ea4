#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sewma/conditional.hpp"
#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"
#include "support/oracles.hpp"

using namespace sewma;

namespace {

const ChartConfig kUpper{0.1, 5, Sided::Upper, 1.0};
const ChartConfig kTwo{0.1, 5, Sided::TwoSided, 1.0};

// Shewhart chart: P(S^2 inside the limits), from the independent oracle.
double shewhart_stay(int n, double sigma2, const Limits& limits) {
  const double k = n - 1.0;
  const double upper = oracle::chi2_cdf(k * limits.upper / sigma2, k);
  const double lower = limits.lower ? oracle::chi2_cdf(k * *limits.lower / sigma2, k) : 0.0;
  return upper - lower;
}

}  // namespace

TEST(TransitionDensity, ZeroBelowSupportEdge) {
  EXPECT_EQ(transition_density(1.0, 0.89, kUpper, 1.0), 0.0);
  EXPECT_THROW(transition_density(1.0, 1.0, kUpper, 0.0), DomainError);
}

TEST(TransitionDensity, IntegratesToOne) {
  double mass = 0.0;
  for (double a = 0.9; a < 5.0; a += 0.05) {
    mass += oracle::integrate([](double z) { return transition_density(1.0, z, kUpper, 1.0); }, a, a + 0.05, 1e-14);
  }
  EXPECT_NEAR(mass, 1.0, 1e-9);
}

TEST(TransitionDensity, MatchesSimulatedOneStepDistribution) {
  // P(1 - h < Z_1 < 1 + h) from 10^7 simulated steps against the integral
  // of the density over the same window.
  const double h = 0.02;
  std::mt19937_64 rng(11);
  std::gamma_distribution<double> chi2(2.0, 2.0);
  const int draws = 10'000'000;
  int inside = 0;
  for (int i = 0; i < draws; ++i) {
    const double z = 0.9 + 0.1 * chi2(rng) / 4.0;
    inside += std::fabs(z - 1.0) < h;
  }
  const double p_mc = static_cast<double>(inside) / draws;
  const double se = std::sqrt(p_mc * (1.0 - p_mc) / draws);
  const double p = oracle::integrate([](double z) { return transition_density(1.0, z, kUpper, 1.0); }, 1.0 - h,
                                     1.0 + h, 1e-13);
  EXPECT_LT(std::fabs(p_mc - p), 4.0 * se);
  // Density at z = 1 from the window average, within 1e-3 relative.
  EXPECT_NEAR(p_mc / (2.0 * h) / transition_density(1.0, 1.0, kUpper, 1.0), 1.0, 5e-3);
}

TEST(FirstStep, ClosedForm) {
  for (double sigma2 : {0.5, 1.0, 2.25}) {
    const double k = 4.0;
    const double up = numerics::chi2_cdf(k / sigma2 * (1.5 - 0.9) / 0.1, k);
    const double lo = numerics::chi2_cdf(k / sigma2 * (0.95 - 0.9) / 0.1, k);
    EXPECT_NEAR(sf_first_step(1.0, kUpper, sigma2, Limits::upper_only(1.5)), up, 1e-14);
    EXPECT_NEAR(sf_first_step(1.0, kTwo, sigma2, Limits::two_sided(0.95, 1.5)), up - lo, 1e-14);

    const auto curve = sf_conditional(kUpper, sigma2, Limits::upper_only(1.5), 3);
    EXPECT_NEAR(curve.sf[0], up, 1e-12);
  }
}

TEST(SfConditional, ShewhartIsGeometric) {
  const ChartConfig shewhart{1.0, 5, Sided::Upper, 1.0};
  const double stay = shewhart_stay(5, 1.0, Limits::upper_only(5.3026));
  const auto curve = sf_conditional(shewhart, 1.0, Limits::upper_only(5.3026), 100);
  for (std::size_t l = 1; l <= 100; ++l) EXPECT_NEAR(curve.at(l), std::pow(stay, l), 1e-12) << "l=" << l;
}

TEST(SfConditional, ShewhartReductionForAnyBasis) {
  for (int n : {3, 5, 10}) {
    for (double sigma2 : {0.5, 1.0, 2.0}) {
      for (int basis : {10, 30, 50}) {
        const ChartConfig upper{1.0, n, Sided::Upper, 1.0};
        const ChartConfig two{1.0, n, Sided::TwoSided, 1.0};
        const Limits lu = Limits::upper_only(2.7);
        const Limits lt = Limits::two_sided(0.2, 2.7);
        const auto cu = sf_conditional(upper, sigma2, lu, 100, basis);
        const auto ct = sf_conditional(two, sigma2, lt, 100, basis);
        const double su = shewhart_stay(n, sigma2, lu), st = shewhart_stay(n, sigma2, lt);
        for (std::size_t l = 1; l <= 100; ++l) {
          EXPECT_NEAR(cu.at(l), std::pow(su, l), 1e-10);
          EXPECT_NEAR(ct.at(l), std::pow(st, l), 1e-10);
        }
      }
    }
  }
}

TEST(SfConditional, MonotoneAndBounded) {
  for (const auto& [config, limits] : {std::pair{kUpper, Limits::upper_only(1.6453)},
                                       std::pair{kTwo, Limits::two_sided(0.5610, 1.7051)}}) {
    for (double sigma2 : {0.25, 1.0, 2.25}) {
      const auto curve = sf_conditional(config, sigma2, limits, 3000);
      double prev = 1.0;
      for (std::size_t l = 1; l <= 3000; ++l) {
        const double p = curve.at(l);
        EXPECT_LE(p, prev);
        EXPECT_GE(p, 0.0);
        prev = p;
      }
    }
  }
}

TEST(SfConditional, GeometricTailInvariant) {
  const auto curve = sf_conditional(kUpper, 1.0, Limits::upper_only(1.4781), 4000);
  ASSERT_TRUE(curve.tail_converged);
  ASSERT_GT(curve.tail_ratio, 0.0);
  ASSERT_LT(curve.tail_ratio, 1.0);
  for (std::size_t l = curve.tail_start; l + 1 < curve.sf.size(); ++l) {
    EXPECT_LT(std::fabs(curve.sf[l] / curve.sf[l - 1] - curve.tail_ratio), 1e-9) << "l=" << l;
  }
}

TEST(SfConditional, QuantileRuleBenchmark) {
  const auto curve = sf_conditional(kUpper, 1.0, Limits::upper_only(1.6453), 1000);
  EXPECT_NEAR(1.0 - curve.at(1000), 0.25, 1e-3);
}

TEST(SfConditional, BasisConvergence) {
  const Limits limits = Limits::upper_only(1.6453);
  const auto a = sf_conditional(kUpper, 1.0, limits, 5000, 40);
  const auto b = sf_conditional(kUpper, 1.0, limits, 5000, 50);
  for (std::size_t l = 1; l <= 5000; ++l) EXPECT_LT(std::fabs(a.at(l) - b.at(l)), 1e-8) << "l=" << l;
}

TEST(SfConditional, MonotoneInUpperLimit) {
  const auto narrow = sf_conditional(kUpper, 1.0, Limits::upper_only(1.5), 2000);
  const auto wide = sf_conditional(kUpper, 1.0, Limits::upper_only(1.55), 2000);
  for (std::size_t l = 1; l <= 2000; ++l) EXPECT_GE(wide.at(l), narrow.at(l));
}

TEST(SfConditional, InstantAbsorptionGivesZeroCurve) {
  const auto curve = sf_conditional(kUpper, 1.0, Limits::upper_only(0.85), 50);
  for (std::size_t l = 1; l <= 50; ++l) EXPECT_EQ(curve.at(l), 0.0);
  EXPECT_DOUBLE_EQ(arl_conditional(kUpper, 1.0, Limits::upper_only(0.85)), 1.0);
}

TEST(SfConditional, TwoSidedSplitsAtKink) {
  const auto basis = CollocationBasis(kTwo, 1.0, Limits::two_sided(0.6259, 1.5496), 50);
  ASSERT_EQ(basis.pieces().size(), 2u);
  EXPECT_NEAR(basis.pieces()[0].lo, 0.6259, 1e-15);
  EXPECT_NEAR(basis.pieces()[0].hi, 0.6259 / 0.9, 1e-15);
  EXPECT_NEAR(basis.pieces()[1].hi, 1.5496, 1e-15);
  EXPECT_EQ(basis.size(), 100u);
  EXPECT_EQ(basis.kernel_matrix().size(), 101u * 100u);
}

TEST(ArlConditional, PublishedBenchmarks) {
  EXPECT_NEAR(arl_conditional(kUpper, 1.0, Limits::upper_only(1.4781)), 500.0, 0.5);
  EXPECT_NEAR(arl_conditional(kTwo, 1.0, Limits::two_sided(0.6259, 1.5496)), 500.0, 0.5);
  EXPECT_NEAR(arl_conditional(kUpper, 1.5 * 1.5, Limits::upper_only(1.6453)), 8.05, 0.02);
  const ChartConfig two05{0.05, 5, Sided::TwoSided, 1.0};
  EXPECT_NEAR(arl_conditional(two05, 0.25, Limits::two_sided(0.6825, 1.4377)), 11.3, 0.05);
  const ChartConfig shewhart{1.0, 5, Sided::Upper, 1.0};
  EXPECT_NEAR(arl_conditional(shewhart, 1.0, Limits::upper_only(5.3026)), 3476.0, 1.0);
}

TEST(ArlConditional, ShewhartClosedForm) {
  const ChartConfig shewhart{1.0, 5, Sided::Upper, 1.0};
  const double stay = shewhart_stay(5, 1.0, Limits::upper_only(5.3026));
  EXPECT_NEAR(arl_conditional(shewhart, 1.0, Limits::upper_only(5.3026)) * (1.0 - stay), 1.0, 1e-9);
}

TEST(ArlConditional, LinearSystemMatchesTailSum) {
  for (double sigma2 : {0.64, 1.0, 1.44}) {
    const double direct = arl_conditional(kTwo, sigma2, Limits::two_sided(0.6259, 1.5496));
    const double summed =
        arl_conditional(kTwo, sigma2, Limits::two_sided(0.6259, 1.5496), {}, ArlMethod::TailSum);
    // The tail ratio is known to ~1e-10, amplified by 1 / (1 - rho) ~ 500.
    EXPECT_NEAR(summed / direct, 1.0, 1e-7);
  }
}

TEST(ArlConditional, UnresolvableRunLengthRaises) {
  // In-control variance far below the limit: P(L = inf) is one to double precision.
  EXPECT_THROW(arl_conditional(kUpper, 0.01, Limits::upper_only(1.9)), DivergenceError);
}

TEST(RlQuantile, MedianRunLength) {
  EXPECT_EQ(rl_quantile_conditional(kUpper, 1.0, Limits::upper_only(1.4781), 0.5), 348u);
  EXPECT_EQ(rl_quantile_conditional(kTwo, 1.0, Limits::two_sided(0.6259, 1.5496), 0.5), 349u);
}

TEST(RlQuantile, ShewhartFormula) {
  const ChartConfig shewhart{1.0, 5, Sided::Upper, 1.0};
  const Limits limits = Limits::upper_only(4.0);
  const double arl = arl_conditional(shewhart, 1.0, limits);
  for (double alpha : {0.1, 0.25, 0.5, 0.9}) {
    const auto expected = static_cast<std::size_t>(std::ceil(std::log(1.0 - alpha) / std::log(1.0 - 1.0 / arl)));
    EXPECT_EQ(rl_quantile_conditional(shewhart, 1.0, limits, alpha), expected) << alpha;
  }
}

TEST(MarkovChain, ShewhartGeometric) {
  const ChartConfig shewhart{1.0, 5, Sided::Upper, 1.0};
  const double stay = shewhart_stay(5, 1.0, Limits::upper_only(5.3026));
  const auto curve = sf_markov_chain(shewhart, 1.0, Limits::upper_only(5.3026), 50, 100);
  for (std::size_t l = 1; l <= 50; ++l) EXPECT_NEAR(curve.at(l), std::pow(stay, l), 1e-10);
}

TEST(MarkovChain, ConvergesTowardCollocation) {
  const Limits limits = Limits::upper_only(1.6453);
  const double reference = sf_conditional(kUpper, 1.0, limits, 1000).at(1000);
  double prev = INFINITY;
  for (int states : {100, 200, 400, 800}) {
    const double err = std::fabs(sf_markov_chain(kUpper, 1.0, limits, 1000, states).at(1000) - reference);
    EXPECT_LT(err, prev) << states;
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}
