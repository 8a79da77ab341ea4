#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"
#include "support/oracles.hpp"

using namespace sewma;
using namespace sewma::numerics;

TEST(Chi2Pdf, ValuesAtOrigin) {
  EXPECT_DOUBLE_EQ(chi2_pdf(0.0, 2.0), 0.5);
  EXPECT_EQ(chi2_pdf(0.0, 4.0), 0.0);
  EXPECT_EQ(chi2_pdf(-1.0, 4.0), 0.0);
}

TEST(Chi2Pdf, MatchesGammaKernel) {
  EXPECT_NEAR(chi2_pdf(4.0, 4.0), oracle::chi2_pdf(4.0, 4.0), 1e-12);
  EXPECT_NEAR(chi2_pdf(4.0, 4.0), std::exp(-2.0), 1e-15);  // x e^{-x/2} / 4
  EXPECT_NEAR(chi2_pdf(150.0, 200.0), oracle::chi2_pdf(150.0, 200.0), 1e-14);
}

TEST(Chi2Pdf, RejectsNonPositiveDf) {
  EXPECT_THROW(chi2_pdf(1.0, 0.0), DomainError);
  EXPECT_THROW(chi2_cdf(1.0, -1.0), DomainError);
  EXPECT_THROW(chi2_quantile(0.5, 0.0), DomainError);
}

TEST(Chi2Cdf, Limits) {
  EXPECT_EQ(chi2_cdf(0.0, 7.0), 0.0);
  EXPECT_NEAR(chi2_cdf(1e4, 7.0), 1.0, 1e-15);
}

TEST(Chi2Cdf, IsAntiderivativeOfPdf) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> df_dist(1.0, 60.0);
  for (int i = 0; i < 60; ++i) {
    const double df = df_dist(rng);
    const double x = std::uniform_real_distribution<double>(0.01, 3.0 * df + 10.0)(rng);
    EXPECT_NEAR(chi2_cdf(x, df), oracle::chi2_cdf(x, df), 1e-10) << "x=" << x << " df=" << df;
  }
  for (double df : {200.0, 1000.0}) {
    for (double x : {0.7 * df, df, 1.3 * df}) EXPECT_NEAR(chi2_cdf(x, df), oracle::chi2_cdf(x, df), 1e-10);
  }
}

TEST(Chi2Cdf, MedianOfFourDf) {
  const double median = oracle::chi2_quantile(0.5, 4.0);
  EXPECT_NEAR(chi2_cdf(median, 4.0), 0.5, 1e-10);
}

TEST(Chi2Sf, UpperTailKeepsRelativeAccuracy) {
  for (double df : {4.0, 200.0}) {
    for (double x : {2.0 * df + 30.0, 3.0 * df + 60.0}) {
      const double expected = oracle::chi2_sf(x, df);
      EXPECT_NEAR(chi2_sf(x, df) / expected, 1.0, 1e-9) << "x=" << x << " df=" << df;
    }
    EXPECT_NEAR(chi2_sf(df, df) + chi2_cdf(df, df), 1.0, 1e-15);
  }
}

TEST(Chi2Quantile, PhaseIUpperCut) {
  const double cut = chi2_quantile(1.0 - 1e-10, 200.0) / 200.0;
  EXPECT_NEAR(cut, 1.773, 5e-4);
}

TEST(Chi2Quantile, ExponentialMedian) { EXPECT_NEAR(chi2_quantile(0.5, 2.0), 2.0 * std::log(2.0), 1e-12); }

TEST(Chi2Quantile, RoundTrip) {
  EXPECT_NEAR(chi2_cdf(chi2_quantile(0.95, 4.0), 4.0), 0.95, 1e-10);
  for (double df : {1.0, 4.0, 9.0, 40.0, 200.0}) {
    for (double p : {1e-10, 1e-4, 0.1, 0.5, 0.9, 1.0 - 1e-6, 1.0 - 1e-10}) {
      EXPECT_NEAR(chi2_cdf(chi2_quantile(p, df), df), p, 1e-10) << "p=" << p << " df=" << df;
    }
    for (double x : {0.1 * df, 0.5 * df, df, 2.0 * df}) {
      const double p = chi2_cdf(x, df);
      if (p < 1e-12 || p > 1.0 - 1e-9) continue;  // not invertible in double precision
      EXPECT_NEAR(chi2_quantile(chi2_cdf(x, df), df), x, 1e-8 * std::max(1.0, x));
    }
  }
}

TEST(Chi2Quantile, AgreesWithBisection) {
  for (double p : {0.01, 0.25, 0.75}) EXPECT_NEAR(chi2_quantile(p, 6.0), oracle::chi2_quantile(p, 6.0), 1e-9);
}

TEST(Chi2Quantile, RejectsOutOfRangeProbability) {
  EXPECT_THROW(chi2_quantile(0.0, 4.0), DomainError);
  EXPECT_THROW(chi2_quantile(1.0, 4.0), DomainError);
}

TEST(GaussLegendre, SingleNode) {
  const auto rule = gauss_legendre(1, -1.0, 1.0);
  ASSERT_EQ(rule.nodes.size(), 1u);
  EXPECT_NEAR(rule.nodes[0], 0.0, 1e-16);
  EXPECT_NEAR(rule.weights[0], 2.0, 1e-15);
}

TEST(GaussLegendre, RuleInvariants) {
  for (int n : {2, 7, 60, 150}) {
    const auto rule = gauss_legendre(n, 0.3, 2.1);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      EXPECT_GT(rule.nodes[i], 0.3);
      EXPECT_LT(rule.nodes[i], 2.1);
      if (i) {
        EXPECT_GT(rule.nodes[i], rule.nodes[i - 1]);
      }
      EXPECT_GT(rule.weights[i], 0.0);
      sum += rule.weights[i];
    }
    EXPECT_NEAR(sum / 1.8, 1.0, 1e-12);
  }
}

TEST(GaussLegendre, PolynomialExactness) {
  const auto rule = gauss_legendre(60, 0.0, 1.0);
  double fifth = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) fifth += rule.weights[i] * std::pow(rule.nodes[i], 5);
  EXPECT_NEAR(fifth, 1.0 / 6.0, 1e-14);

  for (int n : {3, 10, 30}) {
    const auto r = gauss_legendre(n, 0.0, 1.0);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) q += r.weights[i] * std::pow(r.nodes[i], k);
      EXPECT_NEAR(q * (k + 1.0), 1.0, 1e-13) << "n=" << n << " k=" << k;
    }
  }
}

TEST(GaussLegendre, ScaledChiSquareDensityMass) {
  const double k = 200.0;
  const double cut = chi2_quantile(1.0 - 1e-10, k) / k;
  const auto rule = gauss_legendre(60, 0.0, cut);
  double mass = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) mass += rule.weights[i] * k * chi2_pdf(k * rule.nodes[i], k);
  EXPECT_NEAR(mass, chi2_cdf(k * cut, k), 1e-12);
  EXPECT_NEAR(mass, 1.0 - 1e-10, 1e-12);
}

TEST(GaussLegendre, RejectsEmptyInterval) {
  EXPECT_THROW(gauss_legendre(5, 1.0, 1.0), DomainError);
  EXPECT_THROW(gauss_legendre(0, 0.0, 1.0), DomainError);
}

TEST(Chebyshev, ShiftedValues) {
  EXPECT_DOUBLE_EQ(chebyshev_T_shifted(1, 0.7, 0.0, 2.0), 1.0);
  EXPECT_NEAR(chebyshev_T_shifted(2, 2.0, 0.0, 2.0), 1.0, 1e-15);
  EXPECT_NEAR(chebyshev_T_shifted(5, 1.0, 0.0, 2.0), 1.0, 1e-15);
  EXPECT_THROW(chebyshev_T_shifted(3, 2.5, 0.0, 2.0), DomainError);
}

TEST(Chebyshev, ThreeTermRecurrence) {
  const double lo = 0.4, hi = 1.6;
  for (double z : {0.4, 0.55, 1.0, 1.33, 1.6}) {
    const double x = (2.0 * z - (hi + lo)) / (hi - lo);
    for (int s = 2; s < 40; ++s) {
      const double next = chebyshev_T_shifted(s + 1, z, lo, hi);
      const double expected = 2.0 * x * chebyshev_T_shifted(s, z, lo, hi) - chebyshev_T_shifted(s - 1, z, lo, hi);
      EXPECT_NEAR(next, expected, 1e-12);
    }
  }
}

TEST(Chebyshev, Nodes) {
  const auto one = chebyshev_nodes(1, 0.0, 2.0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one[0], 1.0, 1e-15);

  const auto two = chebyshev_nodes(2, -1.0, 1.0);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(two[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(two[1], -std::sqrt(0.5), 1e-15);

  const double hi = 1.6453;
  const auto fifty = chebyshev_nodes(50, 0.0, hi);
  ASSERT_EQ(fifty.size(), 50u);
  for (std::size_t r = 0; r < fifty.size(); ++r) {
    EXPECT_GT(fifty[r], 0.0);
    EXPECT_LT(fifty[r], hi);
    if (r) {
      EXPECT_LT(fifty[r], fifty[r - 1]);
    }
    EXPECT_NEAR(fifty[r] + fifty[49 - r], hi, 1e-14);
  }
}
