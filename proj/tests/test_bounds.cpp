#include <gtest/gtest.h>

#include <cmath>

#include "pagame/bounds.hpp"
#include "pagame/rng.hpp"

using namespace pagame;

TEST(KTilde, SmallestValueSatisfyingTheInequality) {
  EXPECT_EQ(compute_k_tilde(1.0), 2u);
  EXPECT_EQ(compute_k_tilde(2.0), 14u);
  for (double k : {1.0, 1.5, 2.0, 3.0}) {
    const std::size_t kt = compute_k_tilde(k);
    EXPECT_GT(accuracy_margin(k, kt), 0.0);
    if (kt > 2) {
      EXPECT_LE(accuracy_margin(k, kt - 1), 0.0);
    }
  }
  EXPECT_THROW(compute_k_tilde(0.5), DomainError);
}

TEST(PtBound, ValuesAndShape) {
  EXPECT_NEAR(pt_bound(1.0, 2), 0.8325546111576977, 1e-15);
  for (std::size_t t = 2; t < 5000; ++t) EXPECT_GT(pt_bound(1.0, t), pt_bound(1.0, t + 1));
  EXPECT_NEAR(pt_bound(3.0, 100), 3.0 * pt_bound(1.0, 100), 1e-15);
  EXPECT_THROW(pt_bound(2.0, 13), DomainError);
  EXPECT_LT(pt_bound_probability(3.0, 40), 1.0);
  EXPECT_THROW(pt_bound_probability(3.0, 39), DomainError);
}

TEST(BufferScale, ClosedForm) {
  const double margin = accuracy_margin(1.0, 2);
  const double expected = 3.0 * std::pow(220.0, 5) * std::pow(160.0, 1.0 / 6.0) / margin;
  EXPECT_NEAR(compute_B(1.0, 2, -20, 50, 10, 5), expected, 1e-9 * expected);
  EXPECT_THROW(compute_B(2.0, 13, -20, 50, 10, 5), std::invalid_argument);
}

TEST(Lambda, ZeroExplorationGivesTheNegativeDrift) {
  BoundParams p;
  const double drift = 3.0 * (3.0 * 70.0 + 10.0) * std::sqrt(100.0 * std::log(200.0));
  EXPECT_NEAR(lambda_t(p, 0.0, 100), -drift, 1e-9);
}

TEST(Lambda, IncreasesWithExplorationAndChangesSign) {
  BoundParams p;
  p.beta = 5.0;
  double prev = lambda_t(p, 0.0, 1000);
  for (double eta = 10; eta <= 1e6; eta *= 10) {
    const double l = lambda_t(p, eta, 1000);
    EXPECT_GT(l, prev);
    prev = l;
  }
  EXPECT_LT(lambda_t(p, 0.0, 1000), 0.0);
  EXPECT_GT(lambda_t(p, 1e7, 1000), 0.0);
}

TEST(ExpectedEta, SumsCappedExplorationProbabilities) {
  BoundParams p;
  EXPECT_EQ(expected_eta(p, 6), 0.0);  // rounds 1..5 are initialization
  // Rounds 6..11 all have probability 1 for m_pr = 5, w = 0.2.
  EXPECT_DOUBLE_EQ(expected_eta(p, 12), 6.0);
  EXPECT_GT(expected_eta(p, 10000), expected_eta(p, 5000));
}

TEST(EmpiricalEta, CountsExploreRoundsInWindow) {
  const bool all[] = {true, true, true, true, true, true};
  const bool none[] = {false, false, false, false, false, false};
  const bool mixed[] = {false, true, false, true, true, false};
  EXPECT_EQ(empirical_eta(all, 2, 7), 5u);
  EXPECT_EQ(empirical_eta(none, 2, 7), 0u);
  EXPECT_EQ(empirical_eta(mixed, 2, 7), 3u);
  EXPECT_EQ(empirical_eta(mixed, 3, 5), 1u);
  EXPECT_THROW(empirical_eta(mixed, 2, 8), std::invalid_argument);
}

TEST(Concentration, ZeroLambdaReducesToPrefactor) {
  BoundParams p;
  const double beta = 2.0;
  const auto b = concentration_bound(p, 0.0, beta, 100);
  const double expected = 2.0 * std::pow(140.0, 5) / beta;
  EXPECT_NEAR(b.raw, expected, 1e-9 * expected);
  EXPECT_EQ(b.clamped, 1.0);
}

TEST(Concentration, MonotoneInLambdaAndTime) {
  BoundParams p;
  double prev = concentration_bound(p, 0.0, 1.0, 500).raw;
  for (double l = 1e3; l <= 1e6; l *= 2) {
    const double v = concentration_bound(p, l, 1.0, 500).raw;
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_LT(concentration_bound(p, 1e5, 1.0, 100).raw, concentration_bound(p, 1e5, 1.0, 1000).raw);
  EXPECT_THROW(concentration_bound(p, 0.0, 0.0, 10), DomainError);
  EXPECT_THROW(concentration_bound(p, 0.0, 1.0, 1), DomainError);
}

TEST(Concentration, ExponentMatchesHandComputation) {
  BoundParams p;
  p.n = 2;
  p.r_min = 0;
  p.r_max = 5;
  p.gamma = 1;
  const double lambda = 300.0;
  // spread = 32, n = 2, t - 1 = 9.
  const double expo = -2.0 * lambda * lambda / (9.0 * 16.0 * 2.0 * 32.0 * 32.0) - std::log(0.5) +
                      2.0 * std::log(10.0);
  EXPECT_NEAR(concentration_bound(p, lambda, 0.5, 10).raw, 2.0 * std::exp(expo), 1e-9);
}

TEST(RegretBound, TermsAreNonnegativeAndSublinear) {
  BoundParams p;
  double prev_ratio = std::numeric_limits<double>::infinity();
  for (double T : {1e3, 1e6, 1e9}) {
    const auto rb = regret_bound(p, static_cast<std::size_t>(T));
    double sum = 0.0;
    for (double v : rb.terms) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_DOUBLE_EQ(sum, rb.total);
    EXPECT_LT(rb.total / T, prev_ratio);
    prev_ratio = rb.total / T;
  }
  EXPECT_THROW(regret_bound(p, 1), DomainError);
}

TEST(RegretBound, IndividualTermsAtAFixedPoint) {
  BoundParams p;
  const std::size_t T = 1000;
  const auto rb = regret_bound(p, T, 1.0);
  const double x = 1000.0, lg = std::log(2000.0);
  EXPECT_NEAR(rb.terms[0], 12.0 / 2.8 * std::pow(x, 1.0 - 0.2 / 3.0) * std::sqrt(lg), 1e-9);
  EXPECT_NEAR(rb.terms[1], 5.0 * (5 * 80.0 + 100.0) * (2.0 / 1.4 * std::pow(x, 0.7) - 0.6 / 1.4),
              1e-7);
  EXPECT_NEAR(rb.terms[2], 200.0 * std::sqrt(x * lg), 1e-9);
  EXPECT_NEAR(rb.terms[4], 25.0 * 180.0 * std::log(x), 1e-9);
  EXPECT_DOUBLE_EQ(rb.terms[5], 200.0);
  // The closed-form B dominates the first term.
  EXPECT_GT(regret_bound(p, T).terms[0], 1e12);
}

TEST(UniformDifferenceCdf, ClosedFormPoints) {
  const double lo = -20, hi = 60, W = 80;
  EXPECT_DOUBLE_EQ(cdf_uniform_difference(0.0, lo, hi), 0.5);
  EXPECT_DOUBLE_EQ(cdf_uniform_difference(W, lo, hi), 1.0);
  EXPECT_DOUBLE_EQ(cdf_uniform_difference(-W, lo, hi), 0.0);
  EXPECT_DOUBLE_EQ(cdf_uniform_difference(-W / 2, lo, hi), 0.125);
  EXPECT_DOUBLE_EQ(cdf_uniform_difference(W / 2, lo, hi), 0.875);
  EXPECT_THROW(cdf_uniform_difference(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(UniformDifferenceCdf, ContinuousAndMonotone) {
  double prev = 0.0;
  for (double d = -100; d <= 100; d += 0.25) {
    const double v = cdf_uniform_difference(d, -20, 60);
    EXPECT_GE(v, prev);
    EXPECT_LE(v - prev, 0.25 / 80 + 1e-12);
    prev = v;
  }
  for (double edge : {-80.0, 0.0, 80.0})
    EXPECT_NEAR(cdf_uniform_difference(edge - 1e-9, -20, 60),
                cdf_uniform_difference(edge + 1e-9, -20, 60), 1e-9);
}

TEST(UniformDifferenceCdf, MatchesMonteCarlo) {
  Rng rng(12);
  const int N = 1000000;
  std::vector<double> diffs(N);
  for (double& d : diffs) d = uniform(rng, -20, 60) - uniform(rng, -20, 60);
  std::sort(diffs.begin(), diffs.end());
  double sup = 0.0;
  for (int i = 0; i < N; i += 997) {
    const double emp = static_cast<double>(i + 1) / N;
    sup = std::max(sup, std::abs(emp - cdf_uniform_difference(diffs[i], -20, 60)));
  }
  EXPECT_LT(sup, 5e-3);
}
