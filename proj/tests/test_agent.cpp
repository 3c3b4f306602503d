#include <gtest/gtest.h>

#include <cmath>

#include "pagame/agent.hpp"
#include "test_util.hpp"

using namespace pagame;

TEST(AgentExplorationProb, CapHoldsUpToSquaredScale) {
  for (std::size_t t = 1; t <= 100; ++t) EXPECT_EQ(agent_exploration_prob(t, 10.0), 1.0) << t;
  EXPECT_LT(agent_exploration_prob(101, 10.0), 1.0);
  for (std::size_t t = 1; t < 10000; ++t)
    EXPECT_GE(agent_exploration_prob(t, 10.0), agent_exploration_prob(t + 1, 10.0));
  for (double m : {1.0, 2.0, 7.0}) {
    const auto last = static_cast<std::size_t>(m * m);
    EXPECT_EQ(agent_exploration_prob(last, m), 1.0);
    EXPECT_LT(agent_exploration_prob(last + 1, m), 1.0);
  }
  EXPECT_THROW(agent_exploration_prob(0, 10.0), DomainError);
}

TEST(AgentStep, InitializationPlaysArmT) {
  EpsilonGreedyAgentState st(5, 10.0, 1);
  const Vector pi{60, 0, 0, 0, 0};
  EXPECT_EQ(agent_step(st, 2, pi), 1u);
  EXPECT_EQ(agent_step(st, 5, pi), 4u);
  EXPECT_FALSE(st.last_explored);
  EXPECT_THROW(agent_step(st, 6, Vector{0, 0}), DimensionError);
}

TEST(AgentStep, GreedyChoiceUsesEstimatesPlusIncentives) {
  EpsilonGreedyAgentState st(2, 0.0, 1);  // no exploration after initialization
  EXPECT_EQ(agent_step(st, 3, Vector{0, 5}), 1u);
  st.s_hat_ag = {10, 0};
  EXPECT_EQ(agent_step(st, 4, Vector{0, 5}), 0u);
  st.s_hat_ag = {5, 0};
  EXPECT_EQ(agent_step(st, 5, Vector{0, 5}), 0u);  // tie goes to the lower index
}

TEST(AgentStep, SampleMeansTrackOwnRewards) {
  EpsilonGreedyAgentState st(2, 10.0, 1);
  agent_observe(st, 1, 2.0);
  agent_observe(st, 1, 5.0);
  EXPECT_DOUBLE_EQ(st.s_hat_ag[1], 3.5);
  EXPECT_EQ(st.counts[1], 2u);

  Rng rng(4);
  std::normal_distribution<double> rho(-24.0, std::sqrt(10.0));
  EpsilonGreedyAgentState big(1, 10.0, 1);
  for (int i = 0; i < 10000; ++i) agent_observe(big, 0, rho(rng));
  EXPECT_LT(std::abs(big.s_hat_ag[0] + 24.0), 0.2);
}

TEST(AgentStep, ExplorationIsUniformOverArms) {
  EpsilonGreedyAgentState st(4, 1e9, 8);  // always explores
  std::vector<std::size_t> hits(4, 0);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    ++hits[agent_step(st, 10 + i, Vector(4, 0.0))];
    ASSERT_TRUE(st.last_explored);
  }
  const double sd = std::sqrt(draws * 0.25 * 0.75);
  for (auto h : hits) EXPECT_NEAR(static_cast<double>(h), draws / 4.0, 5 * sd);
}

TEST(MeasurePt, PerfectAgentNeverErrs) {
  const Vector s0{0, -38, -18, 5, 15};
  PerfectAgent agent(s0);
  Rng rng(2);
  std::vector<Vector> pis;
  std::vector<std::size_t> arms;
  for (std::size_t t = 1; t <= 2000; ++t) {
    Vector pi(5);
    for (double& v : pi) v = uniform(rng, -20, 60);
    arms.push_back(agent.decide(t, pi));
    pis.push_back(pi);
  }
  const auto wrong = measure_pt(pis, arms, s0);
  EXPECT_EQ(std::count(wrong.begin(), wrong.end(), true), 0);
}

TEST(MeasurePt, UniformAgentOnSymmetricModel) {
  const std::size_t n = 5, T = 20000;
  const Vector s0(n, 0.0);
  UniformRandomAgent agent(n, 6);
  Rng rng(3);
  std::vector<Vector> pis;
  std::vector<std::size_t> arms;
  for (std::size_t t = 1; t <= T; ++t) {
    Vector pi(n);
    for (double& v : pi) v = uniform(rng, -20, 60);
    arms.push_back(agent.decide(t, pi));
    pis.push_back(pi);
  }
  const auto wrong = measure_pt(pis, arms, s0);
  const double p = (n - 1.0) / n;
  const double sigma = std::sqrt(p * (1 - p) / T);
  EXPECT_NEAR(windowed_rate(wrong, 1, T), p, 3 * sigma);
}

TEST(MeasurePt, LateErrorsComeFromExploration) {
  const Vector r0{0, 10, 20}, s0 = normalize(r0);
  EpsilonGreedyAgent agent(3, 10.0, 5);
  Rng rng(7);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Vector> pis;
  std::vector<std::size_t> arms;
  const std::size_t T = 20000;
  double eps_sum = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    Vector pi(3);
    for (double& v : pi) v = uniform(rng, -20, 60);
    const std::size_t a = agent.decide(t, pi);
    agent.observe(t, a, r0[a] + std::sqrt(10.0) * z(rng));
    arms.push_back(a);
    pis.push_back(pi);
    if (t > T / 2) eps_sum += agent_exploration_prob(t, 10.0);
  }
  const auto wrong = measure_pt(pis, arms, s0);
  const double late = windowed_rate(wrong, T / 2 + 1, T);
  EXPECT_LE(late, eps_sum / (T / 2) + 0.02);
}

TEST(MeasurePt, WindowedStatistics) {
  const std::vector<bool> wrong{true, false, false, true, false, false, false, true};
  EXPECT_DOUBLE_EQ(windowed_rate(wrong, 1, 4), 0.5);
  EXPECT_DOUBLE_EQ(windowed_rate(wrong, 5, 8), 0.25);
  EXPECT_THROW(windowed_rate(wrong, 0, 3), std::out_of_range);
  EXPECT_THROW(windowed_rate(wrong, 3, 9), std::out_of_range);
  // Window [4, 8] for t = 8.
  EXPECT_DOUBLE_EQ(normalized_error_rate(wrong, 8), 0.4 * std::sqrt(8.0) / std::sqrt(std::log(16.0)));
  EXPECT_THROW(measure_pt(std::vector<Vector>(2), std::vector<std::size_t>(3), Vector{0}),
               DimensionError);
}
