#pragma once

// The learning agent. The engine talks to agents only through `Agent`: the
// agent sees the offered incentives and its own reward realization, never the
// principal's rewards or estimates.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pagame/core.hpp"
#include "pagame/rng.hpp"

namespace pagame {

class Agent {
 public:
  virtual ~Agent() = default;
  /// Arm (0-based) chosen at round t under incentives pi.
  virtual std::size_t decide(std::size_t t, std::span<const double> pi) = 0;
  virtual void observe(std::size_t t, std::size_t arm, double rho) = 0;
  /// Whether the most recent decision was a random exploration.
  virtual bool explored_last() const { return false; }
  virtual std::string name() const = 0;
};

/// epsilon^ag_t = min{1, m_ag / sqrt(t)}.
inline double agent_exploration_prob(std::size_t t, double m_ag) {
  if (t < 1) throw DomainError("agent_exploration_prob: t must be >= 1");
  return std::min(1.0, m_ag / std::sqrt(static_cast<double>(t)));
}

struct EpsilonGreedyAgentState {
  Vector s_hat_ag;  // sample means of the agent's own rewards
  std::vector<std::size_t> counts;
  double m_ag;
  Rng rng;
  bool last_explored = false;

  EpsilonGreedyAgentState(std::size_t n, double m_ag_, std::uint64_t seed)
      : s_hat_ag(n, 0.0), counts(n, 0), m_ag(m_ag_), rng(seed) {}
};

/// Rounds 1..n play arm t; afterwards explore uniformly with probability
/// epsilon^ag_t, otherwise play argmax(s_hat_ag + pi) (lowest index on ties).
inline std::size_t agent_step(EpsilonGreedyAgentState& state, std::size_t t,
                              std::span<const double> pi) {
  const std::size_t n = state.s_hat_ag.size();
  if (pi.size() != n) throw DimensionError("agent_step: pi length != n");
  if (t < 1) throw std::invalid_argument("agent_step: t must be >= 1");
  state.last_explored = false;
  if (t <= n) return t - 1;
  if (uniform01(state.rng) < agent_exploration_prob(t, state.m_ag)) {
    state.last_explored = true;
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(state.rng);
  }
  return argmax_sum(state.s_hat_ag, pi);
}

inline void agent_observe(EpsilonGreedyAgentState& state, std::size_t arm, double rho) {
  const double c = static_cast<double>(++state.counts.at(arm));
  state.s_hat_ag[arm] += (rho - state.s_hat_ag[arm]) / c;
}

class EpsilonGreedyAgent final : public Agent {
 public:
  EpsilonGreedyAgent(std::size_t n, double m_ag, std::uint64_t seed) : state_(n, m_ag, seed) {}

  std::size_t decide(std::size_t t, std::span<const double> pi) override {
    return agent_step(state_, t, pi);
  }
  void observe(std::size_t, std::size_t arm, double rho) override { agent_observe(state_, arm, rho); }
  bool explored_last() const override { return state_.last_explored; }
  std::string name() const override { return "epsilon_greedy"; }

  const EpsilonGreedyAgentState& state() const { return state_; }

 private:
  EpsilonGreedyAgentState state_;
};

/// Knows its true normalized means and always plays argmax(s0 + pi).
class PerfectAgent final : public Agent {
 public:
  explicit PerfectAgent(Vector s0) : s0_(std::move(s0)) {}
  std::size_t decide(std::size_t, std::span<const double> pi) override { return argmax_sum(s0_, pi); }
  void observe(std::size_t, std::size_t, double) override {}
  std::string name() const override { return "perfect"; }

 private:
  Vector s0_;
};

/// Picks an arm uniformly at random every round.
class UniformRandomAgent final : public Agent {
 public:
  UniformRandomAgent(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed) {}
  std::size_t decide(std::size_t, std::span<const double>) override {
    return std::uniform_int_distribution<std::size_t>(0, n_ - 1)(rng_);
  }
  void observe(std::size_t, std::size_t, double) override {}
  bool explored_last() const override { return true; }
  std::string name() const override { return "uniform"; }

 private:
  std::size_t n_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Instrumentation of the agent's error probability p_t. Needs s0, so it is
// only ever called by the harness.

/// 1{chosen_t != argmax(s0 + pi_t)} for every round.
inline std::vector<bool> measure_pt(std::span<const std::vector<double>> incentives,
                                    std::span<const std::size_t> chosen,
                                    std::span<const double> s0) {
  if (incentives.size() != chosen.size()) throw DimensionError("measure_pt: length mismatch");
  std::vector<bool> wrong(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i)
    wrong[i] = chosen[i] != argmax_sum(s0, incentives[i]);
  return wrong;
}

/// Mean of the indicators of rounds [first, last] (1-based, inclusive).
inline double windowed_rate(const std::vector<bool>& wrong, std::size_t first, std::size_t last) {
  if (first < 1 || last < first || last > wrong.size())
    throw std::out_of_range("windowed_rate: window outside the trace");
  std::size_t hits = 0;
  for (std::size_t t = first; t <= last; ++t) hits += wrong[t - 1] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(last - first + 1);
}

/// p_hat_t * sqrt(t) / sqrt(log 2t) with p_hat over the window [ceil(t/2), t].
inline double normalized_error_rate(const std::vector<bool>& wrong, std::size_t t) {
  const std::size_t first = std::max<std::size_t>(1, (t + 1) / 2);
  const double x = static_cast<double>(t);
  return windowed_rate(wrong, first, t) * std::sqrt(x) / std::sqrt(std::log(2.0 * x));
}

}  // namespace pagame
