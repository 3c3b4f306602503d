#pragma once

// The principal: sample-mean estimates of its own rewards, the epsilon-greedy
// incentive policy with a shrinking buffer, and the full-information oracle
// used as the regret benchmark.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pagame/bounds.hpp"
#include "pagame/core.hpp"
#include "pagame/estimator.hpp"
#include "pagame/rng.hpp"

namespace pagame {

enum class DecisionMode { init, explore, exploit, oracle, scripted };

inline const char* to_string(DecisionMode m) {
  switch (m) {
    case DecisionMode::init: return "init";
    case DecisionMode::explore: return "explore";
    case DecisionMode::exploit: return "exploit";
    case DecisionMode::oracle: return "oracle";
    case DecisionMode::scripted: return "scripted";
  }
  return "?";
}

struct IncentiveRange {
  double lo;
  double hi;
  static IncentiveRange for_config(const GameConfig& cfg) {
    return {cfg.incentive_lo(), cfg.incentive_hi()};
  }
};

struct IncentiveDecision {
  Vector pi;
  DecisionMode mode = DecisionMode::init;
  std::optional<std::size_t> target_arm;
  double beta = 0.0;
  // Set when the estimate was refreshed for this decision.
  std::optional<NormalizedRewardEstimate> estimate;
};

/// epsilon^pr_t = min{1, m_pr / t^(1/2 - w)}.
inline double exploration_prob(std::size_t t, double m_pr, double w) {
  if (t < 1) throw DomainError("exploration_prob: t must be >= 1");
  return std::min(1.0, m_pr / std::pow(static_cast<double>(t), 0.5 - w));
}

/// beta_t = B sqrt(log 2t) / t^(w/3).
inline double buffer_at(double B, std::size_t t, double w) {
  const double x = static_cast<double>(t);
  return B * std::sqrt(std::log(2.0 * x)) / std::pow(x, w / 3.0);
}

/// B such that 2 beta_T == gamma at the configured horizon.
inline double auto_buffer_scale(const GameConfig& cfg) {
  const double T = static_cast<double>(cfg.horizon);
  return cfg.gamma * std::pow(T, cfg.w / 3.0) / (2.0 * std::sqrt(std::log(2.0 * T)));
}

inline double effective_buffer_scale(const GameConfig& cfg) {
  switch (cfg.buffer_mode) {
    case BufferMode::fixed: return cfg.buffer_value;
    case BufferMode::automatic: return auto_buffer_scale(cfg);
    case BufferMode::theoretical:
      return compute_B(cfg.k, compute_k_tilde(cfg.k), cfg.r_min, cfg.r_max, cfg.gamma, cfg.n);
  }
  return 0.0;
}

namespace detail {

// Incentive making `target` the maximizer of s + pi with the given margin;
// zero elsewhere, then clipped into the feasible range.
inline Vector single_arm_incentive(std::span<const double> s, std::size_t target, double margin,
                                   const IncentiveRange& range) {
  double smax = s[0];
  for (double v : s) smax = std::max(smax, v);
  Vector pi(s.size(), 0.0);
  pi[target] = (smax - s[target]) + margin;
  for (double& v : pi) v = clip(v, range.lo, range.hi);
  return pi;
}

// argmax_j theta_j - max_a s_a + s_j - penalty, lowest index on ties.
inline std::size_t best_net_arm(std::span<const double> theta, std::span<const double> s,
                                double penalty) {
  double smax = s[0];
  for (double v : s) smax = std::max(smax, v);
  Vector value(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) value[j] = theta[j] - smax + s[j] - penalty;
  return argmax(value);
}

}  // namespace detail

inline IncentiveDecision exploitation_incentives(std::span<const double> theta_hat,
                                                 std::span<const double> s_hat, double beta_t,
                                                 const IncentiveRange& range) {
  if (theta_hat.size() != s_hat.size() || s_hat.empty())
    throw DimensionError("exploitation_incentives: theta_hat and s_hat lengths differ");
  if (!(beta_t >= 0.0)) throw std::invalid_argument("exploitation_incentives: beta_t must be >= 0");
  IncentiveDecision d;
  const std::size_t target = detail::best_net_arm(theta_hat, s_hat, 2.0 * beta_t);
  d.pi = detail::single_arm_incentive(s_hat, target, 2.0 * beta_t, range);
  d.mode = DecisionMode::exploit;
  d.target_arm = target;
  d.beta = beta_t;
  return d;
}

inline IncentiveDecision oracle_incentives(std::span<const double> theta0,
                                           std::span<const double> s0, double varsigma,
                                           const IncentiveRange& range) {
  if (theta0.size() != s0.size() || s0.empty())
    throw DimensionError("oracle_incentives: theta0 and s0 lengths differ");
  if (!(varsigma > 0.0)) throw std::invalid_argument("oracle_incentives: varsigma must be > 0");
  IncentiveDecision d;
  const std::size_t target = detail::best_net_arm(theta0, s0, 0.0);
  d.pi = detail::single_arm_incentive(s0, target, varsigma, range);
  d.mode = DecisionMode::oracle;
  d.target_arm = target;
  return d;
}

/// Principal's expected net reward when arm `arm` is chosen under `pi`.
inline double net_value(std::span<const double> theta0, std::span<const double> pi,
                        std::size_t arm) {
  double paid = 0.0;
  for (double v : pi) paid += v;
  return theta0[arm] - paid;
}

/// theta0_{j*} - sum of the oracle incentives; the per-round benchmark.
inline double oracle_value(std::span<const double> theta0, const IncentiveDecision& oracle) {
  return net_value(theta0, oracle.pi, *oracle.target_arm);
}

// ---------------------------------------------------------------------------
// Estimate refresh schedule

enum class SolveMode { every_step_exact, hybrid, subgradient_only };

inline const char* to_string(SolveMode m) {
  switch (m) {
    case SolveMode::every_step_exact: return "exact";
    case SolveMode::hybrid: return "hybrid";
    case SolveMode::subgradient_only: return "subgradient";
  }
  return "?";
}

struct SolveSchedule {
  SolveMode mode = SolveMode::hybrid;
  std::size_t refresh_every = 50;  // exact solve on every K-th refresh in hybrid mode
  ExactLpOptions exact{};
  SubgradientOptions between{.max_iters = 60, .patience = 20};
  SubgradientOptions standalone{.max_iters = 400};
};

/// Computes s_hat on demand following the schedule; remembers the previous
/// estimate for warm starts.
class ScheduledEstimator {
 public:
  explicit ScheduledEstimator(SolveSchedule schedule = {}) : schedule_(std::move(schedule)) {}

  NormalizedRewardEstimate refresh(const History& h, const Box& box) {
    NormalizedRewardEstimate est;
    switch (schedule_.mode) {
      case SolveMode::every_step_exact: est = solve_exact_lp(h, box, schedule_.exact, last_); break;
      case SolveMode::hybrid:
        if (refreshes_ % std::max<std::size_t>(schedule_.refresh_every, 1) == 0 || !last_)
          est = solve_exact_lp(h, box, schedule_.exact, last_);
        else
          est = solve_subgradient(h, box, schedule_.between, last_);
        break;
      case SolveMode::subgradient_only:
        est = solve_subgradient(h, box, schedule_.standalone, last_);
        break;
    }
    ++refreshes_;
    last_ = est.s_hat;
    return est;
  }

  /// Best available estimate on `h` for reporting: exact unless the schedule
  /// never solves exactly.
  NormalizedRewardEstimate final_estimate(const History& h, const Box& box) const {
    if (schedule_.mode == SolveMode::subgradient_only)
      return solve_subgradient(h, box, schedule_.standalone, last_);
    return solve_exact_lp(h, box, schedule_.exact, last_);
  }

  const SolveSchedule& schedule() const { return schedule_; }
  std::size_t refreshes() const { return refreshes_; }

 private:
  SolveSchedule schedule_;
  std::size_t refreshes_ = 0;
  std::optional<Vector> last_;
};

// ---------------------------------------------------------------------------
// Epsilon-greedy principal

struct PrincipalState {
  Vector theta_hat;
  std::vector<std::size_t> counts;
  std::optional<NormalizedRewardEstimate> s_hat;
  std::size_t step = 0;
  Rng rng;

  PrincipalState(std::size_t n, std::uint64_t seed) : theta_hat(n, 0.0), counts(n, 0), rng(seed) {}
};

/// Running mean of the principal's rewards on `arm`.
inline void update_theta_hat(PrincipalState& state, std::size_t arm, double mu) {
  if (arm >= state.counts.size()) throw std::invalid_argument("update_theta_hat: arm out of range");
  if (!std::isfinite(mu)) throw std::invalid_argument("update_theta_hat: mu must be finite");
  const double c = static_cast<double>(++state.counts[arm]);
  state.theta_hat[arm] += (mu - state.theta_hat[arm]) / c;
}

/// Forces the Bernoulli exploration draw; used by tests.
enum class ExploreOverride { none, force_explore, force_exploit };

/// One decision of the principal at round t given the records of rounds < t.
inline IncentiveDecision principal_step(PrincipalState& state, std::size_t t,
                                        ScheduledEstimator& estimator, const History& history,
                                        const GameConfig& cfg, double buffer_scale,
                                        ExploreOverride force = ExploreOverride::none) {
  if (t < 1 || t > cfg.horizon) throw std::out_of_range("principal_step: t outside [1, T]");
  const std::size_t n = cfg.n;
  const auto range = IncentiveRange::for_config(cfg);
  state.step = t;
  IncentiveDecision d;

  if (t <= n) {
    d.pi.assign(n, clip(0.0, range.lo, range.hi));
    d.pi[t - 1] = range.hi;
    d.mode = DecisionMode::init;
    d.target_arm = t - 1;
    return d;
  }

  const double eps = exploration_prob(t, cfg.m_pr, cfg.w);
  bool explore = uniform01(state.rng) < eps;
  if (force == ExploreOverride::force_explore) explore = true;
  if (force == ExploreOverride::force_exploit) explore = false;

  if (explore) {
    d.pi.resize(n);
    for (double& v : d.pi) v = uniform(state.rng, range.lo, range.hi);
    d.mode = DecisionMode::explore;
    return d;
  }

  const double beta = buffer_at(buffer_scale, t, cfg.w);
  NormalizedRewardEstimate est;
  try {
    est = estimator.refresh(history, Box::for_config(cfg));
  } catch (const std::exception& e) {
    throw std::runtime_error("principal_step at t=" + std::to_string(t) + ": " + e.what());
  }
  d = exploitation_incentives(state.theta_hat, est.s_hat, beta, range);
  state.s_hat = est;
  d.estimate = std::move(est);
  return d;
}

// ---------------------------------------------------------------------------
// Policy interface used by the engine. A policy only ever sees its own
// incentives, the chosen arm and its own reward realization.

class IncentivePolicy {
 public:
  virtual ~IncentivePolicy() = default;
  virtual IncentiveDecision decide(std::size_t t) = 0;
  virtual void observe(std::size_t t, std::span<const double> pi, std::size_t arm, double mu) = 0;
  /// Estimate of the agent's normalized means at the end of the episode.
  virtual std::optional<Vector> final_estimate() { return std::nullopt; }
  virtual std::string name() const = 0;
};

class EpsilonGreedyPrincipal final : public IncentivePolicy {
 public:
  EpsilonGreedyPrincipal(const GameConfig& cfg, std::uint64_t seed, SolveSchedule schedule = {})
      : cfg_(cfg),
        state_(cfg.n, seed),
        estimator_(std::move(schedule)),
        history_(cfg.n, cfg.incentive_lo(), cfg.incentive_hi()),
        buffer_scale_(effective_buffer_scale(cfg)) {}

  IncentiveDecision decide(std::size_t t) override {
    auto d = principal_step(state_, t, estimator_, history_, cfg_, buffer_scale_, force_);
    last_mode_ = d.mode;
    return d;
  }

  void observe(std::size_t t, std::span<const double> pi, std::size_t arm, double mu) override {
    history_.push(t, pi, arm, mu, last_mode_ == DecisionMode::explore);
    update_theta_hat(state_, arm, mu);
  }

  /// s_hat at the last round, i.e. fitted on every record except that round's.
  std::optional<Vector> final_estimate() override {
    if (history_.size() < 2) return std::nullopt;
    return estimator_.final_estimate(history_.prefix(history_.size() - 1), Box::for_config(cfg_))
        .s_hat;
  }

  std::string name() const override { return "epsilon_greedy"; }

  const PrincipalState& state() const { return state_; }
  const History& history() const { return history_; }
  double buffer_scale() const { return buffer_scale_; }
  void set_override(ExploreOverride f) { force_ = f; }

 private:
  GameConfig cfg_;
  PrincipalState state_;
  ScheduledEstimator estimator_;
  History history_;
  double buffer_scale_;
  ExploreOverride force_ = ExploreOverride::none;
  DecisionMode last_mode_ = DecisionMode::init;
};

/// Full-information benchmark: always offers the oracle incentives.
class OraclePrincipal final : public IncentivePolicy {
 public:
  OraclePrincipal(const GameConfig& cfg, const RewardModel& model)
      : decision_(oracle_incentives(model.theta0, normalize(model.r0), cfg.varsigma,
                                    IncentiveRange::for_config(cfg))) {}

  IncentiveDecision decide(std::size_t) override { return decision_; }
  void observe(std::size_t, std::span<const double>, std::size_t, double) override {}
  std::string name() const override { return "oracle"; }

 private:
  IncentiveDecision decision_;
};

}  // namespace pagame
