#pragma once

// Episode orchestration and the experiment harness. The engine is the only
// place where the ground-truth model meets the policies: it samples rewards,
// routes each side only the observations it is entitled to, and computes the
// metrics against the oracle.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pagame/agent.hpp"
#include "pagame/core.hpp"
#include "pagame/principal.hpp"
#include "pagame/rng.hpp"

namespace pagame {

struct TraceStep {
  std::size_t t = 0;
  Vector pi;
  DecisionMode mode = DecisionMode::init;
  std::size_t chosen_arm = 0;  // 0-based
  double mu = 0.0;
  double rho = 0.0;
  double linf_error = std::numeric_limits<double>::quiet_NaN();  // set when s_hat was refreshed
  double regret_increment = 0.0;
  double regret_cum = 0.0;
  bool agent_correct = false;
  bool explored_ag = false;
};

struct Trace {
  std::vector<TraceStep> steps;
  IncentiveDecision oracle;
  double oracle_value = 0.0;
  std::optional<Vector> final_s_hat;
  double linf_final = std::numeric_limits<double>::quiet_NaN();
  double l1_final = std::numeric_limits<double>::quiet_NaN();
  // l1 distance of the exploitation payment the policy would offer at T.
  double l1_exploit_final = std::numeric_limits<double>::quiet_NaN();

  std::size_t horizon() const { return steps.size(); }
  double regret_final() const { return steps.empty() ? 0.0 : steps.back().regret_cum; }
};

/// sum_a |pi_a - oracle_a|.
inline double l1_policy_distance(std::span<const double> pi, std::span<const double> oracle) {
  if (pi.size() != oracle.size()) throw DimensionError("l1_policy_distance: length mismatch");
  double d = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) d += std::abs(pi[a] - oracle[a]);
  return d;
}

/// Prefix sums of the per-step regret increments.
inline Vector cumulative_regret(const Trace& trace) {
  Vector curve(trace.steps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    acc += trace.steps[i].regret_increment;
    curve[i] = acc;
  }
  return curve;
}

/// Number of explore-mode rounds of the trace in [k~, t-1].
inline std::size_t empirical_eta(const Trace& trace, std::size_t k_tilde, std::size_t t) {
  const std::size_t len = trace.steps.size();
  std::unique_ptr<bool[]> flags(new bool[len]);
  for (std::size_t i = 0; i < len; ++i) flags[i] = trace.steps[i].mode == DecisionMode::explore;
  return empirical_eta(std::span<const bool>(flags.get(), len), k_tilde, t);
}

/// 1{chosen != argmax(s0 + pi)} for every step of the trace.
inline std::vector<bool> error_indicators(const Trace& trace) {
  std::vector<bool> wrong(trace.steps.size());
  for (std::size_t i = 0; i < wrong.size(); ++i) wrong[i] = !trace.steps[i].agent_correct;
  return wrong;
}

namespace detail {

inline double gaussian(Rng& rng, double mean, double variance) {
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
  return mean + std::sqrt(variance) * z;
}

}  // namespace detail

/// Plays T rounds. The principal sees (pi, chosen arm, mu); the agent sees
/// (pi, its own arm, rho). Rewards come from the environment stream of `seed`.
inline Trace run_episode(const GameConfig& cfg, const RewardModel& model,
                         IncentivePolicy& policy, Agent& agent, std::uint64_t seed) {
  if (auto v = validate_config(cfg); !v.empty())
    throw std::invalid_argument("run_episode: invalid config (" + v.front().message + ")");
  if (auto v = validate_model(model, cfg); !v.empty())
    throw std::invalid_argument("run_episode: invalid model (" + v.front().message + ")");

  const Vector s0 = normalize(model.r0);
  const auto range = IncentiveRange::for_config(cfg);
  Rng env = make_rng(seed, Stream::environment);

  Trace trace;
  trace.oracle = oracle_incentives(model.theta0, s0, cfg.varsigma, range);
  trace.oracle_value = oracle_value(model.theta0, trace.oracle);
  trace.steps.reserve(cfg.horizon);

  double cum = 0.0;
  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    try {
      IncentiveDecision d = policy.decide(t);
      if (d.pi.size() != cfg.n) throw DimensionError("policy returned an incentive of wrong length");
      for (double& v : d.pi) v = clip(v, range.lo, range.hi);

      TraceStep step;
      step.t = t;
      step.mode = d.mode;
      step.chosen_arm = agent.decide(t, d.pi);
      if (step.chosen_arm >= cfg.n) throw std::out_of_range("agent chose an arm out of range");
      step.explored_ag = agent.explored_last();
      step.rho = detail::gaussian(env, model.r0[step.chosen_arm], cfg.sigma2_ag);
      step.mu = detail::gaussian(env, model.theta0[step.chosen_arm], cfg.sigma2_pr);

      agent.observe(t, step.chosen_arm, step.rho);
      policy.observe(t, d.pi, step.chosen_arm, step.mu);

      if (d.estimate) step.linf_error = linf_distance(s0, d.estimate->s_hat);
      step.regret_increment = trace.oracle_value - net_value(model.theta0, d.pi, step.chosen_arm);
      cum += step.regret_increment;
      step.regret_cum = cum;
      step.agent_correct = step.chosen_arm == argmax_sum(s0, d.pi);
      step.pi = std::move(d.pi);
      trace.steps.push_back(std::move(step));
    } catch (const std::exception& e) {
      throw std::runtime_error("episode at t=" + std::to_string(t) + ": " + e.what());
    }
  }

  trace.l1_final = l1_policy_distance(trace.steps.back().pi, trace.oracle.pi);
  trace.final_s_hat = policy.final_estimate();
  if (trace.final_s_hat) {
    trace.linf_final = linf_distance(s0, *trace.final_s_hat);
    if (auto* eg = dynamic_cast<EpsilonGreedyPrincipal*>(&policy)) {
      const double beta = buffer_at(eg->buffer_scale(), cfg.horizon, cfg.w);
      const auto exploit = exploitation_incentives(eg->state().theta_hat, *trace.final_s_hat, beta,
                                                   range);
      trace.l1_exploit_final = l1_policy_distance(exploit.pi, trace.oracle.pi);
    }
  } else {
    trace.l1_exploit_final = trace.l1_final;
  }
  return trace;
}

/// The reference pairing: epsilon-greedy principal against the epsilon-greedy
/// agent, each on its own child stream of `seed`.
inline Trace run_episode(const GameConfig& cfg, const RewardModel& model, std::uint64_t seed,
                         const SolveSchedule& schedule = {}) {
  EpsilonGreedyPrincipal principal(cfg, derive_seed(seed, static_cast<std::uint64_t>(Stream::principal)),
                                   schedule);
  EpsilonGreedyAgent agent(cfg.n, cfg.m_ag,
                           derive_seed(seed, static_cast<std::uint64_t>(Stream::agent)));
  return run_episode(cfg, model, principal, agent, seed);
}

// ---------------------------------------------------------------------------
// Experiments

/// Runs fn(0..count-1) on up to `jobs` threads. The first exception is
/// rethrown after all workers stop.
inline void parallel_for(std::size_t count, std::size_t jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : workers) th.join();
  if (error) std::rethrow_exception(error);
}

struct ReplicateResult {
  std::size_t n = 0;
  std::size_t horizon = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double linf_final = std::numeric_limits<double>::quiet_NaN();
  double l1_final = std::numeric_limits<double>::quiet_NaN();
  double l1_exploit_final = std::numeric_limits<double>::quiet_NaN();
  double regret_final = std::numeric_limits<double>::quiet_NaN();
  double wallclock_s = std::numeric_limits<double>::quiet_NaN();
  std::shared_ptr<const Trace> trace;  // kept only when requested
};

struct MetricSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();     // sample std, 0 for one value
  double stderr_ = std::numeric_limits<double>::quiet_NaN();  // std / sqrt(count)
  std::size_t count = 0;
};

inline MetricSummary summarize(std::span<const double> values) {
  MetricSummary m;
  double sum = 0.0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++m.count;
    }
  if (m.count == 0) return m;
  m.mean = sum / static_cast<double>(m.count);
  double ss = 0.0;
  for (double v : values)
    if (std::isfinite(v)) ss += (v - m.mean) * (v - m.mean);
  m.std = m.count > 1 ? std::sqrt(ss / static_cast<double>(m.count - 1)) : 0.0;
  m.stderr_ = m.std / std::sqrt(static_cast<double>(m.count));
  return m;
}

inline double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

struct ResultTable {
  GameConfig config;
  std::vector<ReplicateResult> rows;  // sorted by replicate

  MetricSummary metric(double ReplicateResult::*field) const {
    Vector v;
    for (const auto& r : rows)
      if (r.ok) v.push_back(r.*field);
    return summarize(v);
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) {
      return !r.ok;
    }));
  }
};

struct ExperimentOptions {
  SolveSchedule schedule{};
  std::size_t jobs = 1;
  bool keep_traces = false;
};

/// Seed of replicate i: derive_seed(master, i).
inline std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate) {
  return derive_seed(master, replicate);
}

inline ReplicateResult run_replicate(const GameConfig& cfg, const RewardModel& model,
                                     std::size_t replicate, const ExperimentOptions& opt) {
  ReplicateResult r;
  r.n = cfg.n;
  r.horizon = cfg.horizon;
  r.replicate = replicate;
  r.seed = replicate_seed(cfg.seed, replicate);
  const auto start = std::chrono::steady_clock::now();
  try {
    auto trace = std::make_shared<Trace>(run_episode(cfg, model, r.seed, opt.schedule));
    r.linf_final = trace->linf_final;
    r.l1_final = trace->l1_final;
    r.l1_exploit_final = trace->l1_exploit_final;
    r.regret_final = trace->regret_final();
    r.ok = true;
    if (opt.keep_traces) r.trace = std::move(trace);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Runs cfg.replicates independent episodes. Failed replicates are recorded,
/// not thrown.
inline ResultTable run_experiment(const GameConfig& cfg, const RewardModel& model,
                                  const ExperimentOptions& opt = {}) {
  if (cfg.replicates < 1) throw std::invalid_argument("run_experiment: replicates must be >= 1");
  ResultTable table;
  table.config = cfg;
  table.rows.resize(cfg.replicates);
  parallel_for(cfg.replicates, opt.jobs,
               [&](std::size_t i) { table.rows[i] = run_replicate(cfg, model, i, opt); });
  return table;
}

/// One experiment per horizon; all (T, replicate) pairs share the thread pool.
inline std::vector<ResultTable> run_sweep(const GameConfig& cfg, const RewardModel& model,
                                          std::span<const std::size_t> horizons,
                                          const ExperimentOptions& opt = {}) {
  if (horizons.empty()) throw std::invalid_argument("run_sweep: empty horizon list");
  std::vector<ResultTable> tables(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    tables[i].config = cfg;
    tables[i].config.horizon = horizons[i];
    tables[i].rows.resize(cfg.replicates);
  }
  // Longest episodes first so the pool drains evenly.
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t i = 0; i < horizons.size(); ++i)
    for (std::size_t r = 0; r < cfg.replicates; ++r) work.emplace_back(i, r);
  std::stable_sort(work.begin(), work.end(), [&](const auto& a, const auto& b) {
    return horizons[a.first] > horizons[b.first];
  });
  parallel_for(work.size(), opt.jobs, [&](std::size_t w) {
    const auto [i, r] = work[w];
    tables[i].rows[r] = run_replicate(tables[i].config, model, r, opt);
  });
  return tables;
}

}  // namespace pagame
