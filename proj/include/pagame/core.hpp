#pragma once

// Domain types shared by every part of the repeated principal-agent game:
// configuration, ground-truth reward model, the principal's observation
// history and the normalization that removes the affine ambiguity of the
// agent's reward vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pagame {

using Vector = std::vector<double>;

/// Raised when an operation is handed data of the wrong shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation needs at least one observation and got none.
class EmptyDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for arguments outside the domain of a closed-form quantity.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// How the buffer scale B used by the exploitation incentives is chosen.
enum class BufferMode {
  theoretical,  // B from its closed form (astronomically large in practice)
  fixed,        // a user supplied positive value
  automatic,    // resolved per horizon so that 2 * beta_T == gamma
};

struct GameConfig {
  std::size_t n = 5;           // number of arms
  std::size_t horizon = 1000;  // T
  double r_min = -20.0;
  double r_max = 50.0;
  double gamma = 10.0;
  double theta_max = 100.0;
  double m_pr = 5.0;
  double w = 0.2;
  double m_ag = 10.0;
  double k = 1.0;
  double varsigma = 1e-6;
  double sigma2_ag = 10.0;
  double sigma2_pr = 10.0;
  BufferMode buffer_mode = BufferMode::automatic;
  double buffer_value = 0.0;  // meaningful only for BufferMode::fixed
  std::uint64_t seed = 1;
  std::size_t replicates = 5;

  double reward_span() const { return r_max - r_min; }
  double incentive_lo() const { return r_min; }
  double incentive_hi() const { return r_max + gamma; }

  bool operator==(const GameConfig&) const = default;
};

struct ConfigViolation {
  std::string field;
  std::string message;
};

/// Returns every violated invariant; an empty list means the configuration is
/// usable. Each check only reads the fields it names, except the two coupled
/// checks (T against n, gamma against the reward range) which are written so
/// that repairing one field towards its valid range never trips another.
inline std::vector<ConfigViolation> validate_config(const GameConfig& cfg) {
  std::vector<ConfigViolation> out;
  auto fail = [&](std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  };
  const auto finite = [](double v) { return std::isfinite(v); };

  if (cfg.n < 2) fail("n", "n must be at least 2");
  if (cfg.horizon < std::max<std::size_t>(cfg.n, 2))
    fail("T", "T must be at least n (and at least 2)");
  if (!finite(cfg.r_min) || !finite(cfg.r_max) || cfg.r_max - cfg.r_min < 1.0)
    fail("r_max", "reward range must satisfy r_max - r_min >= 1");
  if (!finite(cfg.gamma) || !(cfg.gamma > 0.0) ||
      !(cfg.gamma <= cfg.r_max - cfg.r_min - 1.0))
    fail("gamma",
         "gamma must satisfy 0 < gamma <= r_max - r_min - 1 "
         "(incentive range [r_min, r_max + gamma])");
  if (!finite(cfg.theta_max) || cfg.theta_max < 0.0)
    fail("theta_max", "theta_max must be finite and non-negative");
  if (!(cfg.m_pr >= 1.0) || !finite(cfg.m_pr)) fail("m_pr", "m_pr must be >= 1");
  if (!(cfg.w > 0.0 && cfg.w < 0.25)) fail("w", "w must lie in (0, 1/4)");
  if (!(cfg.m_ag >= 1.0) || !finite(cfg.m_ag)) fail("m_ag", "m_ag must be >= 1");
  if (!(cfg.k >= 1.0) || !finite(cfg.k)) fail("k", "k must be >= 1");
  if (!(cfg.varsigma > 0.0) || !finite(cfg.varsigma))
    fail("varsigma", "varsigma must be > 0");
  if (!(cfg.sigma2_ag >= 0.0) || !finite(cfg.sigma2_ag))
    fail("sigma2_ag", "sigma2_ag must be a finite non-negative variance");
  if (!(cfg.sigma2_pr >= 0.0) || !finite(cfg.sigma2_pr))
    fail("sigma2_pr", "sigma2_pr must be a finite non-negative variance");
  if (cfg.buffer_mode == BufferMode::fixed &&
      (!(cfg.buffer_value > 0.0) || !finite(cfg.buffer_value)))
    fail("buffer_override", "buffer_override must be a positive real");
  if (cfg.replicates < 1) fail("replicates", "replicates must be >= 1");
  return out;
}

/// Ground-truth means. Only the engine and the metrics may look at these.
struct RewardModel {
  Vector r0;      // agent means
  Vector theta0;  // principal means

  bool operator==(const RewardModel&) const = default;
};

inline std::vector<ConfigViolation> validate_model(const RewardModel& model,
                                                   const GameConfig& cfg) {
  std::vector<ConfigViolation> out;
  if (model.r0.size() != cfg.n || model.theta0.size() != cfg.n) {
    out.push_back({"model", "r0 and theta0 must both have n entries"});
    return out;
  }
  // The estimator only needs the normalized vector inside [-dR, dR]; the
  // shipped five-arm model has one mean just below r_min.
  for (double r : model.r0)
    if (!std::isfinite(r) || std::abs(r - model.r0.front()) > cfg.reward_span()) {
      out.push_back({"model.r0", "every r0_a - r0_1 must lie in [-(r_max - r_min), r_max - r_min]"});
      break;
    }
  for (double th : model.theta0)
    if (!(th >= 0.0 && th <= cfg.theta_max)) {
      out.push_back({"model.theta0", "every theta0 entry must lie in [0, theta_max]"});
      break;
    }
  return out;
}

/// s = r - r_1 * 1.
inline Vector normalize(std::span<const double> r) {
  if (r.empty()) throw DimensionError("normalize: empty reward vector");
  Vector s(r.begin(), r.end());
  const double base = r.front();
  for (double& v : s) v -= base;
  return s;
}

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw DimensionError("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

/// argmax_a (s_a + pi_a), lowest index on ties.
inline std::size_t argmax_sum(std::span<const double> s, std::span<const double> pi) {
  if (s.size() != pi.size() || s.empty())
    throw DimensionError("argmax_sum: length mismatch");
  std::size_t best = 0;
  double best_val = s[0] + pi[0];
  for (std::size_t a = 1; a < s.size(); ++a) {
    const double v = s[a] + pi[a];
    if (v > best_val) {
      best_val = v;
      best = a;
    }
  }
  return best;
}

inline double linf_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("linf_distance: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// One round as the principal sees it. Arms are 0-based in memory.
struct HistoryRecord {
  std::size_t t = 0;
  std::span<const double> pi;
  std::size_t chosen_arm = 0;
  double mu = 0.0;
  bool explored_pr = false;
  bool explored_ag = false;
};

/// Ordered incentive / choice records; the only input of the estimator.
/// Incentive vectors are stored contiguously.
class History {
 public:
  explicit History(std::size_t n,
                   double incentive_lo = -std::numeric_limits<double>::infinity(),
                   double incentive_hi = std::numeric_limits<double>::infinity())
      : n_(n), lo_(incentive_lo), hi_(incentive_hi) {
    if (n_ == 0) throw DimensionError("History: n must be positive");
  }

  void push(std::size_t t, std::span<const double> pi, std::size_t chosen_arm,
            double mu = 0.0, bool explored_pr = false, bool explored_ag = false) {
    if (pi.size() != n_) throw DimensionError("History: incentive length != n");
    if (chosen_arm >= n_) throw std::invalid_argument("History: chosen arm out of range");
    const std::size_t prev = meta_.empty() ? 0 : meta_.back().t;
    if (t <= prev) throw std::invalid_argument("History: step indices must increase from 1");
    for (double p : pi)
      if (!(p >= lo_ && p <= hi_))
        throw std::invalid_argument("History: incentive outside [C_lo, C_hi]");
    incentives_.insert(incentives_.end(), pi.begin(), pi.end());
    meta_.push_back({t, chosen_arm, mu, explored_pr, explored_ag});
  }

  std::size_t arms() const { return n_; }
  std::size_t size() const { return meta_.size(); }
  bool empty() const { return meta_.empty(); }

  std::span<const double> pi(std::size_t i) const {
    return {incentives_.data() + i * n_, n_};
  }
  std::size_t chosen(std::size_t i) const { return meta_[i].chosen_arm; }

  HistoryRecord operator[](std::size_t i) const {
    const auto& m = meta_[i];
    return {m.t, pi(i), m.chosen_arm, m.mu, m.explored_pr, m.explored_ag};
  }

  /// Copy of the first `count` records.
  History prefix(std::size_t count) const {
    History h(n_, lo_, hi_);
    count = std::min(count, size());
    h.incentives_.assign(incentives_.begin(), incentives_.begin() + count * n_);
    h.meta_.assign(meta_.begin(), meta_.begin() + count);
    return h;
  }

 private:
  struct Meta {
    std::size_t t;
    std::size_t chosen_arm;
    double mu;
    bool explored_pr;
    bool explored_ag;
  };
  std::size_t n_;
  double lo_;
  double hi_;
  Vector incentives_;
  std::vector<Meta> meta_;
};

/// Coordinate box for the normalized vector: s_1 = 0, s_a in [lo, hi].
struct Box {
  double lo;
  double hi;

  static Box for_config(const GameConfig& cfg) {
    return {-cfg.reward_span(), cfg.reward_span()};
  }
};

inline double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace pagame
