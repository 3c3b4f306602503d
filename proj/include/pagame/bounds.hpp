#pragma once

// Closed-form theoretical quantities: the agent-accuracy offset k~, the
// buffer scale B, the concentration and regret bounds, and the cdf of the
// difference of two i.i.d. uniform incentives. All functions are pure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "pagame/core.hpp"

namespace pagame {

/// Smallest integer k~ >= 2 with k * sqrt(log 2k~) < sqrt(k~).
inline std::size_t compute_k_tilde(double k) {
  if (!(k >= 1.0) || !std::isfinite(k)) throw DomainError("compute_k_tilde: k must be >= 1");
  for (std::size_t kt = 2;; ++kt) {
    const double x = static_cast<double>(kt);
    if (k * std::sqrt(std::log(2.0 * x)) < std::sqrt(x)) return kt;
  }
}

/// 1 - k sqrt(log 2k~) / sqrt(k~); positive by the definition of k~.
inline double accuracy_margin(double k, std::size_t k_tilde) {
  const double x = static_cast<double>(k_tilde);
  return 1.0 - k * std::sqrt(std::log(2.0 * x)) / std::sqrt(x);
}

/// B = 3k (3 dR + gamma)^n (32 n)^(1/6) / (1 - k sqrt(log 2k~)/sqrt(k~)).
inline double compute_B(double k, std::size_t k_tilde, double r_min, double r_max, double gamma,
                        std::size_t n) {
  const double denom = accuracy_margin(k, k_tilde);
  if (!(denom > 0.0))
    throw std::invalid_argument("compute_B: k sqrt(log 2k~) must be < sqrt(k~)");
  const double dn = static_cast<double>(n);
  return 3.0 * k * std::pow(3.0 * (r_max - r_min) + gamma, dn) * std::pow(32.0 * dn, 1.0 / 6.0) /
         denom;
}

/// Bound on the agent's error probability, k sqrt(log 2t)/sqrt(t).
inline double pt_bound(double k, std::size_t t) {
  if (t < compute_k_tilde(k)) throw DomainError("pt_bound: t must be >= k~");
  const double x = static_cast<double>(t);
  return k * std::sqrt(std::log(2.0 * x)) / std::sqrt(x);
}

inline double pt_bound_probability(double k, std::size_t t) { return std::min(1.0, pt_bound(k, t)); }

/// Parameters of the bound calculators. alpha has no closed form; every value
/// derived from it holds only up to that constant.
struct BoundParams {
  double k = 1.0;
  std::size_t k_tilde = 2;
  double alpha = 1.0;
  double beta = 1.0;  // estimation radius
  std::size_t n = 5;
  double r_min = -20.0;
  double r_max = 50.0;
  double gamma = 10.0;
  double w = 0.2;
  double m_pr = 5.0;
  double theta_max = 100.0;

  double reward_span() const { return r_max - r_min; }
  double incentive_width() const { return r_max + gamma - r_min; }

  static BoundParams from_config(const GameConfig& cfg, double alpha = 1.0, double beta = 1.0) {
    BoundParams p;
    p.k = cfg.k;
    p.k_tilde = compute_k_tilde(cfg.k);
    p.alpha = alpha;
    p.beta = beta;
    p.n = cfg.n;
    p.r_min = cfg.r_min;
    p.r_max = cfg.r_max;
    p.gamma = cfg.gamma;
    p.w = cfg.w;
    p.m_pr = cfg.m_pr;
    p.theta_max = cfg.theta_max;
    return p;
  }
};

/// lambda_t = 4 alpha margin^2 / 27 * beta^3 * E[eta] - 3k (3 dR + gamma) sqrt(t log 2t).
inline double lambda_t(const BoundParams& p, double expected_eta, std::size_t t) {
  const double margin = accuracy_margin(p.k, p.k_tilde);
  const double x = static_cast<double>(t);
  return 4.0 * p.alpha * margin * margin / 27.0 * p.beta * p.beta * p.beta * expected_eta -
         3.0 * p.k * (3.0 * p.reward_span() + p.gamma) * std::sqrt(x * std::log(2.0 * x));
}

/// Expected number of uniform-exploration rounds in [k~, t-1] under the
/// principal's schedule (initialization rounds are never uniform draws).
inline double expected_eta(const BoundParams& p, std::size_t t) {
  double sum = 0.0;
  for (std::size_t tau = std::max(p.k_tilde, p.n + 1); tau < t; ++tau) {
    const double x = static_cast<double>(tau);
    sum += std::min(1.0, p.m_pr / std::pow(x, 0.5 - p.w));
  }
  return sum;
}

/// Number of explore-mode rounds in [k~, t-1]; explored[tau-1] flags round tau.
inline std::size_t empirical_eta(std::span<const bool> explored, std::size_t k_tilde,
                                 std::size_t t) {
  if (t > explored.size() + 1) throw std::invalid_argument("empirical_eta: trace too short");
  std::size_t count = 0;
  for (std::size_t tau = std::max<std::size_t>(k_tilde, 1); tau + 1 <= t; ++tau)
    if (explored[tau - 1]) ++count;
  return count;
}

struct ProbabilityBound {
  double raw;
  double clamped;  // raw clipped into [0, 1]
};

/// P(||s0 - s_hat_t||_inf > beta) <=
///   2 exp(-2 lambda^2 / ((t-1) 16 n (6 dR + 2 gamma)^2) - log beta + n log(2 dR)).
inline ProbabilityBound concentration_bound(const BoundParams& p, double lambda, double beta,
                                            std::size_t t) {
  if (!(beta > 0.0)) throw DomainError("concentration_bound: beta must be > 0");
  if (t < p.k_tilde || t < 2) throw DomainError("concentration_bound: t must be >= k~");
  const double dR = p.reward_span(), dn = static_cast<double>(p.n);
  const double spread = 6.0 * dR + 2.0 * p.gamma;
  const double expo = -2.0 * lambda * lambda /
                          (static_cast<double>(t - 1) * 16.0 * dn * spread * spread) -
                      std::log(beta) + dn * std::log(2.0 * dR);
  const double raw = 2.0 * std::exp(expo);
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

struct RegretBound {
  std::array<double, 6> terms{};
  double total = 0.0;
};

/// Six-term finite-sample regret bound. `B` defaults to the closed form.
inline RegretBound regret_bound(const BoundParams& p, std::size_t T, double B = -1.0) {
  if (T < p.k_tilde) throw DomainError("regret_bound: T must be >= k~");
  if (!(B > 0.0)) B = compute_B(p.k, p.k_tilde, p.r_min, p.r_max, p.gamma, p.n);
  const double x = static_cast<double>(T), dn = static_cast<double>(p.n);
  const double width = p.incentive_width(), th = p.theta_max, w = p.w;
  const double lg = std::log(2.0 * x);
  const double root6_32 = std::pow(32.0, 1.0 / 6.0);
  const double pow_ratio = std::pow(2.0, dn + 1.0) / std::pow(3.0, dn + 1.0);

  RegretBound rb;
  rb.terms[0] = 12.0 * B / (3.0 - w) * std::pow(x, 1.0 - w / 3.0) * std::sqrt(lg);
  rb.terms[1] = p.m_pr * (dn * width + th) *
                (2.0 / (2.0 * w + 1.0) * std::pow(x, w + 0.5) + (2.0 * w - 1.0) / (2.0 * w + 1.0));
  rb.terms[2] = 2.0 * p.k * th * std::sqrt(x * lg);
  rb.terms[3] = pow_ratio *
                (th * (2.0 * std::pow(dn, 11.0 / 6.0) + 1.0 / std::pow(dn, 1.0 / 6.0)) +
                 std::pow(dn, 5.0 / 6.0) * width * (1.0 + 2.0 * dn)) /
                (p.k * root6_32) * std::sqrt(x);
  rb.terms[4] = dn * dn * (width + th) * std::log(x);
  rb.terms[5] = th * static_cast<double>(p.k_tilde);
  for (double v : rb.terms) rb.total += v;
  return rb;
}

/// P(X - Y <= delta) for X, Y i.i.d. uniform on [c_lo, c_hi] (triangular law).
inline double cdf_uniform_difference(double delta, double c_lo, double c_hi) {
  if (!(c_hi > c_lo)) throw std::invalid_argument("cdf_uniform_difference: need c_hi > c_lo");
  const double W = c_hi - c_lo;
  if (delta < -W) return 0.0;
  if (delta < 0.0) return (delta + W) * (delta + W) / (2.0 * W * W);
  if (delta <= W) return 1.0 - (delta - W) * (delta - W) / (2.0 * W * W);
  return 1.0;
}

}  // namespace pagame
