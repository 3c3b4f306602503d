#pragma once

// The principal's estimate of the agent's normalized mean rewards:
//
//   s_hat in argmin_{s_1 = 0, s in box}  sum_tau max_a (s_a + pi_{tau,a} - s_u - pi_{tau,u})
//
// where u is the arm the agent chose at tau. Three minimizers share the same
// loss: the slack LP solved by the dense simplex (with a cutting-plane route
// over the same objective when the tableau would be too large), a projected
// subgradient method for cheap warm-started refreshes, and an exhaustive grid
// used only as a test oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pagame/core.hpp"
#include "pagame/simplex.hpp"

namespace pagame {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  std::size_t iterations() const { return iterations_; }

 private:
  std::size_t iterations_;
};

/// Thrown by the grid oracle when the grid would be unreasonably large.
class RefusalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SolverTag { exact_lp, cutting_plane, subgradient, grid };

inline const char* to_string(SolverTag t) {
  switch (t) {
    case SolverTag::exact_lp: return "exact_lp";
    case SolverTag::cutting_plane: return "cutting_plane";
    case SolverTag::subgradient: return "subgradient";
    case SolverTag::grid: return "grid";
  }
  return "?";
}

struct NormalizedRewardEstimate {
  Vector s_hat;  // s_hat[0] == 0
  double objective = 0.0;
  SolverTag solver = SolverTag::exact_lp;
  std::size_t iterations = 0;
  bool converged = true;
};

// ---------------------------------------------------------------------------
// Loss

inline double single_step_loss(std::span<const double> s, std::size_t chosen_arm,
                               std::span<const double> pi) {
  if (s.size() != pi.size() || s.empty())
    throw DimensionError("single_step_loss: s and pi lengths differ");
  if (chosen_arm >= s.size()) throw DimensionError("single_step_loss: chosen arm out of range");
  const double chosen = s[chosen_arm] + pi[chosen_arm];
  double worst = 0.0;  // a == chosen_arm contributes exactly zero
  for (std::size_t a = 0; a < s.size(); ++a) worst = std::max(worst, (s[a] + pi[a]) - chosen);
  return worst;
}

inline double total_loss(std::span<const double> s, const History& h) {
  if (h.empty()) throw EmptyDataError("total_loss: empty history");
  if (s.size() != h.arms()) throw DimensionError("total_loss: s length != n");
  double sum = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) sum += single_step_loss(s, h.chosen(i), h.pi(i));
  return sum;
}

namespace detail {

// Loss plus one subgradient (lowest-index maximizer per record). g[0] is left
// at zero because s_1 is pinned.
inline double loss_and_subgradient(std::span<const double> s, const History& h, Vector& g) {
  const std::size_t n = h.arms();
  g.assign(n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto pi = h.pi(i);
    const std::size_t u = h.chosen(i);
    const double chosen = s[u] + pi[u];
    std::size_t best = u;
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double gap = (s[a] + pi[a]) - chosen;
      if (gap > worst) {
        worst = gap;
        best = a;
      }
    }
    if (best != u) {
      sum += worst;
      g[best] += 1.0;
      g[u] -= 1.0;
    }
  }
  g[0] = 0.0;
  return sum;
}

inline void project(Vector& s, const Box& box) {
  s[0] = 0.0;
  for (std::size_t a = 1; a < s.size(); ++a) s[a] = clip(s[a], box.lo, box.hi);
}

inline void check_input(const History& h, const Box& box, const char* who) {
  if (h.empty()) throw EmptyDataError(std::string(who) + ": empty history");
  if (!(box.hi >= box.lo)) throw std::invalid_argument(std::string(who) + ": empty box");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dense slack LP

struct CuttingPlaneOptions {
  std::size_t max_cuts = 20000;
  double tol = 1e-9;  // relative gap between best value and master bound
  lp::Options simplex{};
};

struct ExactLpOptions {
  // Above this many tableau entries the cutting-plane route is used instead.
  std::size_t dense_entry_limit = 1'500'000;
  double consistency_tol = 1e-9;
  lp::Options simplex{};
  CuttingPlaneOptions cutting_plane{};
};

/// Tableau entries the dense slack LP would allocate for this history.
inline std::size_t dense_lp_entries(std::size_t n, std::size_t records) {
  const std::size_t rows = (n - 1) * records + (n - 1);
  const std::size_t cols = (n - 1) + records + 2 * rows;
  return (rows + 1) * (cols + 1);
}

/// Variables: u_a = s_a - box.lo for arms 2..n, then one slack y per record.
/// Rows: s_a - s_u - y_tau <= pi_u - pi_a for every record and every a != u,
/// plus u_a <= box width. y >= 0 is implied by the a == u term of the max.
inline lp::Program build_slack_lp(const History& h, const Box& box) {
  const std::size_t n = h.arms(), d = n - 1, R = h.size();
  const std::size_t nv = d + R;
  lp::Program prog;
  prog.objective.assign(nv, 0.0);
  for (std::size_t r = 0; r < R; ++r) prog.objective[d + r] = 1.0;
  prog.rows.reserve(d * R + d);
  // s_a = u_a + lo for a >= 1 (0-based), s_0 = 0.
  auto shift = [&](std::size_t a) { return a == 0 ? 0.0 : box.lo; };
  for (std::size_t r = 0; r < R; ++r) {
    const auto pi = h.pi(r);
    const std::size_t u = h.chosen(r);
    for (std::size_t a = 0; a < n; ++a) {
      if (a == u) continue;
      lp::Row row;
      row.coeffs.assign(nv, 0.0);
      if (a > 0) row.coeffs[a - 1] += 1.0;
      if (u > 0) row.coeffs[u - 1] -= 1.0;
      row.coeffs[d + r] = -1.0;
      row.sense = lp::Sense::less_equal;
      row.rhs = (pi[u] - pi[a]) - shift(a) + shift(u);
      prog.rows.push_back(std::move(row));
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    lp::Row row;
    row.coeffs.assign(nv, 0.0);
    row.coeffs[j] = 1.0;
    row.rhs = box.hi - box.lo;
    prog.rows.push_back(std::move(row));
  }
  return prog;
}

inline NormalizedRewardEstimate solve_dense_lp(const History& h, const Box& box,
                                               const ExactLpOptions& opt = {}) {
  detail::check_input(h, box, "solve_dense_lp");
  const std::size_t n = h.arms();
  const auto prog = build_slack_lp(h, box);
  const auto res = lp::solve(prog, opt.simplex);
  if (res.status == lp::Status::iteration_limit)
    throw SolverError("solve_dense_lp: simplex iteration limit reached", res.iterations);
  if (res.status != lp::Status::optimal)
    throw SolverError(std::string("solve_dense_lp: internal error, LP reported ") +
                          lp::to_string(res.status),
                      res.iterations);

  NormalizedRewardEstimate est;
  est.s_hat.assign(n, 0.0);
  for (std::size_t a = 1; a < n; ++a) est.s_hat[a] = res.x[a - 1] + box.lo;
  detail::project(est.s_hat, box);
  // The reported objective is the LP optimum; the loss recomputed at s_hat
  // must agree with it up to rounding.
  est.objective = std::max(0.0, res.objective);
  est.solver = SolverTag::exact_lp;
  est.iterations = res.iterations;
  if (std::abs(total_loss(est.s_hat, h) - res.objective) >
      opt.consistency_tol * (1.0 + std::abs(res.objective)))
    throw SolverError("solve_dense_lp: LP objective disagrees with recomputed loss",
                      res.iterations);
  return est;
}

// ---------------------------------------------------------------------------
// Cutting planes (Kelley) on the same objective. Each master problem
// min z s.t. z >= a_k + g_k.s, s in box is solved through its dual, which has
// only n rows, and s is read back from the dual multipliers.

struct Cut {
  double offset;  // f(s) >= offset + slope . s
  Vector slope;
};

inline NormalizedRewardEstimate solve_cutting_plane(const History& h, const Box& box,
                                                    const CuttingPlaneOptions& opt = {},
                                                    std::optional<Vector> warm_start = {}) {
  detail::check_input(h, box, "solve_cutting_plane");
  const std::size_t n = h.arms(), d = n - 1;

  Vector x = warm_start && warm_start->size() == n ? *warm_start : Vector(n, 0.0);
  detail::project(x, box);
  Vector g;
  Vector best = x;
  double upper = std::numeric_limits<double>::infinity();
  double lower = 0.0;  // the loss is non-negative
  std::vector<Cut> cuts;
  std::size_t iterations = 0;

  while (true) {
    const double f = detail::loss_and_subgradient(x, h, g);
    if (f < upper) {
      upper = f;
      best = x;
    }
    if (upper - lower <= opt.tol * (1.0 + upper)) break;
    if (cuts.size() >= opt.max_cuts)
      throw SolverError("solve_cutting_plane: cut limit reached before the gap closed",
                        iterations);
    double dot = 0.0;
    for (std::size_t a = 1; a < n; ++a) dot += g[a] * x[a];
    cuts.push_back({f - dot, g});

    const std::size_t K = cuts.size();
    lp::Program dual;
    dual.objective.assign(K + 2 * d, 0.0);
    for (std::size_t c = 0; c < K; ++c) dual.objective[c] = -cuts[c].offset;
    for (std::size_t j = 0; j < d; ++j) {
      dual.objective[K + j] = box.hi;       // mu_j
      dual.objective[K + d + j] = -box.lo;  // nu_j
    }
    dual.rows.resize(d + 1);
    for (auto& row : dual.rows) {
      row.coeffs.assign(K + 2 * d, 0.0);
      row.sense = lp::Sense::equal;
    }
    dual.rows[0].rhs = 1.0;
    for (std::size_t c = 0; c < K; ++c) {
      dual.rows[0].coeffs[c] = 1.0;
      for (std::size_t j = 0; j < d; ++j) dual.rows[j + 1].coeffs[c] = -cuts[c].slope[j + 1];
    }
    for (std::size_t j = 0; j < d; ++j) {
      dual.rows[j + 1].coeffs[K + j] = -1.0;
      dual.rows[j + 1].coeffs[K + d + j] = 1.0;
    }
    const auto res = lp::solve(dual, opt.simplex);
    iterations += res.iterations;
    if (res.status != lp::Status::optimal)
      throw SolverError(std::string("solve_cutting_plane: master LP ") + lp::to_string(res.status),
                        iterations);
    lower = std::max(lower, -res.objective);
    Vector next(n, 0.0);
    for (std::size_t j = 0; j < d; ++j) next[j + 1] = -res.duals[j + 1];
    detail::project(next, box);
    if (next == x && upper - lower > opt.tol * (1.0 + upper)) {
      // Master returned the point just cut; the model is tight there.
      lower = std::max(lower, std::min(upper, f));
    }
    x = std::move(next);
  }

  NormalizedRewardEstimate est;
  est.s_hat = best;
  est.objective = upper;
  est.solver = SolverTag::cutting_plane;
  est.iterations = cuts.size();
  return est;
}

/// Global minimizer of the loss over {s_1 = 0, s in box}.
inline NormalizedRewardEstimate solve_exact_lp(const History& h, const Box& box,
                                               const ExactLpOptions& opt = {},
                                               std::optional<Vector> warm_start = {}) {
  detail::check_input(h, box, "solve_exact_lp");
  if (dense_lp_entries(h.arms(), h.size()) <= opt.dense_entry_limit)
    return solve_dense_lp(h, box, opt);
  return solve_cutting_plane(h, box, opt.cutting_plane, std::move(warm_start));
}

// ---------------------------------------------------------------------------
// Projected subgradient

enum class StepSchedule {
  diminishing,     // step0 / sqrt(k + 1) along the normalized subgradient
  polyak_adaptive  // Polyak step towards a target level that is halved on stalls
};

struct SubgradientOptions {
  std::size_t max_iters = 5000;
  StepSchedule schedule = StepSchedule::polyak_adaptive;
  double tol = 1e-6;
  double initial_step = 0.0;  // <= 0: a tenth of the box width
  std::size_t patience = 0;   // stall iterations before the target moves; 0: 10 * n
};

inline NormalizedRewardEstimate solve_subgradient(const History& h, const Box& box,
                                                  const SubgradientOptions& opt = {},
                                                  std::optional<Vector> warm_start = {}) {
  detail::check_input(h, box, "solve_subgradient");
  const std::size_t n = h.arms();
  Vector x = warm_start && warm_start->size() == n ? *warm_start : Vector(n, 0.0);
  detail::project(x, box);

  Vector g;
  double f = detail::loss_and_subgradient(x, h, g);
  Vector best = x;
  double fbest = f;
  bool converged = false;
  std::size_t it = 0;
  const double step0 = opt.initial_step > 0.0 ? opt.initial_step : 0.1 * (box.hi - box.lo);
  const std::size_t patience = opt.patience > 0 ? opt.patience : 10 * n;
  double delta = std::max(opt.tol, 0.5 * fbest);
  std::size_t stall = 0;

  // Drop components that would push a coordinate out through an active bound.
  auto projected_norm2 = [&](Vector& grad, const Vector& at) {
    double nrm = 0.0;
    for (std::size_t a = 1; a < n; ++a) {
      if ((at[a] <= box.lo && grad[a] > 0.0) || (at[a] >= box.hi && grad[a] < 0.0)) grad[a] = 0.0;
      nrm += grad[a] * grad[a];
    }
    return nrm;
  };

  for (; it < opt.max_iters; ++it) {
    if (fbest <= opt.tol) {
      converged = true;
      break;
    }
    const double g2 = projected_norm2(g, x);
    if (g2 == 0.0) {
      // This subgradient certifies optimality of x over the box.
      if (f < fbest) {
        fbest = f;
        best = x;
      }
      converged = f <= fbest;
      if (converged) break;
      x = best;
      f = detail::loss_and_subgradient(x, h, g);
      continue;
    }
    double step;
    if (opt.schedule == StepSchedule::diminishing) {
      step = step0 / (std::sqrt(static_cast<double>(it) + 1.0) * std::sqrt(g2));
    } else {
      const double target = std::max(fbest - delta, 0.0);
      step = (f - target) / g2;
    }
    for (std::size_t a = 1; a < n; ++a) x[a] -= step * g[a];
    detail::project(x, box);
    f = detail::loss_and_subgradient(x, h, g);

    if (opt.schedule == StepSchedule::polyak_adaptive) {
      if (f <= fbest - 0.5 * delta) {
        stall = 0;
      } else if (++stall > patience) {
        delta *= 0.5;
        stall = 0;
        if (delta <= opt.tol * (1.0 + fbest)) {
          if (f < fbest) {
            fbest = f;
            best = x;
          }
          converged = true;
          ++it;
          break;
        }
        if (f >= fbest) {
          x = best;
          f = detail::loss_and_subgradient(x, h, g);
        }
      }
    }
    if (f < fbest) {
      fbest = f;
      best = x;
    }
  }

  NormalizedRewardEstimate est;
  est.s_hat = std::move(best);
  est.objective = fbest;
  est.solver = SolverTag::subgradient;
  est.iterations = it;
  est.converged = converged;
  return est;
}

// ---------------------------------------------------------------------------
// Exhaustive grid (test oracle)

inline NormalizedRewardEstimate brute_force_grid(const History& h, const Box& box,
                                                 double resolution,
                                                 std::size_t max_points = 200'000'000) {
  detail::check_input(h, box, "brute_force_grid");
  const std::size_t n = h.arms(), d = n - 1;
  if (n > 4) throw RefusalError("brute_force_grid: refusing n > 4 (grid grows exponentially)");
  if (!(resolution > 0.0)) throw std::invalid_argument("brute_force_grid: resolution must be > 0");
  const double width = box.hi - box.lo;
  const auto steps = static_cast<std::size_t>(std::ceil(width / resolution - 1e-9));
  double points = 1.0;
  for (std::size_t j = 0; j < d; ++j) points *= static_cast<double>(steps + 1);
  if (points > static_cast<double>(max_points))
    throw RefusalError("brute_force_grid: grid has too many points");

  auto coord = [&](std::size_t i) {
    return steps == 0 ? box.lo : box.lo + width * static_cast<double>(i) / static_cast<double>(steps);
  };
  std::vector<std::size_t> idx(d, 0);
  Vector s(n, 0.0), best(n, 0.0);
  double fbest = std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
  while (true) {
    for (std::size_t j = 0; j < d; ++j) s[j + 1] = coord(idx[j]);
    const double f = total_loss(s, h);
    ++evaluated;
    if (f < fbest) {
      fbest = f;
      best = s;
    }
    std::size_t j = 0;
    while (j < d && ++idx[j] > steps) idx[j++] = 0;
    if (j == d) break;
  }
  NormalizedRewardEstimate est;
  est.s_hat = best;
  est.objective = fbest;
  est.solver = SolverTag::grid;
  est.iterations = evaluated;
  return est;
}

}  // namespace pagame
