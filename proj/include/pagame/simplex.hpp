#pragma once

// Dense two-phase tableau simplex with Bland's anti-cycling rule.
//
//   minimize c^T x  subject to  A_i x (<= | >= | =) b_i,  x >= 0.
//
// Duals follow the convention of the dual program max b^T y, A^T y <= c, so
// y_i >= 0 on >= rows and y_i <= 0 on <= rows.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pagame::lp {

enum class Sense { less_equal, greater_equal, equal };

struct Row {
  std::vector<double> coeffs;  // dense, one entry per structural variable
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

struct Program {
  std::vector<double> objective;  // minimized
  std::vector<Row> rows;

  std::size_t num_vars() const { return objective.size(); }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "?";
}

struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;
  std::vector<double> duals;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
};

struct Options {
  std::size_t max_iterations = 1'000'000;
  double pivot_tol = 1e-9;     // reduced-cost / pivot element threshold
  double zero_tol = 1e-12;     // entries below this are snapped to zero
  double feasibility_tol = 1e-7;
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }
  // Objective row lives at index m_: reduced costs, rhs holds -objective.
  double& cost(std::size_t c) { return at(m_, c); }
  double cost(std::size_t c) const { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc, double zero_tol) {
    const std::size_t width = cols_ + 1;
    double* prow = &data_[pr * width];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * width];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) {
        double v = row[c] - f * prow[c];
        if (std::abs(v) < zero_tol) v = 0.0;
        row[c] = v;
      }
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

 private:
  std::size_t m_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

enum class Outcome { optimal, unbounded, iteration_limit };

// Bland: entering = lowest eligible column with negative reduced cost,
// leaving = minimum ratio, ties broken by lowest basic column index.
inline Outcome run_phase(Tableau& tab, std::size_t allowed_cols, const Options& opt,
                         std::size_t& iterations) {
  const std::size_t m = tab.rows();
  while (true) {
    std::size_t enter = allowed_cols;
    for (std::size_t c = 0; c < allowed_cols; ++c)
      if (tab.cost(c) < -opt.pivot_tol) {
        enter = c;
        break;
      }
    if (enter == allowed_cols) return Outcome::optimal;
    if (iterations >= opt.max_iterations) return Outcome::iteration_limit;

    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double a = tab.at(r, enter);
      if (a > opt.pivot_tol) best_ratio = std::min(best_ratio, tab.rhs(r) / a);
    }
    if (!std::isfinite(best_ratio)) return Outcome::unbounded;
    const double slack = 1e-12 * (1.0 + std::abs(best_ratio));
    std::size_t leave = m;
    for (std::size_t r = 0; r < m; ++r) {
      const double a = tab.at(r, enter);
      if (a <= opt.pivot_tol || tab.rhs(r) / a > best_ratio + slack) continue;
      if (leave == m || tab.basis()[r] < tab.basis()[leave]) leave = r;
    }
    tab.pivot(leave, enter, opt.zero_tol);
    ++iterations;
  }
}

}  // namespace detail

inline Result solve(const Program& prog, const Options& opt = {}) {
  const std::size_t nv = prog.num_vars();
  const std::size_t m = prog.rows.size();
  for (const auto& row : prog.rows)
    if (row.coeffs.size() != nv) throw std::invalid_argument("lp::solve: row width != num_vars");

  // Normalize to non-negative right-hand sides.
  std::vector<Sense> sense(m);
  std::vector<double> flip(m, 1.0);
  std::size_t n_slack = 0, n_art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sense[i] = prog.rows[i].sense;
    if (prog.rows[i].rhs < 0.0) {
      flip[i] = -1.0;
      if (sense[i] == Sense::less_equal) sense[i] = Sense::greater_equal;
      else if (sense[i] == Sense::greater_equal) sense[i] = Sense::less_equal;
    }
    if (sense[i] != Sense::equal) ++n_slack;
    if (sense[i] != Sense::less_equal) ++n_art;
  }

  // Column layout: structural | slack/surplus | artificial.
  const std::size_t slack0 = nv, art0 = nv + n_slack, ncols = nv + n_slack + n_art;
  detail::Tableau tab(m, ncols);
  std::vector<std::size_t> marker_col(m);
  std::vector<double> marker_coef(m);
  std::vector<bool> is_art_row(m, false);
  {
    std::size_t s = slack0, a = art0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& row = prog.rows[i];
      for (std::size_t j = 0; j < nv; ++j) tab.at(i, j) = flip[i] * row.coeffs[j];
      tab.rhs(i) = flip[i] * row.rhs;
      switch (sense[i]) {
        case Sense::less_equal:
          tab.at(i, s) = 1.0;
          tab.basis()[i] = s;
          marker_col[i] = s;
          marker_coef[i] = 1.0;
          ++s;
          break;
        case Sense::greater_equal:
          tab.at(i, s) = -1.0;
          marker_col[i] = s;
          marker_coef[i] = -1.0;
          ++s;
          tab.at(i, a) = 1.0;
          tab.basis()[i] = a;
          is_art_row[i] = true;
          ++a;
          break;
        case Sense::equal:
          tab.at(i, a) = 1.0;
          tab.basis()[i] = a;
          marker_col[i] = a;
          marker_coef[i] = 1.0;
          is_art_row[i] = true;
          ++a;
          break;
      }
    }
  }

  Result res;
  std::size_t iterations = 0;

  if (n_art > 0) {
    // Phase 1: minimize the sum of artificials.
    for (std::size_t c = 0; c <= ncols; ++c) tab.cost(c) = 0.0;
    for (std::size_t c = art0; c < ncols; ++c) tab.cost(c) = 1.0;
    for (std::size_t i = 0; i < m; ++i)
      if (is_art_row[i])
        for (std::size_t c = 0; c <= ncols; ++c) tab.cost(c) -= tab.at(i, c);
    const auto out = detail::run_phase(tab, art0, opt, iterations);
    if (out == detail::Outcome::iteration_limit) {
      res.status = Status::iteration_limit;
      res.iterations = iterations;
      return res;
    }
    double scale = 1.0;
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(prog.rows[i].rhs));
    if (-tab.rhs(m) > opt.feasibility_tol * scale) {
      res.status = Status::infeasible;
      res.iterations = iterations;
      return res;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c)
        if (std::abs(tab.at(i, c)) > opt.pivot_tol) {
          tab.pivot(i, c, opt.zero_tol);
          ++iterations;
          break;
        }
    }
  }

  // Phase 2 objective row: c_j - c_B B^{-1} A_j.
  for (std::size_t c = 0; c <= ncols; ++c) tab.cost(c) = 0.0;
  for (std::size_t j = 0; j < nv; ++j) tab.cost(j) = prog.objective[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t b = tab.basis()[i];
    const double cb = b < nv ? prog.objective[b] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= ncols; ++c) tab.cost(c) -= cb * tab.at(i, c);
  }
  const auto out = detail::run_phase(tab, art0, opt, iterations);
  res.iterations = iterations;
  if (out == detail::Outcome::unbounded) {
    res.status = Status::unbounded;
    return res;
  }
  if (out == detail::Outcome::iteration_limit) {
    res.status = Status::iteration_limit;
    return res;
  }

  res.status = Status::optimal;
  res.x.assign(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis()[i] < nv) res.x[tab.basis()[i]] = tab.rhs(i);
  res.objective = 0.0;
  for (std::size_t j = 0; j < nv; ++j) res.objective += prog.objective[j] * res.x[j];
  res.duals.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    // Marker column has zero cost and is marker_coef * e_i in the stored row.
    const double y_stored = -tab.cost(marker_col[i]) / marker_coef[i];
    res.duals[i] = flip[i] * y_stored;
  }
  return res;
}

}  // namespace pagame::lp
