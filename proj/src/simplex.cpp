#include "normip/detail/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace normip::lp {
namespace {

constexpr double kPivotTol = 1e-11;

struct Tableau {
  // Rows 0..m-1 are constraints, row m is the objective (reduced costs).
  // Last column is the right-hand side.
  Eigen::MatrixXd t;
  std::vector<long> basis;
  long m = 0;
  long cols = 0;  // number of structural + artificial columns

  void pivot(long r, long c) {
    t.row(r) /= t(r, c);
    for (long i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = t(i, c);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[r] = c;
  }

  // Bland's rule; columns >= allowed are never entered.
  Status run(long allowed, long max_iterations) {
    for (long it = 0; it < max_iterations; ++it) {
      long enter = -1;
      for (long j = 0; j < allowed; ++j) {
        if (t(m, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::optimal;
      long leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (long i = 0; i < m; ++i) {
        const double a = t(i, enter);
        if (a > kPivotTol) {
          const double ratio = t(i, cols) / a;
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return Status::unbounded;
      pivot(leave, enter);
    }
    return Status::iteration_limit;
  }
};

}  // namespace

Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                long max_iterations) {
  const long m = A.rows();
  const long n = A.cols();
  Result res;
  res.x = Eigen::VectorXd::Zero(n);

  Tableau tab;
  tab.m = m;
  tab.cols = n + m;
  tab.t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tab.basis.resize(m);
  for (long i = 0; i < m; ++i) {
    const double sign = b(i) < 0 ? -1.0 : 1.0;
    tab.t.block(i, 0, 1, n) = sign * A.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = sign * b(i);
    tab.basis[i] = n + i;
  }
  // Phase 1 objective: sum of artificials, expressed in non-basic terms.
  for (long i = 0; i < m; ++i) tab.t.row(m) -= tab.t.row(i);
  for (long i = 0; i < m; ++i) tab.t(m, n + i) = 0.0;

  Status st = tab.run(n + m, max_iterations);
  if (st == Status::iteration_limit) {
    res.status = st;
    return res;
  }
  const double scale = 1.0 + b.cwiseAbs().sum();
  if (-tab.t(m, n + m) > 1e-9 * scale) {
    res.status = Status::infeasible;
    return res;
  }

  // Drive artificials out of the basis; rows that cannot be pivoted are redundant.
  std::vector<bool> redundant(m, false);
  for (long i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    long col = -1;
    for (long j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col >= 0)
      tab.pivot(i, col);
    else
      redundant[i] = true;
  }

  // Phase 2 objective row.
  tab.t.row(m).setZero();
  tab.t.block(m, 0, 1, n) = c.transpose();
  for (long i = 0; i < m; ++i) {
    const long bj = tab.basis[i];
    if (bj < n && c(bj) != 0.0) tab.t.row(m) -= c(bj) * tab.t.row(i);
  }
  st = tab.run(n, max_iterations);
  if (st != Status::optimal) {
    res.status = st;
    return res;
  }

  // Re-solve A_B x_B = b (least squares over all rows; the system is
  // consistent) to strip accumulated tableau round-off.
  std::vector<long> brows, bcols;
  for (long i = 0; i < m; ++i) {
    if (redundant[i] || tab.basis[i] >= n) continue;
    brows.push_back(i);
    bcols.push_back(tab.basis[i]);
  }
  Eigen::MatrixXd B(m, static_cast<long>(bcols.size()));
  for (std::size_t k = 0; k < bcols.size(); ++k) B.col(static_cast<long>(k)) = A.col(bcols[k]);
  Eigen::VectorXd xb;
  if (!bcols.empty()) xb = B.colPivHouseholderQr().solve(b);
  for (std::size_t k = 0; k < bcols.size(); ++k) {
    // Fall back to the tableau value if refinement went astray.
    const double tv = tab.t(brows[k], tab.cols);
    double v = xb(static_cast<long>(k));
    if (!std::isfinite(v) || std::abs(v - tv) > 1e-6 * (1.0 + std::abs(tv))) v = tv;
    res.x(bcols[k]) = v < 0.0 && v > -1e-9 ? 0.0 : v;
  }
  res.objective = c.dot(res.x);
  res.status = Status::optimal;
  return res;
}

}  // namespace normip::lp
