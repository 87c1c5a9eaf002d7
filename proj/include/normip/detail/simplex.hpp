#pragma once

#include <Eigen/Dense>

namespace normip::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::infeasible;
  Eigen::VectorXd x;      // primal solution (basic feasible, so at most rank(A) nonzeros)
  double objective = 0.0;
};

/// minimize c'x  subject to  A x = b,  x >= 0.
///
/// Dense two-phase tableau simplex with Bland's rule. Sized for the small
/// polyhedral problems in this library (tens of rows, a few thousand
/// columns at most). The final basic solution is re-solved against the
/// original data to remove accumulated tableau round-off.
Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                long max_iterations = 200000);

}  // namespace normip::lp
