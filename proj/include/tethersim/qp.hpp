#pragma once

#include <Eigen/Dense>

namespace tethersim {

enum class QpStatus { kOptimal, kMaxIterations, kInfeasible };

/// Convex QP: minimize 0.5 z'Hz + g'z subject to eq*z = eq_rhs and
/// ineq*z <= ineq_rhs. H must be positive definite (regularize beforehand).
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq;
  Eigen::VectorXd ineq_rhs;
};

struct QpSolution {
  Eigen::VectorXd z;
  QpStatus status{QpStatus::kOptimal};
  int iterations{0};
  double objective{0.0};
  int active_inequalities{0};
};

/// Dual active-set solve (Goldfarb-Idnani): starts from the unconstrained
/// minimum, activates equalities, then adds the most violated inequality
/// until none remain. Deterministic for identical inputs; finite termination
/// up to the iteration cap.
QpSolution solve_qp(const QpProblem& problem, int max_iterations = 200, double tolerance = 1e-6);

}  // namespace tethersim
