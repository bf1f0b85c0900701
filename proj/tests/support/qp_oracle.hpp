#pragma once

#include <Eigen/Dense>

#include <random>

#include "tethersim/qp.hpp"

namespace tethersim::testing {

/// Feasible set for the oracle: box [lo, hi] intersected with eq*z = rhs.
struct OracleFeasibleSet {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
};

/// Projection onto box-and-affine intersections by Dykstra's alternating
/// scheme; collapses to a plain clip when no equalities are present.
inline Eigen::VectorXd project_feasible(const OracleFeasibleSet& set, Eigen::VectorXd z) {
  if (set.eq.rows() == 0) return z.cwiseMax(set.lo).cwiseMin(set.hi);
  const Eigen::LLT<Eigen::MatrixXd> gram((set.eq * set.eq.transpose()).eval());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(z.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(z.size());
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const Eigen::VectorXd y = (z + p).cwiseMax(set.lo).cwiseMin(set.hi);
    p = z + p - y;
    const Eigen::VectorXd w = y + q;
    const Eigen::VectorXd z_next =
        w - set.eq.transpose() * gram.solve(set.eq * w - set.eq_rhs);
    q = w - z_next;
    if ((z_next - z).norm() < 1e-14 * (1.0 + z_next.norm())) {
      z = z_next;
      break;
    }
    z = z_next;
  }
  return z;
}

/// Projected-gradient reference solution run to a tight fixed point. The
/// step uses the largest Hessian eigenvalue; strong convexity gives linear
/// convergence, so the iteration cap is generous.
inline Eigen::VectorXd projected_gradient_solve(const Eigen::MatrixXd& h,
                                                const Eigen::VectorXd& g,
                                                const OracleFeasibleSet& set,
                                                const Eigen::VectorXd& start,
                                                int max_iterations = 400000) {
  const double l_max = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff();
  const double step = 1.0 / l_max;
  Eigen::VectorXd z = project_feasible(set, start);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd z_next = project_feasible(set, z - step * (h * z + g));
    const double move = (z_next - z).norm();
    z = z_next;
    if (move < 1e-13 * (1.0 + z.norm())) break;
  }
  return z;
}

inline double qp_objective(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& z) {
  return 0.5 * z.dot(h * z) + g.dot(z);
}

/// Random strictly convex QP over a box, optionally with consistent equality
/// rows through a feasible interior point.
struct RandomQp {
  QpProblem problem;
  OracleFeasibleSet set;
  Eigen::VectorXd interior;
};

inline RandomQp make_random_qp(std::mt19937_64& rng, int n, int eq_rows, double cond = 100.0) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = unif(rng);
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
  Eigen::VectorXd eig(n);
  for (int i = 0; i < n; ++i) {
    eig(i) = 1.0 + (cond - 1.0) * 0.5 * (unif(rng) + 1.0);
  }
  RandomQp out;
  const Eigen::MatrixXd h = q * eig.asDiagonal() * q.transpose();
  out.problem.hessian = 0.5 * (h + h.transpose());
  out.problem.gradient = Eigen::VectorXd::NullaryExpr(n, [&](int) { return 3.0 * unif(rng); });

  out.set.lo.resize(n);
  out.set.hi.resize(n);
  out.interior.resize(n);
  for (int i = 0; i < n; ++i) {
    const double a = unif(rng), b = unif(rng);
    out.set.lo(i) = std::min(a, b) - 0.1;
    out.set.hi(i) = std::max(a, b) + 0.1;
    out.interior(i) = 0.5 * (out.set.lo(i) + out.set.hi(i));
  }

  out.set.eq.resize(eq_rows, n);
  out.set.eq_rhs.resize(eq_rows);
  for (int r = 0; r < eq_rows; ++r) {
    for (int j = 0; j < n; ++j) out.set.eq(r, j) = unif(rng);
  }
  if (eq_rows > 0) {
    out.set.eq_rhs = out.set.eq * out.interior;  // feasible by construction
  }

  out.problem.eq = out.set.eq;
  out.problem.eq_rhs = out.set.eq_rhs;
  out.problem.ineq.resize(2 * n, n);
  out.problem.ineq << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  out.problem.ineq_rhs.resize(2 * n);
  out.problem.ineq_rhs << out.set.hi, -out.set.lo;
  return out;
}

}  // namespace tethersim::testing
