#include "tethersim/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tethersim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

QpSolution solve_qp(const QpProblem& p, int max_iterations, double tolerance) {
  const int n = static_cast<int>(p.hessian.rows());
  const int m_eq = static_cast<int>(p.eq.rows());
  const int m_in = static_cast<int>(p.ineq.rows());
  const int m_total = m_eq + m_in;

  Eigen::LLT<Eigen::MatrixXd> h_factor(p.hessian);
  if (h_factor.info() != Eigen::Success) {
    throw std::invalid_argument("solve_qp: hessian is not positive definite");
  }

  // Constraints in the unified form normal'z >= d; equalities are pinned to
  // their target and keep free-sign multipliers.
  auto normal_of = [&](int c) -> Eigen::VectorXd {
    if (c < m_eq) return p.eq.row(c).transpose();
    return -p.ineq.row(c - m_eq).transpose();
  };
  auto rhs_of = [&](int c) -> double {
    if (c < m_eq) return p.eq_rhs(c);
    return -p.ineq_rhs(c - m_eq);
  };

  std::vector<Eigen::VectorXd> inv_h_normal(m_total);
  std::vector<bool> cached(m_total, false);
  auto y_of = [&](int c) -> const Eigen::VectorXd& {
    if (!cached[c]) {
      inv_h_normal[c] = h_factor.solve(normal_of(c));
      cached[c] = true;
    }
    return inv_h_normal[c];
  };

  Eigen::VectorXd z = h_factor.solve(-p.gradient);
  std::vector<int> active;
  std::vector<double> multipliers;
  std::vector<bool> is_active(m_total, false);

  QpSolution sol;
  sol.status = QpStatus::kOptimal;
  int iter = 0;

  // Adds constraint c to the active set, dropping blocking inequalities as
  // needed. Returns false when the problem is infeasible.
  auto add_constraint = [&](int c) -> bool {
    const Eigen::VectorXd n_c = normal_of(c);
    const double d_c = rhs_of(c);
    double slack = n_c.dot(z) - d_c;
    double u_new = 0.0;

    while (true) {
      if (++iter > max_iterations) {
        sol.status = QpStatus::kMaxIterations;
        return true;
      }
      const Eigen::VectorXd& y_c = y_of(c);
      const int k = static_cast<int>(active.size());

      Eigen::VectorXd r(k);
      Eigen::VectorXd d_z;
      if (k == 0) {
        d_z = y_c;
      } else {
        Eigen::MatrixXd normals(n, k), ys(n, k);
        for (int j = 0; j < k; ++j) {
          normals.col(j) = normal_of(active[j]);
          ys.col(j) = y_of(active[j]);
        }
        const Eigen::MatrixXd gram = normals.transpose() * ys;
        r = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(normals.transpose() * y_c);
        d_z = y_c - ys * r;
      }

      const double denom = n_c.dot(d_z);
      const bool dependent = denom <= 1e-13 * std::max(1.0, std::abs(n_c.dot(y_c)));

      // Blocking active inequality whose multiplier would cross zero first.
      double t1 = kInf;
      int block = -1;
      for (int j = 0; j < k; ++j) {
        if (active[j] < m_eq) continue;
        if (r(j) > 1e-13) {
          const double ratio = multipliers[j] / r(j);
          if (ratio < t1) {
            t1 = ratio;
            block = j;
          }
        }
      }

      if (dependent) {
        if (c < m_eq && std::abs(slack) <= 1e-9 * (1.0 + std::abs(d_c))) {
          return true;  // redundant but consistent equality row
        }
        if (block < 0) return false;  // infeasible
        // Dual-only step: walk the blocking multiplier down to zero.
        for (int j = 0; j < k; ++j) multipliers[j] -= t1 * r(j);
        u_new += t1;
        is_active[active[block]] = false;
        active.erase(active.begin() + block);
        multipliers.erase(multipliers.begin() + block);
        continue;
      }

      double t2 = -slack / denom;  // may be negative for equality targets
      double t = t2;
      const bool full_step = (c < m_eq) || t2 <= t1;
      if (!full_step) t = t1;

      z += t * d_z;
      for (int j = 0; j < k; ++j) multipliers[j] -= t * r(j);
      u_new += t;
      slack = n_c.dot(z) - d_c;

      if (full_step) {
        active.push_back(c);
        multipliers.push_back(u_new);
        is_active[c] = true;
        return true;
      }
      is_active[active[block]] = false;
      active.erase(active.begin() + block);
      multipliers.erase(multipliers.begin() + block);
    }
  };

  // Equalities are pinned first (even when already satisfied) so that every
  // later step direction preserves them.
  for (int c = 0; c < m_eq && sol.status == QpStatus::kOptimal; ++c) {
    if (!add_constraint(c)) {
      sol.status = QpStatus::kInfeasible;
    }
  }

  const double pick_tol = std::min(tolerance, 1e-9);
  while (sol.status == QpStatus::kOptimal) {
    // Most violated inactive inequality.
    int worst = -1;
    double worst_violation = -pick_tol;
    for (int c = m_eq; c < m_total; ++c) {
      if (is_active[c]) continue;
      const double slack = normal_of(c).dot(z) - rhs_of(c);
      const double scaled = slack / (1.0 + std::abs(rhs_of(c)));
      if (scaled < worst_violation) {
        worst_violation = scaled;
        worst = c;
      }
    }
    if (worst < 0) break;
    if (!add_constraint(worst)) {
      sol.status = QpStatus::kInfeasible;
      break;
    }
    if (sol.status != QpStatus::kOptimal) break;
  }

  sol.z = z;
  sol.iterations = iter;
  sol.objective = 0.5 * z.dot(p.hessian * z) + p.gradient.dot(z);
  for (int c : active) {
    if (c >= m_eq) ++sol.active_inequalities;
  }
  return sol;
}

}  // namespace tethersim
