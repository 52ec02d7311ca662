#include "convexnn/solvers.hpp"

#include <cmath>
#include <sstream>

namespace cvxnn {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "max_iters";
}

std::string SolveReport::to_jsonl() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < objective_history.size(); ++i) {
    os << "{\"iter\":" << i << ",\"objective\":" << objective_history[i] << "}\n";
  }
  os << "{\"status\":\"" << to_string(status) << "\",\"iterations\":" << iterations
     << ",\"objective\":" << final_objective << ",\"violation\":" << final_violation
     << ",\"wall_time\":" << wall_time << "}\n";
  return os.str();
}

Eigen::VectorXd prox_group(const Eigen::VectorXd& v, double t, int p) {
  if (t < 0.0) throw std::invalid_argument("prox_group: threshold must be >= 0");
  if (p == 2) {
    const double nrm = v.norm();
    if (nrm <= t) return Eigen::VectorXd::Zero(v.size());
    return (1.0 - t / nrm) * v;
  }
  if (p == 1) {
    return v.unaryExpr([t](double x) {
      if (x > t) return x - t;
      if (x < -t) return x + t;
      return 0.0;
    });
  }
  throw std::invalid_argument("prox_group: p must be 1 or 2");
}

Eigen::VectorXd project_polyhedral_cone(const Eigen::MatrixXd& A, const Eigen::VectorXd& v,
                                        int max_sweeps) {
  const Eigen::Index m = A.rows();
  if (m == 0) return v;

  Eigen::VectorXd row_sq(m);
  for (Eigen::Index j = 0; j < m; ++j) row_sq[j] = A.row(j).squaredNorm();
  const double scale = std::max(1.0, v.norm());

  Eigen::VectorXd x = v;
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(v.size(), m);  // Dykstra corrections
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (row_sq[j] == 0.0) continue;
      const Eigen::VectorXd y = x + corr.col(j);
      const double viol = A.row(j).dot(y);
      if (viol < 0.0) {
        x = y - (viol / row_sq[j]) * A.row(j).transpose();
        corr.col(j) = y - x;
      } else {
        x = y;
        corr.col(j).setZero();
      }
      worst = std::max(worst, -A.row(j).dot(x));
    }
    if (worst <= 1e-15 * scale) break;
  }
  // final feasibility sweeps (plain alternating projection)
  for (int sweep = 0; sweep < 50; ++sweep) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (row_sq[j] == 0.0) continue;
      const double viol = A.row(j).dot(x);
      if (viol < 0.0) x -= (viol / row_sq[j]) * A.row(j).transpose();
      worst = std::max(worst, -A.row(j).dot(x));
    }
    if (worst <= 0.0) break;
  }
  return x;
}

double project_feasible(const ConvexProgram& prog, GroupWeights& w) {
  const Eigen::Index P = prog.num_patterns();
  const Eigen::MatrixXd& Xc = prog.constraint_matrix();
  double moved = 0.0;
  for (Eigen::Index i = 0; i < P; ++i) {
    const Eigen::VectorXd s = sign_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd A = s.asDiagonal() * Xc;
    for (Eigen::Index side = 0; side < 2; ++side) {
      const Eigen::Index b = i + side * P;
      if (w.block(b).isZero(0.0)) continue;
      const Eigen::VectorXd proj = project_polyhedral_cone(A, w.block(b));
      moved = std::max(moved, (proj - w.block(b)).norm());
      w.block(b) = proj;
    }
  }
  return moved;
}

}  // namespace cvxnn
