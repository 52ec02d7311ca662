#include <chrono>

#include <Eigen/SVD>

#include "convexnn/solvers.hpp"

namespace cvxnn {

namespace {

Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double tau) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = (svd.singularValues().array() - tau).max(0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double nuclear_norm(const Eigen::MatrixXd& M) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues().sum();
}

void check_patches(const std::vector<Eigen::MatrixXd>& patches, const Eigen::VectorXd& y) {
  if (patches.empty()) throw std::invalid_argument("patches must be nonempty");
  for (const auto& X : patches)
    if (X.rows() != patches.front().rows() || X.cols() != patches.front().cols())
      throw std::invalid_argument("patch shapes must agree");
  if (y.size() != patches.front().rows())
    throw std::invalid_argument("label length must match patch rows");
}

}  // namespace

std::pair<Eigen::MatrixXd, SolveReport> solve_nuclear(const std::vector<Eigen::MatrixXd>& patches,
                                                      const Eigen::VectorXd& y, double beta,
                                                      const SolverConfig& cfg) {
  check_patches(patches, y);
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index K = static_cast<Eigen::Index>(patches.size());
  const Eigen::Index d = patches.front().cols();
  const Eigen::Index n = patches.front().rows();

  // pred = X_cat vec(Z), so the gradient Lipschitz constant is
  // sigma_max(X_cat)^2
  Eigen::MatrixXd X_cat(n, d * K);
  for (Eigen::Index k = 0; k < K; ++k) X_cat.middleCols(k * d, d) = patches[static_cast<std::size_t>(k)];
  const double L = std::pow(X_cat.operatorNorm(), 2);
  const double t_step = L > 0 ? 1.0 / L : 1.0;

  auto predict_z = [&](const Eigen::MatrixXd& Z) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < K; ++k) p.noalias() += patches[static_cast<std::size_t>(k)] * Z.col(k);
    return p;
  };
  auto stack_grad = [&](const Eigen::VectorXd& g) {
    Eigen::MatrixXd G(d, K);
    for (Eigen::Index k = 0; k < K; ++k)
      G.col(k) = patches[static_cast<std::size_t>(k)].transpose() * g;
    return G;
  };
  auto obj = [&](const Eigen::MatrixXd& Z) {
    return 0.5 * (predict_z(Z) - y).squaredNorm() + beta * nuclear_norm(Z);
  };

  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(d, K);
  Eigen::MatrixXd V = Z, Z_prev = Z;
  double theta = 1.0;
  SolveReport rep;
  double best = obj(Z);
  rep.objective_history.push_back(best);
  int stall = 0;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Eigen::VectorXd g = predict_z(V) - y;
    Eigen::MatrixXd Z_new = svt(V - t_step * stack_grad(g), t_step * beta);
    const double o = obj(Z_new);
    if (o > best + 1e-14 * std::max(1.0, best)) {
      // monotone restart
      V = Z;
      theta = 1.0;
      continue;
    }
    const double rel = std::abs(best - o) / std::max(1.0, std::abs(o));
    Z_prev = Z;
    Z = Z_new;
    best = o;
    rep.objective_history.push_back(best);
    const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    V = Z + ((theta - 1.0) / theta_new) * (Z - Z_prev);
    theta = theta_new;
    if (rel < cfg.rel_tol) {
      if (++stall >= 10) {
        rep.status = SolveStatus::converged;
        ++it;
        break;
      }
    } else {
      stall = 0;
    }
  }
  rep.iterations = it;
  rep.final_objective = best;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {Z, rep};
}

double nuclear_dual_certificate(const std::vector<Eigen::MatrixXd>& patches,
                                const Eigen::VectorXd& y, const Eigen::MatrixXd& Z) {
  check_patches(patches, y);
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(y.size());
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(patches.size()); ++k)
    pred.noalias() += patches[static_cast<std::size_t>(k)] * Z.col(k);
  const Eigen::VectorXd v = pred - y;  // gradient of the squared loss
  Eigen::MatrixXd G(patches.front().cols(), static_cast<Eigen::Index>(patches.size()));
  for (std::size_t k = 0; k < patches.size(); ++k)
    G.col(static_cast<Eigen::Index>(k)) = patches[k].transpose() * v;
  return G.operatorNorm();
}

}  // namespace cvxnn
