#include "convexnn/baseline.hpp"

#include <numeric>
#include <stdexcept>

#include "convexnn/rng.hpp"

namespace cvxnn {

TrainResult train_nonconvex(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double beta,
                            Activation act, const TrainConfig& cfg) {
  if (!(cfg.lr >= 0.0)) throw std::invalid_argument("train_nonconvex: lr must be >= 0");
  if (cfg.m < 1) throw std::invalid_argument("train_nonconvex: m >= 1 required");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::Index m = cfg.m;
  const int batch = (cfg.batch_size <= 0 || cfg.batch_size >= n) ? static_cast<int>(n)
                                                                 : cfg.batch_size;

  Rng rng(cfg.seed);
  Eigen::MatrixXd W1 = rng.normal_matrix(d, m) * (cfg.init_scale / std::sqrt(static_cast<double>(d)));
  Eigen::VectorXd w2 = rng.normal_vector(m) * (cfg.init_scale / std::sqrt(static_cast<double>(m)));

  auto full_objective = [&]() {
    Eigen::MatrixXd pre = X * W1;
    const Eigen::VectorXd pred = act.apply(pre) * w2;
    return 0.5 * (pred - y).squaredNorm() +
           0.5 * beta * (W1.squaredNorm() + w2.squaredNorm());
  };

  TrainResult res;
  res.objective_trajectory.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
  res.objective_trajectory.push_back(full_objective());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.optimizer == Optimizer::sgd && batch < n) rng.shuffle(order);
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index take = std::min<Eigen::Index>(batch, n - start);
      Eigen::MatrixXd Xb(take, d);
      Eigen::VectorXd yb(take);
      for (Eigen::Index r = 0; r < take; ++r) {
        Xb.row(r) = X.row(order[static_cast<std::size_t>(start + r)]);
        yb[r] = y[order[static_cast<std::size_t>(start + r)]];
      }
      const Eigen::MatrixXd pre = Xb * W1;
      Eigen::MatrixXd slope = pre.unaryExpr(
          [k = act.kappa](double v) { return v >= 0.0 ? 1.0 : k; });
      const Eigen::MatrixXd phi = pre.cwiseProduct(slope);  // slope .* pre equals phi(pre)
      const Eigen::VectorXd r = phi * w2 - yb;
      const double scale = static_cast<double>(n) / static_cast<double>(take);
      // d/dW1: X^T ((r w2^T) .* slope), d/dw2: phi^T r, plus weight decay
      const Eigen::MatrixXd GW1 =
          scale * (Xb.transpose() * ((r * w2.transpose()).cwiseProduct(slope))) + beta * W1;
      const Eigen::VectorXd gw2 = scale * (phi.transpose() * r) + beta * w2;
      W1 -= cfg.lr * GW1;
      w2 -= cfg.lr * gw2;
    }
    const double obj = full_objective();
    if (!std::isfinite(obj))
      throw std::runtime_error("train_nonconvex: diverged (nonfinite objective); lower the lr");
    res.objective_trajectory.push_back(obj);
  }

  res.params.W1 = std::move(W1);
  res.params.W2 = w2;
  res.params.activation = act;
  res.final_objective = res.objective_trajectory.back();
  return res;
}

LinearCnnGdResult train_linear_cnn_gd(const std::vector<Eigen::MatrixXd>& patches,
                                      const Eigen::VectorXd& y, double beta,
                                      const TrainConfig& cfg) {
  if (patches.empty()) throw std::invalid_argument("train_linear_cnn_gd: no patches");
  const Eigen::Index n = patches.front().rows();
  const Eigen::Index d = patches.front().cols();
  const Eigen::Index K = static_cast<Eigen::Index>(patches.size());
  const Eigen::Index m = cfg.m;

  Rng rng(cfg.seed);
  Eigen::MatrixXd W1 = rng.normal_matrix(d, m) * (cfg.init_scale / std::sqrt(static_cast<double>(d)));
  Eigen::MatrixXd W2 = rng.normal_matrix(m, K) * (cfg.init_scale / std::sqrt(static_cast<double>(m)));

  auto forward = [&](Eigen::VectorXd& pred, std::vector<Eigen::MatrixXd>& XkW1) {
    pred.setZero(n);
    for (Eigen::Index k = 0; k < K; ++k) {
      XkW1[static_cast<std::size_t>(k)] = patches[static_cast<std::size_t>(k)] * W1;
      pred.noalias() += XkW1[static_cast<std::size_t>(k)] * W2.col(k);
    }
  };

  LinearCnnGdResult res;
  std::vector<Eigen::MatrixXd> XkW1(static_cast<std::size_t>(K));
  Eigen::VectorXd pred(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    forward(pred, XkW1);
    const Eigen::VectorXd r = pred - y;
    const double obj =
        0.5 * r.squaredNorm() + 0.5 * beta * (W1.squaredNorm() + W2.squaredNorm());
    if (!std::isfinite(obj))
      throw std::runtime_error("train_linear_cnn_gd: diverged; lower the lr");
    res.objective_trajectory.push_back(obj);

    Eigen::MatrixXd GW1 = beta * W1;
    Eigen::MatrixXd GW2 = beta * W2;
    for (Eigen::Index k = 0; k < K; ++k) {
      GW1.noalias() +=
          patches[static_cast<std::size_t>(k)].transpose() * r * W2.col(k).transpose();
      GW2.col(k).noalias() += XkW1[static_cast<std::size_t>(k)].transpose() * r;
    }
    W1 -= cfg.lr * GW1;
    W2 -= cfg.lr * GW2;
  }
  forward(pred, XkW1);
  res.final_objective = 0.5 * (pred - y).squaredNorm() +
                        0.5 * beta * (W1.squaredNorm() + W2.squaredNorm());
  res.objective_trajectory.push_back(res.final_objective);
  res.filters = std::move(W1);
  res.output_weights = std::move(W2);
  return res;
}

RestartSummary multi_restart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double beta,
                             Activation act, const std::vector<TrainConfig>& cfgs,
                             double convex_reference) {
  if (cfgs.empty()) throw std::invalid_argument("multi_restart: at least one config required");
  RestartSummary sum;
  sum.convex_reference = convex_reference;
  sum.best_objective = std::numeric_limits<double>::infinity();
  for (const auto& cfg : cfgs) {
    TrainResult r = train_nonconvex(X, y, beta, act, cfg);
    sum.rows.push_back({cfg.seed, cfg.lr, cfg.m, r.final_objective,
                        r.final_objective - convex_reference});
    sum.best_objective = std::min(sum.best_objective, r.final_objective);
  }
  return sum;
}

}  // namespace cvxnn
