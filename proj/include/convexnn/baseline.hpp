#pragma once

#include <cstdint>

#include "convexnn/network.hpp"

namespace cvxnn {

enum class Optimizer { gd, sgd };

struct TrainConfig {
  int m = 50;             // hidden neurons
  double lr = 1e-2;
  int batch_size = 0;     // 0 or >= n: full batch
  int epochs = 2000;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::sgd;
};

struct TrainResult {
  NetworkParams params;
  std::vector<double> objective_trajectory;  // full-batch regularized objective per epoch
  double final_objective = 0.0;
};

/// Minimizes the weight-decay objective by (mini-batch) subgradient
/// descent; the activation kink takes slope 1. Deterministic given the
/// seed. Throws on divergence (nonfinite objective).
TrainResult train_nonconvex(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double beta,
                            Activation act, const TrainConfig& cfg);

struct RestartRow {
  std::uint64_t seed;
  double lr;
  int m;
  double final_objective;
  double gap;  // final objective - supplied convex optimum
};

struct RestartSummary {
  std::vector<RestartRow> rows;
  double best_objective = 0.0;
  double convex_reference = 0.0;
};

/// Runs every config and tabulates final objectives against a convex
/// reference value (a global lower bound when the reference came from
/// exact enumeration).
RestartSummary multi_restart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double beta,
                             Activation act, const std::vector<TrainConfig>& cfgs,
                             double convex_reference);

struct LinearCnnGdResult {
  Eigen::MatrixXd filters;         // d x m
  Eigen::MatrixXd output_weights;  // m x K
  std::vector<double> objective_trajectory;
  double final_objective = 0.0;
};

/// Gradient descent on the linear (identity-activation) CNN
///   min 0.5||sum_k X_k W1 w2_k - y||^2 + (beta/2)(||W1||_F^2 + ||W2||_F^2).
LinearCnnGdResult train_linear_cnn_gd(const std::vector<Eigen::MatrixXd>& patches,
                                      const Eigen::VectorXd& y, double beta,
                                      const TrainConfig& cfg);

}  // namespace cvxnn
