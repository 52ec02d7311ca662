#pragma once

#include <optional>
#include <string>

#include "convexnn/activation.hpp"
#include "convexnn/data.hpp"

namespace cvxnn {

/// Classical two-layer parameters f(X) = phi(X W1 + 1 b^T) W2.
struct NetworkParams {
  Eigen::MatrixXd W1;                 // d x m
  Eigen::MatrixXd W2;                 // m x C
  std::optional<Eigen::VectorXd> bias;  // m
  Activation activation;

  Eigen::Index neurons() const { return W1.cols(); }
  Eigen::Index outputs() const { return W2.cols(); }

  static NetworkParams empty(Eigen::Index d, Eigen::Index C, Activation act) {
    NetworkParams p;
    p.W1.resize(d, 0);
    p.W2.resize(0, C);
    p.activation = act;
    return p;
  }

  /// Scalar-output view of the second layer.
  Eigen::VectorXd w2() const { return W2.col(0); }

  /// Flat CSV: W1 column-major, then W2 column-major, then bias.
  std::string to_csv() const;
  static NetworkParams from_csv(const std::string& text);
};

Eigen::MatrixXd network_forward(const NetworkParams& params, const Eigen::MatrixXd& X);

/// Eq.-style weight-decay objective: loss + (beta/2)(||W1||_F^2 +
/// ||W2||_F^2), bias grouped with W1 when present. Squared loss.
double nonconvex_objective(const NetworkParams& params, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& Y, double beta);

/// Vector-output variant with the l1^2 second-layer penalty:
/// loss + (beta/2) sum_j (||w1_j||_2^2 + ||w2_j||_1^2).
double nonconvex_objective_l1sq(const NetworkParams& params, const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y, double beta);

struct RescaleResult {
  NetworkParams params;
  int dropped = 0;  // neurons with zero hidden weight but nonzero output weight
};

/// Per-neuron rescaling to ||w1_j|| = |w2_j| (scalar output). The network
/// function is unchanged by positive homogeneity, and the weight-decay
/// penalty can only decrease.
RescaleResult rescale_balanced(const NetworkParams& params);

}  // namespace cvxnn
