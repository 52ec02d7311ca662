#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace cvxnn {

/// Piecewise linear activation: identity slope on the nonnegative side,
/// slope kappa on the negative side. kappa < 0.5 is required; kappa = 0 is
/// ReLU, kappa = 0.1 leaky ReLU, kappa = -1 absolute value. The map is
/// positively homogeneous of degree one.
struct Activation {
  double kappa = 0.0;

  Activation() = default;
  explicit Activation(double k) : kappa(k) {
    if (!(k < 0.5))
      throw std::invalid_argument("Activation: kappa must satisfy kappa < 0.5");
  }

  static Activation relu() { return Activation(0.0); }
  static Activation leaky() { return Activation(0.1); }
  static Activation absolute() { return Activation(-1.0); }

  /// Value at x = 0 uses the nonnegative branch (value 0, pattern bit 1).
  double operator()(double x) const { return x >= 0.0 ? x : kappa * x; }

  /// Slope used by subgradient-based trainers; the kink takes slope 1.
  double slope(double x) const { return x >= 0.0 ? 1.0 : kappa; }

  /// Lipschitz constant: max(1, |kappa|).
  double lipschitz() const { return kappa < -1.0 ? -kappa : 1.0; }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const {
    return m.unaryExpr([k = kappa](double x) { return x >= 0.0 ? x : k * x; });
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return v.unaryExpr([k = kappa](double x) { return x >= 0.0 ? x : k * x; });
  }
};

}  // namespace cvxnn
