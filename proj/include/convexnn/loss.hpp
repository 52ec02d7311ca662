#pragma once

#include <functional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace cvxnn {

/// Convex loss on predictions. The squared kind is 0.5*||z - y||_F^2; a
/// user-supplied kind carries its own value/gradient callables and a
/// Lipschitz constant for the gradient (used for step sizes).
class LossSpec {
 public:
  enum class Kind { squared, custom };

  using ValueFn = std::function<double(const Eigen::MatrixXd&, const Eigen::MatrixXd&)>;
  using GradFn =
      std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, const Eigen::MatrixXd&)>;

  static LossSpec squared() { return LossSpec(); }

  static LossSpec custom(ValueFn value, GradFn gradient, double grad_lipschitz = 1.0) {
    LossSpec l;
    l.kind_ = Kind::custom;
    l.value_ = std::move(value);
    l.grad_ = std::move(gradient);
    l.grad_lipschitz_ = grad_lipschitz;
    return l;
  }

  Kind kind() const { return kind_; }
  bool is_squared() const { return kind_ == Kind::squared; }

  double value(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels) const {
    if (kind_ == Kind::squared) return 0.5 * (pred - labels).squaredNorm();
    return value_(pred, labels);
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels) const {
    if (kind_ == Kind::squared) return pred - labels;
    return grad_(pred, labels);
  }

  /// Lipschitz constant of the gradient in the prediction argument.
  double grad_lipschitz() const { return kind_ == Kind::squared ? 1.0 : grad_lipschitz_; }

 private:
  LossSpec() = default;

  Kind kind_ = Kind::squared;
  ValueFn value_;
  GradFn grad_;
  double grad_lipschitz_ = 1.0;
};

}  // namespace cvxnn
