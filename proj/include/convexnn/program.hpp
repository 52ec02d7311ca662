#pragma once

#include <optional>
#include <string>

#include "convexnn/activation.hpp"
#include "convexnn/data.hpp"
#include "convexnn/loss.hpp"
#include "convexnn/pattern.hpp"

namespace cvxnn {

/// Variable of the lifted convex program: 2P blocks, one column each.
/// Blocks i and i+P share pattern i (positive and negative output sign).
/// When the program is bias-augmented the last coordinate of each block is
/// the per-block bias.
struct GroupWeights {
  Eigen::MatrixXd blocks;  // dim x 2P

  GroupWeights() = default;
  GroupWeights(Eigen::Index dim, Eigen::Index num_patterns)
      : blocks(Eigen::MatrixXd::Zero(dim, 2 * num_patterns)) {}

  Eigen::Index dim() const { return blocks.rows(); }
  Eigen::Index num_patterns() const { return blocks.cols() / 2; }
  Eigen::Index num_blocks() const { return blocks.cols(); }

  auto block(Eigen::Index i) { return blocks.col(i); }
  auto block(Eigen::Index i) const { return blocks.col(i); }
};

/// The finite convex program: group-regularized loss over lifted features
/// with per-pattern cone constraints. In interpolation mode (beta = 0) the
/// solver minimizes the group norm subject to fitting the labels.
struct ConvexProgram {
  DataMatrix X;
  LabelData labels;
  PatternSet patterns;
  Activation activation;
  LossSpec loss = LossSpec::squared();
  double beta = 1e-3;
  int reg_p = 2;             // group lp exponent; {1, 2} only
  bool with_bias = false;    // X carries the ones column, blocks end in bias
  bool constrained = true;   // false: penalized form only
  bool interpolation = false;

  /// Constraint rows when they differ from the feature rows (the low-rank
  /// pipeline builds constraints from the truncated matrix while the loss
  /// uses the original features).
  std::optional<Eigen::MatrixXd> constraint_values;

  ConvexProgram(DataMatrix X_, LabelData labels_, PatternSet patterns_, Activation act,
                double beta_, LossSpec loss_ = LossSpec::squared());

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
  Eigen::Index num_patterns() const { return static_cast<Eigen::Index>(patterns.size()); }

  const Eigen::MatrixXd& constraint_matrix() const {
    return constraint_values ? *constraint_values : X.values();
  }

  GroupWeights zero_weights() const { return GroupWeights(dim(), num_patterns()); }

  std::string summary_json() const;
};

/// Kappa-valued feature block D_i X for pattern i (n x dim). Blocks for
/// i >= P are the negations; callers handle the sign.
Eigen::MatrixXd build_feature_block(const ConvexProgram& prog, Eigen::Index i);

/// Model output sum_i D_i X (w_i - w_{i+P}).
Eigen::VectorXd predict(const ConvexProgram& prog, const GroupWeights& w);

double regularizer(const ConvexProgram& prog, const GroupWeights& w);
double objective(const ConvexProgram& prog, const GroupWeights& w);

struct ViolationReport {
  Eigen::VectorXd per_block;  // 2P entries, inf-norm of the negative part
  double max = 0.0;
};

/// Constraint violation uses the binary diagonal (2*diag(bits) - I); the
/// same polyhedron is valid for every kappa < 0.5.
ViolationReport constraint_violation(const ConvexProgram& prog, const GroupWeights& w);

/// Hinge-penalized objective of the unconstrained reformulation:
/// objective + rho * sum_i 1^T max(0, -(2D_i - I) Xc w_i).
double penalized_objective(const ConvexProgram& prog, const GroupWeights& w, double rho);

/// beta = 0 program: minimize the group norm subject to fitting y.
ConvexProgram build_interpolation_program(DataMatrix X, LabelData y, PatternSet patterns,
                                          Activation act = Activation::relu());

/// Lifted feature map with an optional dense cache (materialized when
/// n * 2 * dim * P stays under the memory cap).
class FeatureOp {
 public:
  explicit FeatureOp(const ConvexProgram& prog, std::size_t dense_cap = 10'000'000);

  Eigen::VectorXd apply(const GroupWeights& w) const;

  /// Adjoint: column i of the result is X_i^T g (negated for i >= P).
  Eigen::MatrixXd adjoint(const Eigen::VectorXd& g) const;

  /// Largest eigenvalue of the lifted Gram, by power iteration.
  double gram_norm_estimate(int iters = 20) const;

  const ConvexProgram& program() const { return *prog_; }

 private:
  const ConvexProgram* prog_;
  std::vector<Eigen::VectorXd> diag_;  // kappa diagonals per pattern
  std::optional<Eigen::MatrixXd> dense_;  // n x (2 * dim * P) when cached
};

}  // namespace cvxnn
