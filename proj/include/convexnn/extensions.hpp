#pragma once

#include "convexnn/enumerate.hpp"
#include "convexnn/mapping.hpp"
#include "convexnn/sampling.hpp"
#include "convexnn/solvers.hpp"

namespace cvxnn {

struct LowRankPlan {
  Eigen::Index k = 0;
  double sigma_kplus1 = 0.0;
  double lipschitz_L = 0.0;  // instance estimate: loss residual at the zero predictor
  double lipschitz_R = 1.0;  // activation Lipschitz constant
  double beta = 0.0;
  double ratio() const { return std::pow(1.0 + lipschitz_L * lipschitz_R * sigma_kplus1 / beta, 2); }
};

struct LowRankResult {
  GroupWeights weights;
  PatternSet patterns;       // arrangements of the rank-k truncation
  NetworkParams network;
  LowRankPlan plan;
  double objective_value = 0.0;  // nonconvex objective of the reconstructed network
  SolveReport report;
};

/// Rank-k training pipeline: truncate the data, build arrangements of the
/// truncation, solve the convex program whose loss features use the
/// original data while the cone constraints come from the truncation, and
/// report the reconstructed network's objective with the certified ratio.
LowRankResult lowrank_train(const DataMatrix& X, const Eigen::VectorXd& y, Eigen::Index k,
                            double beta, Activation act, const SolverConfig& cfg,
                            const EnumerateOptions& enum_opts = {});

struct SpikeFreeResult {
  GroupWeights weights;  // 2 blocks
  double objective_value = 0.0;
  SolveReport report;
};

/// Two-block program for spike-free data (single all-ones arrangement).
/// Requires X X^T = I within 1e-8 unless assert_spike_free overrides the
/// whitened check.
SpikeFreeResult spike_free_train(const DataMatrix& X, const Eigen::VectorXd& y, double beta,
                                 const SolverConfig& cfg, bool assert_spike_free = false);

struct VectorOutputResult {
  std::vector<GroupWeights> columns;     // one solve per output column
  std::vector<double> column_objectives;
  double total_objective = 0.0;
  NetworkParams network;                 // assembled; W2 rows are 1-sparse
};

/// Decomposes the l1^2-regularized vector-output problem into C
/// independent scalar programs over a shared pattern set.
VectorOutputResult vector_output_train(const DataMatrix& X, const Eigen::MatrixXd& Y, double beta,
                                       const PatternSet& patterns, Activation act,
                                       const SolverConfig& cfg);

/// Patch matrices of a convolutional layer: K spatial positions, each an
/// n x d slice of the inputs.
struct PatchSet {
  std::vector<Eigen::MatrixXd> patches;
  Eigen::Index patch_dim = 0;
  int stride = 1;
  int padding = 0;

  Eigen::Index count() const { return static_cast<Eigen::Index>(patches.size()); }
  Eigen::Index rows() const { return patches.empty() ? 0 : patches.front().rows(); }

  /// 1D signals (rows of `signals`) cut into zero-padded windows.
  static PatchSet from_signal(const Eigen::MatrixXd& signals, int patch, int stride,
                              int padding);
};

struct GapReduction {
  DataMatrix stacked;  // nK x d concatenation of the patch matrices
  LossSpec loss;       // averages predictions over the K row groups
  Eigen::Index groups = 0;
};

/// Global-average-pooling reduction: training on the stacked matrix with
/// the group-averaging loss equals the pooled CNN objective.
GapReduction cnn_gap_reduce(const PatchSet& patches, const Eigen::VectorXd& y,
                            const LossSpec& inner = LossSpec::squared());

struct LinearCnnResult {
  Eigen::MatrixXd Z;                 // d x K
  Eigen::MatrixXd filters;           // d x r, left singular vectors
  Eigen::MatrixXd output_weights;    // r x K, sigma_j * right singular vectors
  double objective_value = 0.0;
  double dual_certificate = 0.0;     // sigma_max([X_k^T v]) at the solution
  SolveReport report;
};

/// Nuclear-norm training of the linear CNN; filters and per-position
/// output weights come from the SVD of Z.
LinearCnnResult linear_cnn_train(const PatchSet& patches, const Eigen::VectorXd& y, double beta,
                                 const SolverConfig& cfg, double factor_cutoff = 1e-10);

}  // namespace cvxnn
