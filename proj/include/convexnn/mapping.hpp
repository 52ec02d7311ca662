#pragma once

#include "convexnn/network.hpp"
#include "convexnn/program.hpp"

namespace cvxnn {

/// Builds one neuron per nonzero block: (w1, w2) = (w_i / sqrt(||w_i||),
/// +-sqrt(||w_i||)) with the minus sign for i > P. When the program was
/// bias-augmented, the last block coordinate becomes the neuron bias.
NetworkParams convex_to_network(const GroupWeights& w, const ConvexProgram& prog,
                                double zero_cutoff = 1e-12);

/// Per-neuron lifted representation of a network: each neuron keeps its own
/// block under its own activation pattern; patterns are deduplicated but
/// same-pattern blocks are not summed.
struct NeuronBlocks {
  PatternSet patterns;
  struct Entry {
    std::size_t pattern_index;
    bool positive;     // sign of the output weight
    Eigen::VectorXd v; // w1_j * |w2_j| after balancing
  };
  std::vector<Entry> entries;

  /// Collapses into GroupWeights by summing same-pattern blocks (an upper
  /// bound move: the group norm is subadditive).
  GroupWeights collapse(Eigen::Index dim) const;

  /// Group-Lasso objective value of the kept-blocks representation.
  double objective_kept(const DataMatrix& X, const LabelData& y, Activation act,
                        double beta) const;
};

NeuronBlocks network_to_convex(const NetworkParams& params, const DataMatrix& X);

struct StationarityReport {
  bool is_stationary = false;
  /// per active neuron: [output-layer residual, hidden-layer residual,
  /// balance residual], all relative to their natural scales
  Eigen::MatrixXd residuals;  // m x 3
  std::vector<Eigen::Index> neuron_index;
  double worst = 0.0;
};

/// Checks the first-order (Clarke) stationarity system of the weight-decay
/// objective at `params` under the squared loss: output-layer alignment,
/// hidden-layer alignment with a boundary-set feasibility search over the
/// activation subdifferential, and the |w2_j| = ||w1_j|| balance.
StationarityReport stationarity_check(const NetworkParams& params, const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y, double beta, double tol);

}  // namespace cvxnn
