#pragma once

#include <string>

#include "convexnn/data.hpp"

namespace cvxnn {

struct Dataset {
  DataMatrix X;
  LabelData y;
  std::string name;
};

/// Loads a dataset from a CSV file (header row; label columns are those
/// whose name starts with "label") or builds one of the generators:
///   toy1d
///   planted_relu(n=20,d=3,m=5,noise=0.1,seed=0)
///   rank_deficient_gaussian(n=10,d=8,k=4,seed=0)
///   ar3(path=series.csv) or ar3(n=200,seed=0) for the synthetic series
/// Generator specs look like "name" or "name(k=v,k=v)".
Dataset load_dataset(const std::string& spec);

/// X = [-2 -1 0 1 2]^T with an appended ones column, y = [1 -1 1 1 -1]^T.
Dataset make_toy1d();

/// Labels from a random 5-neuron ReLU network plus 0.1-scale noise.
Dataset make_planted_relu(Eigen::Index n, Eigen::Index d, int m, double noise,
                          std::uint64_t seed);

/// Gaussian matrix whose trailing singular values are set to exactly 1
/// (sigma_{k+1} = ... = sigma_d = 1); labels from a planted ReLU network.
Dataset make_rank_deficient_gaussian(Eigen::Index n, Eigen::Index d, Eigen::Index k,
                                     std::uint64_t seed);

/// Three-lag autoregressive windows of a series: row i = (s_{i+2}, s_{i+1},
/// s_i), label s_{i+3}.
Dataset make_ar3_from_series(const Eigen::VectorXd& series);

/// Quasi-periodic synthetic series for the AR(3) task.
Eigen::VectorXd make_ar3_series(Eigen::Index length, std::uint64_t seed);

Dataset load_csv_dataset(const std::string& path);
void save_csv_dataset(const Dataset& ds, const std::string& path);

}  // namespace cvxnn
