#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cvxnn {

struct SvdResult {
  Eigen::MatrixXd U;               // n x rank
  Eigen::VectorXd singular_values; // full min(n,d) spectrum, nonincreasing
  Eigen::MatrixXd V;               // d x rank
  Eigen::Index rank = 0;           // numerical rank at the given tolerance
};

/// Thin SVD with numerical rank = #{sigma_k > tol * sigma_1}. U/V are
/// truncated to the numerical rank; the full spectrum is kept. An all-zero
/// matrix yields rank 0 and empty factors.
SvdResult svd_decompose(const Eigen::MatrixXd& X, double tol = 1e-10);

/// Training matrix with cached spectral data. Immutable after construction.
class DataMatrix {
 public:
  explicit DataMatrix(Eigen::MatrixXd values, bool bias_augmented = false,
                      double rank_tol = 1e-10);

  /// Appends a column of ones (bias feature, per the usual augmentation).
  static DataMatrix with_bias(const Eigen::MatrixXd& raw, double rank_tol = 1e-10);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  bool bias_augmented() const { return bias_augmented_; }

  Eigen::Index rank() const { return svd_.rank; }
  const Eigen::VectorXd& singular_values() const { return svd_.singular_values; }
  const SvdResult& svd() const { return svd_; }

  /// (k+1)-th largest singular value, 0 beyond the spectrum.
  double sigma(Eigen::Index k) const {
    return k < svd_.singular_values.size() ? svd_.singular_values[k] : 0.0;
  }

  /// Rank-k truncation U_k S_k V_k^T.
  Eigen::MatrixXd truncate(Eigen::Index k) const;

 private:
  Eigen::MatrixXd values_;
  bool bias_augmented_ = false;
  SvdResult svd_;
};

struct LabelData {
  Eigen::MatrixXd values;  // n x C

  explicit LabelData(Eigen::MatrixXd v) : values(std::move(v)) {
    if (!values.allFinite())
      throw std::invalid_argument("LabelData: entries must be finite");
  }
  static LabelData column(const Eigen::VectorXd& y) { return LabelData(Eigen::MatrixXd(y)); }

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index outputs() const { return values.cols(); }
  Eigen::VectorXd col(Eigen::Index c) const { return values.col(c); }
};

}  // namespace cvxnn
