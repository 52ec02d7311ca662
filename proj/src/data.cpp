#include "convexnn/data.hpp"

#include <Eigen/SVD>

namespace cvxnn {

SvdResult svd_decompose(const Eigen::MatrixXd& X, double tol) {
  SvdResult out;
  if (X.size() == 0) return out;
  if (!X.allFinite()) throw std::invalid_argument("svd_decompose: nonfinite entries");

  const Eigen::Index k = std::min(X.rows(), X.cols());
  if (X.isZero(0.0)) {
    out.singular_values = Eigen::VectorXd::Zero(k);
    out.U.resize(X.rows(), 0);
    out.V.resize(X.cols(), 0);
    out.rank = 0;
    return out;
  }

  Eigen::MatrixXd U, V;
  Eigen::VectorXd s;
  if (k <= 32) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U = svd.matrixU();
    V = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U = svd.matrixU();
    V = svd.matrixV();
    s = svd.singularValues();
  }

  Eigen::Index rank = 0;
  const double cutoff = tol * s[0];
  while (rank < s.size() && s[rank] > cutoff) ++rank;

  out.singular_values = s;
  out.U = U.leftCols(rank);
  out.V = V.leftCols(rank);
  out.rank = rank;
  return out;
}

DataMatrix::DataMatrix(Eigen::MatrixXd values, bool bias_augmented, double rank_tol)
    : values_(std::move(values)), bias_augmented_(bias_augmented) {
  if (!values_.allFinite())
    throw std::invalid_argument("DataMatrix: entries must be finite");
  if (bias_augmented_) {
    if (values_.cols() == 0 ||
        !values_.col(values_.cols() - 1).isApproxToConstant(1.0, 1e-12))
      throw std::invalid_argument("DataMatrix: bias-augmented matrix must end in a ones column");
  }
  svd_ = svd_decompose(values_, rank_tol);
}

DataMatrix DataMatrix::with_bias(const Eigen::MatrixXd& raw, double rank_tol) {
  Eigen::MatrixXd aug(raw.rows(), raw.cols() + 1);
  aug << raw, Eigen::VectorXd::Ones(raw.rows());
  return DataMatrix(std::move(aug), true, rank_tol);
}

Eigen::MatrixXd DataMatrix::truncate(Eigen::Index k) const {
  if (k < 0 || k > svd_.rank)
    throw std::invalid_argument("DataMatrix::truncate: k out of range");
  return svd_.U.leftCols(k) * svd_.singular_values.head(k).asDiagonal() *
         svd_.V.leftCols(k).transpose();
}

}  // namespace cvxnn
