#include "convexnn/program.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "convexnn/textio.hpp"

namespace cvxnn {

ConvexProgram::ConvexProgram(DataMatrix X_, LabelData labels_, PatternSet patterns_,
                             Activation act, double beta_, LossSpec loss_)
    : X(std::move(X_)),
      labels(std::move(labels_)),
      patterns(std::move(patterns_)),
      activation(act),
      loss(std::move(loss_)),
      beta(beta_) {
  if (patterns.n != static_cast<std::size_t>(X.rows()))
    throw std::invalid_argument("ConvexProgram: pattern length != n");
  if (loss.is_squared() && labels.rows() != X.rows())
    throw std::invalid_argument("ConvexProgram: label rows != n");
  if (beta < 0.0) throw std::invalid_argument("ConvexProgram: beta must be >= 0");
  if (beta == 0.0) interpolation = true;
  with_bias = X.bias_augmented();
}

std::string ConvexProgram::summary_json() const {
  nlohmann::ordered_json j;
  j["n"] = n();
  j["d"] = dim();
  j["P"] = num_patterns();
  j["beta"] = beta;
  j["kappa"] = activation.kappa;
  j["p"] = reg_p;
  j["with_bias"] = with_bias;
  j["mode"] = interpolation ? "interpolation" : (constrained ? "constrained" : "penalized");
  j["patterns_source"] = to_string(patterns.source);
  return j.dump();
}

Eigen::MatrixXd build_feature_block(const ConvexProgram& prog, Eigen::Index i) {
  if (i < 0 || i >= prog.num_patterns())
    throw std::invalid_argument("build_feature_block: pattern index out of range");
  const Eigen::VectorXd d = kappa_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)],
                                           prog.activation.kappa);
  return d.asDiagonal() * prog.X.values();
}

Eigen::VectorXd predict(const ConvexProgram& prog, const GroupWeights& w) {
  const Eigen::Index P = prog.num_patterns();
  if (w.num_patterns() != P || w.dim() != prog.dim())
    throw std::invalid_argument("predict: weight shape mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(prog.n());
  for (Eigen::Index i = 0; i < P; ++i) {
    const Eigen::VectorXd diff = w.block(i) - w.block(i + P);
    if (diff.isZero(0.0)) continue;
    const Eigen::VectorXd d = kappa_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)],
                                             prog.activation.kappa);
    out.noalias() += d.cwiseProduct(prog.X.values() * diff);
  }
  return out;
}

double regularizer(const ConvexProgram& prog, const GroupWeights& w) {
  if (prog.reg_p != 1 && prog.reg_p != 2)
    throw std::invalid_argument("regularizer: only p in {1,2} is supported");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < w.num_blocks(); ++i)
    sum += prog.reg_p == 2 ? w.block(i).norm() : w.block(i).lpNorm<1>();
  return prog.beta * sum;
}

double objective(const ConvexProgram& prog, const GroupWeights& w) {
  return prog.loss.value(predict(prog, w), prog.labels.values) + regularizer(prog, w);
}

ViolationReport constraint_violation(const ConvexProgram& prog, const GroupWeights& w) {
  const Eigen::Index P = prog.num_patterns();
  const Eigen::MatrixXd& Xc = prog.constraint_matrix();
  ViolationReport rep;
  rep.per_block = Eigen::VectorXd::Zero(2 * P);
  for (Eigen::Index i = 0; i < P; ++i) {
    const Eigen::VectorXd s = sign_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)]);
    for (Eigen::Index side = 0; side < 2; ++side) {
      const Eigen::Index b = i + side * P;
      if (w.block(b).isZero(0.0)) continue;
      const Eigen::VectorXd slack = s.cwiseProduct(Xc * w.block(b));
      rep.per_block[b] = std::max(0.0, -slack.minCoeff());
    }
  }
  rep.max = rep.per_block.size() ? rep.per_block.maxCoeff() : 0.0;
  return rep;
}

double penalized_objective(const ConvexProgram& prog, const GroupWeights& w, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("penalized_objective: rho must be positive");
  const Eigen::Index P = prog.num_patterns();
  const Eigen::MatrixXd& Xc = prog.constraint_matrix();
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < P; ++i) {
    const Eigen::VectorXd s = sign_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)]);
    for (Eigen::Index side = 0; side < 2; ++side) {
      const Eigen::Index b = i + side * P;
      if (w.block(b).isZero(0.0)) continue;
      hinge += (-(s.cwiseProduct(Xc * w.block(b)).array())).max(0.0).sum();
    }
  }
  return objective(prog, w) + rho * hinge;
}

ConvexProgram build_interpolation_program(DataMatrix X, LabelData y, PatternSet patterns,
                                          Activation act) {
  ConvexProgram prog(std::move(X), std::move(y), std::move(patterns), act, 0.0);
  prog.interpolation = true;
  return prog;
}

FeatureOp::FeatureOp(const ConvexProgram& prog, std::size_t dense_cap) : prog_(&prog) {
  const Eigen::Index P = prog.num_patterns();
  diag_.reserve(static_cast<std::size_t>(P));
  for (Eigen::Index i = 0; i < P; ++i)
    diag_.push_back(kappa_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)],
                                   prog.activation.kappa));
  const std::size_t entries = static_cast<std::size_t>(prog.n()) * 2 *
                              static_cast<std::size_t>(prog.dim()) *
                              static_cast<std::size_t>(P);
  if (P > 0 && entries <= dense_cap) {
    Eigen::MatrixXd dense(prog.n(), 2 * prog.dim() * P);
    for (Eigen::Index i = 0; i < P; ++i) {
      const Eigen::MatrixXd blk = diag_[static_cast<std::size_t>(i)].asDiagonal() * prog.X.values();
      dense.middleCols(i * prog.dim(), prog.dim()) = blk;
      dense.middleCols((P + i) * prog.dim(), prog.dim()) = -blk;
    }
    dense_ = std::move(dense);
  }
}

Eigen::VectorXd FeatureOp::apply(const GroupWeights& w) const {
  const Eigen::Index P = prog_->num_patterns();
  const Eigen::Index D = prog_->dim();
  if (dense_) {
    Eigen::Map<const Eigen::VectorXd> flat(w.blocks.data(), w.blocks.size());
    return *dense_ * flat;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(prog_->n());
  for (Eigen::Index i = 0; i < P; ++i) {
    const Eigen::VectorXd diff = w.block(i) - w.block(i + P);
    if (diff.isZero(0.0)) continue;
    out.noalias() += diag_[static_cast<std::size_t>(i)].cwiseProduct(prog_->X.values() * diff);
  }
  (void)D;
  return out;
}

Eigen::MatrixXd FeatureOp::adjoint(const Eigen::VectorXd& g) const {
  const Eigen::Index P = prog_->num_patterns();
  Eigen::MatrixXd out(prog_->dim(), 2 * P);
  for (Eigen::Index i = 0; i < P; ++i) {
    out.col(i).noalias() =
        prog_->X.values().transpose() * diag_[static_cast<std::size_t>(i)].cwiseProduct(g);
    out.col(i + P) = -out.col(i);
  }
  return out;
}

double FeatureOp::gram_norm_estimate(int iters) const {
  const Eigen::Index P = prog_->num_patterns();
  if (P == 0) return 0.0;
  GroupWeights v(prog_->dim(), P);
  // deterministic start without the +-block symmetry that would cancel in
  // the lifted map
  for (Eigen::Index k = 0; k < v.blocks.size(); ++k)
    v.blocks.data()[k] = std::cos(0.7 * static_cast<double>(k) + 0.3);
  v.blocks /= v.blocks.norm();
  double lambda = 0.0;
  for (int t = 0; t < iters; ++t) {
    const Eigen::VectorXd av = apply(v);
    Eigen::MatrixXd next = adjoint(av);
    const double nrm = next.norm();
    if (nrm == 0.0) return 0.0;
    lambda = nrm;
    v.blocks = next / nrm;
  }
  return lambda;
}

}  // namespace cvxnn
