#include "convexnn/mapping.hpp"

#include <stdexcept>

#include "convexnn/lp.hpp"

namespace cvxnn {

NetworkParams convex_to_network(const GroupWeights& w, const ConvexProgram& prog,
                                double zero_cutoff) {
  const Eigen::Index P = prog.num_patterns();
  double max_norm = 0.0;
  for (Eigen::Index b = 0; b < w.num_blocks(); ++b)
    max_norm = std::max(max_norm, w.block(b).norm());
  const double cutoff = zero_cutoff * std::max(1.0, max_norm);

  std::vector<Eigen::Index> active;
  for (Eigen::Index b = 0; b < w.num_blocks(); ++b)
    if (w.block(b).norm() > cutoff) active.push_back(b);

  NetworkParams net;
  net.activation = prog.activation;
  net.W1.resize(prog.dim(), static_cast<Eigen::Index>(active.size()));
  net.W2.resize(static_cast<Eigen::Index>(active.size()), 1);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Eigen::Index b = active[k];
    const double nrm = w.block(b).norm();
    const double root = std::sqrt(nrm);
    net.W1.col(static_cast<Eigen::Index>(k)) = w.block(b) / root;
    net.W2(static_cast<Eigen::Index>(k), 0) = b < P ? root : -root;
  }
  return net;
}

GroupWeights NeuronBlocks::collapse(Eigen::Index dim) const {
  GroupWeights w(dim, static_cast<Eigen::Index>(patterns.size()));
  const Eigen::Index P = static_cast<Eigen::Index>(patterns.size());
  for (const auto& e : entries) {
    const Eigen::Index i = static_cast<Eigen::Index>(e.pattern_index);
    w.blocks.col(e.positive ? i : i + P) += e.v;
  }
  return w;
}

double NeuronBlocks::objective_kept(const DataMatrix& X, const LabelData& y, Activation act,
                                    double beta) const {
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(X.rows());
  double reg = 0.0;
  for (const auto& e : entries) {
    const Eigen::VectorXd d = kappa_diagonal(patterns.patterns[e.pattern_index], act.kappa);
    const double s = e.positive ? 1.0 : -1.0;
    pred.noalias() += s * d.cwiseProduct(X.values() * e.v);
    reg += e.v.norm();
  }
  return 0.5 * (pred - y.values.col(0)).squaredNorm() + beta * reg;
}

NeuronBlocks network_to_convex(const NetworkParams& params, const DataMatrix& X) {
  if (params.outputs() != 1)
    throw std::invalid_argument("network_to_convex: scalar output networks only");
  if (params.bias)
    throw std::invalid_argument(
        "network_to_convex: fold the bias into an augmented ones column first");

  const RescaleResult balanced = rescale_balanced(params);
  const NetworkParams& net = balanced.params;

  NeuronBlocks out;
  out.patterns.source = PatternSource::user;
  out.patterns.n = static_cast<std::size_t>(X.rows());

  std::vector<std::pair<ArrangementPattern, std::pair<bool, Eigen::VectorXd>>> raw;
  for (Eigen::Index j = 0; j < net.neurons(); ++j) {
    const double w2 = net.W2(j, 0);
    if (w2 == 0.0) continue;
    ArrangementPattern p = ArrangementPattern::of_direction(X.values(), net.W1.col(j));
    Eigen::VectorXd v = net.W1.col(j) * std::abs(w2);
    raw.emplace_back(std::move(p), std::make_pair(w2 > 0.0, std::move(v)));
    out.patterns.patterns.push_back(raw.back().first);
  }
  out.patterns.canonicalize();
  for (auto& [p, sv] : raw) {
    const auto idx = out.patterns.index_of(p);
    out.entries.push_back({*idx, sv.first, std::move(sv.second)});
  }
  return out;
}

StationarityReport stationarity_check(const NetworkParams& params, const Eigen::MatrixXd& X_in,
                                      const Eigen::VectorXd& y, double beta, double tol) {
  if (params.outputs() != 1)
    throw std::invalid_argument("stationarity_check: scalar output networks only");

  // fold a trainable bias into an augmented ones column
  Eigen::MatrixXd X = X_in;
  Eigen::MatrixXd W1 = params.W1;
  if (params.bias) {
    X.conservativeResize(Eigen::NoChange, X.cols() + 1);
    X.col(X.cols() - 1).setOnes();
    W1.conservativeResize(W1.rows() + 1, Eigen::NoChange);
    W1.row(W1.rows() - 1) = params.bias->transpose();
  }
  const Activation& act = params.activation;
  const double kappa = act.kappa;

  Eigen::VectorXd pred = Eigen::VectorXd::Zero(X.rows());
  for (Eigen::Index j = 0; j < W1.cols(); ++j)
    pred.noalias() += act.apply(Eigen::VectorXd(X * W1.col(j))) * params.W2(j, 0);
  const Eigen::VectorXd g = pred - y;

  const double eps = 1e-30;
  StationarityReport rep;
  std::vector<Eigen::Vector3d> rows;
  for (Eigen::Index j = 0; j < W1.cols(); ++j) {
    const Eigen::VectorXd w1 = W1.col(j);
    const double w2 = params.W2(j, 0);
    const double n1 = w1.norm();
    if (n1 == 0.0 && w2 == 0.0) continue;
    rep.neuron_index.push_back(j);
    if (n1 == 0.0 || w2 == 0.0) {
      rows.emplace_back(1.0, 1.0, 1.0);
      continue;
    }

    const Eigen::VectorXd z = X * w1;
    const Eigen::VectorXd phi = act.apply(z);

    // output layer: beta*w2 + g^T phi(X w1) = 0
    const double t_out = g.dot(phi);
    const double res_out = std::abs(beta * w2 + t_out) /
                           std::max(std::abs(beta * w2) + std::abs(t_out), eps);

    // hidden layer: beta*w1 + w2 * X^T (D + S diag(delta)) g = 0 with the
    // boundary rows free over the activation subdifferential [kappa, 1]
    const double bnd_tol = 1e-7 * n1;
    Eigen::VectorXd slopes(z.size());
    std::vector<Eigen::Index> boundary;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double row_scale = X.row(i).norm();
      if (std::abs(z[i]) <= bnd_tol * row_scale) {
        slopes[i] = 0.0;
        boundary.push_back(i);
      } else {
        slopes[i] = z[i] > 0.0 ? 1.0 : kappa;
      }
    }
    Eigen::VectorXd h = X.transpose() * slopes.cwiseProduct(g);
    if (!boundary.empty()) {
      Eigen::MatrixXd M(X.cols(), static_cast<Eigen::Index>(boundary.size()));
      for (std::size_t k = 0; k < boundary.size(); ++k)
        M.col(static_cast<Eigen::Index>(k)) = w2 * g[boundary[k]] * X.row(boundary[k]).transpose();
      const Eigen::VectorXd b = -(beta * w1 + w2 * h);
      const Eigen::VectorXd delta = box_least_squares(M, b, std::min(kappa, 1.0), 1.0);
      for (std::size_t k = 0; k < boundary.size(); ++k)
        h += delta[static_cast<Eigen::Index>(k)] * g[boundary[k]] * X.row(boundary[k]).transpose();
    }
    const double res_hid = (beta * w1 + w2 * h).norm() /
                           std::max(beta * n1 + std::abs(w2) * h.norm(), eps);

    const double res_bal = std::abs(n1 - std::abs(w2)) / std::max(n1, std::abs(w2));
    rows.emplace_back(res_out, res_hid, res_bal);
  }

  rep.residuals.resize(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t k = 0; k < rows.size(); ++k) rep.residuals.row(static_cast<Eigen::Index>(k)) = rows[k];
  rep.worst = rows.empty() ? 0.0 : rep.residuals.maxCoeff();
  rep.is_stationary = rep.worst <= tol;
  return rep;
}

}  // namespace cvxnn
