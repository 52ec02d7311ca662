#include "convexnn/extensions.hpp"

#include <Eigen/SVD>

namespace cvxnn {

LowRankResult lowrank_train(const DataMatrix& X, const Eigen::VectorXd& y, Eigen::Index k,
                            double beta, Activation act, const SolverConfig& cfg,
                            const EnumerateOptions& enum_opts) {
  if (k < 1 || k > X.rank())
    throw std::invalid_argument("lowrank_train: need 1 <= k <= rank(X)");

  LowRankResult res;
  DataMatrix Xk(X.truncate(k), false, 1e-10);

  if (Xk.rank() <= enum_opts.rank_max) {
    res.patterns = enumerate_exact(Xk, enum_opts);
  } else {
    // pilot estimate of the pattern mass, then the coupon-collector bound
    const std::uint64_t seed = cfg.seed;
    PatternSet pilot = sample_gaussian(Xk, 2000, seed);
    ZonotopeReport angles = estimate_solid_angles(Xk, pilot, 4000, seed + 1);
    const auto P_est = static_cast<std::int64_t>(pilot.size());
    const double theta_bar = angles.theta_bar_estimate > 0 ? angles.theta_bar_estimate : 1.0;
    const std::int64_t count = sample_size_threshold(P_est, theta_bar, 0.05);
    res.patterns = sample_gaussian(Xk, static_cast<std::size_t>(count), seed + 2);
  }

  // loss features use the original data; cone constraints use the
  // truncation that generated the patterns
  ConvexProgram prog(X, LabelData::column(y), res.patterns, act, beta);
  prog.constraint_values = Xk.values();

  auto [w, rep] = solve_admm(prog, cfg);
  res.weights = w;
  res.report = rep;
  res.network = convex_to_network(w, prog);

  res.plan.k = k;
  res.plan.sigma_kplus1 = X.sigma(k);
  res.plan.lipschitz_L = y.norm();  // ||y - 0|| at the zero predictor
  res.plan.lipschitz_R = act.lipschitz();
  res.plan.beta = beta;
  res.objective_value = nonconvex_objective(res.network, X.values(), y, beta);
  return res;
}

SpikeFreeResult spike_free_train(const DataMatrix& X, const Eigen::VectorXd& y, double beta,
                                 const SolverConfig& cfg, bool assert_spike_free) {
  const Eigen::MatrixXd gram = X.values() * X.values().transpose();
  const double dev =
      (gram - Eigen::MatrixXd::Identity(X.rows(), X.rows())).cwiseAbs().maxCoeff();
  if (!assert_spike_free && dev > 1e-8)
    throw std::invalid_argument(
        "spike_free_train: X X^T != I (deviation " + std::to_string(dev) +
        "); whitened rows are the certified spike-free class, pass assert_spike_free to "
        "override");

  PatternSet ones;
  ones.n = static_cast<std::size_t>(X.rows());
  ones.source = PatternSource::user;
  ones.patterns.push_back(
      ArrangementPattern(std::vector<std::uint8_t>(ones.n, 1)));

  ConvexProgram prog(X, LabelData::column(y), ones, Activation::relu(), beta);
  auto [w, rep] = solve_admm(prog, cfg);
  SpikeFreeResult res;
  res.weights = w;
  res.objective_value = rep.final_objective;
  res.report = rep;
  return res;
}

VectorOutputResult vector_output_train(const DataMatrix& X, const Eigen::MatrixXd& Y, double beta,
                                       const PatternSet& patterns, Activation act,
                                       const SolverConfig& cfg) {
  if (Y.rows() != X.rows())
    throw std::invalid_argument("vector_output_train: label rows != n");
  const Eigen::Index C = Y.cols();

  VectorOutputResult res;
  res.total_objective = 0.0;
  std::vector<NetworkParams> nets;
  Eigen::Index total_neurons = 0;
  for (Eigen::Index c = 0; c < C; ++c) {
    ConvexProgram prog(X, LabelData::column(Y.col(c)), patterns, act, beta);
    auto [w, rep] = solve_admm(prog, cfg);
    res.columns.push_back(w);
    res.column_objectives.push_back(rep.final_objective);
    res.total_objective += rep.final_objective;
    nets.push_back(convex_to_network(w, prog));
    total_neurons += nets.back().neurons();
  }

  // assemble: every neuron writes to its own column, so W2 rows are 1-sparse
  NetworkParams net;
  net.activation = act;
  net.W1.resize(X.cols(), total_neurons);
  net.W2 = Eigen::MatrixXd::Zero(total_neurons, C);
  Eigen::Index at = 0;
  for (Eigen::Index c = 0; c < C; ++c) {
    const NetworkParams& nc = nets[static_cast<std::size_t>(c)];
    for (Eigen::Index j = 0; j < nc.neurons(); ++j, ++at) {
      net.W1.col(at) = nc.W1.col(j);
      net.W2(at, c) = nc.W2(j, 0);
    }
  }
  res.network = std::move(net);
  return res;
}

PatchSet PatchSet::from_signal(const Eigen::MatrixXd& signals, int patch, int stride,
                               int padding) {
  if (patch < 1 || stride < 1 || padding < 0)
    throw std::invalid_argument("PatchSet: bad geometry");
  const Eigen::Index len = signals.cols();
  if (patch > len + 2 * padding)
    throw std::invalid_argument("PatchSet: patch exceeds padded signal length");

  PatchSet set;
  set.patch_dim = patch;
  set.stride = stride;
  set.padding = padding;
  for (Eigen::Index start = -padding; start + patch <= len + padding; start += stride) {
    Eigen::MatrixXd Xk = Eigen::MatrixXd::Zero(signals.rows(), patch);
    for (Eigen::Index t = 0; t < patch; ++t) {
      const Eigen::Index src = start + t;
      if (src >= 0 && src < len) Xk.col(t) = signals.col(src);
    }
    set.patches.push_back(std::move(Xk));
  }
  return set;
}

GapReduction cnn_gap_reduce(const PatchSet& patches, const Eigen::VectorXd& y,
                            const LossSpec& inner) {
  if (patches.patches.empty()) throw std::invalid_argument("cnn_gap_reduce: empty patch set");
  const Eigen::Index n = patches.rows();
  const Eigen::Index K = patches.count();
  if (y.size() != n) throw std::invalid_argument("cnn_gap_reduce: label rows != n");

  Eigen::MatrixXd stacked(n * K, patches.patch_dim);
  for (Eigen::Index k = 0; k < K; ++k)
    stacked.middleRows(k * n, n) = patches.patches[static_cast<std::size_t>(k)];

  GapReduction red{DataMatrix(std::move(stacked)), LossSpec::squared(), K};
  const Eigen::Index rows = n;
  auto average = [rows, K](const Eigen::MatrixXd& pred) {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(rows, pred.cols());
    for (Eigen::Index k = 0; k < K; ++k) avg += pred.middleRows(k * rows, rows);
    return Eigen::MatrixXd(avg / static_cast<double>(K));
  };
  red.loss = LossSpec::custom(
      [inner, average](const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels) {
        return inner.value(average(pred), labels);
      },
      [inner, average, rows, K](const Eigen::MatrixXd& pred, const Eigen::MatrixXd& labels) {
        const Eigen::MatrixXd g = inner.gradient(average(pred), labels) / static_cast<double>(K);
        Eigen::MatrixXd out(pred.rows(), pred.cols());
        for (Eigen::Index k = 0; k < K; ++k) out.middleRows(k * rows, rows) = g;
        return out;
      },
      inner.grad_lipschitz() / static_cast<double>(K));
  return red;
}

LinearCnnResult linear_cnn_train(const PatchSet& patches, const Eigen::VectorXd& y, double beta,
                                 const SolverConfig& cfg, double factor_cutoff) {
  LinearCnnResult res;
  auto [Z, rep] = solve_nuclear(patches.patches, y, beta, cfg);
  res.Z = Z;
  res.report = rep;
  res.objective_value = rep.final_objective;
  res.dual_certificate = nuclear_dual_certificate(patches.patches, y, Z);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > factor_cutoff * (s.size() ? s[0] : 0.0)) ++r;
  res.filters = svd.matrixU().leftCols(r);
  res.output_weights = s.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
  return res;
}

}  // namespace cvxnn
