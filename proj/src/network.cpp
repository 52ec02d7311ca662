#include "convexnn/network.hpp"

#include <sstream>
#include <stdexcept>

#include "convexnn/textio.hpp"

namespace cvxnn {

std::string NetworkParams::to_csv() const {
  std::ostringstream os;
  os << "# d=" << W1.rows() << " m=" << W1.cols() << " C=" << W2.cols()
     << " kappa=" << format_double(activation.kappa) << " bias=" << (bias ? 1 : 0) << "\n";
  auto dump = [&](const Eigen::MatrixXd& M, const char* tag) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        os << tag << "," << i << "," << j << "," << format_double(M(i, j)) << "\n";
  };
  dump(W1, "W1");
  dump(W2, "W2");
  if (bias)
    for (Eigen::Index j = 0; j < bias->size(); ++j)
      os << "b,0," << j << "," << format_double((*bias)[j]) << "\n";
  return os.str();
}

NetworkParams NetworkParams::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.empty() || line[0] != '#')
    throw std::invalid_argument("NetworkParams: missing header");
  Eigen::Index d = 0, m = 0, C = 1;
  double kappa = 0.0;
  int has_bias = 0;
  {
    std::istringstream hs(line.substr(1));
    std::string tok;
    while (hs >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "d") d = std::stol(val);
      else if (key == "m") m = std::stol(val);
      else if (key == "C") C = std::stol(val);
      else if (key == "kappa") kappa = std::stod(val);
      else if (key == "bias") has_bias = std::stoi(val);
    }
  }
  NetworkParams p;
  p.W1 = Eigen::MatrixXd::Zero(d, m);
  p.W2 = Eigen::MatrixXd::Zero(m, C);
  p.activation = Activation(kappa);
  if (has_bias) p.bias = Eigen::VectorXd::Zero(m);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, si, sj, sv;
    if (!std::getline(ls, tag, ',') || !std::getline(ls, si, ',') ||
        !std::getline(ls, sj, ',') || !std::getline(ls, sv, ','))
      throw std::invalid_argument("NetworkParams: malformed row: " + line);
    const Eigen::Index i = std::stol(si), j = std::stol(sj);
    const double v = std::stod(sv);
    if (tag == "W1") p.W1(i, j) = v;
    else if (tag == "W2") p.W2(i, j) = v;
    else if (tag == "b") (*p.bias)[j] = v;
    else throw std::invalid_argument("NetworkParams: unknown tag " + tag);
  }
  return p;
}

Eigen::MatrixXd network_forward(const NetworkParams& params, const Eigen::MatrixXd& X) {
  if (params.W1.rows() != X.cols())
    throw std::invalid_argument("network_forward: feature dimension mismatch");
  if (params.W1.cols() != params.W2.rows())
    throw std::invalid_argument("network_forward: layer shape mismatch");
  if (params.neurons() == 0) return Eigen::MatrixXd::Zero(X.rows(), params.outputs());
  Eigen::MatrixXd pre = X * params.W1;
  if (params.bias) pre.rowwise() += params.bias->transpose();
  return params.activation.apply(pre) * params.W2;
}

double nonconvex_objective(const NetworkParams& params, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& Y, double beta) {
  if (beta < 0.0) throw std::invalid_argument("nonconvex_objective: beta >= 0 required");
  const Eigen::MatrixXd pred = network_forward(params, X);
  double penalty = params.W1.squaredNorm() + params.W2.squaredNorm();
  if (params.bias) penalty += params.bias->squaredNorm();
  return 0.5 * (pred - Y).squaredNorm() + 0.5 * beta * penalty;
}

double nonconvex_objective_l1sq(const NetworkParams& params, const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y, double beta) {
  const Eigen::MatrixXd pred = network_forward(params, X);
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < params.neurons(); ++j) {
    double w1sq = params.W1.col(j).squaredNorm();
    if (params.bias) w1sq += (*params.bias)[j] * (*params.bias)[j];
    const double l1 = params.W2.row(j).lpNorm<1>();
    penalty += w1sq + l1 * l1;
  }
  return 0.5 * (pred - Y).squaredNorm() + 0.5 * beta * penalty;
}

RescaleResult rescale_balanced(const NetworkParams& params) {
  if (params.outputs() != 1)
    throw std::invalid_argument("rescale_balanced: scalar output networks only");
  RescaleResult res;
  std::vector<Eigen::Index> keep;
  std::vector<double> gammas;
  for (Eigen::Index j = 0; j < params.neurons(); ++j) {
    double n1 = params.W1.col(j).norm();
    if (params.bias) n1 = std::hypot(n1, (*params.bias)[j]);
    const double a2 = std::abs(params.W2(j, 0));
    if (n1 == 0.0) {
      if (a2 != 0.0) ++res.dropped;  // zero feature, nothing to keep
      continue;
    }
    if (a2 == 0.0) continue;
    keep.push_back(j);
    gammas.push_back(std::sqrt(a2 / n1));
  }
  NetworkParams out;
  out.activation = params.activation;
  out.W1.resize(params.W1.rows(), static_cast<Eigen::Index>(keep.size()));
  out.W2.resize(static_cast<Eigen::Index>(keep.size()), 1);
  if (params.bias) out.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Eigen::Index j = keep[k];
    const double g = gammas[k];
    out.W1.col(static_cast<Eigen::Index>(k)) = g * params.W1.col(j);
    out.W2(static_cast<Eigen::Index>(k), 0) = params.W2(j, 0) / g;
    if (params.bias) (*out.bias)[static_cast<Eigen::Index>(k)] = g * (*params.bias)[j];
  }
  res.params = std::move(out);
  return res;
}

}  // namespace cvxnn
