#include "convexnn/datasets.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/SVD>

#include "convexnn/activation.hpp"
#include "convexnn/rng.hpp"
#include "convexnn/textio.hpp"

namespace cvxnn {

namespace {

struct GenSpec {
  std::string name;
  std::map<std::string, std::string> args;
};

GenSpec parse_generator(const std::string& spec) {
  GenSpec g;
  const auto open = spec.find('(');
  if (open == std::string::npos) {
    g.name = spec;
    return g;
  }
  if (spec.back() != ')') throw std::invalid_argument("bad generator spec: " + spec);
  g.name = spec.substr(0, open);
  std::string args = spec.substr(open + 1, spec.size() - open - 2);
  std::istringstream is(args);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad generator arg: " + tok);
    g.args[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return g;
}

double arg_d(const GenSpec& g, const std::string& key, double dflt) {
  auto it = g.args.find(key);
  return it == g.args.end() ? dflt : std::stod(it->second);
}

long arg_i(const GenSpec& g, const std::string& key, long dflt) {
  auto it = g.args.find(key);
  return it == g.args.end() ? dflt : std::stol(it->second);
}

}  // namespace

Dataset make_toy1d() {
  Eigen::MatrixXd x(5, 1);
  x << -2, -1, 0, 1, 2;
  Eigen::VectorXd y(5);
  y << 1, -1, 1, 1, -1;
  return {DataMatrix::with_bias(x), LabelData::column(y), "toy1d"};
}

Dataset make_planted_relu(Eigen::Index n, Eigen::Index d, int m, double noise,
                          std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X = rng.normal_matrix(n, d);
  Eigen::MatrixXd W1 = rng.normal_matrix(d, m);
  Eigen::VectorXd w2 = rng.normal_vector(m);
  Eigen::VectorXd y = Activation::relu().apply(Eigen::MatrixXd(X * W1)) * w2;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += noise * rng.normal();
  return {DataMatrix(std::move(X)), LabelData::column(y), "planted_relu"};
}

Dataset make_rank_deficient_gaussian(Eigen::Index n, Eigen::Index d, Eigen::Index k,
                                     std::uint64_t seed) {
  if (k < 0 || k > std::min(n, d))
    throw std::invalid_argument("rank_deficient_gaussian: bad k");
  Rng rng(seed);
  Eigen::MatrixXd G = rng.normal_matrix(n, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  for (Eigen::Index i = k; i < s.size(); ++i) s[i] = 1.0;
  Eigen::MatrixXd X = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();

  const int m = 5;
  Eigen::MatrixXd W1 = rng.normal_matrix(d, m);
  Eigen::VectorXd w2 = rng.normal_vector(m);
  Eigen::VectorXd y = Activation::relu().apply(Eigen::MatrixXd(X * W1)) * w2;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += 0.1 * rng.normal();
  return {DataMatrix(std::move(X)), LabelData::column(y), "rank_deficient_gaussian"};
}

Eigen::VectorXd make_ar3_series(Eigen::Index length, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd s(length);
  for (Eigen::Index t = 0; t < length; ++t) {
    const double x = static_cast<double>(t);
    s[t] = std::sin(0.35 * x) + 0.5 * std::sin(0.11 * x + 1.3) + 0.05 * rng.normal();
  }
  return s;
}

Dataset make_ar3_from_series(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size() - 3;
  if (n < 1) throw std::invalid_argument("ar3: series must have at least 4 samples");
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = series[i + 2];
    X(i, 1) = series[i + 1];
    X(i, 2) = series[i];
    y[i] = series[i + 3];
  }
  return {DataMatrix(std::move(X)), LabelData::column(y), "ar3"};
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path + ":1: empty file");

  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  std::vector<int> label_cols;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j].rfind("label", 0) == 0) label_cols.push_back(static_cast<int>(j));
  if (label_cols.empty())
    throw std::runtime_error(path + ":1: no label columns (names starting with 'label')");

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" +
                                 cell + "'");
      }
    }
    if (row.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(header.size() - label_cols.size());
  Eigen::MatrixXd X(n, d);
  Eigen::MatrixXd Y(n, static_cast<Eigen::Index>(label_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index xc = 0, yc = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j].rfind("label", 0) == 0)
        Y(i, yc++) = rows[static_cast<std::size_t>(i)][j];
      else
        X(i, xc++) = rows[static_cast<std::size_t>(i)][j];
    }
  }
  return {DataMatrix(std::move(X)), LabelData(std::move(Y)), path};
}

void save_csv_dataset(const Dataset& ds, const std::string& path) {
  std::ostringstream os;
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < ds.X.cols(); ++j) header.push_back("f" + std::to_string(j));
  for (Eigen::Index c = 0; c < ds.y.outputs(); ++c) header.push_back("label" + std::to_string(c));
  os << csv_line(header);
  for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
    std::vector<std::string> cells;
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j)
      cells.push_back(format_double(ds.X.values()(i, j)));
    for (Eigen::Index c = 0; c < ds.y.outputs(); ++c)
      cells.push_back(format_double(ds.y.values(i, c)));
    os << csv_line(cells);
  }
  write_text_file(path, os.str());
}

Dataset load_dataset(const std::string& spec) {
  if (spec.find(".csv") != std::string::npos && spec.find('(') == std::string::npos)
    return load_csv_dataset(spec);
  const GenSpec g = parse_generator(spec);
  if (g.name == "toy1d") return make_toy1d();
  if (g.name == "planted_relu")
    return make_planted_relu(arg_i(g, "n", 20), arg_i(g, "d", 3), static_cast<int>(arg_i(g, "m", 5)),
                             arg_d(g, "noise", 0.1),
                             static_cast<std::uint64_t>(arg_i(g, "seed", 0)));
  if (g.name == "rank_deficient_gaussian")
    return make_rank_deficient_gaussian(arg_i(g, "n", 10), arg_i(g, "d", 8), arg_i(g, "k", 4),
                                        static_cast<std::uint64_t>(arg_i(g, "seed", 0)));
  if (g.name == "ar3") {
    auto it = g.args.find("path");
    if (it != g.args.end()) {
      Dataset raw = load_csv_dataset(it->second);
      return make_ar3_from_series(raw.y.col(0));
    }
    return make_ar3_from_series(
        make_ar3_series(arg_i(g, "n", 200) + 3, static_cast<std::uint64_t>(arg_i(g, "seed", 0))));
  }
  throw std::invalid_argument("unknown dataset spec: " + spec);
}

}  // namespace cvxnn
