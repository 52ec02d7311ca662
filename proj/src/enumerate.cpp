#include "convexnn/enumerate.hpp"

#include <sstream>
#include <stdexcept>

namespace cvxnn {

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > UINT64_MAX - b) throw std::overflow_error("count_bound: 64-bit overflow");
  return a + b;
}

// C(n, k) with overflow detection via 128-bit intermediates.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > UINT64_MAX) throw std::overflow_error("count_bound: 64-bit overflow");
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

std::uint64_t count_bound(std::uint64_t n, std::uint64_t r) {
  if (r < 1 || r > n) throw std::invalid_argument("count_bound: need 1 <= r <= n");
  std::uint64_t sum = 0;
  for (std::uint64_t k = 0; k < r; ++k) sum = checked_add(sum, binomial(n - 1, k));
  if (sum > UINT64_MAX / 2) throw std::overflow_error("count_bound: 64-bit overflow");
  return 2 * sum;
}

RealizabilityResult realizability_check(const ArrangementPattern& pattern,
                                        const DataMatrix& X, double slack_tol) {
  if (pattern.size() != static_cast<std::size_t>(X.rows()))
    throw std::invalid_argument("realizability_check: pattern length != n");

  // A pattern is realizable when some direction u reproduces it under the
  // >= tie convention: x_i^T u >= 0 on set bits and x_i^T u < 0 (strictly)
  // on clear bits. The LP maximizes the worst strict margin; set-bit rows
  // enter with a zero margin requirement via a large constant offset.
  RealizabilityResult out;
  const Eigen::MatrixXd& M = X.values();
  const double row_scale = M.size() ? M.rowwise().norm().maxCoeff() : 0.0;
  const double zero_tol = 1e-12 * (row_scale > 0 ? row_scale : 1.0);

  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (M.row(i).norm() <= zero_tol) {
      // a zero row satisfies x^T u = 0, which lands on the >= branch only
      if (!pattern.bits[static_cast<std::size_t>(i)]) return out;
    } else if (pattern.bits[static_cast<std::size_t>(i)]) {
      pos.push_back(i);
    } else {
      neg.push_back(i);
    }
  }

  if (neg.empty()) {
    // attainable at u = 0 (every tie takes the >= branch); look for a
    // strict witness anyway, it is nicer to report
    out.realizable = true;
    out.slack = 1.0;
    if (!pos.empty()) {
      Eigen::MatrixXd A(static_cast<Eigen::Index>(pos.size()), M.cols());
      for (std::size_t k = 0; k < pos.size(); ++k)
        A.row(static_cast<Eigen::Index>(k)) = M.row(pos[k]) / M.row(pos[k]).norm();
      SlackResult lp = max_min_slack(A);
      if (lp.solved && lp.slack > slack_tol) {
        out.witness = lp.u;
        out.slack = lp.slack;
        return out;
      }
    }
    out.witness = Eigen::VectorXd::Zero(M.cols());
    return out;
  }

  Eigen::MatrixXd A(static_cast<Eigen::Index>(neg.size()), M.cols());
  for (std::size_t k = 0; k < neg.size(); ++k)
    A.row(static_cast<Eigen::Index>(k)) = -M.row(neg[k]) / M.row(neg[k]).norm();
  Eigen::MatrixXd H(static_cast<Eigen::Index>(pos.size()), M.cols());
  for (std::size_t k = 0; k < pos.size(); ++k)
    H.row(static_cast<Eigen::Index>(k)) = M.row(pos[k]) / M.row(pos[k]).norm();

  SlackResult lp = max_min_slack(A, H);
  if (!lp.solved) throw std::runtime_error("realizability_check: LP solver breakdown");
  out.slack = lp.slack;
  if (lp.slack > slack_tol) {
    out.realizable = true;
    out.witness = lp.u;
  }
  return out;
}

namespace {

struct Cell {
  std::vector<std::uint8_t> bits;  // over processed nonzero rows
  Eigen::VectorXd witness;         // interior point, ||u||_inf <= 1
};

// Certifies {s_j r_j^T u > 0 for processed rows} with the LP; returns the
// witness when the cell has interior.
std::optional<Eigen::VectorXd> certify(const Eigen::MatrixXd& R,
                                       const std::vector<std::uint8_t>& bits,
                                       Eigen::Index upto, double slack_tol) {
  Eigen::MatrixXd A(upto, R.cols());
  for (Eigen::Index j = 0; j < upto; ++j)
    A.row(j) = (bits[static_cast<std::size_t>(j)] ? 1.0 : -1.0) * R.row(j);
  SlackResult lp = max_min_slack(A);
  if (!lp.solved) throw std::runtime_error("enumerate_exact: LP solver breakdown");
  if (lp.slack > slack_tol) return lp.u;
  return std::nullopt;
}

double min_slack(const Eigen::MatrixXd& R, const std::vector<std::uint8_t>& bits,
                 Eigen::Index upto, const Eigen::VectorXd& u) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < upto; ++j) {
    const double s = (bits[static_cast<std::size_t>(j)] ? 1.0 : -1.0) * R.row(j).dot(u);
    m = std::min(m, s);
  }
  return m;
}

}  // namespace

PatternSet enumerate_exact(const DataMatrix& X, const EnumerateOptions& opts) {
  PatternSet set;
  set.source = PatternSource::exact;
  set.n = static_cast<std::size_t>(X.rows());
  if (X.rows() == 0) return set;

  const Eigen::Index r = X.rank();
  if (r > opts.rank_max) {
    std::ostringstream os;
    os << "enumerate_exact: numerical rank " << r << " exceeds rank_max " << opts.rank_max
       << "; use Gaussian sampling (sample_gaussian) for high-rank data";
    throw std::invalid_argument(os.str());
  }

  if (r == 0) {
    // all rows are zero; the single pattern is all ones
    ArrangementPattern p(std::vector<std::uint8_t>(set.n, 1));
    p.witness = Eigen::VectorXd::Zero(X.cols());
    set.patterns.push_back(std::move(p));
    return set;
  }

  // Work on the left singular factor: sign(X z) over z in R^d equals
  // sign(U z') over z' in R^r.
  const Eigen::MatrixXd& U = X.svd().U;
  const double row_scale = U.rowwise().norm().maxCoeff();
  const double zero_tol = 1e-12 * row_scale;

  std::vector<Eigen::Index> nz;  // rows with a nonzero hyperplane
  for (Eigen::Index i = 0; i < U.rows(); ++i)
    if (U.row(i).norm() > zero_tol) nz.push_back(i);

  Eigen::MatrixXd R(static_cast<Eigen::Index>(nz.size()), r);
  for (std::size_t k = 0; k < nz.size(); ++k)
    R.row(static_cast<Eigen::Index>(k)) = U.row(nz[k]) / U.row(nz[k]).norm();

  std::vector<Cell> cells;
  if (nz.empty()) {
    cells.push_back({{}, Eigen::VectorXd::Zero(r)});
  } else {
    Cell plus{{1}, R.row(0).transpose()};
    Cell minus{{0}, -R.row(0).transpose()};
    cells.push_back(std::move(plus));
    cells.push_back(std::move(minus));
  }

  const Eigen::Index m = static_cast<Eigen::Index>(nz.size());
  for (Eigen::Index j = 1; j < m; ++j) {
    std::vector<Cell> next;
    next.reserve(cells.size() * 2);
    for (auto& cell : cells) {
      const double g = R.row(j).dot(cell.witness);
      const std::uint8_t side = g >= 0.0 ? 1 : 0;

      // Same-side child keeps the witness unless it sits too close to the
      // new hyperplane, in which case the LP re-centers it.
      Cell same;
      same.bits = cell.bits;
      same.bits.push_back(side);
      if (std::abs(g) > opts.slack_tol) {
        same.witness = cell.witness;
        next.push_back(std::move(same));
      } else if (auto w = certify(R, same.bits, j + 1, opts.slack_tol)) {
        same.witness = *w;
        next.push_back(std::move(same));
      }

      // Opposite side: try the cheap reflection first, then the LP.
      Cell other;
      other.bits = cell.bits;
      other.bits.push_back(side ? 0 : 1);
      Eigen::VectorXd refl = cell.witness - 2.0 * g * R.row(j).transpose();
      const double inf = refl.lpNorm<Eigen::Infinity>();
      if (inf > 1.0) refl /= inf;
      if (min_slack(R, other.bits, j + 1, refl) > opts.slack_tol) {
        other.witness = refl;
        next.push_back(std::move(other));
      } else if (auto w = certify(R, other.bits, j + 1, opts.slack_tol)) {
        other.witness = *w;
        next.push_back(std::move(other));
      }
    }
    cells.swap(next);
  }

  // Assemble full-length patterns; zero rows take bit 1.
  const Eigen::MatrixXd& V = X.svd().V;
  for (auto& cell : cells) {
    ArrangementPattern p(std::vector<std::uint8_t>(set.n, 1));
    for (std::size_t k = 0; k < nz.size(); ++k)
      p.bits[static_cast<std::size_t>(nz[k])] = cell.bits[k];
    // Lift the witness back to the ambient space: sign(X (V S^-1 u)) =
    // sign(U u) on the row space.
    Eigen::VectorXd lifted =
        V * X.svd().singular_values.head(r).cwiseInverse().asDiagonal() * cell.witness;
    const double inf = lifted.lpNorm<Eigen::Infinity>();
    if (inf > 0) lifted /= inf;
    p.witness = lifted;
    set.patterns.push_back(std::move(p));
  }
  set.canonicalize();
  return set;
}

}  // namespace cvxnn
