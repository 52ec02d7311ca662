#include "convexnn/lp.hpp"

#include <cmath>
#include <vector>

namespace cvxnn {

namespace {

// Dense simplex on  max c^T x  s.t.  G x <= h,  x >= 0, with h >= 0 so the
// slack basis is feasible. Dantzig pricing with a Bland fallback once the
// iteration count grows, which protects against cycling on the degenerate
// zero-rhs rows these programs start with.
struct Simplex {
  Eigen::MatrixXd T;  // tableau: constraint rows + objective row
  std::vector<int> basis;
  int m, n;

  Simplex(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, const Eigen::VectorXd& c)
      : m(static_cast<int>(G.rows())), n(static_cast<int>(G.cols())) {
    T.setZero(m + 1, n + m + 1);
    T.block(0, 0, m, n) = G;
    T.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
    T.block(0, n + m, m, 1) = h;
    T.block(m, 0, 1, n) = -c.transpose();
    basis.resize(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;
  }

  bool solve(int max_pivots = 50000) {
    const double eps = 1e-11;
    for (int iter = 0; iter < max_pivots; ++iter) {
      const bool bland = iter > 6 * (m + n);
      int col = -1;
      if (bland) {
        for (int j = 0; j < n + m; ++j)
          if (T(m, j) < -eps) { col = j; break; }
      } else {
        double best = -eps;
        for (int j = 0; j < n + m; ++j)
          if (T(m, j) < best) { best = T(m, j); col = j; }
      }
      if (col < 0) return true;  // optimal

      int row = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
        if (T(i, col) > eps) {
          const double ratio = T(i, n + m) / T(i, col);
          if (row < 0 || ratio < best_ratio - eps ||
              (std::abs(ratio - best_ratio) <= eps && basis[i] < basis[row])) {
            row = i;
            best_ratio = ratio;
          }
        }
      }
      if (row < 0) return false;  // unbounded; callers bound all variables

      pivot(row, col);
    }
    return false;
  }

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = T(i, col);
      if (f != 0.0) T.row(i) -= f * T.row(row);
    }
    basis[row] = col;
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n + m);
    for (int i = 0; i < m; ++i) x[basis[i]] = T(i, n + m);
    return x.head(n);
  }
};

}  // namespace

SlackResult max_min_slack(const Eigen::MatrixXd& A) {
  return max_min_slack(A, Eigen::MatrixXd(0, A.cols()));
}

SlackResult max_min_slack(const Eigen::MatrixXd& A, const Eigen::MatrixXd& H) {
  SlackResult out;
  const int ns = static_cast<int>(A.rows());
  const int nh = static_cast<int>(H.rows());
  const int d = static_cast<int>(A.cols());
  if (d == 0) return out;

  // Split u = v+ - v- and t = t+ - t- so every right-hand side is zero or
  // one and the slack basis is feasible from the start.
  //   strict row: (t+ - t-) - a^T(v+ - v-) <= 0
  //   hard row:          - g^T(v+ - v-) <= 0
  //   box:   +-(v_k+ - v_k-) <= 1,  cap: t+ <= 1
  const int cols = 2 * d + 2;
  const int rows = ns + nh + 2 * d + 1;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (int i = 0; i < ns; ++i, ++r) {
    G.block(r, 0, 1, d) = -A.row(i);
    G.block(r, d, 1, d) = A.row(i);
    G(r, 2 * d) = 1.0;
    G(r, 2 * d + 1) = -1.0;
  }
  for (int i = 0; i < nh; ++i, ++r) {
    G.block(r, 0, 1, d) = -H.row(i);
    G.block(r, d, 1, d) = H.row(i);
  }
  for (int k = 0; k < d; ++k) {
    G(r, k) = 1.0;
    G(r, d + k) = -1.0;
    h[r] = 1.0;
    ++r;
    G(r, k) = -1.0;
    G(r, d + k) = 1.0;
    h[r] = 1.0;
    ++r;
  }
  G(r, 2 * d) = 1.0;
  h[r] = 1.0;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(cols);
  c[2 * d] = 1.0;
  c[2 * d + 1] = -1.0;

  Simplex sx(G, h, c);
  if (!sx.solve()) return out;

  const Eigen::VectorXd x = sx.primal();
  out.u = x.head(d) - x.segment(d, d);
  out.slack = x[2 * d] - x[2 * d + 1];
  out.solved = true;
  return out;
}

Eigen::VectorXd box_least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                                  double lo, double hi, int iters) {
  const Eigen::Index k = M.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(k, 0.5 * (lo + hi));
  if (k == 0) return x;
  const double L = (M.transpose() * M).operatorNorm();
  if (L <= 0.0) return x;
  const double step = 1.0 / L;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd g = M.transpose() * (M * x - b);
    x = (x - step * g).cwiseMax(lo).cwiseMin(hi);
  }
  return x;
}

}  // namespace cvxnn
