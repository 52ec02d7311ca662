#include <chrono>

#include <Eigen/SVD>

#include "convexnn/solvers.hpp"

namespace cvxnn {

Eigen::MatrixXcd dft_matrix(Eigen::Index d) {
  Eigen::MatrixXcd F(d, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k) {
      const double ang = -2.0 * M_PI * static_cast<double>(j * k) / static_cast<double>(d);
      F(j, k) = std::polar(scale, ang);
    }
  return F;
}

Eigen::MatrixXcd circulant_from_spectrum(const Eigen::VectorXcd& z) {
  const Eigen::MatrixXcd F = dft_matrix(z.size());
  return F * z.asDiagonal() * F.adjoint();
}

std::pair<Eigen::VectorXcd, SolveReport> solve_circular_fourier(const Eigen::MatrixXd& X,
                                                                const Eigen::VectorXd& y,
                                                                double beta,
                                                                const SolverConfig& cfg) {
  if (X.rows() != y.size()) throw std::invalid_argument("solve_circular_fourier: shape mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index d = X.cols();
  const Eigen::MatrixXcd Xf = X.cast<std::complex<double>>() * dft_matrix(d);
  const Eigen::VectorXcd yc = y.cast<std::complex<double>>();

  // the effective l1 weight carries the 1/sqrt(d) spectral normalization
  const double lam = beta / std::sqrt(static_cast<double>(d));
  // F is unitary, so the Lipschitz constant equals sigma_max(X)^2
  const double L = std::pow(Eigen::JacobiSVD<Eigen::MatrixXd>(X).singularValues()[0], 2);
  const double t_step = L > 0 ? 1.0 / L : 1.0;

  auto soft = [&](const Eigen::VectorXcd& v, double tau) {
    Eigen::VectorXcd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double mag = std::abs(v[i]);
      out[i] = mag <= tau ? std::complex<double>(0.0, 0.0) : v[i] * (1.0 - tau / mag);
    }
    return out;
  };
  auto obj = [&](const Eigen::VectorXcd& z) {
    return 0.5 * (Xf * z - yc).squaredNorm() + lam * z.cwiseAbs().sum();
  };

  Eigen::VectorXcd z = Eigen::VectorXcd::Zero(d), v = z, z_prev = z;
  double theta = 1.0;
  SolveReport rep;
  double best = obj(z);
  rep.objective_history.push_back(best);
  int stall = 0;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Eigen::VectorXcd grad = Xf.adjoint() * (Xf * v - yc);
    Eigen::VectorXcd z_new = soft(v - t_step * grad, t_step * lam);
    const double o = obj(z_new);
    if (o > best + 1e-14 * std::max(1.0, best)) {
      v = z;
      theta = 1.0;
      continue;
    }
    const double rel = std::abs(best - o) / std::max(1.0, std::abs(o));
    z_prev = z;
    z = z_new;
    best = o;
    rep.objective_history.push_back(best);
    const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    v = z + ((theta - 1.0) / theta_new) * (z - z_prev);
    theta = theta_new;
    if (rel < cfg.rel_tol) {
      if (++stall >= 10) {
        rep.status = SolveStatus::converged;
        ++it;
        break;
      }
    } else {
      stall = 0;
    }
  }
  rep.iterations = it;
  rep.final_objective = best;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {z, rep};
}

}  // namespace cvxnn
