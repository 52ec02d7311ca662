#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "convexnn/program.hpp"

namespace cvxnn {

enum class SolveStatus { converged, max_iters, infeasible };

std::string to_string(SolveStatus s);

struct SolverConfig {
  int max_iters = 20000;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double rho_admm = 1.0;    // ADMM penalty, residual-balanced at runtime
  double rho_hinge = 0.01;  // hinge trade-off of the penalized form
  bool backtracking = true;
  std::uint64_t seed = 0;
  int log_interval = 0;     // 0: keep full history
};

struct SolveReport {
  SolveStatus status = SolveStatus::max_iters;
  std::vector<double> objective_history;
  double final_objective = 0.0;
  double final_violation = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  std::string diagnostic;

  /// One JSON record per history entry: {"iter":..,"objective":..}.
  std::string to_jsonl() const;
};

/// Proximal map of t*||.||_p for p in {1,2}: block shrinkage or
/// elementwise soft threshold.
Eigen::VectorXd prox_group(const Eigen::VectorXd& v, double t, int p = 2);

/// Euclidean projection onto {v : A v >= 0} (Dykstra over half-spaces).
Eigen::VectorXd project_polyhedral_cone(const Eigen::MatrixXd& A, const Eigen::VectorXd& v,
                                        int max_sweeps = 400);

/// Projects every block of w onto its pattern cone (in place) and returns
/// the largest movement.
double project_feasible(const ConvexProgram& prog, GroupWeights& w);

/// Exact-oriented solver: ADMM with the splitting s_i = (2D_i - I) Xc w_i,
/// ridge-regularized least-squares w-step (Woodbury-factored), group prox
/// and nonnegative projection. Squared loss only. The returned point is
/// projected onto the constraint cones.
std::pair<GroupWeights, SolveReport> solve_admm(const ConvexProgram& prog,
                                                const SolverConfig& cfg);

/// Paper-faithful penalized solver: FISTA with monotone restart on the
/// smooth loss, composite block prox of (group norm + hinge) evaluated by
/// an inner primal-dual loop. Works for any loss with a gradient.
std::pair<GroupWeights, SolveReport> solve_penalized(const ConvexProgram& prog,
                                                     const SolverConfig& cfg,
                                                     const GroupWeights* warm_start = nullptr);

/// rho-continuation: solves the penalized form with increasing hinge
/// penalty until the constraint violation falls below viol_target, then
/// projects onto the cones. Approaches the constrained optimum.
std::pair<GroupWeights, SolveReport> solve_penalized_continuation(
    const ConvexProgram& prog, const SolverConfig& cfg, double rho_start = 0.01,
    double rho_max = 1e4, double viol_target = 1e-9);

struct InterpolationResult {
  GroupWeights weights;
  double group_norm = 0.0;
  double residual = 0.0;  // ||Xhat w - y||_2
  bool feasible = false;
  SolveReport report;
};

/// Minimum group norm subject to fitting the labels, via a decreasing-beta
/// continuation of the regularized program.
InterpolationResult solve_interpolation(const ConvexProgram& prog, const SolverConfig& cfg,
                                        double feas_tol = 1e-6);

/// Nuclear-norm penalized multi-patch regression
///   min L(sum_k X_k z_k, y) + beta ||[z_1 ... z_K]||_*
/// by proximal gradient with singular-value soft-thresholding.
std::pair<Eigen::MatrixXd, SolveReport> solve_nuclear(const std::vector<Eigen::MatrixXd>& patches,
                                                      const Eigen::VectorXd& y, double beta,
                                                      const SolverConfig& cfg);

/// sigma_max([X_1^T v ... X_K^T v]) at v = gradient of the squared loss at
/// the solution; at the optimum this does not exceed beta (up to
/// tolerance).
double nuclear_dual_certificate(const std::vector<Eigen::MatrixXd>& patches,
                                const Eigen::VectorXd& y, const Eigen::MatrixXd& Z);

/// Complex Lasso for circular linear convolution: min 0.5||X F z - y||^2 +
/// (beta/sqrt(d)) ||z||_1 with F the unitary DFT matrix. Returns a
/// conjugate-symmetric z for real inputs.
std::pair<Eigen::VectorXcd, SolveReport> solve_circular_fourier(const Eigen::MatrixXd& X,
                                                                const Eigen::VectorXd& y,
                                                                double beta,
                                                                const SolverConfig& cfg);

/// Unitary DFT matrix of order d.
Eigen::MatrixXcd dft_matrix(Eigen::Index d);

/// Circulant filter with spectrum z: F diag(z) F^H (real for
/// conjugate-symmetric z).
Eigen::MatrixXcd circulant_from_spectrum(const Eigen::VectorXcd& z);

}  // namespace cvxnn
