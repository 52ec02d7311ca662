#include <doctest.h>

#include <convexnn/datasets.hpp>
#include <convexnn/enumerate.hpp>
#include <convexnn/solvers.hpp>

#include "oracles.hpp"

using namespace cvxnn;

namespace {

Eigen::MatrixXd example1() {
  Eigen::MatrixXd X(3, 2);
  X << 2, 2, 3, 3, 1, 0;
  return X;
}

SolverConfig tight() {
  SolverConfig cfg;
  cfg.max_iters = 40000;
  cfg.abs_tol = 1e-11;
  cfg.rel_tol = 1e-11;
  return cfg;
}

SolverConfig pen_cfg() {
  SolverConfig cfg;
  cfg.max_iters = 30000;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-9;
  return cfg;
}

ConvexProgram make_program(const DataMatrix& X, const Eigen::VectorXd& y, double beta,
                           double kappa = 0.0) {
  return ConvexProgram(X, LabelData::column(y), enumerate_exact(X), Activation(kappa), beta);
}

}  // namespace

TEST_CASE("group prox closed forms") {
  Eigen::VectorXd v(2);
  v << 3, 4;
  CHECK(prox_group(v, 1.0, 2).isApprox(Eigen::Vector2d(2.4, 3.2)));
  CHECK(prox_group(v, 5.0, 2).isZero());
  CHECK(prox_group(v, 6.0, 2).isZero());
  Eigen::VectorXd u(2);
  u << 3, -0.5;
  CHECK(prox_group(u, 1.0, 1).isApprox(Eigen::Vector2d(2, 0)));
  CHECK_THROWS_AS(prox_group(v, -1.0, 2), std::invalid_argument);
}

TEST_CASE("prox solves its defining minimization") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd v = rng.normal_vector(4);
    const double t = std::abs(rng.normal());
    const Eigen::VectorXd x = prox_group(v, t, 2);
    const double fx = 0.5 * (x - v).squaredNorm() + t * x.norm();
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd pert = x + 0.01 * rng.normal_vector(4);
      CHECK(fx <= 0.5 * (pert - v).squaredNorm() + t * pert.norm() + 1e-12);
    }
  }
}

TEST_CASE("admm matches the brute-force oracle on example 1") {
  Eigen::VectorXd y(3);
  y << 1, -1, 0;
  ConvexProgram prog = make_program(DataMatrix(example1()), y, 0.1);
  auto [w, rep] = solve_admm(prog, tight());
  CHECK(rep.status == SolveStatus::converged);
  CHECK(rep.final_violation <= 1e-10);

  const double oracle_value = oracle::brute_force_group_lasso(prog);
  CHECK(rep.final_objective ==
        doctest::Approx(oracle_value).epsilon(1e-5));

  // penalized solver with continuation lands on the same value
  auto [wp, rp] = solve_penalized_continuation(prog, pen_cfg());
  CHECK(rp.final_objective == doctest::Approx(rep.final_objective).epsilon(1e-4));
}

TEST_CASE("large beta collapses the solution to zero") {
  Rng rng(5);
  DataMatrix X(rng.normal_matrix(8, 2));
  Eigen::VectorXd y = rng.normal_vector(8);
  ConvexProgram prog = make_program(X, y, 1.0);

  // zero is optimal once beta dominates every block's dual norm at w = 0
  FeatureOp feat(prog);
  const Eigen::MatrixXd dual = feat.adjoint(-y);
  double need = 0.0;
  for (Eigen::Index b = 0; b < dual.cols(); ++b) need = std::max(need, dual.col(b).norm());
  prog.beta = 1.01 * need;

  auto [w, rep] = solve_admm(prog, tight());
  CHECK(w.blocks.norm() <= 1e-7);
  CHECK(rep.final_objective == doctest::Approx(0.5 * y.squaredNorm()).epsilon(1e-9));

  auto [wp, rp] = solve_penalized(prog, pen_cfg());
  CHECK(wp.blocks.norm() <= 1e-6);
}

TEST_CASE("unconstrained single-pattern lasso matches coordinate descent") {
  // all-ones pattern, relu: features equal X. Positive data with a
  // positive planted direction keeps the cone constraint slack at the
  // lasso solution, so the two problems share an optimum.
  Rng rng(7);
  Eigen::MatrixXd X = rng.normal_matrix(12, 3).cwiseAbs();
  X.array() += 0.1;
  Eigen::VectorXd plant = Eigen::Vector3d(1.0, 0.5, 2.0);
  Eigen::VectorXd y = X * plant;

  const double beta = 0.02;
  const Eigen::VectorXd dir = oracle::lasso_coordinate_descent(X, y, beta);
  REQUIRE((X * dir).minCoeff() > 0.0);  // interior of the cone

  PatternSet ones;
  ones.n = 12;
  ones.patterns.push_back(ArrangementPattern(std::vector<std::uint8_t>(12, 1)));
  ConvexProgram prog(DataMatrix(X), LabelData::column(y), ones, Activation::relu(), beta);
  prog.reg_p = 1;

  auto [w, rep] = solve_penalized_continuation(prog, pen_cfg());
  const Eigen::VectorXd diff = w.block(0) - w.block(1);
  const double obj_cd = 0.5 * (X * dir - y).squaredNorm() + beta * dir.lpNorm<1>();
  const double obj_w = 0.5 * (X * diff - y).squaredNorm() + beta * diff.lpNorm<1>();
  CHECK(obj_w == doctest::Approx(obj_cd).epsilon(1e-6));
}

TEST_CASE("toy 1d: penalized and exact solvers agree closely") {
  Dataset toy = make_toy1d();
  ConvexProgram prog = make_program(toy.X, toy.y.col(0), 1e-3);
  auto [wa, ra] = solve_admm(prog, tight());
  auto [wp, rp] = solve_penalized_continuation(prog, pen_cfg());
  CHECK(ra.status == SolveStatus::converged);
  CHECK(std::abs(ra.final_objective - rp.final_objective) <=
        1e-4 * (1.0 + std::abs(ra.final_objective)));
  CHECK(ra.final_violation <= 1e-10);
  CHECK(rp.final_violation <= 1e-10);
}

TEST_CASE("admm from any start ends essentially feasible") {
  Rng rng(11);
  DataMatrix X(rng.normal_matrix(10, 3));
  Eigen::VectorXd y = rng.normal_vector(10);
  ConvexProgram prog = make_program(X, y, 0.05);
  auto [w, rep] = solve_admm(prog, tight());
  CHECK(constraint_violation(prog, w).max <= 1e-6);
  CHECK(rep.final_violation <= 1e-6);
}

TEST_CASE("randomized agreement suite between the two solvers") {
  Rng rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(8));
    const int d = 2 + static_cast<int>(rng.below(2));
    Eigen::MatrixXd Xm = rng.normal_matrix(n, d);
    Eigen::VectorXd y = rng.normal_vector(n);
    const double beta = trial % 2 == 0 ? 1e-1 : 1e-3;
    const double kappa = trial % 3 == 0 ? 0.0 : (trial % 3 == 1 ? 0.1 : -1.0);
    ConvexProgram prog = make_program(DataMatrix(Xm), y, beta, kappa);
    auto [wa, ra] = solve_admm(prog, tight());
    auto [wp, rp] = solve_penalized_continuation(prog, pen_cfg());
    CHECK(std::abs(ra.final_objective - rp.final_objective) <=
          1e-3 * (1.0 + std::abs(ra.final_objective)));
  }
}

TEST_CASE("interpolation program") {
  Dataset toy = make_toy1d();
  PatternSet pats = enumerate_exact(toy.X);

  // y = 0 interpolates with zero weights
  ConvexProgram zero =
      build_interpolation_program(toy.X, LabelData::column(Eigen::VectorXd::Zero(5)), pats);
  InterpolationResult rz = solve_interpolation(zero, tight());
  CHECK(rz.feasible);
  CHECK(rz.group_norm <= 1e-10);

  // y in the range of a feasible block: optimum no larger than the witness norm
  const auto& p0 = pats.patterns.front();
  REQUIRE(p0.witness.has_value());
  const Eigen::VectorXd c = *p0.witness;
  const Eigen::VectorXd y_feas =
      kappa_diagonal(p0, 0.0).cwiseProduct(toy.X.values() * c);
  ConvexProgram feas = build_interpolation_program(toy.X, LabelData::column(y_feas), pats);
  InterpolationResult rf = solve_interpolation(feas, tight());
  CHECK(rf.feasible);
  CHECK(rf.group_norm <= c.norm() + 1e-6);

  // toy labels: finite optimum consistent with the beta -> 0 path
  ConvexProgram toy_prog = build_interpolation_program(toy.X, toy.y, pats);
  InterpolationResult rt = solve_interpolation(toy_prog, tight());
  CHECK(rt.feasible);
  std::vector<double> path;
  for (double beta : {1e-2, 1e-3, 1e-4}) {
    ConvexProgram reg(toy.X, toy.y, pats, Activation::relu(), beta);
    auto [w, rep] = solve_admm(reg, tight());
    double gn = 0.0;
    for (Eigen::Index b = 0; b < w.num_blocks(); ++b) gn += w.block(b).norm();
    path.push_back(gn);
  }
  // the regularized group norms approach the interpolation optimum from below
  CHECK(path[2] <= rt.group_norm + 1e-3);
  CHECK(std::abs(path[2] - rt.group_norm) <= 0.05 * (1.0 + rt.group_norm));
}

TEST_CASE("nuclear norm solver") {
  Rng rng(17);
  const int n = 20, d = 4, K = 3;
  std::vector<Eigen::MatrixXd> patches;
  for (int k = 0; k < K; ++k) patches.push_back(rng.normal_matrix(n, d));
  Eigen::VectorXd y = rng.normal_vector(n);

  SolverConfig cfg = tight();

  // beta above the dual norm at zero forces Z = 0
  double cert0 = nuclear_dual_certificate(patches, y, Eigen::MatrixXd::Zero(d, K));
  auto [z0, r0] = solve_nuclear(patches, y, 1.01 * cert0, cfg);
  CHECK(z0.norm() <= 1e-8);

  // small synthetic against the subgradient oracle
  const double beta = 0.3 * cert0;
  auto [Z, rep] = solve_nuclear(patches, y, beta, cfg);
  CHECK(rep.status == SolveStatus::converged);
  const double oracle_best =
      oracle::nuclear_subgradient_oracle(patches, y, beta, 20, 4000, 23);
  CHECK(rep.final_objective <= oracle_best + 1e-6);
  CHECK(rep.final_objective == doctest::Approx(oracle_best).epsilon(1e-4));

  // optimality certificate
  CHECK(nuclear_dual_certificate(patches, y, Z) <= beta * (1.0 + 1e-4));

  // monotone objective history
  for (std::size_t i = 1; i < rep.objective_history.size(); ++i)
    CHECK(rep.objective_history[i] <= rep.objective_history[i - 1] + 1e-12);

  // K=1 reduces the nuclear norm to the Euclidean norm of one block
  std::vector<Eigen::MatrixXd> one{patches[0]};
  auto [z1, r1] = solve_nuclear(one, y, beta, cfg);
  // compare against a tiny proximal-gradient run on min .5||Xv-y||^2+beta||v||
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  const double L = std::pow(patches[0].operatorNorm(), 2);
  for (int t = 0; t < 20000; ++t)
    v = prox_group(v - (patches[0].transpose() * (patches[0] * v - y)) / L, beta / L, 2);
  CHECK((z1.col(0) - v).norm() <= 1e-6 * (1.0 + v.norm()));
}

TEST_CASE("circular fourier lasso") {
  Rng rng(19);
  const int n = 30, d = 8;
  Eigen::MatrixXd X = rng.normal_matrix(n, d);
  const Eigen::MatrixXcd F = dft_matrix(d);
  const Eigen::MatrixXcd Xf = X.cast<std::complex<double>>() * F;

  // plant a conjugate-symmetric single-frequency spectrum
  Eigen::VectorXcd z_true = Eigen::VectorXcd::Zero(d);
  z_true[1] = std::complex<double>(1.2, 0.7);
  z_true[d - 1] = std::conj(z_true[1]);
  const Eigen::VectorXcd yc = Xf * z_true;
  CHECK(yc.imag().cwiseAbs().maxCoeff() <= 1e-10);
  const Eigen::VectorXd y = yc.real();

  SolverConfig cfg = tight();
  auto [z, rep] = solve_circular_fourier(X, y, 1e-4, cfg);

  // support recovery at the planted frequency pair
  double off_mass = 0.0;
  for (int j = 0; j < d; ++j)
    if (j != 1 && j != d - 1) off_mass += std::abs(z[j]);
  CHECK(off_mass <= 1e-3 * std::abs(z[1]));
  CHECK(std::abs(z[1] - z_true[1]) <= 1e-2);

  // conjugate symmetry of the solution
  for (int j = 1; j < d; ++j) CHECK(std::abs(z[j] - std::conj(z[d - j])) <= 1e-8);

  // circulant reconstruction: X W sqrt(d) e_1-column identity
  const Eigen::MatrixXcd W = circulant_from_spectrum(z);
  CHECK(W.imag().cwiseAbs().maxCoeff() <= 1e-8);
  const Eigen::VectorXd w_first = W.real().col(0);
  const Eigen::VectorXcd lhs = Xf * z;
  const Eigen::VectorXd rhs = std::sqrt(static_cast<double>(d)) * (X * w_first);
  CHECK((lhs.real() - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()));

  // huge beta kills the spectrum
  auto [z_dead, rep_dead] = solve_circular_fourier(X, y, 1e6, cfg);
  CHECK(z_dead.norm() <= 1e-12);
}

TEST_CASE("solver determinism") {
  Dataset toy = make_toy1d();
  ConvexProgram prog = make_program(toy.X, toy.y.col(0), 1e-3);
  auto [w1, r1] = solve_admm(prog, tight());
  auto [w2, r2] = solve_admm(prog, tight());
  CHECK(w1.blocks == w2.blocks);
  CHECK(r1.final_objective == r2.final_objective);
}

TEST_CASE("solve report serializes to json lines") {
  Dataset toy = make_toy1d();
  ConvexProgram prog = make_program(toy.X, toy.y.col(0), 1e-2);
  SolverConfig cfg = tight();
  cfg.log_interval = 50;
  auto [w, rep] = solve_admm(prog, cfg);
  const std::string jl = rep.to_jsonl();
  CHECK(jl.find("\"iter\":0") != std::string::npos);
  CHECK(jl.find("\"status\":\"converged\"") != std::string::npos);
}
