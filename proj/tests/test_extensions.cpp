#include <doctest.h>

#include <convexnn/baseline.hpp>
#include <convexnn/datasets.hpp>
#include <convexnn/extensions.hpp>

#include "oracles.hpp"

using namespace cvxnn;

namespace {

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

}  // namespace

TEST_CASE("lowrank training at full rank is exact") {
  Rng rng(3);
  DataMatrix X(rng.normal_matrix(8, 3));
  Eigen::VectorXd y = rng.normal_vector(8);
  const double beta = 0.1;

  ConvexProgram full(X, LabelData::column(y), enumerate_exact(X), Activation::relu(), beta);
  auto [w_full, rep_full] = solve_admm(full, tight());

  LowRankResult res = lowrank_train(X, y, X.rank(), beta, Activation::relu(), tight());
  CHECK(res.plan.sigma_kplus1 <= 1e-10);
  CHECK(res.plan.ratio() == doctest::Approx(1.0));
  CHECK(res.objective_value ==
        doctest::Approx(rep_full.final_objective).epsilon(1e-5));

  CHECK_THROWS_AS(lowrank_train(X, y, 0, beta, Activation::relu(), tight()),
                  std::invalid_argument);
  CHECK_THROWS_AS(lowrank_train(X, y, X.rank() + 1, beta, Activation::relu(), tight()),
                  std::invalid_argument);
}

TEST_CASE("lowrank sandwich on a rank-deficient instance") {
  Dataset ds = make_rank_deficient_gaussian(10, 6, 3, 7);
  const double beta = 0.1;
  const Eigen::Index k = 3;

  ConvexProgram full(ds.X, ds.y, enumerate_exact(ds.X), Activation::relu(), beta);
  auto [w_star, rep_star] = solve_admm(full, tight());
  const double p_star = rep_star.final_objective;

  LowRankResult res = lowrank_train(ds.X, ds.y.col(0), k, beta, Activation::relu(), tight());
  CHECK(res.plan.sigma_kplus1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(p_star <= res.objective_value + 1e-8 * (1.0 + p_star));
  CHECK(res.objective_value <= p_star * res.plan.ratio() * (1.0 + 1e-8));

  // arrangement count shrinks with the rank
  CHECK(res.patterns.size() <= count_bound(10, static_cast<std::uint64_t>(k)));
  CHECK(count_bound(10, static_cast<std::uint64_t>(k)) < count_bound(10, 6));

  // zero labels: zero objective on both sides
  LowRankResult zr =
      lowrank_train(ds.X, Eigen::VectorXd::Zero(10), k, beta, Activation::relu(), tight());
  CHECK(zr.objective_value <= 1e-10);
}

TEST_CASE("spike-free path equals full enumeration on whitened data") {
  Rng rng(11);
  const int n = 5, d = 8;
  // orthonormal rows: X X^T = I
  Eigen::MatrixXd G = rng.normal_matrix(d, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, n);
  DataMatrix X(Eigen::MatrixXd(Q.transpose()));
  Eigen::VectorXd y = rng.normal_vector(n);
  const double beta = 0.05;

  SpikeFreeResult sf = spike_free_train(X, y, beta, tight());
  ConvexProgram full(X, LabelData::column(y), enumerate_exact(X), Activation::relu(), beta);
  auto [w_full, rep_full] = solve_admm(full, tight());
  CHECK(sf.objective_value ==
        doctest::Approx(rep_full.final_objective).epsilon(1e-6));

  // large beta kills both blocks
  SpikeFreeResult dead = spike_free_train(X, y, 1e4, tight());
  CHECK(dead.weights.blocks.norm() <= 1e-8);

  // non-whitened data is refused without the override
  DataMatrix bad(rng.normal_matrix(4, 6));
  CHECK_THROWS_AS(spike_free_train(bad, rng.normal_vector(4), beta, tight()),
                  std::invalid_argument);
  CHECK_NOTHROW(spike_free_train(bad, rng.normal_vector(4), beta, tight(), true));
}

TEST_CASE("vector output decomposition") {
  Rng rng(13);
  DataMatrix X(rng.normal_matrix(9, 3));
  PatternSet pats = enumerate_exact(X);
  const double beta = 0.05;

  // C = 1 equals the scalar path
  Eigen::MatrixXd Y1 = rng.normal_matrix(9, 1);
  VectorOutputResult r1 = vector_output_train(X, Y1, beta, pats, Activation::relu(), tight());
  ConvexProgram scalar(X, LabelData::column(Y1.col(0)), pats, Activation::relu(), beta);
  auto [w_s, rep_s] = solve_admm(scalar, tight());
  CHECK(r1.total_objective == doctest::Approx(rep_s.final_objective).epsilon(1e-9));

  // duplicated columns give identical solutions
  Eigen::MatrixXd Ydup(9, 2);
  Ydup << Y1, Y1;
  VectorOutputResult rd = vector_output_train(X, Ydup, beta, pats, Activation::relu(), tight());
  CHECK(rd.columns[0].blocks == rd.columns[1].blocks);

  // additivity: total equals the sum of column objectives, and the
  // assembled network reproduces it through the l1^2 objective
  Eigen::MatrixXd Y3 = rng.normal_matrix(9, 3);
  VectorOutputResult r3 = vector_output_train(X, Y3, beta, pats, Activation::relu(), tight());
  double sum = 0.0;
  for (double c : r3.column_objectives) sum += c;
  CHECK(r3.total_objective == doctest::Approx(sum));
  const double assembled = nonconvex_objective_l1sq(r3.network, X.values(), Y3, beta);
  CHECK(std::abs(assembled - r3.total_objective) <= 1e-6 * (1.0 + r3.total_objective));

  // permutation invariance of the total objective
  Eigen::MatrixXd Yperm(9, 3);
  Yperm << Y3.col(2), Y3.col(0), Y3.col(1);
  VectorOutputResult rp = vector_output_train(X, Yperm, beta, pats, Activation::relu(), tight());
  CHECK(rp.total_objective == doctest::Approx(r3.total_objective).epsilon(1e-9));
}

TEST_CASE("patch extraction geometry") {
  Eigen::MatrixXd sig(2, 6);
  sig << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  PatchSet ps = PatchSet::from_signal(sig, 2, 2, 0);
  REQUIRE(ps.count() == 3);
  CHECK(ps.patches[0].row(0).isApprox(Eigen::RowVector2d(1, 2)));
  CHECK(ps.patches[2].row(1).isApprox(Eigen::RowVector2d(11, 12)));

  PatchSet padded = PatchSet::from_signal(sig, 3, 3, 1);
  REQUIRE(padded.count() == 2);
  CHECK(padded.patches[0](0, 0) == 0.0);  // zero padding
}

TEST_CASE("gap reduction identities") {
  Rng rng(17);
  const int n = 7, d = 4;

  // K = 1 is the identity reduction
  PatchSet single;
  single.patch_dim = d;
  single.patches.push_back(rng.normal_matrix(n, d));
  Eigen::VectorXd y = rng.normal_vector(n);
  GapReduction red1 = cnn_gap_reduce(single, y);
  Eigen::MatrixXd pred = rng.normal_matrix(n, 1);
  CHECK(red1.loss.value(pred, y) == doctest::Approx(0.5 * (pred.col(0) - y).squaredNorm()));

  // constant patches: averaging changes nothing
  PatchSet constant;
  constant.patch_dim = d;
  const Eigen::MatrixXd base = rng.normal_matrix(n, d);
  for (int k = 0; k < 3; ++k) constant.patches.push_back(base);
  GapReduction redc = cnn_gap_reduce(constant, y);
  Eigen::MatrixXd stacked_pred(3 * n, 1);
  stacked_pred << pred, pred, pred;
  CHECK(redc.loss.value(stacked_pred, y) == doctest::Approx(red1.loss.value(pred, y)));

  // gradient of the wrapped loss matches finite differences
  PatchSet three;
  three.patch_dim = d;
  for (int k = 0; k < 3; ++k) three.patches.push_back(rng.normal_matrix(n, d));
  GapReduction red3 = cnn_gap_reduce(three, y);
  Eigen::MatrixXd at = rng.normal_matrix(3 * n, 1);
  Eigen::MatrixXd fd = oracle::finite_difference_gradient(
      [&](const Eigen::MatrixXd& p) { return red3.loss.value(p, y); }, at);
  CHECK((fd - red3.loss.gradient(at, y)).norm() <= 1e-6 * (1.0 + fd.norm()));

  // training objective on the reduction equals the pooled objective
  // evaluated directly, for random parameters
  NetworkParams params;
  params.activation = Activation::relu();
  params.W1 = rng.normal_matrix(d, 5);
  params.W2 = rng.normal_matrix(5, 1);
  const Eigen::MatrixXd stacked_out = network_forward(params, red3.stacked.values());
  const double via_reduction = red3.loss.value(stacked_out, y);
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < 3; ++k)
    pooled += network_forward(params, three.patches[static_cast<std::size_t>(k)]).col(0);
  pooled /= 3.0;
  CHECK(via_reduction == doctest::Approx(0.5 * (pooled - y).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("linear cnn training") {
  Rng rng(19);
  const int n = 30, d = 5, K = 3;
  PatchSet ps;
  ps.patch_dim = d;
  for (int k = 0; k < K; ++k) ps.patches.push_back(rng.normal_matrix(n, d));
  Eigen::VectorXd y = rng.normal_vector(n);

  // large beta gives the empty model
  LinearCnnResult dead = linear_cnn_train(ps, y, 1e5, tight());
  CHECK(dead.Z.norm() <= 1e-10);
  CHECK(dead.filters.cols() == 0);

  const double beta = 0.5;
  LinearCnnResult res = linear_cnn_train(ps, y, beta, tight());
  CHECK(res.dual_certificate <= beta * (1.0 + 1e-4));

  // factor reconstruction: sum_k X_k z_k = sum_k sum_j X_k u_j (s_j v_jk)
  Eigen::VectorXd direct = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd via_factors = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < K; ++k) {
    direct += ps.patches[static_cast<std::size_t>(k)] * res.Z.col(k);
    via_factors +=
        ps.patches[static_cast<std::size_t>(k)] * (res.filters * res.output_weights.col(k));
  }
  CHECK((direct - via_factors).norm() <= 1e-9 * (1.0 + direct.norm()));

  // gradient descent on the factored model reaches the convex optimum
  TrainConfig cfg;
  cfg.m = 8;
  cfg.lr = 2e-3;
  cfg.epochs = 30000;
  cfg.seed = 4;
  LinearCnnGdResult gd = train_linear_cnn_gd(ps.patches, y, beta, cfg);
  CHECK(gd.final_objective <= res.objective_value * 1.01 + 1e-8);
  CHECK(gd.final_objective >= res.objective_value * (1.0 - 1e-6) - 1e-10);
}
