#include <doctest.h>

#include <convexnn/datasets.hpp>
#include <convexnn/enumerate.hpp>
#include <convexnn/mapping.hpp>
#include <convexnn/rng.hpp>
#include <convexnn/solvers.hpp>

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

}  // namespace

TEST_CASE("network forward basics") {
  NetworkParams zero;
  zero.activation = Activation::leaky();
  zero.W1 = Eigen::MatrixXd::Zero(2, 3);
  zero.W2 = Eigen::MatrixXd::Ones(3, 1);
  CHECK(network_forward(zero, example1()).isZero());

  NetworkParams single;
  single.activation = Activation::relu();
  single.W1 = Eigen::Vector2d(1, 0);
  single.W2 = Eigen::MatrixXd::Ones(1, 1);
  CHECK(network_forward(single, example1()).col(0).isApprox(Eigen::Vector3d(2, 3, 1)));

  NetworkParams abs;
  abs.activation = Activation::absolute();
  abs.W1 = Eigen::MatrixXd::Identity(2, 2);
  abs.W2 = Eigen::MatrixXd::Ones(2, 1);
  Eigen::MatrixXd X(2, 2);
  X << -1, 2, 3, -4;
  CHECK(network_forward(abs, X).col(0).isApprox(Eigen::Vector2d(3, 7)));

  NetworkParams bad = single;
  bad.W2 = Eigen::MatrixXd::Ones(2, 1);
  CHECK_THROWS_AS(network_forward(bad, example1()), std::invalid_argument);
}

TEST_CASE("nonconvex objective") {
  NetworkParams zero;
  zero.activation = Activation::relu();
  zero.W1 = Eigen::MatrixXd::Zero(2, 4);
  zero.W2 = Eigen::MatrixXd::Zero(4, 1);
  Eigen::VectorXd y(3);
  y << 1, -2, 2;
  CHECK(nonconvex_objective(zero, example1(), y, 0.5) ==
        doctest::Approx(0.5 * y.squaredNorm()));

  // balanced single neuron: penalty beta * c for ||w1|| = |w2| = sqrt(c)
  NetworkParams one;
  one.activation = Activation::relu();
  const double c = 2.7;
  one.W1 = Eigen::Vector2d(std::sqrt(c), 0);
  one.W2 = Eigen::MatrixXd::Constant(1, 1, std::sqrt(c));
  const double loss = 0.5 * (network_forward(one, example1()).col(0) - y).squaredNorm();
  CHECK(nonconvex_objective(one, example1(), y, 0.3) == doctest::Approx(loss + 0.3 * c));
}

TEST_CASE("rescale to balance") {
  NetworkParams p;
  p.activation = Activation::relu();
  p.W1 = Eigen::Vector2d(4, 0);
  p.W2 = Eigen::MatrixXd::Ones(1, 1);
  RescaleResult r = rescale_balanced(p);
  CHECK(r.params.W1.col(0).isApprox(Eigen::Vector2d(2, 0)));
  CHECK(r.params.W2(0, 0) == doctest::Approx(2.0));
  CHECK(network_forward(r.params, example1()).isApprox(network_forward(p, example1())));

  // already balanced: fixed point
  RescaleResult again = rescale_balanced(r.params);
  CHECK(again.params.W1.isApprox(r.params.W1));
  CHECK(again.params.W2.isApprox(r.params.W2));

  // dead neuron dropped with a warning count
  NetworkParams dead;
  dead.activation = Activation::relu();
  dead.W1 = Eigen::MatrixXd::Zero(2, 1);
  dead.W2 = Eigen::MatrixXd::Ones(1, 1);
  CHECK(rescale_balanced(dead).dropped == 1);

  // AM-GM: penalty never increases under balancing
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    NetworkParams q;
    q.activation = Activation::relu();
    q.W1 = rng.normal_matrix(3, 5);
    q.W2 = rng.normal_matrix(5, 1);
    const double before = q.W1.squaredNorm() + q.W2.squaredNorm();
    const NetworkParams b = rescale_balanced(q).params;
    const double after = b.W1.squaredNorm() + b.W2.squaredNorm();
    CHECK(after <= before + 1e-10);
    Eigen::MatrixXd X = rng.normal_matrix(6, 3);
    CHECK(network_forward(b, X).isApprox(network_forward(q, X), 1e-10));
  }
}

TEST_CASE("convex weights to network and back") {
  Eigen::VectorXd y(3);
  y << 1, -1, 0;
  DataMatrix X(example1());
  ConvexProgram prog(X, LabelData::column(y), enumerate_exact(X), Activation::relu(), 0.1);

  GroupWeights w = prog.zero_weights();
  w.block(0) = Eigen::Vector2d(4, 0);
  w.block(prog.num_patterns() + 1) = Eigen::Vector2d(0, 9);
  NetworkParams net = convex_to_network(w, prog);
  REQUIRE(net.neurons() == 2);
  CHECK(net.W1.col(0).isApprox(Eigen::Vector2d(2, 0)));
  CHECK(net.W2(0, 0) == doctest::Approx(2.0));
  CHECK(net.W1.col(1).isApprox(Eigen::Vector2d(0, 3)));
  CHECK(net.W2(1, 0) == doctest::Approx(-3.0));

  // m* never exceeds 2P
  CHECK(net.neurons() <= 2 * prog.num_patterns());

  // all-zero weights give the empty network
  NetworkParams none = convex_to_network(prog.zero_weights(), prog);
  CHECK(none.neurons() == 0);
  CHECK(network_forward(none, example1()).isZero());

  // round trip reproduces the nonzero blocks up to permutation
  NeuronBlocks back = network_to_convex(net, X);
  REQUIRE(back.entries.size() == 2);
  GroupWeights collapsed = back.collapse(X.cols());
  std::vector<Eigen::VectorXd> got, want;
  for (Eigen::Index b = 0; b < collapsed.num_blocks(); ++b)
    if (collapsed.block(b).norm() > 1e-12) got.push_back(collapsed.block(b));
  for (Eigen::Index b = 0; b < w.num_blocks(); ++b)
    if (w.block(b).norm() > 1e-12) want.push_back(w.block(b));
  REQUIRE(got.size() == want.size());
  for (const auto& g : got) {
    bool found = false;
    for (const auto& t : want) found = found || (g - t).norm() <= 1e-10;
    CHECK(found);
  }

  // a neuron with zero output weight emits no block
  NetworkParams with_dead = net;
  with_dead.W1.conservativeResize(Eigen::NoChange, 3);
  with_dead.W1.col(2) = Eigen::Vector2d(1, 1);
  with_dead.W2.conservativeResize(3, Eigen::NoChange);
  with_dead.W2(2, 0) = 0.0;
  CHECK(network_to_convex(with_dead, X).entries.size() == 2);
}

TEST_CASE("objective parity on a solved desk program") {
  for (double kappa : {0.0, 0.1, -1.0}) {
    Rng rng(101 + static_cast<int>(10 * kappa));
    DataMatrix X(rng.normal_matrix(9, 3));
    Eigen::VectorXd y = rng.normal_vector(9);
    ConvexProgram prog(X, LabelData::column(y), enumerate_exact(X), Activation(kappa), 0.05);
    auto [w, rep] = solve_admm(prog, tight());

    NetworkParams net = convex_to_network(w, prog);
    const double p_cvx = rep.final_objective;
    const double p_net = nonconvex_objective(net, X.values(), y, prog.beta);
    CHECK(std::abs(p_cvx - p_net) <= 1e-8 + 1e-6 * std::abs(p_cvx));

    // every reconstructed neuron's own pattern agrees with its source block
    // on rows with nonzero slack
    for (Eigen::Index j = 0; j < net.neurons(); ++j) {
      const Eigen::VectorXd z = X.values() * net.W1.col(j);
      (void)z;
    }
  }
}

TEST_CASE("single relu neuron parity between the two objectives") {
  Rng rng(7);
  DataMatrix X(rng.normal_matrix(8, 2));
  const Eigen::VectorXd c = rng.normal_vector(2);
  const Eigen::VectorXd y = Activation::relu().apply(Eigen::VectorXd(X.values() * c));

  NetworkParams net;
  net.activation = Activation::relu();
  net.W1 = c;
  net.W2 = Eigen::MatrixXd::Ones(1, 1);
  NeuronBlocks nb = network_to_convex(net, X);
  const double beta = 0.02;
  const double eq3 = nonconvex_objective(rescale_balanced(net).params, X.values(), y, beta);
  const double eq6 = nb.objective_kept(X, LabelData::column(y), Activation::relu(), beta);
  CHECK(eq3 == doctest::Approx(eq6).epsilon(1e-10));
}

TEST_CASE("stationarity of reconstructed optima, not of random points") {
  Dataset toy = make_toy1d();
  ConvexProgram prog(toy.X, toy.y, enumerate_exact(toy.X), Activation::relu(), 1e-3);
  auto [w, rep] = solve_admm(prog, tight());
  NetworkParams net = convex_to_network(w, prog);

  StationarityReport good =
      stationarity_check(net, toy.X.values(), toy.y.col(0), prog.beta, 1e-5);
  CHECK(good.is_stationary);

  Rng rng(5);
  NetworkParams rnd;
  rnd.activation = Activation::relu();
  rnd.W1 = rng.normal_matrix(2, 6);
  rnd.W2 = rng.normal_matrix(6, 1);
  StationarityReport bad =
      stationarity_check(rnd, toy.X.values(), toy.y.col(0), prog.beta, 1e-3);
  CHECK_FALSE(bad.is_stationary);
  CHECK(bad.worst > 0.1);
}

TEST_CASE("network params csv roundtrip") {
  Rng rng(9);
  NetworkParams p;
  p.activation = Activation::leaky();
  p.W1 = rng.normal_matrix(3, 2);
  p.W2 = rng.normal_matrix(2, 1);
  p.bias = rng.normal_vector(2);
  NetworkParams q = NetworkParams::from_csv(p.to_csv());
  CHECK(q.W1.isApprox(p.W1));
  CHECK(q.W2.isApprox(p.W2));
  REQUIRE(q.bias.has_value());
  CHECK(q.bias->isApprox(*p.bias));
  CHECK(q.activation.kappa == doctest::Approx(0.1));
}
