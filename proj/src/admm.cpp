#include <chrono>

#include <Eigen/Cholesky>

#include "convexnn/solvers.hpp"

namespace cvxnn {

namespace {

// Woodbury-factored solver for (Xhat^T Xhat + B) w = r with B the
// block-diagonal ridge rho * (I + A_i^T A_i). The lifted Gram couples
// blocks only through n rows, so
//   (B + Xhat^T Xhat)^-1 = B^-1 - B^-1 Xhat^T (I + Xhat B^-1 Xhat^T)^-1 Xhat B^-1.
class WStep {
 public:
  WStep(const ConvexProgram& prog, const FeatureOp& features) : prog_(prog), feat_(features) {
    const Eigen::Index P = prog.num_patterns();
    const Eigen::MatrixXd& Xc = prog.constraint_matrix();
    AtA_.reserve(static_cast<std::size_t>(P));
    for (Eigen::Index i = 0; i < P; ++i) {
      // with S = diag(+-1): A^T A = Xc^T Xc regardless of the sign pattern
      (void)Xc;
      AtA_.push_back(Xc.transpose() * Xc);
    }
  }

  // Factors (gamma * Xhat^T Xhat + rho (I + A^T A))^-1.
  void factorize(double rho, double gamma = 1.0) {
    rho_ = rho;
    const Eigen::Index P = prog_.num_patterns();
    const Eigen::Index D = prog_.dim();
    llt_.clear();
    llt_.reserve(static_cast<std::size_t>(P));
    for (Eigen::Index i = 0; i < P; ++i) {
      Eigen::MatrixXd B = rho * (Eigen::MatrixXd::Identity(D, D) + AtA_[static_cast<std::size_t>(i)]);
      Eigen::LLT<Eigen::MatrixXd> llt(B);
      if (llt.info() != Eigen::Success) {
        B += 1e-10 * Eigen::MatrixXd::Identity(D, D);
        llt.compute(B);
        jittered_ = true;
      }
      llt_.push_back(std::move(llt));
    }
    // M = gamma^-1 I_n + Xhat B^-1 Xhat^T, assembled per pattern (both
    // signs give the same contribution).
    const Eigen::Index n = prog_.n();
    Eigen::MatrixXd M = (1.0 / gamma) * Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < P; ++i) {
      const Eigen::MatrixXd Fi = build_feature_block(prog_, i);
      M.noalias() += 2.0 * Fi * llt_[static_cast<std::size_t>(i)].solve(Fi.transpose());
    }
    mllt_.compute(M);
    if (mllt_.info() != Eigen::Success) {
      M += 1e-10 * Eigen::MatrixXd::Identity(n, n);
      mllt_.compute(M);
      jittered_ = true;
    }
  }

  GroupWeights solve(const GroupWeights& rhs) const {
    GroupWeights t = block_solve(rhs);
    const Eigen::VectorXd xt = feat_.apply(t);
    const Eigen::VectorXd q = mllt_.solve(xt);
    GroupWeights corr = block_solve(wrap(feat_.adjoint(q)));
    GroupWeights out;
    out.blocks = t.blocks - corr.blocks;
    return out;
  }

  bool jittered() const { return jittered_; }

 private:
  GroupWeights wrap(Eigen::MatrixXd m) const {
    GroupWeights w;
    w.blocks = std::move(m);
    return w;
  }

  GroupWeights block_solve(const GroupWeights& r) const {
    const Eigen::Index P = prog_.num_patterns();
    GroupWeights out;
    out.blocks.resizeLike(r.blocks);
    for (Eigen::Index i = 0; i < P; ++i) {
      out.blocks.col(i) = llt_[static_cast<std::size_t>(i)].solve(r.blocks.col(i));
      out.blocks.col(i + P) = llt_[static_cast<std::size_t>(i)].solve(r.blocks.col(i + P));
    }
    return out;
  }

  const ConvexProgram& prog_;
  const FeatureOp& feat_;
  std::vector<Eigen::MatrixXd> AtA_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt_;
  Eigen::LLT<Eigen::MatrixXd> mllt_;
  double rho_ = 1.0;
  bool jittered_ = false;
};

}  // namespace

std::pair<GroupWeights, SolveReport> solve_admm(const ConvexProgram& prog,
                                                const SolverConfig& cfg) {
  if (!prog.loss.is_squared())
    throw std::invalid_argument("solve_admm: squared loss required (use solve_penalized)");
  if (!prog.constrained)
    throw std::invalid_argument("solve_admm: constrained program required");

  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index P = prog.num_patterns();
  const Eigen::Index D = prog.dim();
  const Eigen::Index n = prog.n();
  const Eigen::MatrixXd& Xc = prog.constraint_matrix();
  const Eigen::Index nc = Xc.rows();
  const Eigen::VectorXd y = prog.labels.values.col(0);

  SolveReport rep;
  if (P == 0) {
    rep.status = SolveStatus::converged;
    rep.final_objective = prog.loss.value(Eigen::VectorXd::Zero(n), prog.labels.values);
    return {GroupWeights(D, 0), rep};
  }

  FeatureOp features(prog);
  WStep wstep(prog, features);
  double rho = cfg.rho_admm;
  wstep.factorize(rho);

  // constraint rows per pattern: S_i Xc
  std::vector<Eigen::MatrixXd> A(static_cast<std::size_t>(P));
  for (Eigen::Index i = 0; i < P; ++i)
    A[static_cast<std::size_t>(i)] =
        sign_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)]).asDiagonal() * Xc;

  GroupWeights w(D, P), z(D, P);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nc, 2 * P);
  Eigen::MatrixXd uz = Eigen::MatrixXd::Zero(D, 2 * P);
  Eigen::MatrixXd us = Eigen::MatrixXd::Zero(nc, 2 * P);

  Eigen::MatrixXd Xty = features.adjoint(y);

  auto constraint_apply = [&](const Eigen::MatrixXd& blocks) {
    Eigen::MatrixXd out(nc, 2 * P);
    for (Eigen::Index i = 0; i < P; ++i) {
      out.col(i) = A[static_cast<std::size_t>(i)] * blocks.col(i);
      out.col(i + P) = A[static_cast<std::size_t>(i)] * blocks.col(i + P);
    }
    return out;
  };
  auto constraint_adjoint = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(D, 2 * P);
    for (Eigen::Index i = 0; i < P; ++i) {
      out.col(i) = A[static_cast<std::size_t>(i)].transpose() * m.col(i);
      out.col(i + P) = A[static_cast<std::size_t>(i)].transpose() * m.col(i + P);
    }
    return out;
  };

  GroupWeights best = w;
  double best_obj = std::numeric_limits<double>::infinity();
  const double dim_total = std::sqrt(static_cast<double>((D + nc) * 2 * P));
  const double dim_w = std::sqrt(static_cast<double>(D * 2 * P));
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    // w-step
    GroupWeights rhs;
    rhs.blocks = Xty + rho * (z.blocks - uz) + rho * constraint_adjoint(s - us);
    w = wstep.solve(rhs);

    const Eigen::MatrixXd Aw = constraint_apply(w.blocks);

    // z-step: group prox
    Eigen::MatrixXd z_old = z.blocks;
    for (Eigen::Index b = 0; b < 2 * P; ++b)
      z.blocks.col(b) = prox_group(w.blocks.col(b) + uz.col(b), prog.beta / rho, prog.reg_p);

    // s-step: nonnegative projection
    Eigen::MatrixXd s_old = s;
    s = (Aw + us).cwiseMax(0.0);

    uz += w.blocks - z.blocks;
    us += Aw - s;

    const double r_pri = std::sqrt((w.blocks - z.blocks).squaredNorm() + (Aw - s).squaredNorm());
    const double r_dual =
        rho * std::sqrt((z.blocks - z_old).squaredNorm() +
                        constraint_adjoint(s - s_old).squaredNorm());
    const double scale_pri =
        std::max({std::sqrt(w.blocks.squaredNorm() + Aw.squaredNorm()),
                  std::sqrt(z.blocks.squaredNorm() + s.squaredNorm()), 1.0});
    const double scale_dual =
        rho * std::sqrt(uz.squaredNorm() + constraint_adjoint(us).squaredNorm());
    const double eps_pri = dim_total * cfg.abs_tol + cfg.rel_tol * scale_pri;
    const double eps_dual = dim_w * cfg.abs_tol + cfg.rel_tol * std::max(scale_dual, 1.0);

    if (cfg.log_interval > 0 ? (it % cfg.log_interval == 0) : true)
      rep.objective_history.push_back(objective(prog, z));

    if ((it + 1) % 50 == 0) {
      GroupWeights cand = z;
      project_feasible(prog, cand);
      const double obj = objective(prog, cand);
      if (obj < best_obj) {
        best_obj = obj;
        best = cand;
      }
    }

    if (r_pri <= eps_pri && r_dual <= eps_dual) {
      rep.status = SolveStatus::converged;
      ++it;
      break;
    }

    // residual balancing
    if ((it + 1) % 25 == 0) {
      double new_rho = rho;
      if (r_pri > 10.0 * r_dual) new_rho = rho * 2.0;
      else if (r_dual > 10.0 * r_pri) new_rho = rho / 2.0;
      new_rho = std::min(1e6, std::max(1e-3, new_rho));
      if (new_rho != rho) {
        uz *= rho / new_rho;
        us *= rho / new_rho;
        rho = new_rho;
        wstep.factorize(rho);
      }
    }
  }

  rep.iterations = it;
  if (wstep.jittered()) rep.diagnostic = "w-step system was jittered by 1e-10*I";

  GroupWeights out = z;
  rep.final_violation = constraint_violation(prog, out).max;
  project_feasible(prog, out);
  double obj = objective(prog, out);
  if (rep.status != SolveStatus::converged && best_obj < obj) {
    out = best;
    obj = best_obj;
  }
  rep.final_objective = obj;
  rep.objective_history.push_back(obj);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {out, rep};
}

InterpolationResult solve_interpolation(const ConvexProgram& prog, const SolverConfig& cfg,
                                        double feas_tol) {
  InterpolationResult res;
  const double yscale = std::max(1.0, prog.labels.values.norm());
  if (prog.labels.values.isZero(0.0)) {
    res.weights = prog.zero_weights();
    res.feasible = true;
    res.report.status = SolveStatus::converged;
    return res;
  }

  // ADMM on min sum ||z_i|| s.t. Xhat w = y, cone constraints; the label
  // fit is an exact equality block (its "prox" pins r = y), so the w-step
  // system carries the lifted Gram with weight rho as well.
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index P = prog.num_patterns();
  const Eigen::Index D = prog.dim();
  const Eigen::Index n = prog.n();
  const Eigen::MatrixXd& Xc = prog.constraint_matrix();
  const Eigen::Index nc = Xc.rows();
  const Eigen::VectorXd y = prog.labels.values.col(0);

  FeatureOp features(prog);
  WStep wstep(prog, features);
  double rho = cfg.rho_admm;
  wstep.factorize(rho, rho);

  std::vector<Eigen::MatrixXd> A(static_cast<std::size_t>(P));
  for (Eigen::Index i = 0; i < P; ++i)
    A[static_cast<std::size_t>(i)] =
        sign_diagonal(prog.patterns.patterns[static_cast<std::size_t>(i)]).asDiagonal() * Xc;

  GroupWeights w(D, P), z(D, P);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nc, 2 * P);
  Eigen::MatrixXd uz = Eigen::MatrixXd::Zero(D, 2 * P);
  Eigen::MatrixXd us = Eigen::MatrixXd::Zero(nc, 2 * P);
  Eigen::VectorXd ur = Eigen::VectorXd::Zero(n);

  auto constraint_apply = [&](const Eigen::MatrixXd& blocks) {
    Eigen::MatrixXd out(nc, 2 * P);
    for (Eigen::Index i = 0; i < P; ++i) {
      out.col(i) = A[static_cast<std::size_t>(i)] * blocks.col(i);
      out.col(i + P) = A[static_cast<std::size_t>(i)] * blocks.col(i + P);
    }
    return out;
  };
  auto constraint_adjoint = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(D, 2 * P);
    for (Eigen::Index i = 0; i < P; ++i) {
      out.col(i) = A[static_cast<std::size_t>(i)].transpose() * m.col(i);
      out.col(i + P) = A[static_cast<std::size_t>(i)].transpose() * m.col(i + P);
    }
    return out;
  };

  SolveReport rep;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    GroupWeights rhs;
    rhs.blocks = rho * (features.adjoint(y - ur) + (z.blocks - uz) +
                        constraint_adjoint(s - us));
    w = wstep.solve(rhs);

    const Eigen::MatrixXd Aw = constraint_apply(w.blocks);
    const Eigen::VectorXd Xw = features.apply(w);

    Eigen::MatrixXd z_old = z.blocks;
    for (Eigen::Index b = 0; b < 2 * P; ++b)
      z.blocks.col(b) = prox_group(w.blocks.col(b) + uz.col(b), 1.0 / rho, prog.reg_p);
    Eigen::MatrixXd s_old = s;
    s = (Aw + us).cwiseMax(0.0);

    uz += w.blocks - z.blocks;
    us += Aw - s;
    ur += Xw - y;

    const double r_pri = std::sqrt((w.blocks - z.blocks).squaredNorm() +
                                   (Aw - s).squaredNorm() + (Xw - y).squaredNorm());
    const double r_dual =
        rho * std::sqrt((z.blocks - z_old).squaredNorm() +
                        constraint_adjoint(s - s_old).squaredNorm());
    const double scale_pri = std::max(
        {std::sqrt(w.blocks.squaredNorm() + Aw.squaredNorm() + Xw.squaredNorm()),
         std::sqrt(z.blocks.squaredNorm() + s.squaredNorm() + y.squaredNorm()), 1.0});
    const double dims = std::sqrt(static_cast<double>((D + nc) * 2 * P + n));
    if (r_pri <= dims * cfg.abs_tol + cfg.rel_tol * scale_pri &&
        r_dual <= dims * cfg.abs_tol + cfg.rel_tol * std::max(1.0, rho * uz.norm())) {
      rep.status = SolveStatus::converged;
      ++it;
      break;
    }
    if ((it + 1) % 25 == 0) {
      double new_rho = rho;
      if (r_pri > 10.0 * r_dual) new_rho = rho * 2.0;
      else if (r_dual > 10.0 * r_pri) new_rho = rho / 2.0;
      new_rho = std::min(1e6, std::max(1e-3, new_rho));
      if (new_rho != rho) {
        uz *= rho / new_rho;
        us *= rho / new_rho;
        ur *= rho / new_rho;
        rho = new_rho;
        wstep.factorize(rho, rho);
      }
    }
  }
  rep.iterations = it;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  res.weights = z;
  project_feasible(prog, res.weights);
  res.residual = (predict(prog, res.weights) - y).norm();
  res.feasible = res.residual <= feas_tol * yscale;
  double gn = 0.0;
  for (Eigen::Index b = 0; b < res.weights.num_blocks(); ++b) gn += res.weights.block(b).norm();
  res.group_norm = gn;
  res.report = rep;
  res.report.final_objective = gn;
  res.report.final_violation = constraint_violation(prog, res.weights).max;
  if (!res.feasible) res.report.status = SolveStatus::infeasible;
  return res;
}

}  // namespace cvxnn
