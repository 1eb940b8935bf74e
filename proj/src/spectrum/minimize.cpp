#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SparseCholesky>

#include "reilly/error.hpp"
#include "reilly/parallel.hpp"
#include "reilly/spectrum.hpp"

namespace reilly {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr double kMaxStep = 1e6;

struct RestartOutcome {
  double value = std::numeric_limits<double>::infinity();
  ScalarField field;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> history;
};

// Centered and scaled to unit lumped p-norm.
ScalarField admissible(const ScalarField& u, const MetricData& md, double p) {
  ScalarField c = p_mean_center(u, md, p).centered;
  double norm = 0.0;
  for (Eigen::Index v = 0; v < c.size(); ++v) norm += md.vertex_weight[v] * std::pow(std::abs(c[v]), p);
  return c / std::pow(norm, 1.0 / p);
}

using Solver = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

// (K_u + sigma M)^{-1} where K_u is the Hessian of sum_s vol_s |grad u|^p / p
// with u frozen: per simplex |g|^{p-2} (G^{-1} + (p-2) G^{-1} du du^T G^{-1} / |g|^2),
// |g| floored at a fraction of the RMS gradient. For p = 2 this is the plain
// stiffness matrix and is factorised once.
class Preconditioner {
 public:
  Preconditioner(const SimplicialImmersion& imm, const MetricData& md, double p)
      : imm_(imm), md_(md), p_(p) {
    const Eigen::SparseMatrix<double> K = stiffness_matrix(imm, md);
    sigma_ = 1e-3 * K.diagonal().sum() / md.total_volume;
    solver_.analyzePattern(shifted(K, sigma_));
    if (p == 2.0) factorize(K, sigma_);
  }

  ScalarField apply(const ScalarField& u, const ScalarField& gradient) {
    if (p_ != 2.0) {
      const Eigen::SparseMatrix<double> H = frozen_hessian(u);
      factorize(H, 1e-3 * H.diagonal().sum() / md_.total_volume);
    }
    return solver_.solve(gradient);
  }

 private:
  Eigen::SparseMatrix<double> shifted(Eigen::SparseMatrix<double> K, double sigma) const {
    for (Eigen::Index v = 0; v < K.rows(); ++v) K.coeffRef(v, v) += sigma * md_.vertex_weight[v];
    return K;
  }

  void factorize(const Eigen::SparseMatrix<double>& K, double sigma) {
    solver_.factorize(shifted(K, sigma));
    if (solver_.info() != Eigen::Success) throw Error("preconditioner factorisation failed");
  }

  Eigen::SparseMatrix<double> frozen_hessian(const ScalarField& u) const {
    const int n = imm_.n;
    const Eigen::Index ns = imm_.simplex_count();
    std::vector<SmallVector> covector(static_cast<std::size_t>(ns));
    Eigen::VectorXd grad_sq(ns);
    SmallVector du(n);
    double mean_sq = 0.0;
    for (Eigen::Index s = 0; s < ns; ++s) {
      for (int i = 0; i < n; ++i) du[i] = u[imm_.simplices(s, i + 1)] - u[imm_.simplices(s, 0)];
      covector[static_cast<std::size_t>(s)] = md_.gram_inverse[static_cast<std::size_t>(s)] * du;
      grad_sq[s] = std::max(du.dot(covector[static_cast<std::size_t>(s)]), 0.0);
      mean_sq += md_.simplex_volume[s] * grad_sq[s];
    }
    const double floor = std::max(1e-3 * std::sqrt(mean_sq / md_.total_volume), 1e-12);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(ns * (n + 1) * (n + 1)));
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n + 1);
    D.col(0).setConstant(-1.0);
    D.rightCols(n) = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index s = 0; s < ns; ++s) {
      const auto k = static_cast<std::size_t>(s);
      const double g = std::sqrt(grad_sq[s]);
      SmallMatrix local = md_.gram_inverse[k];
      if (g > floor) local += (p_ - 2.0) / grad_sq[s] * covector[k] * covector[k].transpose();
      local *= std::pow(std::max(g, floor), p_ - 2.0) * md_.simplex_volume[s];
      const Eigen::MatrixXd full = D.transpose() * local * D;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) triplets.emplace_back(imm_.simplices(s, i), imm_.simplices(s, j), full(i, j));
    }
    Eigen::SparseMatrix<double> H(imm_.vertex_count(), imm_.vertex_count());
    H.setFromTriplets(triplets.begin(), triplets.end());
    return H;
  }

  const SimplicialImmersion& imm_;
  const MetricData& md_;
  double p_;
  double sigma_ = 0.0;
  Solver solver_;
};

RestartOutcome descend(const ScalarField& seed, const SimplicialImmersion& imm, const MetricData& md,
                       double p, const MinimizeOptions& opts) {
  RestartOutcome out;
  Preconditioner precond(imm, md, p);
  ScalarField u = admissible(seed, md, p);
  RayleighEvaluation ev = rayleigh_with_gradient(u, imm, md, p);
  out.history.push_back(ev.value);
  double alpha = 1.0;
  ScalarField previous_direction, previous_preconditioned;
  double previous_gpg = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    out.iterations = it;
    const ScalarField preconditioned = precond.apply(u, ev.gradient);
    const double gpg = ev.gradient.dot(preconditioned);
    out.gradient_norm = std::sqrt(std::max(gpg, 0.0));
    if (!(gpg > 0.0) || out.gradient_norm < opts.tol * std::sqrt(ev.value)) {
      out.converged = true;
      break;
    }
    ScalarField direction = -preconditioned;
    if (previous_gpg > 0.0) {
      const double beta = std::max(0.0, (gpg - ev.gradient.dot(previous_preconditioned)) / previous_gpg);
      direction += beta * previous_direction;
    }
    double slope = ev.gradient.dot(direction);
    if (!(slope < 0.0)) {
      direction = -preconditioned;
      slope = -gpg;
    }
    const double alpha_start = alpha;
    // Power-of-two step search: backtrack until the Armijo condition holds,
    // then keep moving (up or down) while the value still improves. A plain
    // Armijo step overshoots the stiff modes and stalls.
    auto try_step = [&](double a, ScalarField& field, double& value) {
      try {
        field = admissible(u + a * direction, md, p);
      } catch (const Error&) {
        return false;  // step collapsed the field to a constant
      }
      value = rayleigh_quotient(field, imm, md, p);
      return std::isfinite(value);
    };
    bool accepted = false;
    ScalarField trial, probe;
    double trial_value = 0.0, probe_value = 0.0;
    for (int k = 0; k < kMaxHalvings; ++k, alpha *= 0.5) {
      if (try_step(alpha, trial, trial_value) && trial_value <= ev.value + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (accepted) {
      const bool first_try = alpha == alpha_start;
      for (const double factor : {2.0, 0.5}) {
        if (factor > 1.0 && !first_try) continue;
        bool moved = false;
        for (int k = 0; k < kMaxHalvings; ++k) {
          const double a = alpha * factor;
          if (a > kMaxStep || !try_step(a, probe, probe_value) || !(probe_value < trial_value)) break;
          alpha = a;
          trial.swap(probe);
          trial_value = probe_value;
          moved = true;
        }
        if (moved) break;
      }
    }
    if (!accepted) {
      // No representable decrease left: stationary up to rounding.
      out.converged = -slope <= 1e-10 * ev.value;
      break;
    }
    const double relative_decrease = (ev.value - trial_value) / ev.value;
    previous_direction = direction;
    previous_preconditioned = preconditioned;
    previous_gpg = gpg;
    alpha = 1.0;
    u = std::move(trial);
    ev = rayleigh_with_gradient(u, imm, md, p);
    out.history.push_back(ev.value);
    if (relative_decrease < opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.value = rayleigh_quotient(u, imm, md, p);
  out.field = std::move(u);
  return out;
}

}  // namespace

SpectralResult minimize_rayleigh(const SimplicialImmersion& imm, const MetricData& md, double p,
                                 const MinimizeOptions& opts) {
  if (!(p > 1.0)) throw Error("minimize_rayleigh needs p > 1");
  if (opts.restarts < 1) throw Error("minimize_rayleigh needs at least one restart");
  const Eigen::Index nv = imm.vertex_count();

  std::vector<ScalarField> seeds;
  for (Eigen::Index k = 0; k < imm.vertices.cols() && static_cast<int>(seeds.size()) < opts.restarts; ++k) {
    const ScalarField coord = imm.vertices.col(k);
    if (coord.maxCoeff() - coord.minCoeff() > 1e-9 * std::max(1.0, coord.cwiseAbs().maxCoeff()))
      seeds.push_back(coord);
  }
  for (int r = static_cast<int>(seeds.size()); r < opts.restarts; ++r) {
    std::mt19937_64 rng(opts.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r + 1));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    ScalarField f(nv);
    for (Eigen::Index v = 0; v < nv; ++v) f[v] = unit(rng);
    seeds.push_back(std::move(f));
  }

  std::vector<RestartOutcome> outcomes(seeds.size());
  parallel_for(seeds.size(), thread_budget(opts.threads),
               [&](std::size_t i) { outcomes[i] = descend(seeds[i], imm, md, p, opts); });

  SpectralResult result;
  result.p = p;
  result.method = "minimize_rayleigh";
  result.restarts_used = static_cast<int>(outcomes.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    result.restart_values.push_back(outcomes[i].value);
    result.restart_converged.push_back(outcomes[i].converged);
    if (outcomes[i].value < outcomes[best].value * (1.0 - 1e-12)) best = i;
  }
  RestartOutcome& win = outcomes[best];
  result.best_restart = static_cast<int>(best);
  result.lambda = win.value;
  result.eigenfunction = std::move(win.field);
  result.converged = win.converged;
  result.iterations = win.iterations;
  result.final_gradient_norm = win.gradient_norm;
  result.value_history = std::move(win.history);
  return result;
}

}  // namespace reilly
