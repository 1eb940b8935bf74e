#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "reilly/conformal.hpp"
#include "reilly/error.hpp"

namespace reilly {

namespace {

// Sphere coordinates are unit scale; anything below this is rounding noise
// and would be blown up by |t|^{p-1} for p < 2.
constexpr double kCoordinateNoise = 64.0 * std::numeric_limits<double>::epsilon();
constexpr double kMassConcentration = 1.0 - 1e-6;

double balanced_power(double t, double p) {
  return std::abs(t) <= kCoordinateNoise ? 0.0 : odd_power(t, p);
}

// True when reflecting coordinate A maps the weighted point set onto itself.
bool mirror_symmetric(const Eigen::MatrixXd& points, const Eigen::VectorXd& weight, Eigen::Index A) {
  const Eigen::Index nv = points.rows();
  // Sorted on a 1e-9 lattice so that mirror images equal up to rounding
  // (grid angles through cos and sin) still line up.
  auto sorted = [&](const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd key = (P * 1e9).array().round();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(nv));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      for (Eigen::Index k = 0; k < key.cols(); ++k)
        if (key(i, k) != key(j, k)) return key(i, k) < key(j, k);
      return false;
    });
    return order;
  };
  Eigen::MatrixXd reflected = points;
  reflected.col(A) *= -1.0;
  const auto lhs = sorted(points), rhs = sorted(reflected);
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    if ((points.row(lhs[k]) - reflected.row(rhs[k])).cwiseAbs().maxCoeff() > 1e-12) return false;
    if (std::abs(weight[lhs[k]] - weight[rhs[k]]) > 1e-10 * std::abs(weight[lhs[k]])) return false;
  }
  return true;
}

// Generic orthonormal frame of the coordinates not fixed by a mirror, used
// for the finite differences. Differencing along the coordinate axes would
// put the flow pole exactly on mesh vertices that sit on an axis (icosphere
// poles, grid points), where the flow map is undefined.
Eigen::MatrixXd difference_frame(const std::vector<bool>& fixed) {
  const int dim = static_cast<int>(fixed.size());
  const int free = static_cast<int>(std::count(fixed.begin(), fixed.end(), false));
  std::mt19937_64 rng(0xB41A5CEDull);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, free);
  for (int j = 0; j < free; ++j)
    for (int i = 0; i < dim; ++i) {
      const double g = normal(rng);
      if (!fixed[static_cast<std::size_t>(i)]) A(i, j) = g;
    }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, free);
  for (int i = 0; i < dim; ++i)
    if (fixed[static_cast<std::size_t>(i)]) Q.row(i).setZero();
  return Q;
}

}  // namespace

Eigen::VectorXd balance_residual(const Eigen::MatrixXd& phi, const MetricData& md, double p) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(phi.cols());
  for (Eigen::Index v = 0; v < phi.rows(); ++v)
    for (Eigen::Index A = 0; A < phi.cols(); ++A) F[A] += md.vertex_weight[v] * balanced_power(phi(v, A), p);
  return F;
}

BalancedMap compose_map(const SimplicialImmersion& imm, const MetricData& md, double p,
                        const MoebiusParam& m) {
  if (!(p > 1.0)) throw Error("balancing needs p > 1");
  const SpherePoints base = to_sphere(imm);
  const SpherePoints image = moebius_apply(m, base.points);
  BalancedMap bm;
  bm.p = p;
  bm.phi = image.points;
  bm.rho = base.log_factor + image.log_factor;
  bm.residual = balance_residual(bm.phi, md, p);
  bm.moebius = m;
  bm.base_map = imm.space_form.c == 1 ? "identity" : imm.space_form.c == 0 ? "inverse_stereographic"
                                                                          : "hyperboloid_ball_stereographic";
  return bm;
}

BalancedMap balance(const SimplicialImmersion& imm, const MetricData& md, double p,
                    const BalanceOptions& opts) {
  if (!(p > 1.0)) throw Error("balancing needs p > 1");
  const SpherePoints base = to_sphere(imm);
  const int dim = static_cast<int>(base.points.cols());
  const double target = opts.tol * md.total_volume;

  auto residual_at = [&](const Eigen::VectorXd& b) {
    return balance_residual(moebius_apply(MoebiusParam(b), base.points).points, md, p);
  };
  // Residual of a trial point; a trial that lands a vertex on the pole is
  // treated as a failed step.
  auto trial_residual = [&](const Eigen::VectorXd& b, Eigen::VectorXd& out) {
    try {
      out = residual_at(b);
      return out.allFinite();
    } catch (const Error&) {
      return false;
    }
  };
  // A coordinate mirror of the weighted base image is inherited by the root:
  // the search stays on b_A = 0, where residual component A cancels in
  // mirror pairs. Off that plane rounding noise in b_A is blown up by the
  // |Phi|^{p-1} terms of the on-plane vertices for p < 2.
  std::vector<bool> fixed(static_cast<std::size_t>(dim));
  for (int A = 0; A < dim; ++A) fixed[static_cast<std::size_t>(A)] = mirror_symmetric(base.points, md.vertex_weight, A);
  const Eigen::MatrixXd frame = difference_frame(fixed);
  auto inside = [](const Eigen::VectorXd& b) { return b.norm() < 1.0; };
  auto project = [&](Eigen::VectorXd v) {
    for (int A = 0; A < dim; ++A)
      if (fixed[static_cast<std::size_t>(A)]) v[A] = 0.0;
    return v;
  };

  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd F = residual_at(b);
  double fnorm = F.norm();
  int iterations = 0, fallback = 0, polish = 0;
  bool converged = fnorm <= target;
  const bool balanced_at_start = converged;

  // After reaching the tolerance a couple of extra Newton steps are taken
  // (kept only if they reduce the residual further).
  while (!balanced_at_start && frame.cols() > 0 && iterations < opts.max_newton && (!converged || polish < 2)) {
    ++iterations;
    Eigen::MatrixXd J(dim, frame.cols());
    for (Eigen::Index k = 0; k < frame.cols(); ++k) {
      const Eigen::VectorXd bp = b + opts.fd_step * frame.col(k);
      const Eigen::VectorXd bm = b - opts.fd_step * frame.col(k);
      if (!inside(bp) || !inside(bm)) throw Error("balancing iterate too close to the ball boundary");
      J.col(k) = (residual_at(bp) - residual_at(bm)) / (2.0 * opts.fd_step);
    }
    const Eigen::VectorXd step = project(frame * J.colPivHouseholderQr().solve(-F));

    // Halve until the residual drops, then keep halving while it improves:
    // near a |t|^{p-1} cusp (p < 2) the full step overshoots the root by a
    // factor 1/(p-1) and the first decreasing step can flip-flop around it.
    bool accepted = false;
    Eigen::VectorXd trial_b, trial_F, probe_b, probe_F;
    double alpha = 1.0;
    for (int k = 0; k <= opts.damping && step.allFinite(); ++k, alpha *= 0.5) {
      probe_b = b + alpha * step;
      const bool ok = inside(probe_b) && trial_residual(probe_b, probe_F);
      if (ok && probe_F.norm() < (accepted ? trial_F.norm() : fnorm)) {
        trial_b = probe_b;
        trial_F = probe_F;
        accepted = true;
      } else if (accepted) {
        break;
      }
    }
    if (!accepted && !converged) {
      // Newton stalled: move the ball point against the residual.
      const Eigen::VectorXd direction = project(-F / fnorm);
      double eta = 0.1 * (1.0 - b.norm());
      for (int k = 0; k <= opts.damping; ++k, eta *= 0.5) {
        trial_b = b + eta * direction;
        if (!inside(trial_b) || !trial_residual(trial_b, trial_F)) continue;
        if (trial_F.norm() < fnorm) {
          accepted = true;
          ++fallback;
          break;
        }
      }
    }
    if (!accepted) break;
    b = trial_b;
    F = trial_F;
    fnorm = F.norm();
    if (b.norm() > kMassConcentration)
      throw Error("balancing concentrated the mass (|b| = " + std::to_string(b.norm()) + ")");
    if (converged) ++polish;
    converged = converged || fnorm <= target;
  }

  BalancedMap bm = compose_map(imm, md, p, MoebiusParam(b));
  bm.converged = bm.residual.norm() <= target;
  bm.iterations = iterations;
  bm.fallback_steps = fallback;
  return bm;
}

ConformalFactorField conformal_factor_field(const BalancedMap& bm, const SimplicialImmersion& imm,
                                            const MetricData& md) {
  const int n = imm.n;
  const Eigen::Index nv = imm.vertex_count();
  ConformalFactorField out;
  out.e2rho = (2.0 * bm.rho.array()).exp().matrix();
  Eigen::VectorXd accum = Eigen::VectorXd::Zero(nv), mass = Eigen::VectorXd::Zero(nv);
  Eigen::MatrixXd P(bm.phi.cols(), n);
  for (Eigen::Index s = 0; s < imm.simplex_count(); ++s) {
    for (int i = 0; i < n; ++i)
      P.col(i) = (bm.phi.row(imm.simplices(s, i + 1)) - bm.phi.row(imm.simplices(s, 0))).transpose();
    const SmallMatrix G_image = P.transpose() * P;
    const double value = (md.gram_inverse[static_cast<std::size_t>(s)] * G_image).trace() / n;
    const double vol = md.simplex_volume[s];
    for (int i = 0; i <= n; ++i) {
      accum[imm.simplices(s, i)] += vol * value;
      mass[imm.simplices(s, i)] += vol;
    }
  }
  out.gradient_check = accum.cwiseQuotient(mass);
  double weighted = 0.0;
  for (Eigen::Index v = 0; v < nv; ++v) {
    const double dev = std::abs(out.gradient_check[v] - out.e2rho[v]) / out.e2rho[v];
    out.max_relative_deviation = std::max(out.max_relative_deviation, dev);
    weighted += md.vertex_weight[v] * dev;
  }
  out.mean_relative_deviation = weighted / md.total_volume;
  return out;
}

IntegratedConformalCheck integrated_conformal_check(const BalancedMap& bm, const SimplicialImmersion& imm,
                                                    const MetricData& md, const CurvatureData& cd) {
  if (cd.source != CurvatureSource::analytic) throw Error("integrated conformal check needs analytic curvature");
  if (cd.shifted.size() != imm.vertex_count()) throw Error("curvature does not match the mesh");
  IntegratedConformalCheck out;
  out.lhs = md.vertex_weight.dot((2.0 * bm.rho.array()).exp().matrix());
  out.rhs = md.vertex_weight.dot(cd.shifted);
  return out;
}

YoungChainCheck young_chain_check(const BalancedMap& bm, const MetricData& md, const CurvatureData& cd,
                                  double p) {
  const double upper = md.n / 2.0 + 1.0;
  if (!(p > 2.0) || p > upper + 1e-12)
    throw Error("Young chain needs 2 < p <= n/2 + 1 (n >= 2p - 2)");
  YoungChainCheck out;
  out.lhs = md.vertex_weight.dot((p * bm.rho.array()).exp().matrix());
  out.rhs = md.vertex_weight.dot(cd.shifted.array().abs().pow(p / 2.0).matrix());
  return out;
}

double round_sphere_fit_residual(const Eigen::MatrixXd& points, int k) {
  const Eigen::Index dim = points.cols();
  if (dim <= k + 1) return 0.0;
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::MatrixXd normal_dirs = svd.matrixV().rightCols(dim - (k + 1));
  return (centered * normal_dirs).rowwise().norm().maxCoeff();
}

}  // namespace reilly
