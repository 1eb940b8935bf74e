#include <algorithm>
#include <cmath>

#include "reilly/error.hpp"
#include "reilly/spectrum.hpp"

namespace reilly {

namespace {

constexpr double kGradientFloor = 1e-12;
constexpr double kCenteringTol = 1e-12;

double centering_residual(const ScalarField& u, const Eigen::VectorXd& w, double p, double s,
                          double* scale) {
  double g = 0.0, norm = 0.0;
  for (Eigen::Index v = 0; v < u.size(); ++v) {
    const double t = u[v] - s;
    const double a = std::pow(std::abs(t), p - 1.0);
    g += w[v] * (t < 0.0 ? -a : a);
    norm += w[v] * a;
  }
  if (scale) *scale = norm;
  return g;
}

void require_field(const ScalarField& u, const MetricData& md) {
  if (u.size() != md.vertex_weight.size()) throw Error("field length does not match the mesh");
  if (!u.allFinite()) throw Error("field has non-finite values");
}

}  // namespace

double odd_power(double t, double p) {
  const double a = std::pow(std::abs(t), p - 1.0);
  return t < 0.0 ? -a : a;
}

double centering_violation(const ScalarField& u, const MetricData& md, double p) {
  double scale = 0.0;
  const double g = centering_residual(u, md.vertex_weight, p, 0.0, &scale);
  return scale > 0.0 ? std::abs(g) / scale : std::abs(g);
}

CenteredField p_mean_center(const ScalarField& u, const MetricData& md, double p) {
  if (!(p > 1.0)) throw Error("p-mean centering needs p > 1");
  require_field(u, md);
  const double lo0 = u.minCoeff(), hi0 = u.maxCoeff();
  if (!(hi0 > lo0)) throw Error("cannot center a constant field");
  const Eigen::VectorXd& w = md.vertex_weight;

  if (p == 2.0) {
    const double s = w.dot(u) / w.sum();
    return {(u.array() - s).matrix(), s};
  }

  double scale = 0.0;
  if (std::abs(centering_residual(u, w, p, 0.0, &scale)) <= kCenteringTol * scale) return {u, 0.0};

  double lo = lo0, hi = hi0, best = lo0, best_rel = HUGE_VAL;
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double g = centering_residual(u, w, p, mid, &scale);
    const double rel = std::abs(g) / scale;
    if (rel < best_rel) {
      best_rel = rel;
      best = mid;
    }
    if (rel <= kCenteringTol) break;
    if (g > 0.0) lo = mid; else hi = mid;
  }
  for (double s : {lo, hi}) {
    const double rel = std::abs(centering_residual(u, w, p, s, &scale)) / scale;
    if (rel < best_rel) {
      best_rel = rel;
      best = s;
    }
  }
  return {(u.array() - best).matrix(), best};
}

double rayleigh_quotient(const ScalarField& u, const SimplicialImmersion& imm, const MetricData& md,
                         double p) {
  require_field(u, md);
  const int n = imm.n;
  double num = 0.0;
  SmallVector delta(n);
  for (Eigen::Index s = 0; s < imm.simplex_count(); ++s) {
    const double u0 = u[imm.simplices(s, 0)];
    for (int i = 0; i < n; ++i) delta[i] = u[imm.simplices(s, i + 1)] - u0;
    const double g2 = delta.dot(md.gram_inverse[static_cast<std::size_t>(s)] * delta);
    num += md.simplex_volume[s] * std::pow(std::max(g2, 0.0), p / 2.0);
  }
  double den = 0.0;
  for (Eigen::Index v = 0; v < u.size(); ++v) den += md.vertex_weight[v] * std::pow(std::abs(u[v]), p);
  if (!(den > 0.0)) throw Error("Rayleigh quotient of the zero field");
  return num / den;
}

RayleighEvaluation rayleigh_with_gradient(const ScalarField& u, const SimplicialImmersion& imm,
                                          const MetricData& md, double p) {
  require_field(u, md);
  const int n = imm.n;
  RayleighEvaluation ev;
  Eigen::VectorXd grad_num = Eigen::VectorXd::Zero(u.size());
  SmallVector delta(n), y(n);
  for (Eigen::Index s = 0; s < imm.simplex_count(); ++s) {
    const double u0 = u[imm.simplices(s, 0)];
    for (int i = 0; i < n; ++i) delta[i] = u[imm.simplices(s, i + 1)] - u0;
    y = md.gram_inverse[static_cast<std::size_t>(s)] * delta;
    const double g2 = std::max(delta.dot(y), 0.0);
    const double g = std::sqrt(g2);
    const double vol = md.simplex_volume[s];
    ev.numerator += vol * std::pow(g, p);
    const double coeff = vol * p * std::pow(std::max(g, kGradientFloor), p - 2.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      grad_num[imm.simplices(s, i + 1)] += coeff * y[i];
      total += y[i];
    }
    grad_num[imm.simplices(s, 0)] -= coeff * total;
  }
  Eigen::VectorXd grad_den(u.size());
  for (Eigen::Index v = 0; v < u.size(); ++v) {
    const double w = md.vertex_weight[v];
    ev.denominator += w * std::pow(std::abs(u[v]), p);
    grad_den[v] = w * p * odd_power(u[v], p);
  }
  if (!(ev.denominator > 0.0)) throw Error("Rayleigh quotient of the zero field");
  ev.value = ev.numerator / ev.denominator;
  ev.gradient = (grad_num - ev.value * grad_den) / ev.denominator;
  return ev;
}

double certify_upper_bound(const ScalarField& u, const SimplicialImmersion& imm, const MetricData& md,
                           double p) {
  if (!(p > 1.0)) throw Error("certificate needs p > 1");
  const double violation = centering_violation(u, md, p);
  if (!(violation <= 1e-8))
    throw Error("test field violates the p-mean constraint (relative residual " +
                std::to_string(violation) + ")");
  return rayleigh_quotient(u, imm, md, p);
}

}  // namespace reilly
