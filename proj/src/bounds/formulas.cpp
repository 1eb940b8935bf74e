#include <cmath>

#include "reilly/bounds.hpp"
#include "reilly/error.hpp"

namespace reilly {

namespace {

void require_aligned(const CurvatureData& cd, const MetricData& md) {
  if (cd.shifted.size() != md.vertex_weight.size() || cd.H.size() != md.vertex_weight.size())
    throw Error("curvature data does not match the mesh");
}

// Lumped average sum w f / sum w. Both sums use the same dot product, so a
// constant integrand averages to itself exactly.
double lumped_mean(const MetricData& md, const Eigen::VectorXd& f) {
  return md.vertex_weight.dot(f) / md.vertex_weight.dot(Eigen::VectorXd::Ones(f.size()));
}

}  // namespace

double reilly_bound(const CurvatureData& cd, const MetricData& md, int n) {
  require_aligned(cd, md);
  return n * lumped_mean(md, cd.shifted);
}

double dumao_bound(const CurvatureData& cd, const MetricData& md, int n, int N, double p, int c) {
  require_aligned(cd, md);
  if (!(p > 1.0)) throw Error("Du-Mao bound needs p > 1");
  // vol^{1-p} (integral)^{p-1} = (mean)^{p-1}
  const double scale = std::pow(n, p / 2.0);
  if (c == 0) {
    const double mean = lumped_mean(md, cd.H.array().abs().pow(p / (p - 1.0)).matrix());
    return std::pow(N, std::abs(2.0 - p) / 2.0) * scale * std::pow(mean, p - 1.0);
  }
  if (c == 1) {
    const double mean = lumped_mean(md, (1.0 + cd.H.array().square()).pow(p / (2.0 * (p - 1.0))).matrix());
    return std::pow(N + 1, std::abs(2.0 - p) / 2.0) * scale * std::pow(mean, p - 1.0);
  }
  throw Error("Du-Mao bound is only defined for c = 0 and c = 1");
}

double main_bound_low_p(const CurvatureData& cd, const MetricData& md, int n, int N, double p) {
  require_aligned(cd, md);
  const double mean = lumped_mean(md, cd.shifted);
  if (!(mean > 0.0))
    throw Error("integral of c + H^2 is not positive; curvature and mesh are inconsistent");
  return std::pow(N + 1, 1.0 - p / 2.0) * std::pow(n, p / 2.0) * std::pow(mean, p / 2.0);
}

double main_bound_high_p(const CurvatureData& cd, const MetricData& md, int n, int N, double p) {
  require_aligned(cd, md);
  const double mean = lumped_mean(md, cd.shifted.array().abs().pow(p / 2.0).matrix());
  return std::pow(N + 1, p / 2.0 - 1.0) * std::pow(n, p / 2.0) * mean;
}

bool main_bound_admissible(double p, int n) { return p > 1.0 && p <= n / 2.0 + 1.0; }

double main_bound(const CurvatureData& cd, const MetricData& md, int n, int N, double p, int c) {
  (void)c;  // enters through cd.shifted
  if (p > 1.0 && p <= 2.0) return main_bound_low_p(cd, md, n, N, p);
  if (p > 2.0 && p <= n / 2.0 + 1.0) return main_bound_high_p(cd, md, n, N, p);
  throw Error("p = " + std::to_string(p) + " is outside 1 < p <= n/2 + 1 for n = " + std::to_string(n));
}

double conformal_bound(const BalancedMap& bm, const MetricData& md, int n, int N, double p) {
  if (bm.rho.size() != md.vertex_weight.size()) throw Error("balanced map does not match the mesh");
  const double mean = lumped_mean(md, (p * bm.rho.array()).exp().matrix());
  return std::pow(N + 1, std::abs(1.0 - p / 2.0)) * std::pow(n, p / 2.0) * mean;
}

}  // namespace reilly
