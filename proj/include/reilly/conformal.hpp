#pragma once

#include <string>

#include <Eigen/Core>

#include "reilly/curvature.hpp"
#include "reilly/immersion.hpp"
#include "reilly/metric.hpp"
#include "reilly/spectrum.hpp"

namespace reilly {

/// Element of the one-parameter Moebius flows of S^N, stored as a point of
/// the open unit ball: b = (1 - e^{-t}) a, so b = 0 is the identity.
class MoebiusParam {
 public:
  MoebiusParam() = default;
  explicit MoebiusParam(Eigen::VectorXd ball_point);
  static MoebiusParam identity(int dim);
  static MoebiusParam from_pole_time(const Eigen::VectorXd& pole, double time);

  const Eigen::VectorXd& ball_point() const { return b_; }
  int dim() const { return static_cast<int>(b_.size()); }
  bool is_identity() const { return b_.squaredNorm() == 0.0; }
  /// Unit pole a; the zero vector for the identity.
  Eigen::VectorXd pole() const;
  double time() const;
  double stretch() const { return 1.0 / (1.0 - b_.norm()); }  ///< e^t

 private:
  Eigen::VectorXd b_;
};

/// Points on S^N (rows) with a per-point log conformal factor.
struct SpherePoints {
  Eigen::MatrixXd points;
  Eigen::VectorXd log_factor;
};

/// Standard conformal map of the space form into S^N in R^{N+1}:
/// identity (c = 1), inverse stereographic projection (c = 0), and
/// hyperboloid -> Poincare ball -> inverse stereographic projection (c = -1).
/// `log_factor` is rho_0 with Pi^* h_1 = e^{2 rho_0} h_c.
SpherePoints to_sphere(const SimplicialImmersion& imm);

/// Applies the flow map pi_a^{-1}(e^t pi_a(x)) to each row.
/// Throws reilly::Error if a point coincides with the pole while t > 0.
SpherePoints moebius_apply(const MoebiusParam& m, const Eigen::MatrixXd& points);

/// Closed-form conformal factor of the flow map at a single point.
double moebius_log_factor(const MoebiusParam& m, const Eigen::Ref<const Eigen::VectorXd>& x);

struct BalanceOptions {
  double tol = 1e-8;  ///< relative to vol(M)
  int max_newton = 100;
  int damping = 30;   ///< step halvings per Newton iteration
  double fd_step = 1e-6;
};

struct BalancedMap {
  double p = 2.0;
  Eigen::MatrixXd phi;      ///< rows on S^N
  Eigen::VectorXd rho;      ///< Gamma^* h_1 = e^{2 rho} h_c
  Eigen::VectorXd residual; ///< sum_v w_v odd_power(phi_v^A, p)
  MoebiusParam moebius;
  std::string base_map;
  bool converged = false;
  int iterations = 0;
  int fallback_steps = 0;
};

/// p-barycenter residual of the given sphere points.
Eigen::VectorXd balance_residual(const Eigen::MatrixXd& phi, const MetricData& md, double p);

/// Damped Newton on the ball point b so that the p-barycenter residual falls
/// below tol * vol(M); falls back to steps against the residual when Newton
/// stalls. Throws reilly::Error on mass concentration (|b| > 1 - 1e-6).
BalancedMap balance(const SimplicialImmersion& imm, const MetricData& md, double p,
                    const BalanceOptions& opts = {});

/// Builds a BalancedMap for a prescribed Moebius parameter (no solve).
BalancedMap compose_map(const SimplicialImmersion& imm, const MetricData& md, double p,
                        const MoebiusParam& m);

struct ConformalFactorField {
  ScalarField e2rho;              ///< closed form exp(2 rho)
  ScalarField gradient_check;     ///< (1/n) sum_A |grad Phi^A|^2, averaged to vertices
  double max_relative_deviation = 0.0;
  double mean_relative_deviation = 0.0;  ///< volume weighted
};

ConformalFactorField conformal_factor_field(const BalancedMap& bm, const SimplicialImmersion& imm,
                                            const MetricData& md);

struct IntegratedConformalCheck {
  double lhs = 0.0;  ///< integral of e^{2 rho}
  double rhs = 0.0;  ///< integral of c + H^2
  bool holds(double relative_margin) const { return lhs <= rhs + relative_margin * std::abs(rhs); }
};

/// Requires analytic curvature.
IntegratedConformalCheck integrated_conformal_check(const BalancedMap& bm,
                                                    const SimplicialImmersion& imm,
                                                    const MetricData& md,
                                                    const CurvatureData& cd);

struct YoungChainCheck {
  double lhs = 0.0;  ///< integral of e^{p rho}
  double rhs = 0.0;  ///< integral of |c + H^2|^{p/2}
  double margin() const { return rhs - lhs; }
  bool holds(double relative_margin) const { return lhs <= rhs + relative_margin * std::abs(rhs); }
};

/// Requires 2 < p <= n/2 + 1.
YoungChainCheck young_chain_check(const BalancedMap& bm, const MetricData& md,
                                  const CurvatureData& cd, double p);

/// Maximum distance of the points from their best-fit affine (k+1)-plane,
/// i.e. how far the points are from lying on one round k-sphere of S^N.
double round_sphere_fit_residual(const Eigen::MatrixXd& points, int k);

}  // namespace reilly
