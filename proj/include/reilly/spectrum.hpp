#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reilly/immersion.hpp"
#include "reilly/metric.hpp"

namespace reilly {

/// Per-vertex values aligned with a SimplicialImmersion.
using ScalarField = Eigen::VectorXd;

struct CenteredField {
  ScalarField centered;
  double shift = 0.0;
};

/// Signed power sign(t)|t|^{p-1}, continuous at 0 for every p > 1.
double odd_power(double t, double p);

/// Returns u - s with sum_v w_v odd_power(u_v - s, p) = 0. The left side is
/// strictly decreasing in s, so s is unique; it is located by bisection on
/// [min u, max u] (closed form weighted mean for p = 2).
CenteredField p_mean_center(const ScalarField& u, const MetricData& md, double p);

/// Relative violation |sum w odd_power(u)| / sum w |u|^{p-1} of the centering
/// constraint.
double centering_violation(const ScalarField& u, const MetricData& md, double p);

/// sum_s vol_s |grad u|^p / sum_v w_v |u_v|^p with piecewise-linear gradients.
double rayleigh_quotient(const ScalarField& u, const SimplicialImmersion& imm,
                         const MetricData& md, double p);

/// Rayleigh quotient and its gradient with respect to the vertex values.
struct RayleighEvaluation {
  double value = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  ScalarField gradient;
};
RayleighEvaluation rayleigh_with_gradient(const ScalarField& u, const SimplicialImmersion& imm,
                                          const MetricData& md, double p);

struct MinimizeOptions {
  int restarts = 8;
  int max_iter = 2000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = REILLY_LAB_THREADS or hardware concurrency
};

struct SpectralResult {
  double p = 2.0;
  double lambda = 0.0;
  ScalarField eigenfunction;
  std::string method;
  bool converged = false;
  int iterations = 0;          ///< of the winning restart
  int restarts_used = 0;
  int best_restart = 0;
  double final_gradient_norm = 0.0;
  std::vector<double> restart_values;
  std::vector<bool> restart_converged;
  std::vector<double> value_history;   ///< accepted Rayleigh values of the winning restart
  std::vector<double> leading_values;  ///< linear solver: lowest nonzero Ritz values
  int cluster_multiplicity = 1;        ///< linear solver: size of the lowest cluster
};

/// Projected descent on the p-Rayleigh quotient. Each iterate is p-mean
/// centered and normalised to unit p-norm; directions are preconditioned
/// nonlinear conjugate gradients (Polak-Ribiere+) through the frozen Hessian of
/// the numerator, with a backtracking Armijo step. Non-convergence is reported
/// through `converged`, never thrown.
SpectralResult minimize_rayleigh(const SimplicialImmersion& imm, const MetricData& md, double p,
                                 const MinimizeOptions& opts = {});

/// Smallest nonzero eigenvalue of K u = lambda M u (lumped M) by shifted
/// block inverse iteration with Rayleigh-Ritz, constants deflated.
SpectralResult linear_eigensolve(const SimplicialImmersion& imm, const MetricData& md);

/// R_p(u) as a certificate lambda_{1,p} <= R_p(u). Requires u centered to
/// 1e-8 relative; throws reilly::Error otherwise.
double certify_upper_bound(const ScalarField& u, const SimplicialImmersion& imm,
                           const MetricData& md, double p);

}  // namespace reilly
