#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "reilly/conformal.hpp"
#include "reilly/curvature.hpp"
#include "reilly/immersion.hpp"
#include "reilly/metric.hpp"
#include "reilly/spectrum.hpp"

namespace reilly {

inline constexpr int kReportSchemaVersion = 1;

/// n / vol * integral (H^2 + c).
double reilly_bound(const CurvatureData& cd, const MetricData& md, int n);

/// Du-Mao bound; c = 0 uses |H|^{p/(p-1)}, c = 1 uses (1 + H^2)^{p/(2(p-1))}.
/// Throws for c = -1.
double dumao_bound(const CurvatureData& cd, const MetricData& md, int n, int N, double p, int c);

/// Low-p formula (N+1)^{1-p/2} n^{p/2} vol^{-p/2} (integral (c+H^2))^{p/2}.
double main_bound_low_p(const CurvatureData& cd, const MetricData& md, int n, int N, double p);
/// High-p formula (N+1)^{p/2-1} n^{p/2} vol^{-1} integral |c+H^2|^{p/2}.
double main_bound_high_p(const CurvatureData& cd, const MetricData& md, int n, int N, double p);

/// Dispatches to the low-p branch for 1 < p <= 2 and to the high-p branch for
/// 2 < p <= n/2 + 1; throws otherwise, or when integral (c+H^2) <= 0 on the
/// low-p branch.
double main_bound(const CurvatureData& cd, const MetricData& md, int n, int N, double p, int c);

bool main_bound_admissible(double p, int n);

/// (N+1)^{|1-p/2|} n^{p/2} (1/vol) integral (e^{2 rho})^{p/2}.
double conformal_bound(const BalancedMap& bm, const MetricData& md, int n, int N, double p);

struct VerifyOptions {
  MinimizeOptions minimize;
  BalanceOptions balance;
  double equality_tol = 0.02;
  double bound_slack = 1e-9;        ///< lambda <= bound + slack
  double chain_slack = 1e-12;       ///< exact orderings between bound values
  double conformal_margin = 0.01;   ///< relative slack for the integrated identities
  int threads = 0;
  /// Test hook: multiplies the analytic |H| before bounds are evaluated.
  double inject_curvature_scale = 1.0;
};

struct Violation {
  std::string check;
  std::string detail;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct BoundReport {
  std::string shape;
  ShapeParams params;
  int resolution = 0;
  int n = 0;
  int N = 0;
  int c = 0;
  double p = 2.0;
  double vol = 0.0;

  double lambda = 0.0;
  std::string lambda_method;
  bool lambda_converged = false;
  std::optional<double> lambda_nonlinear;
  std::optional<double> lambda_linear;
  std::vector<double> restart_values;

  std::optional<double> bound_reilly;
  std::optional<double> bound_dumao;
  double bound_main = 0.0;
  std::optional<double> bound_conformal;

  std::optional<double> balance_residual_norm;
  bool balance_converged = false;
  std::optional<double> integral_e2rho;
  std::optional<double> integral_shifted;
  std::optional<double> integral_eprho;
  std::optional<double> integral_shifted_p2;

  std::optional<double> radius_computed;  ///< r_c from lambda (p = 2)
  std::optional<double> radius_expected;

  nlohmann::json margins = nlohmann::json::object();
  nlohmann::json equality = nlohmann::json::object();
  nlohmann::json chains = nlohmann::json::object();
  std::vector<Violation> violations;

  bool equality_main = false;
  std::uint64_t seed = 0;
  long long runtime_ms = 0;
  nlohmann::json options = nlohmann::json::object();
};

/// Builds the corpus mesh once and produces one report per p. Every failed
/// ordering is recorded as a Violation rather than thrown. Throws
/// reilly::Error on configuration errors (unknown shape, inadmissible p).
std::vector<BoundReport> verify(const std::string& shape, const ShapeParams& params,
                                std::optional<int> resolution, const std::vector<double>& p_list,
                                const VerifyOptions& opts = {});

/// Report for one p on a prepared mesh.
BoundReport verify_one(const SimplicialImmersion& imm, const MetricData& md,
                       const CurvatureData& cd, double p, const VerifyOptions& opts);

nlohmann::json report_to_json(const BoundReport& r);
nlohmann::json options_to_json(const VerifyOptions& opts);

}  // namespace reilly
