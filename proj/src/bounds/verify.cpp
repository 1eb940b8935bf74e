#include <chrono>
#include <cmath>
#include <limits>

#include "reilly/bounds.hpp"
#include "reilly/corpus.hpp"
#include "reilly/error.hpp"

namespace reilly {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double relative_gap(double bound, double lambda) { return (bound - lambda) / bound; }

json ordering(double lhs, double rhs, bool holds) { return {{"lhs", lhs}, {"rhs", rhs}, {"holds", holds}}; }

std::optional<double> equality_radius(double lambda, int n, int c) {
  if (!(lambda > 0.0)) return std::nullopt;
  const double r0 = std::sqrt(n / lambda);
  if (c == 0) return r0;
  if (c == 1) return r0 <= 1.0 ? std::optional<double>(std::asin(r0)) : std::nullopt;
  return std::asinh(r0);
}

}  // namespace

BoundReport verify_one(const SimplicialImmersion& imm, const MetricData& md, const CurvatureData& cd, double p,
                       const VerifyOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const SpaceForm& sf = imm.space_form;
  const int n = imm.n;
  if (!main_bound_admissible(p, n))
    throw Error("p = " + std::to_string(p) + " is outside 1 < p <= n/2 + 1 for n = " + std::to_string(n));

  BoundReport r;
  if (imm.corpus_tag) {
    r.shape = imm.corpus_tag->name;
    r.params = imm.corpus_tag->params;
    r.resolution = imm.corpus_tag->resolution;
  } else {
    r.shape = "mesh";
  }
  r.n = n;
  r.N = sf.N;
  r.c = sf.c;
  r.p = p;
  r.vol = md.total_volume;
  r.seed = opts.minimize.seed;
  r.options = options_to_json(opts);

  auto violate = [&](const std::string& check, const std::string& detail, double lhs, double rhs) {
    r.violations.push_back({check, detail, lhs, rhs});
  };

  // Eigenvalue
  MinimizeOptions mopts = opts.minimize;
  if (mopts.threads == 0) mopts.threads = opts.threads;
  const SpectralResult nonlinear = minimize_rayleigh(imm, md, p, mopts);
  r.lambda_nonlinear = nonlinear.lambda;
  r.restart_values = nonlinear.restart_values;
  if (p == 2.0) {
    const SpectralResult linear = linear_eigensolve(imm, md);
    r.lambda_linear = linear.lambda;
    r.lambda = linear.lambda;
    r.lambda_method = linear.method;
    r.lambda_converged = linear.converged;
    r.chains["p2_solver_agreement"] = {
        {"nonlinear", nonlinear.lambda},
        {"linear", linear.lambda},
        {"relative_difference", std::abs(nonlinear.lambda - linear.lambda) / linear.lambda}};
  } else {
    r.lambda = nonlinear.lambda;
    r.lambda_method = nonlinear.method;
    r.lambda_converged = nonlinear.converged;
  }
  const double lambda = r.lambda;

  // Curvature bounds
  if (p == 2.0) r.bound_reilly = reilly_bound(cd, md, n);
  if (sf.c != -1) r.bound_dumao = dumao_bound(cd, md, n, sf.N, p, sf.c);
  try {
    r.bound_main = main_bound(cd, md, n, sf.N, p, sf.c);
  } catch (const Error& e) {
    r.bound_main = std::numeric_limits<double>::quiet_NaN();
    violate("main_bound_defined", e.what(), md.vertex_weight.dot(cd.shifted), 0.0);
  }
  r.integral_shifted = md.vertex_weight.dot(cd.shifted);
  r.integral_shifted_p2 = md.vertex_weight.dot(cd.shifted.array().abs().pow(p / 2.0).matrix());

  // Balanced conformal map and the bound built from it
  try {
    const BalancedMap bm = balance(imm, md, p, opts.balance);
    r.balance_residual_norm = bm.residual.norm();
    r.balance_converged = bm.converged;
    r.chains["balance"] = {{"converged", bm.converged},
                           {"residual_norm", bm.residual.norm()},
                           {"iterations", bm.iterations},
                           {"fallback_steps", bm.fallback_steps},
                           {"moebius_time", bm.moebius.time()}};
    if (bm.converged) {
      r.bound_conformal = conformal_bound(bm, md, n, sf.N, p);
      r.integral_eprho = md.vertex_weight.dot((p * bm.rho.array()).exp().matrix());
      if (cd.source == CurvatureSource::analytic) {
        const IntegratedConformalCheck ic = integrated_conformal_check(bm, imm, md, cd);
        r.integral_e2rho = ic.lhs;
        const bool holds = ic.holds(opts.conformal_margin);
        r.chains["integrated_conformal"] = ordering(ic.lhs, ic.rhs, holds);
        if (!holds)
          violate("integrated_conformal", "integral of e^{2 rho} exceeds integral of c + H^2 beyond the margin",
                  ic.lhs, ic.rhs);
      }
      if (p > 2.0) {
        const YoungChainCheck yc = young_chain_check(bm, md, cd, p);
        const bool holds = yc.holds(opts.conformal_margin);
        r.chains["young"] = ordering(yc.lhs, yc.rhs, holds);
        if (!holds)
          violate("young_chain", "integral of e^{p rho} exceeds integral of |c + H^2|^{p/2} beyond the margin",
                  yc.lhs, yc.rhs);
      }
    }
  } catch (const Error& e) {
    r.chains["balance"] = {{"converged", false}, {"error", e.what()}};
  }

  // lambda below every bound
  auto check_bound = [&](const std::string& name, const std::optional<double>& bound) {
    if (!bound || !std::isfinite(*bound)) return;
    r.margins[name] = relative_gap(*bound, lambda);
    r.equality[name] = std::abs(*bound - lambda) / *bound < opts.equality_tol;
    if (!(lambda <= *bound + opts.bound_slack))
      violate("lambda_le_" + name, "computed eigenvalue exceeds the " + name + " bound", lambda, *bound);
  };
  check_bound("reilly", r.bound_reilly);
  check_bound("dumao", r.bound_dumao);
  check_bound("main", std::optional<double>(r.bound_main));
  check_bound("lemma32", r.bound_conformal);
  r.equality_main = r.equality.contains("main") && r.equality["main"].get<bool>();
  r.equality["tolerance"] = opts.equality_tol;

  // Orderings between bound values
  const double exact_slack = opts.chain_slack * std::max(1.0, std::abs(r.bound_main));
  if (p <= 2.0 && r.bound_conformal && std::isfinite(r.bound_main)) {
    const bool holds = *r.bound_conformal <= r.bound_main + exact_slack;
    r.chains["holder_conformal_le_main"] = ordering(*r.bound_conformal, r.bound_main, holds);
    if (!holds) violate("holder_conformal_le_main", "conformal bound exceeds the main bound", *r.bound_conformal, r.bound_main);
  }
  if (sf.c == 1 && p < 2.0 && r.bound_dumao && std::isfinite(r.bound_main)) {
    const bool holds = r.bound_main <= *r.bound_dumao + exact_slack;
    r.chains["main_le_dumao"] = ordering(r.bound_main, *r.bound_dumao, holds);
    if (!holds) violate("main_le_dumao", "main bound exceeds the Du-Mao bound", r.bound_main, *r.bound_dumao);
  }
  if (p == 2.0) {
    const double low = main_bound_low_p(cd, md, n, sf.N, 2.0);
    const double high = main_bound_high_p(cd, md, n, sf.N, 2.0);
    r.chains["branch_continuity"] = {{"low_p", low}, {"high_p", high}, {"difference", std::abs(low - high)}};
  }

  // Equality radius
  if (p == 2.0) {
    r.radius_computed = equality_radius(lambda, n, sf.c);
    if (imm.corpus_tag) r.radius_expected = expected_equality_radius(*imm.corpus_tag, sf.c);
  }
  r.equality["radius_computed"] = optional_number(r.radius_computed);
  r.equality["radius_expected"] = optional_number(r.radius_expected);
  if (r.radius_computed && r.radius_expected)
    r.equality["radius_relative_error"] = std::abs(*r.radius_computed - *r.radius_expected) / *r.radius_expected;

  r.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<BoundReport> verify(const std::string& shape, const ShapeParams& params, std::optional<int> resolution,
                                const std::vector<double>& p_list, const VerifyOptions& opts) {
  if (p_list.empty()) throw Error("no p values given");
  SimplicialImmersion imm = build_corpus_immersion(shape, params, resolution);
  for (double p : p_list)
    if (!main_bound_admissible(p, imm.n))
      throw Error("p = " + std::to_string(p) + " is outside 1 < p <= n/2 + 1 for n = " + std::to_string(imm.n));
  const MetricData md = induced_metric(imm);
  CurvatureData cd = analytic_mean_curvature(imm);
  if (opts.inject_curvature_scale != 1.0) {
    cd.H *= opts.inject_curvature_scale;
    refresh_shifted(cd, imm.space_form.c);
  }
  std::vector<BoundReport> reports;
  reports.reserve(p_list.size());
  for (double p : p_list) reports.push_back(verify_one(imm, md, cd, p, opts));
  return reports;
}

json options_to_json(const VerifyOptions& opts) {
  return {{"minimize",
           {{"restarts", opts.minimize.restarts},
            {"max_iter", opts.minimize.max_iter},
            {"tol", opts.minimize.tol},
            {"seed", opts.minimize.seed}}},
          {"balance",
           {{"tol", opts.balance.tol},
            {"max_newton", opts.balance.max_newton},
            {"damping", opts.balance.damping},
            {"fd_step", opts.balance.fd_step}}},
          {"equality_tol", opts.equality_tol},
          {"bound_slack", opts.bound_slack},
          {"chain_slack", opts.chain_slack},
          {"conformal_margin", opts.conformal_margin}};
}

json report_to_json(const BoundReport& r) {
  json violations = json::array();
  for (const Violation& v : r.violations)
    violations.push_back({{"check", v.check}, {"detail", v.detail}, {"lhs", finite_or_null(v.lhs)},
                          {"rhs", finite_or_null(v.rhs)}});
  json restarts = json::array();
  for (double v : r.restart_values) restarts.push_back(finite_or_null(v));
  return {
      {"schema_version", kReportSchemaVersion},
      {"shape", r.shape},
      {"params", r.params},
      {"resolution", r.resolution},
      {"n", r.n},
      {"N", r.N},
      {"c", r.c},
      {"p", r.p},
      {"vol", r.vol},
      {"lambda",
       {{"value", r.lambda},
        {"method", r.lambda_method},
        {"converged", r.lambda_converged},
        {"nonlinear", optional_number(r.lambda_nonlinear)},
        {"linear", optional_number(r.lambda_linear)},
        {"restart_values", restarts},
        {"estimate", "upper"}}},
      {"bounds",
       {{"reilly", optional_number(r.bound_reilly)},
        {"dumao", optional_number(r.bound_dumao)},
        {"main", finite_or_null(r.bound_main)},
        {"lemma32", optional_number(r.bound_conformal)}}},
      {"integrals",
       {{"shifted", optional_number(r.integral_shifted)},
        {"shifted_p2", optional_number(r.integral_shifted_p2)},
        {"e2rho", optional_number(r.integral_e2rho)},
        {"eprho", optional_number(r.integral_eprho)}}},
      {"margins", r.margins},
      {"equality", r.equality},
      {"chains", r.chains},
      {"violations", violations},
      {"seed", r.seed},
      {"options", r.options},
      {"runtime_ms", r.runtime_ms},
  };
}

}  // namespace reilly
