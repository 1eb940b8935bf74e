// Command-line front end of the eigenvalue-bound laboratory.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "reilly/bounds.hpp"
#include "reilly/conformal.hpp"
#include "reilly/corpus.hpp"
#include "reilly/curvature.hpp"
#include "reilly/error.hpp"
#include "reilly/mesh_io.hpp"
#include "reilly/metric.hpp"
#include "reilly/spectrum.hpp"

namespace {

using nlohmann::json;

constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kCsvSchemaVersion = 1;

// Shape flags shared by every subcommand that builds a mesh. Only flags that
// were given are forwarded, so a parameter the shape does not take is an error.
struct ShapeFlags {
  std::string shape;
  std::string mesh_path;
  std::optional<double> n, N, r, a, b, c, R, shift_x, shift_y, shift_z;
  std::optional<int> resolution;

  void attach(CLI::App* app, bool allow_mesh) {
    app->add_option("--shape", shape, "corpus shape (see `corpus list`)");
    if (allow_mesh) app->add_option("--mesh", mesh_path, "mesh JSON written by `generate`");
    app->add_option("--n", n, "intrinsic dimension (round_sphere: 2 or 3)");
    app->add_option("--ambient", N, "ambient dimension N (round_sphere)");
    app->add_option("--r,--radius", r, "radius (spheres) or tube radius (torus)");
    app->add_option("--a", a, "ellipsoid semi-axis along x");
    app->add_option("--b", b, "ellipsoid semi-axis along y");
    app->add_option("--c", c, "ellipsoid semi-axis along z");
    app->add_option("--R,--major-radius", R, "torus major radius");
    app->add_option("--shift-x", shift_x, "ellipsoid translation");
    app->add_option("--shift-y", shift_y, "ellipsoid translation");
    app->add_option("--shift-z", shift_z, "ellipsoid translation");
    app->add_option("--level,--grid,--resolution", resolution,
                    "mesh resolution: icosphere level, grid size or tube count (shape dependent)");
  }

  reilly::ShapeParams params() const {
    reilly::ShapeParams out;
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) out[key] = *v;
    };
    put("n", n);
    put("N", N);
    put("r", r);
    put("a", a);
    put("b", b);
    put("c", c);
    put("R", R);
    put("shift_x", shift_x);
    put("shift_y", shift_y);
    put("shift_z", shift_z);
    return out;
  }

  bool has_shape_params() const { return !params().empty() || resolution.has_value(); }
};

struct Loaded {
  reilly::SimplicialImmersion imm;
  std::optional<reilly::CurvatureData> analytic;
};

Loaded load_input(const ShapeFlags& flags) {
  if (!flags.mesh_path.empty()) {
    if (!flags.shape.empty() || flags.has_shape_params())
      throw reilly::Error("--mesh cannot be combined with shape flags");
    reilly::LoadedMesh lm = reilly::read_mesh_file(flags.mesh_path);
    return {std::move(lm.immersion), std::move(lm.analytic)};
  }
  if (flags.shape.empty()) throw reilly::Error("--shape is required (or --mesh)");
  Loaded out{reilly::build_corpus_immersion(flags.shape, flags.params(), flags.resolution), std::nullopt};
  out.analytic = reilly::analytic_mean_curvature(out.imm);
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw reilly::Error("cannot write " + path);
  out << text;
}

std::string number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : ""; }

std::string summary_csv(const std::vector<reilly::BoundReport>& reports) {
  std::ostringstream os;
  os << "schema_version,shape,p,lambda,main_bound,margin,equality\n";
  for (const auto& r : reports) {
    const double margin = (r.bound_main - r.lambda) / r.bound_main;
    os << kCsvSchemaVersion << ',' << r.shape << ',' << number(r.p) << ',' << number(r.lambda) << ','
       << number(r.bound_main) << ',' << number(margin) << ',' << (r.equality_main ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string plot_csv(const std::vector<reilly::BoundReport>& reports) {
  std::ostringstream os;
  os << "schema_version,shape,p,lambda,reilly,dumao,main,lemma32\n";
  for (const auto& r : reports)
    os << kCsvSchemaVersion << ',' << r.shape << ',' << number(r.p) << ',' << number(r.lambda) << ','
       << optional_number(r.bound_reilly) << ',' << optional_number(r.bound_dumao) << ','
       << number(r.bound_main) << ',' << optional_number(r.bound_conformal) << '\n';
  return os.str();
}

json spectral_json(const reilly::SpectralResult& s) {
  return {{"p", s.p},
          {"lambda", s.lambda},
          {"method", s.method},
          {"converged", s.converged},
          {"iterations", s.iterations},
          {"restarts_used", s.restarts_used},
          {"best_restart", s.best_restart},
          {"final_gradient_norm", s.final_gradient_norm},
          {"restart_values", s.restart_values},
          {"leading_values", s.leading_values},
          {"cluster_multiplicity", s.cluster_multiplicity},
          {"estimate", "upper"}};
}

std::vector<double> default_sweep(int n) {
  std::vector<double> ps{1.2, 1.5, 1.8, 2.0};
  if (n >= 3) ps.push_back(n / 2.0 + 1.0);
  return ps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue upper bounds for the p-Laplacian on submanifolds of space forms"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  app.get_formatter()->column_width(44);

  // corpus list
  auto* corpus = app.add_subcommand("corpus", "corpus of analytic shapes");
  auto* corpus_list = corpus->add_subcommand("list", "list shapes, default parameters and resolutions");
  corpus->require_subcommand(1);
  std::string corpus_format = "text";
  corpus_list->add_option("--format", corpus_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  // generate
  auto* generate = app.add_subcommand("generate", "write a corpus mesh (with analytic curvature) as JSON");
  ShapeFlags gen_flags;
  gen_flags.attach(generate, false);
  std::string gen_out;
  generate->add_option("--out", gen_out, "output path (stdout when omitted)");

  // shared numerical options
  reilly::VerifyOptions vopts;
  std::vector<double> p_values;
  auto add_minimize_options = [&](CLI::App* sub) {
    sub->add_option("--restarts", vopts.minimize.restarts, "restarts of the Rayleigh minimizer")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", vopts.minimize.seed, "seed for the random restarts")->capture_default_str();
    sub->add_option("--max-iter", vopts.minimize.max_iter, "iterations per restart")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tol", vopts.minimize.tol, "relative decrease tolerance of the minimizer")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--threads", vopts.threads, "worker threads (0: REILLY_LAB_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  };
  auto add_balance_options = [&](CLI::App* sub) {
    sub->add_option("--balance-tol", vopts.balance.tol, "balancing residual tolerance relative to vol(M)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--max-newton", vopts.balance.max_newton, "Newton iterations of the balancing solver")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "first nonzero p-Laplacian eigenvalue");
  ShapeFlags spectrum_flags;
  spectrum_flags.attach(spectrum, true);
  spectrum->add_option("--p", p_values, "exponents, comma separated")->delimiter(',')->required();
  add_minimize_options(spectrum);
  bool spectrum_linear = false;
  spectrum->add_flag("--linear", spectrum_linear, "also run the linear solver when p = 2");
  std::string spectrum_out;
  spectrum->add_option("--out", spectrum_out, "output path (stdout when omitted)");

  // balance
  auto* balance_cmd = app.add_subcommand("balance", "p-balanced conformal map onto the unit sphere");
  ShapeFlags bal_flags;
  bal_flags.attach(balance_cmd, true);
  balance_cmd->add_option("--p", p_values, "exponents, comma separated")->delimiter(',')->required();
  add_balance_options(balance_cmd);
  std::string bal_out;
  balance_cmd->add_option("--out", bal_out, "output path (stdout when omitted)");

  // verify
  auto* verify = app.add_subcommand("verify", "evaluate every bound and check the orderings");
  ShapeFlags ver_flags;
  ver_flags.attach(verify, false);
  verify->add_option("--p", p_values, "exponents, comma separated (default 2; sweep default 1.2,1.5,1.8,2[,n/2+1])")
      ->delimiter(',');
  add_minimize_options(verify);
  add_balance_options(verify);
  verify->add_option("--equality-tol", vopts.equality_tol, "relative tolerance of the equality flags")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--conformal-margin", vopts.conformal_margin,
                     "relative margin of the integrated conformal checks")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  bool sweep = false;
  verify->add_flag("--sweep", sweep, "write plot data (lambda and bounds against p)");
  std::string format = "csv";
  verify->add_option("--format", format, "standard output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  std::string ver_out, csv_out, plot_out;
  verify->add_option("--out", ver_out, "report JSON path");
  verify->add_option("--csv", csv_out, "summary CSV path");
  verify->add_option("--plot-csv", plot_out, "plot-data CSV path (default <shape>_plot.csv with --sweep)");
  bool deterministic = false;
  verify->add_flag("--deterministic", deterministic, "write runtime_ms = 0 so reruns are byte identical");
  verify->add_option("--inject-curvature-scale", vopts.inject_curvature_scale)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (corpus_list->parsed()) {
      if (corpus_format == "json") {
        json list = json::array();
        for (const auto& e : reilly::corpus_entries())
          list.push_back({{"name", e.name},
                          {"description", e.description},
                          {"defaults", e.defaults},
                          {"resolution", e.resolution_meaning},
                          {"default_resolution", e.default_resolution}});
        std::cout << list.dump(2) << '\n';
      } else {
        for (const auto& e : reilly::corpus_entries()) {
          std::cout << e.name << "\n  " << e.description << "\n  defaults:";
          for (const auto& [k, v] : e.defaults) std::cout << ' ' << k << '=' << v;
          if (e.defaults.empty()) std::cout << " (none)";
          std::cout << "\n  resolution: " << e.resolution_meaning << " (default " << e.default_resolution << ")\n";
        }
      }
      return 0;
    }

    if (generate->parsed()) {
      const Loaded in = load_input(gen_flags);
      emit(reilly::mesh_to_json(in.imm, in.analytic ? &*in.analytic : nullptr).dump() + "\n", gen_out);
      std::cerr << in.imm.corpus_tag->name << ": " << in.imm.vertex_count() << " vertices, "
                << in.imm.simplex_count() << " simplices\n";
      return 0;
    }

    if (spectrum->parsed()) {
      const Loaded in = load_input(spectrum_flags);
      const reilly::MetricData md = reilly::induced_metric(in.imm);
      reilly::MinimizeOptions mopts = vopts.minimize;
      mopts.threads = vopts.threads;
      json runs = json::array();
      for (double p : p_values) {
        if (!(p > 1.0)) throw reilly::Error("p must exceed 1");
        json run = spectral_json(reilly::minimize_rayleigh(in.imm, md, p, mopts));
        if (p == 2.0 && spectrum_linear) run["linear"] = spectral_json(reilly::linear_eigensolve(in.imm, md));
        runs.push_back(run);
      }
      json doc = {{"shape", in.imm.corpus_tag ? in.imm.corpus_tag->name : "mesh"},
                  {"n", in.imm.n},
                  {"N", in.imm.space_form.N},
                  {"c", in.imm.space_form.c},
                  {"vertices", in.imm.vertex_count()},
                  {"vol", md.total_volume},
                  {"seed", vopts.minimize.seed},
                  {"runs", runs}};
      emit(doc.dump(2) + "\n", spectrum_out);
      return 0;
    }

    if (balance_cmd->parsed()) {
      const Loaded in = load_input(bal_flags);
      const reilly::MetricData md = reilly::induced_metric(in.imm);
      json runs = json::array();
      for (double p : p_values) {
        const reilly::BalancedMap bm = reilly::balance(in.imm, md, p, vopts.balance);
        const reilly::ConformalFactorField field = reilly::conformal_factor_field(bm, in.imm, md);
        json run = {{"p", p},
                    {"converged", bm.converged},
                    {"iterations", bm.iterations},
                    {"fallback_steps", bm.fallback_steps},
                    {"residual_norm", bm.residual.norm()},
                    {"ball_point", std::vector<double>(bm.moebius.ball_point().begin(), bm.moebius.ball_point().end())},
                    {"moebius_time", bm.moebius.time()},
                    {"base_map", bm.base_map},
                    {"conformal_factor_max_relative_deviation", field.max_relative_deviation},
                    {"conformal_factor_mean_relative_deviation", field.mean_relative_deviation}};
        if (in.analytic) {
          const auto ic = reilly::integrated_conformal_check(bm, in.imm, md, *in.analytic);
          run["integrated_conformal"] = {{"lhs", ic.lhs}, {"rhs", ic.rhs}};
        }
        runs.push_back(run);
      }
      json doc = {{"shape", in.imm.corpus_tag ? in.imm.corpus_tag->name : "mesh"},
                  {"vertices", in.imm.vertex_count()},
                  {"vol", md.total_volume},
                  {"runs", runs}};
      emit(doc.dump(2) + "\n", bal_out);
      return 0;
    }

    if (verify->parsed()) {
      if (ver_flags.shape.empty()) throw reilly::Error("--shape is required");
      if (p_values.empty()) {
        if (sweep) {
          const int n = reilly::corpus_dimension(ver_flags.shape, ver_flags.params());
          p_values = default_sweep(n);
        } else {
          p_values = {2.0};
        }
      }
      std::vector<reilly::BoundReport> reports =
          reilly::verify(ver_flags.shape, ver_flags.params(), ver_flags.resolution, p_values, vopts);
      if (deterministic)
        for (auto& r : reports) r.runtime_ms = 0;

      json docs = json::array();
      for (const auto& r : reports) docs.push_back(reilly::report_to_json(r));
      const std::string report_text = docs.dump(2) + "\n";
      const std::string csv_text = summary_csv(reports);
      if (!ver_out.empty()) emit(report_text, ver_out);
      if (!csv_out.empty()) emit(csv_text, csv_out);
      if (sweep) {
        const std::string path = plot_out.empty() ? ver_flags.shape + "_plot.csv" : plot_out;
        emit(plot_csv(reports), path);
        std::cerr << "plot data: " << path << '\n';
      } else if (!plot_out.empty()) {
        emit(plot_csv(reports), plot_out);
      }
      std::cout << (format == "json" ? report_text : csv_text);

      bool violated = false;
      for (const auto& r : reports)
        for (const auto& v : r.violations) {
          violated = true;
          std::cerr << "violation [" << r.shape << ", p=" << r.p << "] " << v.check << ": " << v.detail
                    << " (" << v.lhs << " vs " << v.rhs << ")\n";
        }
      return violated ? kExitViolation : 0;
    }
  } catch (const reilly::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
