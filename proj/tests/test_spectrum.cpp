#include <cmath>
#include <random>

#include "doctest.h"
#include "reilly/corpus.hpp"
#include "reilly/error.hpp"
#include "reilly/metric.hpp"
#include "reilly/spectrum.hpp"

using namespace reilly;

namespace {

MetricData equal_weights(int count) {
  MetricData md;
  md.vertex_weight = Eigen::VectorXd::Ones(count);
  md.total_volume = count;
  return md;
}

// Small closed meshes with irregular simplices: a radially jittered level 1
// icosphere (42 vertices) and a 7 x 7 Clifford torus nudged along S^3.
SimplicialImmersion jittered(const std::string& shape, int resolution, unsigned seed) {
  auto imm = build_corpus_immersion(shape, {}, resolution);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.08, 0.08);
  for (Eigen::Index v = 0; v < imm.vertex_count(); ++v) {
    Eigen::VectorXd x = imm.vertices.row(v).transpose();
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] += u(rng);
    if (imm.space_form.c == 1) x.normalize();
    imm.vertices.row(v) = x.transpose();
  }
  return imm;
}

ScalarField random_field(Eigen::Index size, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  ScalarField f(size);
  for (Eigen::Index i = 0; i < size; ++i) f[i] = g(rng);
  return f;
}

}  // namespace

TEST_CASE("p-mean centering examples") {
  const MetricData md = equal_weights(2);
  for (double p : {1.2, 1.5, 2.0, 3.0, 4.5}) {
    CHECK(std::abs(p_mean_center(Eigen::Vector2d(1.0, -1.0), md, p).shift) < 1e-14);
  }
  CHECK(p_mean_center(Eigen::Vector2d(2.0, 0.0), md, 3.0).shift == doctest::Approx(1.0).epsilon(1e-12));

  MetricData weighted;
  weighted.vertex_weight = Eigen::Vector3d(1.0, 2.0, 5.0);
  weighted.total_volume = 8.0;
  const Eigen::Vector3d u(3.0, -1.0, 0.5);
  CHECK(p_mean_center(u, weighted, 2.0).shift == doctest::Approx((3.0 - 2.0 + 2.5) / 8.0).epsilon(1e-14));
}

TEST_CASE("p-mean centering solves its scalar equation") {
  const auto imm = build_corpus_immersion("ellipsoid", {}, 2);
  const MetricData md = induced_metric(imm);
  const ScalarField u = random_field(imm.vertex_count(), 3).array().exp();
  for (double p : {1.2, 1.5, 2.5, 3.0}) {
    CAPTURE(p);
    const CenteredField c = p_mean_center(u, md, p);
    CHECK(centering_violation(c.centered, md, p) <= 1e-12);
    CHECK(std::abs(p_mean_center(c.centered, md, p).shift) <= 1e-12 * c.centered.cwiseAbs().maxCoeff());
  }
  CHECK_THROWS_AS(p_mean_center(ScalarField::Constant(imm.vertex_count(), 2.0), md, 1.5), Error);
  CHECK_THROWS_AS(p_mean_center(u, md, 1.0), Error);
}

TEST_CASE("odd power is continuous at zero") {
  CHECK(odd_power(0.0, 1.2) == 0.0);
  CHECK(odd_power(-8.0, 4.0 / 3.0) == doctest::Approx(-2.0));
  CHECK(odd_power(1e-300, 1.5) > 0.0);
  CHECK(std::isfinite(odd_power(-1e-300, 1.1)));
}

TEST_CASE("Rayleigh quotient is scale invariant") {
  const auto imm = build_corpus_immersion("torus_of_revolution", {}, 16);
  const MetricData md = induced_metric(imm);
  const ScalarField u = random_field(imm.vertex_count(), 5);
  for (double p : {1.2, 1.5, 2.0, 2.5, 3.0}) {
    const double r = rayleigh_quotient(u, imm, md, p);
    CHECK(std::abs(rayleigh_quotient(7.3 * u, imm, md, p) - r) <= 1e-12 * r);
    CHECK(std::abs(rayleigh_quotient(-7.3 * u, imm, md, p) - r) <= 1e-12 * r);
  }
  CHECK_THROWS_AS(rayleigh_quotient(ScalarField::Zero(imm.vertex_count()), imm, md, 2.0), Error);
}

TEST_CASE("linear field on a right simplex has unit gradient") {
  SimplicialImmersion imm;
  imm.space_form = SpaceForm(0, 3);
  imm.n = 2;
  imm.vertices = Eigen::MatrixXd::Zero(3, 3);
  imm.vertices(1, 0) = 1.0;
  imm.vertices(2, 1) = 1.0;
  imm.simplices.resize(1, 3);
  imm.simplices << 0, 1, 2;
  const MetricData md = induced_metric(imm);
  const auto ev = rayleigh_with_gradient(Eigen::Vector3d(0.0, 1.0, 0.0), imm, md, 3.0);
  CHECK(ev.numerator == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ev.denominator == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("first coordinate on the sphere has Rayleigh quotient near 2") {
  const auto imm = build_corpus_immersion("round_sphere", {}, 4);
  const MetricData md = induced_metric(imm);
  const ScalarField x = p_mean_center(imm.vertices.col(0), md, 2.0).centered;
  CHECK(rayleigh_quotient(x, imm, md, 2.0) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("analytic gradient matches central differences") {
  for (const auto& [shape, resolution] : std::vector<std::pair<std::string, int>>{{"round_sphere", 1}, {"clifford_torus", 7}}) {
    const auto imm = jittered(shape, resolution, 17);
    CAPTURE(shape);
    REQUIRE(imm.vertex_count() >= 40);
    REQUIRE(imm.vertex_count() <= 50);
    const MetricData md = induced_metric(imm);
    for (double p : {1.5, 2.0, 2.5, 3.0}) {
      CAPTURE(p);
      const ScalarField u = random_field(imm.vertex_count(), 23);
      const auto ev = rayleigh_with_gradient(u, imm, md, p);
      CHECK(ev.value == doctest::Approx(rayleigh_quotient(u, imm, md, p)).epsilon(1e-14));
      ScalarField fd(u.size());
      const double h = 1e-6;
      for (Eigen::Index v = 0; v < u.size(); ++v) {
        ScalarField up = u, dn = u;
        up[v] += h;
        dn[v] -= h;
        fd[v] = (rayleigh_quotient(up, imm, md, p) - rayleigh_quotient(dn, imm, md, p)) / (2.0 * h);
      }
      CHECK((fd - ev.gradient).norm() <= 1e-5 * ev.gradient.norm());
    }
  }
}

TEST_CASE("minimizer and linear solver agree at p = 2") {
  for (const auto& [shape, resolution] : std::vector<std::pair<std::string, int>>{
           {"round_sphere", 4}, {"ellipsoid", 3}, {"torus_of_revolution", 24}, {"clifford_torus", 32},
           {"geodesic_sphere_S3", 3}, {"geodesic_sphere_H3", 3}, {"round_S3_in_R4", 4}}) {
    CAPTURE(shape);
    const auto imm = build_corpus_immersion(shape, {}, resolution);
    const MetricData md = induced_metric(imm);
    MinimizeOptions opts;
    opts.restarts = 4;
    const SpectralResult nl = minimize_rayleigh(imm, md, 2.0, opts);
    const SpectralResult lin = linear_eigensolve(imm, md);
    CHECK(nl.converged);
    CHECK(std::abs(nl.lambda - lin.lambda) <= 1e-6 * lin.lambda);
  }
}

TEST_CASE("minimizer result invariants") {
  const auto imm = build_corpus_immersion("ellipsoid", {}, 3);
  const MetricData md = induced_metric(imm);
  MinimizeOptions opts;
  opts.restarts = 5;
  for (double p : {1.5, 2.5}) {
    CAPTURE(p);
    const SpectralResult r = minimize_rayleigh(imm, md, p, opts);
    CHECK(r.lambda > 0.0);
    CHECK(r.restarts_used == 5);
    CHECK(r.restart_values.size() == 5);
    CHECK(r.eigenfunction.size() == imm.vertex_count());
    CHECK(centering_violation(r.eigenfunction, md, p) <= 1e-10);
    CHECK(std::abs(rayleigh_quotient(r.eigenfunction, imm, md, p) - r.lambda) <= 1e-12 * r.lambda);
    CHECK(certify_upper_bound(r.eigenfunction, imm, md, p) == r.lambda);
    for (std::size_t k = 1; k < r.value_history.size(); ++k) CHECK(r.value_history[k] <= r.value_history[k - 1]);
    for (double v : r.restart_values) CHECK(r.lambda <= v);
    // Certificate soundness against unrelated centered fields.
    for (unsigned s = 0; s < 5; ++s) {
      const ScalarField f = p_mean_center(random_field(imm.vertex_count(), 100 + s), md, p).centered;
      CHECK(r.lambda <= certify_upper_bound(f, imm, md, p) + 1e-9);
    }
  }
}

TEST_CASE("minimizer is reproducible for a fixed seed") {
  const auto imm = build_corpus_immersion("torus_of_revolution", {}, 12);
  const MetricData md = induced_metric(imm);
  MinimizeOptions opts;
  opts.restarts = 6;
  opts.seed = 42;
  const SpectralResult a = minimize_rayleigh(imm, md, 1.5, opts);
  opts.threads = 1;
  const SpectralResult b = minimize_rayleigh(imm, md, 1.5, opts);
  CHECK(a.lambda == b.lambda);
  CHECK(a.eigenfunction == b.eigenfunction);
  CHECK(a.best_restart == b.best_restart);
}

TEST_CASE("p = 1.5 restarts agree on the sphere") {
  const auto imm = build_corpus_immersion("round_sphere", {}, 3);
  const MetricData md = induced_metric(imm);
  MinimizeOptions opts;
  opts.restarts = 10;
  const SpectralResult r = minimize_rayleigh(imm, md, 1.5, opts);
  for (double v : r.restart_values) CHECK(std::abs(v - r.lambda) <= 1e-3 * r.lambda);
}

TEST_CASE("flat Clifford torus has first eigenvalue 2") {
  const auto imm = build_corpus_immersion("clifford_torus", {}, 64);
  const MetricData md = induced_metric(imm);
  MinimizeOptions opts;
  opts.restarts = 4;
  CHECK(minimize_rayleigh(imm, md, 2.0, opts).lambda == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("linear solver spectra of round spheres") {
  const auto s2 = build_corpus_immersion("round_sphere", {}, 4);
  const MetricData md2 = induced_metric(s2);
  const SpectralResult r2 = linear_eigensolve(s2, md2);
  CHECK(r2.lambda == doctest::Approx(2.0).epsilon(0.01));
  CHECK(r2.cluster_multiplicity == 3);
  CHECK(r2.p == 2.0);
  CHECK(std::abs(rayleigh_quotient(r2.eigenfunction, s2, md2, 2.0) - r2.lambda) <= 1e-12 * r2.lambda);
  CHECK(centering_violation(r2.eigenfunction, md2, 2.0) <= 1e-10);

  const ScalarField x = p_mean_center(s2.vertices.col(2), md2, 2.0).centered;
  CHECK(certify_upper_bound(x, s2, md2, 2.0) >= r2.lambda);
  CHECK_THROWS_AS(certify_upper_bound(s2.vertices.col(2) + ScalarField::Ones(s2.vertex_count()), s2, md2, 2.0), Error);

  const auto s3 = build_corpus_immersion("round_S3_in_R4");
  CHECK(linear_eigensolve(s3, induced_metric(s3)).lambda == doctest::Approx(3.0).epsilon(0.03));

  const auto h3 = build_corpus_immersion("geodesic_sphere_H3", {{"r", 1.0}});
  CHECK(linear_eigensolve(h3, induced_metric(h3)).lambda == doctest::Approx(2.0 / std::pow(std::sinh(1.0), 2)).epsilon(0.02));

  const auto tor = build_corpus_immersion("torus_of_revolution", {}, 24);
  CHECK(linear_eigensolve(tor, induced_metric(tor)).cluster_multiplicity == 2);
}

TEST_CASE("minimizer rejects bad arguments") {
  const auto imm = build_corpus_immersion("round_sphere", {}, 1);
  const MetricData md = induced_metric(imm);
  CHECK_THROWS_AS(minimize_rayleigh(imm, md, 1.0), Error);
  MinimizeOptions opts;
  opts.restarts = 0;
  CHECK_THROWS_AS(minimize_rayleigh(imm, md, 2.0, opts), Error);
}
