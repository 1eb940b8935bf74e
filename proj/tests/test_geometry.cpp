#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "doctest.h"
#include "reilly/corpus.hpp"
#include "reilly/error.hpp"
#include "reilly/mesh_io.hpp"
#include "reilly/metric.hpp"

using namespace reilly;
using std::numbers::pi;

namespace {

double mesh_volume(const std::string& shape, int resolution) {
  return volume(induced_metric(build_corpus_immersion(shape, {}, resolution)));
}

Eigen::MatrixXd random_rotation(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

// Surface area of the ellipsoid by midpoint quadrature in spherical angles.
double ellipsoid_area(double a, double b, double c) {
  const int nt = 2000, np = 4000;
  double area = 0.0;
  for (int i = 0; i < nt; ++i) {
    const double t = (i + 0.5) * pi / nt;
    for (int j = 0; j < np; ++j) {
      const double f = (j + 0.5) * 2.0 * pi / np;
      const Eigen::Vector3d rt(a * std::cos(t) * std::cos(f), b * std::cos(t) * std::sin(f), -c * std::sin(t));
      const Eigen::Vector3d rf(-a * std::sin(t) * std::sin(f), b * std::sin(t) * std::cos(f), 0.0);
      area += rt.cross(rf).norm();
    }
  }
  return area * (pi / nt) * (2.0 * pi / np);
}

void expect_same_metric(const MetricData& a, const MetricData& b) {
  REQUIRE(a.gram.size() == b.gram.size());
  double worst = 0.0;
  for (std::size_t s = 0; s < a.gram.size(); ++s) worst = std::max(worst, (a.gram[s] - b.gram[s]).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-10);
  CHECK((a.vertex_weight - b.vertex_weight).cwiseAbs().maxCoeff() < 1e-10);
}

}  // namespace

TEST_CASE("icosphere level 4 has the subdivision counts and unit vertices") {
  const auto imm = build_corpus_immersion("round_sphere", {{"n", 2}, {"r", 1}, {"N", 3}}, 4);
  CHECK(imm.vertex_count() == 2562);
  CHECK(imm.simplex_count() == 5120);
  CHECK((imm.vertices.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(validate_closed_oriented(imm).ok());
}

TEST_CASE("clifford torus grid vertices lie on the product of circles") {
  const auto imm = build_corpus_immersion("clifford_torus", {}, 64);
  CHECK(imm.vertex_count() == 4096);
  CHECK(imm.space_form.c == 1);
  for (Eigen::Index v = 0; v < imm.vertex_count(); ++v) {
    const Eigen::RowVectorXd x = imm.vertices.row(v);
    CHECK(std::abs(x.head(2).squaredNorm() - 0.5) < 1e-12);
    CHECK(std::abs(x.tail(2).squaredNorm() - 0.5) < 1e-12);
  }
}

TEST_CASE("geodesic sphere in H3 sits at hyperbolic distance r from the apex") {
  const auto imm = build_corpus_immersion("geodesic_sphere_H3", {{"r", 1.0}});
  for (Eigen::Index v = 0; v < imm.vertex_count(); ++v) {
    const Eigen::VectorXd x = imm.vertices.row(v).transpose();
    CHECK(std::abs(imm.space_form.inner(x, x) + 1.0) < 1e-12);
    Eigen::VectorXd apex = Eigen::VectorXd::Zero(4);
    apex[0] = 1.0;
    CHECK(std::abs(std::acosh(-imm.space_form.inner(x, apex)) - 1.0) < 1e-10);
  }
}

TEST_CASE("cube-sphere vertex count") {
  for (int k : {2, 4, 7}) {
    const auto imm = build_corpus_immersion("round_S3_in_R4", {}, k);
    CHECK(imm.vertex_count() == (k + 1) * (k + 1) * (k + 1) * (k + 1) - (k - 1) * (k - 1) * (k - 1) * (k - 1));
    CHECK(imm.n == 3);
    CHECK(validate_closed_oriented(imm).ok());
  }
}

TEST_CASE("flat right triangle has identity Gram and area one half") {
  SimplicialImmersion imm;
  imm.space_form = SpaceForm(0, 3);
  imm.n = 2;
  imm.vertices = Eigen::MatrixXd::Zero(3, 3);
  imm.vertices(1, 0) = 1.0;
  imm.vertices(2, 1) = 1.0;
  imm.simplices.resize(1, 3);
  imm.simplices << 0, 1, 2;
  const MetricData md = induced_metric(imm);
  CHECK((md.gram[0] - Eigen::Matrix2d::Identity()).norm() == 0.0);
  CHECK(volume(md) == doctest::Approx(0.5).epsilon(1e-15));

  imm.vertices(1, 0) = std::sqrt(2.0);
  imm.vertices(2, 1) = std::sqrt(2.0);
  CHECK(volume(induced_metric(imm)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("lumped weights partition the volume") {
  for (const auto& e : corpus_entries()) {
    const MetricData md = induced_metric(build_corpus_immersion(e.name));
    CHECK(std::abs(md.vertex_weight.sum() - md.total_volume) <= 1e-12 * md.total_volume);
    CHECK(std::abs(md.simplex_volume.sum() - volume(md)) <= 1e-12 * md.total_volume);
  }
}

TEST_CASE("volumes match the analytic areas") {
  CHECK(mesh_volume("round_sphere", 4) == doctest::Approx(4.0 * pi).epsilon(0.005));
  CHECK(mesh_volume("geodesic_sphere_H3", 4) == doctest::Approx(4.0 * pi * std::pow(std::sinh(1.0), 2)).epsilon(0.01));
  CHECK(mesh_volume("torus_of_revolution", 48) == doctest::Approx(4.0 * pi * pi * 2.0).epsilon(0.01));
  CHECK(mesh_volume("clifford_torus", 64) == doctest::Approx(2.0 * pi * pi).epsilon(0.01));
}

TEST_CASE("volume converges under refinement for every corpus shape") {
  struct Case {
    std::string shape;
    double exact;
    std::vector<int> levels;
  };
  const double s3r = std::sin(1.0), h3r = std::sinh(1.0);
  const std::vector<Case> cases = {
      {"round_sphere", 4.0 * pi, {1, 2, 3, 4}},
      {"ellipsoid", ellipsoid_area(1.3, 1.0, 0.8), {1, 2, 3, 4}},
      {"torus_of_revolution", 8.0 * pi * pi, {8, 16, 32}},
      {"clifford_torus", 2.0 * pi * pi, {8, 16, 32, 64}},
      {"geodesic_sphere_S3", 4.0 * pi * s3r * s3r, {1, 2, 3, 4}},
      {"geodesic_sphere_H3", 4.0 * pi * h3r * h3r, {1, 2, 3, 4}},
      {"round_S3_in_R4", 2.0 * pi * pi, {2, 3, 5, 7}},
  };
  CHECK(cases.size() == corpus_entries().size());
  for (const auto& c : cases) {
    CAPTURE(c.shape);
    double previous = INFINITY;
    for (int level : c.levels) {
      CAPTURE(level);
      const double error = std::abs(mesh_volume(c.shape, level) - c.exact);
      CHECK(error < previous);
      previous = error;
    }
  }
}

TEST_CASE("induced metric is invariant under model isometries") {
  SUBCASE("rotation of a Euclidean surface") {
    auto imm = build_corpus_immersion("ellipsoid", {}, 3);
    const MetricData before = induced_metric(imm);
    imm.vertices = imm.vertices * random_rotation(3, 7).transpose();
    expect_same_metric(before, induced_metric(imm));
  }
  SUBCASE("rotation of S3") {
    auto imm = build_corpus_immersion("clifford_torus", {}, 32);
    const MetricData before = induced_metric(imm);
    imm.vertices = imm.vertices * random_rotation(4, 11).transpose();
    expect_same_metric(before, induced_metric(imm));
  }
  SUBCASE("Lorentz boost of H3") {
    auto imm = build_corpus_immersion("geodesic_sphere_H3", {}, 3);
    const MetricData before = induced_metric(imm);
    const Eigen::MatrixXd L = lorentz_boost(Eigen::Vector3d(1.0, 2.0, -0.5).normalized(), 0.8);
    imm.vertices = imm.vertices * L.transpose();
    CHECK(imm.vertices.col(0).minCoeff() > 1.0);
    expect_same_metric(before, induced_metric(imm));
  }
}

TEST_CASE("Gram matrices on the hyperboloid are positive definite") {
  for (const std::string shape : {"geodesic_sphere_H3"}) {
    for (double r : {0.3, 1.0, 2.5}) {
      const MetricData md = induced_metric(build_corpus_immersion(shape, {{"r", r}}, 3));
      double smallest = INFINITY;
      for (const auto& g : md.gram) smallest = std::min(smallest, Eigen::SelfAdjointEigenSolver<SmallMatrix>(g).eigenvalues().minCoeff());
      CHECK(smallest > 0.0);
    }
  }
}

TEST_CASE("validation reports boundary and orientation defects") {
  const auto sphere = build_corpus_immersion("round_sphere", {}, 2);
  CHECK(validate_closed_oriented(sphere).ok());

  auto holed = sphere;
  holed.simplices.conservativeResize(sphere.simplex_count() - 1, 3);
  const auto d1 = validate_closed_oriented(holed);
  CHECK(d1.boundary_faces.size() == 3);
  CHECK(d1.orientation_conflicts.empty());
  CHECK_THROWS_AS(require_valid(holed), Error);

  auto flipped = sphere;
  std::swap(flipped.simplices(5, 1), flipped.simplices(5, 2));
  const auto d2 = validate_closed_oriented(flipped);
  CHECK(d2.orientation_conflicts.size() == 3);
  CHECK(d2.boundary_faces.empty());

  orient_consistently(flipped);
  CHECK(validate_closed_oriented(flipped).ok());
}

TEST_CASE("off-model and degenerate vertices are rejected") {
  auto imm = build_corpus_immersion("clifford_torus", {}, 16);
  imm.vertices(3, 0) += 1e-6;
  CHECK(validate_closed_oriented(imm).off_model_vertices.size() == 1);

  auto flat = build_corpus_immersion("round_sphere", {}, 1);
  flat.vertices.row(flat.simplices(0, 1)) = flat.vertices.row(flat.simplices(0, 0));
  CHECK_THROWS_AS(induced_metric(flat), Error);
}

TEST_CASE("corpus rejects unknown shapes and bad parameters") {
  CHECK_THROWS_AS(build_corpus_immersion("mobius_strip"), Error);
  CHECK_THROWS_AS(build_corpus_immersion("torus_of_revolution", {{"R", 1.0}, {"r", 1.0}}), Error);
  CHECK_THROWS_AS(build_corpus_immersion("torus_of_revolution", {{"R", 1.0}, {"r", 2.0}}), Error);
  CHECK_THROWS_AS(build_corpus_immersion("round_sphere", {{"radius_typo", 1.0}}), Error);
  CHECK_THROWS_AS(build_corpus_immersion("ellipsoid", {{"a", -1.0}}), Error);
  CHECK_THROWS_AS(build_corpus_immersion("round_sphere", {}, 9), Error);
  CHECK_THROWS_AS(build_corpus_immersion("round_S3_in_R4", {}, 9), Error);
  CHECK_THROWS_AS(SpaceForm(2, 3), Error);
}

TEST_CASE("corpus meshes are deterministic") {
  const auto a = build_corpus_immersion("torus_of_revolution", {}, 20);
  const auto b = build_corpus_immersion("torus_of_revolution", {}, 20);
  CHECK(a.vertices == b.vertices);
  CHECK(a.simplices == b.simplices);
}

TEST_CASE("mesh JSON round trip is exact") {
  const auto imm = build_corpus_immersion("geodesic_sphere_H3", {}, 2);
  const auto path = std::filesystem::temp_directory_path() / "reilly_lab_roundtrip.json";
  write_mesh_file(path, imm);
  const LoadedMesh back = read_mesh_file(path);
  std::filesystem::remove(path);
  CHECK(back.immersion.space_form == imm.space_form);
  CHECK(back.immersion.n == imm.n);
  CHECK(back.immersion.vertices == imm.vertices);
  CHECK(back.immersion.simplices == imm.simplices);
  CHECK_FALSE(back.analytic.has_value());

  nlohmann::json broken = mesh_to_json(imm);
  broken["simplices"][0] = {0, 1};
  CHECK_THROWS_AS(mesh_from_json(broken), Error);
}
