#include "reilly/corpus.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "reilly/error.hpp"

namespace reilly {

namespace {

constexpr int kMaxSurfaceVertices = 20000;
constexpr int kMaxVolumeVertices = 5000;
// Grid 7 (2800 vertices) is the coarsest cube-sphere whose first eigenvalue
// lies within 2% of the smooth value 3.
constexpr int kDefaultCubeGrid = 7;

const std::vector<CorpusEntry> kEntries = {
    {"round_sphere", "round n-sphere of radius r centred at the origin of R^N (c = 0)",
     {{"n", 2}, {"r", 1.0}, {"N", 3}}, "icosphere level 0-5 (n = 2, default 4) or cube-sphere grid 1-8 (n = 3, default 7)", 4},
    {"ellipsoid", "ellipsoid with semi-axes a, b, c translated by (shift_x, shift_y, shift_z) in R^3",
     {{"a", 1.3}, {"b", 1.0}, {"c", 0.8}, {"shift_x", 0.0}, {"shift_y", 0.0}, {"shift_z", 0.0}},
     "icosphere level 0-5", 4},
    {"torus_of_revolution", "torus of revolution with major radius R and tube radius r in R^3",
     {{"R", 2.0}, {"r", 1.0}}, "grid points around the tube, >= 3 (round(res*R/r) around the axis; <= 20000 vertices)", 48},
    {"clifford_torus", "minimal Clifford torus S^1(1/sqrt2) x S^1(1/sqrt2) in S^3", {},
     "grid points per circle, 3-141", 64},
    {"geodesic_sphere_S3", "geodesic sphere of radius r about (1,0,0,0) in S^3", {{"r", 1.0}},
     "icosphere level 0-5", 4},
    {"geodesic_sphere_H3", "geodesic sphere of radius r about the apex of the hyperboloid H^3",
     {{"r", 1.0}}, "icosphere level 0-5", 4},
    {"round_S3_in_R4", "round 3-sphere of radius r in R^4", {{"r", 1.0}},
     "cube-sphere grid per tesseract edge, 1-8", kDefaultCubeGrid},
};

double param(const ShapeParams& p, const std::string& key) { return p.at(key); }

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

int as_int(double v, const std::string& key) {
  const double r = std::round(v);
  require(std::abs(v - r) < 1e-12, "parameter " + key + " must be an integer");
  return static_cast<int>(r);
}

// Vertices of a subdivided icosphere, centrally symmetric to the last bit.
void build_icosphere(int level, Eigen::MatrixXd& V, Eigen::MatrixXi& F) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
      {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
      {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  V.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
  F.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i)
    for (int j = 0; j < 3; ++j) F(static_cast<Eigen::Index>(i), j) = faces[i][static_cast<std::size_t>(j)];
}

long long icosphere_vertex_count(int level) { return 10ll * (1ll << (2 * level)) + 2; }
long long cube_sphere_vertex_count(int k) {
  const long long a = k + 1, b = k - 1;
  return a * a * a * a - b * b * b * b;
}

// Boundary of the tesseract [-1,1]^4 cut into k^3 cubes per facet, each
// split into 6 Kuhn tetrahedra, then pushed radially to the unit S^3. The
// lattice coordinates are tangent-warped to even out the cell sizes.
void build_cube_sphere(int k, Eigen::MatrixXd& V, Eigen::MatrixXi& T) {
  const int side = k + 1;
  auto lattice_index = [side](const std::array<int, 4>& q) {
    return ((q[0] * side + q[1]) * side + q[2]) * side + q[3];
  };
  std::vector<int> index(static_cast<std::size_t>(side * side * side * side), -1);
  std::vector<Eigen::Vector4d> verts;
  std::vector<double> warp(static_cast<std::size_t>(side));
  for (int i = 0; i <= k; ++i)
    warp[static_cast<std::size_t>(i)] =
        std::tan(std::numbers::pi / 4.0 * (static_cast<double>(2 * i - k) / static_cast<double>(k)));
  std::array<int, 4> q{};
  for (q[0] = 0; q[0] <= k; ++q[0])
    for (q[1] = 0; q[1] <= k; ++q[1])
      for (q[2] = 0; q[2] <= k; ++q[2])
        for (q[3] = 0; q[3] <= k; ++q[3]) {
          bool on_boundary = false;
          for (int a = 0; a < 4; ++a) on_boundary |= (q[a] == 0 || q[a] == k);
          if (!on_boundary) continue;
          index[static_cast<std::size_t>(lattice_index(q))] = static_cast<int>(verts.size());
          Eigen::Vector4d x;
          for (int a = 0; a < 4; ++a) x[a] = warp[static_cast<std::size_t>(q[a])];
          verts.push_back(x.normalized());
        }

  static constexpr std::array<std::array<int, 3>, 6> kPerms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<int, 4>> tets;
  tets.reserve(static_cast<std::size_t>(48 * k * k * k));
  for (int axis = 0; axis < 4; ++axis) {
    std::array<int, 3> others{};
    for (int a = 0, m = 0; a < 4; ++a)
      if (a != axis) others[static_cast<std::size_t>(m++)] = a;
    for (int s : {0, k}) {
      std::array<int, 3> j{};
      for (j[0] = 0; j[0] < k; ++j[0])
        for (j[1] = 0; j[1] < k; ++j[1])
          for (j[2] = 0; j[2] < k; ++j[2]) {
            for (const auto& perm : kPerms) {
              std::array<int, 4> p{};
              p[static_cast<std::size_t>(axis)] = s;
              for (int m = 0; m < 3; ++m) p[static_cast<std::size_t>(others[static_cast<std::size_t>(m)])] = j[static_cast<std::size_t>(m)];
              std::array<int, 4> tet{};
              tet[0] = index[static_cast<std::size_t>(lattice_index(p))];
              for (int m = 0; m < 3; ++m) {
                ++p[static_cast<std::size_t>(others[static_cast<std::size_t>(perm[static_cast<std::size_t>(m)])])];
                tet[static_cast<std::size_t>(m + 1)] = index[static_cast<std::size_t>(lattice_index(p))];
              }
              tets.push_back(tet);
            }
          }
    }
  }
  V.resize(static_cast<Eigen::Index>(verts.size()), 4);
  for (std::size_t i = 0; i < verts.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
  T.resize(static_cast<Eigen::Index>(tets.size()), 4);
  for (std::size_t i = 0; i < tets.size(); ++i)
    for (int m = 0; m < 4; ++m) T(static_cast<Eigen::Index>(i), m) = tets[i][static_cast<std::size_t>(m)];
}

// Periodic (rows x cols) grid split into two triangles per cell.
Eigen::MatrixXi periodic_grid_triangles(int rows, int cols) {
  Eigen::MatrixXi F(2 * rows * cols, 3);
  int f = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int a = i * cols + j;
      const int b = ((i + 1) % rows) * cols + j;
      const int c = ((i + 1) % rows) * cols + (j + 1) % cols;
      const int d = i * cols + (j + 1) % cols;
      F.row(f++) << a, b, c;
      F.row(f++) << a, c, d;
    }
  }
  return F;
}

void check_resolution(bool ok, const std::string& name, int resolution, const std::string& why) {
  if (!ok)
    throw Error("resolution " + std::to_string(resolution) + " out of range for " + name + ": " + why);
}

}  // namespace

const std::vector<CorpusEntry>& corpus_entries() { return kEntries; }

const CorpusEntry& corpus_entry(const std::string& name) {
  for (const auto& e : kEntries)
    if (e.name == name) return e;
  throw Error("unknown corpus shape '" + name + "'; available: " + corpus_names());
}

std::string corpus_names() {
  std::ostringstream out;
  for (std::size_t i = 0; i < kEntries.size(); ++i) out << (i ? ", " : "") << kEntries[i].name;
  return out.str();
}

ShapeParams resolve_params(const CorpusEntry& entry, const ShapeParams& params) {
  ShapeParams resolved = entry.defaults;
  for (const auto& [key, value] : params) {
    if (!entry.defaults.contains(key))
      throw Error("shape " + entry.name + " has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw Error("parameter " + key + " must be finite");
    resolved[key] = value;
  }
  return resolved;
}

void unit_icosphere(int level, Eigen::MatrixXd& vertices, Eigen::MatrixXi& triangles) {
  build_icosphere(level, vertices, triangles);
}

SimplicialImmersion build_corpus_immersion(const std::string& name, const ShapeParams& params,
                                           std::optional<int> resolution) {
  const CorpusEntry& entry = corpus_entry(name);
  const ShapeParams p = resolve_params(entry, params);
  int res = resolution.value_or(entry.default_resolution);
  if (!resolution && name == "round_sphere" && param(p, "n") == 3.0) res = kDefaultCubeGrid;

  SimplicialImmersion imm;
  Eigen::MatrixXd unit;
  Eigen::MatrixXi cells;

  auto icosphere = [&] {
    check_resolution(res >= 0, name, res, "icosphere level must be >= 0");
    check_resolution(icosphere_vertex_count(res) <= kMaxSurfaceVertices, name, res,
                     "more than 20000 vertices");
    build_icosphere(res, unit, cells);
  };
  auto cube_sphere = [&] {
    check_resolution(res >= 1, name, res, "grid must be >= 1");
    check_resolution(cube_sphere_vertex_count(res) <= kMaxVolumeVertices, name, res,
                     "more than 5000 vertices");
    build_cube_sphere(res, unit, cells);
  };

  if (name == "round_sphere" || name == "round_S3_in_R4") {
    const int n = name == "round_sphere" ? as_int(param(p, "n"), "n") : 3;
    const int N = name == "round_sphere" ? as_int(param(p, "N"), "N") : 4;
    const double r = param(p, "r");
    require(n == 2 || n == 3, "round_sphere: n must be 2 or 3");
    require(N >= n + 1, "round_sphere: ambient dimension N must be at least n + 1");
    require(r > 0.0, "round sphere radius must be positive");
    if (n == 2) icosphere(); else cube_sphere();
    imm.space_form = SpaceForm(0, N);
    imm.n = n;
    imm.vertices = Eigen::MatrixXd::Zero(unit.rows(), N);
    imm.vertices.leftCols(n + 1) = r * unit;
  } else if (name == "ellipsoid") {
    const double a = param(p, "a"), b = param(p, "b"), c = param(p, "c");
    require(a > 0.0 && b > 0.0 && c > 0.0, "ellipsoid semi-axes must be positive");
    icosphere();
    imm.space_form = SpaceForm(0, 3);
    imm.n = 2;
    imm.vertices.resize(unit.rows(), 3);
    const Eigen::RowVector3d shift(param(p, "shift_x"), param(p, "shift_y"), param(p, "shift_z"));
    for (Eigen::Index v = 0; v < unit.rows(); ++v)
      imm.vertices.row(v) = Eigen::RowVector3d(a * unit(v, 0), b * unit(v, 1), c * unit(v, 2)) + shift;
  } else if (name == "torus_of_revolution") {
    const double R = param(p, "R"), r = param(p, "r");
    require(r > 0.0, "torus tube radius must be positive");
    require(r < R, "torus of revolution needs r < R");
    check_resolution(res >= 3, name, res, "grid must be >= 3");
    const int around = std::max(3, static_cast<int>(std::lround(res * R / r)));
    check_resolution(static_cast<long long>(around) * res <= kMaxSurfaceVertices, name, res,
                     "more than 20000 vertices");
    imm.space_form = SpaceForm(0, 3);
    imm.n = 2;
    imm.vertices.resize(around * res, 3);
    for (int i = 0; i < around; ++i) {
      const double u = 2.0 * std::numbers::pi * i / around;
      for (int j = 0; j < res; ++j) {
        const double v = 2.0 * std::numbers::pi * j / res;
        const double rho = R + r * std::cos(v);
        imm.vertices.row(i * res + j) << rho * std::cos(u), rho * std::sin(u), r * std::sin(v);
      }
    }
    cells = periodic_grid_triangles(around, res);
  } else if (name == "clifford_torus") {
    check_resolution(res >= 3, name, res, "grid must be >= 3");
    check_resolution(static_cast<long long>(res) * res <= kMaxSurfaceVertices, name, res,
                     "more than 20000 vertices");
    imm.space_form = SpaceForm(1, 3);
    imm.n = 2;
    imm.vertices.resize(res * res, 4);
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < res; ++i) {
      const double u = 2.0 * std::numbers::pi * i / res;
      for (int j = 0; j < res; ++j) {
        const double v = 2.0 * std::numbers::pi * j / res;
        imm.vertices.row(i * res + j) << s * std::cos(u), s * std::sin(u), s * std::cos(v), s * std::sin(v);
      }
    }
    cells = periodic_grid_triangles(res, res);
  } else if (name == "geodesic_sphere_S3" || name == "geodesic_sphere_H3") {
    const bool spherical = name == "geodesic_sphere_S3";
    const double r = param(p, "r");
    require(r > 0.0, "geodesic radius must be positive");
    if (spherical) require(r < std::numbers::pi, "geodesic sphere in S^3 needs r < pi");
    icosphere();
    imm.space_form = SpaceForm(spherical ? 1 : -1, 3);
    imm.n = 2;
    imm.vertices.resize(unit.rows(), 4);
    const double height = spherical ? std::cos(r) : std::cosh(r);
    const double radius = spherical ? std::sin(r) : std::sinh(r);
    imm.vertices.col(0).setConstant(height);
    imm.vertices.rightCols(3) = radius * unit;
  } else {
    throw Error("no mesh builder for corpus shape " + name);
  }

  if (imm.simplices.size() == 0) imm.simplices = cells;
  for (Eigen::Index v = 0; v < imm.vertices.rows(); ++v)
    imm.vertices.row(v) = imm.space_form.project(imm.vertices.row(v).transpose()).transpose();
  orient_consistently(imm);
  imm.corpus_tag = CorpusTag{name, p, res};

  const MeshDiagnostics diag = validate_closed_oriented(imm);
  if (!diag.ok()) throw Error("corpus mesh " + name + " failed validation: " + diag.summary());
  return imm;
}

int corpus_dimension(const std::string& name, const ShapeParams& params) {
  const ShapeParams p = resolve_params(corpus_entry(name), params);
  if (name == "round_sphere") return as_int(param(p, "n"), "n");
  return name == "round_S3_in_R4" ? 3 : 2;
}

std::optional<double> expected_equality_radius(const CorpusTag& tag, int c) {
  const auto r = tag.params.find("r");
  if (tag.name == "round_sphere" || tag.name == "round_S3_in_R4") {
    if (c == 0 && r != tag.params.end()) return r->second;
  } else if (tag.name == "geodesic_sphere_S3") {
    return std::min(r->second, std::numbers::pi - r->second);
  } else if (tag.name == "geodesic_sphere_H3") {
    return r->second;
  }
  return std::nullopt;
}

}  // namespace reilly
