#include "reilly/immersion.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <sstream>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "reilly/error.hpp"

namespace reilly {

namespace {

using FaceKey = std::array<int, 3>;

struct FaceKeyHash {
  std::size_t operator()(const FaceKey& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int v : k) {
      h ^= static_cast<std::size_t>(v + 1);
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct FaceUse {
  int simplex;
  int local;  // index of the omitted vertex
  int sign;   // induced orientation relative to the sorted key
};

using FaceMap = std::unordered_map<FaceKey, std::vector<FaceUse>, FaceKeyHash>;

// Face of simplex `s` opposite local vertex `i`, its sorted key and the sign
// of the induced orientation relative to that key.
std::pair<FaceKey, int> face_of(const Eigen::MatrixXi& simplices, Eigen::Index s, int i) {
  const int k = static_cast<int>(simplices.cols());
  std::array<int, 3> ordered{-1, -1, -1};
  int m = 0;
  for (int j = 0; j < k; ++j)
    if (j != i) ordered[m++] = simplices(s, j);
  int inversions = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      if (ordered[a] > ordered[b]) ++inversions;
  FaceKey key = ordered;
  std::sort(key.begin(), key.begin() + m);
  const int sign = ((i % 2 == 0) ? 1 : -1) * ((inversions % 2 == 0) ? 1 : -1);
  return {key, sign};
}

FaceMap build_face_map(const Eigen::MatrixXi& simplices) {
  FaceMap faces;
  faces.reserve(static_cast<std::size_t>(simplices.rows() * simplices.cols()));
  for (Eigen::Index s = 0; s < simplices.rows(); ++s) {
    for (int i = 0; i < simplices.cols(); ++i) {
      auto [key, sign] = face_of(simplices, s, i);
      faces[key].push_back({static_cast<int>(s), i, sign});
    }
  }
  return faces;
}

std::vector<int> key_to_vector(const FaceKey& key, int n) {
  return std::vector<int>(key.begin(), key.begin() + n);
}

}  // namespace

std::string MeshDiagnostics::summary() const {
  std::ostringstream out;
  out << boundary_faces.size() << " boundary faces, " << nonmanifold_faces.size()
      << " non-manifold faces, " << orientation_conflicts.size() << " orientation conflicts, "
      << degenerate_simplices.size() << " degenerate simplices, " << off_model_vertices.size()
      << " vertices off the model";
  for (const auto& e : structural_errors) out << "; " << e;
  return out.str();
}

MeshDiagnostics validate_closed_oriented(const SimplicialImmersion& imm) {
  MeshDiagnostics diag;
  const int n = imm.n;
  if (n != 2 && n != 3) {
    diag.structural_errors.push_back("intrinsic dimension must be 2 or 3");
    return diag;
  }
  if (imm.simplices.cols() != n + 1) {
    diag.structural_errors.push_back("simplices must have n+1 vertices");
    return diag;
  }
  if (imm.vertices.cols() != imm.space_form.ambient_dim()) {
    diag.structural_errors.push_back("vertex coordinates do not match the ambient dimension");
    return diag;
  }
  if (imm.simplex_count() == 0) {
    diag.structural_errors.push_back("mesh has no simplices");
    return diag;
  }
  const Eigen::Index nv = imm.vertex_count();
  for (Eigen::Index s = 0; s < imm.simplex_count(); ++s) {
    for (int i = 0; i <= n; ++i) {
      const int v = imm.simplices(s, i);
      if (v < 0 || v >= nv) {
        diag.structural_errors.push_back("simplex " + std::to_string(s) + " references vertex " +
                                         std::to_string(v) + " out of range");
        return diag;
      }
    }
  }

  const SpaceForm& sf = imm.space_form;
  for (Eigen::Index v = 0; v < nv; ++v) {
    const Eigen::VectorXd x = imm.vertices.row(v).transpose();
    if (sf.constraint_residual(x) > 1e-12 * std::max(1.0, x.squaredNorm()))
      diag.off_model_vertices.push_back(static_cast<int>(v));
  }

  Eigen::MatrixXd metric = Eigen::MatrixXd::Identity(sf.ambient_dim(), sf.ambient_dim());
  if (sf.c == -1) metric(0, 0) = -1.0;
  for (Eigen::Index s = 0; s < imm.simplex_count(); ++s) {
    Eigen::MatrixXd E(sf.ambient_dim(), n);
    for (int i = 0; i < n; ++i)
      E.col(i) = (imm.vertices.row(imm.simplices(s, i + 1)) - imm.vertices.row(imm.simplices(s, 0))).transpose();
    const Eigen::MatrixXd G = E.transpose() * metric * E;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success || G.determinant() <= 0.0)
      diag.degenerate_simplices.push_back(static_cast<int>(s));
  }

  const FaceMap faces = build_face_map(imm.simplices);
  std::vector<std::pair<FaceKey, const std::vector<FaceUse>*>> ordered;
  ordered.reserve(faces.size());
  for (const auto& [key, uses] : faces) ordered.emplace_back(key, &uses);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, uses] : ordered) {
    if (uses->size() == 1) {
      diag.boundary_faces.push_back(key_to_vector(key, n));
    } else if (uses->size() > 2) {
      diag.nonmanifold_faces.push_back(key_to_vector(key, n));
    } else if ((*uses)[0].sign == (*uses)[1].sign) {
      diag.orientation_conflicts.push_back(key_to_vector(key, n));
    }
  }
  return diag;
}

void require_valid(const SimplicialImmersion& imm) {
  const MeshDiagnostics diag = validate_closed_oriented(imm);
  if (!diag.ok()) throw Error("invalid simplicial immersion: " + diag.summary());
}

void orient_consistently(SimplicialImmersion& imm) {
  const Eigen::Index ns = imm.simplex_count();
  FaceMap faces = build_face_map(imm.simplices);
  // simplex -> faces (keys) for traversal
  std::vector<std::vector<FaceKey>> simplex_faces(static_cast<std::size_t>(ns));
  for (Eigen::Index s = 0; s < ns; ++s)
    for (int i = 0; i < imm.simplices.cols(); ++i)
      simplex_faces[static_cast<std::size_t>(s)].push_back(face_of(imm.simplices, s, i).first);

  std::vector<char> visited(static_cast<std::size_t>(ns), 0);
  auto flip = [&](Eigen::Index s) { std::swap(imm.simplices(s, 0), imm.simplices(s, 1)); };
  auto sign_in = [&](Eigen::Index s, const FaceKey& key) {
    for (int i = 0; i < imm.simplices.cols(); ++i) {
      auto [k, sign] = face_of(imm.simplices, s, i);
      if (k == key) return sign;
    }
    return 0;
  };

  for (Eigen::Index root = 0; root < ns; ++root) {
    if (visited[static_cast<std::size_t>(root)]) continue;
    visited[static_cast<std::size_t>(root)] = 1;
    std::deque<Eigen::Index> queue{root};
    while (!queue.empty()) {
      const Eigen::Index s = queue.front();
      queue.pop_front();
      for (const FaceKey& key : simplex_faces[static_cast<std::size_t>(s)]) {
        const auto& uses = faces.at(key);
        if (uses.size() != 2) continue;
        const Eigen::Index t = uses[0].simplex == s ? uses[1].simplex : uses[0].simplex;
        if (visited[static_cast<std::size_t>(t)]) continue;
        if (sign_in(s, key) == sign_in(t, key)) flip(t);
        visited[static_cast<std::size_t>(t)] = 1;
        queue.push_back(t);
      }
    }
  }
}

}  // namespace reilly
