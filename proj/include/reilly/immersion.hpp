#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reilly/space_form.hpp"

namespace reilly {

using ShapeParams = std::map<std::string, double>;

/// Name and parameters of the analytic surface a mesh was sampled from.
struct CorpusTag {
  std::string name;
  ShapeParams params;
  int resolution = 0;
};

/// Closed, oriented simplicial n-manifold (n = 2 or 3) whose vertices live in
/// a space form. Row i of `vertices` holds the ambient coordinates of vertex
/// i; row j of `simplices` the n+1 vertex indices of simplex j.
struct SimplicialImmersion {
  SpaceForm space_form;
  int n = 2;
  Eigen::MatrixXd vertices;
  Eigen::MatrixXi simplices;
  std::optional<CorpusTag> corpus_tag;

  Eigen::Index vertex_count() const { return vertices.rows(); }
  Eigen::Index simplex_count() const { return simplices.rows(); }
};

/// Result of `validate_closed_oriented`. Empty lists mean the mesh satisfies
/// every structural invariant.
struct MeshDiagnostics {
  std::vector<std::vector<int>> boundary_faces;
  std::vector<std::vector<int>> nonmanifold_faces;
  std::vector<std::vector<int>> orientation_conflicts;
  std::vector<int> degenerate_simplices;
  std::vector<int> off_model_vertices;
  std::vector<std::string> structural_errors;

  bool ok() const {
    return boundary_faces.empty() && nonmanifold_faces.empty() &&
           orientation_conflicts.empty() && degenerate_simplices.empty() &&
           off_model_vertices.empty() && structural_errors.empty();
  }
  std::string summary() const;
};

MeshDiagnostics validate_closed_oriented(const SimplicialImmersion& imm);

/// Throws reilly::Error with the diagnostics summary unless the mesh is valid.
void require_valid(const SimplicialImmersion& imm);

/// Flips simplices so that neighbouring simplices induce opposite
/// orientations on shared faces. Deterministic (breadth-first from simplex 0
/// of each connected component).
void orient_consistently(SimplicialImmersion& imm);

}  // namespace reilly
