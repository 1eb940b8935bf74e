#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reilly/immersion.hpp"

namespace reilly {

/// One analytic shape the lab can mesh.
struct CorpusEntry {
  std::string name;
  std::string description;
  ShapeParams defaults;
  std::string resolution_meaning;
  int default_resolution = 0;
};

const std::vector<CorpusEntry>& corpus_entries();
const CorpusEntry& corpus_entry(const std::string& name);
std::string corpus_names();

/// `params` overrides the entry defaults; unknown keys are rejected.
ShapeParams resolve_params(const CorpusEntry& entry, const ShapeParams& params);

/// Deterministically meshes a corpus shape. Vertices are placed on the
/// analytic surface (re-projected onto the model to 1e-12) and the simplices
/// consistently oriented.
SimplicialImmersion build_corpus_immersion(const std::string& name,
                                           const ShapeParams& params = {},
                                           std::optional<int> resolution = std::nullopt);

/// Intrinsic dimension n of the shape with the given parameters.
int corpus_dimension(const std::string& name, const ShapeParams& params = {});

/// Radius of the geodesic sphere the shape is minimal in, when the shape is
/// a known equality case of the Reilly inequality.
std::optional<double> expected_equality_radius(const CorpusTag& tag, int c);

/// Icosahedron refined `level` times, projected to the unit sphere in R^3.
/// Centrally symmetric: the antipode of every vertex is exactly its negation.
void unit_icosphere(int level, Eigen::MatrixXd& vertices, Eigen::MatrixXi& triangles);

}  // namespace reilly
