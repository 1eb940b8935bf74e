#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"

#include "reilly/curvature.hpp"
#include "reilly/immersion.hpp"

namespace reilly {

/// Mesh JSON:
///   { "model": {"c": int, "N": int}, "n": int,
///     "vertices": [[...], ...], "simplices": [[...], ...],
///     "analytic": {"name": str, "H": [...], "S": [...], "params": {...}} }
/// `analytic` is written only when curvature is supplied.
nlohmann::json mesh_to_json(const SimplicialImmersion& imm, const CurvatureData* curvature = nullptr);

struct LoadedMesh {
  SimplicialImmersion immersion;
  std::optional<CurvatureData> analytic;  ///< from the "analytic" block, if any
};

/// Throws reilly::Error on schema violations.
LoadedMesh mesh_from_json(const nlohmann::json& j);

void write_mesh_file(const std::filesystem::path& path, const SimplicialImmersion& imm,
                     const CurvatureData* curvature = nullptr);
LoadedMesh read_mesh_file(const std::filesystem::path& path);

}  // namespace reilly
