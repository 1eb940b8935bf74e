#include "reilly/mesh_io.hpp"

#include <fstream>

#include "reilly/error.hpp"

namespace reilly {

using nlohmann::json;

json mesh_to_json(const SimplicialImmersion& imm, const CurvatureData* curvature) {
  json j;
  j["model"] = {{"c", imm.space_form.c}, {"N", imm.space_form.N}};
  j["n"] = imm.n;
  json vertices = json::array();
  for (Eigen::Index v = 0; v < imm.vertex_count(); ++v) {
    json row = json::array();
    for (Eigen::Index k = 0; k < imm.vertices.cols(); ++k) row.push_back(imm.vertices(v, k));
    vertices.push_back(std::move(row));
  }
  j["vertices"] = std::move(vertices);
  json simplices = json::array();
  for (Eigen::Index s = 0; s < imm.simplex_count(); ++s) {
    json row = json::array();
    for (Eigen::Index k = 0; k < imm.simplices.cols(); ++k) row.push_back(imm.simplices(s, k));
    simplices.push_back(std::move(row));
  }
  j["simplices"] = std::move(simplices);
  if (curvature) {
    json analytic;
    analytic["name"] = imm.corpus_tag ? imm.corpus_tag->name : std::string("custom");
    analytic["H"] = std::vector<double>(curvature->H.data(), curvature->H.data() + curvature->H.size());
    if (curvature->S)
      analytic["S"] = std::vector<double>(curvature->S->data(), curvature->S->data() + curvature->S->size());
    json params = json::object();
    if (imm.corpus_tag) {
      for (const auto& [k, v] : imm.corpus_tag->params) params[k] = v;
      params["resolution"] = imm.corpus_tag->resolution;
    }
    analytic["params"] = std::move(params);
    j["analytic"] = std::move(analytic);
  }
  return j;
}

LoadedMesh mesh_from_json(const json& j) {
  LoadedMesh out;
  SimplicialImmersion& imm = out.immersion;
  try {
    imm.space_form = SpaceForm(j.at("model").at("c").get<int>(), j.at("model").at("N").get<int>());
    imm.n = j.at("n").get<int>();
    const auto& vertices = j.at("vertices");
    const auto& simplices = j.at("simplices");
    const Eigen::Index dim = imm.space_form.ambient_dim();
    imm.vertices.resize(static_cast<Eigen::Index>(vertices.size()), dim);
    for (std::size_t v = 0; v < vertices.size(); ++v) {
      if (static_cast<Eigen::Index>(vertices[v].size()) != dim)
        throw Error("vertex " + std::to_string(v) + " has the wrong number of coordinates");
      for (Eigen::Index k = 0; k < dim; ++k)
        imm.vertices(static_cast<Eigen::Index>(v), k) = vertices[v][static_cast<std::size_t>(k)].get<double>();
    }
    imm.simplices.resize(static_cast<Eigen::Index>(simplices.size()), imm.n + 1);
    for (std::size_t s = 0; s < simplices.size(); ++s) {
      if (static_cast<int>(simplices[s].size()) != imm.n + 1)
        throw Error("simplex " + std::to_string(s) + " must list n+1 vertices");
      for (int k = 0; k <= imm.n; ++k)
        imm.simplices(static_cast<Eigen::Index>(s), k) = simplices[s][static_cast<std::size_t>(k)].get<int>();
    }
    if (j.contains("analytic")) {
      const auto& a = j.at("analytic");
      CurvatureData cd;
      cd.source = CurvatureSource::analytic;
      const auto H = a.at("H").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(H.size()) != imm.vertex_count())
        throw Error("analytic H must have one value per vertex");
      cd.H = Eigen::Map<const Eigen::VectorXd>(H.data(), static_cast<Eigen::Index>(H.size()));
      if (a.contains("S")) {
        const auto S = a.at("S").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(S.size()) != imm.vertex_count())
          throw Error("analytic S must have one value per vertex");
        cd.S = Eigen::Map<const Eigen::VectorXd>(S.data(), static_cast<Eigen::Index>(S.size()));
      }
      refresh_shifted(cd, imm.space_form.c);
      CorpusTag tag;
      tag.name = a.value("name", std::string("custom"));
      if (a.contains("params")) {
        for (const auto& [k, v] : a.at("params").items()) {
          if (k == "resolution") tag.resolution = v.get<int>();
          else if (v.is_number()) tag.params[k] = v.get<double>();
        }
      }
      imm.corpus_tag = std::move(tag);
      out.analytic = std::move(cd);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed mesh JSON: ") + e.what());
  }
  return out;
}

void write_mesh_file(const std::filesystem::path& path, const SimplicialImmersion& imm,
                     const CurvatureData* curvature) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << mesh_to_json(imm, curvature).dump() << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

LoadedMesh read_mesh_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("cannot parse " + path.string() + ": " + e.what());
  }
  return mesh_from_json(j);
}

}  // namespace reilly
