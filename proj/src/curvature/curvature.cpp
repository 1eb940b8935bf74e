#include "reilly/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "reilly/error.hpp"

namespace reilly {

namespace {

struct PointCurvature {
  double H, S, R;
};

PointCurvature constant_sphere(int n, double inv_radius) {
  return {inv_radius, n * inv_radius * inv_radius, n * (n - 1) * inv_radius * inv_radius};
}

// Surface with principal curvatures k1, k2 in a flat ambient space.
PointCurvature from_principal(double k1, double k2) {
  return {std::abs(k1 + k2) / 2.0, k1 * k1 + k2 * k2, 2.0 * k1 * k2};
}

double chordal_sq(const SimplicialImmersion& imm, Eigen::Index a, Eigen::Index b) {
  const Eigen::VectorXd e = (imm.vertices.row(a) - imm.vertices.row(b)).transpose();
  return imm.space_form.inner(e, e);
}

}  // namespace

void refresh_shifted(CurvatureData& cd, int c) {
  cd.shifted = (cd.H.array().square() + static_cast<double>(c)).matrix();
}

CurvatureData analytic_mean_curvature(const SimplicialImmersion& imm) {
  if (!imm.corpus_tag) throw Error("analytic curvature needs a corpus-tagged mesh");
  const CorpusTag& tag = *imm.corpus_tag;
  const auto& P = tag.params;
  const Eigen::Index nv = imm.vertex_count();

  CurvatureData cd;
  cd.source = CurvatureSource::analytic;
  cd.H.resize(nv);
  Eigen::VectorXd S(nv), R(nv);

  auto fill = [&](auto&& at_vertex) {
    for (Eigen::Index v = 0; v < nv; ++v) {
      const PointCurvature k = at_vertex(v);
      cd.H[v] = k.H;
      S[v] = k.S;
      R[v] = k.R;
    }
  };

  if (tag.name == "round_sphere" || tag.name == "round_S3_in_R4") {
    const PointCurvature k = constant_sphere(imm.n, 1.0 / P.at("r"));
    fill([&](Eigen::Index) { return k; });
  } else if (tag.name == "ellipsoid") {
    const Eigen::Vector3d axes(P.at("a"), P.at("b"), P.at("c"));
    const Eigen::Vector3d shift(P.at("shift_x"), P.at("shift_y"), P.at("shift_z"));
    const Eigen::Vector3d D = axes.array().square().inverse();
    const double axes_product_sq = std::pow(axes.prod(), 2);
    fill([&](Eigen::Index v) {
      const Eigen::Vector3d x = imm.vertices.row(v).transpose() - shift;
      const Eigen::Vector3d g = x.cwiseProduct(D);
      const double g2 = g.squaredNorm();
      const double H = (g2 * D.sum() - g.dot(D.cwiseProduct(g))) / (2.0 * std::pow(g2, 1.5));
      const double K = 1.0 / (axes_product_sq * g2 * g2);
      return PointCurvature{H, 4.0 * H * H - 2.0 * K, 2.0 * K};
    });
  } else if (tag.name == "torus_of_revolution") {
    const double major = P.at("R"), tube = P.at("r");
    fill([&](Eigen::Index v) {
      const double rho = std::hypot(imm.vertices(v, 0), imm.vertices(v, 1));
      return from_principal(1.0 / tube, (rho - major) / (tube * rho));
    });
  } else if (tag.name == "clifford_torus") {
    fill([](Eigen::Index) { return PointCurvature{0.0, 2.0, 0.0}; });
  } else if (tag.name == "geodesic_sphere_S3") {
    const double r = P.at("r");
    const double cot = std::cos(r) / std::sin(r);
    const PointCurvature k{std::abs(cot), 2.0 * cot * cot, 2.0 / std::pow(std::sin(r), 2)};
    fill([&](Eigen::Index) { return k; });
  } else if (tag.name == "geodesic_sphere_H3") {
    const double r = P.at("r");
    const double coth = std::cosh(r) / std::sinh(r);
    const PointCurvature k{coth, 2.0 * coth * coth, 2.0 / std::pow(std::sinh(r), 2)};
    fill([&](Eigen::Index) { return k; });
  } else {
    throw Error("no closed-form curvature for corpus shape " + tag.name);
  }
  cd.S = std::move(S);
  cd.R = std::move(R);
  refresh_shifted(cd, imm.space_form.c);
  return cd;
}

CurvatureData estimate_mean_curvature(const SimplicialImmersion& imm, const MetricData& md) {
  if (imm.n != 2 && imm.n != 3) throw Error("curvature estimate needs n = 2 or 3");
  const MeshDiagnostics diag = validate_closed_oriented(imm);
  if (!diag.boundary_faces.empty() || !diag.nonmanifold_faces.empty() || !diag.structural_errors.empty())
    throw Error("curvature estimate needs a closed mesh: " + diag.summary());

  const int n = imm.n;
  const int c = imm.space_form.c;
  const Eigen::Index nv = imm.vertex_count();
  const Eigen::SparseMatrix<double> K = stiffness_matrix(imm, md);
  const Eigen::MatrixXd KX = K * imm.vertices;

  std::vector<std::set<int>> neighbours(static_cast<std::size_t>(nv));
  for (Eigen::Index s = 0; s < imm.simplex_count(); ++s)
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        if (i != j) neighbours[static_cast<std::size_t>(imm.simplices(s, i))].insert(imm.simplices(s, j));

  // Circumcentric dual volume of each vertex star, sum_j -K_vj |e_vj|^2 / (2n).
  // Unlike the barycentric share it makes the estimate exact on inscribed round
  // spheres; it falls back to the barycentric share where the dual cell degenerates.
  Eigen::VectorXd dual(nv);
  for (Eigen::Index v = 0; v < nv; ++v) {
    double m = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, v); it; ++it)
      if (it.row() != v) m -= it.value() * chordal_sq(imm, v, it.row());
    m /= 2.0 * n;
    dual[v] = m > 0.1 * md.vertex_weight[v] ? m : md.vertex_weight[v];
  }

  CurvatureData cd;
  cd.source = CurvatureSource::discrete;
  cd.H.resize(nv);
  for (Eigen::Index v = 0; v < nv; ++v) {
    const Eigen::VectorXd x = imm.vertices.row(v).transpose();
    Eigen::VectorXd laplacian = -KX.row(v).transpose() / dual[v];
    std::vector<Eigen::VectorXd> edges;
    for (int w : neighbours[static_cast<std::size_t>(v)])
      edges.push_back(imm.vertices.row(w).transpose() - x);

    // Express everything in a Euclidean frame of the model's normal space at x.
    if (c == -1) {
      const Eigen::MatrixXd L = boost_to_apex(x);
      laplacian = (L * laplacian).tail(x.size() - 1).eval();
      for (auto& e : edges) e = (L * e).tail(x.size() - 1).eval();
    } else if (c == 1) {
      laplacian -= laplacian.dot(x) * x;
      for (auto& e : edges) e -= e.dot(x) * x;
    }

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(laplacian.size(), laplacian.size());
    for (const auto& e : edges) C += e * e.transpose() / e.squaredNorm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    const Eigen::MatrixXd tangent = eig.eigenvectors().rightCols(n);
    const Eigen::VectorXd normal = laplacian - tangent * (tangent.transpose() * laplacian);
    cd.H[v] = normal.norm() / n;
  }
  refresh_shifted(cd, c);
  return cd;
}

double gauss_check(const CurvatureData& cd, const SpaceForm& sf, int n) {
  if (!cd.S || !cd.R) throw Error("Gauss check needs S and R");
  double worst = 0.0;
  for (Eigen::Index v = 0; v < cd.H.size(); ++v) {
    const double residual = (*cd.R)[v] - n * (n - 1) * sf.c - n * n * cd.H[v] * cd.H[v] + (*cd.S)[v];
    worst = std::max(worst, std::abs(residual));
  }
  return worst;
}

}  // namespace reilly
