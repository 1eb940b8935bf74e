#include "reilly/metric.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include "reilly/error.hpp"

namespace reilly {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

Eigen::MatrixXd edge_vectors(const SimplicialImmersion& imm, Eigen::Index s) {
  const int n = imm.n;
  Eigen::MatrixXd E(imm.vertices.cols(), n);
  const auto x0 = imm.vertices.row(imm.simplices(s, 0));
  for (int i = 0; i < n; ++i) E.col(i) = (imm.vertices.row(imm.simplices(s, i + 1)) - x0).transpose();
  return E;
}

MetricData induced_metric(const SimplicialImmersion& imm) {
  const int n = imm.n;
  const Eigen::Index ns = imm.simplex_count();
  MetricData md;
  md.n = n;
  md.gram.resize(static_cast<std::size_t>(ns));
  md.gram_inverse.resize(static_cast<std::size_t>(ns));
  md.simplex_volume.resize(ns);
  md.vertex_weight = Eigen::VectorXd::Zero(imm.vertex_count());
  const bool minkowski = imm.space_form.c == -1;
  const double nfact = factorial(n);

  for (Eigen::Index s = 0; s < ns; ++s) {
    Eigen::MatrixXd E = edge_vectors(imm, s);
    Eigen::MatrixXd JE = E;
    if (minkowski) JE.row(0) *= -1.0;
    SmallMatrix G = E.transpose() * JE;
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::LLT<SmallMatrix> llt(G);
    if (llt.info() != Eigen::Success)
      throw Error("induced Gram matrix of simplex " + std::to_string(s) + " is not positive definite");
    const double det = G.determinant();
    if (!(det > 0.0)) throw Error("degenerate simplex " + std::to_string(s));
    const double vol = std::sqrt(det) / nfact;
    md.gram[static_cast<std::size_t>(s)] = G;
    md.gram_inverse[static_cast<std::size_t>(s)] = llt.solve(SmallMatrix::Identity(n, n));
    md.simplex_volume[s] = vol;
    for (int i = 0; i <= n; ++i) md.vertex_weight[imm.simplices(s, i)] += vol / (n + 1);
  }
  md.total_volume = md.simplex_volume.sum();
  return md;
}

double volume(const MetricData& md) { return md.total_volume; }

Eigen::SparseMatrix<double> stiffness_matrix(const SimplicialImmersion& imm, const MetricData& md) {
  const int n = imm.n;
  const Eigen::Index ns = imm.simplex_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(ns * (n + 1) * (n + 1)));
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n + 1);
  D.col(0).setConstant(-1.0);
  D.rightCols(n) = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index s = 0; s < ns; ++s) {
    const Eigen::MatrixXd local =
        md.simplex_volume[s] * D.transpose() * md.gram_inverse[static_cast<std::size_t>(s)] * D;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        triplets.emplace_back(imm.simplices(s, i), imm.simplices(s, j), local(i, j));
  }
  Eigen::SparseMatrix<double> K(imm.vertex_count(), imm.vertex_count());
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

}  // namespace reilly
