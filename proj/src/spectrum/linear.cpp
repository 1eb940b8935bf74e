#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "reilly/error.hpp"
#include "reilly/spectrum.hpp"

namespace reilly {

namespace {

constexpr int kBlock = 8;
constexpr int kMaxIterations = 1000;
constexpr double kClusterTol = 1e-3;

void deflate_constants(Eigen::MatrixXd& X, const Eigen::VectorXd& mass) {
  const double total = mass.sum();
  for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j).array() -= mass.dot(X.col(j)) / total;
}

}  // namespace

SpectralResult linear_eigensolve(const SimplicialImmersion& imm, const MetricData& md) {
  const Eigen::Index nv = imm.vertex_count();
  if (nv < 3) throw Error("linear eigensolve needs at least 3 vertices");
  const Eigen::VectorXd& mass = md.vertex_weight;
  const Eigen::SparseMatrix<double> K = stiffness_matrix(imm, md);
  const double sigma = 1e-3 * K.diagonal().sum() / mass.sum();
  Eigen::SparseMatrix<double> A = K;
  for (Eigen::Index v = 0; v < nv; ++v) A.coeffRef(v, v) += sigma * mass[v];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw Error("shifted operator is singular; inverse iteration broke down");

  const Eigen::Index block = std::min<Eigen::Index>(kBlock, nv - 1);
  Eigen::MatrixXd X(nv, block);
  Eigen::Index filled = 0;
  for (Eigen::Index k = 0; k < imm.vertices.cols() && filled < block; ++k) {
    const Eigen::VectorXd coord = imm.vertices.col(k);
    if (coord.maxCoeff() - coord.minCoeff() > 1e-9 * std::max(1.0, coord.cwiseAbs().maxCoeff()))
      X.col(filled++) = coord;
  }
  std::mt19937_64 rng(0x5EEDull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (; filled < block; ++filled)
    for (Eigen::Index v = 0; v < nv; ++v) X(v, filled) = unit(rng);
  deflate_constants(X, mass);

  Eigen::VectorXd theta;
  const Eigen::Index watched = std::max<Eigen::Index>(1, std::min<Eigen::Index>(4, block - 2));
  int iterations = 0;
  bool converged = false;
  for (; iterations < kMaxIterations && !converged; ++iterations) {
    Eigen::MatrixXd Y = solver.solve(mass.asDiagonal() * X);
    if (solver.info() != Eigen::Success) throw Error("inverse iteration solve failed");
    deflate_constants(Y, mass);
    const Eigen::MatrixXd KY = K * Y;
    Eigen::MatrixXd Kr = Y.transpose() * KY;
    Eigen::MatrixXd Mr = Y.transpose() * mass.asDiagonal() * Y;
    Kr = 0.5 * (Kr + Kr.transpose()).eval();
    Mr = 0.5 * (Mr + Mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Kr, Mr);
    if (ritz.info() != Eigen::Success) throw Error("Rayleigh-Ritz step failed");
    theta = ritz.eigenvalues();
    X = Y * ritz.eigenvectors();
    const Eigen::MatrixXd KX = KY * ritz.eigenvectors();

    converged = true;
    for (Eigen::Index j = 0; j < watched; ++j) {
      const Eigen::VectorXd r = KX.col(j) - theta[j] * (mass.asDiagonal() * X.col(j));
      const double res = std::sqrt(r.dot(mass.cwiseInverse().asDiagonal() * r));
      if (!(res <= 1e-10 * std::abs(theta[j]))) converged = false;
    }
  }

  SpectralResult result;
  result.p = 2.0;
  result.method = "linear_eigensolve";
  result.iterations = iterations;
  result.restarts_used = 1;
  result.converged = converged;
  ScalarField u = X.col(0);
  u /= std::sqrt(u.dot(mass.asDiagonal() * u));
  result.eigenfunction = u;
  result.lambda = rayleigh_quotient(u, imm, md, 2.0);
  result.restart_values = {result.lambda};
  result.restart_converged = {converged};
  for (Eigen::Index j = 0; j < theta.size() - 1; ++j) result.leading_values.push_back(theta[j]);
  result.cluster_multiplicity = 0;
  for (double t : result.leading_values)
    if (t - theta[0] <= kClusterTol * theta[0]) ++result.cluster_multiplicity;
  return result;
}

}  // namespace reilly
