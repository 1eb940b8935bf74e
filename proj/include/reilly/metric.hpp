#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "reilly/immersion.hpp"

namespace reilly {

/// At most 3x3 (n <= 3), stored inline.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

/// Induced (chordal) metric of a simplicial immersion.
struct MetricData {
  int n = 2;
  std::vector<SmallMatrix> gram;          ///< edge-vector Gram matrix per simplex
  std::vector<SmallMatrix> gram_inverse;
  Eigen::VectorXd simplex_volume;
  Eigen::VectorXd vertex_weight;          ///< lumped mass, 1/(n+1) of each adjacent simplex
  double total_volume = 0.0;
};

/// Gram matrices of the edge vectors x_i - x_0 under the ambient bilinear
/// form. Throws reilly::Error on a non positive definite Gram matrix.
MetricData induced_metric(const SimplicialImmersion& imm);

double volume(const MetricData& md);

/// Edge vectors (columns) of simplex `s`, in ambient coordinates.
Eigen::MatrixXd edge_vectors(const SimplicialImmersion& imm, Eigen::Index s);

/// P1 stiffness matrix sum_s vol_s D^T G_s^{-1} D, D = [-1 | I].
/// Symmetric positive semidefinite with the constants in its kernel.
Eigen::SparseMatrix<double> stiffness_matrix(const SimplicialImmersion& imm,
                                             const MetricData& md);

}  // namespace reilly
