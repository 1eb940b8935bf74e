#pragma once

#include <optional>

#include <Eigen/Core>

#include "reilly/immersion.hpp"
#include "reilly/metric.hpp"

namespace reilly {

enum class CurvatureSource { analytic, discrete };

/// Per-vertex extrinsic curvature. `H` is the magnitude of the mean curvature
/// vector (trace of the second fundamental form over n); `shifted` is c + H^2.
struct CurvatureData {
  Eigen::VectorXd H;
  Eigen::VectorXd shifted;
  std::optional<Eigen::VectorXd> S;  ///< squared norm of the second fundamental form
  std::optional<Eigen::VectorXd> R;  ///< scalar curvature of the induced metric
  CurvatureSource source = CurvatureSource::analytic;
};

/// Closed-form curvature of a corpus mesh, evaluated at its vertices.
/// Throws reilly::Error when the mesh carries no corpus tag with a known
/// formula.
CurvatureData analytic_mean_curvature(const SimplicialImmersion& imm);

/// Discrete |H| from the stiffness/lumped-mass Laplacian of the ambient
/// coordinates, with the position (model normal) and estimated tangent
/// components removed. Requires a closed mesh.
CurvatureData estimate_mean_curvature(const SimplicialImmersion& imm, const MetricData& md);

/// max_v |R - n(n-1)c - n^2 H^2 + S|. Requires S and R.
double gauss_check(const CurvatureData& cd, const SpaceForm& sf, int n);

/// Rebuilds `shifted` from H for curvature constant c.
void refresh_shifted(CurvatureData& cd, int c);

}  // namespace reilly
