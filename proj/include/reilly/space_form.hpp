#pragma once

#include <Eigen/Core>

namespace reilly {

/// Simply connected model space of constant sectional curvature `c`.
///
/// Points are stored in ambient coordinates:
///   c =  0 : Cartesian R^N,
///   c = +1 : the unit sphere in R^{N+1},
///   c = -1 : the upper sheet <x,x> = -1, x^0 > 0, of the hyperboloid in
///            Minkowski space R^{N,1}; index 0 is the time coordinate.
struct SpaceForm {
  int c = 0;
  int N = 3;

  SpaceForm() = default;
  SpaceForm(int curvature, int dimension);

  int ambient_dim() const { return c == 0 ? N : N + 1; }

  /// Ambient bilinear form: Euclidean for c = 0, 1 and Minkowski
  /// (-,+,...,+) for c = -1.
  double inner(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b) const;

  /// Absolute violation of the model constraint at x (0 for c = 0).
  double constraint_residual(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Nearest-point style re-projection onto the model. For c = -1 the spatial
  /// part is kept and the time coordinate recomputed.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  bool operator==(const SpaceForm&) const = default;
};

/// Lorentz transformation of R^{N,1} mapping the hyperboloid point x to the
/// apex (1, 0, ..., 0).
Eigen::MatrixXd boost_to_apex(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Lorentz boost with the given rapidity along a unit spatial direction.
Eigen::MatrixXd lorentz_boost(const Eigen::Ref<const Eigen::VectorXd>& spatial_direction,
                              double rapidity);

}  // namespace reilly
