#include "reilly/space_form.hpp"

#include <cmath>
#include <string>

#include "reilly/error.hpp"

namespace reilly {

SpaceForm::SpaceForm(int curvature, int dimension) : c(curvature), N(dimension) {
  if (c < -1 || c > 1) throw Error("space form curvature must be -1, 0 or 1, got " + std::to_string(c));
  if (N < 2) throw Error("space form dimension must be at least 2, got " + std::to_string(N));
}

double SpaceForm::inner(const Eigen::Ref<const Eigen::VectorXd>& a,
                        const Eigen::Ref<const Eigen::VectorXd>& b) const {
  double s = a.dot(b);
  if (c == -1) s -= 2.0 * a[0] * b[0];
  return s;
}

double SpaceForm::constraint_residual(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  switch (c) {
    case 1:
      return std::abs(x.norm() - 1.0);
    case -1: {
      if (x[0] <= 0.0) return std::abs(x[0]) + 1.0;
      return std::abs(inner(x, x) + 1.0);
    }
    default:
      return 0.0;
  }
}

Eigen::VectorXd SpaceForm::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd y = x;
  if (c == 1) {
    y /= x.norm();
  } else if (c == -1) {
    y[0] = std::sqrt(1.0 + x.tail(x.size() - 1).squaredNorm());
  }
  return y;
}

Eigen::MatrixXd boost_to_apex(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index d = x.size();
  const double gamma = x[0];
  const Eigen::VectorXd spatial = x.tail(d - 1);
  Eigen::MatrixXd L(d, d);
  L(0, 0) = gamma;
  L.block(0, 1, 1, d - 1) = -spatial.transpose();
  L.block(1, 0, d - 1, 1) = -spatial;
  L.block(1, 1, d - 1, d - 1) =
      Eigen::MatrixXd::Identity(d - 1, d - 1) + spatial * spatial.transpose() / (1.0 + gamma);
  return L;
}

Eigen::MatrixXd lorentz_boost(const Eigen::Ref<const Eigen::VectorXd>& spatial_direction,
                              double rapidity) {
  const Eigen::Index d = spatial_direction.size() + 1;
  const Eigen::VectorXd u = spatial_direction.normalized();
  const double ch = std::cosh(rapidity);
  const double sh = std::sinh(rapidity);
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(d, d);
  L(0, 0) = ch;
  L.block(0, 1, 1, d - 1) = sh * u.transpose();
  L.block(1, 0, d - 1, 1) = sh * u;
  L.block(1, 1, d - 1, d - 1) += (ch - 1.0) * u * u.transpose();
  return L;
}

}  // namespace reilly
