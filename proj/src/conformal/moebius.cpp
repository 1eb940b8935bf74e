#include <cmath>
#include <limits>

#include "reilly/conformal.hpp"
#include "reilly/error.hpp"

namespace reilly {

MoebiusParam::MoebiusParam(Eigen::VectorXd ball_point) : b_(std::move(ball_point)) {
  if (!b_.allFinite() || !(b_.norm() < 1.0))
    throw Error("Moebius ball point must lie in the open unit ball");
}

MoebiusParam MoebiusParam::identity(int dim) { return MoebiusParam(Eigen::VectorXd::Zero(dim)); }

MoebiusParam MoebiusParam::from_pole_time(const Eigen::VectorXd& pole, double time) {
  if (!(time >= 0.0)) throw Error("Moebius flow time must be non-negative");
  if (std::abs(pole.norm() - 1.0) > 1e-12) throw Error("Moebius pole must be a unit vector");
  return MoebiusParam(-std::expm1(-time) * pole.normalized());
}

Eigen::VectorXd MoebiusParam::pole() const {
  const double r = b_.norm();
  return r > 0.0 ? Eigen::VectorXd(b_ / r) : Eigen::VectorXd::Zero(b_.size());
}

double MoebiusParam::time() const { return -std::log1p(-b_.norm()); }

double moebius_log_factor(const MoebiusParam& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (m.is_identity()) return 0.0;
  const Eigen::VectorXd a = m.pole();
  const double s = m.stretch();
  const double tau = x.dot(a);
  return std::log(2.0 * s / (s * s * (1.0 + tau) + (1.0 - tau)));
}

SpherePoints moebius_apply(const MoebiusParam& m, const Eigen::MatrixXd& points) {
  if (points.cols() != m.dim()) throw Error("Moebius parameter and points differ in dimension");
  SpherePoints out;
  out.points = points;
  out.log_factor = Eigen::VectorXd::Zero(points.rows());
  if (m.is_identity()) return out;

  const Eigen::VectorXd a = m.pole();
  const double s = m.stretch();
  for (Eigen::Index v = 0; v < points.rows(); ++v) {
    const Eigen::VectorXd x = points.row(v).transpose();
    if ((x - a).norm() < 1e-12) throw Error("point coincides with the Moebius pole");
    // pi_a^{-1}(s pi_a(x)) with the (1 - <x,a>) denominators cleared.
    const double tau = x.dot(a);
    const double denom = s * s * (1.0 + tau) + (1.0 - tau);
    Eigen::VectorXd y = (2.0 * s * (x - tau * a) + (s * s * (1.0 + tau) - (1.0 - tau)) * a) / denom;
    y.normalize();
    out.points.row(v) = y.transpose();
    out.log_factor[v] = std::log(2.0 * s / denom);
  }
  return out;
}

SpherePoints to_sphere(const SimplicialImmersion& imm) {
  const SpaceForm& sf = imm.space_form;
  const Eigen::Index nv = imm.vertex_count();
  SpherePoints out;
  out.log_factor = Eigen::VectorXd::Zero(nv);
  if (sf.c == 1) {
    out.points = imm.vertices;
    return out;
  }
  out.points.resize(nv, sf.N + 1);
  for (Eigen::Index v = 0; v < nv; ++v) {
    if (sf.c == 0) {
      // inverse stereographic projection, origin -> south pole
      const Eigen::VectorXd x = imm.vertices.row(v).transpose();
      const double r2 = x.squaredNorm();
      out.points.row(v).head(sf.N) = (2.0 * x / (1.0 + r2)).transpose();
      out.points(v, sf.N) = (r2 - 1.0) / (r2 + 1.0);
      out.log_factor[v] = std::log(2.0 / (1.0 + r2));
    } else {
      // Poincare ball point y = x_s / (1 + x_0) followed by inverse
      // stereographic projection; both steps collapse to (x_s, -1) / x_0
      // with factor 1 / x_0.
      const double x0 = imm.vertices(v, 0);
      out.points.row(v).head(sf.N) = imm.vertices.row(v).tail(sf.N) / x0;
      out.points(v, sf.N) = -1.0 / x0;
      out.log_factor[v] = -std::log(x0);
    }
    out.points.row(v).normalize();
  }
  return out;
}

}  // namespace reilly
