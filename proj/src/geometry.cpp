#include "aoalab/geometry.hpp"

#include <cmath>

#include "aoalab/array.hpp"

namespace aoa {

double cylindrical_correction(double theta_deg, const GeometryContext& ctx,
                              bool* clamped) {
  const double d = ctx.distance_m;
  const double dz = ctx.delta_z_m;
  if (d <= 0 || d <= std::abs(dz))
    throw GeometryError("cylindrical_correction: requires d > |delta_z| > 0 geometry");
  double arg = d * std::sin(deg2rad(theta_deg)) / std::sqrt(d * d - dz * dz);
  bool did_clamp = false;
  constexpr double kSlack = 1e-9;
  if (std::abs(arg) > 1.0) {
    if (std::abs(arg) > 1.0 + kSlack) did_clamp = true;
    arg = std::clamp(arg, -1.0, 1.0);
  }
  if (clamped) *clamped = did_clamp;
  return rad2deg(std::asin(arg));
}

GroundTruth ground_truth_angles(const Eigen::Vector3d& gnb,
                                double boresight_azimuth_deg,
                                const Eigen::Vector3d& ue) {
  const Eigen::Vector3d diff = ue - gnb;
  const double d = diff.norm();
  if (d < 1e-9) throw GeometryError("ground_truth_angles: UE coincides with the gNB");

  const double a = deg2rad(boresight_azimuth_deg);
  const Eigen::Vector3d normal{std::cos(a), std::sin(a), 0.0};
  const Eigen::Vector3d axis{-std::sin(a), std::cos(a), 0.0};

  GroundTruth gt;
  gt.distance_m = d;
  gt.delta_z_m = gnb.z() - ue.z();
  gt.theta_raw_deg = rad2deg(std::asin(std::clamp(diff.dot(axis) / d, -1.0, 1.0)));
  gt.theta_xy_deg = rad2deg(std::atan2(diff.dot(axis), diff.dot(normal)));
  return gt;
}

}  // namespace aoa
