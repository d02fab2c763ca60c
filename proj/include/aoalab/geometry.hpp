#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace aoa {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Range and vertical offset between the array and the UE, the inputs of
// the plane correction.
struct GeometryContext {
  double distance_m = 0;  // 3-D ULA-UE distance d
  double delta_z_m = 0;   // array height - UE height
};

// True angles for a UE position, used to score estimates.
struct GroundTruth {
  double theta_raw_deg = 0;  // angle in the ULA-UE plane
  double theta_xy_deg = 0;   // top-view azimuth relative to boresight
  double distance_m = 0;
  double delta_z_m = 0;
  bool is_nlos = false;
};

// theta_xy = arcsin(d*sin(theta) / sqrt(d^2 - dz^2)). Arguments slightly
// past the arcsine domain (within 1e-9) are clamped; `clamped`, when
// non-null, reports whether clamping occurred.
double cylindrical_correction(double theta_deg, const GeometryContext& ctx,
                              bool* clamped = nullptr);

// Ground-truth raw and top-view angles of `ue` as seen from a ULA at
// `gnb` with the given boresight azimuth (degrees, XY plane).
GroundTruth ground_truth_angles(const Eigen::Vector3d& gnb,
                                double boresight_azimuth_deg,
                                const Eigen::Vector3d& ue);

}  // namespace aoa
