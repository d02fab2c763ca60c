#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace aoa {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wrap an angle to [-180, 180) degrees.
inline double wrap_deg(double d) {
  d = std::fmod(d + 180.0, 360.0);
  if (d < 0) d += 360.0;
  return d - 180.0;
}

// Thrown when a spatial frequency maps outside the visible region
// (aliasing / ambiguity beyond the arcsine domain).
struct EstimationRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform linear array along one horizontal axis. Elements sit at
// origin + m * spacing_m * axis(), m = 0..M-1. The boresight azimuth is
// the direction of the array normal in the XY plane (degrees, 0 = +x).
struct UlaConfig {
  int num_elements = 4;
  double carrier_hz = 3.95e9;
  double spacing_m = 0.5 * kSpeedOfLight / 3.95e9;  // lambda/2 default
  Eigen::Vector3d origin{0.0, 0.0, 8.0};
  double boresight_azimuth_deg = 0.0;

  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
  double height_m() const { return origin.z(); }

  // Unit normal of the array in the XY plane.
  Eigen::Vector3d boresight() const {
    const double a = deg2rad(boresight_azimuth_deg);
    return {std::cos(a), std::sin(a), 0.0};
  }
  // Unit vector along the element axis; positive theta points this way.
  Eigen::Vector3d axis() const {
    const double a = deg2rad(boresight_azimuth_deg);
    return {-std::sin(a), std::cos(a), 0.0};
  }

  void validate() const {
    if (num_elements < 2) throw std::invalid_argument("UlaConfig: num_elements must be >= 2");
    if (spacing_m <= 0) throw std::invalid_argument("UlaConfig: spacing_m must be > 0");
    if (carrier_hz <= 0) throw std::invalid_argument("UlaConfig: carrier_hz must be > 0");
  }
};

// mu = -(2*pi/lambda) * spacing * sin(theta), theta in degrees.
double spatial_frequency(const UlaConfig& cfg, double theta_deg);

// a(theta) = [1, e^{j mu}, ..., e^{j (M-1) mu}]^T
Eigen::VectorXcd steering_vector(const UlaConfig& cfg, double theta_deg);

// theta = arcsin(-lambda * mu / (2*pi*k*spacing)), degrees. Arguments up to
// 1 + 1e-9 past the arcsine domain are clamped; beyond that an
// EstimationRangeError is thrown.
double angle_from_spatial_frequency(const UlaConfig& cfg, double mu, int k = 1);

}  // namespace aoa
