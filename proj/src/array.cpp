#include "aoalab/array.hpp"

#include <cmath>

namespace aoa {

double spatial_frequency(const UlaConfig& cfg, double theta_deg) {
  cfg.validate();
  if (theta_deg < -90.0 || theta_deg > 90.0)
    throw std::domain_error("spatial_frequency: theta must be in [-90, 90] degrees");
  return -(2.0 * kPi / cfg.wavelength_m()) * cfg.spacing_m * std::sin(deg2rad(theta_deg));
}

Eigen::VectorXcd steering_vector(const UlaConfig& cfg, double theta_deg) {
  const double mu = spatial_frequency(cfg, theta_deg);
  Eigen::VectorXcd a(cfg.num_elements);
  for (int m = 0; m < cfg.num_elements; ++m)
    a(m) = std::polar(1.0, m * mu);
  return a;
}

double angle_from_spatial_frequency(const UlaConfig& cfg, double mu, int k) {
  cfg.validate();
  if (k < 1) throw std::invalid_argument("angle_from_spatial_frequency: k must be >= 1");
  double arg = -cfg.wavelength_m() * mu / (2.0 * kPi * k * cfg.spacing_m);
  constexpr double kSlack = 1e-9;
  if (std::abs(arg) > 1.0 + kSlack)
    throw EstimationRangeError("angle_from_spatial_frequency: spatial frequency outside the visible region");
  arg = std::clamp(arg, -1.0, 1.0);
  return rad2deg(std::asin(arg));
}

}  // namespace aoa
