#include <doctest.h>

#include "aoalab/geometry.hpp"
#include "aoalab/rng.hpp"

using namespace aoa;

TEST_CASE("cylindrical correction is the identity at zero height offset") {
  CHECK(cylindrical_correction(25.0, {10.0, 0.0}) == doctest::Approx(25.0));
  CHECK(cylindrical_correction(0.0, {7.3, 2.1}) == doctest::Approx(0.0));
}

TEST_CASE("cylindrical correction hand-derived example") {
  // d = 10, dz = 6, theta = 30 -> arcsin(10 * 0.5 / 8) = arcsin(0.625)
  const double expect = rad2deg(std::asin(0.625));
  CHECK(std::abs(cylindrical_correction(30.0, {10.0, 6.0}) - expect) < 1e-9);
  // cross-check by direct 3-D construction: a UE whose raw angle is 30 deg
  // at distance 10 with a 6 m height offset
  const Eigen::Vector3d gnb{0, 0, 7.5};
  const double sin_raw = std::sin(deg2rad(30.0));
  const double y = 10.0 * sin_raw;                       // along the array axis
  const double x = std::sqrt(100.0 - y * y - 36.0);      // along boresight
  const Eigen::Vector3d ue{x, y, 1.5};
  const auto gt = ground_truth_angles(gnb, 0.0, ue);
  CHECK(gt.theta_raw_deg == doctest::Approx(30.0));
  CHECK(gt.theta_xy_deg == doctest::Approx(expect));
}

TEST_CASE("cylindrical correction is odd and monotone, and never shrinks the angle") {
  const GeometryContext ctx{12.0, 4.0};
  double prev = -100.0;
  for (double t = -60.0; t <= 60.0; t += 1.0) {
    const double c = cylindrical_correction(t, ctx);
    CHECK(c > prev);
    prev = c;
    CHECK(std::abs(c) >= std::abs(t) - 1e-12);
    CHECK(cylindrical_correction(-t, ctx) == doctest::Approx(-c));
  }
}

TEST_CASE("cylindrical correction domain errors and clamping") {
  CHECK_THROWS_AS(cylindrical_correction(10.0, {5.0, 5.0}), GeometryError);
  CHECK_THROWS_AS(cylindrical_correction(10.0, {4.0, 5.0}), GeometryError);
  bool clamped = false;
  // argument pushed past 1: d sin(80)/sqrt(d^2-dz^2) > 1
  const double out = cylindrical_correction(80.0, {10.0, 6.0}, &clamped);
  CHECK(out == doctest::Approx(90.0));
  CHECK(clamped);
}

TEST_CASE("ground truth angles: boresight and coplanar cases") {
  const Eigen::Vector3d gnb{0, 0, 1.5};
  const auto on_boresight = ground_truth_angles(gnb, 0.0, {20, 0, 1.5});
  CHECK(on_boresight.theta_raw_deg == doctest::Approx(0.0));
  CHECK(on_boresight.theta_xy_deg == doctest::Approx(0.0));

  const auto at45 = ground_truth_angles(gnb, 0.0, {10, 10, 1.5});
  CHECK(at45.theta_raw_deg == doctest::Approx(45.0));
  CHECK(at45.theta_xy_deg == doctest::Approx(45.0));

  CHECK_THROWS_AS(ground_truth_angles(gnb, 0.0, gnb), GeometryError);
}

TEST_CASE("correction round-trips the ground-truth raw angle to the top view") {
  Rng rng(11);
  const Eigen::Vector3d gnb{0, 0, 8.0};
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const double bearing = rng.uniform(-80.0, 80.0);
    const double range = rng.uniform(8.0, 300.0);
    const Eigen::Vector3d ue{range * std::cos(deg2rad(bearing)),
                             range * std::sin(deg2rad(bearing)), 1.5};
    const auto gt = ground_truth_angles(gnb, 0.0, ue);
    if (gt.distance_m <= std::abs(gt.delta_z_m)) continue;
    const double xy = cylindrical_correction(gt.theta_raw_deg, {gt.distance_m, gt.delta_z_m});
    CHECK(std::abs(xy - gt.theta_xy_deg) < 1e-9);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("ground truth respects a rotated boresight") {
  const Eigen::Vector3d gnb{5, 5, 8};
  // boresight +y; UE straight up the y axis from the gNB
  const auto gt = ground_truth_angles(gnb, 90.0, {5, 30, 1.5});
  CHECK(gt.theta_xy_deg == doctest::Approx(0.0));
  // UE toward -x is to the left of the +y boresight: axis is (-1, 0, 0)
  const auto left = ground_truth_angles(gnb, 90.0, {-15, 5.0001, 1.5});
  CHECK(left.theta_xy_deg == doctest::Approx(90.0).epsilon(0.01));
}
