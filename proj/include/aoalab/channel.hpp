#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoalab/array.hpp"
#include "aoalab/geometry.hpp"

namespace aoa {

struct LinkFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CirParseError : std::runtime_error {
  CirParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

// Vertical planar reflector: a segment p0-p1 in the XY plane extruded
// over [z_min, z_max]. The reflective front side is the one the normal
// (left of p0->p1) points into. Walls reflect but do not occlude.
struct Wall {
  Eigen::Vector2d p0, p1;
  double z_min = 0.0, z_max = 30.0;
  std::complex<double> gamma{-0.6, 0.0};

  Eigen::Vector2d normal2d() const {
    const Eigen::Vector2d d = (p1 - p0).normalized();
    return {-d.y(), d.x()};
  }
};

// Axis-aligned box occluder.
struct Blocker {
  Eigen::Vector3d lo, hi;
};

struct Scenario {
  std::string name = "freespace";
  Eigen::Vector3d gnb_position{0.0, 0.0, 8.0};
  double boresight_azimuth_deg = 0.0;
  std::vector<Wall> walls;
  std::vector<Blocker> blockers;
  int max_reflection_order = 0;
  Eigen::Vector3d bounds_lo{-1e4, -1e4, 0.0};
  Eigen::Vector3d bounds_hi{1e4, 1e4, 1e3};

  void validate() const;
};

// One specular propagation path from the UE to the array.
struct PathComponent {
  double delay_s = 0;
  std::complex<double> gain{0, 0};      // free-space loss times Gamma products
  double azimuth_deg = 0;               // arrival angle in the ULA plane, relative to boresight axis
  int order = 0;
  bool is_los = false;
};

// Per-port carrier phase offsets, fixed within a boot session.
struct ImpairmentModel {
  Eigen::VectorXd port_phase_offsets;  // radians, entry 0 is 0

  static ImpairmentModel none(int num_ports);
  // Offsets drawn uniformly in [-pi, pi), port 0 pinned to 0.
  static ImpairmentModel draw(int num_ports, std::uint64_t seed);
};

// One SRS occasion received at the array: M x N complex samples.
struct SnapshotMatrix {
  Eigen::MatrixXcd samples;
  double snr_db = std::numeric_limits<double>::infinity();
  GroundTruth truth;
};

inline constexpr double kNoiselessSnrDb = std::numeric_limits<double>::infinity();

// Image-method path solver: LOS (if unoccluded) plus every valid specular
// reflection sequence up to scenario.max_reflection_order.
std::vector<PathComponent> trace_paths(const Scenario& scenario,
                                       const UlaConfig& ula,
                                       const Eigen::Vector3d& ue_position);

// Narrowband synthesis of one snapshot: coherent path superposition,
// per-port phase impairment, and AWGN at the requested SNR (referenced
// to the mean per-antenna signal power).
SnapshotMatrix synthesize_snapshot(const std::vector<PathComponent>& paths,
                                   const UlaConfig& ula,
                                   const Eigen::VectorXcd& srs,
                                   double snr_db,
                                   const ImpairmentModel& impairment,
                                   std::uint64_t seed,
                                   const GroundTruth& truth);

// CIR interchange: UTF-8 CSV, one row per path.
void export_cir(const std::string& path, const std::vector<PathComponent>& paths,
                double carrier_hz, int timestamp_index);
std::vector<PathComponent> import_cir(const std::string& path,
                                      double* carrier_hz = nullptr,
                                      int* timestamp_index = nullptr);

// Built-in scenario presets: "freespace", "canyon_o3", "canyon_o5".
Scenario scenario_preset(const std::string& name);

// Scenario JSON (de)serialization.
Scenario load_scenario_json(const std::string& path);
void save_scenario_json(const std::string& path, const Scenario& s);

// Resolve a preset name or a JSON file path to a scenario.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace aoa
