#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoalab/channel.hpp"

namespace aoa {

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-port mean phase offsets relative to port 0, estimated from
// boresight reference frames.
struct CalibrationTable {
  Eigen::VectorXd offsets_rad;  // entry 0 is exactly 0; all in [-pi, pi)
  int num_frames_averaged = 0;
  double residual_spread_rad = 0;  // circular std of per-frame estimates
};

// Per frame and port: arg(sum_n x_m[n] conj(x_0[n])); circular mean over
// frames. Frames must be boresight (theta = 0) snapshots.
CalibrationTable estimate_offsets(const std::vector<SnapshotMatrix>& frames,
                                  const Eigen::VectorXcd& srs);

// x'_m[n] = x_m[n] * exp(-j offsets[m])
SnapshotMatrix apply_correction(const SnapshotMatrix& snapshot,
                                const CalibrationTable& table);

void save_calibration_json(const std::string& path, const CalibrationTable& table);
CalibrationTable load_calibration_json(const std::string& path);

}  // namespace aoa
