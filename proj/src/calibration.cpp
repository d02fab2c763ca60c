#include "aoalab/calibration.hpp"

#include <cmath>
#include <complex>
#include <fstream>

#include <json.hpp>

#include "aoalab/array.hpp"

namespace aoa {

namespace {

double wrap_rad(double r) {
  r = std::fmod(r + kPi, 2.0 * kPi);
  if (r < 0) r += 2.0 * kPi;
  return r - kPi;
}

}  // namespace

CalibrationTable estimate_offsets(const std::vector<SnapshotMatrix>& frames,
                                  const Eigen::VectorXcd& srs) {
  (void)srs;  // unit-modulus pilot cancels in the port-0 correlation
  if (frames.empty())
    throw CalibrationError("estimate_offsets: need at least one boresight frame");
  const int M = static_cast<int>(frames.front().samples.rows());
  const int F = static_cast<int>(frames.size());

  // per-frame, per-port phase estimates
  Eigen::MatrixXd phi(F, M);
  for (int f = 0; f < F; ++f) {
    const auto& x = frames[f].samples;
    if (x.rows() != M)
      throw CalibrationError("estimate_offsets: inconsistent frame dimensions");
    for (int m = 0; m < M; ++m) {
      const std::complex<double> z = (x.row(m).array() * x.row(0).array().conjugate()).sum();
      if (std::abs(z) < 1e-300)
        throw CalibrationError("estimate_offsets: zero-energy port " + std::to_string(m));
      phi(f, m) = std::arg(z);
    }
  }

  CalibrationTable table;
  table.offsets_rad = Eigen::VectorXd::Zero(M);
  table.num_frames_averaged = F;

  // circular (phasor) mean per port over the frame estimates
  for (int m = 1; m < M; ++m) {
    std::complex<double> mean{0.0, 0.0};
    for (int f = 0; f < F; ++f) mean += std::polar(1.0, phi(f, m));
    table.offsets_rad(m) = wrap_rad(std::arg(mean / static_cast<double>(F)));
  }

  // quality figure: pooled circular spread of the per-sample phase
  // estimates, so a single noisy frame is still detectable
  double resultant_sum = 0.0;
  long resultant_count = 0;
  for (int m = 1; m < M; ++m) {
    std::complex<double> acc{0.0, 0.0};
    long n_used = 0;
    for (int f = 0; f < F; ++f) {
      const auto& x = frames[f].samples;
      for (long n = 0; n < x.cols(); ++n) {
        const std::complex<double> w = x(m, n) * std::conj(x(0, n));
        const double mag = std::abs(w);
        if (mag < 1e-300) continue;
        acc += w / mag;
        ++n_used;
      }
    }
    if (n_used > 0) {
      resultant_sum += std::min(std::abs(acc) / static_cast<double>(n_used), 1.0);
      ++resultant_count;
    }
  }
  const double rbar = resultant_count > 0 ? resultant_sum / resultant_count : 1.0;
  table.residual_spread_rad = rbar > 1e-12 ? std::sqrt(std::max(0.0, -2.0 * std::log(rbar))) : kPi;
  return table;
}

SnapshotMatrix apply_correction(const SnapshotMatrix& snapshot,
                                const CalibrationTable& table) {
  const int M = static_cast<int>(snapshot.samples.rows());
  if (table.offsets_rad.size() != M)
    throw std::invalid_argument("apply_correction: table dimension does not match snapshot");
  SnapshotMatrix out = snapshot;
  for (int m = 0; m < M; ++m)
    out.samples.row(m) *= std::polar(1.0, -table.offsets_rad(m));
  return out;
}

void save_calibration_json(const std::string& path, const CalibrationTable& table) {
  nlohmann::json j;
  j["offsets_rad"] = std::vector<double>(table.offsets_rad.data(),
                                         table.offsets_rad.data() + table.offsets_rad.size());
  j["frames"] = table.num_frames_averaged;
  j["residual_spread_rad"] = table.residual_spread_rad;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_calibration_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

CalibrationTable load_calibration_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_calibration_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  CalibrationTable table;
  const auto offs = j.at("offsets_rad").get<std::vector<double>>();
  table.offsets_rad = Eigen::Map<const Eigen::VectorXd>(offs.data(), offs.size());
  table.num_frames_averaged = j.value("frames", 0);
  table.residual_spread_rad = j.value("residual_spread_rad", 0.0);
  return table;
}

}  // namespace aoa
