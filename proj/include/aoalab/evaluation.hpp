#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aoalab/calibration.hpp"
#include "aoalab/channel.hpp"
#include "aoalab/estimators.hpp"
#include "aoalab/srs.hpp"

namespace aoa {

struct TrajectoryStep {
  int k = 0;
  Eigen::Vector3d position{0, 0, 1.5};
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double dt_s = 0.1;
};

struct TrajectoryParseError : std::runtime_error {
  TrajectoryParseError(const std::string& msg, int row)
      : std::runtime_error(msg + " (row " + std::to_string(row) + ")"), row_number(row) {}
  int row_number;
};

// CSV with header "k,x,y,z"; indices must be strictly increasing.
Trajectory load_trajectory(const std::string& path);
void save_trajectory(const std::string& path, const Trajectory& traj);

// Straight line sampled at num_steps points, indices 0..num_steps-1.
Trajectory line_trajectory(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                           int num_steps);

struct SnrPolicy {
  enum class Kind { Fixed, DistanceDriven };
  Kind kind = Kind::DistanceDriven;
  double fixed_db = 20.0;
  double snr_ref_db = 35.0;  // SNR at d_ref
  double d_ref_m = 10.0;

  double snr_db(double distance_m) const {
    if (kind == Kind::Fixed) return fixed_db;
    return snr_ref_db - 20.0 * std::log10(distance_m / d_ref_m);
  }
};

struct CampaignConfig {
  std::string scenario = "freespace";  // preset name or scenario JSON path
  std::vector<int> reflection_orders = {0};
  std::vector<Method> methods = {Method::Music, Method::Esprit};
  SnrPolicy snr_policy;
  std::uint64_t base_seed = 1;
  int num_repetitions = 1;
  double ranging_sigma_m = 0.0;  // injected Gaussian error on d for the plane correction
  bool apply_calibration = true;
  int threads = 1;
  UlaConfig ula;
  SrsConfig srs;

  void validate() const;
};

CampaignConfig load_campaign_config(const std::string& path);
void save_campaign_config(const std::string& path, const CampaignConfig& cfg);

struct EvalRecord {
  int k = 0;
  Method method = Method::Music;
  int order = 0;
  double snr_db = 0;
  double theta_hat = 0;
  double theta_xy_hat = 0;
  double theta_true = 0;
  double theta_xy_true = 0;
  double error_deg = 0;      // theta_xy_hat - theta_xy_true, wrapped
  double error_raw_deg = 0;  // theta_hat - theta_true, wrapped (pre-correction)
  bool is_nlos = false;
  bool detached = false;
};

// Full per-occasion pipeline over every step x order x repetition.
std::vector<EvalRecord> run_campaign(const CampaignConfig& cfg,
                                     const Scenario& scenario,
                                     const Trajectory& traj,
                                     const CalibrationTable& calib,
                                     const ImpairmentModel& impairment);

// Sorted step function; fractions i/n ending at 1.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

double percentile(std::vector<double> values, double p);

struct BinStats {
  int count = 0;
  double rmse = 0, p50 = 0, p95 = 0;
  double rmse_pre = 0, p50_pre = 0, p95_pre = 0;
  std::vector<std::pair<double, double>> ecdf_points;
};

struct EvalReport {
  // method name -> order -> snr bin label -> stats
  std::map<std::string, std::map<int, std::map<std::string, BinStats>>> cells;
  double nlos_fraction = 0;
  int detach_count = 0;
  int total_records = 0;
};

std::string snr_bin_label(double snr_db);

EvalReport aggregate(const std::vector<EvalRecord>& records);

void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records_csv(const std::string& path);
void write_report_json(const std::string& path, const EvalReport& report);

}  // namespace aoa
