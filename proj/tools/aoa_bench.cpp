// aoa_bench: uplink SRS angle-of-arrival estimation lab.
//
// Subcommands: calibrate, estimate, campaign, report.
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 quality-gate failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoalab/calibration.hpp"
#include "aoalab/channel.hpp"
#include "aoalab/estimators.hpp"
#include "aoalab/evaluation.hpp"
#include "aoalab/geometry.hpp"
#include "aoalab/rng.hpp"
#include "aoalab/srs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitQualityGate = 4;

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

std::uint64_t default_seed(std::uint64_t flag_value, bool flag_set) {
  if (flag_set) return flag_value;
  if (const char* env = std::getenv("AOA_BENCH_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

// Synthesize LOS-only boresight reference frames for calibration.
std::vector<aoa::SnapshotMatrix> boresight_frames(const aoa::Scenario& scenario,
                                                  const aoa::UlaConfig& ula,
                                                  const Eigen::VectorXcd& srs,
                                                  int num_frames, double snr_db,
                                                  double ref_distance_m,
                                                  const aoa::ImpairmentModel& impairment,
                                                  std::uint64_t seed) {
  aoa::Scenario sc = scenario;
  sc.max_reflection_order = 0;  // reference UE under controlled LOS conditions
  const Eigen::Vector3d ue =
      sc.gnb_position + ref_distance_m * ula.boresight() + Eigen::Vector3d(0, 0, 1.5 - sc.gnb_position.z());
  const auto truth = aoa::ground_truth_angles(sc.gnb_position, sc.boresight_azimuth_deg, ue);
  const auto paths = aoa::trace_paths(sc, ula, ue);
  std::vector<aoa::SnapshotMatrix> frames;
  for (int f = 0; f < num_frames; ++f)
    frames.push_back(aoa::synthesize_snapshot(paths, ula, srs, snr_db, impairment,
                                              aoa::derive_seed(seed, 0xca11b, f), truth));
  return frames;
}

aoa::UlaConfig ula_for(const aoa::Scenario& scenario) {
  aoa::UlaConfig ula;
  ula.origin = scenario.gnb_position;
  ula.boresight_azimuth_deg = scenario.boresight_azimuth_deg;
  return ula;
}

int cmd_calibrate(const std::string& scenario_name, int frames, double snr_db,
                  bool noiseless, std::uint64_t seed, double ref_distance,
                  double spread_threshold, const std::string& out_path) {
  const auto scenario = aoa::resolve_scenario(scenario_name);
  const auto ula = ula_for(scenario);
  const auto srs = aoa::srs_sequence(aoa::SrsConfig{});
  const auto impairment = aoa::ImpairmentModel::draw(ula.num_elements, seed);
  const double snr = noiseless ? aoa::kNoiselessSnrDb : snr_db;
  const auto fr = boresight_frames(scenario, ula, srs, frames, snr, ref_distance, impairment, seed);
  const auto table = aoa::estimate_offsets(fr, srs);
  aoa::save_calibration_json(out_path, table);
  std::cout << "calibration: " << frames << " frames, residual spread "
            << table.residual_spread_rad << " rad -> " << out_path << "\n";
  if (table.residual_spread_rad > spread_threshold) {
    std::cerr << "error: calibration residual spread " << table.residual_spread_rad
              << " rad exceeds threshold " << spread_threshold << " rad\n";
    return kExitQualityGate;
  }
  return 0;
}

int cmd_estimate(const std::string& scenario_name, const std::vector<double>& ue_xyz,
                 const std::string& calib_path, bool no_calib, const std::string& method,
                 double snr_db, bool noiseless, std::uint64_t seed, int order_override,
                 const std::string& spectrum_out) {
  const auto scenario_base = aoa::resolve_scenario(scenario_name);
  aoa::Scenario scenario = scenario_base;
  if (order_override >= 0) scenario.max_reflection_order = order_override;
  const auto ula = ula_for(scenario);
  const auto srs = aoa::srs_sequence(aoa::SrsConfig{});
  const Eigen::Vector3d ue{ue_xyz[0], ue_xyz[1], ue_xyz[2]};

  aoa::ImpairmentModel impairment = aoa::ImpairmentModel::draw(ula.num_elements, seed);
  aoa::CalibrationTable calib;
  if (no_calib) {
    impairment = aoa::ImpairmentModel::none(ula.num_elements);
    calib.offsets_rad = Eigen::VectorXd::Zero(ula.num_elements);
  } else {
    calib = aoa::load_calibration_json(calib_path);
  }

  auto truth = aoa::ground_truth_angles(scenario.gnb_position, scenario.boresight_azimuth_deg, ue);
  const auto paths = aoa::trace_paths(scenario, ula, ue);
  if (paths.empty()) {
    std::cerr << "error: link failure, no propagation path to the UE\n";
    return kExitIo;
  }
  truth.is_nlos = !paths.front().is_los;
  const double snr = noiseless ? aoa::kNoiselessSnrDb : snr_db;
  auto snap = aoa::synthesize_snapshot(paths, ula, srs, snr, impairment,
                                       aoa::derive_seed(seed, 0xe57), truth);
  snap = aoa::apply_correction(snap, calib);
  const auto decomp = aoa::hermitian_eig(aoa::sample_covariance(snap), 1);
  const aoa::GeometryContext ctx{truth.distance_m, truth.delta_z_m};

  auto report_one = [&](aoa::Method m) {
    aoa::AoaEstimate est = (m == aoa::Method::Music)
                               ? aoa::music_estimate(aoa::music_spectrum(decomp, ula))
                               : aoa::esprit_estimate(decomp, ula);
    est.theta_xy_deg = aoa::cylindrical_correction(est.theta_deg, ctx);
    auto pr = [](double v) { return std::abs(v) < 5e-3 ? 0.0 : v; };  // avoid "-0.00"
    std::printf("%-7s theta=%.2f deg  theta_xy=%.2f deg\n", aoa::method_name(m),
                pr(est.theta_deg), pr(*est.theta_xy_deg));
    if (m == aoa::Method::Music && !spectrum_out.empty())
      aoa::export_spectrum_csv(spectrum_out, *est.pseudospectrum);
  };
  if (method == "music" || method == "both") report_one(aoa::Method::Music);
  if (method == "esprit" || method == "both") report_one(aoa::Method::Esprit);
  return 0;
}

int cmd_campaign(const std::string& config_path, const std::string& traj_path,
                 const std::string& calib_path, const std::string& out_dir,
                 int threads_override, std::uint64_t seed_override, bool seed_set) {
  auto cfg = aoa::load_campaign_config(config_path);
  if (threads_override > 0) cfg.threads = threads_override;
  if (seed_set) cfg.base_seed = seed_override;
  const auto scenario = aoa::resolve_scenario(cfg.scenario);
  const auto traj = aoa::load_trajectory(traj_path);

  aoa::ImpairmentModel impairment =
      aoa::ImpairmentModel::draw(cfg.ula.num_elements, cfg.base_seed);
  aoa::CalibrationTable calib;
  if (cfg.apply_calibration) {
    if (calib_path.empty()) {
      std::cerr << "error: campaign requires --calib (or apply_calibration=false)\n";
      return kExitConfig;
    }
    calib = aoa::load_calibration_json(calib_path);
  } else {
    impairment = aoa::ImpairmentModel::none(cfg.ula.num_elements);
    calib.offsets_rad = Eigen::VectorXd::Zero(cfg.ula.num_elements);
  }

  const auto records = aoa::run_campaign(cfg, scenario, traj, calib, impairment);
  const auto report = aoa::aggregate(records);

  fs::create_directories(out_dir);
  const std::string records_path = (fs::path(out_dir) / "records.csv").string();
  const std::string report_path = (fs::path(out_dir) / "report.json").string();
  const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  aoa::write_records_csv(records_path, records);
  aoa::write_report_json(report_path, report);

  json manifest;
  manifest["tool_version"] = AOA_LAB_VERSION;
  manifest["base_seed"] = cfg.base_seed;
  manifest["config_digest"] = file_digest(config_path);
  manifest["inputs"] = {{config_path, file_digest(config_path)},
                        {traj_path, file_digest(traj_path)}};
  if (!calib_path.empty())
    manifest["inputs"][calib_path] = file_digest(calib_path);
  manifest["outputs"] = {records_path, report_path};
  std::ofstream mf(manifest_path);
  mf << manifest.dump(2) << "\n";

  std::cout << "campaign: " << records.size() << " records, " << report.detach_count
            << " detaches, NLOS fraction " << report.nlos_fraction << " -> " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& out_path) {
  const auto records = aoa::read_records_csv(records_path);
  aoa::write_report_json(out_path, aoa::aggregate(records));
  std::cout << "report: " << records.size() << " records -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink SRS angle-of-arrival estimation lab"};
  app.require_subcommand(1);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Estimate per-port phase offsets from boresight frames");
  std::string cal_scenario = "freespace", cal_out = "calibration.json";
  int cal_frames = 10;
  double cal_snr = 30.0, cal_spread = 0.2, cal_dist = 10.0;
  bool cal_noiseless = false;
  std::uint64_t cal_seed = 1;
  bool cal_seed_set = false;
  cal->add_option("--scenario", cal_scenario, "Scenario preset name or JSON path");
  cal->add_option("--frames", cal_frames, "Number of reference frames to average")->check(CLI::PositiveNumber);
  cal->add_option("--snr", cal_snr, "Reference-frame SNR in dB");
  cal->add_flag("--noiseless", cal_noiseless, "Disable noise on the reference frames");
  cal->add_option("--distance", cal_dist, "Reference UE distance along boresight (m)");
  cal->add_option("--spread-threshold", cal_spread, "Maximum accepted residual spread (rad)");
  cal->add_option("--seed", cal_seed, "Session seed (also draws the impairments)")
      ->each([&](const std::string&) { cal_seed_set = true; });
  cal->add_option("--out", cal_out, "Output calibration JSON path");

  // estimate
  auto* est = app.add_subcommand("estimate", "Single-shot AoA estimate for one UE position");
  std::string est_scenario = "freespace", est_calib, est_method = "both", est_spectrum;
  std::vector<double> est_ue;
  double est_snr = 30.0;
  bool est_noiseless = false, est_no_calib = false;
  int est_order = -1;
  std::uint64_t est_seed = 1;
  bool est_seed_set = false;
  est->add_option("--scenario", est_scenario, "Scenario preset name or JSON path");
  est->add_option("--ue", est_ue, "UE position x y z (m)")->expected(3)->required();
  est->add_option("--calib", est_calib, "Calibration table JSON");
  est->add_flag("--no-calib", est_no_calib, "Run without impairments or calibration");
  est->add_option("--method", est_method, "music, esprit, or both")
      ->check(CLI::IsMember({"music", "esprit", "both"}));
  est->add_option("--snr", est_snr, "Snapshot SNR in dB");
  est->add_flag("--noiseless", est_noiseless, "Disable noise");
  est->add_option("--order", est_order, "Override scenario reflection order");
  est->add_option("--seed", est_seed, "Session seed")
      ->each([&](const std::string&) { est_seed_set = true; });
  est->add_option("--spectrum-out", est_spectrum, "Write the MUSIC pseudospectrum CSV here");

  // campaign
  auto* camp = app.add_subcommand("campaign", "Trajectory-driven evaluation campaign");
  std::string camp_config, camp_traj, camp_calib, camp_out = "out";
  int camp_threads = 0;
  std::uint64_t camp_seed = 0;
  bool camp_seed_set = false;
  camp->add_option("--config", camp_config, "Campaign config JSON")->required();
  camp->add_option("--trajectory", camp_traj, "Trajectory CSV (k,x,y,z)")->required();
  camp->add_option("--calib", camp_calib, "Calibration table JSON");
  camp->add_option("--out", camp_out, "Output directory");
  camp->add_option("--threads", camp_threads, "Worker thread cap");
  camp->add_option("--seed", camp_seed, "Override the config base_seed")
      ->each([&](const std::string&) { camp_seed_set = true; });

  // report
  auto* rep = app.add_subcommand("report", "Re-aggregate an existing records CSV");
  std::string rep_records, rep_out = "report.json";
  rep->add_option("--records", rep_records, "Records CSV from a previous campaign")->required();
  rep->add_option("--out", rep_out, "Output report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*cal)
      return cmd_calibrate(cal_scenario, cal_frames, cal_snr, cal_noiseless,
                           default_seed(cal_seed, cal_seed_set), cal_dist, cal_spread, cal_out);
    if (*est)
      return cmd_estimate(est_scenario, est_ue, est_calib, est_no_calib, est_method, est_snr,
                          est_noiseless, default_seed(est_seed, est_seed_set), est_order,
                          est_spectrum);
    if (*camp)
      return cmd_campaign(camp_config, camp_traj, camp_calib, camp_out, camp_threads,
                          camp_seed, camp_seed_set);
    if (*rep)
      return cmd_report(rep_records, rep_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const aoa::TrajectoryParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
