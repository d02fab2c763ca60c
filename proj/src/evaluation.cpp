#include "aoalab/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "aoalab/geometry.hpp"
#include "aoalab/rng.hpp"

namespace aoa {

using nlohmann::json;

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_trajectory: cannot open " + path);
  Trajectory traj;
  std::string line;
  int row = 0;
  bool header_seen = false;
  int last_k = -1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("k,", 0) != 0)
        throw TrajectoryParseError("load_trajectory: expected header 'k,x,y,z'", row);
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4)
      throw TrajectoryParseError("load_trajectory: expected 4 columns", row);
    TrajectoryStep step;
    try {
      step.k = std::stoi(fields[0]);
      step.position = {std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
    } catch (const std::exception&) {
      throw TrajectoryParseError("load_trajectory: non-numeric value", row);
    }
    if (step.k <= last_k)
      throw TrajectoryParseError("load_trajectory: step indices must be strictly increasing", row);
    last_k = step.k;
    traj.steps.push_back(step);
  }
  if (traj.steps.empty())
    throw TrajectoryParseError("load_trajectory: no data rows", row);
  return traj;
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trajectory: cannot open " + path);
  out.precision(17);
  out << "k,x,y,z\n";
  for (const auto& s : traj.steps)
    out << s.k << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << "\n";
}

Trajectory line_trajectory(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                           int num_steps) {
  if (num_steps < 1) throw std::invalid_argument("line_trajectory: num_steps must be >= 1");
  Trajectory traj;
  for (int k = 0; k < num_steps; ++k) {
    const double t = num_steps == 1 ? 0.0 : static_cast<double>(k) / (num_steps - 1);
    traj.steps.push_back({k, start + t * (end - start)});
  }
  return traj;
}

void CampaignConfig::validate() const {
  if (reflection_orders.empty())
    throw std::invalid_argument("CampaignConfig: 'orders' must be non-empty");
  for (int o : reflection_orders)
    if (o < 0)
      throw std::invalid_argument("CampaignConfig: 'orders' entries must be >= 0");
  if (methods.empty())
    throw std::invalid_argument("CampaignConfig: 'methods' must be non-empty");
  if (num_repetitions < 1)
    throw std::invalid_argument("CampaignConfig: 'num_repetitions' must be >= 1");
  if (threads < 1)
    throw std::invalid_argument("CampaignConfig: 'threads' must be >= 1");
  ula.validate();
  srs.validate();
}

CampaignConfig load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_campaign_config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("load_campaign_config: " + std::string(e.what()));
  }
  CampaignConfig cfg;
  cfg.scenario = j.value("scenario", cfg.scenario);
  if (j.contains("orders"))
    cfg.reflection_orders = j["orders"].get<std::vector<int>>();
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j["methods"]) {
      const std::string name = m.get<std::string>();
      if (name == "music") cfg.methods.push_back(Method::Music);
      else if (name == "esprit") cfg.methods.push_back(Method::Esprit);
      else throw std::invalid_argument("CampaignConfig: unknown method '" + name + "' in 'methods'");
    }
  }
  if (j.contains("snr_policy")) {
    const auto& p = j["snr_policy"];
    const std::string type = p.value("type", "distance");
    if (type == "fixed") {
      cfg.snr_policy.kind = SnrPolicy::Kind::Fixed;
      cfg.snr_policy.fixed_db = p.value("snr_db", cfg.snr_policy.fixed_db);
    } else if (type == "distance") {
      cfg.snr_policy.kind = SnrPolicy::Kind::DistanceDriven;
      cfg.snr_policy.snr_ref_db = p.value("snr_ref_db", cfg.snr_policy.snr_ref_db);
      cfg.snr_policy.d_ref_m = p.value("d_ref_m", cfg.snr_policy.d_ref_m);
    } else {
      throw std::invalid_argument("CampaignConfig: unknown snr_policy.type '" + type + "'");
    }
  }
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  cfg.num_repetitions = j.value("num_repetitions", cfg.num_repetitions);
  cfg.ranging_sigma_m = j.value("ranging_sigma_m", cfg.ranging_sigma_m);
  cfg.apply_calibration = j.value("apply_calibration", cfg.apply_calibration);
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("ula")) {
    const auto& u = j["ula"];
    cfg.ula.num_elements = u.value("num_elements", cfg.ula.num_elements);
    cfg.ula.carrier_hz = u.value("carrier_hz", cfg.ula.carrier_hz);
    cfg.ula.spacing_m = u.value("spacing_m", 0.5 * kSpeedOfLight / cfg.ula.carrier_hz);
  }
  if (j.contains("srs")) {
    const auto& s = j["srs"];
    cfg.srs.length = s.value("length", cfg.srs.length);
    cfg.srs.zc_root = s.value("zc_root", cfg.srs.zc_root);
    cfg.srs.zc_length = s.value("zc_length", cfg.srs.zc_length);
  }
  cfg.validate();
  return cfg;
}

void save_campaign_config(const std::string& path, const CampaignConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  j["orders"] = cfg.reflection_orders;
  j["methods"] = json::array();
  for (Method m : cfg.methods) j["methods"].push_back(method_name(m));
  if (cfg.snr_policy.kind == SnrPolicy::Kind::Fixed)
    j["snr_policy"] = {{"type", "fixed"}, {"snr_db", cfg.snr_policy.fixed_db}};
  else
    j["snr_policy"] = {{"type", "distance"},
                       {"snr_ref_db", cfg.snr_policy.snr_ref_db},
                       {"d_ref_m", cfg.snr_policy.d_ref_m}};
  j["base_seed"] = cfg.base_seed;
  j["num_repetitions"] = cfg.num_repetitions;
  j["ranging_sigma_m"] = cfg.ranging_sigma_m;
  j["apply_calibration"] = cfg.apply_calibration;
  j["threads"] = cfg.threads;
  j["ula"] = {{"num_elements", cfg.ula.num_elements},
              {"carrier_hz", cfg.ula.carrier_hz},
              {"spacing_m", cfg.ula.spacing_m}};
  j["srs"] = {{"length", cfg.srs.length},
              {"zc_root", cfg.srs.zc_root},
              {"zc_length", cfg.srs.zc_length}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_campaign_config: cannot open " + path);
  out << j.dump(2) << "\n";
}

namespace {

void run_step(const CampaignConfig& cfg, const Scenario& base_scenario,
              const UlaConfig& ula, const Eigen::VectorXcd& srs,
              const CalibrationTable& calib, const ImpairmentModel& impairment,
              const TrajectoryStep& step, std::vector<EvalRecord>& out) {
  for (int order : cfg.reflection_orders) {
    Scenario sc = base_scenario;
    sc.max_reflection_order = order;
    for (int rep = 0; rep < cfg.num_repetitions; ++rep) {
      // seed excludes the order so matched-seed order comparisons share noise
      const std::uint64_t seed =
          derive_seed(cfg.base_seed, static_cast<std::uint64_t>(step.k),
                      static_cast<std::uint64_t>(rep));
      GroundTruth truth = ground_truth_angles(sc.gnb_position, sc.boresight_azimuth_deg,
                                              step.position);
      const double snr = cfg.snr_policy.snr_db(truth.distance_m);

      const auto paths = trace_paths(sc, ula, step.position);
      const bool has_los =
          std::any_of(paths.begin(), paths.end(), [](const auto& p) { return p.is_los; });
      truth.is_nlos = !has_los;

      if (paths.empty()) {
        for (Method m : cfg.methods) {
          EvalRecord r;
          r.k = step.k;
          r.method = m;
          r.order = order;
          r.snr_db = snr;
          r.is_nlos = true;
          r.detached = true;
          out.push_back(r);
        }
        continue;
      }

      SnapshotMatrix snap = synthesize_snapshot(paths, ula, srs, snr, impairment, seed, truth);
      if (cfg.apply_calibration) snap = apply_correction(snap, calib);
      const auto decomp = hermitian_eig(sample_covariance(snap), 1);

      double d_used = truth.distance_m;
      if (cfg.ranging_sigma_m > 0) {
        Rng rng(derive_seed(seed, 0xd157ULL, 1));
        d_used += cfg.ranging_sigma_m * rng.gaussian();
        d_used = std::max(d_used, std::abs(truth.delta_z_m) + 1e-6);
      }
      const GeometryContext ctx{d_used, truth.delta_z_m};

      for (Method m : cfg.methods) {
        EvalRecord r;
        r.k = step.k;
        r.method = m;
        r.order = order;
        r.snr_db = snr;
        r.is_nlos = truth.is_nlos;
        r.theta_true = truth.theta_raw_deg;
        r.theta_xy_true = truth.theta_xy_deg;
        AoaEstimate est = (m == Method::Music)
                              ? music_estimate(music_spectrum(decomp, ula))
                              : esprit_estimate(decomp, ula);
        r.theta_hat = est.theta_deg;
        r.theta_xy_hat = cylindrical_correction(est.theta_deg, ctx);
        r.error_deg = wrap_deg(r.theta_xy_hat - r.theta_xy_true);
        r.error_raw_deg = wrap_deg(r.theta_hat - r.theta_true);
        out.push_back(r);
      }
    }
  }
}

}  // namespace

std::vector<EvalRecord> run_campaign(const CampaignConfig& cfg,
                                     const Scenario& scenario,
                                     const Trajectory& traj,
                                     const CalibrationTable& calib,
                                     const ImpairmentModel& impairment) {
  cfg.validate();
  scenario.validate();
  UlaConfig ula = cfg.ula;
  ula.origin = scenario.gnb_position;
  ula.boresight_azimuth_deg = scenario.boresight_azimuth_deg;
  if (cfg.apply_calibration && calib.offsets_rad.size() != ula.num_elements)
    throw std::invalid_argument("run_campaign: calibration table does not match the array");
  const Eigen::VectorXcd srs = srs_sequence(cfg.srs);

  const int S = static_cast<int>(traj.steps.size());
  std::vector<std::vector<EvalRecord>> per_step(S);

  const int workers = std::max(1, std::min<int>(cfg.threads, S));
  if (workers == 1) {
    for (int i = 0; i < S; ++i)
      run_step(cfg, scenario, ula, srs, calib, impairment, traj.steps[i], per_step[i]);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int i = next.fetch_add(1); i < S; i = next.fetch_add(1))
        run_step(cfg, scenario, ula, srs, calib, impairment, traj.steps[i], per_step[i]);
    };
    std::vector<std::future<void>> futs;
    for (int w = 0; w < workers; ++w)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }

  std::vector<EvalRecord> records;
  for (auto& chunk : per_step)
    records.insert(records.end(), chunk.begin(), chunk.end());
  return records;
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("ecdf: empty input");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out.emplace_back(values[i], static_cast<double>(i + 1) / n);
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  if (p < 0 || p > 1) throw std::invalid_argument("percentile: p must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<long>(values.size());
  long rank = static_cast<long>(std::ceil(p * n)) - 1;  // nearest-rank
  rank = std::clamp(rank, 0L, n - 1);
  return values[rank];
}

std::string snr_bin_label(double snr_db) {
  if (snr_db > 30.0) return ">30";
  if (snr_db > 20.0) return "20-30";
  if (snr_db > 10.0) return "10-20";
  if (snr_db > 0.0) return "0-10";
  return "<=0";
}

EvalReport aggregate(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: empty record list");
  EvalReport report;
  report.total_records = static_cast<int>(records.size());

  std::map<std::string, std::map<int, std::map<std::string, std::vector<const EvalRecord*>>>> groups;
  int nlos = 0;
  for (const auto& r : records) {
    if (r.is_nlos) ++nlos;
    if (r.detached) {
      ++report.detach_count;
      continue;
    }
    groups[method_name(r.method)][r.order][snr_bin_label(r.snr_db)].push_back(&r);
  }
  report.nlos_fraction = static_cast<double>(nlos) / records.size();

  for (const auto& [mname, by_order] : groups) {
    for (const auto& [order, by_bin] : by_order) {
      for (const auto& [bin, recs] : by_bin) {
        BinStats st;
        st.count = static_cast<int>(recs.size());
        std::vector<double> abs_err, abs_err_pre;
        double sq = 0, sq_pre = 0;
        for (const auto* r : recs) {
          sq += r->error_deg * r->error_deg;
          sq_pre += r->error_raw_deg * r->error_raw_deg;
          abs_err.push_back(std::abs(r->error_deg));
          abs_err_pre.push_back(std::abs(r->error_raw_deg));
        }
        st.rmse = std::sqrt(sq / recs.size());
        st.rmse_pre = std::sqrt(sq_pre / recs.size());
        st.p50 = percentile(abs_err, 0.50);
        st.p95 = percentile(abs_err, 0.95);
        st.p50_pre = percentile(abs_err_pre, 0.50);
        st.p95_pre = percentile(abs_err_pre, 0.95);
        auto full = ecdf(abs_err);
        // cap exported ECDF size; quantile-subsample large populations
        if (full.size() > 200) {
          std::vector<std::pair<double, double>> sub;
          for (int i = 0; i < 200; ++i)
            sub.push_back(full[(full.size() - 1) * i / 199]);
          st.ecdf_points = std::move(sub);
        } else {
          st.ecdf_points = std::move(full);
        }
        report.cells[mname][order][bin] = std::move(st);
      }
    }
  }
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_records_csv: cannot open " + path);
  out << "k,method,order,snr_db,theta_hat,theta_xy_hat,theta_true,theta_xy_true,"
         "error_deg,error_raw_deg,is_nlos,detached\n";
  for (const auto& r : records) {
    out << r.k << ',' << method_name(r.method) << ',' << r.order << ',' << fmt(r.snr_db)
        << ',' << fmt(r.theta_hat) << ',' << fmt(r.theta_xy_hat) << ',' << fmt(r.theta_true)
        << ',' << fmt(r.theta_xy_true) << ',' << fmt(r.error_deg) << ','
        << fmt(r.error_raw_deg) << ',' << (r.is_nlos ? 1 : 0) << ',' << (r.detached ? 1 : 0)
        << "\n";
  }
  if (!out) throw std::runtime_error("write_records_csv: write failure on " + path);
}

std::vector<EvalRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records_csv: cannot open " + path);
  std::vector<EvalRecord> records;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 || line.empty()) continue;  // header
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 12)
      throw std::runtime_error("read_records_csv: bad row " + std::to_string(row));
    EvalRecord r;
    r.k = std::stoi(f[0]);
    r.method = (f[1] == "music") ? Method::Music : Method::Esprit;
    r.order = std::stoi(f[2]);
    r.snr_db = std::stod(f[3]);
    r.theta_hat = std::stod(f[4]);
    r.theta_xy_hat = std::stod(f[5]);
    r.theta_true = std::stod(f[6]);
    r.theta_xy_true = std::stod(f[7]);
    r.error_deg = std::stod(f[8]);
    r.error_raw_deg = std::stod(f[9]);
    r.is_nlos = std::stoi(f[10]) != 0;
    r.detached = std::stoi(f[11]) != 0;
    records.push_back(r);
  }
  return records;
}

void write_report_json(const std::string& path, const EvalReport& report) {
  json j;
  for (const auto& [mname, by_order] : report.cells) {
    for (const auto& [order, by_bin] : by_order) {
      for (const auto& [bin, st] : by_bin) {
        json cell = {{"count", st.count},
                     {"rmse", st.rmse},
                     {"p50", st.p50},
                     {"p95", st.p95},
                     {"rmse_pre", st.rmse_pre},
                     {"p50_pre", st.p50_pre},
                     {"p95_pre", st.p95_pre}};
        json e = json::array();
        for (const auto& [v, frac] : st.ecdf_points) e.push_back({v, frac});
        cell["ecdf"] = e;
        j["cells"][mname]["order_" + std::to_string(order)][bin] = cell;
      }
    }
  }
  j["nlos_fraction"] = report.nlos_fraction;
  j["detach_count"] = report.detach_count;
  j["total_records"] = report.total_records;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace aoa
