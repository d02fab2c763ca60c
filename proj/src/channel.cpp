#include "aoalab/channel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aoalab/rng.hpp"

namespace aoa {

namespace {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// signed distance of p from the wall plane, positive on the front side
double plane_side(const Wall& w, const Vec3& p) {
  return (Vec2(p.x(), p.y()) - w.p0).dot(w.normal2d());
}

// mirror p across the (vertical) wall plane; z is unchanged
Vec3 mirror_point(const Wall& w, const Vec3& p) {
  const Vec2 n = w.normal2d();
  const double d = (Vec2(p.x(), p.y()) - w.p0).dot(n);
  const Vec2 q = Vec2(p.x(), p.y()) - 2.0 * d * n;
  return {q.x(), q.y(), p.z()};
}

bool segment_hits_box(const Vec3& a, const Vec3& b, const Blocker& box) {
  const Vec3 d = b - a;
  double tmin = 0.0, tmax = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-12) {
      if (a[i] < box.lo[i] || a[i] > box.hi[i]) return false;
    } else {
      double t1 = (box.lo[i] - a[i]) / d[i];
      double t2 = (box.hi[i] - a[i]) / d[i];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return false;
    }
  }
  return true;
}

bool occluded(const Scenario& sc, const Vec3& a, const Vec3& b) {
  for (const auto& blk : sc.blockers)
    if (segment_hits_box(a, b, blk)) return true;
  return false;
}

// Intersect segment from -> to with the wall plane, requiring `from` on
// the front side and the hit point inside the wall extent.
std::optional<Vec3> reflect_hit(const Wall& w, const Vec3& from, const Vec3& to) {
  const double f0 = plane_side(w, from);
  const double f1 = plane_side(w, to);
  if (f0 <= 1e-12 || f1 >= -1e-12) return std::nullopt;
  const double t = f0 / (f0 - f1);
  const Vec3 p = from + t * (to - from);
  const Vec2 seg = w.p1 - w.p0;
  const double len2 = seg.squaredNorm();
  if (len2 < 1e-18) return std::nullopt;
  const double u = (Vec2(p.x(), p.y()) - w.p0).dot(seg) / len2;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  if (p.z() < w.z_min || p.z() > w.z_max) return std::nullopt;
  return p;
}

double arrival_azimuth_deg(const UlaConfig& ula, const Vec3& array_pos, const Vec3& toward) {
  const Vec3 dir = (toward - array_pos).normalized();
  return rad2deg(std::asin(std::clamp(dir.dot(ula.axis()), -1.0, 1.0)));
}

// Attempt to realize the path ue -> walls[seq[0]] -> ... -> walls[seq.back()] -> gnb.
std::optional<PathComponent> build_reflected_path(const Scenario& sc,
                                                  const UlaConfig& ula,
                                                  const Vec3& ue,
                                                  const std::vector<int>& seq) {
  const int k = static_cast<int>(seq.size());
  // successive images of the UE
  std::vector<Vec3> images(k + 1);
  images[0] = ue;
  for (int i = 0; i < k; ++i)
    images[i + 1] = mirror_point(sc.walls[seq[i]], images[i]);

  // backtrack reflection points from the receiver
  std::vector<Vec3> pts(k + 2);
  pts[k + 1] = sc.gnb_position;
  Vec3 current = sc.gnb_position;
  for (int i = k; i >= 1; --i) {
    const auto hit = reflect_hit(sc.walls[seq[i - 1]], current, images[i]);
    if (!hit) return std::nullopt;
    pts[i] = *hit;
    current = *hit;
  }
  pts[0] = ue;
  // last leg must leave the wall on its front side
  if (plane_side(sc.walls[seq[0]], ue) <= 1e-12) return std::nullopt;

  for (int i = 0; i <= k; ++i)
    if (occluded(sc, pts[i], pts[i + 1])) return std::nullopt;

  const double length = (sc.gnb_position - images[k]).norm();
  std::complex<double> gamma_product{1.0, 0.0};
  for (int idx : seq) gamma_product *= sc.walls[idx].gamma;

  PathComponent pc;
  pc.order = k;
  pc.is_los = false;
  pc.delay_s = length / kSpeedOfLight;
  pc.gain = (ula.wavelength_m() / (4.0 * kPi * length)) * gamma_product;
  pc.azimuth_deg = arrival_azimuth_deg(ula, sc.gnb_position, pts[k]);
  return pc;
}

void enumerate_sequences(const Scenario& sc, const UlaConfig& ula, const Vec3& ue,
                         std::vector<int>& seq, std::vector<PathComponent>& out) {
  if (!seq.empty()) {
    if (auto pc = build_reflected_path(sc, ula, ue, seq)) out.push_back(*pc);
  }
  if (static_cast<int>(seq.size()) >= sc.max_reflection_order) return;
  for (int w = 0; w < static_cast<int>(sc.walls.size()); ++w) {
    if (!seq.empty() && seq.back() == w) continue;  // immediate re-hit is degenerate
    seq.push_back(w);
    enumerate_sequences(sc, ula, ue, seq, out);
    seq.pop_back();
  }
}

}  // namespace

void Scenario::validate() const {
  if (max_reflection_order < 0)
    throw std::invalid_argument("Scenario: max_reflection_order must be >= 0");
  for (const auto& w : walls)
    if (std::abs(w.gamma) > 1.0 + 1e-12)
      throw std::invalid_argument("Scenario: wall reflection coefficient must satisfy |gamma| <= 1");
}

std::vector<PathComponent> trace_paths(const Scenario& scenario,
                                       const UlaConfig& ula,
                                       const Eigen::Vector3d& ue_position) {
  scenario.validate();
  ula.validate();
  if ((ue_position - scenario.gnb_position).norm() < 1e-9)
    throw GeometryError("trace_paths: UE coincides with the gNB");
  for (int i = 0; i < 3; ++i)
    if (ue_position[i] < scenario.bounds_lo[i] || ue_position[i] > scenario.bounds_hi[i])
      throw std::invalid_argument("trace_paths: UE position outside scenario bounds");

  std::vector<PathComponent> paths;
  if (!occluded(scenario, scenario.gnb_position, ue_position)) {
    const double length = (ue_position - scenario.gnb_position).norm();
    PathComponent los;
    los.order = 0;
    los.is_los = true;
    los.delay_s = length / kSpeedOfLight;
    los.gain = {ula.wavelength_m() / (4.0 * kPi * length), 0.0};
    los.azimuth_deg = arrival_azimuth_deg(ula, scenario.gnb_position, ue_position);
    paths.push_back(los);
  }
  std::vector<int> seq;
  enumerate_sequences(scenario, ula, ue_position, seq, paths);
  return paths;
}

ImpairmentModel ImpairmentModel::none(int num_ports) {
  ImpairmentModel im;
  im.port_phase_offsets = Eigen::VectorXd::Zero(num_ports);
  return im;
}

ImpairmentModel ImpairmentModel::draw(int num_ports, std::uint64_t seed) {
  Rng rng(mix_seed(seed ^ 0x1337c0deULL));
  ImpairmentModel im;
  im.port_phase_offsets = Eigen::VectorXd::Zero(num_ports);
  for (int m = 1; m < num_ports; ++m)
    im.port_phase_offsets(m) = rng.uniform(-kPi, kPi);
  return im;
}

SnapshotMatrix synthesize_snapshot(const std::vector<PathComponent>& paths,
                                   const UlaConfig& ula,
                                   const Eigen::VectorXcd& srs,
                                   double snr_db,
                                   const ImpairmentModel& impairment,
                                   std::uint64_t seed,
                                   const GroundTruth& truth) {
  ula.validate();
  if (paths.empty())
    throw LinkFailure("synthesize_snapshot: no propagation path between UE and gNB");
  if (impairment.port_phase_offsets.size() != ula.num_elements)
    throw std::invalid_argument("synthesize_snapshot: impairment size does not match array");

  const int M = ula.num_elements;
  const long N = srs.size();

  // effective array response: coherent sum over paths
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(M);
  for (const auto& p : paths) {
    const double mu = spatial_frequency(ula, p.azimuth_deg);
    const std::complex<double> carrier =
        p.gain * std::polar(1.0, -2.0 * kPi * ula.carrier_hz * p.delay_s);
    for (int m = 0; m < M; ++m)
      v(m) += carrier * std::polar(1.0, m * mu);
  }
  for (int m = 0; m < M; ++m)
    v(m) *= std::polar(1.0, impairment.port_phase_offsets(m));

  SnapshotMatrix snap;
  snap.snr_db = snr_db;
  snap.truth = truth;
  snap.samples = v * srs.transpose();

  if (std::isfinite(snr_db)) {
    const double sig_power = v.squaredNorm() / M;  // |s[n]| = 1
    const double sigma = std::sqrt(sig_power / std::pow(10.0, snr_db / 10.0));
    Rng rng(mix_seed(seed ^ 0x5eedULL));
    for (int m = 0; m < M; ++m)
      for (long n = 0; n < N; ++n)
        snap.samples(m, n) += sigma * rng.cgaussian();
  }
  return snap;
}

void export_cir(const std::string& path, const std::vector<PathComponent>& paths,
                double carrier_hz, int timestamp_index) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_cir: cannot open " + path);
  out.precision(17);
  out << "# carrier_hz=" << carrier_hz << "\n";
  out << "# timestamp_index=" << timestamp_index << "\n";
  out << "delay_s,gain_real,gain_imag,azimuth_deg,order,is_los\n";
  for (const auto& p : paths) {
    out << p.delay_s << ',' << p.gain.real() << ',' << p.gain.imag() << ','
        << p.azimuth_deg << ',' << p.order << ',' << (p.is_los ? 1 : 0) << "\n";
  }
  if (!out) throw std::runtime_error("export_cir: write failure on " + path);
}

std::vector<PathComponent> import_cir(const std::string& path,
                                      double* carrier_hz, int* timestamp_index) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_cir: cannot open " + path);
  std::vector<PathComponent> paths;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = line.substr(1, eq - 1);
        try {
          if (key.find("carrier_hz") != std::string::npos && carrier_hz)
            *carrier_hz = std::stod(line.substr(eq + 1));
          if (key.find("timestamp_index") != std::string::npos && timestamp_index)
            *timestamp_index = std::stoi(line.substr(eq + 1));
        } catch (const std::exception&) {
          throw CirParseError("import_cir: bad metadata value", lineno);
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("delay_s,", 0) != 0)
        throw CirParseError("import_cir: missing column header", lineno);
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw CirParseError("import_cir: expected 6 fields", lineno);
    try {
      PathComponent p;
      p.delay_s = std::stod(fields[0]);
      p.gain = {std::stod(fields[1]), std::stod(fields[2])};
      p.azimuth_deg = std::stod(fields[3]);
      p.order = std::stoi(fields[4]);
      p.is_los = std::stoi(fields[5]) != 0;
      paths.push_back(p);
    } catch (const std::exception&) {
      throw CirParseError("import_cir: non-numeric field", lineno);
    }
  }
  return paths;
}

Scenario scenario_preset(const std::string& name) {
  Scenario s;
  s.name = name;
  s.gnb_position = {0.0, 0.0, 8.0};
  s.boresight_azimuth_deg = 0.0;
  s.bounds_lo = {0.5, -19.5, 0.0};
  s.bounds_hi = {620.0, 19.5, 50.0};
  if (name == "freespace") {
    s.max_reflection_order = 0;
    return s;
  }
  if (name == "canyon_o3" || name == "canyon_o5") {
    s.max_reflection_order = (name == "canyon_o5") ? 5 : 3;
    Wall north;  // inward normal -y
    north.p0 = {640.0, 20.0};
    north.p1 = {-10.0, 20.0};
    north.z_min = 0.0;
    north.z_max = 25.0;
    north.gamma = {-0.6, 0.0};
    Wall south;  // inward normal +y
    south.p0 = {-10.0, -20.0};
    south.p1 = {640.0, -20.0};
    south.z_min = 0.0;
    south.z_max = 25.0;
    south.gamma = {-0.6, 0.0};
    s.walls = {north, south};
    return s;
  }
  throw std::invalid_argument("scenario_preset: unknown preset '" + name + "'");
}

namespace {

using nlohmann::json;

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_to_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument(std::string("scenario json: ") + what + " must be a 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Scenario load_scenario_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scenario_json: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("load_scenario_json: " + std::string(e.what()));
  }
  Scenario s;
  s.name = j.value("name", "custom");
  s.gnb_position = json_to_vec3(j.at("gnb_position"), "gnb_position");
  s.boresight_azimuth_deg = j.value("boresight_azimuth_deg", 0.0);
  s.max_reflection_order = j.value("max_reflection_order", 0);
  if (j.contains("bounds")) {
    s.bounds_lo = json_to_vec3(j["bounds"].at("lo"), "bounds.lo");
    s.bounds_hi = json_to_vec3(j["bounds"].at("hi"), "bounds.hi");
  }
  for (const auto& jw : j.value("walls", json::array())) {
    Wall w;
    w.p0 = {jw.at("p0")[0].get<double>(), jw.at("p0")[1].get<double>()};
    w.p1 = {jw.at("p1")[0].get<double>(), jw.at("p1")[1].get<double>()};
    w.z_min = jw.value("z_min", 0.0);
    w.z_max = jw.value("z_max", 30.0);
    const auto g = jw.value("gamma", json::array({-0.6, 0.0}));
    w.gamma = {g[0].get<double>(), g[1].get<double>()};
    s.walls.push_back(w);
  }
  for (const auto& jb : j.value("blockers", json::array())) {
    Blocker b;
    b.lo = json_to_vec3(jb.at("lo"), "blocker.lo");
    b.hi = json_to_vec3(jb.at("hi"), "blocker.hi");
    s.blockers.push_back(b);
  }
  s.validate();
  return s;
}

void save_scenario_json(const std::string& path, const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["gnb_position"] = vec3_to_json(s.gnb_position);
  j["boresight_azimuth_deg"] = s.boresight_azimuth_deg;
  j["max_reflection_order"] = s.max_reflection_order;
  j["bounds"] = {{"lo", vec3_to_json(s.bounds_lo)}, {"hi", vec3_to_json(s.bounds_hi)}};
  j["walls"] = json::array();
  for (const auto& w : s.walls) {
    j["walls"].push_back({{"p0", {w.p0.x(), w.p0.y()}},
                          {"p1", {w.p1.x(), w.p1.y()}},
                          {"z_min", w.z_min},
                          {"z_max", w.z_max},
                          {"gamma", {w.gamma.real(), w.gamma.imag()}}});
  }
  j["blockers"] = json::array();
  for (const auto& b : s.blockers)
    j["blockers"].push_back({{"lo", vec3_to_json(b.lo)}, {"hi", vec3_to_json(b.hi)}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scenario_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "freespace" || name_or_path == "canyon_o3" ||
      name_or_path == "canyon_o5")
    return scenario_preset(name_or_path);
  if (std::filesystem::exists(name_or_path))
    return load_scenario_json(name_or_path);
  throw std::invalid_argument("resolve_scenario: '" + name_or_path +
                              "' is neither a preset name nor a scenario file");
}

}  // namespace aoa
