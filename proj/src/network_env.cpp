#include "vecsched/network_env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vecsched {

void RadioParams::validate() const {
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
    throw std::invalid_argument("radio bandwidth must be positive");
  }
  if (!std::isfinite(tx_power_dbm) || !std::isfinite(noise_dbm)) {
    throw std::invalid_argument("radio powers must be finite dBm values");
  }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double path_loss_v2i_db(double dis_m) {
  if (!(dis_m > 0.0)) throw std::domain_error("V2I distance must be positive");
  return -38.4 - 21.0 * std::log10(dis_m);
}

double path_loss_v2v_db(double dis_m) {
  if (!(dis_m > 0.0)) throw std::domain_error("V2V distance must be positive");
  return -44.23 - 16.7 * std::log10(dis_m);
}

double sample_fading(Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  return exp1(rng);
}

double link_rate_bps(const RadioParams& params, double path_loss_db, double fading) {
  if (fading < 0.0) throw std::domain_error("fading gain must be non-negative");
  const double snr = dbm_to_watts(params.tx_power_dbm) * db_to_linear(path_loss_db) * fading /
                     dbm_to_watts(params.noise_dbm);
  return params.bandwidth_hz * std::log2(1.0 + snr);
}

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

MobilityTrace::MobilityTrace(std::vector<std::vector<Position>> cv,
                             std::vector<std::vector<Position>> sv, Position rsu,
                             double road_length_m)
    : cv_(std::move(cv)), sv_(std::move(sv)), rsu_(rsu), road_length_(road_length_m) {
  if (cv_.empty()) throw std::invalid_argument("trace needs at least one slot");
  if (sv_.size() != cv_.size()) throw std::invalid_argument("trace CV/SV slot counts differ");
  for (std::size_t t = 0; t < cv_.size(); ++t) {
    if (cv_[t].size() != cv_.front().size() || sv_[t].size() != sv_.front().size()) {
      throw std::invalid_argument("trace slot " + std::to_string(t + 1) +
                                  " is missing vehicle positions");
    }
  }
  if (!(road_length_ > 0.0)) throw std::invalid_argument("road length must be positive");
}

const Position& MobilityTrace::cv(int t, int i) const {
  return cv_.at(static_cast<std::size_t>(t - 1)).at(static_cast<std::size_t>(i));
}

const Position& MobilityTrace::sv(int t, int j) const {
  return sv_.at(static_cast<std::size_t>(t - 1)).at(static_cast<std::size_t>(j));
}

MobilityTrace MobilityTrace::window(int first, int count) const {
  if (first < 1 || count < 1 || first + count - 1 > num_slots()) {
    throw std::out_of_range("trace window outside available slots");
  }
  std::vector<std::vector<Position>> cv(cv_.begin() + (first - 1),
                                        cv_.begin() + (first - 1 + count));
  std::vector<std::vector<Position>> sv(sv_.begin() + (first - 1),
                                        sv_.begin() + (first - 1 + count));
  return MobilityTrace(std::move(cv), std::move(sv), rsu_, road_length_);
}

void MobilityTrace::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  out << "t,veh_id,role,x,y\n";
  char buf[96];
  for (int t = 1; t <= num_slots(); ++t) {
    for (int i = 0; i < num_cvs(); ++i) {
      std::snprintf(buf, sizeof buf, "%d,%d,cv,%.6f,%.6f\n", t, i, cv(t, i).x, cv(t, i).y);
      out << buf;
    }
    for (int j = 0; j < num_svs(); ++j) {
      std::snprintf(buf, sizeof buf, "%d,%d,sv,%.6f,%.6f\n", t, num_cvs() + j, sv(t, j).x, sv(t, j).y);
      out << buf;
    }
  }
}

MobilityTrace MobilityTrace::load_csv(const std::filesystem::path& path, const Position* rsu) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace file is empty");
  line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
  if (line != "t,veh_id,role,x,y") {
    throw std::invalid_argument("trace header must be 't,veh_id,role,x,y'");
  }

  // role -> veh_id -> t -> position; numeric ids sort numerically
  struct IdLess {
    bool operator()(const std::string& a, const std::string& b) const {
      const bool na = !a.empty() && std::all_of(a.begin(), a.end(), ::isdigit);
      const bool nb = !b.empty() && std::all_of(b.begin(), b.end(), ::isdigit);
      if (na && nb && a.size() != b.size()) return a.size() < b.size();
      if (na != nb) return na;
      return a < b;
    }
  };
  std::map<std::string, std::map<std::string, std::map<int, Position>, IdLess>> rows;
  int t_min = 0;
  int t_max = 0;
  bool first = true;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string t_s, id, role, x_s, y_s;
    if (!std::getline(ss, t_s, ',') || !std::getline(ss, id, ',') ||
        !std::getline(ss, role, ',') || !std::getline(ss, x_s, ',') ||
        !std::getline(ss, y_s, ',')) {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": expected 5 fields");
    }
    if (role != "cv" && role != "sv") {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": role must be cv or sv");
    }
    int t = 0;
    Position p;
    try {
      t = std::stoi(t_s);
      p.x = std::stod(x_s);
      p.y = std::stod(y_s);
    } catch (const std::exception&) {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": bad number");
    }
    t_min = first ? t : std::min(t_min, t);
    t_max = first ? t : std::max(t_max, t);
    first = false;
    rows[role][id][t] = p;
  }
  if (first) throw std::invalid_argument("trace has no rows");
  if (rows["cv"].empty()) throw std::invalid_argument("trace has no cv rows");

  const int slots = t_max - t_min + 1;
  std::vector<std::vector<Position>> cv(static_cast<std::size_t>(slots));
  std::vector<std::vector<Position>> sv(static_cast<std::size_t>(slots));
  double x_lo = 0.0;
  double x_hi = 0.0;
  bool any = false;
  auto fill = [&](const std::string& role, std::vector<std::vector<Position>>& out) {
    for (const auto& [id, by_t] : rows[role]) {
      for (int t = t_min; t <= t_max; ++t) {
        auto it = by_t.find(t);
        if (it == by_t.end()) {
          throw std::invalid_argument("trace: vehicle " + id + " has no position at t=" +
                                      std::to_string(t));
        }
        out[static_cast<std::size_t>(t - t_min)].push_back(it->second);
        x_lo = any ? std::min(x_lo, it->second.x) : it->second.x;
        x_hi = any ? std::max(x_hi, it->second.x) : it->second.x;
        any = true;
      }
    }
  };
  fill("cv", cv);
  fill("sv", sv);

  const double length = std::max(x_hi - x_lo, 1.0);
  const Position where = rsu ? *rsu : Position{0.5 * (x_lo + x_hi), -10.0};
  return MobilityTrace(std::move(cv), std::move(sv), where, length);
}

MobilityTrace synth_highway_trace(const HighwayParams& p, std::uint64_t seed) {
  if (p.num_cvs < 1 || p.num_svs < 0 || p.slots < 1 || !(p.length_m > 0.0) || p.lanes < 1) {
    throw std::invalid_argument("highway parameters must be positive");
  }
  if (p.speed_min < 0.0 || p.speed_max < p.speed_min) {
    throw std::invalid_argument("highway speed range invalid");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> start(0.0, p.length_m);
  std::uniform_real_distribution<double> speed(p.speed_min, p.speed_max);
  std::uniform_int_distribution<int> lane(0, p.lanes - 1);

  struct Vehicle {
    double x0, y, v;
  };
  auto spawn = [&](int n) {
    std::vector<Vehicle> out;
    for (int i = 0; i < n; ++i) {
      Vehicle veh;
      veh.x0 = start(rng);
      veh.y = (lane(rng) + 0.5) * p.lane_width_m;
      veh.v = p.speed_max > p.speed_min ? speed(rng) : p.speed_min;
      out.push_back(veh);
    }
    return out;
  };
  const auto cvs = spawn(p.num_cvs);
  const auto svs = spawn(p.num_svs);

  std::vector<std::vector<Position>> cv(static_cast<std::size_t>(p.slots));
  std::vector<std::vector<Position>> sv(static_cast<std::size_t>(p.slots));
  for (int t = 0; t < p.slots; ++t) {
    for (const auto& v : cvs) cv[t].push_back({v.x0 + v.v * p.tau * t, v.y});
    for (const auto& v : svs) sv[t].push_back({v.x0 + v.v * p.tau * t, v.y});
  }
  return MobilityTrace(std::move(cv), std::move(sv), Position{0.5 * p.length_m, -p.rsu_offset_m},
                       p.length_m);
}

double SlotRates::rate(int cv, int target) const {
  if (target == 1) return to_rsu.at(static_cast<std::size_t>(cv));
  return to_sv.at(static_cast<std::size_t>(cv)).at(static_cast<std::size_t>(target - 2));
}

SlotRates rates_for_slot(const MobilityTrace& trace, const RadioParams& params, int t, Rng& rng) {
  if (t < 1 || t > trace.num_slots()) throw std::out_of_range("slot outside trace");
  SlotRates out;
  const int n_cv = trace.num_cvs();
  const int n_sv = trace.num_svs();
  out.to_rsu.resize(static_cast<std::size_t>(n_cv));
  out.to_sv.assign(static_cast<std::size_t>(n_cv), std::vector<double>(static_cast<std::size_t>(n_sv)));
  for (int i = 0; i < n_cv; ++i) {
    const Position& me = trace.cv(t, i);
    out.to_rsu[i] = link_rate_bps(params, path_loss_v2i_db(distance(me, trace.rsu())),
                                  sample_fading(rng));
    for (int j = 0; j < n_sv; ++j) {
      out.to_sv[i][j] = link_rate_bps(params, path_loss_v2v_db(distance(me, trace.sv(t, j))),
                                      sample_fading(rng));
    }
  }
  return out;
}

}  // namespace vecsched
