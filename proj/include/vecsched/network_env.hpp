#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace vecsched {

using Rng = std::mt19937_64;

struct RadioParams {
  double bandwidth_hz = 10e6;
  double tx_power_dbm = 23.0;
  double noise_dbm = -114.0;

  void validate() const;
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);

/// Large-scale V2I gain in dB; throws std::domain_error for dis <= 0.
double path_loss_v2i_db(double dis_m);
/// Large-scale V2V gain in dB; throws std::domain_error for dis <= 0.
double path_loss_v2v_db(double dis_m);

/// |u|^2 for u ~ CN(0, 1), i.e. an Exp(1) draw.
double sample_fading(Rng& rng);

/// Shannon rate B*log2(1 + p*g*|u|^2 / sigma^2) with all terms converted to
/// linear watts first.
double link_rate_bps(const RadioParams& params, double path_loss_db, double fading);

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position& a, const Position& b);

/// Positions of every CV and SV for slots 1..T plus the fixed RSU.
class MobilityTrace {
 public:
  MobilityTrace() = default;
  MobilityTrace(std::vector<std::vector<Position>> cv, std::vector<std::vector<Position>> sv,
                Position rsu, double road_length_m);

  int num_slots() const { return static_cast<int>(cv_.size()); }
  int num_cvs() const { return cv_.empty() ? 0 : static_cast<int>(cv_.front().size()); }
  int num_svs() const { return sv_.empty() ? 0 : static_cast<int>(sv_.front().size()); }

  /// Slot t is 1-based.
  const Position& cv(int t, int i) const;
  const Position& sv(int t, int j) const;
  const Position& rsu() const { return rsu_; }
  double road_length() const { return road_length_; }

  /// Slots [first, first + count) re-based to start at 1.
  MobilityTrace window(int first, int count) const;

  /// Reads the `t,veh_id,role,x,y` CSV. Vehicles of each role are ordered by
  /// veh_id; slots must be contiguous and complete for every vehicle. The RSU
  /// sits at `rsu` when given, else at the midpoint of the observed x range.
  static MobilityTrace load_csv(const std::filesystem::path& path, const Position* rsu = nullptr);

  /// Writes the same CSV layout; CVs get ids 0..I-1, SVs continue from I.
  void save_csv(const std::filesystem::path& path) const;

 private:
  std::vector<std::vector<Position>> cv_;  // [t-1][i]
  std::vector<std::vector<Position>> sv_;  // [t-1][j]
  Position rsu_;
  double road_length_ = 1.0;
};

struct HighwayParams {
  int num_cvs = 5;
  int num_svs = 3;
  double length_m = 1000.0;
  double speed_min = 20.0;
  double speed_max = 30.0;
  int lanes = 3;
  double lane_width_m = 4.0;
  double rsu_offset_m = 10.0;  // RSU distance from the road edge
  int slots = 30;
  double tau = 1.0;
};

/// Unidirectional highway: each vehicle gets a seeded start x, lane and
/// constant speed, and advances x += speed * tau per slot.
MobilityTrace synth_highway_trace(const HighwayParams& params, std::uint64_t seed);

/// Rates for one slot. Edge node indices follow the offload-target
/// convention: 1 is the RSU, 2..J are SVs.
struct SlotRates {
  std::vector<double> to_rsu;              // [i]
  std::vector<std::vector<double>> to_sv;  // [i][j - 2]

  double rate(int cv, int target) const;
};

/// Fading is drawn once per link for the slot; draw order is CV-major, RSU
/// first then SVs, so a fixed generator state gives bitwise-identical rates.
SlotRates rates_for_slot(const MobilityTrace& trace, const RadioParams& params, int t, Rng& rng);

}  // namespace vecsched
