#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vecsched/baselines.hpp"
#include "vecsched/lyapunov.hpp"
#include "vecsched/network_env.hpp"
#include "vecsched/queueing.hpp"

namespace vecsched {

struct ScenarioConfig {
  int num_cvs = 5;
  int num_edge_nodes = 4;  // RSU + SVs
  std::vector<std::string> models{"alexnet", "resnet18", "vgg16"};
  std::vector<int> cv_models;  // index into `models` per CV; empty = round robin
  std::array<double, 2> f_loc_range{4e9, 6e9};
  std::array<double, 2> f_veh_range{6e9, 8e9};
  double f_rsu_max = 30e9;
  RadioParams radio;
  double tau = 1.0;
  int slots = 30;
  double v = 10.0;
  double workload_unit = 1e9;
  double delay_cap = 1e6;
  double queue_norm = 1e11;
  std::string trace_source = "synthetic";  // or "file"
  std::string trace_path;
  double road_length_m = 1000.0;
  double speed_min = 20.0;
  double speed_max = 30.0;
  int lanes = 3;
  double lane_width_m = 4.0;
  double rsu_offset_m = 10.0;

  void validate() const;
};

struct TrainerConfig {
  std::string agent = "mad2rl";  // or "pqmix"
  int episodes = 200;
  int warmup_episodes = 10;
  std::string update_cadence = "slot";  // or "episode"
  int batch = 32;
  int buffer = 5000;
  double lr = 5e-4;
  double discount = 0.99;
  double target_rate = 0.001;
  double grad_clip = 10.0;
  double eps_start = 0.9;
  double eps_end = 0.05;
  double eps_anneal_fraction = 0.5;
  std::vector<int> hidden{64, 64, 64};
  std::vector<int> hyper_hidden{64, 64};
  int mixer_embed = 32;
  int denoise_steps = 7;
  double beta_min = 0.1;
  double beta_max = 3.0;
  double reward_scale = 0.01;
  std::string reward_transform = "linear";  // or "symlog"
  int final_window = 50;

  void validate() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  ScenarioConfig scenario;
  TrainerConfig trainer;
  GeneticConfig genetic;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Independent stream seeds from one master seed.
enum class SeedStream : std::uint64_t {
  Capacity = 1,
  ModelInit = 2,
  Learner = 3,
  TrainEnv = 4,
  EvalEnv = 5,
  EvalPolicy = 6,
  Baseline = 7,
  Verify = 8,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index = 0);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

/// Resolved scenario: catalog, capacities drawn from the master seed, and
/// the optional trace file.
struct Scenario {
  ExperimentConfig config;
  EdgeSystem system;
  LyapunovParams lyapunov;
  std::optional<MobilityTrace> file_trace;

  int local_state_dim() const { return 2 * system.num_edge_nodes() + 1; }
};

Scenario build_scenario(const ExperimentConfig& config);

struct StepOutcome {
  std::vector<DelayBreakdown> delays;
  double reward = 0.0;
  double completion_time = 0.0;  // sum of capped per-CV delays
  QueueState before;
  QueueState after;
};

/// One episode of the cell: trace window, fading draws and queues.
class Environment {
 public:
  Environment(const Scenario& scenario, std::uint64_t env_seed);

  int slot() const { return t_; }  // 1-based current slot
  int num_slots() const { return slots_; }
  bool done() const { return t_ > slots_; }

  const QueueState& queues() const { return queues_; }
  const SlotRates& rates() const { return rates_; }
  const MobilityTrace& trace() const { return trace_; }
  const Scenario& scenario() const { return *scenario_; }

  /// Per-CV local observation: own local queue, its type's RSU queue, every
  /// SV queue, own x position and every SV x position.
  std::vector<Eigen::VectorXd> local_states() const;

  /// Applies a complete decision and advances to the next slot.
  StepOutcome step(const Decision& decision);

 private:
  const Scenario* scenario_;
  MobilityTrace trace_;
  Rng fading_;
  QueueState queues_;
  SlotRates rates_;
  int t_ = 1;
  int slots_ = 0;
};

}  // namespace vecsched
