#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "vecsched/baselines.hpp"
#include "vecsched/qmix.hpp"
#include "vecsched/scenario.hpp"

namespace vecsched {

enum class PolicyKind { Mad2rl, Pqmix, Greedy, Genetic };

PolicyKind parse_policy(const std::string& name);
std::string policy_name(PolicyKind kind);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct EpisodeSummary {
  int episode = 0;
  std::string phase;  // train | eval | baseline
  double mean_reward = 0.0;
  double mean_completion_time = 0.0;  // per slot, summed over CVs
  double mean_queue = 0.0;            // time-averaged total backlog
  double mean_loss = kNaN;
  double epsilon = kNaN;
  std::vector<QueueState> queues;  // backlog after each slot
  int bound_checks = 0;
  int bound_violations = 0;
};

struct LearningRow {
  int episode = 0;
  long step = 0;
  double loss = kNaN;
  double reward = 0.0;
  double epsilon = 0.0;
};

/// Chooses the (phi, xi) part of a decision; the RSU allocation is always
/// filled by the closed-form allocator afterwards.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision decide(const Environment& env, Rng& rng) = 0;
};

class GreedyPolicy : public Policy {
 public:
  Decision decide(const Environment& env, Rng& rng) override;
};

class GeneticPolicy : public Policy {
 public:
  explicit GeneticPolicy(GeneticConfig cfg) : cfg_(cfg) {}
  Decision decide(const Environment& env, Rng& rng) override;

 private:
  GeneticConfig cfg_;
};

class LearnedPolicy : public Policy {
 public:
  LearnedPolicy(const QmixLearner& learner, double epsilon) : learner_(learner), epsilon_(epsilon) {}
  Decision decide(const Environment& env, Rng& rng) override;

 private:
  const QmixLearner& learner_;
  double epsilon_;
};

/// Verify the drift bound on every `verify_every`-th slot (0 disables).
EpisodeSummary run_episode(const Scenario& scenario, Policy& policy, std::uint64_t env_seed,
                           Rng& policy_rng, int verify_every = 0);

/// Fresh agents (diffusion or MLP per the trainer config) and mixer.
QmixLearner make_learner(const Scenario& scenario);

struct TrainOptions {
  std::filesystem::path out_dir;  // empty: keep everything in memory
  bool verify_bound = false;
  bool write_checkpoint = true;
  bool progress = false;
};

struct TrainResult {
  std::vector<EpisodeSummary> train;
  std::vector<EpisodeSummary> eval;
  std::vector<LearningRow> curve;
  std::unique_ptr<QmixLearner> learner;
  int bound_checks = 0;
  int bound_violations = 0;
};

/// Mean over the last `window` entries (all if fewer).
double tail_mean(const std::vector<EpisodeSummary>& rows, int window,
                 double EpisodeSummary::*field);

TrainResult train(const ExperimentConfig& config, const TrainOptions& options = {});

/// Reward stored in the replay buffer: scaled, then optionally sign(r)*log(1+|r|).
double learning_reward(double reward, const TrainerConfig& config);

/// Seed of the i-th evaluation environment; the trainer evaluates on i = 0.
std::uint64_t eval_env_seed(std::uint64_t master, int index = 0);

std::vector<EpisodeSummary> run_baseline(const ExperimentConfig& config, PolicyKind kind,
                                         int episodes, const std::filesystem::path& out_dir = {});

nlohmann::json make_checkpoint(const ExperimentConfig& config, const QmixLearner& learner, int episodes);

/// Greedy evaluation episode of a stored learner on the evaluation
/// environment of its config.
EpisodeSummary evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                   const std::filesystem::path& out_dir = {});

struct SweepPoint {
  std::string axis;
  double value = 0.0;
  double final_reward = 0.0;
  double final_completion_time = 0.0;
  double final_queue = 0.0;
};

/// Applies one sweep value to a copy of the config.
ExperimentConfig apply_axis(const ExperimentConfig& config, const std::string& axis, double value);

std::vector<SweepPoint> sweep(const ExperimentConfig& config, const std::string& axis,
                              const std::vector<double>& values, const std::filesystem::path& out_dir = {},
                              bool progress = false);

struct BoundReport {
  int samples = 0;
  int violations = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();  // max of (lhs - rhs) / max(1, |rhs|)
};

/// Random states, decisions, allocations and rates over `scenarios` random
/// cells; checks the drift bound on every sampled transition.
BoundReport verify_bound_random(int samples, std::uint64_t seed, int scenarios = 20);

}  // namespace vecsched
