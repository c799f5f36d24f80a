#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vecsched/allocator.hpp"
#include "vecsched/diffusion_policy.hpp"
#include "vecsched/lyapunov.hpp"
#include "vecsched/queueing.hpp"

namespace vecsched {

/// Plain dense agent: s_i -> action values directly.
class MlpAgent : public AgentNetwork {
 public:
  explicit MlpAgent(DenseNet net);

  static MlpAgent create(int state_dim, int action_dim, const std::vector<int>& hidden, Rng& rng);

  std::string kind() const override { return "mlp"; }
  int state_dim() const override { return net_.input_dim(); }
  int action_dim() const override { return net_.output_dim(); }

  Eigen::MatrixXd q_values(const Eigen::MatrixXd& states, Rng& rng,
                           ForwardCache* cache = nullptr) const override;
  void backward(const ForwardCache& cache, const Eigen::MatrixXd& dq,
                Eigen::VectorXd& grad) const override;

  DenseNet& net() override { return net_; }
  const DenseNet& net() const override { return net_; }
  std::unique_ptr<AgentNetwork> clone() const override;
  nlohmann::json to_json() const override;

 private:
  DenseNet net_;
};

/// Builds a full decision from per-CV action indices: decodes (phi, xi) and
/// fills the RSU allocation from the closed-form allocator.
Decision complete_decision(const std::vector<int>& actions, const QueueState& queues,
                           const EdgeSystem& system, const LyapunovParams& params);

/// Number of actions for one CV: (L_k + 1) * J.
int action_count(const EdgeSystem& system, int cv);

/// Smallest-intermediate-data layer (never full-local), shortest queue
/// among the type's RSU queue and the SV queues (RSU wins ties, then the
/// lowest SV).
Decision greedy_decide(const QueueState& queues, const EdgeSystem& system,
                       const LyapunovParams& params);

struct GeneticConfig {
  int population = 50;
  int generations = 30;
  double crossover = 0.8;
  double mutation = 0.1;
  int elitism = 2;

  void validate() const;
};

struct GeneticResult {
  Decision decision;
  std::vector<int> actions;
  double fitness = 0.0;
  std::vector<double> best_trace;  // best fitness after init and each generation
};

/// Per-slot objective of a chromosome (one action index per CV).
double chromosome_fitness(const std::vector<int>& actions, const QueueState& queues,
                          const EdgeSystem& system, const SlotRates& rates,
                          const LyapunovParams& params);

/// Size of the joint action space, saturating at UINT64_MAX.
std::uint64_t joint_action_space(const EdgeSystem& system);

/// Genetic search over chromosomes. When the population is at least the
/// joint space size the initial population enumerates the whole space.
GeneticResult genetic_optimize(const QueueState& queues, const EdgeSystem& system,
                               const SlotRates& rates, const LyapunovParams& params,
                               const GeneticConfig& cfg, Rng& rng);

}  // namespace vecsched
