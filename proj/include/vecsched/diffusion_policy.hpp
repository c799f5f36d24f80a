#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vecsched/neural.hpp"

namespace vecsched {

/// Arrays are indexed by step m = 1..M; entry 0 holds the m = 0 convention
/// (alpha_hat[0] = 1, everything else 0).
struct DiffusionSchedule {
  int steps = 0;
  double beta_min = 0.1;
  double beta_max = 10.0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_hat;
  std::vector<double> beta_hat;

  /// beta_m = 1 - exp(-beta_min/M - (2m-1)/(2M^2) * (beta_max - beta_min)).
  static DiffusionSchedule build(int steps, double beta_min, double beta_max);
};

/// Intermediate values kept by a batched forward pass so the agent can
/// backpropagate through it later. Sampled noises are stored implicitly in
/// the chain values and treated as constants.
struct ForwardCache {
  std::vector<DenseNet::Tape> tapes;
};

/// Maps local states (state_dim x batch) to per-action values
/// (action_dim x batch).
class AgentNetwork {
 public:
  virtual ~AgentNetwork() = default;

  virtual std::string kind() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;

  /// May draw from rng. Fill `cache` to allow backward().
  virtual Eigen::MatrixXd q_values(const Eigen::MatrixXd& states, Rng& rng,
                                   ForwardCache* cache = nullptr) const = 0;
  /// Adds d(sum(dq .* q))/d(params) into grad.
  virtual void backward(const ForwardCache& cache, const Eigen::MatrixXd& dq,
                        Eigen::VectorXd& grad) const = 0;

  virtual DenseNet& net() = 0;
  virtual const DenseNet& net() const = 0;
  virtual std::unique_ptr<AgentNetwork> clone() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

/// Reverse-diffusion agent: the noise estimator sees [x^m, m/M, s] and the
/// chain output x^0 is the action-value vector.
class DiffusionAgent : public AgentNetwork {
 public:
  DiffusionAgent(DenseNet noise_net, DiffusionSchedule schedule, int state_dim, int action_dim);

  static DiffusionAgent create(int state_dim, int action_dim, const std::vector<int>& hidden,
                               const DiffusionSchedule& schedule, Rng& rng);

  std::string kind() const override { return "diffusion"; }
  int state_dim() const override { return state_dim_; }
  int action_dim() const override { return action_dim_; }
  const DiffusionSchedule& schedule() const { return schedule_; }

  /// Draws x^M and the per-step noises from rng, then runs the chain.
  Eigen::MatrixXd q_values(const Eigen::MatrixXd& states, Rng& rng,
                           ForwardCache* cache = nullptr) const override;

  /// Runs the chain from a given x^M. noises[m] (m = 2..M) is the standard
  /// normal draw added on the step m -> m-1; the last step adds nothing.
  Eigen::MatrixXd denoise_from(const Eigen::MatrixXd& x_top, const std::vector<Eigen::MatrixXd>& noises,
                               const Eigen::MatrixXd& states, ForwardCache* cache = nullptr) const;

  void backward(const ForwardCache& cache, const Eigen::MatrixXd& dq,
                Eigen::VectorXd& grad) const override;

  DenseNet& net() override { return net_; }
  const DenseNet& net() const override { return net_; }
  std::unique_ptr<AgentNetwork> clone() const override;
  nlohmann::json to_json() const override;
  static DiffusionAgent from_json(const nlohmann::json& j);

 private:
  DenseNet net_;
  DiffusionSchedule schedule_;
  int state_dim_;
  int action_dim_;
};

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& x);

/// Epsilon-greedy over q; greedy ties go to the lowest index. One uniform
/// draw is consumed whenever epsilon > 0.
int select_action(const Eigen::VectorXd& q, double epsilon, Rng& rng);

int argmax_lowest(const Eigen::VectorXd& q);

/// a -> (phi, xi) with phi = a / J + 1 and xi = a % J + 1.
std::pair<int, int> decode_action(int a, int num_layers, int num_edge_nodes);
int encode_action(int phi, int xi, int num_edge_nodes);

}  // namespace vecsched
