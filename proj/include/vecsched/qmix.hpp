#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vecsched/diffusion_policy.hpp"
#include "vecsched/neural.hpp"

namespace vecsched {

/// Q_tot = |W2(S)|^T (|W1(S)| q + b1(S)) + b2(S). Four hypernetworks map the
/// joint state S to W1 (embed x agents), b1 (embed), W2 (embed) and b2.
class MixingNet {
 public:
  struct Cache {
    DenseNet::Tape w1, b1, w2, b2;
    Eigen::MatrixXd q;       // agents x batch
    Eigen::MatrixXd hidden;  // embed x batch
  };

  MixingNet() = default;
  MixingNet(int num_agents, int joint_state_dim, int embed, const std::vector<int>& hyper_hidden, Rng& rng);
  MixingNet(int num_agents, int embed, DenseNet w1, DenseNet b1, DenseNet w2, DenseNet b2);

  int num_agents() const { return agents_; }
  int embed() const { return embed_; }
  int state_dim() const { return hyper_w1_.input_dim(); }

  /// states: joint_state_dim x batch, q: agents x batch -> 1 x batch.
  Eigen::RowVectorXd mix(const Eigen::MatrixXd& states, const Eigen::MatrixXd& q,
                         Cache* cache = nullptr) const;

  /// Adds parameter gradients of sum(dtot .* Q_tot) into grad (laid out as
  /// params()) and returns the gradient w.r.t. q.
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::RowVectorXd& dtot,
                           Eigen::VectorXd& grad) const;

  /// Flat concatenation of the four hypernetworks' parameters.
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& p);
  Eigen::Index num_params() const;

  nlohmann::json to_json() const;
  static MixingNet from_json(const nlohmann::json& j);

 private:
  int agents_ = 0;
  int embed_ = 0;
  DenseNet hyper_w1_, hyper_b1_, hyper_w2_, hyper_b2_;
};

struct Transition {
  std::vector<Eigen::VectorXd> states;  // per agent local state
  std::vector<int> actions;
  double reward = 0.0;
  std::vector<Eigen::VectorXd> next_states;
  bool terminal = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_.at(i); }

  /// Indices of `count` distinct transitions drawn uniformly. Throws
  /// std::invalid_argument when count exceeds size().
  std::vector<std::size_t> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Transition> data_;
};

struct LearnerConfig {
  double discount = 0.99;
  double target_rate = 0.001;
  double lr = 5e-4;
  int batch = 32;
  double grad_clip = 10.0;  // global norm; <= 0 disables

  void validate() const;
};

/// Per-agent networks plus the mixer, their target copies and optimizers.
class QmixLearner {
 public:
  QmixLearner(std::vector<std::unique_ptr<AgentNetwork>> agents, MixingNet mixer, LearnerConfig cfg);

  int num_agents() const { return static_cast<int>(agents_.size()); }
  const AgentNetwork& agent(int i) const { return *agents_.at(static_cast<std::size_t>(i)); }
  AgentNetwork& agent(int i) { return *agents_.at(static_cast<std::size_t>(i)); }
  const AgentNetwork& target_agent(int i) const { return *targets_.at(static_cast<std::size_t>(i)); }
  const MixingNet& mixer() const { return mixer_; }
  MixingNet& mixer() { return mixer_; }
  const MixingNet& target_mixer() const { return target_mixer_; }
  const LearnerConfig& config() const { return cfg_; }

  /// Decentralized action choice from each agent's own local state.
  std::vector<int> act(const std::vector<Eigen::VectorXd>& states, double epsilon, Rng& rng) const;

  /// r + discount * target_mix(S', max_a target_q) (no bootstrap on terminal).
  Eigen::RowVectorXd td_targets(const std::vector<const Transition*>& batch, Rng& rng) const;

  /// One Adam step on every agent and the mixer; returns the pre-step loss.
  double train_step(const std::vector<const Transition*>& batch, Rng& rng);

  /// Loss and flat gradient for a batch with the given target values,
  /// without updating anything. Noises are drawn from rng.
  double loss_and_gradient(const std::vector<const Transition*>& batch,
                           const Eigen::RowVectorXd& targets, Rng& rng,
                           std::vector<Eigen::VectorXd>& agent_grads, Eigen::VectorXd& mixer_grad) const;

  void soft_update();
  void soft_update(double rate);

  nlohmann::json to_json() const;
  static QmixLearner from_json(const nlohmann::json& j);

 private:
  std::vector<std::unique_ptr<AgentNetwork>> agents_;
  std::vector<std::unique_ptr<AgentNetwork>> targets_;
  MixingNet mixer_;
  MixingNet target_mixer_;
  std::vector<Adam> agent_opt_;
  Adam mixer_opt_;
  LearnerConfig cfg_;
};

std::unique_ptr<AgentNetwork> agent_from_json(const nlohmann::json& j);

/// Joint state: concatenation of the local states.
Eigen::VectorXd joint_state(const std::vector<Eigen::VectorXd>& states);

}  // namespace vecsched
