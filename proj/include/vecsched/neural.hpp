#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vecsched/network_env.hpp"

namespace vecsched {

enum class Activation { Identity, Relu, Tanh };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation act);

/// Fully connected network over column batches (one sample per column).
///
/// Parameters live in one flat vector; layer l stores W_l (out x in,
/// column-major) followed by b_l. That makes Adam, soft updates and
/// checkpoints plain vector operations.
class DenseNet {
 public:
  /// Activations saved by forward() for backward().
  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;  // input of each layer
    std::vector<Eigen::MatrixXd> outputs;  // post-activation output of each layer
  };

  DenseNet() = default;
  /// widths = {in, h1, ..., out}; one activation per affine layer.
  DenseNet(std::vector<int> widths, std::vector<Activation> activations);

  /// Convenience: hidden layers share `hidden`, the last layer is identity.
  static DenseNet mlp(int in, const std::vector<int>& hidden, int out,
                      Activation hidden_act = Activation::Relu);

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int num_layers() const { return static_cast<int>(activations_.size()); }
  Eigen::Index num_params() const { return params_.size(); }
  const std::vector<int>& widths() const { return widths_; }
  const std::vector<Activation>& activations() const { return activations_; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  /// Glorot-uniform weights, zero biases.
  void init_glorot(Rng& rng);

  /// x is input_dim x batch. Pass a tape to enable backward().
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape* tape = nullptr) const;

  /// Adds d(sum(upstream .* y))/d(params) into grad and returns the input
  /// gradient. grad must have num_params() entries.
  Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                           Eigen::VectorXd& grad) const;

  nlohmann::json to_json() const;
  static DenseNet from_json(const nlohmann::json& j);

 private:
  Eigen::Map<const Eigen::MatrixXd> weight(int l) const;
  Eigen::Map<const Eigen::VectorXd> bias(int l) const;

  std::vector<int> widths_;
  std::vector<Activation> activations_;
  std::vector<Eigen::Index> offsets_;  // start of W_l in params_
  Eigen::VectorXd params_;
};

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n, AdamConfig cfg = {});

  /// Bias-corrected update of params in place.
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  nlohmann::json to_json() const;
  static Adam from_json(const nlohmann::json& j);

 private:
  AdamConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

/// target <- rate * online + (1 - rate) * target.
void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double rate);

/// Central differences of f around params; params is restored afterwards.
Eigen::VectorXd numeric_gradient(const std::function<double()>& f, Eigen::VectorXd& params,
                                 double h = 1e-5);

/// ||a - b|| / max(||a||, ||b||, floor).
double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-12);

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace vecsched
