#include "vecsched/neural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vecsched {

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "identity";
}

DenseNet::DenseNet(std::vector<int> widths, std::vector<Activation> activations)
    : widths_(std::move(widths)), activations_(std::move(activations)) {
  if (widths_.size() < 2) throw std::invalid_argument("network needs at least two widths");
  if (activations_.size() != widths_.size() - 1) {
    throw std::invalid_argument("one activation per layer required");
  }
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] < 1 || widths_[l + 1] < 1) throw std::invalid_argument("widths must be positive");
    offsets_.push_back(n);
    n += static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1] + widths_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(n);
}

DenseNet DenseNet::mlp(int in, const std::vector<int>& hidden, int out, Activation hidden_act) {
  std::vector<int> widths{in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  std::vector<Activation> acts(hidden.size(), hidden_act);
  acts.push_back(Activation::Identity);
  return DenseNet(std::move(widths), std::move(acts));
}

Eigen::Map<const Eigen::MatrixXd> DenseNet::weight(int l) const {
  return {params_.data() + offsets_[l], widths_[l + 1], widths_[l]};
}

Eigen::Map<const Eigen::VectorXd> DenseNet::bias(int l) const {
  const Eigen::Index off = offsets_[l] + static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1];
  return {params_.data() + off, widths_[l + 1]};
}

void DenseNet::init_glorot(Rng& rng) {
  for (int l = 0; l < num_layers(); ++l) {
    const double bound = std::sqrt(6.0 / (widths_[l] + widths_[l + 1]));
    std::uniform_real_distribution<double> u(-bound, bound);
    const Eigen::Index nw = static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1];
    for (Eigen::Index i = 0; i < nw; ++i) params_[offsets_[l] + i] = u(rng);
    params_.segment(offsets_[l] + nw, widths_[l + 1]).setZero();
  }
}

namespace {

void apply(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::Relu: z = z.cwiseMax(0.0); break;
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
  }
}

// Multiplies g in place by the activation derivative, expressed through the
// layer output y.
void apply_derivative(Activation act, const Eigen::MatrixXd& y, Eigen::MatrixXd& g) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::Relu: g.array() = (y.array() > 0.0).select(g.array(), 0.0); break;
    case Activation::Tanh: g = (g.array() * (1.0 - y.array().square())).matrix(); break;
  }
}

}  // namespace

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& x, Tape* tape) const {
  if (x.rows() != input_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.rows()) +
                                " rows, expected " + std::to_string(input_dim()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->outputs.clear();
  }
  Eigen::MatrixXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weight(l) * h;
    z.colwise() += bias(l);
    apply(activations_[l], z);
    if (tape) {
      tape->inputs.push_back(std::move(h));
      tape->outputs.push_back(z);
    }
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd DenseNet::backward(const Tape& tape, const Eigen::MatrixXd& upstream,
                                   Eigen::VectorXd& grad) const {
  if (static_cast<int>(tape.inputs.size()) != num_layers()) {
    throw std::invalid_argument("backward: tape does not match network");
  }
  if (upstream.rows() != output_dim() || upstream.cols() != tape.outputs.back().cols()) {
    throw std::invalid_argument("backward: upstream gradient shape mismatch");
  }
  if (grad.size() != num_params()) throw std::invalid_argument("backward: gradient size mismatch");

  Eigen::MatrixXd g = upstream;
  for (int l = num_layers() - 1; l >= 0; --l) {
    apply_derivative(activations_[l], tape.outputs[l], g);
    const Eigen::Index nw = static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], widths_[l + 1], widths_[l]);
    gw.noalias() += g * tape.inputs[l].transpose();
    grad.segment(offsets_[l] + nw, widths_[l + 1]) += g.rowwise().sum();
    g = weight(l).transpose() * g;
  }
  return g;
}

nlohmann::json DenseNet::to_json() const {
  nlohmann::json acts = nlohmann::json::array();
  for (auto a : activations_) acts.push_back(activation_name(a));
  return {{"widths", widths_}, {"activations", acts}, {"params", vector_to_json(params_)}};
}

DenseNet DenseNet::from_json(const nlohmann::json& j) {
  std::vector<Activation> acts;
  for (const auto& a : j.at("activations")) acts.push_back(parse_activation(a.get<std::string>()));
  DenseNet net(j.at("widths").get<std::vector<int>>(), std::move(acts));
  Eigen::VectorXd p = vector_from_json(j.at("params"));
  if (p.size() != net.num_params()) throw std::invalid_argument("checkpoint parameter count mismatch");
  net.params_ = std::move(p);
  return net;
}

Adam::Adam(Eigen::Index n, AdamConfig cfg)
    : cfg_(cfg), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (grad.size() != m_.size() || params.size() != m_.size()) {
    throw std::invalid_argument("adam: size mismatch");
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  params.array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
}

nlohmann::json Adam::to_json() const {
  return {{"lr", cfg_.lr},       {"beta1", cfg_.beta1},       {"beta2", cfg_.beta2},
          {"eps", cfg_.eps},     {"t", t_},                   {"m", vector_to_json(m_)},
          {"v", vector_to_json(v_)}};
}

Adam Adam::from_json(const nlohmann::json& j) {
  AdamConfig cfg{j.at("lr").get<double>(), j.at("beta1").get<double>(),
                 j.at("beta2").get<double>(), j.at("eps").get<double>()};
  Adam a;
  a.cfg_ = cfg;
  a.m_ = vector_from_json(j.at("m"));
  a.v_ = vector_from_json(j.at("v"));
  a.t_ = j.at("t").get<long>();
  return a;
}

void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double rate) {
  if (target.size() != online.size()) throw std::invalid_argument("soft update size mismatch");
  target = rate * online + (1.0 - rate) * target;
}

Eigen::VectorXd numeric_gradient(const std::function<double()>& f, Eigen::VectorXd& params,
                                 double h) {
  Eigen::VectorXd g(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = f();
    params[i] = keep - h;
    const double down = f();
    params[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor) {
  const double scale = std::max({a.norm(), b.norm(), floor});
  return (a - b).norm() / scale;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

}  // namespace vecsched
