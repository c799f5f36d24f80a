#include "vecsched/diffusion_policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vecsched {

DiffusionSchedule DiffusionSchedule::build(int steps, double beta_min, double beta_max) {
  if (steps < 1) throw std::invalid_argument("denoising steps must be at least 1");
  if (!(beta_min > 0.0) || !(beta_max >= beta_min)) {
    throw std::invalid_argument("need 0 < beta_min <= beta_max");
  }
  DiffusionSchedule s;
  s.steps = steps;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  const auto n = static_cast<std::size_t>(steps) + 1;
  s.beta.assign(n, 0.0);
  s.alpha.assign(n, 1.0);
  s.alpha_hat.assign(n, 1.0);
  s.beta_hat.assign(n, 0.0);
  const double M = steps;
  for (int m = 1; m <= steps; ++m) {
    const double e = -beta_min / M - (2.0 * m - 1.0) / (2.0 * M * M) * (beta_max - beta_min);
    s.beta[m] = -std::expm1(e);
    s.alpha[m] = 1.0 - s.beta[m];
    s.alpha_hat[m] = s.alpha_hat[m - 1] * s.alpha[m];
    s.beta_hat[m] = (1.0 - s.alpha_hat[m - 1]) / (1.0 - s.alpha_hat[m]) * s.beta[m];
  }
  return s;
}

DiffusionAgent::DiffusionAgent(DenseNet noise_net, DiffusionSchedule schedule, int state_dim,
                               int action_dim)
    : net_(std::move(noise_net)),
      schedule_(std::move(schedule)),
      state_dim_(state_dim),
      action_dim_(action_dim) {
  if (net_.input_dim() != action_dim + 1 + state_dim || net_.output_dim() != action_dim) {
    throw std::invalid_argument("noise network shape does not match state/action dims");
  }
}

DiffusionAgent DiffusionAgent::create(int state_dim, int action_dim, const std::vector<int>& hidden,
                                      const DiffusionSchedule& schedule, Rng& rng) {
  DenseNet net = DenseNet::mlp(action_dim + 1 + state_dim, hidden, action_dim);
  net.init_glorot(rng);
  return DiffusionAgent(std::move(net), schedule, state_dim, action_dim);
}

namespace {

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = n(rng);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd DiffusionAgent::q_values(const Eigen::MatrixXd& states, Rng& rng,
                                         ForwardCache* cache) const {
  const Eigen::Index batch = states.cols();
  Eigen::MatrixXd x = standard_normal(action_dim_, batch, rng);
  std::vector<Eigen::MatrixXd> noises(static_cast<std::size_t>(schedule_.steps) + 1);
  for (int m = schedule_.steps; m >= 2; --m) noises[m] = standard_normal(action_dim_, batch, rng);
  return denoise_from(x, noises, states, cache);
}

Eigen::MatrixXd DiffusionAgent::denoise_from(const Eigen::MatrixXd& x_top,
                                             const std::vector<Eigen::MatrixXd>& noises,
                                             const Eigen::MatrixXd& states,
                                             ForwardCache* cache) const {
  if (states.rows() != state_dim_) throw std::invalid_argument("state dimension mismatch");
  if (x_top.rows() != action_dim_ || x_top.cols() != states.cols()) {
    throw std::invalid_argument("x^M shape mismatch");
  }
  const int M = schedule_.steps;
  const Eigen::Index batch = states.cols();
  if (cache) cache->tapes.assign(static_cast<std::size_t>(M) + 1, {});

  Eigen::MatrixXd in(net_.input_dim(), batch);
  in.bottomRows(state_dim_) = states;
  Eigen::MatrixXd x = x_top;
  for (int m = M; m >= 1; --m) {
    in.topRows(action_dim_) = x;
    in.row(action_dim_).setConstant(static_cast<double>(m) / M);
    const Eigen::MatrixXd eps_hat = net_.forward(in, cache ? &cache->tapes[m] : nullptr);
    const double a = schedule_.alpha[m];
    const double c = (1.0 - a) / std::sqrt(1.0 - schedule_.alpha_hat[m]);
    x = (x - c * eps_hat) / std::sqrt(a);
    if (m > 1 && schedule_.beta_hat[m] > 0.0) {
      const auto& n = noises.at(static_cast<std::size_t>(m));
      if (n.rows() != action_dim_ || n.cols() != batch) throw std::invalid_argument("noise shape mismatch");
      x += std::sqrt(schedule_.beta_hat[m]) * n;
    }
  }
  return x;
}

void DiffusionAgent::backward(const ForwardCache& cache, const Eigen::MatrixXd& dq,
                              Eigen::VectorXd& grad) const {
  const int M = schedule_.steps;
  if (static_cast<int>(cache.tapes.size()) != M + 1) throw std::invalid_argument("cache does not match chain");
  Eigen::MatrixXd g = dq;  // gradient w.r.t. x^{m-1}
  for (int m = 1; m <= M; ++m) {
    const double a = schedule_.alpha[m];
    const double c = (1.0 - a) / std::sqrt(1.0 - schedule_.alpha_hat[m]);
    const Eigen::MatrixXd upstream = (-c / std::sqrt(a)) * g;
    const Eigen::MatrixXd d_in = net_.backward(cache.tapes[m], upstream, grad);
    g = g / std::sqrt(a) + d_in.topRows(action_dim_);
  }
}

std::unique_ptr<AgentNetwork> DiffusionAgent::clone() const {
  return std::make_unique<DiffusionAgent>(*this);
}

nlohmann::json DiffusionAgent::to_json() const {
  return {{"kind", kind()},
          {"state_dim", state_dim_},
          {"action_dim", action_dim_},
          {"denoise_steps", schedule_.steps},
          {"beta_min", schedule_.beta_min},
          {"beta_max", schedule_.beta_max},
          {"net", net_.to_json()}};
}

DiffusionAgent DiffusionAgent::from_json(const nlohmann::json& j) {
  return DiffusionAgent(DenseNet::from_json(j.at("net")),
                        DiffusionSchedule::build(j.at("denoise_steps").get<int>(),
                                                 j.at("beta_min").get<double>(),
                                                 j.at("beta_max").get<double>()),
                        j.at("state_dim").get<int>(), j.at("action_dim").get<int>());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  const Eigen::ArrayXd e = (x.array() - x.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

int argmax_lowest(const Eigen::VectorXd& q) {
  if (q.size() == 0) throw std::invalid_argument("empty value vector");
  int best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = static_cast<int>(a);
  }
  return best;
}

int select_action(const Eigen::VectorXd& q, double epsilon, Rng& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
      return pick(rng);
    }
  }
  return argmax_lowest(q);
}

std::pair<int, int> decode_action(int a, int num_layers, int num_edge_nodes) {
  if (num_layers < 1 || num_edge_nodes < 1) throw std::invalid_argument("bad action space");
  if (a < 0 || a >= (num_layers + 1) * num_edge_nodes) {
    throw std::out_of_range("action index " + std::to_string(a) + " out of range");
  }
  return {a / num_edge_nodes + 1, a % num_edge_nodes + 1};
}

int encode_action(int phi, int xi, int num_edge_nodes) {
  return (phi - 1) * num_edge_nodes + (xi - 1);
}

}  // namespace vecsched
