#include "vecsched/qmix.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vecsched/baselines.hpp"

namespace vecsched {

namespace {

// Elementwise sign, 0 at 0; the subgradient used for |x|.
Eigen::MatrixXd sign_of(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

}  // namespace

MixingNet::MixingNet(int num_agents, int joint_state_dim, int embed,
                     const std::vector<int>& hyper_hidden, Rng& rng)
    : agents_(num_agents), embed_(embed) {
  if (num_agents < 1 || joint_state_dim < 1 || embed < 1) {
    throw std::invalid_argument("mixing network dimensions must be positive");
  }
  hyper_w1_ = DenseNet::mlp(joint_state_dim, hyper_hidden, embed * num_agents);
  hyper_b1_ = DenseNet::mlp(joint_state_dim, hyper_hidden, embed);
  hyper_w2_ = DenseNet::mlp(joint_state_dim, hyper_hidden, embed);
  hyper_b2_ = DenseNet::mlp(joint_state_dim, hyper_hidden, 1);
  for (auto* net : {&hyper_w1_, &hyper_b1_, &hyper_w2_, &hyper_b2_}) net->init_glorot(rng);
}

MixingNet::MixingNet(int num_agents, int embed, DenseNet w1, DenseNet b1, DenseNet w2, DenseNet b2)
    : agents_(num_agents),
      embed_(embed),
      hyper_w1_(std::move(w1)),
      hyper_b1_(std::move(b1)),
      hyper_w2_(std::move(w2)),
      hyper_b2_(std::move(b2)) {
  const int s = hyper_w1_.input_dim();
  if (hyper_b1_.input_dim() != s || hyper_w2_.input_dim() != s || hyper_b2_.input_dim() != s) {
    throw std::invalid_argument("hypernetworks must share the joint state input");
  }
  if (hyper_w1_.output_dim() != embed * num_agents || hyper_b1_.output_dim() != embed ||
      hyper_w2_.output_dim() != embed || hyper_b2_.output_dim() != 1) {
    throw std::invalid_argument("hypernetwork output sizes do not match embed/agents");
  }
}

Eigen::RowVectorXd MixingNet::mix(const Eigen::MatrixXd& states, const Eigen::MatrixXd& q,
                                  Cache* cache) const {
  if (q.rows() != agents_ || q.cols() != states.cols()) {
    throw std::invalid_argument("mix: q must be agents x batch matching the states");
  }
  Cache local;
  Cache& c = cache ? *cache : local;
  const Eigen::MatrixXd w1 = hyper_w1_.forward(states, &c.w1);
  const Eigen::MatrixXd b1 = hyper_b1_.forward(states, &c.b1);
  const Eigen::MatrixXd w2 = hyper_w2_.forward(states, &c.w2);
  const Eigen::MatrixXd b2 = hyper_b2_.forward(states, &c.b2);
  c.q = q;
  c.hidden.resize(embed_, q.cols());

  Eigen::RowVectorXd out(q.cols());
  for (Eigen::Index e = 0; e < q.cols(); ++e) {
    const Eigen::Map<const Eigen::MatrixXd> W1(w1.col(e).data(), embed_, agents_);
    c.hidden.col(e) = W1.cwiseAbs() * q.col(e) + b1.col(e);
    out[e] = w2.col(e).cwiseAbs().dot(c.hidden.col(e)) + b2(0, e);
  }
  return out;
}

Eigen::MatrixXd MixingNet::backward(const Cache& c, const Eigen::RowVectorXd& dtot,
                                    Eigen::VectorXd& grad) const {
  const Eigen::Index batch = c.q.cols();
  if (dtot.size() != batch) throw std::invalid_argument("mixer backward: batch mismatch");
  if (grad.size() != num_params()) throw std::invalid_argument("mixer backward: gradient size mismatch");
  const Eigen::MatrixXd& w1 = c.w1.outputs.back();
  const Eigen::MatrixXd& w2 = c.w2.outputs.back();
  const Eigen::MatrixXd s1 = sign_of(w1);
  const Eigen::MatrixXd s2 = sign_of(w2);

  Eigen::MatrixXd d_w1(w1.rows(), batch), d_b1(embed_, batch), d_w2(embed_, batch);
  Eigen::MatrixXd d_b2(1, batch), dq(agents_, batch);
  for (Eigen::Index e = 0; e < batch; ++e) {
    const double g = dtot[e];
    const Eigen::VectorXd dh = g * w2.col(e).cwiseAbs();
    d_w2.col(e) = (g * c.hidden.col(e)).cwiseProduct(s2.col(e));
    d_b2(0, e) = g;
    d_b1.col(e) = dh;
    const Eigen::Map<const Eigen::MatrixXd> W1(w1.col(e).data(), embed_, agents_);
    const Eigen::Map<const Eigen::MatrixXd> S1(s1.col(e).data(), embed_, agents_);
    const Eigen::MatrixXd dW1 = (dh * c.q.col(e).transpose()).cwiseProduct(S1);
    d_w1.col(e) = Eigen::Map<const Eigen::VectorXd>(dW1.data(), dW1.size());
    dq.col(e) = W1.cwiseAbs().transpose() * dh;
  }

  Eigen::Index off = 0;
  auto accumulate = [&](const DenseNet& net, const DenseNet::Tape& tape, const Eigen::MatrixXd& up) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(net.num_params());
    net.backward(tape, up, g);
    grad.segment(off, g.size()) += g;
    off += g.size();
  };
  accumulate(hyper_w1_, c.w1, d_w1);
  accumulate(hyper_b1_, c.b1, d_b1);
  accumulate(hyper_w2_, c.w2, d_w2);
  accumulate(hyper_b2_, c.b2, d_b2);
  return dq;
}

Eigen::Index MixingNet::num_params() const {
  return hyper_w1_.num_params() + hyper_b1_.num_params() + hyper_w2_.num_params() +
         hyper_b2_.num_params();
}

Eigen::VectorXd MixingNet::params() const {
  Eigen::VectorXd p(num_params());
  p << hyper_w1_.params(), hyper_b1_.params(), hyper_w2_.params(), hyper_b2_.params();
  return p;
}

void MixingNet::set_params(const Eigen::VectorXd& p) {
  if (p.size() != num_params()) throw std::invalid_argument("mixer parameter size mismatch");
  Eigen::Index off = 0;
  for (auto* net : {&hyper_w1_, &hyper_b1_, &hyper_w2_, &hyper_b2_}) {
    net->params() = p.segment(off, net->num_params());
    off += net->num_params();
  }
}

nlohmann::json MixingNet::to_json() const {
  return {{"agents", agents_},
          {"embed", embed_},
          {"hyper_w1", hyper_w1_.to_json()},
          {"hyper_b1", hyper_b1_.to_json()},
          {"hyper_w2", hyper_w2_.to_json()},
          {"hyper_b2", hyper_b2_.to_json()}};
}

MixingNet MixingNet::from_json(const nlohmann::json& j) {
  return MixingNet(j.at("agents").get<int>(), j.at("embed").get<int>(),
                   DenseNet::from_json(j.at("hyper_w1")), DenseNet::from_json(j.at("hyper_b1")),
                   DenseNet::from_json(j.at("hyper_w2")), DenseNet::from_json(j.at("hyper_b2")));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  data_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (count > data_.size()) {
    throw std::invalid_argument("cannot sample " + std::to_string(count) + " transitions from " +
                                std::to_string(data_.size()));
  }
  std::vector<std::size_t> idx(data_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

void LearnerConfig::validate() const {
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must be in [0,1)");
  if (!(target_rate > 0.0 && target_rate <= 1.0)) throw std::invalid_argument("target rate must be in (0,1]");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch < 1) throw std::invalid_argument("batch size must be positive");
}

QmixLearner::QmixLearner(std::vector<std::unique_ptr<AgentNetwork>> agents, MixingNet mixer,
                         LearnerConfig cfg)
    : agents_(std::move(agents)), mixer_(std::move(mixer)), target_mixer_(mixer_), cfg_(cfg) {
  cfg_.validate();
  if (static_cast<int>(agents_.size()) != mixer_.num_agents()) {
    throw std::invalid_argument("mixer agent count does not match agents");
  }
  int joint = 0;
  for (const auto& a : agents_) {
    targets_.push_back(a->clone());
    agent_opt_.emplace_back(a->net().num_params(), AdamConfig{cfg_.lr});
    joint += a->state_dim();
  }
  if (joint != mixer_.state_dim()) throw std::invalid_argument("mixer state size does not match agents");
  mixer_opt_ = Adam(mixer_.num_params(), AdamConfig{cfg_.lr});
}

std::vector<int> QmixLearner::act(const std::vector<Eigen::VectorXd>& states, double epsilon,
                                  Rng& rng) const {
  if (states.size() != agents_.size()) throw std::invalid_argument("one state per agent required");
  std::vector<int> actions;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Eigen::MatrixXd q = agents_[i]->q_values(states[i], rng);
    actions.push_back(select_action(q.col(0), epsilon, rng));
  }
  return actions;
}

namespace {

Eigen::MatrixXd stack_agent(const std::vector<const Transition*>& batch, std::size_t i, bool next) {
  const auto& first = next ? batch.front()->next_states.at(i) : batch.front()->states.at(i);
  Eigen::MatrixXd m(first.size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t e = 0; e < batch.size(); ++e) {
    m.col(static_cast<Eigen::Index>(e)) = next ? batch[e]->next_states.at(i) : batch[e]->states.at(i);
  }
  return m;
}

Eigen::MatrixXd stack_joint(const std::vector<const Transition*>& batch, bool next) {
  Eigen::MatrixXd m;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const Eigen::VectorXd s = joint_state(next ? batch[e]->next_states : batch[e]->states);
    if (e == 0) m.resize(s.size(), static_cast<Eigen::Index>(batch.size()));
    m.col(static_cast<Eigen::Index>(e)) = s;
  }
  return m;
}

}  // namespace

Eigen::VectorXd joint_state(const std::vector<Eigen::VectorXd>& states) {
  Eigen::Index n = 0;
  for (const auto& s : states) n += s.size();
  Eigen::VectorXd out(n);
  Eigen::Index off = 0;
  for (const auto& s : states) {
    out.segment(off, s.size()) = s;
    off += s.size();
  }
  return out;
}

Eigen::RowVectorXd QmixLearner::td_targets(const std::vector<const Transition*>& batch, Rng& rng) const {
  const auto B = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd qmax(num_agents(), B);
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const Eigen::MatrixXd q = targets_[i]->q_values(stack_agent(batch, i, true), rng);
    qmax.row(static_cast<Eigen::Index>(i)) = q.colwise().maxCoeff();
  }
  const Eigen::RowVectorXd boot = target_mixer_.mix(stack_joint(batch, true), qmax);
  Eigen::RowVectorXd y(B);
  for (Eigen::Index e = 0; e < B; ++e) {
    y[e] = batch[e]->reward + (batch[e]->terminal ? 0.0 : cfg_.discount * boot[e]);
  }
  return y;
}

double QmixLearner::loss_and_gradient(const std::vector<const Transition*>& batch,
                                      const Eigen::RowVectorXd& targets, Rng& rng,
                                      std::vector<Eigen::VectorXd>& agent_grads,
                                      Eigen::VectorXd& mixer_grad) const {
  const auto B = static_cast<Eigen::Index>(batch.size());
  if (targets.size() != B) throw std::invalid_argument("target count does not match batch");
  std::vector<ForwardCache> caches(agents_.size());
  std::vector<Eigen::MatrixXd> qs(agents_.size());
  Eigen::MatrixXd chosen(num_agents(), B);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    qs[i] = agents_[i]->q_values(stack_agent(batch, i, false), rng, &caches[i]);
    for (Eigen::Index e = 0; e < B; ++e) {
      chosen(static_cast<Eigen::Index>(i), e) = qs[i](batch[e]->actions.at(i), e);
    }
  }
  MixingNet::Cache mc;
  const Eigen::RowVectorXd total = mixer_.mix(stack_joint(batch, false), chosen, &mc);
  const Eigen::RowVectorXd diff = total - targets;
  const double loss = 0.5 * diff.squaredNorm() / static_cast<double>(B);

  mixer_grad = Eigen::VectorXd::Zero(mixer_.num_params());
  const Eigen::MatrixXd dq = mixer_.backward(mc, diff / static_cast<double>(B), mixer_grad);
  agent_grads.assign(agents_.size(), {});
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Eigen::MatrixXd up = Eigen::MatrixXd::Zero(qs[i].rows(), B);
    for (Eigen::Index e = 0; e < B; ++e) up(batch[e]->actions.at(i), e) = dq(static_cast<Eigen::Index>(i), e);
    agent_grads[i] = Eigen::VectorXd::Zero(agents_[i]->net().num_params());
    agents_[i]->backward(caches[i], up, agent_grads[i]);
  }
  return loss;
}

double QmixLearner::train_step(const std::vector<const Transition*>& batch, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const Eigen::RowVectorXd y = td_targets(batch, rng);
  std::vector<Eigen::VectorXd> agent_grads;
  Eigen::VectorXd mixer_grad;
  const double loss = loss_and_gradient(batch, y, rng, agent_grads, mixer_grad);

  if (cfg_.grad_clip > 0.0) {
    double sq = mixer_grad.squaredNorm();
    for (const auto& g : agent_grads) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) {
      const double s = cfg_.grad_clip / norm;
      mixer_grad *= s;
      for (auto& g : agent_grads) g *= s;
    }
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) agent_opt_[i].step(agents_[i]->net().params(), agent_grads[i]);
  Eigen::VectorXd mp = mixer_.params();
  mixer_opt_.step(mp, mixer_grad);
  mixer_.set_params(mp);
  return loss;
}

void QmixLearner::soft_update() { soft_update(cfg_.target_rate); }

void QmixLearner::soft_update(double rate) {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    vecsched::soft_update(targets_[i]->net().params(), agents_[i]->net().params(), rate);
  }
  Eigen::VectorXd tp = target_mixer_.params();
  vecsched::soft_update(tp, mixer_.params(), rate);
  target_mixer_.set_params(tp);
}

nlohmann::json QmixLearner::to_json() const {
  nlohmann::json agents = nlohmann::json::array();
  nlohmann::json targets = nlohmann::json::array();
  nlohmann::json opts = nlohmann::json::array();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents.push_back(agents_[i]->to_json());
    targets.push_back(targets_[i]->to_json());
    opts.push_back(agent_opt_[i].to_json());
  }
  return {{"config",
           {{"discount", cfg_.discount},
            {"target_rate", cfg_.target_rate},
            {"lr", cfg_.lr},
            {"batch", cfg_.batch},
            {"grad_clip", cfg_.grad_clip}}},
          {"agents", agents},
          {"target_agents", targets},
          {"agent_optimizers", opts},
          {"mixer", mixer_.to_json()},
          {"target_mixer", target_mixer_.to_json()},
          {"mixer_optimizer", mixer_opt_.to_json()}};
}

QmixLearner QmixLearner::from_json(const nlohmann::json& j) {
  const auto& c = j.at("config");
  LearnerConfig cfg;
  cfg.discount = c.at("discount").get<double>();
  cfg.target_rate = c.at("target_rate").get<double>();
  cfg.lr = c.at("lr").get<double>();
  cfg.batch = c.at("batch").get<int>();
  cfg.grad_clip = c.at("grad_clip").get<double>();
  std::vector<std::unique_ptr<AgentNetwork>> agents;
  for (const auto& a : j.at("agents")) agents.push_back(agent_from_json(a));
  QmixLearner learner(std::move(agents), MixingNet::from_json(j.at("mixer")), cfg);
  const auto& targets = j.at("target_agents");
  const auto& opts = j.at("agent_optimizers");
  for (std::size_t i = 0; i < learner.agents_.size(); ++i) {
    learner.targets_[i] = agent_from_json(targets.at(i));
    learner.agent_opt_[i] = Adam::from_json(opts.at(i));
  }
  learner.target_mixer_ = MixingNet::from_json(j.at("target_mixer"));
  learner.mixer_opt_ = Adam::from_json(j.at("mixer_optimizer"));
  return learner;
}

std::unique_ptr<AgentNetwork> agent_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "diffusion") return std::make_unique<DiffusionAgent>(DiffusionAgent::from_json(j));
  if (kind == "mlp") return std::make_unique<MlpAgent>(DenseNet::from_json(j.at("net")));
  throw std::invalid_argument("unknown agent kind: " + kind);
}

}  // namespace vecsched
