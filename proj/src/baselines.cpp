#include "vecsched/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vecsched {

MlpAgent::MlpAgent(DenseNet net) : net_(std::move(net)) {}

MlpAgent MlpAgent::create(int state_dim, int action_dim, const std::vector<int>& hidden, Rng& rng) {
  DenseNet net = DenseNet::mlp(state_dim, hidden, action_dim);
  net.init_glorot(rng);
  return MlpAgent(std::move(net));
}

Eigen::MatrixXd MlpAgent::q_values(const Eigen::MatrixXd& states, Rng&, ForwardCache* cache) const {
  if (!cache) return net_.forward(states);
  cache->tapes.assign(1, {});
  return net_.forward(states, &cache->tapes[0]);
}

void MlpAgent::backward(const ForwardCache& cache, const Eigen::MatrixXd& dq,
                        Eigen::VectorXd& grad) const {
  if (cache.tapes.size() != 1) throw std::invalid_argument("cache does not match network");
  net_.backward(cache.tapes[0], dq, grad);
}

std::unique_ptr<AgentNetwork> MlpAgent::clone() const { return std::make_unique<MlpAgent>(*this); }

nlohmann::json MlpAgent::to_json() const { return {{"kind", kind()}, {"net", net_.to_json()}}; }

int action_count(const EdgeSystem& system, int cv) {
  return (system.model_of(cv).num_layers() + 1) * system.num_edge_nodes();
}

Decision complete_decision(const std::vector<int>& actions, const QueueState& queues,
                           const EdgeSystem& system, const LyapunovParams& params) {
  if (static_cast<int>(actions.size()) != system.num_cvs()) {
    throw std::invalid_argument("one action per CV required");
  }
  Decision d;
  for (int i = 0; i < system.num_cvs(); ++i) {
    const auto [phi, xi] = decode_action(actions[i], system.model_of(i).num_layers(),
                                         system.num_edge_nodes());
    d.phi.push_back(phi);
    d.xi.push_back(xi);
  }
  assign_rsu_allocation(d, queues, system, params);
  return d;
}

Decision greedy_decide(const QueueState& queues, const EdgeSystem& system,
                       const LyapunovParams& params) {
  Decision d;
  for (int i = 0; i < system.num_cvs(); ++i) {
    const auto& model = system.model_of(i);
    int phi = 1;
    for (int l = 2; l <= model.num_layers(); ++l) {
      if (model.input_bytes(l) < model.input_bytes(phi)) phi = l;
    }
    int xi = kRsuTarget;
    double best = queues.rsu[system.cv_type[i]];
    for (int j = 0; j < system.num_svs(); ++j) {
      if (queues.veh[j] < best) {
        best = queues.veh[j];
        xi = j + 2;
      }
    }
    d.phi.push_back(phi);
    d.xi.push_back(xi);
  }
  assign_rsu_allocation(d, queues, system, params);
  return d;
}

void GeneticConfig::validate() const {
  if (population < 2) throw std::invalid_argument("genetic population must be at least 2");
  if (generations < 0) throw std::invalid_argument("genetic generations must be non-negative");
  if (crossover < 0.0 || crossover > 1.0) throw std::invalid_argument("crossover probability outside [0,1]");
  if (mutation < 0.0 || mutation > 1.0) throw std::invalid_argument("mutation probability outside [0,1]");
  if (elitism < 0 || elitism > population) throw std::invalid_argument("elitism outside [0, population]");
}

double chromosome_fitness(const std::vector<int>& actions, const QueueState& queues,
                          const EdgeSystem& system, const SlotRates& rates,
                          const LyapunovParams& params) {
  const Decision d = complete_decision(actions, queues, system, params);
  const auto delays = slot_delays(queues, d, rates, system);
  return per_slot_objective(queues, d, delays, system, params);
}

std::uint64_t joint_action_space(const EdgeSystem& system) {
  std::uint64_t n = 1;
  for (int i = 0; i < system.num_cvs(); ++i) {
    const auto a = static_cast<std::uint64_t>(action_count(system, i));
    if (n > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    n *= a;
  }
  return n;
}

namespace {

struct Individual {
  std::vector<int> genes;
  double fitness = 0.0;
};

}  // namespace

GeneticResult genetic_optimize(const QueueState& queues, const EdgeSystem& system,
                               const SlotRates& rates, const LyapunovParams& params,
                               const GeneticConfig& cfg, Rng& rng) {
  cfg.validate();
  const int n = system.num_cvs();
  std::vector<int> radix(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) radix[i] = action_count(system, i);

  auto evaluate = [&](Individual& ind) {
    ind.fitness = chromosome_fitness(ind.genes, queues, system, rates, params);
  };
  auto random_gene = [&](int i) {
    std::uniform_int_distribution<int> g(0, radix[i] - 1);
    return g(rng);
  };

  std::vector<Individual> pop;
  const std::uint64_t space = joint_action_space(system);
  if (space <= static_cast<std::uint64_t>(cfg.population)) {
    for (std::uint64_t code = 0; code < space; ++code) {
      Individual ind;
      std::uint64_t c = code;
      for (int i = 0; i < n; ++i) {
        ind.genes.push_back(static_cast<int>(c % static_cast<std::uint64_t>(radix[i])));
        c /= static_cast<std::uint64_t>(radix[i]);
      }
      pop.push_back(std::move(ind));
    }
  } else {
    for (int p = 0; p < cfg.population; ++p) {
      Individual ind;
      for (int i = 0; i < n; ++i) ind.genes.push_back(random_gene(i));
      pop.push_back(std::move(ind));
    }
  }
  for (auto& ind : pop) evaluate(ind);

  auto by_fitness = [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; };
  std::stable_sort(pop.begin(), pop.end(), by_fitness);

  GeneticResult out;
  Individual best = pop.front();
  out.best_trace.push_back(best.fitness);

  const int size = static_cast<int>(pop.size());
  std::uniform_int_distribution<int> pick(0, size - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto tournament = [&]() -> const Individual& {
    const int a = pick(rng);
    const int b = pick(rng);
    return pop[std::min(a, b)];  // pop is sorted, lower index is fitter
  };

  for (int g = 0; g < cfg.generations; ++g) {
    std::vector<Individual> next(pop.begin(), pop.begin() + std::min(cfg.elitism, size));
    while (static_cast<int>(next.size()) < size) {
      Individual c1 = tournament();
      Individual c2 = tournament();
      if (u(rng) < cfg.crossover) {
        for (int i = 0; i < n; ++i) {
          if (u(rng) < 0.5) std::swap(c1.genes[i], c2.genes[i]);
        }
      }
      for (auto* c : {&c1, &c2}) {
        for (int i = 0; i < n; ++i) {
          if (u(rng) < cfg.mutation) c->genes[i] = random_gene(i);
        }
        evaluate(*c);
        if (static_cast<int>(next.size()) < size) next.push_back(std::move(*c));
      }
    }
    pop = std::move(next);
    std::stable_sort(pop.begin(), pop.end(), by_fitness);
    if (pop.front().fitness < best.fitness) best = pop.front();
    out.best_trace.push_back(best.fitness);
  }

  out.actions = best.genes;
  out.fitness = best.fitness;
  out.decision = complete_decision(best.genes, queues, system, params);
  return out;
}

}  // namespace vecsched
