#include "vecsched/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "vecsched/output.hpp"

namespace vecsched {

PolicyKind parse_policy(const std::string& name) {
  if (name == "mad2rl") return PolicyKind::Mad2rl;
  if (name == "pqmix") return PolicyKind::Pqmix;
  if (name == "greedy") return PolicyKind::Greedy;
  if (name == "genetic") return PolicyKind::Genetic;
  throw std::invalid_argument("unknown policy: " + name);
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Mad2rl: return "mad2rl";
    case PolicyKind::Pqmix: return "pqmix";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Genetic: return "genetic";
  }
  return "unknown";
}

Decision GreedyPolicy::decide(const Environment& env, Rng&) {
  return greedy_decide(env.queues(), env.scenario().system, env.scenario().lyapunov);
}

Decision GeneticPolicy::decide(const Environment& env, Rng& rng) {
  const auto& scn = env.scenario();
  return genetic_optimize(env.queues(), scn.system, env.rates(), scn.lyapunov, cfg_, rng).decision;
}

Decision LearnedPolicy::decide(const Environment& env, Rng& rng) {
  const auto actions = learner_.act(env.local_states(), epsilon_, rng);
  return complete_decision(actions, env.queues(), env.scenario().system, env.scenario().lyapunov);
}

namespace {

// Running per-episode aggregates.
struct EpisodeAccumulator {
  double reward = 0.0;
  double completion = 0.0;
  double queue = 0.0;
  double loss = 0.0;
  int losses = 0;
  int slots = 0;

  void add(const StepOutcome& out) {
    reward += out.reward;
    completion += out.completion_time;
    queue += out.after.total();
    ++slots;
  }

  void fill(EpisodeSummary& s) const {
    s.mean_reward = reward / slots;
    s.mean_completion_time = completion / slots;
    s.mean_queue = queue / slots;
    s.mean_loss = losses > 0 ? loss / losses : kNaN;
  }
};

bool check_bound(const StepOutcome& out, const Decision& d, const Scenario& scn) {
  return verify_drift_bound(out.before, d, out.delays, scn.system, scn.lyapunov).holds;
}

}  // namespace

EpisodeSummary run_episode(const Scenario& scenario, Policy& policy, std::uint64_t env_seed,
                           Rng& policy_rng, int verify_every) {
  Environment env(scenario, env_seed);
  EpisodeSummary summary;
  EpisodeAccumulator acc;
  while (!env.done()) {
    const int t = env.slot();
    const Decision d = policy.decide(env, policy_rng);
    const StepOutcome out = env.step(d);
    acc.add(out);
    summary.queues.push_back(out.after);
    if (verify_every > 0 && (t - 1) % verify_every == 0) {
      ++summary.bound_checks;
      if (!check_bound(out, d, scenario)) ++summary.bound_violations;
    }
  }
  acc.fill(summary);
  return summary;
}

QmixLearner make_learner(const Scenario& scenario) {
  const auto& t = scenario.config.trainer;
  const auto& sys = scenario.system;
  Rng rng(derive_seed(scenario.config.seed, SeedStream::ModelInit));
  const int sdim = scenario.local_state_dim();
  std::vector<std::unique_ptr<AgentNetwork>> agents;
  const auto schedule = DiffusionSchedule::build(t.denoise_steps, t.beta_min, t.beta_max);
  for (int i = 0; i < sys.num_cvs(); ++i) {
    const int adim = action_count(sys, i);
    if (t.agent == "mad2rl") {
      agents.push_back(std::make_unique<DiffusionAgent>(DiffusionAgent::create(sdim, adim, t.hidden, schedule, rng)));
    } else {
      agents.push_back(std::make_unique<MlpAgent>(MlpAgent::create(sdim, adim, t.hidden, rng)));
    }
  }
  MixingNet mixer(sys.num_cvs(), sdim * sys.num_cvs(), t.mixer_embed, t.hyper_hidden, rng);
  LearnerConfig lc{t.discount, t.target_rate, t.lr, t.batch, t.grad_clip};
  return QmixLearner(std::move(agents), std::move(mixer), lc);
}

double tail_mean(const std::vector<EpisodeSummary>& rows, int window, double EpisodeSummary::*field) {
  if (rows.empty()) return kNaN;
  const std::size_t n = std::min(rows.size(), static_cast<std::size_t>(std::max(window, 1)));
  double s = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) s += rows[i].*field;
  return s / static_cast<double>(n);
}

std::uint64_t eval_env_seed(std::uint64_t master, int index) {
  return derive_seed(master, SeedStream::EvalEnv, static_cast<std::uint64_t>(index));
}

nlohmann::json make_checkpoint(const ExperimentConfig& config, const QmixLearner& learner, int episodes) {
  const std::string cfg_text = config.to_json().dump();
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : cfg_text) hash = (hash ^ c) * 1099511628211ULL;
  return {{"format", "vec-sched-checkpoint"},
          {"version", 1},
          {"config", config.to_json()},
          {"config_hash", hash},
          {"episodes", episodes},
          {"learner", learner.to_json()}};
}

double learning_reward(double reward, const TrainerConfig& config) {
  const double r = reward * config.reward_scale;
  if (config.reward_transform == "symlog") return std::copysign(std::log1p(std::abs(r)), r);
  return r;
}

TrainResult train(const ExperimentConfig& config, const TrainOptions& options) {
  const Scenario scn = build_scenario(config);
  const auto& tc = config.trainer;
  const int T = config.scenario.slots;

  TrainResult result;
  result.learner = std::make_unique<QmixLearner>(make_learner(scn));
  QmixLearner& learner = *result.learner;
  ReplayBuffer buffer(static_cast<std::size_t>(tc.buffer));
  Rng rng(derive_seed(config.seed, SeedStream::Learner));

  const double anneal_steps = tc.eps_anneal_fraction * tc.episodes * T;
  auto epsilon_at = [&](long step) {
    const double frac = std::min(1.0, static_cast<double>(step) / anneal_steps);
    return tc.eps_start + (tc.eps_end - tc.eps_start) * frac;
  };
  auto learn = [&]() {
    const auto idx = buffer.sample(static_cast<std::size_t>(tc.batch), rng);
    std::vector<const Transition*> batch;
    for (auto i : idx) batch.push_back(&buffer.at(i));
    const double loss = learner.train_step(batch, rng);
    learner.soft_update();
    return loss;
  };

  long step = 0;
  for (int ep = 0; ep < tc.episodes; ++ep) {
    Environment env(scn, derive_seed(config.seed, SeedStream::TrainEnv, static_cast<std::uint64_t>(ep)));
    EpisodeSummary summary;
    summary.episode = ep + 1;
    summary.phase = "train";
    EpisodeAccumulator acc;
    const bool learning = ep >= tc.warmup_episodes;
    auto states = env.local_states();
    double eps = 0.0;
    while (!env.done()) {
      const int t = env.slot();
      eps = epsilon_at(step);
      const auto actions = learner.act(states, eps, rng);
      const Decision d = complete_decision(actions, env.queues(), scn.system, scn.lyapunov);
      const StepOutcome out = env.step(d);
      auto next = env.local_states();
      buffer.push({states, actions, learning_reward(out.reward, tc), next, env.done()});
      states = std::move(next);

      LearningRow row{ep + 1, step, kNaN, out.reward, eps};
      if (learning && tc.update_cadence == "slot" && buffer.size() >= static_cast<std::size_t>(tc.batch)) {
        row.loss = learn();
        acc.loss += row.loss;
        ++acc.losses;
      }
      if (options.verify_bound && (t - 1) % 10 == 0) {
        ++summary.bound_checks;
        if (!check_bound(out, d, scn)) ++summary.bound_violations;
      }
      acc.add(out);
      summary.queues.push_back(out.after);
      result.curve.push_back(row);
      ++step;
    }
    if (learning && tc.update_cadence == "episode" && buffer.size() >= static_cast<std::size_t>(tc.batch)) {
      const double loss = learn();
      result.curve.back().loss = loss;
      acc.loss += loss;
      ++acc.losses;
    }
    acc.fill(summary);
    summary.epsilon = eps;
    result.bound_checks += summary.bound_checks;
    result.bound_violations += summary.bound_violations;
    summary.queues.clear();  // only evaluation trajectories are kept
    result.train.push_back(std::move(summary));

    LearnedPolicy greedy(learner, 0.0);
    Rng eval_rng(derive_seed(config.seed, SeedStream::EvalPolicy));
    EpisodeSummary ev = run_episode(scn, greedy, eval_env_seed(config.seed), eval_rng,
                                    options.verify_bound ? 10 : 0);
    ev.episode = ep + 1;
    ev.phase = "eval";
    ev.epsilon = 0.0;
    result.bound_checks += ev.bound_checks;
    result.bound_violations += ev.bound_violations;
    result.eval.push_back(std::move(ev));

    if (options.progress && ((ep + 1) % 10 == 0 || ep + 1 == tc.episodes)) {
      std::cerr << "episode " << ep + 1 << "/" << tc.episodes << "  eval reward "
                << result.eval.back().mean_reward << "  eval queue " << result.eval.back().mean_queue
                << "\n";
    }
  }

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    std::vector<EpisodeSummary> rows;
    for (std::size_t i = 0; i < result.train.size(); ++i) {
      rows.push_back(result.train[i]);
      rows.push_back(result.eval[i]);
    }
    write_metrics_csv(options.out_dir / "metrics.csv", rows);
    write_queues_csv(options.out_dir / "queues.csv", result.eval, scn.system);
    write_learning_curve_csv(options.out_dir / "learning_curve.csv", result.curve);
    write_json(options.out_dir / "config_resolved.json", config.to_json());
    if (options.write_checkpoint) {
      write_json(options.out_dir / "checkpoint.json", make_checkpoint(config, learner, tc.episodes));
    }
  }
  return result;
}

std::vector<EpisodeSummary> run_baseline(const ExperimentConfig& config, PolicyKind kind, int episodes,
                                         const std::filesystem::path& out_dir) {
  if (kind != PolicyKind::Greedy && kind != PolicyKind::Genetic) {
    throw std::invalid_argument("baseline policy must be greedy or genetic");
  }
  if (episodes < 1) throw std::invalid_argument("baseline needs at least one episode");
  const Scenario scn = build_scenario(config);
  std::vector<EpisodeSummary> rows;
  for (int e = 0; e < episodes; ++e) {
    GreedyPolicy greedy;
    GeneticPolicy genetic(config.genetic);
    Policy& policy = kind == PolicyKind::Greedy ? static_cast<Policy&>(greedy) : genetic;
    Rng rng(derive_seed(config.seed, SeedStream::Baseline, static_cast<std::uint64_t>(e)));
    EpisodeSummary s = run_episode(scn, policy, eval_env_seed(config.seed, e), rng);
    s.episode = e + 1;
    s.phase = policy_name(kind);
    rows.push_back(std::move(s));
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_metrics_csv(out_dir / "metrics.csv", rows);
    write_queues_csv(out_dir / "queues.csv", rows, scn.system);
    write_json(out_dir / "config_resolved.json", config.to_json());
  }
  return rows;
}

EpisodeSummary evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                   const std::filesystem::path& out_dir) {
  std::ifstream in(checkpoint);
  if (!in) throw std::runtime_error("cannot open checkpoint " + checkpoint.string());
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "vec-sched-checkpoint") {
    throw std::invalid_argument(checkpoint.string() + " is not a checkpoint file");
  }
  const ExperimentConfig config = ExperimentConfig::from_json(j.at("config"));
  const QmixLearner learner = QmixLearner::from_json(j.at("learner"));
  const Scenario scn = build_scenario(config);
  LearnedPolicy policy(learner, 0.0);
  Rng rng(derive_seed(config.seed, SeedStream::EvalPolicy));
  EpisodeSummary s = run_episode(scn, policy, eval_env_seed(config.seed), rng);
  s.episode = j.at("episodes").get<int>();
  s.phase = "eval";
  s.epsilon = 0.0;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_metrics_csv(out_dir / "metrics.csv", {s});
    write_queues_csv(out_dir / "queues.csv", {s}, scn.system);
    write_json(out_dir / "config_resolved.json", config.to_json());
  }
  return s;
}

ExperimentConfig apply_axis(const ExperimentConfig& config, const std::string& axis, double value) {
  ExperimentConfig c = config;
  auto as_int = [&](double v) {
    if (v != std::floor(v) || v < 0) throw std::invalid_argument("axis " + axis + " needs whole numbers");
    return static_cast<int>(v);
  };
  if (axis == "n_cv") {
    c.scenario.num_cvs = as_int(value);
    if (static_cast<int>(c.scenario.cv_models.size()) != c.scenario.num_cvs) c.scenario.cv_models.clear();
  } else if (axis == "n_sv") {
    c.scenario.num_edge_nodes = as_int(value) + 1;
  } else if (axis == "V") {
    c.scenario.v = value;
  } else if (axis == "denoise_M") {
    c.trainer.denoise_steps = as_int(value);
  } else {
    throw std::invalid_argument("unknown sweep axis: " + axis + " (n_cv, n_sv, V, denoise_M)");
  }
  c.validate();
  return c;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& config, const std::string& axis,
                              const std::vector<double>& values, const std::filesystem::path& out_dir,
                              bool progress) {
  std::vector<SweepPoint> points;
  for (double v : values) {
    const ExperimentConfig c = apply_axis(config, axis, v);
    TrainOptions opt;
    opt.write_checkpoint = false;
    opt.progress = progress;
    if (!out_dir.empty()) opt.out_dir = out_dir / (axis + "_" + format_number(v));
    const TrainResult r = train(c, opt);
    const int w = c.trainer.final_window;
    points.push_back({axis, v, tail_mean(r.eval, w, &EpisodeSummary::mean_reward),
                      tail_mean(r.eval, w, &EpisodeSummary::mean_completion_time),
                      tail_mean(r.eval, w, &EpisodeSummary::mean_queue)});
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_sweep_csv(out_dir / "sweep.csv", points);
    write_json(out_dir / "config_resolved.json", config.to_json());
  }
  return points;
}

BoundReport verify_bound_random(int samples, std::uint64_t seed, int scenarios) {
  if (samples < 1 || scenarios < 1) throw std::invalid_argument("need positive sample and scenario counts");
  std::vector<DnnModel> catalog;
  for (const char* name : {"alexnet", "resnet18", "vgg16"}) catalog.push_back(load_catalog_model(name));

  BoundReport report;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int sc = 0; sc < scenarios; ++sc) {
    Rng rng(derive_seed(seed, SeedStream::Verify, static_cast<std::uint64_t>(sc)));
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto log_uniform = [&](double lo, double hi) { return std::pow(10.0, lo + (hi - lo) * u(rng)); };

    EdgeSystem sys;
    const int types = uniform_int(1, 3);
    for (int k = 0; k < types; ++k) {
      const auto& m = catalog[static_cast<std::size_t>(uniform_int(0, 2))];
      std::vector<LayerSpec> layers(m.layers().begin(), m.layers().end());
      sys.models.emplace_back(k, std::move(layers), m.rho(), m.name());
    }
    const int I = uniform_int(1, 6);
    const int J = uniform_int(1, 5);
    for (int i = 0; i < I; ++i) {
      sys.cv_type.push_back(uniform_int(0, types - 1));
      sys.f_loc.push_back(log_uniform(9.0, 10.0));
    }
    for (int j = 0; j < J - 1; ++j) sys.f_veh.push_back(log_uniform(9.0, 10.0));
    sys.f_rsu_max = log_uniform(9.5, 11.0);
    sys.tau = std::array<double, 3>{0.5, 1.0, 2.0}[static_cast<std::size_t>(uniform_int(0, 2))];
    sys.validate();
    LyapunovParams lp{log_uniform(-1.0, 2.0), u(rng) < 0.5 ? 1.0 : 1e9, 1e6};

    const int count = samples / scenarios + (sc < samples % scenarios ? 1 : 0);
    for (int n = 0; n < count; ++n) {
      QueueState q = QueueState::zeros(sys);
      for (auto* v : {&q.loc, &q.rsu, &q.veh}) {
        for (auto& x : *v) x = u(rng) < 0.2 ? 0.0 : log_uniform(6.0, 12.0);
      }
      std::vector<int> actions;
      for (int i = 0; i < I; ++i) actions.push_back(uniform_int(0, action_count(sys, i) - 1));
      Decision d = complete_decision(actions, q, sys, lp);
      if (u(rng) < 0.5) {
        // Random feasible split instead of the optimal one.
        double total = 0.0;
        for (auto& f : d.rsu_alloc) total += (f = u(rng));
        const double used = u(rng);
        for (auto& f : d.rsu_alloc) f = total > 0.0 ? f / total * used * sys.f_rsu_max : 0.0;
      }
      SlotRates rates;
      for (int i = 0; i < I; ++i) {
        rates.to_rsu.push_back(u(rng) < 0.05 ? 0.0 : log_uniform(5.0, 9.0));
        std::vector<double> row;
        for (int j = 0; j < J - 1; ++j) row.push_back(u(rng) < 0.05 ? 0.0 : log_uniform(5.0, 9.0));
        rates.to_sv.push_back(std::move(row));
      }
      const auto delays = slot_delays(q, d, rates, sys);
      const BoundCheck b = verify_drift_bound(q, d, delays, sys, lp);
      ++report.samples;
      if (!b.holds) ++report.violations;
      report.worst_gap = std::max(report.worst_gap, (b.lhs - b.rhs) / std::max(1.0, std::abs(b.rhs)));
    }
  }
  return report;
}

}  // namespace vecsched
