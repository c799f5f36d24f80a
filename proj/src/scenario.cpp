#include "vecsched/scenario.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "vecsched/qmix.hpp"

namespace vecsched {

void ScenarioConfig::validate() const {
  if (num_cvs < 1) throw std::invalid_argument("scenario.num_cvs must be at least 1");
  if (num_edge_nodes < 1) throw std::invalid_argument("scenario.num_edge_nodes must be at least 1");
  if (models.empty()) throw std::invalid_argument("scenario.models must not be empty");
  if (!cv_models.empty()) {
    if (static_cast<int>(cv_models.size()) != num_cvs) {
      throw std::invalid_argument("scenario.cv_models needs one entry per CV");
    }
    for (int k : cv_models) {
      if (k < 0 || k >= static_cast<int>(models.size())) {
        throw std::invalid_argument("scenario.cv_models entry out of range");
      }
    }
  }
  for (const auto* r : {&f_loc_range, &f_veh_range}) {
    if (!((*r)[0] > 0.0) || (*r)[1] < (*r)[0]) throw std::invalid_argument("capacity range must be positive and ordered");
  }
  if (!(f_rsu_max > 0.0)) throw std::invalid_argument("scenario.f_rsu_max must be positive");
  radio.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("scenario.tau must be positive");
  if (slots < 1) throw std::invalid_argument("scenario.slots must be at least 1");
  if (!(v >= 0.0)) throw std::invalid_argument("scenario.V must be non-negative");
  if (!(workload_unit > 0.0) || !(delay_cap > 0.0) || !(queue_norm > 0.0)) {
    throw std::invalid_argument("scenario scaling constants must be positive");
  }
  if (trace_source != "synthetic" && trace_source != "file") {
    throw std::invalid_argument("scenario.trace_source must be 'synthetic' or 'file'");
  }
  if (trace_source == "file" && trace_path.empty()) throw std::invalid_argument("scenario.trace_path required");
  if (!(road_length_m > 0.0) || lanes < 1 || speed_min < 0.0 || speed_max < speed_min) {
    throw std::invalid_argument("scenario road parameters invalid");
  }
}

void TrainerConfig::validate() const {
  if (agent != "mad2rl" && agent != "pqmix") throw std::invalid_argument("trainer.agent must be mad2rl or pqmix");
  if (episodes < 1) throw std::invalid_argument("trainer.episodes must be at least 1");
  if (warmup_episodes < 0) throw std::invalid_argument("trainer.warmup_episodes must be non-negative");
  if (update_cadence != "slot" && update_cadence != "episode") {
    throw std::invalid_argument("trainer.update_cadence must be slot or episode");
  }
  if (batch < 1 || buffer < batch) throw std::invalid_argument("trainer.buffer must hold at least one batch");
  if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0)) {
    throw std::invalid_argument("exploration rates must be in [0,1]");
  }
  if (!(eps_anneal_fraction > 0.0)) throw std::invalid_argument("trainer.eps_anneal_fraction must be positive");
  if (hidden.empty() || hyper_hidden.empty() || mixer_embed < 1) {
    throw std::invalid_argument("network widths must be non-empty");
  }
  if (denoise_steps < 1) throw std::invalid_argument("trainer.denoise_steps must be at least 1");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("trainer.reward_scale must be positive");
  if (reward_transform != "linear" && reward_transform != "symlog") {
    throw std::invalid_argument("trainer.reward_transform must be linear or symlog");
  }
  if (final_window < 1) throw std::invalid_argument("trainer.final_window must be at least 1");
  LearnerConfig{discount, target_rate, lr, batch, grad_clip}.validate();
  DiffusionSchedule::build(denoise_steps, beta_min, beta_max);
}

void ExperimentConfig::validate() const {
  scenario.validate();
  trainer.validate();
  genetic.validate();
}

namespace {

// Reads optional keys from one config object and rejects anything unknown.
class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw std::invalid_argument("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config " + name_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw std::invalid_argument("unknown config key " + name_ + "." + k);
    }
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  const auto& s = scenario;
  const auto& t = trainer;
  nlohmann::json js = {
      {"num_cvs", s.num_cvs},
      {"num_edge_nodes", s.num_edge_nodes},
      {"models", s.models},
      {"cv_models", s.cv_models},
      {"f_loc_range", s.f_loc_range},
      {"f_veh_range", s.f_veh_range},
      {"f_rsu_max", s.f_rsu_max},
      {"bandwidth_hz", s.radio.bandwidth_hz},
      {"tx_power_dbm", s.radio.tx_power_dbm},
      {"noise_dbm", s.radio.noise_dbm},
      {"tau", s.tau},
      {"slots", s.slots},
      {"V", s.v},
      {"workload_unit", s.workload_unit},
      {"delay_cap", s.delay_cap},
      {"queue_norm", s.queue_norm},
      {"trace_source", s.trace_source},
      {"trace_path", s.trace_path},
      {"road_length_m", s.road_length_m},
      {"speed_min", s.speed_min},
      {"speed_max", s.speed_max},
      {"lanes", s.lanes},
      {"lane_width_m", s.lane_width_m},
      {"rsu_offset_m", s.rsu_offset_m},
  };
  nlohmann::json jt = {
      {"agent", t.agent},
      {"episodes", t.episodes},
      {"warmup_episodes", t.warmup_episodes},
      {"update_cadence", t.update_cadence},
      {"batch", t.batch},
      {"buffer", t.buffer},
      {"lr", t.lr},
      {"discount", t.discount},
      {"target_rate", t.target_rate},
      {"grad_clip", t.grad_clip},
      {"eps_start", t.eps_start},
      {"eps_end", t.eps_end},
      {"eps_anneal_fraction", t.eps_anneal_fraction},
      {"hidden", t.hidden},
      {"hyper_hidden", t.hyper_hidden},
      {"mixer_embed", t.mixer_embed},
      {"denoise_steps", t.denoise_steps},
      {"beta_min", t.beta_min},
      {"beta_max", t.beta_max},
      {"reward_scale", t.reward_scale},
      {"reward_transform", t.reward_transform},
      {"final_window", t.final_window},
  };
  nlohmann::json jg = {
      {"population", genetic.population},
      {"generations", genetic.generations},
      {"crossover", genetic.crossover},
      {"mutation", genetic.mutation},
      {"elitism", genetic.elitism},
  };
  return {{"seed", seed}, {"scenario", js}, {"trainer", jt}, {"genetic", jg}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  Section top(j, "config");
  top.get("seed", c.seed);
  nlohmann::json empty = nlohmann::json::object();
  const auto& js = j.contains("scenario") ? j.at("scenario") : empty;
  const auto& jt = j.contains("trainer") ? j.at("trainer") : empty;
  const auto& jg = j.contains("genetic") ? j.at("genetic") : empty;
  nlohmann::json dummy;
  top.get("scenario", dummy);
  top.get("trainer", dummy);
  top.get("genetic", dummy);
  top.finish();

  auto& s = c.scenario;
  Section ss(js, "scenario");
  ss.get("num_cvs", s.num_cvs);
  ss.get("num_edge_nodes", s.num_edge_nodes);
  ss.get("models", s.models);
  ss.get("cv_models", s.cv_models);
  ss.get("f_loc_range", s.f_loc_range);
  ss.get("f_veh_range", s.f_veh_range);
  ss.get("f_rsu_max", s.f_rsu_max);
  ss.get("bandwidth_hz", s.radio.bandwidth_hz);
  ss.get("tx_power_dbm", s.radio.tx_power_dbm);
  ss.get("noise_dbm", s.radio.noise_dbm);
  ss.get("tau", s.tau);
  ss.get("slots", s.slots);
  ss.get("V", s.v);
  ss.get("workload_unit", s.workload_unit);
  ss.get("delay_cap", s.delay_cap);
  ss.get("queue_norm", s.queue_norm);
  ss.get("trace_source", s.trace_source);
  ss.get("trace_path", s.trace_path);
  ss.get("road_length_m", s.road_length_m);
  ss.get("speed_min", s.speed_min);
  ss.get("speed_max", s.speed_max);
  ss.get("lanes", s.lanes);
  ss.get("lane_width_m", s.lane_width_m);
  ss.get("rsu_offset_m", s.rsu_offset_m);
  ss.finish();

  auto& t = c.trainer;
  Section st(jt, "trainer");
  st.get("agent", t.agent);
  st.get("episodes", t.episodes);
  st.get("warmup_episodes", t.warmup_episodes);
  st.get("update_cadence", t.update_cadence);
  st.get("batch", t.batch);
  st.get("buffer", t.buffer);
  st.get("lr", t.lr);
  st.get("discount", t.discount);
  st.get("target_rate", t.target_rate);
  st.get("grad_clip", t.grad_clip);
  st.get("eps_start", t.eps_start);
  st.get("eps_end", t.eps_end);
  st.get("eps_anneal_fraction", t.eps_anneal_fraction);
  st.get("hidden", t.hidden);
  st.get("hyper_hidden", t.hyper_hidden);
  st.get("mixer_embed", t.mixer_embed);
  st.get("denoise_steps", t.denoise_steps);
  st.get("beta_min", t.beta_min);
  st.get("beta_max", t.beta_max);
  st.get("reward_scale", t.reward_scale);
  st.get("reward_transform", t.reward_transform);
  st.get("final_window", t.final_window);
  st.finish();

  auto& g = c.genetic;
  Section sg(jg, "genetic");
  sg.get("population", g.population);
  sg.get("generations", g.generations);
  sg.get("crossover", g.crossover);
  sg.get("mutation", g.mutation);
  sg.get("elitism", g.elitism);
  sg.finish();

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) {
  return derive_seed(master, static_cast<std::uint64_t>(stream), index);
}

Scenario build_scenario(const ExperimentConfig& config) {
  config.validate();
  const auto& sc = config.scenario;
  Scenario out;
  out.config = config;

  EdgeSystem& sys = out.system;
  for (std::size_t k = 0; k < sc.models.size(); ++k) {
    DnnModel m = load_catalog_model(sc.models[k]);
    // Type ids follow the scenario's catalog order.
    std::vector<LayerSpec> layers(m.layers().begin(), m.layers().end());
    sys.models.emplace_back(static_cast<int>(k), std::move(layers), m.rho(), m.name());
  }
  for (int i = 0; i < sc.num_cvs; ++i) {
    sys.cv_type.push_back(sc.cv_models.empty() ? i % static_cast<int>(sc.models.size()) : sc.cv_models[i]);
  }
  Rng rng(derive_seed(config.seed, SeedStream::Capacity));
  std::uniform_real_distribution<double> loc(sc.f_loc_range[0], sc.f_loc_range[1]);
  std::uniform_real_distribution<double> veh(sc.f_veh_range[0], sc.f_veh_range[1]);
  for (int i = 0; i < sc.num_cvs; ++i) sys.f_loc.push_back(loc(rng));
  for (int j = 0; j < sc.num_edge_nodes - 1; ++j) sys.f_veh.push_back(veh(rng));
  sys.f_rsu_max = sc.f_rsu_max;
  sys.tau = sc.tau;
  sys.validate();

  out.lyapunov = LyapunovParams{sc.v, sc.workload_unit, sc.delay_cap};
  out.lyapunov.validate();

  if (sc.trace_source == "file") {
    out.file_trace = MobilityTrace::load_csv(sc.trace_path);
    const auto& tr = *out.file_trace;
    if (tr.num_cvs() < sc.num_cvs || tr.num_svs() < sc.num_edge_nodes - 1) {
      throw std::invalid_argument("trace file has too few vehicles for the scenario");
    }
    if (tr.num_slots() < sc.slots) throw std::invalid_argument("trace file shorter than one episode");
  }
  return out;
}

namespace {

// Keeps the first n CVs and m SVs of a trace.
MobilityTrace select_vehicles(const MobilityTrace& tr, int n, int m) {
  std::vector<std::vector<Position>> cv(static_cast<std::size_t>(tr.num_slots()));
  std::vector<std::vector<Position>> sv(static_cast<std::size_t>(tr.num_slots()));
  for (int t = 1; t <= tr.num_slots(); ++t) {
    for (int i = 0; i < n; ++i) cv[t - 1].push_back(tr.cv(t, i));
    for (int j = 0; j < m; ++j) sv[t - 1].push_back(tr.sv(t, j));
  }
  return MobilityTrace(std::move(cv), std::move(sv), tr.rsu(), tr.road_length());
}

}  // namespace

Environment::Environment(const Scenario& scenario, std::uint64_t env_seed)
    : scenario_(&scenario), fading_(derive_seed(env_seed, 2, 0)) {
  const auto& sc = scenario.config.scenario;
  slots_ = sc.slots;
  if (scenario.file_trace) {
    const auto& full = *scenario.file_trace;
    Rng pick(derive_seed(env_seed, 3, 0));
    std::uniform_int_distribution<int> offset(1, full.num_slots() - slots_ + 1);
    trace_ = select_vehicles(full.window(offset(pick), slots_), sc.num_cvs, sc.num_edge_nodes - 1);
  } else {
    HighwayParams hp;
    hp.num_cvs = sc.num_cvs;
    hp.num_svs = sc.num_edge_nodes - 1;
    hp.length_m = sc.road_length_m;
    hp.speed_min = sc.speed_min;
    hp.speed_max = sc.speed_max;
    hp.lanes = sc.lanes;
    hp.lane_width_m = sc.lane_width_m;
    hp.rsu_offset_m = sc.rsu_offset_m;
    hp.slots = slots_;
    hp.tau = sc.tau;
    trace_ = synth_highway_trace(hp, derive_seed(env_seed, 1, 0));
  }
  queues_ = QueueState::zeros(scenario.system);
  rates_ = rates_for_slot(trace_, sc.radio, t_, fading_);
}

std::vector<Eigen::VectorXd> Environment::local_states() const {
  const auto& sys = scenario_->system;
  const double qn = scenario_->config.scenario.queue_norm;
  const double len = trace_.road_length();
  const int t = std::min(t_, slots_);
  const int J = sys.num_edge_nodes();
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < sys.num_cvs(); ++i) {
    Eigen::VectorXd s(2 * J + 1);
    int r = 0;
    s[r++] = queues_.loc[i] / qn;
    s[r++] = queues_.rsu[sys.cv_type[i]] / qn;
    for (int j = 0; j < sys.num_svs(); ++j) s[r++] = queues_.veh[j] / qn;
    s[r++] = trace_.cv(t, i).x / len;
    for (int j = 0; j < sys.num_svs(); ++j) s[r++] = trace_.sv(t, j).x / len;
    out.push_back(std::move(s));
  }
  return out;
}

StepOutcome Environment::step(const Decision& decision) {
  if (done()) throw std::logic_error("episode already finished");
  const auto& sys = scenario_->system;
  validate_decision(decision, sys);
  StepOutcome out;
  out.before = queues_;
  out.delays = slot_delays(queues_, decision, rates_, sys);
  out.reward = common_reward(queues_, decision, out.delays, sys, scenario_->lyapunov);
  out.completion_time = penalty_delay(out.delays, scenario_->lyapunov.delay_cap);
  queues_ = update_queues(queues_, decision, sys);
  out.after = queues_;
  ++t_;
  if (!done()) rates_ = rates_for_slot(trace_, scenario_->config.scenario.radio, t_, fading_);
  return out;
}

}  // namespace vecsched
