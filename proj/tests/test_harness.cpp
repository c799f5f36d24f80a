#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vecsched/harness.hpp"
#include "vecsched/output.hpp"

using namespace vecsched;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.seed = 11;
  c.scenario.num_cvs = 2;
  c.scenario.num_edge_nodes = 2;
  c.scenario.models = {"alexnet", "resnet18"};
  c.scenario.slots = 5;
  c.trainer.episodes = 2;
  c.trainer.warmup_episodes = 0;
  c.trainer.batch = 4;
  c.trainer.buffer = 50;
  c.trainer.hidden = {16};
  c.trainer.hyper_hidden = {8};
  c.trainer.mixer_embed = 4;
  c.trainer.denoise_steps = 2;
  c.trainer.final_window = 2;
  c.genetic.population = 8;
  c.genetic.generations = 2;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("vecsched_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("single greedy slot matches a manual computation") {
    ExperimentConfig c;
    c.scenario.num_cvs = 2;
    c.scenario.num_edge_nodes = 2;
    c.scenario.models = {"alexnet"};
    c.scenario.slots = 1;
    const Scenario scn = build_scenario(c);
    const std::uint64_t seed = 77;
    const Environment env(scn, seed);

    // Smallest intermediate data is layer 7 (16384 bytes, tie with 8 goes low);
    // empty queues send both CVs to the RSU, which gives its full capacity to the one type.
    const double remote = 33550336.0 + 8191000.0;
    const double local = 3626197144.0 - remote;
    double delay_sum = 0.0, queue = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double f_loc = scn.system.f_loc[i];
      delay_sum += local / f_loc + 8.0 * 16384.0 / env.rates().to_rsu[i] + remote / 30e9 + remote / 60e9;
      queue += std::max(local - f_loc, 0.0);
    }

    GreedyPolicy greedy;
    Rng rng(1);
    const EpisodeSummary s = run_episode(scn, greedy, seed, rng, 1);
    CHECK(s.mean_reward == doctest::Approx(-10.0 * delay_sum).epsilon(1e-12));
    CHECK(s.mean_completion_time == doctest::Approx(delay_sum).epsilon(1e-12));
    CHECK(s.mean_queue == doctest::Approx(queue).epsilon(1e-12));
    CHECK(s.queues.size() == 1);
    CHECK(s.bound_checks == 1);
    CHECK(s.bound_violations == 0);
  }

  TEST_CASE("episodes are deterministic and reset their queues") {
    const Scenario scn = build_scenario(small_config());
    GreedyPolicy greedy;
    Rng a(1), b(2);
    const EpisodeSummary x = run_episode(scn, greedy, 5, a);
    const EpisodeSummary y = run_episode(scn, greedy, 5, b);
    CHECK(x.mean_reward == y.mean_reward);
    CHECK(x.mean_queue == y.mean_queue);
    CHECK(x.queues.size() == 5);
    const EpisodeSummary z = run_episode(scn, greedy, 6, a);
    CHECK(z.mean_reward != x.mean_reward);
  }

  TEST_CASE("config round trip and validation errors") {
    ExperimentConfig c = small_config();
    c.scenario.v = 3.5;
    const ExperimentConfig back = ExperimentConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
    CHECK(back.to_json() == c.to_json());
    CHECK(c.to_json()["scenario"]["V"] == 3.5);

    auto j = c.to_json();
    j["trainer"]["learning_rate"] = 0.1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    j = c.to_json();
    j["scenario"]["num_cvs"] = "five";
    CHECK_THROWS(ExperimentConfig::from_json(j));

    ExperimentConfig bad = small_config();
    bad.scenario.num_cvs = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.trainer.agent = "dqn";
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.scenario.f_loc_range = {6e9, 4e9};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.scenario.cv_models = {0, 5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.trainer.reward_transform = "sqrt";
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("seed streams are distinct") {
    CHECK(derive_seed(1, SeedStream::TrainEnv, 0) != derive_seed(1, SeedStream::TrainEnv, 1));
    CHECK(derive_seed(1, SeedStream::TrainEnv, 0) != derive_seed(1, SeedStream::EvalEnv, 0));
    CHECK(derive_seed(1, SeedStream::Learner) != derive_seed(2, SeedStream::Learner));
    CHECK(eval_env_seed(1, 0) == derive_seed(1, SeedStream::EvalEnv, 0));
  }

  TEST_CASE("learning reward transform") {
    TrainerConfig t;
    t.reward_scale = 0.5;
    CHECK(learning_reward(-4.0, t) == -2.0);
    t.reward_transform = "symlog";
    CHECK(learning_reward(-4.0, t) == doctest::Approx(-std::log(3.0)));
    CHECK(learning_reward(2.0, t) == doctest::Approx(std::log(2.0)));
    CHECK(learning_reward(0.0, t) == 0.0);
  }

  TEST_CASE("two-episode training writes consistent outputs") {
    for (const char* agent : {"mad2rl", "pqmix"}) {
      ExperimentConfig c = small_config();
      c.trainer.agent = agent;
      TrainOptions opt;
      opt.out_dir = temp_dir(std::string("train_") + agent);
      opt.verify_bound = true;
      const TrainResult r = train(c, opt);
      CHECK(r.train.size() == 2);
      CHECK(r.eval.size() == 2);
      CHECK(r.curve.size() == 10);
      CHECK(r.bound_violations == 0);
      CHECK(r.bound_checks > 0);

      const auto metrics = read_lines(opt.out_dir / "metrics.csv");
      CHECK(metrics.front() == "episode,phase,mean_reward,mean_completion_time,mean_queue,mean_loss,epsilon");
      CHECK(metrics.size() == 5);
      const auto curve = read_lines(opt.out_dir / "learning_curve.csv");
      CHECK(curve.front() == "episode,step,loss,reward,epsilon");
      CHECK(curve.size() == 11);
      const auto queues = read_lines(opt.out_dir / "queues.csv");
      CHECK(queues.front() == "episode,phase,t,loc_1,loc_2,rsu_1,rsu_2,sv_2,total");
      CHECK(queues.size() == 11);
      const auto resolved = ExperimentConfig::load(opt.out_dir / "config_resolved.json");
      CHECK(resolved.to_json() == c.to_json());

      // Reload reproduces the last evaluation episode.
      const EpisodeSummary again = evaluate_checkpoint(opt.out_dir / "checkpoint.json");
      CHECK(again.mean_reward == r.eval.back().mean_reward);
      CHECK(again.mean_queue == r.eval.back().mean_queue);
      std::filesystem::remove_all(opt.out_dir);
    }
  }

  TEST_CASE("training is reproducible in memory") {
    const ExperimentConfig c = small_config();
    const TrainResult a = train(c);
    const TrainResult b = train(c);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
      CHECK(a.curve[i].reward == b.curve[i].reward);
      CHECK((std::isnan(a.curve[i].loss) ? std::isnan(b.curve[i].loss) : a.curve[i].loss == b.curve[i].loss));
    }
    CHECK(a.learner->to_json() == b.learner->to_json());
  }

  TEST_CASE("single-value sweep equals train") {
    const ExperimentConfig c = small_config();
    const TrainResult r = train(c);
    const auto points = sweep(c, "V", {c.scenario.v});
    REQUIRE(points.size() == 1);
    CHECK(points[0].final_reward == tail_mean(r.eval, c.trainer.final_window, &EpisodeSummary::mean_reward));
    CHECK(points[0].final_queue == tail_mean(r.eval, c.trainer.final_window, &EpisodeSummary::mean_queue));
  }

  TEST_CASE("sweep axes edit the right fields") {
    const ExperimentConfig c = small_config();
    CHECK(apply_axis(c, "n_cv", 4).scenario.num_cvs == 4);
    CHECK(apply_axis(c, "n_sv", 3).scenario.num_edge_nodes == 4);
    CHECK(apply_axis(c, "V", 100).scenario.v == 100.0);
    CHECK(apply_axis(c, "denoise_M", 12).trainer.denoise_steps == 12);
    CHECK_THROWS_AS(apply_axis(c, "lr", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(apply_axis(c, "n_cv", 2.5), std::invalid_argument);
  }

  TEST_CASE("baselines write queue trajectories") {
    const ExperimentConfig c = small_config();
    const auto dir = temp_dir("baseline");
    const auto g1 = run_baseline(c, PolicyKind::Genetic, 2, dir);
    const auto g2 = run_baseline(c, PolicyKind::Genetic, 2);
    REQUIRE(g1.size() == 2);
    CHECK(g1[0].mean_reward == g2[0].mean_reward);
    CHECK(g1[1].mean_reward == g2[1].mean_reward);
    CHECK(read_lines(dir / "queues.csv").size() == 11);
    CHECK(read_lines(dir / "metrics.csv").size() == 3);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("random bound verification") {
    const BoundReport r = verify_bound_random(500, 3, 5);
    CHECK(r.samples == 500);
    CHECK(r.violations == 0);
    CHECK(r.worst_gap <= 0.0);
  }

  TEST_CASE("shipped configs load and the default file matches the built-in defaults") {
    const std::filesystem::path dir = VECSCHED_CONFIG_DIR;
    CHECK(ExperimentConfig::load(dir / "default.json").to_json() == ExperimentConfig{}.to_json());
    const auto full = ExperimentConfig::load(dir / "full_scale.json");
    CHECK(full.trainer.episodes == 1000);
    CHECK(full.trainer.hidden == std::vector<int>{256, 256, 256});
    CHECK_NOTHROW(ExperimentConfig::load(dir / "smoke.json"));
  }

  TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1e20) == "1e+20");
    CHECK(format_number(kNaN).empty());
  }
}
