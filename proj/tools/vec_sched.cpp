// vec-sched: command-line entry point for training, evaluation, baselines,
// sweeps and the drift-bound check.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vecsched/harness.hpp"
#include "vecsched/output.hpp"

using namespace vecsched;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_out = true) {
  cmd->add_option("--config", a.config, "experiment config JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "master seed (overrides the config)");
  if (with_out) cmd->add_option("--out", a.out, "output directory");
}

ExperimentConfig resolve(const CommonArgs& a) {
  ExperimentConfig c = a.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(a.config);
  if (a.seed) c.seed = *a.seed;
  c.validate();
  return c;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad sweep value: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("--values needs at least one number");
  return out;
}

void print_summary(const std::string& label, const EpisodeSummary& s) {
  std::cout << label << " reward " << format_number(s.mean_reward) << " completion_time "
            << format_number(s.mean_completion_time) << " queue " << format_number(s.mean_queue) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicular edge DNN partitioning and offloading scheduler"};
  app.require_subcommand(1);

  CommonArgs train_args;
  int train_episodes = 0;
  bool verify = false;
  bool progress = false;
  auto* train_cmd = app.add_subcommand("train", "train MAD2RL or P-QMIX");
  add_common(train_cmd, train_args);
  train_cmd->add_option("--episodes", train_episodes, "override trainer.episodes");
  train_cmd->add_flag("--verify-bound", verify, "check the drift bound on 1 in 10 slots");
  train_cmd->add_flag("--progress", progress, "print evaluation progress to stderr");

  std::string checkpoint, eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "greedy evaluation episode of a checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint.json from train")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "output directory");

  CommonArgs base_args;
  std::string policy;
  int base_episodes = 1;
  auto* base_cmd = app.add_subcommand("baseline", "run the greedy or genetic baseline");
  add_common(base_cmd, base_args);
  base_cmd->add_option("--policy", policy, "greedy | genetic")
      ->required()
      ->check(CLI::IsMember({"greedy", "genetic"}));
  base_cmd->add_option("--episodes", base_episodes, "evaluation episodes")->check(CLI::PositiveNumber);

  CommonArgs sweep_args;
  std::string axis, values;
  auto* sweep_cmd = app.add_subcommand("sweep", "train once per value of one axis");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--axis", axis, "n_cv | n_sv | V | denoise_M")
      ->required()
      ->check(CLI::IsMember({"n_cv", "n_sv", "V", "denoise_M"}));
  sweep_cmd->add_option("--values", values, "comma-separated values, e.g. 1,10,100")->required();
  sweep_cmd->add_flag("--progress", progress, "print evaluation progress to stderr");

  int samples = 10000;
  std::uint64_t verify_seed = 1;
  auto* bound_cmd = app.add_subcommand("verify-bound", "check the drift bound on random transitions");
  bound_cmd->add_option("--samples", samples, "number of sampled transitions")->check(CLI::PositiveNumber);
  bound_cmd->add_option("--seed", verify_seed, "sampling seed");

  CommonArgs trace_args;
  int trace_episode = 0;
  auto* trace_cmd = app.add_subcommand("trace", "write the synthetic trace of one training episode");
  add_common(trace_cmd, trace_args);
  trace_cmd->add_option("--episode", trace_episode, "0-based training episode index");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      ExperimentConfig c = resolve(train_args);
      if (train_episodes > 0) c.trainer.episodes = train_episodes;
      TrainOptions opt;
      opt.out_dir = train_args.out.empty() ? std::filesystem::path("run") : std::filesystem::path(train_args.out);
      opt.verify_bound = verify;
      opt.progress = progress;
      const TrainResult r = train(c, opt);
      const int w = c.trainer.final_window;
      std::cout << "final eval reward " << format_number(tail_mean(r.eval, w, &EpisodeSummary::mean_reward))
                << " queue " << format_number(tail_mean(r.eval, w, &EpisodeSummary::mean_queue)) << "\n";
      if (verify) {
        std::cout << "bound checks " << r.bound_checks << " violations " << r.bound_violations << "\n";
        if (r.bound_violations > 0) return 3;
      }
      std::cout << "wrote " << opt.out_dir.string() << "\n";
    } else if (*eval_cmd) {
      const EpisodeSummary s = evaluate_checkpoint(checkpoint, eval_out);
      print_summary("eval", s);
    } else if (*base_cmd) {
      const ExperimentConfig c = resolve(base_args);
      const auto rows = run_baseline(c, parse_policy(policy), base_episodes,
                                     base_args.out.empty() ? std::filesystem::path("baseline_" + policy)
                                                           : std::filesystem::path(base_args.out));
      for (const auto& r : rows) print_summary(policy + " episode " + std::to_string(r.episode), r);
    } else if (*sweep_cmd) {
      const ExperimentConfig c = resolve(sweep_args);
      const auto points = sweep(c, axis, parse_values(values),
                                sweep_args.out.empty() ? std::filesystem::path("sweep_" + axis)
                                                       : std::filesystem::path(sweep_args.out),
                                progress);
      for (const auto& p : points) {
        std::cout << axis << "=" << format_number(p.value) << " reward " << format_number(p.final_reward)
                  << " completion_time " << format_number(p.final_completion_time) << " queue "
                  << format_number(p.final_queue) << "\n";
      }
    } else if (*bound_cmd) {
      const BoundReport r = verify_bound_random(samples, verify_seed);
      std::cout << "samples " << r.samples << " violations " << r.violations << " worst_gap "
                << format_number(r.worst_gap) << "\n";
      return r.violations == 0 ? 0 : 3;
    } else if (*trace_cmd) {
      const ExperimentConfig c = resolve(trace_args);
      const Scenario scn = build_scenario(c);
      const Environment env(scn, derive_seed(c.seed, SeedStream::TrainEnv, static_cast<std::uint64_t>(trace_episode)));
      const std::filesystem::path out = trace_args.out.empty() ? "trace.csv" : trace_args.out;
      env.trace().save_csv(out);
      std::cout << "wrote " << out.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
