// Acceptance suite: one line per criterion on stdout, progress on stderr.
// Exit code is non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fixtures.hpp"
#include "vecsched/allocator.hpp"
#include "vecsched/baselines.hpp"
#include "vecsched/diffusion_policy.hpp"
#include "vecsched/harness.hpp"
#include "vecsched/lyapunov.hpp"
#include "vecsched/neural.hpp"
#include "vecsched/output.hpp"
#include "vecsched/qmix.hpp"

using namespace vecsched;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

enum class Verdict { Pass, Flag, Fail };

struct Line {
  int id = 0;
  Verdict verdict = Verdict::Fail;
  std::string text;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Line report(int id, Verdict v, const std::string& text) {
  const char* tag = v == Verdict::Pass ? "PASS" : (v == Verdict::Flag ? "FLAG" : "FAIL");
  std::cout << "criterion " << id << " " << tag << " " << text << std::endl;
  return {id, v, text};
}

Eigen::MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// 1. Pathwise drift bound on random transitions.
Line drift_bound() {
  const auto t0 = Clock::now();
  const BoundReport r = verify_bound_random(10000, 2024, 20);
  const double secs = seconds_since(t0);
  const bool ok = r.samples == 10000 && r.worst_gap <= 1e-6 && secs < 30.0;
  return report(1, ok ? Verdict::Pass : Verdict::Fail,
                "drift bound: " + std::to_string(r.samples - r.violations) + "/" + std::to_string(r.samples) +
                    " samples hold, worst relative gap " + fmt("%.3e", r.worst_gap) + " (<= 1e-6), " +
                    fmt("%.1f", secs) + " s (< 30 s)");
}

// Every point of the simplex grid with spacing f_max/n; n is chosen so the
// grid has at least 10^4 feasible points.
double grid_oracle(const AllocProblem& p) {
  const std::size_t K = p.gamma.size();
  const int n = K == 1 ? 9999 : (K == 2 ? 140 : 38);
  const double h = p.f_rsu_max / n;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(K, 0);
  std::vector<double> f(K, 0.0);
  while (true) {
    if (std::accumulate(idx.begin(), idx.end(), 0) <= n) {
      double obj = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double x = idx[k] * h;
        if (p.gamma[k] > 0.0) obj += x > 0.0 ? p.gamma[k] / x : std::numeric_limits<double>::infinity();
        obj -= p.q_rsu[k] * x * p.tau;
      }
      best = std::min(best, obj);
    }
    std::size_t k = 0;
    while (k < K && ++idx[k] > n) idx[k++] = 0;
    if (k == K) break;
  }
  return best;
}

// 2. Allocator against the grid oracle.
Line allocator_optimality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int worse = 0, infeasible = 0;
  double worst_rel = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < 500; ++n) {
    const int K = 1 + n % 3;
    AllocProblem p;
    p.tau = 1.0;
    // Log-uniform scales so both the backlog and the delay terms dominate sometimes.
    p.f_rsu_max = std::pow(10.0, -1.0 + 3.0 * u(rng));
    const double gscale = std::pow(10.0, -2.0 + 4.0 * u(rng));
    for (int k = 0; k < K; ++k) {
      const bool idle = K > 1 && u(rng) < 0.15;
      p.gamma.push_back(idle ? 0.0 : gscale * (0.01 + u(rng)));
      // An idle type (no offloads, no backlog) has gamma = 0.
      p.q_rsu.push_back(idle || u(rng) < 0.3 ? 0.0 : gscale / (p.f_rsu_max * p.f_rsu_max) * 2.0 * u(rng));
    }
    const Allocation a = allocate(p);
    const double mine = alloc_objective(a.f, p);
    const double oracle = grid_oracle(p);
    worst_rel = std::max(worst_rel, (mine - oracle) / std::abs(oracle));
    if (mine > oracle + 1e-3 * std::abs(oracle)) ++worse;
    const bool active = std::any_of(p.gamma.begin(), p.gamma.end(), [](double g) { return g > 0.0; });
    const double sum = std::accumulate(a.f.begin(), a.f.end(), 0.0);
    if (active && std::abs(sum - p.f_rsu_max) > 1e-9 * p.f_rsu_max) ++infeasible;
  }
  const double secs = seconds_since(t0);
  const bool ok = worse == 0 && infeasible == 0 && secs < 60.0;
  return report(2, ok ? Verdict::Pass : Verdict::Fail,
                "allocator: " + std::to_string(500 - worse) + "/500 within 0.1% of the grid oracle (worst " +
                    fmt("%+.3e", worst_rel) + " relative), " + std::to_string(infeasible) +
                    " capacity violations, " + fmt("%.1f", secs) + " s (< 60 s)");
}

// 3. Analytic vs central-difference gradients.
Line gradients() {
  const auto t0 = Clock::now();
  Rng rng(31);
  std::uniform_int_distribution<int> width(1, 7);
  double worst = 0.0;
  const Activation acts[3] = {Activation::Relu, Activation::Tanh, Activation::Identity};
  for (int probe = 0; probe < 100; ++probe) {
    const int depth = 1 + probe % 4;
    std::vector<int> widths{width(rng)};
    std::vector<Activation> a;
    for (int l = 0; l < depth; ++l) {
      widths.push_back(width(rng));
      a.push_back(l + 1 == depth ? Activation::Identity : acts[(probe + l) % 3]);
    }
    DenseNet net(widths, a);
    net.init_glorot(rng);
    net.params() += uniform_matrix(rng, net.num_params(), 1, 0.1);  // nonzero biases
    const Eigen::MatrixXd x = uniform_matrix(rng, net.input_dim(), 3);
    const Eigen::MatrixXd up = uniform_matrix(rng, net.output_dim(), 3);
    DenseNet::Tape tape;
    net.forward(x, &tape);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(net.num_params());
    net.backward(tape, up, g);
    auto f = [&]() { return (net.forward(x).array() * up.array()).sum(); };
    worst = std::max(worst, relative_error(g, numeric_gradient(f, net.params()), 1e-8));
  }
  // Two-step denoise chain with frozen noises.
  double chain = 0.0;
  for (int probe = 0; probe < 5; ++probe) {
    auto agent = DiffusionAgent::create(4, 6, {8, 8}, DiffusionSchedule::build(2, 0.1, 10.0), rng);
    const Eigen::MatrixXd s = uniform_matrix(rng, 4, 3);
    const Eigen::MatrixXd up = uniform_matrix(rng, 6, 3);
    const Eigen::MatrixXd top = uniform_matrix(rng, 6, 3);
    std::vector<Eigen::MatrixXd> noise(3);
    noise[2] = uniform_matrix(rng, 6, 3);
    ForwardCache cache;
    agent.denoise_from(top, noise, s, &cache);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(agent.net().num_params());
    agent.backward(cache, up, g);
    auto f = [&]() { return (agent.denoise_from(top, noise, s).array() * up.array()).sum(); };
    chain = std::max(chain, relative_error(g, numeric_gradient(f, agent.net().params()), 1e-8));
  }
  const double secs = seconds_since(t0);
  const bool ok = worst < 1e-4 && chain < 1e-4 && secs < 60.0;
  return report(3, ok ? Verdict::Pass : Verdict::Fail,
                "gradients: worst relative error " + fmt("%.2e", worst) + " over 100 dense nets, " +
                    fmt("%.2e", chain) + " through the 2-step chain (< 1e-4), " + fmt("%.1f", secs) +
                    " s (< 60 s)");
}

// 4. Mixer monotonicity by finite differences.
Line monotonicity() {
  Rng rng(41);
  std::normal_distribution<double> n(0.0, 3.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int probe = 0; probe < 100; ++probe) {
    const int agents = 2 + probe % 5;
    const int sdim = 3 + probe % 7;
    MixingNet mixer(agents, sdim, 4 + probe % 5, {8 + probe % 9, 8}, rng);
    Eigen::MatrixXd s(sdim, 1), q(agents, 1);
    for (int d = 0; d < sdim; ++d) s(d, 0) = n(rng);
    for (int i = 0; i < agents; ++i) q(i, 0) = n(rng);
    for (int i = 0; i < agents; ++i) {
      Eigen::MatrixXd up = q, down = q;
      up(i, 0) += 1e-5;
      down(i, 0) -= 1e-5;
      worst = std::min(worst, (mixer.mix(s, up)[0] - mixer.mix(s, down)[0]) / 2e-5);
    }
  }
  return report(4, worst >= -1e-9 ? Verdict::Pass : Verdict::Fail,
                "mixer monotonicity: min dQtot/dq_i " + fmt("%.3e", worst) + " over 100 probes (>= -1e-9)");
}

double enumerate_best(const QueueState& q, const EdgeSystem& s, const SlotRates& r, const LyapunovParams& p) {
  const int n = s.num_cvs();
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    best = std::min(best, chromosome_fitness(a, q, s, r, p));
    int i = 0;
    while (i < n && ++a[i] == action_count(s, i)) a[i++] = 0;
    if (i == n) break;
  }
  return best;
}

// 5. Genetic optimizer against exhaustive enumeration.
Line genetic_oracle() {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> vdist(0.0, 100.0);
  int checked = 0, equal = 0, attempt = 0;
  std::uint64_t largest = 0;
  while (checked < 50) {
    ++attempt;
    const auto s = fixtures::random_system(rng, 1 + attempt % 4, 1 + attempt % 3, attempt % 4);
    const std::uint64_t space = joint_action_space(s);
    if (space > 512) continue;
    largest = std::max(largest, space);
    const auto q = fixtures::random_queues(rng, s, checked % 2 ? 1e3 : 1e6);
    const auto r = fixtures::random_rates(rng, s);
    LyapunovParams p;
    p.v = vdist(rng);
    p.workload_unit = 1.0;
    GeneticConfig cfg;
    cfg.population = static_cast<int>(std::max<std::uint64_t>(space, 2));
    cfg.generations = 2;
    cfg.elitism = 1;
    Rng ga(static_cast<std::uint64_t>(checked));
    if (genetic_optimize(q, s, r, p, cfg, ga).fitness == enumerate_best(q, s, r, p)) ++equal;
    ++checked;
  }
  return report(5, equal == 50 ? Verdict::Pass : Verdict::Fail,
                "genetic vs enumeration: " + std::to_string(equal) + "/50 exact matches (joint spaces up to " +
                    std::to_string(largest) + ")");
}

// Shared desk-scale training runs, keyed by agent/seed/M/V.
struct RunKey {
  std::string agent;
  std::uint64_t seed;
  int steps;
  double v;
  auto operator<=>(const RunKey&) const = default;
};

struct RunStats {
  double final_reward = 0.0;
  double final_queue = 0.0;
  // Per-queue time-averaged backlog of each evaluation episode.
  std::vector<std::vector<double>> per_queue;
  double seconds = 0.0;
};

class RunCache {
 public:
  explicit RunCache(std::filesystem::path out) : out_(std::move(out)) {}

  const RunStats& get(const RunKey& key) {
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    ExperimentConfig c;
    c.seed = key.seed;
    c.trainer.agent = key.agent;
    c.trainer.denoise_steps = key.steps;
    c.scenario.v = key.v;
    std::cerr << "training " << key.agent << " seed " << key.seed << " M " << key.steps << " V " << key.v
              << std::endl;
    const auto t0 = Clock::now();
    TrainOptions opt;
    opt.write_checkpoint = false;
    if (!out_.empty()) {
      std::ostringstream name;
      name << key.agent << "_s" << key.seed << "_M" << key.steps << "_V" << format_number(key.v);
      opt.out_dir = out_ / name.str();
    }
    const TrainResult r = train(c, opt);
    RunStats s;
    s.seconds = seconds_since(t0);
    const int w = c.trainer.final_window;
    s.final_reward = tail_mean(r.eval, w, &EpisodeSummary::mean_reward);
    s.final_queue = tail_mean(r.eval, w, &EpisodeSummary::mean_queue);
    for (const auto& ep : r.eval) {
      std::vector<double> avg;
      for (const auto& q : ep.queues) {
        std::vector<double> flat;
        flat.insert(flat.end(), q.loc.begin(), q.loc.end());
        flat.insert(flat.end(), q.rsu.begin(), q.rsu.end());
        flat.insert(flat.end(), q.veh.begin(), q.veh.end());
        if (avg.empty()) avg.assign(flat.size(), 0.0);
        for (std::size_t i = 0; i < flat.size(); ++i) avg[i] += flat[i] / static_cast<double>(ep.queues.size());
      }
      if (s.per_queue.empty()) s.per_queue.resize(avg.size());
      for (std::size_t i = 0; i < avg.size(); ++i) s.per_queue[i].push_back(avg[i]);
    }
    std::cerr << "  final reward " << s.final_reward << " queue " << s.final_queue << " (" << s.seconds << " s)"
              << std::endl;
    return runs_.emplace(key, std::move(s)).first->second;
  }

 private:
  std::filesystem::path out_;
  std::map<RunKey, RunStats> runs_;
};

constexpr int kDefaultSteps = 7;
constexpr double kDefaultV = 10.0;

double ls_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double mx = (n - 1.0) / 2.0, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxy += (static_cast<double>(i) - mx) * (y[i] - my);
    sxx += (static_cast<double>(i) - mx) * (static_cast<double>(i) - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

// 6. Queue stability over the final evaluation episodes.
Line queue_stability(RunCache& cache, const std::vector<std::uint64_t>& seeds) {
  int bad = 0, total = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (auto seed : seeds) {
    const RunStats& r = cache.get({"mad2rl", seed, kDefaultSteps, kDefaultV});
    for (const auto& series : r.per_queue) {
      const std::vector<double> tail(series.end() - std::min<std::ptrdiff_t>(50, series.size()), series.end());
      const double mean = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());
      const double slope = ls_slope(tail);
      ++total;
      if (mean > 0.0) worst = std::max(worst, slope / mean);
      if (slope > 0.01 * mean) ++bad;
    }
  }
  return report(6, bad == 0 ? Verdict::Pass : Verdict::Fail,
                "queue stability: " + std::to_string(total - bad) + "/" + std::to_string(total) +
                    " queues with slope <= 1% of mean per episode over the last 50 evaluations (worst " +
                    fmt("%.3e", worst) + ")");
}

double greedy_reward(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  return run_baseline(c, PolicyKind::Greedy, 1).front().mean_reward;
}

// 7. MAD2RL vs greedy per seed and vs P-QMIX on the seed mean.
Line ordering(RunCache& cache, const std::vector<std::uint64_t>& seeds) {
  bool beats_greedy = true;
  double mad = 0.0, pq = 0.0;
  std::ostringstream detail;
  for (auto seed : seeds) {
    const double g = greedy_reward(seed);
    const double m = cache.get({"mad2rl", seed, kDefaultSteps, kDefaultV}).final_reward;
    const double p = cache.get({"pqmix", seed, kDefaultSteps, kDefaultV}).final_reward;
    beats_greedy = beats_greedy && m > g;
    mad += m / static_cast<double>(seeds.size());
    pq += p / static_cast<double>(seeds.size());
    detail << " seed " << seed << ": mad2rl " << fmt("%.1f", m) << " pqmix " << fmt("%.1f", p) << " greedy "
           << fmt("%.1f", g) << ";";
  }
  // Training cost of the compared learners, whether or not the runs were cached.
  double budget = 0.0;
  for (auto seed : seeds) {
    budget += cache.get({"mad2rl", seed, kDefaultSteps, kDefaultV}).seconds +
              cache.get({"pqmix", seed, kDefaultSteps, kDefaultV}).seconds;
  }
  const bool ok = beats_greedy && mad >= pq && budget < 1800.0;
  return report(7, ok ? Verdict::Pass : Verdict::Fail,
                std::string("ordering: mad2rl > greedy on every seed ") + (beats_greedy ? "yes" : "no") +
                    ", seed-mean mad2rl " + fmt("%.1f", mad) + " vs pqmix " + fmt("%.1f", pq) + ", " +
                    fmt("%.0f", budget) + " s training (< 1800 s);" + detail.str());
}

// 8. Denoising-step sweep.
Line step_sweep(RunCache& cache, const std::vector<std::uint64_t>& seeds) {
  const int steps[3] = {1, 7, 12};
  double mean[3] = {0.0, 0.0, 0.0};
  bool m1_dominates = true;
  for (auto seed : seeds) {
    double r[3];
    for (int i = 0; i < 3; ++i) {
      r[i] = cache.get({"mad2rl", seed, steps[i], kDefaultV}).final_reward;
      mean[i] += r[i] / static_cast<double>(seeds.size());
    }
    m1_dominates = m1_dominates && r[0] > r[1] + 0.2 * std::abs(r[1]);
  }
  const bool peak = mean[1] >= mean[0] && mean[1] >= mean[2];
  const Verdict v = peak ? Verdict::Pass : (m1_dominates ? Verdict::Fail : Verdict::Flag);
  return report(8, v,
                "denoise steps: seed-mean reward M=1 " + fmt("%.1f", mean[0]) + ", M=7 " + fmt("%.1f", mean[1]) +
                    ", M=12 " + fmt("%.1f", mean[2]) + (peak ? " (M=7 is the peak)" : " (M=7 is not the peak)") +
                    (m1_dominates ? "; M=1 beats M=7 by > 20% on every seed" : ""));
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

// 9. Backlog grows with V.
Line v_sweep(RunCache& cache, const std::vector<std::uint64_t>& seeds) {
  std::vector<double> vs, queues;
  std::ostringstream detail;
  for (double v : {1.0, 10.0, 100.0}) {
    double mean = 0.0;
    for (auto seed : seeds) {
      const double q = cache.get({"mad2rl", seed, kDefaultSteps, v}).final_queue;
      vs.push_back(v);
      queues.push_back(q);
      mean += q / static_cast<double>(seeds.size());
    }
    detail << " V=" << format_number(v) << " " << fmt("%.3e", mean) << ";";
  }
  const double rho = spearman(vs, queues);
  return report(9, rho >= 0.5 ? Verdict::Pass : Verdict::Fail,
                "V sweep: Spearman(V, mean backlog) " + fmt("%.3f", rho) + " over " +
                    std::to_string(queues.size()) + " runs (>= 0.5); seed-mean backlog" + detail.str());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every CSV under a, compared byte for byte with its twin under b.
int compare_csvs(const std::filesystem::path& a, const std::filesystem::path& b, int& files) {
  int diffs = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    const auto twin = b / std::filesystem::relative(e.path(), a);
    if (!std::filesystem::exists(twin) || slurp(e.path()) != slurp(twin)) ++diffs;
  }
  return diffs;
}

// 10. Repeated runs write identical CSVs.
Line determinism() {
  ExperimentConfig c;
  c.seed = 5;
  c.scenario.num_cvs = 3;
  c.scenario.slots = 6;
  c.trainer.episodes = 3;
  c.trainer.warmup_episodes = 1;
  c.trainer.batch = 8;
  c.trainer.hidden = {16, 16};
  c.trainer.hyper_hidden = {8};
  c.trainer.mixer_embed = 4;
  c.trainer.final_window = 2;
  c.genetic.population = 10;
  c.genetic.generations = 3;
  const auto root = std::filesystem::temp_directory_path() / "vecsched_acceptance_determinism";
  std::filesystem::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    for (const char* agent : {"mad2rl", "pqmix"}) {
      ExperimentConfig x = c;
      x.trainer.agent = agent;
      TrainOptions opt;
      opt.out_dir = dir / agent;
      train(x, opt);
      evaluate_checkpoint(opt.out_dir / "checkpoint.json", dir / (std::string(agent) + "_eval"));
    }
    run_baseline(c, PolicyKind::Greedy, 2, dir / "greedy");
    run_baseline(c, PolicyKind::Genetic, 2, dir / "genetic");
    sweep(c, "denoise_M", {1, 2}, dir / "sweep");
  }
  int files = 0;
  const int diffs = compare_csvs(root / "a", root / "b", files);
  std::filesystem::remove_all(root);
  return report(10, diffs == 0 && files > 0 ? Verdict::Pass : Verdict::Fail,
                "determinism: " + std::to_string(files - diffs) + "/" + std::to_string(files) +
                    " CSV files byte-identical across repeated train, evaluate, baseline and sweep runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vec-sched acceptance suite"};
  std::vector<int> only;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out;
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 10));
  app.add_option("--seeds", seeds, "seeds for the training criteria")->delimiter(',');
  app.add_option("--out", out, "directory for the training run outputs");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected(only.begin(), only.end());
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.insert(i);
  }
  RunCache cache{std::filesystem::path(out)};
  std::vector<Line> lines;
  try {
    if (selected.count(1)) lines.push_back(drift_bound());
    if (selected.count(2)) lines.push_back(allocator_optimality());
    if (selected.count(3)) lines.push_back(gradients());
    if (selected.count(4)) lines.push_back(monotonicity());
    if (selected.count(5)) lines.push_back(genetic_oracle());
    if (selected.count(6)) lines.push_back(queue_stability(cache, seeds));
    if (selected.count(7)) lines.push_back(ordering(cache, seeds));
    if (selected.count(8)) lines.push_back(step_sweep(cache, seeds));
    if (selected.count(9)) lines.push_back(v_sweep(cache, seeds));
    if (selected.count(10)) lines.push_back(determinism());
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << std::endl;
    return 2;
  }
  const auto failed = std::count_if(lines.begin(), lines.end(), [](const Line& l) { return l.verdict == Verdict::Fail; });
  std::cout << "summary: " << lines.size() - static_cast<std::size_t>(failed) << "/" << lines.size()
            << " criteria pass or flag" << std::endl;
  return failed == 0 ? 0 : 1;
}
