#include "vecsched/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "vecsched/harness.hpp"

namespace vecsched {

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpisodeSummary>& rows) {
  auto out = open_out(path);
  out << "episode,phase,mean_reward,mean_completion_time,mean_queue,mean_loss,epsilon\n";
  for (const auto& r : rows) {
    out << r.episode << ',' << r.phase << ',' << format_number(r.mean_reward) << ','
        << format_number(r.mean_completion_time) << ',' << format_number(r.mean_queue) << ','
        << format_number(r.mean_loss) << ',' << format_number(r.epsilon) << '\n';
  }
}

void write_queues_csv(const std::filesystem::path& path, const std::vector<EpisodeSummary>& rows,
                      const EdgeSystem& system) {
  auto out = open_out(path);
  out << "episode,phase,t";
  for (int i = 0; i < system.num_cvs(); ++i) out << ",loc_" << i + 1;
  for (int k = 0; k < system.num_types(); ++k) out << ",rsu_" << k + 1;
  for (int j = 0; j < system.num_svs(); ++j) out << ",sv_" << j + 2;
  out << ",total\n";
  for (const auto& r : rows) {
    for (std::size_t t = 0; t < r.queues.size(); ++t) {
      const auto& q = r.queues[t];
      out << r.episode << ',' << r.phase << ',' << t + 1;
      for (const auto* v : {&q.loc, &q.rsu, &q.veh}) {
        for (double x : *v) out << ',' << format_number(x);
      }
      out << ',' << format_number(q.total()) << '\n';
    }
  }
}

void write_learning_curve_csv(const std::filesystem::path& path, const std::vector<LearningRow>& rows) {
  auto out = open_out(path);
  out << "episode,step,loss,reward,epsilon\n";
  for (const auto& r : rows) {
    out << r.episode << ',' << r.step << ',' << format_number(r.loss) << ','
        << format_number(r.reward) << ',' << format_number(r.epsilon) << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& rows) {
  auto out = open_out(path);
  out << "axis,value,final_reward,final_completion_time,final_queue\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << format_number(r.value) << ',' << format_number(r.final_reward) << ','
        << format_number(r.final_completion_time) << ',' << format_number(r.final_queue) << '\n';
  }
}

}  // namespace vecsched
