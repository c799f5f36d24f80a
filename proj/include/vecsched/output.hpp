#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vecsched/queueing.hpp"

namespace vecsched {

struct EpisodeSummary;
struct LearningRow;
struct SweepPoint;

/// Fixed-precision number for CSV cells; NaN becomes an empty cell.
std::string format_number(double x);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// episode,phase,mean_reward,mean_completion_time,mean_queue,mean_loss,epsilon
void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpisodeSummary>& rows);

/// One row per recorded slot with every queue after the slot's update.
void write_queues_csv(const std::filesystem::path& path, const std::vector<EpisodeSummary>& rows,
                      const EdgeSystem& system);

/// episode,step,loss,reward,epsilon
void write_learning_curve_csv(const std::filesystem::path& path, const std::vector<LearningRow>& rows);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& rows);

}  // namespace vecsched
