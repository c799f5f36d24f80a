#include "vecsched/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vecsched {

void LyapunovParams::validate() const {
  if (!(v >= 0.0)) throw std::invalid_argument("V must be non-negative");
  if (!(workload_unit > 0.0)) throw std::invalid_argument("workload unit must be positive");
  if (!(delay_cap > 0.0)) throw std::invalid_argument("delay cap must be positive");
}

namespace {

double half_sum_squares(const std::vector<double>& xs, double unit) {
  double s = 0.0;
  for (double x : xs) s += (x / unit) * (x / unit);
  return 0.5 * s;
}

}  // namespace

double lyapunov_value(const QueueState& q, double unit) {
  return half_sum_squares(q.loc, unit) + half_sum_squares(q.rsu, unit) +
         half_sum_squares(q.veh, unit);
}

double exact_drift(const QueueState& state, const QueueState& next, double unit) {
  return lyapunov_value(next, unit) - lyapunov_value(state, unit);
}

double drift_terms(const QueueState& q, const Decision& d, const EdgeSystem& system, double unit) {
  const SlotArrivals a = slot_arrivals(d, system);
  const double tau = system.tau;
  double s = 0.0;
  for (int i = 0; i < system.num_cvs(); ++i) {
    s += (q.loc[i] / unit) * ((a.loc[i] - system.f_loc[i] * tau) / unit);
  }
  for (int k = 0; k < system.num_types(); ++k) {
    s += (q.rsu[k] / unit) * ((a.rsu[k] - d.rsu_alloc.at(static_cast<std::size_t>(k)) * tau) / unit);
  }
  for (int j = 0; j < system.num_svs(); ++j) {
    s += (q.veh[j] / unit) * ((a.veh[j] - system.f_veh[j] * tau) / unit);
  }
  return s;
}

double penalty_delay(std::span<const DelayBreakdown> delays, double cap) {
  double s = 0.0;
  for (const auto& d : delays) s += std::min(d.total, cap);
  return s;
}

double per_slot_objective(const QueueState& state, const Decision& decision,
                          std::span<const DelayBreakdown> delays, const EdgeSystem& system,
                          const LyapunovParams& params) {
  return params.v * penalty_delay(delays, params.delay_cap) +
         drift_terms(state, decision, system, params.workload_unit);
}

double common_reward(const QueueState& state, const Decision& decision,
                     std::span<const DelayBreakdown> delays, const EdgeSystem& system,
                     const LyapunovParams& params) {
  return -per_slot_objective(state, decision, delays, system, params);
}

double chi_constant(const EdgeSystem& system, std::span<const double> rsu_alloc, double unit) {
  const double tau = system.tau;
  double s = 0.0;
  std::vector<double> per_type(static_cast<std::size_t>(system.num_types()), 0.0);
  double all = 0.0;
  for (int i = 0; i < system.num_cvs(); ++i) {
    const double total = static_cast<double>(system.model_of(i).total_workload()) / unit;
    s += 0.5 * total * total;
    const double service = system.f_loc[i] * tau / unit;
    s += 0.5 * service * service;
    per_type[system.cv_type[i]] += total;
    all += total;
  }
  for (int k = 0; k < system.num_types(); ++k) {
    const double service = rsu_alloc[k] * tau / unit;
    s += 0.5 * per_type[k] * per_type[k] + 0.5 * service * service;
  }
  for (int j = 0; j < system.num_svs(); ++j) {
    const double service = system.f_veh[j] * tau / unit;
    s += 0.5 * all * all + 0.5 * service * service;
  }
  return s;
}

BoundCheck verify_drift_bound(const QueueState& state, const Decision& decision,
                              std::span<const DelayBreakdown> delays, const EdgeSystem& system,
                              const LyapunovParams& params) {
  const QueueState next = update_queues(state, decision, system);
  const double unit = params.workload_unit;
  const double penalty = params.v * penalty_delay(delays, params.delay_cap);
  BoundCheck out;
  out.lhs = exact_drift(state, next, unit) + penalty;
  out.rhs = drift_terms(state, decision, system, unit) + penalty +
            chi_constant(system, decision.rsu_alloc, unit);
  out.holds = out.lhs <= out.rhs + 1e-6 * std::max(1.0, std::abs(out.rhs));
  return out;
}

}  // namespace vecsched
