#pragma once

#include <span>
#include <vector>

#include "vecsched/queueing.hpp"

namespace vecsched {

/// V weighs delay (seconds) against queue drift. Queue and arrival terms are
/// expressed in `workload_unit` FLOPs (1e9 gives GFLOP), so V trades seconds
/// against GFLOP^2 rather than FLOP^2. Delays above `delay_cap` (including the
/// infinite-link sentinel) are clamped to it.
struct LyapunovParams {
  double v = 10.0;
  double workload_unit = 1.0;
  double delay_cap = 1e6;

  void validate() const;
};

/// 1/2 * (sum q_loc^2 + sum q_rsu^2 + sum q_veh^2), queues in `unit` FLOPs.
double lyapunov_value(const QueueState& q, double unit = 1.0);

/// L(next) - L(state).
double exact_drift(const QueueState& state, const QueueState& next, double unit = 1.0);

/// Queue-weighted drift part of the per-slot objective:
/// sum over every queue of Q * (arrivals - service*tau).
double drift_terms(const QueueState& state, const Decision& decision, const EdgeSystem& system,
                   double unit = 1.0);

/// Sum of capped per-CV delays.
double penalty_delay(std::span<const DelayBreakdown> delays, double cap);

/// V * sum d_i + drift_terms.
double per_slot_objective(const QueueState& state, const Decision& decision,
                          std::span<const DelayBreakdown> delays, const EdgeSystem& system,
                          const LyapunovParams& params);

/// Negated per-slot objective; the reward shared by all agents.
double common_reward(const QueueState& state, const Decision& decision,
                     std::span<const DelayBreakdown> delays, const EdgeSystem& system,
                     const LyapunovParams& params);

/// Decision-independent constant of the drift bound. Arrival bounds use the
/// full-model workload of every CV; the RSU service term uses the current
/// allocation.
double chi_constant(const EdgeSystem& system, std::span<const double> rsu_alloc,
                    double unit = 1.0);

struct BoundCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Pathwise check of drift + V*sum(d) <= drift_terms + V*sum(d) + chi for the
/// transition produced by `decision`. Slack is 1e-6 * max(1, |rhs|).
BoundCheck verify_drift_bound(const QueueState& state, const Decision& decision,
                              std::span<const DelayBreakdown> delays, const EdgeSystem& system,
                              const LyapunovParams& params);

}  // namespace vecsched
