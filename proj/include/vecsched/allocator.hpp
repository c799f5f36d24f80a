#pragma once

#include <span>
#include <vector>

#include "vecsched/lyapunov.hpp"
#include "vecsched/queueing.hpp"

namespace vecsched {

/// minimize  sum_k gamma[k]/F_k - sum_k q_rsu[k]*F_k*tau
/// s.t.      F_k >= 0, sum_k F_k <= f_rsu_max.
///
/// q_rsu is the backlog already expressed in objective units (FLOPs divided
/// by the squared Lyapunov workload unit).
struct AllocProblem {
  std::vector<double> gamma;
  std::vector<double> q_rsu;
  double tau = 1.0;
  double f_rsu_max = 1.0;

  void validate() const;
};

struct Allocation {
  std::vector<double> f;
  double eta = 0.0;  // Lagrange multiplier of the capacity constraint
};

/// Gamma_k = V*Q_k + V*sum_{i in I*_k} W_i + V/2 * sum_{i in I*_k} sum_{i' != i} W_i',
/// where I*_k are type-k CVs offloading to the RSU and W their remote work.
double gamma_k(const QueueState& queues, const Decision& decision, const EdgeSystem& system,
               double v, int k);

AllocProblem make_alloc_problem(const QueueState& queues, const Decision& decision,
                                const EdgeSystem& system, const LyapunovParams& params);

/// KKT solution F_k = sqrt(gamma_k / (eta - q_k*tau)) with eta found by
/// bisection so the capacity is used exactly. Types with gamma_k = 0 get
/// nothing; if every gamma is zero the capacity is split evenly.
Allocation allocate(const AllocProblem& problem);

/// Problem objective; gamma/0 is +inf for gamma > 0 and 0 for gamma = 0.
double alloc_objective(std::span<const double> f, const AllocProblem& problem);

/// Fills decision.rsu_alloc from the closed-form allocation.
void assign_rsu_allocation(Decision& decision, const QueueState& queues,
                           const EdgeSystem& system, const LyapunovParams& params);

}  // namespace vecsched
