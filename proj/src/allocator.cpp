#include "vecsched/allocator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vecsched {

void AllocProblem::validate() const {
  if (gamma.size() != q_rsu.size() || gamma.empty()) {
    throw std::invalid_argument("allocation problem: gamma/q_rsu size mismatch");
  }
  if (!(f_rsu_max > 0.0)) throw std::invalid_argument("allocation problem: f_rsu_max must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("allocation problem: tau must be positive");
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (!(gamma[k] >= 0.0) || !std::isfinite(gamma[k])) {
      throw std::invalid_argument("allocation problem: gamma must be finite and non-negative");
    }
    if (!(q_rsu[k] >= 0.0) || !std::isfinite(q_rsu[k])) {
      throw std::invalid_argument("allocation problem: backlog must be finite and non-negative");
    }
  }
}

double gamma_k(const QueueState& queues, const Decision& d, const EdgeSystem& system, double v,
               int k) {
  double sum_w = 0.0;
  int members = 0;
  for (int i = 0; i < system.num_cvs(); ++i) {
    if (system.cv_type[i] != k || d.xi[i] != kRsuTarget || !d.offloads(system, i)) continue;
    sum_w += static_cast<double>(system.model_of(i).remote_workload(d.phi[i]));
    ++members;
  }
  // sum_i sum_{i' != i} W_i' counts every member's work (members - 1) times.
  const double pairs = members > 1 ? (members - 1) * sum_w : 0.0;
  return v * queues.rsu.at(static_cast<std::size_t>(k)) + v * sum_w + 0.5 * v * pairs;
}

AllocProblem make_alloc_problem(const QueueState& queues, const Decision& d,
                                const EdgeSystem& system, const LyapunovParams& params) {
  AllocProblem p;
  p.tau = system.tau;
  p.f_rsu_max = system.f_rsu_max;
  const double unit2 = params.workload_unit * params.workload_unit;
  for (int k = 0; k < system.num_types(); ++k) {
    p.gamma.push_back(gamma_k(queues, d, system, params.v, k));
    p.q_rsu.push_back(queues.rsu[k] / unit2);
  }
  return p;
}

Allocation allocate(const AllocProblem& p) {
  p.validate();
  const std::size_t K = p.gamma.size();
  Allocation out;
  out.f.assign(K, 0.0);

  double floor = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < K; ++k) {
    if (p.gamma[k] > 0.0) {
      floor = any ? std::max(floor, p.q_rsu[k] * p.tau) : p.q_rsu[k] * p.tau;
      any = true;
    }
  }
  if (!any) {
    std::fill(out.f.begin(), out.f.end(), p.f_rsu_max / static_cast<double>(K));
    return out;
  }

  // Search over u = eta - floor so the pole at u = 0 stays resolvable even
  // when q*tau is large. gap[k] = floor - q_k*tau >= 0.
  std::vector<double> gap(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) gap[k] = floor - p.q_rsu[k] * p.tau;
  // Total allocation; strictly decreasing on (0, inf) from +inf to 0.
  auto total = [&](double u) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (p.gamma[k] > 0.0) s += std::sqrt(p.gamma[k] / (u + gap[k]));
    }
    return s;
  };

  const double f_max = p.f_rsu_max;
  double scale = 0.0;
  for (std::size_t k = 0; k < K; ++k) scale = std::max(scale, p.gamma[k] / (f_max * f_max));
  double lo = scale;
  for (int it = 0; total(lo) <= f_max; ++it) {
    lo *= 0.5;
    if (it > 4000 || !(lo > 0.0)) throw std::runtime_error("allocator: lower bracket not found");
  }
  double hi = 2.0 * lo;
  for (int it = 0; total(hi) >= f_max; ++it) {
    hi *= 2.0;
    if (it > 4000) throw std::runtime_error("allocator: upper bracket not found");
  }

  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    u = 0.5 * (lo + hi);
    const double g = total(u);
    if (std::abs(g - f_max) <= 1e-9 * f_max) break;
    if (g > f_max) {
      lo = u;
    } else {
      hi = u;
    }
    if ((hi - lo) <= 1e-12 * hi) break;
  }

  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (p.gamma[k] > 0.0) {
      out.f[k] = std::sqrt(p.gamma[k] / (u + gap[k]));
      sum += out.f[k];
    }
  }
  // Remove the residual bisection error so the capacity is met exactly.
  for (auto& f : out.f) f = std::min(f * (f_max / sum), f_max);
  out.eta = floor + u;
  return out;
}

double alloc_objective(std::span<const double> f, const AllocProblem& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.gamma.size(); ++k) {
    if (p.gamma[k] > 0.0) {
      s += f[k] > 0.0 ? p.gamma[k] / f[k] : std::numeric_limits<double>::infinity();
    }
    s -= p.q_rsu[k] * f[k] * p.tau;
  }
  return s;
}

void assign_rsu_allocation(Decision& decision, const QueueState& queues,
                           const EdgeSystem& system, const LyapunovParams& params) {
  decision.rsu_alloc = allocate(make_alloc_problem(queues, decision, system, params)).f;
}

}  // namespace vecsched
