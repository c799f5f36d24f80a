#include "vecsched/queueing.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vecsched {

void EdgeSystem::validate() const {
  if (models.empty()) throw std::invalid_argument("edge system needs at least one model type");
  if (cv_type.empty()) throw std::invalid_argument("edge system needs at least one CV");
  if (f_loc.size() != cv_type.size()) throw std::invalid_argument("f_loc size must match CV count");
  for (int k : cv_type) {
    if (k < 0 || k >= num_types()) throw std::invalid_argument("CV model type out of range");
  }
  for (double f : f_loc) {
    if (!(f > 0.0)) throw std::invalid_argument("CV capacity must be positive");
  }
  for (double f : f_veh) {
    if (!(f > 0.0)) throw std::invalid_argument("SV capacity must be positive");
  }
  if (!(f_rsu_max > 0.0)) throw std::invalid_argument("RSU capacity must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("slot length must be positive");
}

QueueState QueueState::zeros(const EdgeSystem& system) {
  QueueState q;
  q.loc.assign(static_cast<std::size_t>(system.num_cvs()), 0.0);
  q.rsu.assign(static_cast<std::size_t>(system.num_types()), 0.0);
  q.veh.assign(static_cast<std::size_t>(system.num_svs()), 0.0);
  return q;
}

double QueueState::total() const {
  return std::accumulate(loc.begin(), loc.end(), 0.0) +
         std::accumulate(rsu.begin(), rsu.end(), 0.0) +
         std::accumulate(veh.begin(), veh.end(), 0.0);
}

double SlotArrivals::total() const {
  return std::accumulate(loc.begin(), loc.end(), 0.0) +
         std::accumulate(rsu.begin(), rsu.end(), 0.0) +
         std::accumulate(veh.begin(), veh.end(), 0.0);
}

bool Decision::offloads(const EdgeSystem& system, int cv) const {
  return phi.at(static_cast<std::size_t>(cv)) <= system.model_of(cv).num_layers();
}

void validate_decision(const Decision& d, const EdgeSystem& system, bool check_allocation) {
  const auto n = static_cast<std::size_t>(system.num_cvs());
  if (d.phi.size() != n || d.xi.size() != n) {
    throw std::invalid_argument("decision size does not match CV count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int L = system.model_of(static_cast<int>(i)).num_layers();
    if (d.phi[i] < 1 || d.phi[i] > L + 1) {
      throw std::invalid_argument("CV " + std::to_string(i) + ": partition point out of range");
    }
    if (d.xi[i] < 1 || d.xi[i] > system.num_edge_nodes()) {
      throw std::invalid_argument("CV " + std::to_string(i) + ": offload target out of range");
    }
  }
  if (!check_allocation) return;
  if (d.rsu_alloc.size() != static_cast<std::size_t>(system.num_types())) {
    throw std::invalid_argument("RSU allocation size does not match model type count");
  }
  double sum = 0.0;
  for (double f : d.rsu_alloc) {
    if (f < 0.0 || f > system.f_rsu_max * (1.0 + 1e-12)) {
      throw std::invalid_argument("RSU allocation outside [0, f_rsu_max]");
    }
    sum += f;
  }
  if (sum > system.f_rsu_max * (1.0 + 1e-9)) {
    throw std::invalid_argument("RSU allocation exceeds capacity");
  }
}

SlotArrivals slot_arrivals(const Decision& d, const EdgeSystem& system) {
  SlotArrivals a;
  a.loc.assign(static_cast<std::size_t>(system.num_cvs()), 0.0);
  a.rsu.assign(static_cast<std::size_t>(system.num_types()), 0.0);
  a.veh.assign(static_cast<std::size_t>(system.num_svs()), 0.0);
  for (int i = 0; i < system.num_cvs(); ++i) {
    const auto& model = system.model_of(i);
    const auto split = model.partition(d.phi[i]);
    a.loc[i] += static_cast<double>(split.local);
    if (!d.offloads(system, i)) continue;
    if (d.xi[i] == kRsuTarget) {
      a.rsu[system.cv_type[i]] += static_cast<double>(split.remote);
    } else {
      a.veh[d.xi[i] - 2] += static_cast<double>(split.remote);
    }
  }
  return a;
}

double transmission_delay(int phi, double rate_bps, const DnnModel& model) {
  if (rate_bps < 0.0) throw std::domain_error("rate must be non-negative");
  if (phi == model.num_layers() + 1) return 0.0;
  if (rate_bps == 0.0) return kInfiniteDelay;
  return 8.0 * static_cast<double>(model.input_bytes(phi)) / rate_bps;
}

double local_delay(int phi, double q_loc, const DnnModel& model, double f_loc) {
  if (!(f_loc > 0.0)) throw std::domain_error("local capacity must be positive");
  if (phi == 1) return 0.0;
  return (q_loc + static_cast<double>(model.local_workload(phi))) / f_loc;
}

namespace {

double ratio_or_inf(double work, double capacity) {
  if (work == 0.0) return 0.0;
  if (capacity <= 0.0) return kInfiniteDelay;
  return work / capacity;
}

}  // namespace

EdgeDelay rsu_delay(int cv, const Decision& d, const QueueState& q, const SlotRates& rates,
                    const EdgeSystem& system) {
  EdgeDelay out;
  if (!d.offloads(system, cv) || d.xi[cv] != kRsuTarget) return out;
  const int k = system.cv_type[cv];
  const auto& model = system.model_of(cv);
  const double f = d.rsu_alloc.at(static_cast<std::size_t>(k));

  out.transmission = transmission_delay(d.phi[cv], rates.rate(cv, kRsuTarget), model);
  out.processing = ratio_or_inf(q.rsu[k] + static_cast<double>(model.remote_workload(d.phi[cv])), f);

  double peers = 0.0;
  for (int p = 0; p < system.num_cvs(); ++p) {
    if (p == cv || system.cv_type[p] != k) continue;
    if (d.xi[p] != kRsuTarget || !d.offloads(system, p)) continue;
    peers += static_cast<double>(system.model_of(p).remote_workload(d.phi[p]));
  }
  out.waiting = ratio_or_inf(peers, 2.0 * f);
  return out;
}

EdgeDelay sv_delay(int cv, int j, const Decision& d, const QueueState& q, const SlotRates& rates,
                   const EdgeSystem& system) {
  EdgeDelay out;
  if (!d.offloads(system, cv) || d.xi[cv] != j) return out;
  if (j < 2 || j > system.num_edge_nodes()) throw std::out_of_range("SV index out of range");
  const auto& model = system.model_of(cv);
  const double f = system.f_veh[j - 2];

  out.transmission = transmission_delay(d.phi[cv], rates.rate(cv, j), model);
  out.processing = (q.veh[j - 2] + static_cast<double>(model.remote_workload(d.phi[cv]))) / f;

  // Peers of any model type share the SV queue.
  double peers = 0.0;
  for (int p = 0; p < system.num_cvs(); ++p) {
    if (p == cv || d.xi[p] != j || !d.offloads(system, p)) continue;
    peers += static_cast<double>(system.model_of(p).remote_workload(d.phi[p]));
  }
  out.waiting = peers / (2.0 * f);
  return out;
}

std::vector<DelayBreakdown> slot_delays(const QueueState& q, const Decision& d,
                                        const SlotRates& rates, const EdgeSystem& system) {
  std::vector<DelayBreakdown> out(static_cast<std::size_t>(system.num_cvs()));
  for (int i = 0; i < system.num_cvs(); ++i) {
    auto& row = out[i];
    row.local = local_delay(d.phi[i], q.loc[i], system.model_of(i), system.f_loc[i]);
    EdgeDelay edge;
    if (d.offloads(system, i)) {
      edge = d.xi[i] == kRsuTarget ? rsu_delay(i, d, q, rates, system)
                                   : sv_delay(i, d.xi[i], d, q, rates, system);
    }
    row.transmission = edge.transmission;
    row.processing = edge.processing;
    row.waiting = edge.waiting;
    row.total = row.local + edge.total();
  }
  return out;
}

QueueState update_queues(const QueueState& q, const Decision& d, const EdgeSystem& system) {
  const SlotArrivals a = slot_arrivals(d, system);
  QueueState next = q;
  for (int i = 0; i < system.num_cvs(); ++i) {
    next.loc[i] = std::max(q.loc[i] - system.f_loc[i] * system.tau + a.loc[i], 0.0);
  }
  for (int k = 0; k < system.num_types(); ++k) {
    next.rsu[k] = std::max(q.rsu[k] - d.rsu_alloc.at(static_cast<std::size_t>(k)) * system.tau + a.rsu[k], 0.0);
  }
  for (int j = 0; j < system.num_svs(); ++j) {
    next.veh[j] = std::max(q.veh[j] - system.f_veh[j] * system.tau + a.veh[j], 0.0);
  }
  return next;
}

}  // namespace vecsched
