#pragma once

#include <limits>
#include <span>
#include <vector>

#include "vecsched/dnn_catalog.hpp"
#include "vecsched/network_env.hpp"

namespace vecsched {

inline constexpr int kRsuTarget = 1;
inline constexpr double kInfiniteDelay = std::numeric_limits<double>::infinity();

/// Static description of one RSU cell: model catalog, CV/SV capacities and
/// the slot length. Capacities are FLOP/s, workloads FLOPs.
struct EdgeSystem {
  std::vector<DnnModel> models;  // indexed by type k
  std::vector<int> cv_type;      // k for each CV
  std::vector<double> f_loc;     // per CV
  std::vector<double> f_veh;     // per SV (edge node j = sv index + 2)
  double f_rsu_max = 30e9;
  double tau = 1.0;

  int num_cvs() const { return static_cast<int>(cv_type.size()); }
  int num_types() const { return static_cast<int>(models.size()); }
  int num_svs() const { return static_cast<int>(f_veh.size()); }
  /// J: the RSU plus every SV.
  int num_edge_nodes() const { return num_svs() + 1; }
  const DnnModel& model_of(int cv) const { return models.at(static_cast<std::size_t>(cv_type.at(static_cast<std::size_t>(cv)))); }

  void validate() const;
};

/// Backlogs in FLOPs.
struct QueueState {
  std::vector<double> loc;  // per CV
  std::vector<double> rsu;  // per model type
  std::vector<double> veh;  // per SV

  static QueueState zeros(const EdgeSystem& system);
  double total() const;
};

/// Per-CV partition point phi in 1..L_k+1 and offload target xi in 1..J
/// (1 = RSU), plus the RSU FLOP/s assigned to each model type. xi is kept but
/// ignored when phi = L_k + 1.
struct Decision {
  std::vector<int> phi;
  std::vector<int> xi;
  std::vector<double> rsu_alloc;

  bool offloads(const EdgeSystem& system, int cv) const;
};

/// Throws std::invalid_argument when ranges or the RSU capacity are violated.
void validate_decision(const Decision& decision, const EdgeSystem& system,
                       bool check_allocation = true);

struct EdgeDelay {
  double transmission = 0.0;
  double processing = 0.0;
  double waiting = 0.0;

  double total() const { return transmission + processing + waiting; }
};

struct DelayBreakdown {
  double transmission = 0.0;
  double processing = 0.0;
  double waiting = 0.0;
  double local = 0.0;
  double total = 0.0;
};

/// Work newly placed on each queue by one slot's decision.
struct SlotArrivals {
  std::vector<double> loc;
  std::vector<double> rsu;
  std::vector<double> veh;

  double total() const;
};

SlotArrivals slot_arrivals(const Decision& decision, const EdgeSystem& system);

/// 8*D_phi / rate seconds; 0 for full-local execution, +inf when rate is 0.
double transmission_delay(int phi, double rate_bps, const DnnModel& model);

/// (q_loc + sum of layers before phi) / f_loc; 0 when phi = 1.
double local_delay(int phi, double q_loc, const DnnModel& model, double f_loc);

EdgeDelay rsu_delay(int cv, const Decision& decision, const QueueState& queues,
                    const SlotRates& rates, const EdgeSystem& system);

/// j is the edge node index (2..J).
EdgeDelay sv_delay(int cv, int j, const Decision& decision, const QueueState& queues,
                   const SlotRates& rates, const EdgeSystem& system);

std::vector<DelayBreakdown> slot_delays(const QueueState& queues, const Decision& decision,
                                        const SlotRates& rates, const EdgeSystem& system);

/// max{Q - service*tau + arrivals, 0} for every queue.
QueueState update_queues(const QueueState& queues, const Decision& decision,
                         const EdgeSystem& system);

}  // namespace vecsched
