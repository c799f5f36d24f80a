#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "vecsched/dnn_catalog.hpp"
#include "vecsched/queueing.hpp"

namespace fixtures {

// Uniform(-1, 1) entries from a seeded engine; Eigen's Random() shares
// std::rand state with every other test and so depends on test order.
inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Two layers: B = (6, 5), D = (8, 12) bytes.
inline vecsched::DnnModel tiny_model(int type_id = 0) {
  return vecsched::DnnModel(type_id, {vecsched::LayerSpec::conv(1, 1, 2, 1, 1), vecsched::LayerSpec::fc(3, 1)}, 4,
                            "tiny");
}

// Three CVs of one type, RSU plus two SVs.
inline vecsched::EdgeSystem hand_system() {
  vecsched::EdgeSystem s;
  s.models = {tiny_model()};
  s.cv_type = {0, 0, 0};
  s.f_loc = {1.0, 2.0, 4.0};
  s.f_veh = {5.0, 10.0};
  s.f_rsu_max = 6.0;
  s.tau = 1.0;
  return s;
}

inline vecsched::QueueState hand_queues() {
  vecsched::QueueState q;
  q.loc = {2.0, 0.0, 1.0};
  q.rsu = {3.0};
  q.veh = {0.0, 4.0};
  return q;
}

// CV0 offloads everything to the RSU, CV1 splits before layer 2 to the RSU,
// CV2 splits before layer 2 to edge node 3 (second SV).
inline vecsched::Decision hand_decision() {
  vecsched::Decision d;
  d.phi = {1, 2, 2};
  d.xi = {1, 1, 3};
  d.rsu_alloc = {6.0};
  return d;
}

// Every link carries 16 bit/s, so shipping D bytes takes D/2 seconds.
inline vecsched::SlotRates hand_rates() {
  vecsched::SlotRates r;
  r.to_rsu = {16.0, 16.0, 16.0};
  r.to_sv = {{16.0, 16.0}, {16.0, 16.0}, {16.0, 16.0}};
  return r;
}

// Random system with the given shape; layer dims kept small so workloads are
// O(1e2..1e4) and capacities are comparable.
inline vecsched::EdgeSystem random_system(std::mt19937_64& rng, int cvs, int types, int svs) {
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_int_distribution<int> depth(1, 4);
  std::uniform_real_distribution<double> cap(50.0, 400.0);
  vecsched::EdgeSystem s;
  for (int k = 0; k < types; ++k) {
    std::vector<vecsched::LayerSpec> layers{vecsched::LayerSpec::conv(dim(rng), dim(rng), dim(rng), dim(rng), 1 + dim(rng) % 3)};
    // Convolutions first, then fully connected layers.
    const int convs = depth(rng) - 1;
    const int fcs = depth(rng) - 1;
    for (int l = 0; l < convs; ++l) layers.push_back(vecsched::LayerSpec::conv(dim(rng), dim(rng), dim(rng), dim(rng), 1));
    for (int l = 0; l < fcs; ++l) layers.push_back(vecsched::LayerSpec::fc(dim(rng) * 4, dim(rng) * 2));
    s.models.emplace_back(k, std::move(layers), 4);
  }
  std::uniform_int_distribution<int> type(0, types - 1);
  for (int i = 0; i < cvs; ++i) {
    s.cv_type.push_back(type(rng));
    s.f_loc.push_back(cap(rng));
  }
  for (int j = 0; j < svs; ++j) s.f_veh.push_back(cap(rng));
  s.f_rsu_max = 3.0 * cap(rng);
  s.tau = 1.0;
  return s;
}

inline vecsched::QueueState random_queues(std::mt19937_64& rng, const vecsched::EdgeSystem& s, double scale) {
  std::uniform_real_distribution<double> u(0.0, scale);
  vecsched::QueueState q = vecsched::QueueState::zeros(s);
  for (auto* v : {&q.loc, &q.rsu, &q.veh}) {
    for (auto& x : *v) x = u(rng) < 0.2 * scale ? 0.0 : u(rng);
  }
  return q;
}

// Random phi/xi plus an arbitrary feasible RSU split.
inline vecsched::Decision random_decision(std::mt19937_64& rng, const vecsched::EdgeSystem& s) {
  vecsched::Decision d;
  for (int i = 0; i < s.num_cvs(); ++i) {
    std::uniform_int_distribution<int> phi(1, s.model_of(i).num_layers() + 1);
    std::uniform_int_distribution<int> xi(1, s.num_edge_nodes());
    d.phi.push_back(phi(rng));
    d.xi.push_back(xi(rng));
  }
  std::uniform_real_distribution<double> w(0.0, 1.0);
  std::vector<double> share(static_cast<std::size_t>(s.num_types()));
  double sum = 0.0;
  for (auto& x : share) sum += (x = w(rng) + 1e-3);
  for (auto& x : share) d.rsu_alloc.push_back(x / sum * s.f_rsu_max * 0.999);
  return d;
}

inline vecsched::SlotRates random_rates(std::mt19937_64& rng, const vecsched::EdgeSystem& s) {
  std::uniform_real_distribution<double> r(100.0, 5000.0);
  vecsched::SlotRates out;
  for (int i = 0; i < s.num_cvs(); ++i) {
    out.to_rsu.push_back(r(rng));
    std::vector<double> row;
    for (int j = 0; j < s.num_svs(); ++j) row.push_back(r(rng));
    out.to_sv.push_back(row);
  }
  return out;
}

}  // namespace fixtures
