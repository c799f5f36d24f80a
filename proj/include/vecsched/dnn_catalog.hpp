#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace vecsched {

enum class LayerKind { ConvPool, FullyConnected };

/// Geometry of one layer. Convolution and pooling stages are folded into a
/// single ConvPool entry; H and W are the spatial dims of the layer input.
struct LayerSpec {
  LayerKind kind = LayerKind::FullyConnected;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t ker = 0;
  std::int64_t u_in = 0;
  std::int64_t u_out = 0;

  static LayerSpec conv(std::int64_t h, std::int64_t w, std::int64_t c_in,
                        std::int64_t c_out, std::int64_t ker);
  static LayerSpec fc(std::int64_t u_in, std::int64_t u_out);

  /// Throws std::invalid_argument if any dimension is below 1.
  void validate() const;
};

/// FLOPs of a layer: 2*H*W*(C_in*ker^2 + 1)*C_out for ConvPool,
/// (2*U_in - 1)*U_out for FullyConnected. Throws std::overflow_error if the
/// product does not fit in 64 bits.
std::int64_t layer_workload(const LayerSpec& layer);

/// Bytes of the layer input (the intermediate data shipped when the model is
/// split in front of this layer).
std::int64_t layer_input_bytes(const LayerSpec& layer, std::int64_t rho);

struct PartitionWorkload {
  std::int64_t local = 0;
  std::int64_t remote = 0;
};

/// Sequential DNN descriptor with cached per-layer workload and input size.
///
/// Partition points are 1-based: phi = 1 offloads every layer, phi = L + 1
/// keeps the whole model local. Layers phi..L run remotely.
class DnnModel {
 public:
  DnnModel(int type_id, std::vector<LayerSpec> layers, std::int64_t rho,
           std::string name = {});

  int type_id() const { return type_id_; }
  const std::string& name() const { return name_; }
  std::int64_t rho() const { return rho_; }

  /// L_k.
  int num_layers() const { return static_cast<int>(layers_.size()); }
  /// 1-based index of the last ConvPool layer.
  int last_conv_layer() const { return last_conv_; }

  std::span<const LayerSpec> layers() const { return layers_; }

  /// B_l for 1-based layer l.
  std::int64_t workload(int l) const;
  /// D_l for 1-based layer l.
  std::int64_t input_bytes(int l) const;

  std::int64_t total_workload() const { return prefix_.back(); }

  /// Throws std::out_of_range unless 1 <= phi <= L + 1.
  PartitionWorkload partition(int phi) const;

  /// Workload of layers phi..L (0 when phi = L + 1).
  std::int64_t remote_workload(int phi) const { return partition(phi).remote; }
  std::int64_t local_workload(int phi) const { return partition(phi).local; }

  nlohmann::json to_json() const;

 private:
  int type_id_;
  std::vector<LayerSpec> layers_;
  std::int64_t rho_;
  std::string name_;
  int last_conv_ = 0;
  std::vector<std::int64_t> workloads_;
  std::vector<std::int64_t> input_bytes_;
  std::vector<std::int64_t> prefix_;  // prefix_[l] = sum of B_1..B_l
};

PartitionWorkload partition_workloads(const DnnModel& model, int phi);

/// Parses the descriptor schema
/// { "type_id", "rho_bytes", "layers": [{"kind":"conv",...} | {"kind":"fc",...}] }.
/// Throws std::invalid_argument with a descriptive message on malformed input.
DnnModel parse_model(const nlohmann::json& descriptor);
DnnModel load_model(const std::filesystem::path& path);

/// Resolves a bare catalog name ("vgg16") against the shipped model directory,
/// or loads the path as given when it names an existing file.
DnnModel load_catalog_model(const std::string& name_or_path,
                            const std::filesystem::path& base_dir = {});

std::filesystem::path default_model_dir();

}  // namespace vecsched
