#include "vecsched/dnn_catalog.hpp"

#include <fstream>
#include <stdexcept>

namespace vecsched {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw std::overflow_error("layer dimension product overflows int64");
  }
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw std::overflow_error("workload sum overflows int64");
  }
  return out;
}

void require_positive(std::int64_t v, const char* what) {
  if (v < 1) {
    throw std::invalid_argument(std::string("layer dimension '") + what +
                                "' must be >= 1, got " + std::to_string(v));
  }
}

}  // namespace

LayerSpec LayerSpec::conv(std::int64_t h, std::int64_t w, std::int64_t c_in,
                          std::int64_t c_out, std::int64_t ker) {
  LayerSpec l;
  l.kind = LayerKind::ConvPool;
  l.h = h;
  l.w = w;
  l.c_in = c_in;
  l.c_out = c_out;
  l.ker = ker;
  l.validate();
  return l;
}

LayerSpec LayerSpec::fc(std::int64_t u_in, std::int64_t u_out) {
  LayerSpec l;
  l.kind = LayerKind::FullyConnected;
  l.u_in = u_in;
  l.u_out = u_out;
  l.validate();
  return l;
}

void LayerSpec::validate() const {
  if (kind == LayerKind::ConvPool) {
    require_positive(h, "H");
    require_positive(w, "W");
    require_positive(c_in, "c_in");
    require_positive(c_out, "c_out");
    require_positive(ker, "ker");
  } else {
    require_positive(u_in, "u_in");
    require_positive(u_out, "u_out");
  }
}

std::int64_t layer_workload(const LayerSpec& layer) {
  if (layer.kind == LayerKind::ConvPool) {
    const std::int64_t per_out =
        checked_add(checked_mul(layer.c_in, checked_mul(layer.ker, layer.ker)), 1);
    return checked_mul(checked_mul(checked_mul(2, checked_mul(layer.h, layer.w)), per_out),
                       layer.c_out);
  }
  return checked_mul(checked_add(checked_mul(2, layer.u_in), -1), layer.u_out);
}

std::int64_t layer_input_bytes(const LayerSpec& layer, std::int64_t rho) {
  if (rho < 1) throw std::invalid_argument("rho must be >= 1 byte");
  if (layer.kind == LayerKind::ConvPool) {
    return checked_mul(checked_mul(checked_mul(layer.h, layer.w), layer.c_in), rho);
  }
  return checked_mul(layer.u_in, rho);
}

DnnModel::DnnModel(int type_id, std::vector<LayerSpec> layers, std::int64_t rho,
                   std::string name)
    : type_id_(type_id), layers_(std::move(layers)), rho_(rho), name_(std::move(name)) {
  if (layers_.empty()) throw std::invalid_argument("model has no layers");
  if (rho_ < 1) throw std::invalid_argument("rho_bytes must be >= 1");

  bool seen_fc = false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].validate();
    if (layers_[l].kind == LayerKind::FullyConnected) {
      seen_fc = true;
    } else {
      if (seen_fc) {
        throw std::invalid_argument("layer " + std::to_string(l + 1) +
                                    ": conv/pool layer after a fully connected layer");
      }
      last_conv_ = static_cast<int>(l) + 1;
    }
  }
  if (last_conv_ < 1) throw std::invalid_argument("model needs at least one conv/pool layer");

  prefix_.assign(layers_.size() + 1, 0);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    workloads_.push_back(layer_workload(layers_[l]));
    input_bytes_.push_back(layer_input_bytes(layers_[l], rho_));
    prefix_[l + 1] = checked_add(prefix_[l], workloads_.back());
  }
}

std::int64_t DnnModel::workload(int l) const {
  if (l < 1 || l > num_layers()) throw std::out_of_range("layer index out of range");
  return workloads_[static_cast<std::size_t>(l - 1)];
}

std::int64_t DnnModel::input_bytes(int l) const {
  if (l < 1 || l > num_layers()) throw std::out_of_range("layer index out of range");
  return input_bytes_[static_cast<std::size_t>(l - 1)];
}

PartitionWorkload DnnModel::partition(int phi) const {
  if (phi < 1 || phi > num_layers() + 1) {
    throw std::out_of_range("partition point " + std::to_string(phi) + " outside [1, " +
                            std::to_string(num_layers() + 1) + "]");
  }
  const std::int64_t local = prefix_[static_cast<std::size_t>(phi - 1)];
  return {local, prefix_.back() - local};
}

nlohmann::json DnnModel::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) {
    if (l.kind == LayerKind::ConvPool) {
      layers.push_back({{"kind", "conv"}, {"H", l.h}, {"W", l.w}, {"c_in", l.c_in},
                        {"c_out", l.c_out}, {"ker", l.ker}});
    } else {
      layers.push_back({{"kind", "fc"}, {"u_in", l.u_in}, {"u_out", l.u_out}});
    }
  }
  nlohmann::json out = {{"type_id", type_id_}, {"rho_bytes", rho_}, {"layers", layers}};
  if (!name_.empty()) out["name"] = name_;
  return out;
}

PartitionWorkload partition_workloads(const DnnModel& model, int phi) {
  return model.partition(phi);
}

namespace {

std::int64_t get_dim(const nlohmann::json& obj, const char* key, std::size_t idx) {
  const std::string where = "layer " + std::to_string(idx + 1);
  if (!obj.contains(key)) throw std::invalid_argument(where + ": missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw std::invalid_argument(where + ": field '" + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

}  // namespace

DnnModel parse_model(const nlohmann::json& d) {
  if (!d.is_object()) throw std::invalid_argument("model descriptor must be a JSON object");
  if (!d.contains("type_id") || !d.at("type_id").is_number_integer()) {
    throw std::invalid_argument("model descriptor: 'type_id' integer required");
  }
  if (!d.contains("rho_bytes") || !d.at("rho_bytes").is_number_integer()) {
    throw std::invalid_argument("model descriptor: 'rho_bytes' integer required");
  }
  if (!d.contains("layers") || !d.at("layers").is_array()) {
    throw std::invalid_argument("model descriptor: 'layers' array required");
  }
  std::vector<LayerSpec> layers;
  const auto& arr = d.at("layers");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& l = arr[i];
    if (!l.is_object() || !l.contains("kind") || !l.at("kind").is_string()) {
      throw std::invalid_argument("layer " + std::to_string(i + 1) + ": 'kind' string required");
    }
    const auto kind = l.at("kind").get<std::string>();
    try {
      if (kind == "conv" || kind == "pool") {
        layers.push_back(LayerSpec::conv(get_dim(l, "H", i), get_dim(l, "W", i),
                                         get_dim(l, "c_in", i), get_dim(l, "c_out", i),
                                         get_dim(l, "ker", i)));
      } else if (kind == "fc") {
        layers.push_back(LayerSpec::fc(get_dim(l, "u_in", i), get_dim(l, "u_out", i)));
      } else {
        throw std::invalid_argument("unknown kind '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind("layer ", 0) == 0) throw;
      throw std::invalid_argument("layer " + std::to_string(i + 1) + ": " + msg);
    }
  }
  return DnnModel(d.at("type_id").get<int>(), std::move(layers),
                  d.at("rho_bytes").get<std::int64_t>(), d.value("name", std::string{}));
}

DnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model descriptor " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("model descriptor " + path.string() + ": " + e.what());
  }
  try {
    return parse_model(j);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.filename().string() + ": " + e.what());
  }
}

std::filesystem::path default_model_dir() {
#ifdef VECSCHED_MODEL_DIR
  return VECSCHED_MODEL_DIR;
#else
  return "models";
#endif
}

DnnModel load_catalog_model(const std::string& name_or_path,
                            const std::filesystem::path& base_dir) {
  std::filesystem::path p(name_or_path);
  if (p.has_extension()) {
    if (p.is_relative() && !base_dir.empty() && std::filesystem::exists(base_dir / p)) {
      return load_model(base_dir / p);
    }
    return load_model(p);
  }
  return load_model(default_model_dir() / (name_or_path + ".json"));
}

}  // namespace vecsched
