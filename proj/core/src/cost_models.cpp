#include "lens/cost_models.hpp"

#include <algorithm>
#include <cmath>

namespace lens {

const char* to_string(Technology tech) noexcept {
  switch (tech) {
    case Technology::WiFi:
      return "WiFi";
    case Technology::LTE:
      return "LTE";
  }
  return "unknown";
}

void WirelessProfile::validate() const {
  if (!(throughput_mbps > 0.0) || !std::isfinite(throughput_mbps)) {
    throw ProfileError("wireless profile: t_u_mbps must be positive and finite");
  }
  if (!(round_trip_s >= 0.0) || !std::isfinite(round_trip_s)) {
    throw ProfileError("wireless profile: l_rt_s must be >= 0");
  }
  if (!(alpha_u >= 0.0) || !std::isfinite(alpha_u)) throw ProfileError("wireless profile: alpha_u must be >= 0");
  if (!(beta_u >= 0.0) || !std::isfinite(beta_u)) throw ProfileError("wireless profile: beta_u must be >= 0");
}

WirelessProfile WirelessProfile::with_throughput(double mbps) const {
  WirelessProfile out = *this;
  out.throughput_mbps = mbps;
  return out;
}

double tx_latency(std::int64_t bytes, double throughput_mbps) {
  if (!(throughput_mbps > 0.0)) throw ProfileError("upload throughput must be positive");
  if (bytes < 0) throw ValidationError("transfer size must be >= 0");
  return static_cast<double>(bytes) * 8.0 / (throughput_mbps * 1e6);
}

double tx_energy(std::int64_t bytes, const WirelessProfile& wireless) {
  return wireless.tx_power_w() * tx_latency(bytes, wireless.throughput_mbps);
}

double comm_latency(std::int64_t bytes, const WirelessProfile& wireless) {
  return tx_latency(bytes, wireless.throughput_mbps) + wireless.round_trip_s;
}

std::int64_t mac_count(const LayerSpec& layer, const LayerIO& io) {
  switch (layer.kind) {
    case LayerKind::Conv:
      return io.output.elements() * std::int64_t{layer.kernel} * layer.kernel * io.input.channels;
    case LayerKind::FullyConnected:
      return io.input.elements() * io.output.elements();
    case LayerKind::MaxPool:
      return 0;
  }
  return 0;
}

const std::vector<std::string>& feature_names(LayerKind kind) {
  static const std::vector<std::string> conv{"input", "kernel_sq", "filters", "output", "mac"};
  static const std::vector<std::string> pool{"input", "output"};
  static const std::vector<std::string> fc{"mac", "input", "output"};
  switch (kind) {
    case LayerKind::Conv:
      return conv;
    case LayerKind::MaxPool:
      return pool;
    case LayerKind::FullyConnected:
      return fc;
  }
  return fc;
}

FeatureList layer_features(const LayerSpec& layer, const LayerIO& io) {
  const auto in = static_cast<double>(io.input.elements());
  const auto out = static_cast<double>(io.output.elements());
  const auto macs = static_cast<double>(mac_count(layer, io));
  switch (layer.kind) {
    case LayerKind::Conv:
      return {{"input", in},
              {"kernel_sq", static_cast<double>(layer.kernel) * layer.kernel},
              {"filters", static_cast<double>(layer.units)},
              {"output", out},
              {"mac", macs}};
    case LayerKind::MaxPool:
      return {{"input", in}, {"output", out}};
    case LayerKind::FullyConnected:
      return {{"mac", macs}, {"input", in}, {"output", out}};
  }
  return {};
}

double LinearPredictor::predict(const FeatureList& features) const {
  double value = bias;
  for (const auto& [name, x] : features) {
    if (auto it = weights.find(name); it != weights.end()) value += it->second * x;
  }
  return value;
}

void DeviceProfile::validate() const {
  if (bytes_per_element <= 0) throw ProfileError("device profile '" + name + "': bytes_per_element must be positive");
  auto check = [this](const std::map<LayerKind, LinearPredictor>& table, const char* what) {
    for (const auto& [kind, predictor] : table) {
      const auto& names = feature_names(kind);
      if (!std::isfinite(predictor.bias)) {
        throw ProfileError("device profile '" + name + "': non-finite " + what + " bias for " + to_string(kind));
      }
      for (const auto& [feature, weight] : predictor.weights) {
        if (std::find(names.begin(), names.end(), feature) == names.end()) {
          throw ProfileError("device profile '" + name + "': " + what + " predictor for " + to_string(kind) +
                             " has unknown feature '" + feature + "'");
        }
        if (!std::isfinite(weight)) {
          throw ProfileError("device profile '" + name + "': non-finite weight '" + feature + "'");
        }
      }
    }
  };
  check(latency, "latency");
  check(power, "power");
}

DeviceProfile DeviceProfile::synthetic_gpu() {
  DeviceProfile p;
  p.name = "synthetic-gpu";
  p.bytes_per_element = 1;
  p.latency[LayerKind::Conv] = {1e-4, {{"mac", 1e-11}, {"input", 2e-10}, {"output", 2e-10}}};
  p.latency[LayerKind::MaxPool] = {5e-5, {{"input", 4e-10}}};
  p.latency[LayerKind::FullyConnected] = {5e-5, {{"mac", 2.5e-10}}};
  p.power[LayerKind::Conv] = {7.0, {}};
  p.power[LayerKind::MaxPool] = {4.5, {}};
  p.power[LayerKind::FullyConnected] = {5.5, {}};
  return p;
}

DeviceProfile DeviceProfile::synthetic_cpu() {
  DeviceProfile p;
  p.name = "synthetic-cpu";
  p.bytes_per_element = 1;
  p.latency[LayerKind::Conv] = {2e-4, {{"mac", 1.5e-10}, {"input", 1e-9}, {"output", 1e-9}}};
  p.latency[LayerKind::MaxPool] = {1e-4, {{"input", 2e-9}}};
  p.latency[LayerKind::FullyConnected] = {1e-4, {{"mac", 6e-10}}};
  p.power[LayerKind::Conv] = {3.5, {}};
  p.power[LayerKind::MaxPool] = {2.5, {}};
  p.power[LayerKind::FullyConnected] = {3.0, {}};
  return p;
}

LayerCost predict_layer(const LayerSpec& layer, const LayerIO& io, const DeviceProfile& device) {
  const auto lat = device.latency.find(layer.kind);
  const auto pow = device.power.find(layer.kind);
  if (lat == device.latency.end() || pow == device.power.end()) {
    throw ProfileError("device profile '" + device.name + "' has no predictor for " + to_string(layer.kind) +
                       " layers");
  }
  const auto features = layer_features(layer, io);
  const double latency = lat->second.predict(features);
  const double power = pow->second.predict(features);
  if (!(latency > 0.0) || !std::isfinite(latency) || !(power > 0.0) || !std::isfinite(power)) {
    throw ProfileError("device profile '" + device.name + "' predicts a non-positive cost for a " +
                       to_string(layer.kind) + " layer");
  }
  return LayerCost{latency, power, power * latency, io.output_bytes};
}

std::vector<std::size_t> identify_partition_candidates(std::span<const LayerIO> ios, std::int64_t input_bytes) {
  std::vector<std::size_t> out;
  out.push_back(0);
  for (std::size_t i = 1; i < ios.size(); ++i) {
    if (ios[i - 1].output_bytes < input_bytes) out.push_back(i);
  }
  if (!ios.empty()) out.push_back(ios.size());
  return out;
}

std::string split_label(std::size_t split, std::size_t layer_count) {
  if (split == 0) return "All-Cloud";
  if (split == layer_count) return "All-Edge";
  return "Split@" + std::to_string(split);
}

namespace {

std::size_t candidate_slot(const DeploymentEvaluation& eval, std::size_t split) {
  auto it = std::lower_bound(eval.candidates.begin(), eval.candidates.end(), split);
  if (it == eval.candidates.end() || *it != split) {
    throw ValidationError("split " + std::to_string(split) + " is not a partition candidate");
  }
  return static_cast<std::size_t>(it - eval.candidates.begin());
}

}  // namespace

bool DeploymentEvaluation::is_candidate(std::size_t split) const {
  return std::binary_search(candidates.begin(), candidates.end(), split);
}

double DeploymentEvaluation::latency_at(std::size_t split) const { return latency_acc[candidate_slot(*this, split)]; }

double DeploymentEvaluation::energy_at(std::size_t split) const { return energy_acc[candidate_slot(*this, split)]; }

std::int64_t DeploymentEvaluation::uploaded_bytes(std::size_t split) const {
  if (split >= layers.size()) return 0;
  return split == 0 ? input_bytes : sizes[split - 1].output_bytes;
}

double DeploymentEvaluation::edge_latency(std::size_t split) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < split && j < layers.size(); ++j) sum += layers[j].latency_s;
  return sum;
}

double DeploymentEvaluation::edge_energy(std::size_t split) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < split && j < layers.size(); ++j) sum += layers[j].energy_j;
  return sum;
}

DeploymentEvaluation evaluate_deployment(const ArchitectureSpec& spec, const DeviceProfile& device,
                                         const WirelessProfile& wireless) {
  wireless.validate();
  DeploymentEvaluation eval;
  eval.sizes = compute_sizes(spec, device.bytes_per_element);
  eval.input_bytes = spec.input.elements() * device.bytes_per_element;

  eval.layers.reserve(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    eval.layers.push_back(predict_layer(spec.layers[i], eval.sizes[i], device));
  }

  eval.candidates = identify_partition_candidates(eval.sizes, eval.input_bytes);
  eval.latency_acc.reserve(eval.candidates.size());
  eval.energy_acc.reserve(eval.candidates.size());

  const std::size_t n = eval.layers.size();
  double prefix_latency = 0.0;
  double prefix_energy = 0.0;
  std::size_t consumed = 0;
  for (const std::size_t split : eval.candidates) {
    for (; consumed < split; ++consumed) {
      prefix_latency += eval.layers[consumed].latency_s;
      prefix_energy += eval.layers[consumed].energy_j;
    }
    if (split == n) {
      eval.latency_acc.push_back(prefix_latency);
      eval.energy_acc.push_back(prefix_energy);
    } else {
      const std::int64_t bytes = eval.uploaded_bytes(split);
      eval.latency_acc.push_back(prefix_latency + comm_latency(bytes, wireless));
      eval.energy_acc.push_back(prefix_energy + tx_energy(bytes, wireless));
    }
  }

  std::size_t best_l = 0;
  std::size_t best_e = 0;
  for (std::size_t k = 1; k < eval.candidates.size(); ++k) {
    if (eval.latency_acc[k] < eval.latency_acc[best_l]) best_l = k;
    if (eval.energy_acc[k] < eval.energy_acc[best_e]) best_e = k;
  }
  eval.index_latency = eval.candidates[best_l];
  eval.index_energy = eval.candidates[best_e];
  eval.latency = eval.latency_acc[best_l];
  eval.energy = eval.energy_acc[best_e];
  return eval;
}

}  // namespace lens
