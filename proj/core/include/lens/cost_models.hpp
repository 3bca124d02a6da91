#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lens/search_space.hpp"

namespace lens {

enum class Technology { WiFi, LTE };

const char* to_string(Technology tech) noexcept;

// Expected uplink conditions. Throughput in Mbit/s (10^6 bits), round trip in
// seconds, alpha_u in W per Mbit/s and beta_u in W for the linear radio power
// model P_tx = alpha_u * t_u + beta_u.
struct WirelessProfile {
  Technology technology = Technology::WiFi;
  double throughput_mbps = 3.0;
  double round_trip_s = 0.0;
  double alpha_u = 0.0;
  double beta_u = 0.0;

  void validate() const;
  double tx_power_w() const noexcept { return alpha_u * throughput_mbps + beta_u; }
  WirelessProfile with_throughput(double mbps) const;
};

// Upload time of `bytes` at `throughput_mbps`. Throws ProfileError if the
// throughput is not positive.
double tx_latency(std::int64_t bytes, double throughput_mbps);

// Radio energy of the upload. There is no round-trip term: only the
// transmission itself draws power.
double tx_energy(std::int64_t bytes, const WirelessProfile& wireless);

// Upload time plus the round trip.
double comm_latency(std::int64_t bytes, const WirelessProfile& wireless);

// Features available to each layer kind's linear predictor:
//   conv: input, kernel_sq, filters, output, mac
//   pool: input, output
//   fc:   mac, input, output
// where input/output are element counts and mac is the multiply-accumulate count.
using FeatureList = std::vector<std::pair<std::string, double>>;

FeatureList layer_features(const LayerSpec& layer, const LayerIO& io);
const std::vector<std::string>& feature_names(LayerKind kind);

std::int64_t mac_count(const LayerSpec& layer, const LayerIO& io);

// bias + sum(weight[f] * feature[f]). Missing weights count as zero.
struct LinearPredictor {
  double bias = 0.0;
  std::map<std::string, double> weights;

  double predict(const FeatureList& features) const;
  bool operator==(const LinearPredictor&) const = default;
};

struct DeviceProfile {
  std::string name;
  int bytes_per_element = 1;
  std::map<LayerKind, LinearPredictor> latency;
  std::map<LayerKind, LinearPredictor> power;

  // Checks bytes_per_element and that every weight names a feature of its kind.
  void validate() const;

  // Analytic stand-ins for measured edge devices. Same numbers as the JSON files
  // under configs/devices/.
  static DeviceProfile synthetic_gpu();
  static DeviceProfile synthetic_cpu();

  bool operator==(const DeviceProfile&) const = default;
};

struct LayerCost {
  double latency_s = 0.0;
  double power_w = 0.0;
  double energy_j = 0.0;  // power_w * latency_s
  std::int64_t output_bytes = 0;
};

// Throws ProfileError if the profile has no predictor for the layer kind or a
// prediction is not strictly positive.
LayerCost predict_layer(const LayerSpec& layer, const LayerIO& io, const DeviceProfile& device);

// Split index i means layers [0, i) run on the edge and the tensor entering
// layer i is uploaded. Split 0 is All-Cloud (raw input is uploaded), split
// ios.size() is All-Edge (nothing is uploaded). Interior splits qualify only
// when the uploaded tensor is strictly smaller than the raw input.
std::vector<std::size_t> identify_partition_candidates(std::span<const LayerIO> ios,
                                                       std::int64_t input_bytes);

std::string split_label(std::size_t split, std::size_t layer_count);

struct DeploymentEvaluation {
  std::vector<LayerIO> sizes;
  std::vector<LayerCost> layers;
  std::int64_t input_bytes = 0;

  // Parallel arrays over candidate splits, ascending.
  std::vector<std::size_t> candidates;
  std::vector<double> latency_acc;
  std::vector<double> energy_acc;

  std::size_t index_latency = 0;
  std::size_t index_energy = 0;
  double latency = 0.0;
  double energy = 0.0;

  std::size_t all_edge() const noexcept { return layers.size(); }
  bool is_candidate(std::size_t split) const;
  double latency_at(std::size_t split) const;
  double energy_at(std::size_t split) const;
  // Bytes uploaded when splitting at `split`; 0 for All-Edge.
  std::int64_t uploaded_bytes(std::size_t split) const;
  // Edge-side prefix sums for a split.
  double edge_latency(std::size_t split) const;
  double edge_energy(std::size_t split) const;
};

// Per-layer costs, partition candidates, and the latency- and energy-minimal
// splits. Ties go to the smaller split index.
DeploymentEvaluation evaluate_deployment(const ArchitectureSpec& spec, const DeviceProfile& device,
                                         const WirelessProfile& wireless);

}  // namespace lens
