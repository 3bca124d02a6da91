#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lens/cost_models.hpp"

namespace lens {

enum class Metric { Latency, Energy };

const char* to_string(Metric metric) noexcept;

// One way to deploy a fixed architecture: run the first `split` layers on the
// edge and upload `uploaded_bytes`.
struct DeploymentOption {
  std::string label;
  std::size_t split = 0;
  double edge_latency_s = 0.0;
  double edge_energy_j = 0.0;
  std::int64_t uploaded_bytes = 0;  // 0 for All-Edge
};

// One option per partition candidate of `eval`, in split order.
std::vector<DeploymentOption> deployment_options(const DeploymentEvaluation& eval);

// cost(t_u) = constant + inverse / t_u, t_u in Mbit/s.
// Latency: constant = A_L + L_RT [S>0],            inverse = 8 S / 1e6
// Energy:  constant = A_E + alpha_u 8 S / 1e6,     inverse = beta_u 8 S / 1e6
// The alpha_u term of the radio power cancels the 1/t_u of the upload time,
// so it only shifts the constant.
struct CostCurve {
  double constant = 0.0;
  double inverse = 0.0;

  double at(double throughput_mbps) const noexcept { return constant + inverse / throughput_mbps; }
  bool operator==(const CostCurve&) const = default;
};

CostCurve option_cost(const DeploymentOption& option, Metric metric, const WirelessProfile& wireless);

struct Crossing {
  enum class Kind { None, Single, AlwaysTied };
  Kind kind = Kind::None;
  double throughput_mbps = 0.0;  // valid for Single
  // 0 = first option cheaper, 1 = second option cheaper; -1 only for AlwaysTied.
  int winner_below = -1;
  int winner_above = -1;
};

// Solves cost_a(t) = cost_b(t) for t > 0. Costs are affine in 1/t, so there is
// at most one positive root.
Crossing pairwise_threshold(const CostCurve& a, const CostCurve& b);
Crossing pairwise_threshold(const DeploymentOption& a, const DeploymentOption& b, Metric metric,
                            const WirelessProfile& wireless);

// Intervals [breakpoints[i-1], breakpoints[i]) over (0, inf), each owned by
// winners[i]; winners.size() == breakpoints.size() + 1. Adjacent intervals
// never share a winner.
struct DominanceMap {
  Metric metric = Metric::Latency;
  WirelessProfile wireless;
  std::vector<DeploymentOption> options;
  std::vector<double> breakpoints;
  std::vector<std::size_t> winners;  // indices into options

  std::size_t interval_count() const noexcept { return winners.size(); }
};

DominanceMap build_dominance_map(std::span<const DeploymentOption> options, Metric metric,
                                 const WirelessProfile& wireless);

// Option index owning t_u. A t_u equal to a breakpoint belongs to the interval
// on its right.
std::size_t select_option(const DominanceMap& map, double throughput_mbps);

struct TraceSample {
  double timestamp_s = 0.0;
  double throughput_mbps = 0.0;
};

struct ThroughputTrace {
  std::vector<TraceSample> samples;

  // Strictly increasing timestamps and positive throughput. Throws TraceError
  // with the 1-based data-line number (header is line 1).
  void validate() const;
  // Median spacing between consecutive samples; 0 for fewer than two samples.
  double sampling_period_s() const;
};

// CSV with the header `timestamp_s,t_u_mbps`.
ThroughputTrace parse_trace_csv(std::istream& in);
ThroughputTrace load_trace_csv(const std::filesystem::path& path);

struct FixedPolicy {
  std::size_t option = 0;
};
struct DynamicPolicy {
  DominanceMap map;
};
using Policy = std::variant<FixedPolicy, DynamicPolicy>;

struct ReplayResult {
  std::string policy;
  std::vector<std::size_t> chosen;
  std::vector<double> per_sample;
  std::vector<double> cumulative;
  double total = 0.0;
};

// One inference per trace sample. Switching between options is free.
ReplayResult replay_trace(const ThroughputTrace& trace, std::span<const DeploymentOption> options,
                          const Policy& policy, const WirelessProfile& wireless, Metric metric);

// Percentage by which `better` undercuts `baseline` in total cost.
double improvement_percent(const ReplayResult& better, const ReplayResult& baseline);

// timestamp_s,t_u_mbps,<policy>,... with per-sample (or cumulative) costs.
void write_replay_csv(std::ostream& out, const ThroughputTrace& trace, std::span<const ReplayResult> results,
                      bool cumulative);

}  // namespace lens
