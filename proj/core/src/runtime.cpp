#include "lens/runtime.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "lens/json_io.hpp"

namespace lens {

const char* to_string(Metric metric) noexcept {
  return metric == Metric::Latency ? "latency" : "energy";
}

std::vector<DeploymentOption> deployment_options(const DeploymentEvaluation& eval) {
  std::vector<DeploymentOption> out;
  out.reserve(eval.candidates.size());
  for (std::size_t split : eval.candidates) {
    out.push_back(DeploymentOption{split_label(split, eval.all_edge()), split, eval.edge_latency(split),
                                   eval.edge_energy(split), eval.uploaded_bytes(split)});
  }
  return out;
}

CostCurve option_cost(const DeploymentOption& option, Metric metric, const WirelessProfile& wireless) {
  const double bits_m = static_cast<double>(option.uploaded_bytes) * 8.0 / 1e6;
  if (metric == Metric::Latency) {
    return CostCurve{option.edge_latency_s + (option.uploaded_bytes > 0 ? wireless.round_trip_s : 0.0), bits_m};
  }
  return CostCurve{option.edge_energy_j + wireless.alpha_u * bits_m, wireless.beta_u * bits_m};
}

Crossing pairwise_threshold(const CostCurve& a, const CostCurve& b) {
  Crossing out;
  const double dc0 = a.constant - b.constant;
  const double dc1 = b.inverse - a.inverse;
  if (dc0 == 0.0 && dc1 == 0.0) {
    out.kind = Crossing::Kind::AlwaysTied;
    return out;
  }
  // a - b = dc0 - dc1 / t
  if (dc0 != 0.0 && dc1 != 0.0) {
    const double t = dc1 / dc0;
    if (t > 0.0 && std::isfinite(t)) {
      out.kind = Crossing::Kind::Single;
      out.throughput_mbps = t;
      out.winner_below = a.inverse < b.inverse ? 0 : 1;
      out.winner_above = a.constant < b.constant ? 0 : 1;
      return out;
    }
  }
  // Sign of a - b is the same everywhere on t > 0.
  const int w = dc0 != 0.0 ? (dc0 < 0.0 ? 0 : 1) : (a.inverse < b.inverse ? 0 : 1);
  out.winner_below = out.winner_above = w;
  return out;
}

Crossing pairwise_threshold(const DeploymentOption& a, const DeploymentOption& b, Metric metric,
                            const WirelessProfile& wireless) {
  return pairwise_threshold(option_cost(a, metric, wireless), option_cost(b, metric, wireless));
}

namespace {

std::size_t argmin_at(std::span<const CostCurve> curves, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    if (curves[i].at(t) < curves[best].at(t)) best = i;
  }
  return best;
}

}  // namespace

DominanceMap build_dominance_map(std::span<const DeploymentOption> options, Metric metric,
                                 const WirelessProfile& wireless) {
  if (options.empty()) throw ValidationError("dominance map needs at least one option");
  DominanceMap map;
  map.metric = metric;
  map.wireless = wireless;
  map.options.assign(options.begin(), options.end());

  std::vector<CostCurve> curves;
  for (const auto& o : options) curves.push_back(option_cost(o, metric, wireless));

  std::vector<double> cuts;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const Crossing c = pairwise_threshold(curves[i], curves[j]);
      if (c.kind == Crossing::Kind::Single) cuts.push_back(c.throughput_mbps);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  for (std::size_t k = 0; k <= cuts.size(); ++k) {
    double probe = 1.0;
    if (cuts.empty()) {
      probe = 1.0;
    } else if (k == 0) {
      probe = cuts.front() / 2.0;
    } else if (k == cuts.size()) {
      probe = cuts.back() * 2.0;
    } else {
      probe = 0.5 * (cuts[k - 1] + cuts[k]);
    }
    const std::size_t w = argmin_at(curves, probe);
    if (!map.winners.empty() && map.winners.back() == w) continue;
    if (!map.winners.empty()) map.breakpoints.push_back(cuts[k - 1]);
    map.winners.push_back(w);
  }
  return map;
}

std::size_t select_option(const DominanceMap& map, double throughput_mbps) {
  if (!(throughput_mbps > 0.0)) throw ValidationError("select_option: t_u must be positive");
  const auto& bp = map.breakpoints;
  const auto k = static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), throughput_mbps) - bp.begin());
  std::size_t winner = map.winners.at(k);

  // A computed crossing can be an ulp off the true one. Within that band the
  // two neighbouring owners are compared directly; exact ties keep [lo, hi).
  auto near = [&](double cut) { return std::abs(throughput_mbps - cut) <= 1e-9 * cut; };
  auto cheaper = [&](std::size_t other) {
    const double mine = option_cost(map.options[winner], map.metric, map.wireless).at(throughput_mbps);
    const double theirs = option_cost(map.options[other], map.metric, map.wireless).at(throughput_mbps);
    if (theirs < mine) winner = other;
  };
  if (k > 0 && near(bp[k - 1])) cheaper(map.winners[k - 1]);
  if (k < bp.size() && near(bp[k])) cheaper(map.winners[k + 1]);
  return winner;
}

void ThroughputTrace::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.timestamp_s)) throw TraceError(i + 2, "timestamp is not finite");
    if (!(s.throughput_mbps > 0.0) || !std::isfinite(s.throughput_mbps)) {
      throw TraceError(i + 2, "t_u_mbps must be positive");
    }
    if (i > 0 && !(s.timestamp_s > samples[i - 1].timestamp_s)) {
      throw TraceError(i + 2, "timestamps must be strictly increasing");
    }
  }
}

double ThroughputTrace::sampling_period_s() const {
  if (samples.size() < 2) return 0.0;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < samples.size(); ++i) gaps.push_back(samples[i].timestamp_s - samples[i - 1].timestamp_s);
  const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view text, std::size_t line, const char* name) {
  text = trim(text);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw TraceError(line, std::string("cannot parse ") + name + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

ThroughputTrace parse_trace_csv(std::istream& in) {
  std::string raw;
  if (!std::getline(in, raw) || trim(raw) != "timestamp_s,t_u_mbps") {
    throw TraceError(1, "expected header 'timestamp_s,t_u_mbps'");
  }
  ThroughputTrace trace;
  std::size_t line = 1;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view row = trim(raw);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw TraceError(line, "expected two comma-separated fields");
    }
    TraceSample s{parse_field(row.substr(0, comma), line, "timestamp_s"),
                  parse_field(row.substr(comma + 1), line, "t_u_mbps")};
    if (!(s.throughput_mbps > 0.0) || !std::isfinite(s.throughput_mbps)) {
      throw TraceError(line, "t_u_mbps must be positive");
    }
    if (!trace.samples.empty() && !(s.timestamp_s > trace.samples.back().timestamp_s)) {
      throw TraceError(line, "timestamps must be strictly increasing");
    }
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw TraceError(line, "trace has no samples");
  return trace;
}

ThroughputTrace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace '" + path.string() + "'");
  return parse_trace_csv(in);
}

ReplayResult replay_trace(const ThroughputTrace& trace, std::span<const DeploymentOption> options,
                          const Policy& policy, const WirelessProfile& wireless, Metric metric) {
  trace.validate();
  ReplayResult out;
  const auto* fixed = std::get_if<FixedPolicy>(&policy);
  const auto* dynamic = std::get_if<DynamicPolicy>(&policy);
  std::span<const DeploymentOption> pool = dynamic ? std::span<const DeploymentOption>(dynamic->map.options) : options;
  if (fixed) {
    if (fixed->option >= options.size()) throw ValidationError("replay: fixed option index out of range");
    out.policy = "Fixed(" + options[fixed->option].label + ")";
  } else {
    if (dynamic->map.metric != metric) throw ValidationError("replay: dominance map built for a different metric");
    out.policy = "Dynamic";
  }

  double running = 0.0;
  for (const auto& s : trace.samples) {
    const std::size_t pick = fixed ? fixed->option : select_option(dynamic->map, s.throughput_mbps);
    const double cost = option_cost(pool[pick], metric, wireless).at(s.throughput_mbps);
    running += cost;
    out.chosen.push_back(pick);
    out.per_sample.push_back(cost);
    out.cumulative.push_back(running);
  }
  out.total = running;
  return out;
}

double improvement_percent(const ReplayResult& better, const ReplayResult& baseline) {
  if (baseline.total == 0.0) return 0.0;
  return 100.0 * (baseline.total - better.total) / baseline.total;
}

void write_replay_csv(std::ostream& out, const ThroughputTrace& trace, std::span<const ReplayResult> results,
                      bool cumulative) {
  out << "timestamp_s,t_u_mbps";
  for (const auto& r : results) out << ',' << r.policy;
  out << '\n';
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out << format_double(trace.samples[i].timestamp_s) << ',' << format_double(trace.samples[i].throughput_mbps);
    for (const auto& r : results) out << ',' << format_double(cumulative ? r.cumulative.at(i) : r.per_sample.at(i));
    out << '\n';
  }
}

}  // namespace lens
