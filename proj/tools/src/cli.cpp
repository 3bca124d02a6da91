#include "lens/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lens/accuracy.hpp"
#include "lens/cost_models.hpp"
#include "lens/errors.hpp"
#include "lens/json_io.hpp"
#include "lens/mobo.hpp"
#include "lens/runtime.hpp"
#include "lens/search_space.hpp"

namespace lens::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string space;
  std::string device;
  std::string wireless;
  std::string proxy;
  std::string arch;
  std::string trace;
  std::string out;
  std::string metric = "both";
  std::optional<double> throughput;

  std::size_t iters = 100;
  std::size_t init = 20;
  std::size_t pool = 512;
  std::uint64_t seed = 0;
  std::string evaluator = "proxy";
  std::string trainer_cmd;
  double trainer_timeout = 3600.0;
  int epochs = 10;
  std::string dataset = "cifar10";
  std::string objectives = "partitioned";
  double max_failures = 0.2;
};

// Prefix config errors with the file they came from.
template <class F>
auto with_file(const std::string& path, const char* what, F&& load) {
  try {
    return load(read_json_file(path));
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ValidationError(std::string(what) + " '" + path + "': " + msg);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + " '" + path + "': " + e.what());
  }
}

SearchSpace load_space(const Flags& f) {
  if (f.space.empty()) return SearchSpace{};
  return with_file(f.space, "space", [](const json& j) { return space_from_json(j); });
}

DeviceProfile load_device(const Flags& f) {
  auto d = with_file(f.device, "device", [](const json& j) { return device_from_json(j); });
  d.validate();
  return d;
}

WirelessProfile load_wireless(const Flags& f) {
  auto w = with_file(f.wireless, "wireless", [](const json& j) { return wireless_from_json(j); });
  if (f.throughput) w.throughput_mbps = *f.throughput;
  w.validate();
  return w;
}

ProxyConstants load_proxy(const Flags& f) {
  if (f.proxy.empty()) return ProxyConstants{};
  auto p = with_file(f.proxy, "proxy", [](const json& j) { return proxy_constants_from_json(j); });
  p.validate();
  return p;
}

// Accepts an architecture, a genome, or a Pareto archive entry (its "arch").
ArchitectureSpec load_arch(const Flags& f) {
  const SearchSpace space = load_space(f);
  return with_file(f.arch, "arch", [&](const json& j) {
    if (j.is_object() && j.contains("arch")) return spec_from_json(j.at("arch"));
    if (j.is_object() && j.contains("blocks")) return decode(genome_from_json(j, space), space);
    return spec_from_json(j);
  });
}

std::vector<Metric> metrics_of(const std::string& name) {
  if (name == "latency") return {Metric::Latency};
  if (name == "energy") return {Metric::Energy};
  return {Metric::Latency, Metric::Energy};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json path_or_null(const std::string& p) { return p.empty() ? json(nullptr) : json(p); }

int cmd_search(const Flags& f, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  const SearchSpace space = load_space(f);
  const DeviceProfile device = load_device(f);
  const WirelessProfile wireless = load_wireless(f);
  const ProxyConstants proxy = load_proxy(f);

  EvaluatorBinding binding;
  binding.mode = f.evaluator == "external" ? EvaluatorMode::External : EvaluatorMode::Proxy;
  binding.command = f.trainer_cmd;
  binding.timeout_s = f.trainer_timeout;
  binding.epochs = f.epochs;
  binding.dataset = f.dataset;
  binding.seed = f.seed;
  auto evaluator = make_evaluator(binding, proxy);

  SearchConfig config;
  config.initial_samples = f.init;
  config.iterations = f.iters;
  config.pool_size = f.pool;
  config.seed = f.seed;
  config.objectives = f.objectives == "edge-only" ? ObjectiveMode::EdgeOnly : ObjectiveMode::Partitioned;
  config.validate();

  const fs::path dir = f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("out: cannot create '" + f.out + "': " + ec.message());

  const SearchResult result = run_search(config, space, device, wireless, *evaluator);

  std::ostringstream log;
  write_query_log_csv(log, result, space);
  write_file_atomic(dir / "log.csv", log.str());
  write_file_atomic(dir / "pareto.json", archive_to_json(result, space).dump(2) + "\n");

  const std::size_t attempted = result.log.size() + result.failures.size();
  auto failures = json::array();
  for (const auto& q : result.failures) {
    failures.push_back({{"iteration", q.iteration}, {"genome", to_json(q.genome, space)}, {"message", q.message}});
  }
  const json manifest{
      {"format", 1},
      {"command", "search"},
      {"versions", {{"lens", LENS_VERSION}}},
      {"config",
       {{"space", path_or_null(f.space)},
        {"device", f.device},
        {"wireless", f.wireless},
        {"proxy", path_or_null(f.proxy)}}},
      {"search",
       {{"initial_samples", config.initial_samples},
        {"iterations", config.iterations},
        {"pool_size", config.pool_size},
        {"seed", config.seed},
        {"scalarization", config.scalarization},
        {"augmentation", config.augmentation},
        {"objectives", f.objectives},
        {"evaluator", f.evaluator}}},
      {"out", f.out},
      {"files", {"log.csv", "pareto.json"}},
      {"queries", result.log.size()},
      {"failures", failures},
      {"pareto_size", result.archive.size()},
      {"started_at", started},
      {"finished_at", utc_now()}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "queries " << result.log.size() << ", failures " << result.failures.size() << ", pareto " << result.archive.size()
      << " -> " << dir.string() << "\n";
  if (attempted > 0 && static_cast<double>(result.failures.size()) > f.max_failures * static_cast<double>(attempted)) {
    err << "lens: " << result.failures.size() << " of " << attempted << " accuracy evaluations failed (limit "
        << format_double(100.0 * f.max_failures) << "%)\n";
    return kExitEvaluatorFailures;
  }
  return kExitOk;
}

int cmd_evaluate(const Flags& f, std::ostream& out) {
  const ArchitectureSpec spec = load_arch(f);
  const DeviceProfile device = load_device(f);
  const WirelessProfile wireless = load_wireless(f);
  const DeploymentEvaluation eval = evaluate_deployment(spec, device, wireless);
  json j = to_json(eval, spec);
  j["wireless"] = to_json(wireless);
  j["device"] = device.name;
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_thresholds(const Flags& f, std::ostream& out) {
  const ArchitectureSpec spec = load_arch(f);
  const DeviceProfile device = load_device(f);
  const WirelessProfile wireless = load_wireless(f);
  const auto options = deployment_options(evaluate_deployment(spec, device, wireless));
  json j = json::object();
  for (Metric m : metrics_of(f.metric)) j[to_string(m)] = to_json(build_dominance_map(options, m, wireless));
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_replay(const Flags& f, std::ostream& out, std::ostream& err) {
  const ThroughputTrace trace = load_trace_csv(f.trace);
  const ArchitectureSpec spec = load_arch(f);
  const DeviceProfile device = load_device(f);
  const WirelessProfile wireless = load_wireless(f);
  const auto options = deployment_options(evaluate_deployment(spec, device, wireless));
  const std::vector<Metric> metrics = metrics_of(f.metric == "both" ? "latency" : f.metric);
  const Metric metric = metrics.front();

  std::vector<ReplayResult> results;
  for (std::size_t i = 0; i < options.size(); ++i) {
    results.push_back(replay_trace(trace, options, FixedPolicy{i}, wireless, metric));
  }
  results.push_back(
      replay_trace(trace, options, DynamicPolicy{build_dominance_map(options, metric, wireless)}, wireless, metric));
  const ReplayResult& dynamic = results.back();

  std::ostringstream summary;
  const char* unit = metric == Metric::Latency ? "s" : "J";
  json gains = json::array();
  for (std::size_t i = 0; i + 1 < results.size(); ++i) {
    const double pct = improvement_percent(dynamic, results[i]);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%%", pct);
    summary << "Dynamic vs " << results[i].policy << ": " << buf << " lower accumulated " << to_string(metric) << " ("
            << format_double(dynamic.total) << " " << unit << " vs " << format_double(results[i].total) << " " << unit
            << ")\n";
    gains.push_back({{"baseline", results[i].policy}, {"baseline_total", results[i].total}, {"improvement_percent", pct}});
  }

  if (f.out.empty()) {
    write_replay_csv(out, trace, results, true);
    err << summary.str();
    return kExitOk;
  }
  const fs::path dir = f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("out: cannot create '" + f.out + "': " + ec.message());
  const std::string stem = std::string("replay_") + to_string(metric);
  std::ostringstream per_sample, cumulative;
  write_replay_csv(per_sample, trace, results, false);
  write_replay_csv(cumulative, trace, results, true);
  write_file_atomic(dir / (stem + "_per_sample.csv"), per_sample.str());
  write_file_atomic(dir / (stem + "_cumulative.csv"), cumulative.str());
  const json meta{{"format", 1},
                  {"metric", to_string(metric)},
                  {"trace", f.trace},
                  {"samples", trace.samples.size()},
                  {"sampling_period_s", trace.sampling_period_s()},
                  {"inferences_per_sample", 1},
                  {"switching_cost", 0},
                  {"dynamic_total", dynamic.total},
                  {"improvements", gains}};
  write_file_atomic(dir / (stem + ".json"), meta.dump(2) + "\n");
  out << summary.str();
  return kExitOk;
}

void add_profiles(CLI::App* cmd, Flags& f) {
  cmd->add_option("--device", f.device, "Device profile JSON")->required();
  cmd->add_option("--wireless", f.wireless, "Wireless profile JSON")->required();
  cmd->add_option("--t-u", f.throughput, "Override the profile's upload throughput (Mbps)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--space", f.space, "Search space JSON (default: built-in space)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Partition-aware multi-objective architecture search for edge-cloud inference", "lens"};
  app.set_version_flag("--version", LENS_VERSION);
  app.require_subcommand(1);

  auto* search = app.add_subcommand("search", "Run the Bayesian-optimization search");
  add_profiles(search, f);
  search->add_option("--iters", f.iters, "BO iterations after initialization")->capture_default_str();
  search->add_option("--init", f.init, "Random initial samples")->capture_default_str();
  search->add_option("--pool", f.pool, "Candidate pool size per iteration")->capture_default_str();
  search->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  search->add_option("--out", f.out, "Output directory")->required();
  search->add_option("--proxy", f.proxy, "Proxy accuracy constants JSON");
  search->add_option("--evaluator", f.evaluator, "Accuracy backend")
      ->check(CLI::IsMember({"proxy", "external"}))
      ->capture_default_str();
  search->add_option("--trainer-cmd", f.trainer_cmd, "Shell command starting the trainer worker");
  search->add_option("--trainer-timeout", f.trainer_timeout, "Seconds to wait per trainer response")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  search->add_option("--epochs", f.epochs, "Training epochs requested from the trainer")->capture_default_str();
  search->add_option("--dataset", f.dataset, "Dataset name passed to the trainer")->capture_default_str();
  search->add_option("--objectives", f.objectives, "Cost objectives: best split, or All-Edge only")
      ->check(CLI::IsMember({"partitioned", "edge-only"}))
      ->capture_default_str();
  search->add_option("--max-failure-fraction", f.max_failures, "Exit 3 if more evaluations than this fail")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Per-layer costs and best split of one architecture");
  add_profiles(evaluate, f);
  evaluate->add_option("--arch", f.arch, "Architecture, genome, or Pareto entry JSON")->required();

  auto* thresholds = app.add_subcommand("thresholds", "Throughput dominance map of the deployment options");
  add_profiles(thresholds, f);
  thresholds->add_option("--arch", f.arch, "Architecture, genome, or Pareto entry JSON")->required();
  thresholds->add_option("--metric", f.metric, "latency, energy, or both")
      ->check(CLI::IsMember({"latency", "energy", "both"}))
      ->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Replay a throughput trace under fixed and dynamic policies");
  add_profiles(replay, f);
  replay->add_option("--arch", f.arch, "Architecture, genome, or Pareto entry JSON")->required();
  replay->add_option("--trace", f.trace, "Trace CSV with header timestamp_s,t_u_mbps")->required();
  replay->add_option("--metric", f.metric, "latency or energy (default latency)")
      ->check(CLI::IsMember({"latency", "energy"}));
  replay->add_option("--out", f.out, "Directory for CSV series; stdout if omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*search) {
      if (f.evaluator == "external" && f.trainer_cmd.empty()) {
        throw ValidationError("--trainer-cmd is required with --evaluator external");
      }
      return cmd_search(f, out, err);
    }
    if (*evaluate) return cmd_evaluate(f, out);
    if (*thresholds) return cmd_thresholds(f, out);
    if (*replay) return cmd_replay(f, out, err);
  } catch (const ValidationError& e) {
    err << "lens: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "lens: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace lens::cli
