#include "lens/mobo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

#include "lens/acquisition.hpp"
#include "lens/json_io.hpp"

namespace lens {

void SearchConfig::validate() const {
  if (initial_samples < 2) throw ValidationError("search: initial sample count (C_init) must be >= 2");
  if (pool_size < 1) throw ValidationError("search: candidate pool size must be >= 1");
  if (scalarization != "augmented-chebyshev") {
    throw ValidationError("search: unsupported scalarization '" + scalarization + "'");
  }
  if (!(augmentation >= 0.0)) throw ValidationError("search: augmentation must be >= 0");
}

ObjectiveVector objectives_for(double error, const DeploymentEvaluation& eval, ObjectiveMode mode) {
  if (mode == ObjectiveMode::EdgeOnly) {
    const std::size_t edge = eval.all_edge();
    return ObjectiveVector{error, eval.latency_at(edge), eval.energy_at(edge)};
  }
  return ObjectiveVector{error, eval.latency, eval.energy};
}

namespace {

constexpr std::size_t kObjectives = 3;
constexpr std::size_t kMaxFreshAttempts = 100000;

class SearchState {
 public:
  SearchState(const SearchSpace& space, const DeviceProfile& device, const WirelessProfile& wireless,
              ErrorEvaluator& evaluator, ObjectiveMode mode, bool log_latency, bool log_energy)
      : space_(space),
        device_(device),
        wireless_(wireless),
        evaluator_(evaluator),
        mode_(mode),
        log_latency_(log_latency),
        log_energy_(log_energy) {}

  bool seen(const ArchitectureGenome& g) const { return seen_.contains(g.canonical()); }

  ArchitectureGenome fresh_random(std::mt19937_64& rng) const {
    for (std::size_t attempt = 0; attempt < kMaxFreshAttempts; ++attempt) {
      auto g = sample_random(space_, rng);
      if (!seen(g)) return g;
    }
    throw Error("search: could not draw an unqueried genome; search space exhausted");
  }

  void query(const ArchitectureGenome& genome, std::size_t iteration) {
    const ArchitectureGenome g = genome.canonical();
    seen_.insert(g);
    const ArchitectureSpec spec = decode(g, space_);
    double error = 0.0;
    try {
      error = evaluator_.evaluate(spec);
    } catch (const EvaluationFailed& e) {
      result_.failures.push_back(FailedQuery{iteration, g, e.what()});
      return;
    }
    DeploymentEvaluation eval = evaluate_deployment(spec, device_, wireless_);
    const ObjectiveVector obj = objectives_for(error, eval, mode_);
    const std::size_t edge = eval.all_edge();
    const bool partitioned = mode_ == ObjectiveMode::Partitioned;
    QueryRecord record{iteration, g, obj, partitioned ? eval.index_latency : edge,
                       partitioned ? eval.index_energy : edge};

    inputs_.push_back(encode_features(g, space_));
    targets_[0].push_back(obj.error);
    targets_[1].push_back(log_latency_ ? safe_log(obj.latency) : obj.latency);
    targets_[2].push_back(log_energy_ ? safe_log(obj.energy) : obj.energy);

    result_.archive.update(ArchiveEntry{g, obj, std::move(eval), result_.log.size()});
    result_.log.push_back(std::move(record));
  }

  bool has_data() const { return !inputs_.empty(); }
  const FeatureMatrix& inputs() const { return inputs_; }
  const std::vector<double>& targets(std::size_t k) const { return targets_[k]; }
  SearchResult take() { return std::move(result_); }

 private:
  static double safe_log(double v) { return std::log(std::max(v, 1e-12)); }

  const SearchSpace& space_;
  const DeviceProfile& device_;
  const WirelessProfile& wireless_;
  ErrorEvaluator& evaluator_;
  ObjectiveMode mode_;
  bool log_latency_;
  bool log_energy_;

  std::unordered_set<ArchitectureGenome, GenomeHash> seen_;
  FeatureMatrix inputs_;
  std::array<std::vector<double>, kObjectives> targets_;
  SearchResult result_;
};

}  // namespace

SearchResult run_search(const SearchConfig& config, const SearchSpace& space, const DeviceProfile& device,
                        const WirelessProfile& wireless, ErrorEvaluator& evaluator) {
  config.validate();
  device.validate();
  wireless.validate();
  std::mt19937_64 rng(config.seed);
  SearchState state(space, device, wireless, evaluator, config.objectives, config.log_latency, config.log_energy);

  for (std::size_t i = 0; i < config.initial_samples; ++i) state.query(state.fresh_random(rng), 0);

  for (std::size_t n = 1; n <= config.iterations; ++n) {
    if (!state.has_data()) {
      state.query(state.fresh_random(rng), n);
      continue;
    }

    std::vector<GpSurrogate> surrogates;
    surrogates.reserve(kObjectives);
    for (std::size_t k = 0; k < kObjectives; ++k) {
      surrogates.push_back(GpSurrogate::fit(state.inputs(), state.targets(k), config.gp));
    }
    const std::vector<double> weights = random_simplex_weights(kObjectives, rng);

    std::vector<ArchitectureGenome> pool;
    std::unordered_set<ArchitectureGenome, GenomeHash> in_pool;
    pool.reserve(config.pool_size);
    for (std::size_t i = 0; i < config.pool_size; ++i) {
      auto g = sample_random(space, rng);
      if (state.seen(g) || !in_pool.insert(g).second) continue;
      pool.push_back(std::move(g));
    }
    if (pool.empty()) {
      state.query(state.fresh_random(rng), n);
      continue;
    }

    FeatureMatrix features;
    features.reserve(pool.size());
    for (const auto& g : pool) features.push_back(encode_features(g, space));
    const auto samples = sample_posterior_on_pool(surrogates, features, rng);
    const auto acquisition = build_acquisition(samples, weights, config.augmentation);
    state.query(pool[argmax_acquisition(acquisition)], n);
  }
  return state.take();
}

SearchResult random_search(std::size_t evaluations, std::uint64_t seed, const SearchSpace& space,
                           const DeviceProfile& device, const WirelessProfile& wireless, ErrorEvaluator& evaluator,
                           ObjectiveMode mode) {
  device.validate();
  wireless.validate();
  std::mt19937_64 rng(seed);
  SearchState state(space, device, wireless, evaluator, mode, true, true);
  for (std::size_t i = 0; i < evaluations; ++i) state.query(state.fresh_random(rng), 0);
  return state.take();
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_query_log_csv(std::ostream& out, const SearchResult& result, const SearchSpace& space) {
  out << "format,iteration,genome,error,latency_s,energy_J,index_L,index_E\n";
  for (const auto& r : result.log) {
    out << 1 << ',' << r.iteration << ',' << csv_quote(to_json(r.genome, space).dump()) << ','
        << format_double(r.objectives.error) << ',' << format_double(r.objectives.latency) << ','
        << format_double(r.objectives.energy) << ',' << r.index_latency << ',' << r.index_energy << '\n';
  }
}

nlohmann::json archive_to_json(const SearchResult& result, const SearchSpace& space) {
  auto entries = nlohmann::json::array();
  std::vector<const ArchiveEntry*> sorted;
  for (const auto& e : result.archive.entries()) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const ArchiveEntry* a, const ArchiveEntry* b) { return a->query < b->query; });
  for (const ArchiveEntry* e : sorted) {
    const std::size_t n = e->deployment.all_edge();
    const QueryRecord& record = result.log.at(e->query);
    entries.push_back({{"query", e->query},
                       {"genome", to_json(e->genome, space)},
                       {"arch", to_json(decode(e->genome, space))},
                       {"error", e->objectives.error},
                       {"latency_s", e->objectives.latency},
                       {"energy_J", e->objectives.energy},
                       {"index_L", record.index_latency},
                       {"index_E", record.index_energy},
                       {"label_L", split_label(record.index_latency, n)},
                       {"label_E", split_label(record.index_energy, n)}});
  }
  return nlohmann::json{{"format", 1}, {"entries", std::move(entries)}};
}

}  // namespace lens
