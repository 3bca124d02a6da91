#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lens/accuracy.hpp"
#include "lens/cost_models.hpp"
#include "lens/gp.hpp"
#include "lens/pareto.hpp"
#include "lens/search_space.hpp"

namespace lens {

// Partitioned: latency/energy are the minima over all partition candidates.
// EdgeOnly: latency/energy are the All-Edge costs (partition-unaware search).
enum class ObjectiveMode { Partitioned, EdgeOnly };

struct SearchConfig {
  std::size_t initial_samples = 20;  // C_init
  std::size_t iterations = 100;      // N_iter
  std::size_t pool_size = 512;
  std::uint64_t seed = 0;
  std::string scalarization = "augmented-chebyshev";
  double augmentation = 0.05;
  GpHyperparams gp;
  bool log_latency = true;
  bool log_energy = true;
  ObjectiveMode objectives = ObjectiveMode::Partitioned;

  // initial_samples >= 2, pool_size >= 1. iterations may be 0.
  void validate() const;
};

struct QueryRecord {
  std::size_t iteration = 0;  // 0 for the random initialization batch
  ArchitectureGenome genome;
  ObjectiveVector objectives;
  std::size_t index_latency = 0;
  std::size_t index_energy = 0;
};

struct FailedQuery {
  std::size_t iteration = 0;
  ArchitectureGenome genome;
  std::string message;
};

struct SearchResult {
  ParetoArchive archive;
  std::vector<QueryRecord> log;
  std::vector<FailedQuery> failures;
};

// Latency/energy objectives for one architecture under `mode`.
ObjectiveVector objectives_for(double error, const DeploymentEvaluation& eval, ObjectiveMode mode);

// Random initialization, then per iteration: refit one GP per objective on all
// successful queries, draw simplex weights, jointly sample the posteriors on a
// fresh pool of unqueried genomes, and query the acquisition maximizer.
// Evaluator failures are recorded in `failures` and skipped.
SearchResult run_search(const SearchConfig& config, const SearchSpace& space, const DeviceProfile& device,
                        const WirelessProfile& wireless, ErrorEvaluator& evaluator);

// Baseline: `evaluations` distinct uniform random genomes, same log format.
SearchResult random_search(std::size_t evaluations, std::uint64_t seed, const SearchSpace& space,
                           const DeviceProfile& device, const WirelessProfile& wireless, ErrorEvaluator& evaluator,
                           ObjectiveMode mode = ObjectiveMode::Partitioned);

// CSV, header first:
//   format,iteration,genome,error,latency_s,energy_J,index_L,index_E
// `genome` is the genome JSON, quoted with doubled inner quotes.
void write_query_log_csv(std::ostream& out, const SearchResult& result, const SearchSpace& space);

// {"format":1,"entries":[{"query":..,"genome":{..},"arch":{..},"error":..,
//   "latency_s":..,"energy_J":..,"index_L":..,"index_E":..,"label_L":..,"label_E":..}]}
// Split indices are the ones the objectives were computed under.
nlohmann::json archive_to_json(const SearchResult& result, const SearchSpace& space);

}  // namespace lens
