// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lens/acquisition.hpp"
#include "lens/cli.hpp"
#include "lens/gp.hpp"
#include "lens/json_io.hpp"
#include "lens/mobo.hpp"
#include "lens/pareto.hpp"
#include "lens/runtime.hpp"
#include "oracles.hpp"

using namespace lens;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = LENS_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

DeviceProfile gpu() { return device_from_json(read_json_file(kConfigs / "devices/synthetic-gpu.json")); }
WirelessProfile lte() { return wireless_from_json(read_json_file(kConfigs / "wireless/lte.json")); }
WirelessProfile wifi() { return wireless_from_json(read_json_file(kConfigs / "wireless/wifi.json")); }

Outcome algorithm_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const SearchSpace space;
  const DeviceProfile device = gpu();
  std::mt19937_64 rng(2024);
  std::size_t checked = 0, mismatches = 0;
  for (int g = 0; g < 200; ++g) {
    const auto spec = decode(sample_random(space, rng), space);
    for (double t : {0.7, 7.5, 16.1}) {
      const auto w = lte().with_throughput(t);
      const auto e = evaluate_deployment(spec, device, w);
      const auto b = oracle::brute_force_deployment(spec, device, w);
      ++checked;
      if (e.index_latency != b.index_latency || e.latency != b.latency || e.index_energy != b.index_energy ||
          e.energy != b.energy) {
        ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0, fmt("%zu cases, %zu mismatches, %.2f s", checked, mismatches, secs)};
}

Outcome partition_viability() {
  const SearchSpace space;
  const std::vector<DeviceProfile> devices{DeviceProfile::synthetic_gpu(), DeviceProfile::synthetic_cpu()};
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> logt(-1.0, 3.0);
  std::size_t violations = 0, fat_seen = 0;
  for (int c = 0; c < 10000; ++c) {
    const auto spec = decode(sample_random(space, rng), space);
    auto w = (c % 2 ? lte() : wifi()).with_throughput(std::pow(10.0, logt(rng)));
    const auto& device = devices[c % devices.size()];
    const auto e = evaluate_deployment(spec, device, w);
    const std::size_t n = e.all_edge();
    for (std::size_t s : {e.index_latency, e.index_energy}) {
      if (s != n && e.uploaded_bytes(s) > e.input_bytes) ++violations;
      if (s != 0 && s != n && e.uploaded_bytes(s) >= e.input_bytes) ++violations;
    }
    // Every excluded split costs at least as much as All-Cloud in both metrics.
    for (std::size_t s = 1; s < n; ++s) {
      const std::int64_t bytes = e.sizes[s - 1].output_bytes;
      if (bytes < e.input_bytes) continue;
      ++fat_seen;
      if (e.is_candidate(s)) ++violations;
      const double lat = e.edge_latency(s) + comm_latency(bytes, w);
      const double en = e.edge_energy(s) + tx_energy(bytes, w);
      if (lat < e.latency_at(0) || en < e.energy_at(0)) ++violations;
    }
  }
  return {violations == 0 && fat_seen > 0,
          fmt("10000 cases, %zu fat splits checked, %zu violations", fat_seen, violations)};
}

Outcome throughput_limits() {
  const SearchSpace space;
  const DeviceProfile device = gpu();
  const WirelessProfile w = lte();
  std::size_t genomes = 0, problems = 0, multi = 0;
  std::string first_problem;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto spec = decode(sample_random(space, seed), space);
    const auto base = evaluate_deployment(spec, device, w);
    const auto options = deployment_options(base);
    const auto map = build_dominance_map(options, Metric::Latency, w);
    ++genomes;
    if (map.interval_count() > 1) ++multi;
    auto problem = [&](const std::string& what) {
      if (problems++ == 0) first_problem = fmt("seed %llu: ", (unsigned long long)seed) + what;
    };

    // Interval of the map that owns t, with the half-open [lo, hi) convention.
    auto interval_of = [&](double t) {
      return static_cast<std::size_t>(std::upper_bound(map.breakpoints.begin(), map.breakpoints.end(), t) -
                                      map.breakpoints.begin());
    };
    std::size_t last_interval = interval_of(0.1);
    for (int i = 0; i <= 4000; ++i) {
      const double t = 0.1 * std::pow(10.0, 4.0 * i / 4000.0);
      const auto e = evaluate_deployment(spec, device, w.with_throughput(t));
      const std::size_t chosen = static_cast<std::size_t>(
          std::find(e.candidates.begin(), e.candidates.end(), e.index_latency) - e.candidates.begin());
      const std::size_t iv = interval_of(t);
      if (iv < last_interval) problem("interval order went backwards");
      last_interval = iv;
      if (chosen != map.winners[iv]) {
        // Only acceptable as an exact-cost tie at a breakpoint.
        const bool near = std::any_of(map.breakpoints.begin(), map.breakpoints.end(),
                                      [&](double b) { return std::abs(t - b) <= 1e-9 * b; });
        if (!near) problem(fmt("t=%g chose %s, map owner %s", t, options[chosen].label.c_str(),
                               options[map.winners[iv]].label.c_str()));
      }
      if (i == 0 && options[chosen].label != "All-Edge") problem("low end is " + options[chosen].label);
      if (i == 4000) {
        // Richest offload: the option with the smallest edge-side constant term.
        std::size_t richest = 0;
        for (std::size_t k = 1; k < options.size(); ++k) {
          if (option_cost(options[k], Metric::Latency, w).constant <
              option_cost(options[richest], Metric::Latency, w).constant) {
            richest = k;
          }
        }
        if (chosen != richest || map.winners.back() != richest) problem("high end is " + options[chosen].label);
      }
    }
    if (options[map.winners.front()].label != "All-Edge") problem("map does not start with All-Edge");
  }
  return {problems == 0, fmt("%zu genomes (%zu with >1 interval), 4001 probes each, %zu problems", genomes, multi,
                             problems) +
                             (first_problem.empty() ? "" : "; " + first_problem)};
}

Outcome pareto_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> grid(0, 40);  // coarse grid forces ties and duplicates
  std::vector<ObjectiveVector> points;
  ParetoArchive archive;
  for (int i = 0; i < 500; ++i) {
    ObjectiveVector p{double(grid(rng)), grid(rng) / 10.0, grid(rng) / 4.0};
    points.push_back(p);
    archive.update(ArchiveEntry{{}, p, {}, static_cast<std::size_t>(i)});
  }
  auto got = archive.objectives();
  auto want = oracle::nondominated(points);
  auto key = [](const ObjectiveVector& a, const ObjectiveVector& b) { return a.as_array() < b.as_array(); };
  std::sort(got.begin(), got.end(), key);
  std::sort(want.begin(), want.end(), key);
  return {got == want, fmt("500 points, archive %zu, oracle %zu", got.size(), want.size())};
}

Outcome gp_correctness() {
  const SearchSpace space;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  FeatureMatrix x;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(encode_features(sample_random(space, rng), space));
    y.push_back(u(rng));
  }
  GpHyperparams noiseless;
  noiseless.noise_variance = 0.0;
  const auto gp = GpSurrogate::fit(x, y, noiseless);
  double max_err = 0.0, max_var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = gp.posterior(x[i]);
    max_err = std::max(max_err, std::abs(p.mean - y[i]));
    max_var = std::max(max_var, p.variance);
  }

  // Monte Carlo on a pool of unseen genomes, with the search hyperparameters.
  const auto noisy = GpSurrogate::fit(x, y, GpHyperparams{});
  FeatureMatrix pool;
  for (int i = 0; i < 5; ++i) pool.push_back(encode_features(sample_random(space, rng), space));
  // Half the pool sits near training data so the posterior is not just the prior.
  for (int i = 0; i < 5; ++i) {
    auto row = x[i];
    row[0] = std::min(1.0, row[0] + 0.05);
    pool.push_back(row);
  }
  const int n = 10000;
  std::vector<double> sum(pool.size(), 0.0);
  std::mt19937_64 draw(9);
  for (int s = 0; s < n; ++s) {
    const auto v = noisy.sample_on_pool(pool, draw);
    for (std::size_t i = 0; i < pool.size(); ++i) sum[i] += v[i];
  }
  double worst_z = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto p = noisy.posterior(pool[i]);
    worst_z = std::max(worst_z, std::abs(sum[i] / n - p.mean) / std::sqrt(p.variance / n));
  }
  return {max_err <= 1e-6 && max_var <= 1e-6 && worst_z < 3.0,
          fmt("max |mean-y| %.2e, max var %.2e, worst MC deviation %.2f SE", max_err, max_var, worst_z)};
}

Outcome threshold_analytics() {
  const SearchSpace space;
  const DeviceProfile device = gpu();
  const WirelessProfile w = lte();
  std::mt19937_64 rng(13);
  std::size_t pairs = 0, crossings = 0, bad = 0;
  double worst = 0.0;
  while (pairs < 100) {
    const auto spec = decode(sample_random(space, rng), space);
    const auto options = deployment_options(evaluate_deployment(spec, device, w));
    if (options.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (a == b) b = (a + 1) % options.size();
    ++pairs;
    for (Metric m : {Metric::Latency, Metric::Energy}) {
      const auto ca = option_cost(options[a], m, w), cb = option_cost(options[b], m, w);
      const auto c = pairwise_threshold(ca, cb);
      const auto diff = [&](double t) { return ca.at(t) - cb.at(t); };
      if (c.kind != Crossing::Kind::Single) {
        const bool neg = diff(1e-4) < 0;
        for (double t = 1e-4; t < 1e6; t *= 1.3) {
          if ((diff(t) < 0) != neg) ++bad;
        }
        continue;
      }
      ++crossings;
      const double lo = c.throughput_mbps / 1e3, hi = c.throughput_mbps * 1e3;
      const double root = oracle::bisect(diff, lo, hi);
      const double rel = std::abs(root - c.throughput_mbps) / root;
      worst = std::max(worst, rel);
      if (rel > 1e-6) ++bad;
    }
  }
  return {bad == 0 && crossings > 0,
          fmt("%zu pairs x 2 metrics, %zu crossings, worst relative error %.2e", pairs, crossings, worst)};
}

struct SeedRuns {
  SearchResult mobo, random, edge_only;
};

std::vector<SeedRuns> search_runs(double& seconds) {
  const SearchSpace space;
  const DeviceProfile device = gpu();
  const WirelessProfile w = lte();
  ProxyEvaluator proxy;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SeedRuns> runs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SearchConfig config;
    config.initial_samples = 20;
    config.iterations = 100;
    config.pool_size = 512;
    config.seed = seed;
    SeedRuns r;
    r.mobo = run_search(config, space, device, w, proxy);
    r.random = random_search(120, seed, space, device, w, proxy);
    config.objectives = ObjectiveMode::EdgeOnly;
    r.edge_only = run_search(config, space, device, w, proxy);
    runs.push_back(std::move(r));
  }
  seconds = seconds_since(t0);
  return runs;
}

std::vector<ObjectiveVector> logged(const SearchResult& r) {
  std::vector<ObjectiveVector> v;
  for (const auto& q : r.log) v.push_back(q.objectives);
  return v;
}

Outcome search_quality(const std::vector<SeedRuns>& runs, double seconds) {
  std::vector<double> hv_mobo, hv_random;
  for (const auto& r : runs) {
    ObjectiveVector ref{0, 0, 0};
    for (const auto* res : {&r.mobo, &r.random}) {
      for (const auto& p : logged(*res)) {
        ref.error = std::max(ref.error, p.error);
        ref.latency = std::max(ref.latency, p.latency);
        ref.energy = std::max(ref.energy, p.energy);
      }
    }
    ref = {ref.error * 1.1, ref.latency * 1.1, ref.energy * 1.1};
    hv_mobo.push_back(hypervolume(r.mobo.archive, ref));
    hv_random.push_back(hypervolume(r.random.archive, ref));
  }
  const double a = median(hv_mobo), b = median(hv_random);
  return {a >= b && seconds < 300.0,
          fmt("median HV mobo %.6g vs random %.6g over %zu seeds; searches took %.1f s", a, b, runs.size(), seconds)};
}

Outcome partition_within(const std::vector<SeedRuns>& runs) {
  const SearchSpace space;
  const DeviceProfile device = gpu();
  const WirelessProfile w = lte();
  std::vector<double> partitioned, post_hoc;
  for (const auto& r : runs) {
    std::vector<double> energies;
    for (const auto& q : r.random.log) energies.push_back(q.objectives.energy);
    std::sort(energies.begin(), energies.end());
    // 40th percentile, nearest rank.
    const double budget = energies[static_cast<std::size_t>(std::ceil(0.4 * energies.size())) - 1];
    std::size_t a = 0, b = 0;
    for (const auto& q : r.mobo.log) a += q.objectives.energy <= budget;
    for (const auto& q : r.edge_only.log) {
      b += evaluate_deployment(decode(q.genome, space), device, w).energy <= budget;
    }
    partitioned.push_back(double(a));
    post_hoc.push_back(double(b));
  }
  const double a = median(partitioned), b = median(post_hoc);
  return {a >= b, fmt("median architectures under budget: partitioned %.1f, edge-only + post-hoc %.1f", a, b)};
}

Outcome runtime_replay() {
  const SearchSpace space;
  const DeviceProfile device = gpu();
  const WirelessProfile w = lte();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> spread(std::log(0.3), std::log(3.0));
  std::size_t traces = 0, prefix_violations = 0, no_strict = 0;
  std::uint64_t seed = 0;
  while (traces < 20) {
    const Metric metric = traces % 2 ? Metric::Energy : Metric::Latency;
    const auto spec = decode(sample_random(space, seed++), space);
    const auto options = deployment_options(evaluate_deployment(spec, device, w));
    const auto map = build_dominance_map(options, metric, w);
    if (map.breakpoints.empty()) continue;
    const double threshold = map.breakpoints[traces % map.breakpoints.size()];
    ThroughputTrace trace;
    for (int i = 0; i < 60; ++i) {
      // alternate sides so every trace crosses the threshold repeatedly
      const double f = std::exp(std::abs(spread(rng)));
      trace.samples.push_back({300.0 * i, i % 2 ? threshold * f : threshold / f});
    }
    ++traces;
    const auto dyn = replay_trace(trace, options, DynamicPolicy{map}, w, metric);
    for (std::size_t k = 0; k < options.size(); ++k) {
      const auto fixed = replay_trace(trace, options, FixedPolicy{k}, w, metric);
      bool strict = false;
      for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        if (dyn.cumulative[i] > fixed.cumulative[i]) ++prefix_violations;
        if (dyn.cumulative[i] < fixed.cumulative[i]) strict = true;
      }
      if (!strict) ++no_strict;
    }
  }
  return {prefix_violations == 0 && no_strict == 0,
          fmt("%zu traces, %zu prefix violations, %zu fixed policies never strictly beaten", traces,
              prefix_violations, no_strict)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "lens_acceptance_determinism";
  fs::remove_all(root);
  auto run_once = [&](const std::string& sub) {
    const std::vector<std::string> args{"lens",     "search",
                                        "--device", (kConfigs / "devices/synthetic-gpu.json").string(),
                                        "--wireless", (kConfigs / "wireless/lte.json").string(),
                                        "--iters",  "30",
                                        "--init",   "20",
                                        "--seed",   "4",
                                        "--out",    (root / sub).string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const int c1 = run_once("a"), c2 = run_once("b");
  const std::string l1 = slurp(root / "a/log.csv"), l2 = slurp(root / "b/log.csv");
  const bool same = c1 == 0 && c2 == 0 && !l1.empty() && l1 == l2 &&
                    slurp(root / "a/pareto.json") == slurp(root / "b/pareto.json");
  fs::remove_all(root);
  return {same, fmt("exit %d/%d, log %zu bytes, %s", c1, c2, l1.size(), l1 == l2 ? "identical" : "differs")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("split-oracle", algorithm_oracle);
  report("partition-viability", partition_viability);
  report("throughput-limits", throughput_limits);
  report("pareto-oracle", pareto_oracle);
  report("gp-correctness", gp_correctness);
  report("threshold-analytics", threshold_analytics);

  double seconds = 0.0;
  std::vector<SeedRuns> runs;
  std::string run_error;
  try {
    runs = search_runs(seconds);
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  auto needs_runs = [&](auto check) {
    return [&, check]() -> Outcome {
      if (!run_error.empty()) return {false, "search failed: " + run_error};
      return check();
    };
  };
  report("search-quality", needs_runs([&] { return search_quality(runs, seconds); }));
  report("partition-within-optimization", needs_runs([&] { return partition_within(runs); }));
  report("runtime-replay", runtime_replay);
  report("determinism", determinism);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
