#include "lens/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lens {

namespace {

struct Range {
  double lo;
  double hi;
};

Range range_of(const std::vector<int>& options, bool log_scale) {
  const auto [lo, hi] = std::minmax_element(options.begin(), options.end());
  if (log_scale) return {std::log(static_cast<double>(*lo)), std::log(static_cast<double>(*hi))};
  return {static_cast<double>(*lo), static_cast<double>(*hi)};
}

double scale(double value, Range r) { return r.hi > r.lo ? (value - r.lo) / (r.hi - r.lo) : 0.0; }

}  // namespace

std::size_t feature_dimension(const SearchSpace& space) { return space.block_count * 4 + space.fc_slots * 2; }

std::vector<double> encode_features(const ArchitectureGenome& genome, const SearchSpace& space) {
  if (auto violations = validate(genome, space); !violations.empty()) {
    throw GenomeValidationError(std::move(violations));
  }
  const Range depth = range_of(space.layer_counts, false);
  const Range kernel = range_of(space.kernel_sizes, true);
  const Range filters = range_of(space.filter_counts, true);
  const Range neurons = range_of(space.neuron_counts, true);

  std::vector<double> x;
  x.reserve(feature_dimension(space));
  for (const auto& b : genome.blocks) {
    x.push_back(scale(space.layer_counts[b.depth], depth));
    x.push_back(scale(std::log(static_cast<double>(space.kernel_sizes[b.kernel])), kernel));
    x.push_back(scale(std::log(static_cast<double>(space.filter_counts[b.filters])), filters));
    x.push_back(b.pool ? 1.0 : 0.0);
  }
  for (const auto& f : genome.fc) x.push_back(f.present ? 1.0 : 0.0);
  for (const auto& f : genome.fc) {
    x.push_back(f.present ? scale(std::log(static_cast<double>(space.neuron_counts[f.neurons])), neurons) : 0.0);
  }
  return x;
}

std::vector<double> random_simplex_weights(std::size_t count, std::mt19937_64& rng) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> w(count);
  double total = 0.0;
  for (auto& v : w) {
    v = exp1(rng);
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

std::vector<double> build_acquisition(std::span<const std::vector<double>> samples, std::span<const double> weights,
                                      double augmentation) {
  if (samples.empty() || samples.size() != weights.size()) {
    throw ValidationError("build_acquisition: need one weight per sampled objective");
  }
  const std::size_t m = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != m) throw ValidationError("build_acquisition: sample vectors differ in length");
  }

  std::vector<double> chebyshev(m, -std::numeric_limits<double>::infinity());
  std::vector<double> weighted_sum(m, 0.0);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto [lo, hi] = std::minmax_element(samples[k].begin(), samples[k].end());
    const double span = *hi - *lo;
    for (std::size_t i = 0; i < m; ++i) {
      const double normalized = span > 0.0 ? (samples[k][i] - *lo) / span : 0.0;
      const double term = weights[k] * normalized;
      chebyshev[i] = std::max(chebyshev[i], term);
      weighted_sum[i] += term;
    }
  }
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = -(chebyshev[i] + augmentation * weighted_sum[i]);
  return out;
}

std::size_t argmax_acquisition(std::span<const double> values) {
  if (values.empty()) throw ValidationError("argmax_acquisition: empty pool");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace lens
