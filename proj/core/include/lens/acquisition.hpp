#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "lens/search_space.hpp"

namespace lens {

// Continuous embedding of a genome for the GP: per block (layer count, log
// kernel, log filters, pool flag), then FC presence flags, then log neuron
// counts (0 when absent). Every dimension is min-max scaled to [0, 1] over
// its option range.
std::vector<double> encode_features(const ArchitectureGenome& genome, const SearchSpace& space);
std::size_t feature_dimension(const SearchSpace& space);

inline constexpr double kDefaultAugmentation = 0.05;

// Uniform draw from the probability simplex with `count` entries.
std::vector<double> random_simplex_weights(std::size_t count, std::mt19937_64& rng);

// Negated augmented Chebyshev scalarization of per-objective samples, each
// min-max normalized over the pool (constant objectives normalize to 0):
//   acquisition = -(max_k w_k f_k + augmentation * sum_k w_k f_k)
// Higher is more promising. `samples[k][i]` is objective k at pool point i.
std::vector<double> build_acquisition(std::span<const std::vector<double>> samples, std::span<const double> weights,
                                      double augmentation = kDefaultAugmentation);

// Index of the maximal value; ties go to the lowest index.
std::size_t argmax_acquisition(std::span<const double> values);

}  // namespace lens
