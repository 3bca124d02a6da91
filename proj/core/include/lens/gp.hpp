#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "lens/errors.hpp"

namespace lens {

using FeatureMatrix = std::vector<std::vector<double>>;

// Squared-exponential kernel hyperparameters in standardized target units.
// An empty `length_scales` means `default_length_scale` in every dimension.
struct GpHyperparams {
  double signal_variance = 1.0;
  std::vector<double> length_scales;
  double default_length_scale = 0.2;
  double noise_variance = 1e-4;

  double length_scale(std::size_t dim) const {
    return dim < length_scales.size() ? length_scales[dim] : default_length_scale;
  }
  bool operator==(const GpHyperparams&) const = default;
};

struct GpPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact GP regression with fixed hyperparameters. Targets are standardized on
// fit and de-standardized on every read-out, so means and variances are in the
// caller's units.
class GpSurrogate {
 public:
  static constexpr double kInitialJitter = 1e-8;
  static constexpr double kMaxJitter = 1e-4;

  // Factors K + noise*I, escalating diagonal jitter x10 from kInitialJitter to
  // kMaxJitter on failure. Throws IllConditionedError past kMaxJitter.
  static GpSurrogate fit(FeatureMatrix inputs, std::span<const double> targets, GpHyperparams params);

  GpPosterior posterior(std::span<const double> x) const;

  // One joint draw from the posterior over `pool`. Falls back to independent
  // per-point draws (with a logged warning) if the pool covariance cannot be
  // factored.
  std::vector<double> sample_on_pool(const FeatureMatrix& pool, std::mt19937_64& rng) const;

  double kernel(std::span<const double> a, std::span<const double> b) const;

  std::size_t size() const noexcept { return inputs_.size(); }
  std::size_t dimension() const noexcept { return inputs_.empty() ? 0 : inputs_.front().size(); }
  const FeatureMatrix& inputs() const noexcept { return inputs_; }
  const GpHyperparams& params() const noexcept { return params_; }
  double jitter() const noexcept { return jitter_; }
  double target_mean() const noexcept { return target_mean_; }
  double target_scale() const noexcept { return target_scale_; }

 private:
  friend std::vector<std::vector<double>> sample_posterior_on_pool(std::span<const GpSurrogate>,
                                                                   const FeatureMatrix&, std::mt19937_64&);
  GpSurrogate() = default;

  FeatureMatrix inputs_;
  GpHyperparams params_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  double jitter_ = 0.0;
  std::vector<double> alpha_;     // (K + noise I)^-1 y_standardized
  std::vector<double> cholesky_;  // lower factor, column-major n x n
};

// Draws one joint posterior sample per surrogate. Surrogates that share inputs
// and hyperparameters share one covariance factorization; their draws use
// independent normals, taken from `rng` in surrogate order.
std::vector<std::vector<double>> sample_posterior_on_pool(std::span<const GpSurrogate> surrogates,
                                                          const FeatureMatrix& pool, std::mt19937_64& rng);

}  // namespace lens
