#include "lens/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lens/log.hpp"

namespace lens {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kVarianceTolerance = 1e-10;

double se_kernel(std::span<const double> a, std::span<const double> b, const GpHyperparams& p) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double z = (a[d] - b[d]) / p.length_scale(d);
    r2 += z * z;
  }
  return p.signal_variance * std::exp(-0.5 * r2);
}

MatrixXd cross_kernel(const FeatureMatrix& rows, const FeatureMatrix& cols, const GpHyperparams& p) {
  MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = se_kernel(rows[i], cols[j], p);
    }
  }
  return k;
}

// Posterior over a pool in standardized units: per-surrogate means and the
// shared covariance.
struct PoolMoments {
  MatrixXd covariance;
  MatrixXd cross;  // K(train, pool)
};

PoolMoments pool_moments(const GpSurrogate& gp, const FeatureMatrix& pool,
                         const Eigen::Map<const MatrixXd>& chol) {
  PoolMoments m;
  m.cross = cross_kernel(gp.inputs(), pool, gp.params());
  const MatrixXd v = chol.triangularView<Eigen::Lower>().solve(m.cross);
  m.covariance = cross_kernel(pool, pool, gp.params());
  m.covariance.noalias() -= v.transpose() * v;
  return m;
}

// Returns a matrix F with F F^T = covariance (negative pivots clamped), or an
// empty matrix if LDLT fails.
MatrixXd covariance_factor(const MatrixXd& covariance) {
  Eigen::LDLT<MatrixXd> ldlt(covariance);
  if (ldlt.info() != Eigen::Success) return {};
  VectorXd d = ldlt.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::sqrt(std::max(d(i), 0.0));
  MatrixXd l = ldlt.matrixL();
  MatrixXd factor = l * d.asDiagonal();
  return ldlt.transpositionsP().transpose() * factor;
}

}  // namespace

GpSurrogate GpSurrogate::fit(FeatureMatrix inputs, std::span<const double> targets, GpHyperparams params) {
  if (inputs.empty()) throw ValidationError("gp_fit: at least one training point is required");
  if (inputs.size() != targets.size()) throw ValidationError("gp_fit: inputs and targets differ in length");
  const std::size_t dim = inputs.front().size();
  for (const auto& row : inputs) {
    if (row.size() != dim) throw ValidationError("gp_fit: ragged input matrix");
  }
  if (!(params.signal_variance > 0.0) || !(params.noise_variance >= 0.0) || !(params.default_length_scale > 0.0)) {
    throw ValidationError("gp_fit: invalid hyperparameters");
  }
  for (double l : params.length_scales) {
    if (!(l > 0.0)) throw ValidationError("gp_fit: length scales must be positive");
  }
  for (double y : targets) {
    if (!std::isfinite(y)) throw ValidationError("gp_fit: non-finite target");
  }

  GpSurrogate gp;
  gp.inputs_ = std::move(inputs);
  gp.params_ = std::move(params);

  const auto n = static_cast<Eigen::Index>(targets.size());
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double y : targets) var += (y - mean) * (y - mean);
  var /= static_cast<double>(n);
  gp.target_mean_ = mean;
  gp.target_scale_ = std::sqrt(var) > 1e-12 ? std::sqrt(var) : 1.0;

  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = (targets[static_cast<std::size_t>(i)] - mean) / gp.target_scale_;

  const MatrixXd k = cross_kernel(gp.inputs_, gp.inputs_, gp.params_);
  double jitter = 0.0;
  for (;;) {
    MatrixXd a = k;
    a.diagonal().array() += gp.params_.noise_variance + jitter;
    Eigen::LLT<MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      const MatrixXd l = llt.matrixL();
      gp.cholesky_.assign(l.data(), l.data() + l.size());
      const VectorXd alpha = llt.solve(y);
      gp.alpha_.assign(alpha.data(), alpha.data() + alpha.size());
      gp.jitter_ = jitter;
      return gp;
    }
    jitter = jitter == 0.0 ? kInitialJitter : jitter * 10.0;
    if (jitter > kMaxJitter * (1.0 + 1e-9)) {
      throw IllConditionedError("gp_fit: kernel matrix not positive definite after jitter " +
                                std::to_string(kMaxJitter));
    }
  }
}

double GpSurrogate::kernel(std::span<const double> a, std::span<const double> b) const {
  return se_kernel(a, b, params_);
}

GpPosterior GpSurrogate::posterior(std::span<const double> x) const {
  if (x.size() != dimension()) throw ValidationError("gp_posterior: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(size());
  VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) k_star(i) = kernel(inputs_[static_cast<std::size_t>(i)], x);
  const Eigen::Map<const VectorXd> alpha(alpha_.data(), n);
  const Eigen::Map<const MatrixXd> chol(cholesky_.data(), n, n);

  const double mean_std = k_star.dot(alpha);
  const VectorXd v = chol.triangularView<Eigen::Lower>().solve(k_star);
  double var_std = params_.signal_variance - v.squaredNorm();
  if (var_std < 0.0) {
    if (var_std < -kVarianceTolerance) {
      log_warning("gp_posterior: negative variance " + std::to_string(var_std) + " clamped to 0");
    }
    var_std = 0.0;
  }
  return GpPosterior{target_mean_ + target_scale_ * mean_std, target_scale_ * target_scale_ * var_std};
}

std::vector<double> GpSurrogate::sample_on_pool(const FeatureMatrix& pool, std::mt19937_64& rng) const {
  return sample_posterior_on_pool(std::span<const GpSurrogate>(this, 1), pool, rng).front();
}

std::vector<std::vector<double>> sample_posterior_on_pool(std::span<const GpSurrogate> surrogates,
                                                          const FeatureMatrix& pool, std::mt19937_64& rng) {
  if (pool.empty()) throw ValidationError("sample_posterior_on_pool: empty pool");
  std::vector<std::vector<double>> out(surrogates.size());

  // Factorization shared across consecutive surrogates with identical inputs,
  // hyperparameters and jitter.
  const GpSurrogate* factored_for = nullptr;
  PoolMoments moments;
  MatrixXd factor;

  const auto m = static_cast<Eigen::Index>(pool.size());
  for (std::size_t s = 0; s < surrogates.size(); ++s) {
    const GpSurrogate& gp = surrogates[s];
    for (const auto& row : pool) {
      if (row.size() != gp.dimension()) throw ValidationError("sample_posterior_on_pool: dimension mismatch");
    }
    const auto n = static_cast<Eigen::Index>(gp.size());
    const Eigen::Map<const MatrixXd> chol(gp.cholesky_.data(), n, n);
    const bool reuse = factored_for != nullptr && factored_for->inputs_ == gp.inputs_ &&
                       factored_for->params_ == gp.params_ && factored_for->jitter_ == gp.jitter_;
    if (!reuse) {
      moments = pool_moments(gp, pool, chol);
      factor = covariance_factor(moments.covariance);
      if (factor.size() == 0) {
        log_warning("sample_posterior_on_pool: pool covariance factorization failed; sampling points independently");
      }
      factored_for = &gp;
    }

    const Eigen::Map<const VectorXd> alpha(gp.alpha_.data(), n);
    const VectorXd mean_std = moments.cross.transpose() * alpha;
    // Fresh distribution per surrogate so no cached variate carries over.
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
    VectorXd draw_std;
    if (factor.size() != 0) {
      draw_std = mean_std + factor * z;
    } else {
      draw_std = mean_std;
      for (Eigen::Index i = 0; i < m; ++i) {
        draw_std(i) += std::sqrt(std::max(moments.covariance(i, i), 0.0)) * z(i);
      }
    }
    out[s].resize(pool.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      out[s][static_cast<std::size_t>(i)] = gp.target_mean_ + gp.target_scale_ * draw_std(i);
    }
  }
  return out;
}

}  // namespace lens
