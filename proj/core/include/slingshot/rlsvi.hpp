#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "slingshot/learners.hpp"

namespace slingshot {

struct RlsviHyper {
  double gamma = 0.95;
  double sigma = 1.0;
  double prior_variance = 100.0;
  int refit_period = 1;
  void validate() const;
};

/// Gaussian posterior over weights, keeping only the diagonal of the
/// covariance.
struct Posterior {
  WeightVector mean;
  WeightVector variance;

  friend bool operator==(const Posterior&, const Posterior&) = default;
};

Posterior prior_posterior(std::size_t dim, const RlsviHyper& h);

/// Bayesian linear regression with prior N(0, prior_variance * I) and noise
/// N(0, sigma^2), specialised for very sparse design rows.
///
/// Features that co-occur in some row are linked; the precision matrix
/// (1/prior_variance) I + (1/sigma^2) X^T X is block diagonal over the linked
/// components, so each component is factorized densely on its own and
/// features that never occur keep the prior. Factorizations are cached and
/// only recomputed for components that received rows since the last solve.
class SparseBayesRegression {
 public:
  SparseBayesRegression(std::size_t dim, double sigma, double prior_variance);
  ~SparseBayesRegression();
  SparseBayesRegression(SparseBayesRegression&&) noexcept;
  SparseBayesRegression& operator=(SparseBayesRegression&&) noexcept;

  void add_row(const SparseVector& phi);
  std::size_t rows() const { return rows_.size(); }
  std::size_t dim() const { return dim_; }

  /// Posterior for one target per row. Throws NumericalError when a
  /// component cannot be factorized or the result is not finite.
  Posterior solve(std::span<const double> targets);

  std::size_t factorizations() const { return factorizations_; }

 private:
  struct Component;

  std::uint32_t find(std::uint32_t i);

  std::size_t dim_;
  double sigma_;
  double prior_variance_;
  std::vector<std::uint32_t> parent_;
  std::vector<bool> touched_;
  std::vector<bool> dirty_;
  std::vector<SparseVector> rows_;
  std::map<std::uint32_t, std::unique_ptr<Component>> cache_;
  std::size_t factorizations_ = 0;
};

/// y_i = r_i + gamma * max_a' w_boot . successor_phis_i[a'] (0 if terminal).
std::vector<double> rlsvi_targets(std::span<const TransitionRecord> memory, double gamma,
                                  std::span<const double> w_boot);

Posterior rlsvi_fit(std::span<const TransitionRecord> memory, const RlsviHyper& h,
                    std::span<const double> w_boot);

/// w_j = mean_j + sqrt(variance_j) z_j with independent standard normals.
WeightVector sample_policy(const Posterior& p, Rng& rng);

/// Continuous (non-episodic) RLSVI: acts greedily under a sampled weight
/// vector, refits the posterior every refit_period observations with the
/// current sample as bootstrap, then resamples. Eval mode acts under the
/// posterior mean.
class RlsviAgent final : public Learner {
 public:
  RlsviAgent(FeatureExtractor fx, RlsviHyper hyper, std::uint64_t seed);

  std::string_view algorithm() const override { return "rlsvi"; }
  const FeatureExtractor& extractor() const override { return fx_; }
  ActionId select(const GameState& s, Mode mode) override;
  void observe(TransitionRecord t) override;
  std::uint64_t state_hash() const override;
  Checkpoint checkpoint() const override;
  void restore(const Checkpoint& cp) override;

  const Posterior& posterior() const { return posterior_; }
  const WeightVector& sampled_weights() const { return sampled_; }
  std::span<const TransitionRecord> memory() const { return memory_; }
  std::size_t fits() const { return fits_; }
  std::size_t failed_fits() const { return failed_fits_; }

 private:
  void refit();

  FeatureExtractor fx_;
  RlsviHyper hyper_;
  Rng rng_;
  Posterior posterior_;
  WeightVector sampled_;
  std::vector<TransitionRecord> memory_;
  SparseBayesRegression regression_;
  std::uint64_t memory_digest_ = 0;
  int since_refit_ = 0;
  std::size_t fits_ = 0;
  std::size_t failed_fits_ = 0;
};

}  // namespace slingshot
