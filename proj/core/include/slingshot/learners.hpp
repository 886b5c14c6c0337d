#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slingshot/engine.hpp"
#include "slingshot/features.hpp"
#include "slingshot/sparse_vector.hpp"

namespace slingshot {

using WeightVector = std::vector<double>;
using Rng = std::mt19937_64;

/// One remembered step: phi(s, a), the reward, and phi(s', a') for every a'
/// (empty when the step ended the attempt).
struct TransitionRecord {
  SparseVector phi;
  double reward = 0.0;
  std::vector<SparseVector> successor_phis;
  bool terminal = false;
};

struct ActionValue {
  ActionId action = 0;
  double value = 0.0;
};

double q_value(std::span<const double> w, const SparseVector& phi);

/// Greedy action over explicit candidates; exact ties go to the lowest id.
ActionValue best_action(std::span<const double> w, std::span<const SparseVector> phis);
ActionValue best_action(std::span<const double> w, const GameState& s, const FeatureExtractor& fx);

/// max_a' w . phi(s', a'), or 0 for a terminal record.
double successor_value(std::span<const double> w, const TransitionRecord& t);

ActionId epsilon_greedy(std::span<const double> w, const GameState& s, const FeatureExtractor& fx,
                        double epsilon, Rng& rng);

struct QLearnerConfig {
  double epsilon = 0.3;
  double eta = 0.01;
  double gamma = 0.95;
  void validate() const;
};

/// w + eta * (r + gamma * max_a' w.phi' - w.phi) * phi. Throws
/// DivergenceError when the result is not finite.
WeightVector q_update(std::span<const double> w, const TransitionRecord& t, const QLearnerConfig& cfg);
void apply_q_update(WeightVector& w, const TransitionRecord& t, const QLearnerConfig& cfg);

enum class Mode { Explore, Eval };

struct Checkpoint;

/// Common interface of the agents driven by the experiment harness.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string_view algorithm() const = 0;
  virtual const FeatureExtractor& extractor() const = 0;

  virtual ActionId select(const GameState& s, Mode mode) = 0;
  /// Learns from one transition. Only called during Explore attempts.
  virtual void observe(TransitionRecord t) = 0;

  /// Fingerprint of everything that influences future behaviour.
  virtual std::uint64_t state_hash() const = 0;

  virtual Checkpoint checkpoint() const = 0;
  virtual void restore(const Checkpoint& cp) = 0;
};

class QLearner final : public Learner {
 public:
  QLearner(FeatureExtractor fx, QLearnerConfig cfg, std::uint64_t seed);

  std::string_view algorithm() const override { return "qlearning"; }
  const FeatureExtractor& extractor() const override { return fx_; }
  ActionId select(const GameState& s, Mode mode) override;
  void observe(TransitionRecord t) override;
  std::uint64_t state_hash() const override;
  Checkpoint checkpoint() const override;
  void restore(const Checkpoint& cp) override;

  const WeightVector& weights() const { return w_; }
  const QLearnerConfig& config() const { return cfg_; }

 private:
  FeatureExtractor fx_;
  QLearnerConfig cfg_;
  WeightVector w_;
  Rng rng_;
  std::size_t updates_ = 0;
};

std::uint64_t rng_fingerprint(const Rng& rng);

}  // namespace slingshot
