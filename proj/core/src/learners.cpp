#include "slingshot/learners.hpp"

#include <cmath>
#include <sstream>

#include "slingshot/checkpoint.hpp"
#include "slingshot/errors.hpp"
#include "slingshot/hashing.hpp"

namespace slingshot {

double q_value(std::span<const double> w, const SparseVector& phi) { return phi.dot(w); }

ActionValue best_action(std::span<const double> w, std::span<const SparseVector> phis) {
  if (phis.empty()) throw InvalidArgument("best_action needs at least one candidate");
  ActionValue best{0, q_value(w, phis[0])};
  for (std::size_t a = 1; a < phis.size(); ++a) {
    const double q = q_value(w, phis[a]);
    if (q > best.value) best = {static_cast<ActionId>(a), q};
  }
  return best;
}

ActionValue best_action(std::span<const double> w, const GameState& s, const FeatureExtractor& fx) {
  if (w.size() != fx.dimension()) throw InvalidArgument("weight vector does not match extractor dimension");
  const SparseVector block = fx.state_block(s);
  const std::size_t stride = fx.block_dimension();
  ActionValue best{0, 0.0};
  for (ActionId a = 0; a < fx.n_actions(); ++a) {
    const std::size_t base = stride * static_cast<std::size_t>(a);
    double q = 0.0;
    for (const auto& e : block.entries()) q += w[base + e.index] * e.value;
    if (a == 0 || q > best.value) best = {a, q};
  }
  return best;
}

double successor_value(std::span<const double> w, const TransitionRecord& t) {
  if (t.terminal || t.successor_phis.empty()) return 0.0;
  return best_action(w, t.successor_phis).value;
}

ActionId epsilon_greedy(std::span<const double> w, const GameState& s, const FeatureExtractor& fx,
                        double epsilon, Rng& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, fx.n_actions() - 1);
      return pick(rng);
    }
  }
  return best_action(w, s, fx).action;
}

void QLearnerConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
}

void apply_q_update(WeightVector& w, const TransitionRecord& t, const QLearnerConfig& cfg) {
  if (t.phi.dim() != w.size()) throw InvalidArgument("transition features do not match weight dimension");
  const double target = t.reward + cfg.gamma * successor_value(w, t);
  const double td_error = target - q_value(w, t.phi);
  const double step = cfg.eta * td_error;
  for (const auto& e : t.phi.entries()) {
    w[e.index] += step * e.value;
    if (!std::isfinite(w[e.index])) {
      throw DivergenceError("q-learning weights diverged (non-finite weight at index " +
                            std::to_string(e.index) + ")");
    }
  }
}

WeightVector q_update(std::span<const double> w, const TransitionRecord& t, const QLearnerConfig& cfg) {
  WeightVector out(w.begin(), w.end());
  apply_q_update(out, t, cfg);
  return out;
}

std::uint64_t rng_fingerprint(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  Fnv1a h;
  h.str(os.str());
  return h.value();
}

QLearner::QLearner(FeatureExtractor fx, QLearnerConfig cfg, std::uint64_t seed)
    : fx_(std::move(fx)), cfg_(cfg), w_(fx_.dimension(), 0.0), rng_(seed) {
  cfg_.validate();
}

ActionId QLearner::select(const GameState& s, Mode mode) {
  if (mode == Mode::Eval) return best_action(w_, s, fx_).action;
  return epsilon_greedy(w_, s, fx_, cfg_.epsilon, rng_);
}

void QLearner::observe(TransitionRecord t) {
  apply_q_update(w_, t, cfg_);
  ++updates_;
}

std::uint64_t QLearner::state_hash() const {
  Fnv1a h;
  h.str(algorithm());
  h.doubles(w_);
  h.u64(updates_);
  h.u64(rng_fingerprint(rng_));
  return h.value();
}

Checkpoint QLearner::checkpoint() const {
  Checkpoint cp;
  cp.algorithm = std::string(algorithm());
  cp.extractor = std::string(to_string(fx_.config().kind));
  cp.config_hash = extractor_config_hash(fx_);
  cp.weights = w_;
  cp.memory_length = updates_;
  return cp;
}

void QLearner::restore(const Checkpoint& cp) {
  check_compatible(cp, algorithm(), fx_);
  w_ = cp.weights;
  updates_ = cp.memory_length;
}

}  // namespace slingshot
