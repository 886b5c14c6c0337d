#include "slingshot/rlsvi.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "slingshot/checkpoint.hpp"
#include "slingshot/errors.hpp"
#include "slingshot/hashing.hpp"

namespace slingshot {

struct SparseBayesRegression::Component {
  std::vector<std::uint32_t> members;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd variance;
};

void RlsviHyper::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("rlsvi gamma must lie in [0, 1)");
  if (!(sigma > 0.0)) throw InvalidArgument("rlsvi sigma must be positive");
  if (!(prior_variance > 0.0)) throw InvalidArgument("rlsvi prior_variance must be positive");
  if (refit_period < 1) throw InvalidArgument("rlsvi refit_period must be at least 1");
}

Posterior prior_posterior(std::size_t dim, const RlsviHyper& h) {
  return {WeightVector(dim, 0.0), WeightVector(dim, h.prior_variance)};
}

SparseBayesRegression::SparseBayesRegression(std::size_t dim, double sigma, double prior_variance)
    : dim_(dim), sigma_(sigma), prior_variance_(prior_variance), parent_(dim), touched_(dim, false),
      dirty_(dim, false) {
  if (!(sigma > 0.0) || !(prior_variance > 0.0)) {
    throw InvalidArgument("sigma and prior_variance must be positive");
  }
  for (std::size_t i = 0; i < dim; ++i) parent_[i] = static_cast<std::uint32_t>(i);
}

SparseBayesRegression::~SparseBayesRegression() = default;
SparseBayesRegression::SparseBayesRegression(SparseBayesRegression&&) noexcept = default;
SparseBayesRegression& SparseBayesRegression::operator=(SparseBayesRegression&&) noexcept = default;

std::uint32_t SparseBayesRegression::find(std::uint32_t i) {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void SparseBayesRegression::add_row(const SparseVector& phi) {
  if (phi.dim() != dim_) throw InvalidArgument("design row does not match regression dimension");
  rows_.push_back(phi);
  const auto entries = phi.entries();
  if (entries.empty()) return;
  std::uint32_t root = find(entries.front().index);
  for (const auto& e : entries) {
    touched_[e.index] = true;
    const std::uint32_t r = find(e.index);
    if (r != root) {
      // Keep the smaller index as root so the layout is order independent.
      const std::uint32_t keep = std::min(r, root);
      const std::uint32_t drop = std::max(r, root);
      parent_[drop] = keep;
      root = keep;
    }
  }
  dirty_[root] = true;
}

Posterior SparseBayesRegression::solve(std::span<const double> targets) {
  if (targets.size() != rows_.size()) throw InvalidArgument("need exactly one target per design row");
  for (double y : targets) {
    if (!std::isfinite(y)) throw NumericalError("regression target is not finite");
  }

  const double noise_precision = 1.0 / (sigma_ * sigma_);
  Posterior out{WeightVector(dim_, 0.0), WeightVector(dim_, prior_variance_)};

  // Group touched features and rows by component root.
  std::vector<std::int32_t> group_of(dim_, -1);
  std::vector<std::int32_t> local(dim_, -1);
  std::vector<std::uint32_t> roots;
  std::vector<std::vector<std::uint32_t>> members;
  for (std::size_t j = 0; j < dim_; ++j) {
    if (!touched_[j]) continue;
    const std::uint32_t r = find(static_cast<std::uint32_t>(j));
    if (group_of[r] < 0) {
      group_of[r] = static_cast<std::int32_t>(roots.size());
      roots.push_back(r);
      members.emplace_back();
    }
    auto& m = members[static_cast<std::size_t>(group_of[r])];
    local[j] = static_cast<std::int32_t>(m.size());
    m.push_back(static_cast<std::uint32_t>(j));
  }
  std::vector<std::vector<std::size_t>> group_rows(roots.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].empty()) continue;
    const std::uint32_t r = find(rows_[i].entries().front().index);
    group_rows[static_cast<std::size_t>(group_of[r])].push_back(i);
  }

  for (std::size_t g = 0; g < roots.size(); ++g) {
    const std::uint32_t root = roots[g];
    const auto& mem = members[g];
    const auto m = static_cast<Eigen::Index>(mem.size());

    auto& slot = cache_[root];
    if (!slot || dirty_[root] || slot->members != mem) {
      Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(m, m) / prior_variance_;
      for (std::size_t i : group_rows[g]) {
        const auto entries = rows_[i].entries();
        for (const auto& a : entries) {
          const auto la = local[a.index];
          for (const auto& b : entries) {
            precision(la, local[b.index]) += noise_precision * a.value * b.value;
          }
        }
      }
      auto comp = std::make_unique<Component>();
      comp->members = mem;
      comp->llt.compute(precision);
      if (comp->llt.info() != Eigen::Success) {
        throw NumericalError("posterior precision is not positive definite");
      }
      comp->variance = comp->llt.solve(Eigen::MatrixXd::Identity(m, m)).diagonal();
      slot = std::move(comp);
      ++factorizations_;
    }

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (std::size_t i : group_rows[g]) {
      for (const auto& e : rows_[i].entries()) rhs(local[e.index]) += noise_precision * e.value * targets[i];
    }
    const Eigen::VectorXd mean = slot->llt.solve(rhs);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto j = mem[static_cast<std::size_t>(k)];
      out.mean[j] = mean(k);
      out.variance[j] = slot->variance(k);
      if (!std::isfinite(out.mean[j]) || !std::isfinite(out.variance[j])) {
        throw NumericalError("posterior is not finite");
      }
    }
  }

  for (std::uint32_t r : roots) dirty_[r] = false;
  std::erase_if(cache_, [&](const auto& kv) { return find(kv.first) != kv.first; });
  return out;
}

std::vector<double> rlsvi_targets(std::span<const TransitionRecord> memory, double gamma,
                                  std::span<const double> w_boot) {
  std::vector<double> y;
  y.reserve(memory.size());
  for (const TransitionRecord& t : memory) y.push_back(t.reward + gamma * successor_value(w_boot, t));
  return y;
}

Posterior rlsvi_fit(std::span<const TransitionRecord> memory, const RlsviHyper& h,
                    std::span<const double> w_boot) {
  h.validate();
  SparseBayesRegression reg(w_boot.size(), h.sigma, h.prior_variance);
  for (const TransitionRecord& t : memory) reg.add_row(t.phi);
  return reg.solve(rlsvi_targets(memory, h.gamma, w_boot));
}

WeightVector sample_policy(const Posterior& p, Rng& rng) {
  if (p.mean.size() != p.variance.size()) throw InvalidArgument("posterior mean/variance size mismatch");
  std::normal_distribution<double> z(0.0, 1.0);
  WeightVector w(p.mean.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double draw = z(rng);
    w[j] = p.variance[j] > 0.0 ? p.mean[j] + std::sqrt(p.variance[j]) * draw : p.mean[j];
  }
  return w;
}

RlsviAgent::RlsviAgent(FeatureExtractor fx, RlsviHyper hyper, std::uint64_t seed)
    : fx_(std::move(fx)), hyper_(hyper), rng_(seed),
      regression_(fx_.dimension(), hyper.sigma, hyper.prior_variance) {
  hyper_.validate();
  posterior_ = prior_posterior(fx_.dimension(), hyper_);
  sampled_ = sample_policy(posterior_, rng_);
}

ActionId RlsviAgent::select(const GameState& s, Mode mode) {
  const WeightVector& w = mode == Mode::Explore ? sampled_ : posterior_.mean;
  return best_action(w, s, fx_).action;
}

void RlsviAgent::observe(TransitionRecord t) {
  if (t.phi.dim() != fx_.dimension()) throw InvalidArgument("transition does not match extractor dimension");
  Fnv1a h;
  h.u64(memory_digest_);
  h.f64(t.reward);
  h.u64(t.terminal ? 1 : 0);
  for (const auto& e : t.phi.entries()) {
    h.u64(e.index);
    h.f64(e.value);
  }
  for (const SparseVector& s : t.successor_phis) {
    h.u64(s.nnz());
    for (const auto& e : s.entries()) {
      h.u64(e.index);
      h.f64(e.value);
    }
  }
  memory_digest_ = h.value();

  regression_.add_row(t.phi);
  memory_.push_back(std::move(t));
  if (++since_refit_ >= hyper_.refit_period) refit();
}

void RlsviAgent::refit() {
  try {
    posterior_ = regression_.solve(rlsvi_targets(memory_, hyper_.gamma, sampled_));
  } catch (const NumericalError&) {
    ++failed_fits_;  // keep the previous posterior
  }
  sampled_ = sample_policy(posterior_, rng_);
  ++fits_;
  since_refit_ = 0;
}

std::uint64_t RlsviAgent::state_hash() const {
  Fnv1a h;
  h.str(algorithm());
  h.doubles(sampled_);
  h.doubles(posterior_.mean);
  h.doubles(posterior_.variance);
  h.u64(memory_.size());
  h.u64(memory_digest_);
  h.u64(static_cast<std::uint64_t>(since_refit_));
  h.u64(rng_fingerprint(rng_));
  return h.value();
}

Checkpoint RlsviAgent::checkpoint() const {
  Checkpoint cp;
  cp.algorithm = std::string(algorithm());
  cp.extractor = std::string(to_string(fx_.config().kind));
  cp.config_hash = extractor_config_hash(fx_);
  cp.weights = sampled_;
  cp.posterior_mean = posterior_.mean;
  cp.posterior_variance = posterior_.variance;
  cp.memory_length = memory_.size();
  return cp;
}

void RlsviAgent::restore(const Checkpoint& cp) {
  check_compatible(cp, algorithm(), fx_);
  if (cp.posterior_mean.size() != fx_.dimension() || cp.posterior_variance.size() != fx_.dimension()) {
    throw InvalidArgument("checkpoint posterior does not match extractor dimension");
  }
  posterior_ = {cp.posterior_mean, cp.posterior_variance};
  sampled_ = cp.weights;
  // Memory is not checkpointed; later refits only see transitions observed
  // after the restore.
  memory_.clear();
  regression_ = SparseBayesRegression(fx_.dimension(), hyper_.sigma, hyper_.prior_variance);
  memory_digest_ = 0;
  since_refit_ = 0;
}

}  // namespace slingshot
