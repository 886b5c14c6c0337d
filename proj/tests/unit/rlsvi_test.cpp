#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "random_records.hpp"
#include "slingshot/errors.hpp"
#include "slingshot/rlsvi.hpp"

using namespace slingshot;

namespace {

std::vector<std::vector<double>> dense_rows(std::span<const TransitionRecord> memory) {
  std::vector<std::vector<double>> rows;
  for (const auto& t : memory) rows.push_back(oracle::dense(t.phi));
  return rows;
}

std::vector<double> dense_targets(std::span<const TransitionRecord> memory, double gamma,
                                  const std::vector<double>& w) {
  std::vector<double> y;
  for (const auto& t : memory) {
    double best = 0.0;
    if (!t.terminal) {
      best = -INFINITY;
      for (const auto& s : t.successor_phis) best = std::max(best, oracle::dense_dot(w, oracle::dense(s)));
    }
    y.push_back(t.reward + gamma * best);
  }
  return y;
}

GameState pig_at(Vec2 c) {
  GameState s;
  s.birds_left = 3;
  s.pigs.push_back({c, 15.0, true});
  return s;
}

}  // namespace

TEST(RlsviFit, EmptyMemoryGivesPrior) {
  RlsviHyper h;
  h.prior_variance = 7.0;
  const Posterior p = rlsvi_fit({}, h, std::vector<double>(5, 1.0));
  EXPECT_EQ(p, prior_posterior(5, h));
  EXPECT_EQ(p.variance, std::vector<double>(5, 7.0));
}

TEST(RlsviFit, OneByOneExample) {
  TransitionRecord t;
  t.phi = SparseVector(1, {{0, 2.0}});
  t.reward = 8.0;
  t.terminal = true;
  RlsviHyper h;
  h.sigma = 1.0;
  h.prior_variance = 1.0;
  const std::vector<TransitionRecord> memory{t};
  const Posterior p = rlsvi_fit(memory, h, std::vector<double>{0.0});
  // P = 1 + 4 = 5, mean = 16 / 5, variance = 1 / 5.
  EXPECT_NEAR(p.mean[0], 3.2, 1e-15);
  EXPECT_NEAR(p.variance[0], 0.2, 1e-15);
}

TEST(RlsviFit, MatchesDenseOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 4 + rng() % 61;
    const std::size_t n = 1 + rng() % 200;
    const double density = std::uniform_real_distribution<double>(0.05, 0.2)(rng);
    std::vector<TransitionRecord> memory;
    for (std::size_t i = 0; i < n; ++i) memory.push_back(oracle::random_record(rng, dim, density, 3));
    const auto w_boot = oracle::random_weights(rng, dim);
    RlsviHyper h;
    h.sigma = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
    h.prior_variance = std::uniform_real_distribution<double>(0.5, 50.0)(rng);
    const Posterior got = rlsvi_fit(memory, h, w_boot);
    const auto want = oracle::bayes_ls(dense_rows(memory), dense_targets(memory, h.gamma, w_boot), dim,
                                       h.sigma, h.prior_variance);
    EXPECT_LE(oracle::relative_error(got.mean, want.mean), 1e-8) << trial;
    EXPECT_LE(oracle::relative_error(got.variance, want.variance), 1e-8) << trial;
  }
}

TEST(RlsviFit, DuplicateRowsNeverIncreaseVariance) {
  std::mt19937_64 rng(4);
  const std::size_t dim = 24;
  std::vector<TransitionRecord> memory;
  for (int i = 0; i < 10; ++i) memory.push_back(oracle::random_record(rng, dim, 0.15, 2));
  const std::vector<double> w(dim, 0.0);
  Posterior prev = rlsvi_fit(memory, RlsviHyper{}, w);
  for (int step = 0; step < 20; ++step) {
    memory.push_back(memory[rng() % memory.size()]);
    const Posterior next = rlsvi_fit(memory, RlsviHyper{}, w);
    for (std::size_t j = 0; j < dim; ++j) EXPECT_LE(next.variance[j], prev.variance[j] * (1.0 + 1e-12));
    prev = next;
  }
}

TEST(RlsviFit, LargeNoiseApproachesPriorMonotonically) {
  std::mt19937_64 rng(6);
  const std::size_t dim = 12;
  std::vector<TransitionRecord> memory;
  for (int i = 0; i < 30; ++i) memory.push_back(oracle::random_record(rng, dim, 0.2, 2));
  const auto w = oracle::random_weights(rng, dim);
  RlsviHyper h;
  h.prior_variance = 4.0;
  double prev_mean = INFINITY;
  double prev_gap = INFINITY;
  for (double sigma : {1.0, 10.0, 100.0, 1000.0, 1e4}) {
    h.sigma = sigma;
    const Posterior p = rlsvi_fit(memory, h, w);
    double mean_norm = 0.0;
    double gap = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      mean_norm += p.mean[j] * p.mean[j];
      gap = std::max(gap, h.prior_variance - p.variance[j]);
    }
    EXPECT_LT(mean_norm, prev_mean);
    EXPECT_LE(gap, prev_gap);
    prev_mean = mean_norm;
    prev_gap = gap;
  }
  EXPECT_LT(prev_mean, 1e-6);
  EXPECT_LT(prev_gap, 1e-5);
}

TEST(SparseBayesRegression, RefactorsOnlyDirtyComponents) {
  SparseBayesRegression reg(10, 1.0, 1.0);
  reg.add_row(SparseVector(10, {{0, 1.0}, {1, 1.0}}));
  reg.add_row(SparseVector(10, {{5, 1.0}}));
  reg.solve(std::vector<double>{1.0, 2.0});
  EXPECT_EQ(reg.factorizations(), 2u);
  reg.add_row(SparseVector(10, {{5, 2.0}}));
  const Posterior p = reg.solve(std::vector<double>{1.0, 2.0, 3.0});
  EXPECT_EQ(reg.factorizations(), 3u);
  // Untouched features keep the prior.
  EXPECT_EQ(p.mean[9], 0.0);
  EXPECT_EQ(p.variance[9], 1.0);
  reg.add_row(SparseVector(10, {{1, 1.0}, {5, 1.0}}));
  reg.solve(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(reg.factorizations(), 4u);
  EXPECT_THROW(reg.solve(std::vector<double>{1.0}), InvalidArgument);
}

TEST(SamplePolicy, ZeroVarianceReturnsMean) {
  Posterior p{{1.5, -2.0, 0.25}, {0.0, 0.0, 0.0}};
  Rng rng(3);
  EXPECT_EQ(sample_policy(p, rng), p.mean);
}

TEST(SamplePolicy, StandardNormalMoments) {
  Posterior p{{0.0}, {1.0}};
  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_policy(p, rng)[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = (sum2 - n * mean * mean) / (n - 1);
  EXPECT_LT(std::abs(mean), 0.02);
  EXPECT_GE(var, 0.97);
  EXPECT_LE(var, 1.03);
}

TEST(SamplePolicy, FixedSeedReproducible) {
  const Posterior p = prior_posterior(50, RlsviHyper{});
  Rng a(8), b(8);
  EXPECT_EQ(sample_policy(p, a), sample_policy(p, b));
}

TEST(RlsviAgent, StartsFromPriorSample) {
  const FeatureExtractor fx(ExtractorConfig{}, 32);
  RlsviAgent agent(fx, RlsviHyper{}, 5);
  EXPECT_EQ(agent.posterior(), prior_posterior(fx.dimension(), RlsviHyper{}));
  Rng rng(5);
  EXPECT_EQ(agent.sampled_weights(), sample_policy(agent.posterior(), rng));
}

TEST(RlsviAgent, RefitsOncePerPeriod) {
  const FeatureExtractor fx(ExtractorConfig{}, 32);
  RlsviHyper h;
  RlsviAgent every(fx, h, 1);
  h.refit_period = 3;
  RlsviAgent third(fx, h, 1);
  const GameState s = pig_at({500.0, 15.0});
  for (int i = 0; i < 7; ++i) {
    TransitionRecord t;
    t.phi = fx.extract(s, i);
    t.reward = 1000.0 * i;
    t.terminal = true;
    every.observe(t);
    third.observe(t);
    EXPECT_EQ(every.fits(), static_cast<std::size_t>(i + 1));
    EXPECT_EQ(third.fits(), static_cast<std::size_t>((i + 1) / 3));
  }
  EXPECT_EQ(every.memory().size(), 7u);
}

TEST(RlsviAgent, SameSeedSameTransitionsSameActions) {
  const FeatureExtractor fx(ExtractorConfig{}, 32);
  RlsviAgent a(fx, RlsviHyper{}, 42), b(fx, RlsviHyper{}, 42);
  const LevelPack pack = oracle::default_pack();
  GameState s = initial_state(pack);
  for (int step = 0; step < 60; ++step) {
    const ActionId act = a.select(s, Mode::Explore);
    ASSERT_EQ(b.select(s, Mode::Explore), act);
    const ShotOutcome o = simulate_shot(s, act);
    TransitionRecord t;
    t.phi = fx.extract(s, act);
    t.reward = static_cast<double>(o.reward);
    t.terminal = o.next_state.status == Status::Failed;
    s = o.next_state.status == Status::InProgress ? o.next_state : resolve_attempt(o.next_state, pack);
    if (s.pack_complete) s = initial_state(pack);
    if (!t.terminal) t.successor_phis = fx.extract_all(s);
    a.observe(t);
    b.observe(t);
    ASSERT_EQ(a.state_hash(), b.state_hash());
  }
}
