#include <benchmark/benchmark.h>

#include <random>

#include "slingshot/engine.hpp"
#include "slingshot/features.hpp"
#include "slingshot/learners.hpp"
#include "slingshot/level_pack.hpp"
#include "slingshot/rlsvi.hpp"

using namespace slingshot;

namespace {

const LevelPack& pack() {
  static const LevelPack p = load_level_pack_file(SLINGSHOT_LEVELS_DIR "/default.pack");
  return p;
}

// Transitions from uniformly random play, as the learners would record them.
std::vector<TransitionRecord> random_play(const FeatureExtractor& fx, std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<TransitionRecord> out;
  GameState s = initial_state(pack());
  while (out.size() < n) {
    const ActionId a = static_cast<ActionId>(rng() % 32);
    const ShotOutcome o = simulate_shot(s, a);
    TransitionRecord t;
    t.phi = fx.extract(s, a);
    t.reward = static_cast<double>(o.reward);
    t.terminal = o.next_state.status == Status::Failed;
    s = o.next_state.status == Status::InProgress ? o.next_state : resolve_attempt(o.next_state, pack());
    if (s.pack_complete) s = initial_state(pack());
    if (!t.terminal) t.successor_phis = fx.extract_all(s);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

static void BM_SimulateShot(benchmark::State& state) {
  const GameState s = level_start(pack()[static_cast<std::size_t>(state.range(0))]);
  ActionId a = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_shot(s, a));
    a = (a + 7) % 32;
  }
}
BENCHMARK(BM_SimulateShot)->Arg(0)->Arg(6)->Arg(10);

static void BM_ExtractAll(benchmark::State& state) {
  ExtractorConfig cfg;
  cfg.kind = static_cast<ExtractorKind>(state.range(0));
  const FeatureExtractor fx(cfg, 32);
  const GameState s = level_start(pack()[10]);
  for (auto _ : state) benchmark::DoNotOptimize(fx.extract_all(s));
  state.SetLabel(std::string(to_string(cfg.kind)));
}
BENCHMARK(BM_ExtractAll)
    ->Arg(static_cast<int>(ExtractorKind::PV))
    ->Arg(static_cast<int>(ExtractorKind::PP))
    ->Arg(static_cast<int>(ExtractorKind::NPP))
    ->Arg(static_cast<int>(ExtractorKind::NPPS))
    ->Arg(static_cast<int>(ExtractorKind::NPPO));

static void BM_QUpdate(benchmark::State& state) {
  const FeatureExtractor fx(ExtractorConfig{}, 32);
  const auto memory = random_play(fx, 256);
  WeightVector w(fx.dimension(), 0.0);
  const QLearnerConfig cfg;
  std::size_t i = 0;
  for (auto _ : state) {
    w = q_update(w, memory[i], cfg);
    i = (i + 1) % memory.size();
  }
}
BENCHMARK(BM_QUpdate);

static void BM_RlsviFit(benchmark::State& state) {
  const FeatureExtractor fx(ExtractorConfig{}, 32);
  const auto memory = random_play(fx, static_cast<std::size_t>(state.range(0)));
  const WeightVector w(fx.dimension(), 0.0);
  const RlsviHyper h;
  for (auto _ : state) benchmark::DoNotOptimize(rlsvi_fit(memory, h, w));
}
BENCHMARK(BM_RlsviFit)->Arg(50)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
