// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Thresholds are fixed here and must not be tuned to the
// results.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "feature_oracle.hpp"
#include "oracles.hpp"
#include "random_records.hpp"
#include "slingshot/engine.hpp"
#include "slingshot/features.hpp"
#include "slingshot/harness.hpp"
#include "slingshot/hashing.hpp"
#include "slingshot/learners.hpp"
#include "slingshot/level_pack.hpp"
#include "slingshot/rlsvi.hpp"

using namespace slingshot;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

// Every value goes in as its bit pattern, so equal traces are bit-identical.
struct Trace {
  std::vector<std::uint64_t> words;
  void i(std::int64_t v) { words.push_back(static_cast<std::uint64_t>(v)); }
  void f(double v) { words.push_back(std::bit_cast<std::uint64_t>(v)); }
  void point(Vec2 p) {
    f(p.x);
    f(p.y);
  }
};

void trace_state(Trace& t, const GameState& s) {
  t.i(s.level);
  t.i(s.birds_left);
  t.i(s.attempt_score);
  t.i(s.level_reached);
  t.i(static_cast<int>(s.status));
  t.i(s.pack_complete);
  for (const Pig& p : s.pigs) {
    t.point(p.center);
    t.f(p.radius);
    t.i(p.alive);
  }
  for (const Block& b : s.blocks) {
    t.point(b.rect.min);
    t.f(b.rect.width);
    t.f(b.rect.height);
  }
}

Trace scripted_trace(const LevelPack& pack) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> action(0, 31);
  Trace t;
  GameState s = initial_state(pack);
  for (int shot = 0; shot < 1000; ++shot) {
    // Visit every level: every 50 shots restart from the next level's start.
    if (shot % 50 == 0) s = level_start(pack[static_cast<std::size_t>(shot / 50) % pack.size()]);
    const ShotOutcome o = simulate_shot(s, action(rng));
    for (const ShotEvent& e : o.events) {
      t.i(static_cast<int>(e.kind));
      t.i(e.index);
      t.i(e.points);
    }
    t.i(o.reward);
    for (Vec2 p : o.trajectory) t.point(p);
    trace_state(t, o.next_state);
    s = o.next_state;
    if (s.status != Status::InProgress) {
      s = resolve_attempt(s, pack);
      if (s.pack_complete) s = initial_state(pack);
      trace_state(t, s);
    }
  }
  return t;
}

Verdict determinism(const LevelPack& pack) {
  const auto t0 = Clock::now();
  const Trace a = scripted_trace(pack);
  const Trace b = scripted_trace(pack);
  Fnv1a digest;
  digest.bytes(a.words.data(), a.words.size() * sizeof(std::uint64_t));

  ExperimentConfig cfg;
  cfg.total_attempts = 40;
  cfg.seed = 3;
  bool exports_equal = true;
  for (Algorithm algo : {Algorithm::QLearning, Algorithm::Rlsvi}) {
    cfg.algorithm = algo;
    const ResultsBundle r1 = run_experiment(cfg, pack);
    const ResultsBundle r2 = run_experiment(cfg, pack);
    exports_equal = exports_equal && results_json(r1) == results_json(r2) &&
                    attempts_csv(r1.records) == attempts_csv(r2.records) &&
                    moving_average_csv(r1) == moving_average_csv(r2);
  }
  const double secs = seconds_since(t0);
  const bool same = a.words == b.words;
  const bool pass = same && exports_equal && secs < 10.0;
  return {pass, fmt("1000 shots over %zu levels, %zu-word traces %s (digest %016" PRIx64 "), exports %s, %.2f s "
                    "(limit 10 s)",
                    pack.size(), a.words.size(), same ? "identical" : "DIFFER", digest.value(),
                    exports_equal ? "identical" : "DIFFER", secs)};
}

// ---------------------------------------------------------------------------

Verdict bayes_ls_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(777);
  double worst_mean = 0.0, worst_var = 0.0;
  int failures = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t f = 1 + rng() % 64;
    const std::size_t n = 1 + rng() % 200;
    const double density = std::uniform_real_distribution<double>(0.05, 0.20)(rng);
    std::vector<TransitionRecord> memory;
    for (std::size_t i = 0; i < n; ++i) {
      memory.push_back(oracle::random_record(rng, f, density, 1 + static_cast<int>(rng() % 4)));
    }
    const auto w_boot = oracle::random_weights(rng, f);
    RlsviHyper h;
    h.gamma = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    h.sigma = std::uniform_real_distribution<double>(0.2, 5.0)(rng);
    h.prior_variance = std::uniform_real_distribution<double>(0.1, 200.0)(rng);

    const Posterior got = rlsvi_fit(memory, h, w_boot);

    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (const auto& t : memory) {
      rows.push_back(oracle::dense(t.phi));
      double best = 0.0;
      if (!t.terminal) {
        best = -INFINITY;
        for (const auto& s : t.successor_phis) best = std::max(best, oracle::dense_dot(w_boot, oracle::dense(s)));
      }
      y.push_back(t.reward + h.gamma * best);
    }
    const auto want = oracle::bayes_ls(rows, y, f, h.sigma, h.prior_variance);
    const double em = oracle::relative_error(got.mean, want.mean);
    const double ev = oracle::relative_error(got.variance, want.variance);
    worst_mean = std::max(worst_mean, em);
    worst_var = std::max(worst_var, ev);
    if (!(em <= 1e-8 && ev <= 1e-8)) ++failures;
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 30.0,
          fmt("100 instances, worst relative error mean %.2e variance %.2e (limit 1e-08), %.2f s (limit 30 s)",
              worst_mean, worst_var, secs)};
}

// ---------------------------------------------------------------------------

Verdict td_oracle() {
  std::mt19937_64 rng(31337);
  double worst = 0.0;
  int bad_updates = 0;
  for (int call = 0; call < 1000; ++call) {
    const std::size_t dim = 2 + rng() % 63;
    const double density = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
    const TransitionRecord t = oracle::random_record(rng, dim, density, 1 + static_cast<int>(rng() % 8));
    const auto w = oracle::random_weights(rng, dim);
    QLearnerConfig cfg;
    cfg.eta = std::uniform_real_distribution<double>(0.001, 0.5)(rng);
    cfg.gamma = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    std::vector<std::vector<double>> next;
    for (const auto& s : t.successor_phis) next.push_back(oracle::dense(s));
    const auto want = oracle::td_reference(w, oracle::dense(t.phi), t.reward, next, cfg.eta, cfg.gamma);
    const auto got = q_update(w, t, cfg);
    for (std::size_t j = 0; j < dim; ++j) {
      const double err = std::abs(got[j] - want[j]) / std::max(1.0, std::abs(want[j]));
      worst = std::max(worst, err);
    }
    if (worst > 1e-12) ++bad_updates;
  }

  // Posterior contraction: duplicating a remembered row never raises a
  // variance, checked both with fresh fits and with the incremental solver.
  int violations = 0;
  for (int seq = 0; seq < 100; ++seq) {
    const std::size_t dim = 4 + rng() % 61;
    const double density = std::uniform_real_distribution<double>(0.05, 0.2)(rng);
    std::vector<TransitionRecord> memory;
    const int initial = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < initial; ++i) memory.push_back(oracle::random_record(rng, dim, density, 2));
    RlsviHyper h;
    h.sigma = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
    h.prior_variance = std::uniform_real_distribution<double>(0.5, 100.0)(rng);
    const auto w = oracle::random_weights(rng, dim);
    SparseBayesRegression reg(dim, h.sigma, h.prior_variance);
    for (const auto& t : memory) reg.add_row(t.phi);
    Posterior prev = rlsvi_fit(memory, h, w);
    for (int step = 0; step < 15; ++step) {
      memory.push_back(memory[rng() % memory.size()]);
      reg.add_row(memory.back().phi);
      const Posterior fresh = rlsvi_fit(memory, h, w);
      const Posterior incremental = reg.solve(rlsvi_targets(memory, h.gamma, w));
      for (std::size_t j = 0; j < dim; ++j) {
        if (fresh.variance[j] > prev.variance[j] * (1.0 + 1e-12)) ++violations;
        if (std::abs(incremental.variance[j] - fresh.variance[j]) > 1e-12 * fresh.variance[j]) ++violations;
      }
      prev = fresh;
    }
  }
  return {bad_updates == 0 && violations == 0,
          fmt("1000 q_update calls, worst error %.2e (limit 1e-12); 100 append sequences, %d contraction violations",
              worst, violations)};
}

// ---------------------------------------------------------------------------

Verdict feature_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4242);
  constexpr int kActions = 32;
  const std::vector<ExtractorKind> kinds{ExtractorKind::PV, ExtractorKind::PP, ExtractorKind::NPP,
                                         ExtractorKind::NPPS, ExtractorKind::NPPO};
  int mismatches = 0, six_violations = 0, conservation_violations = 0, pigs_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const GameState s = oracle::random_state(rng);
    const ActionId a = static_cast<ActionId>(rng() % kActions);
    for (ExtractorKind k : kinds) {
      ExtractorConfig cfg;
      cfg.kind = k;
      const FeatureExtractor fx(cfg, kActions);
      if (oracle::dense(fx.extract(s, a)) != oracle::expected_phi(s, a, cfg, kActions)) ++mismatches;
    }

    ExtractorConfig npps;
    npps.kind = ExtractorKind::NPPS;
    const FeatureExtractor fs(npps, kActions);
    for (const Pig& p : s.pigs) {
      GameState single;
      single.pigs.push_back(p);
      const SparseVector phi = fs.state_block(single);
      ++pigs_checked;
      if (phi.nnz() != 6 || std::any_of(phi.entries().begin(), phi.entries().end(),
                                         [](const auto& e) { return e.value != 1.0; })) {
        ++six_violations;
      }
    }
    double total = 0.0;
    const SparseVector shifted = fs.state_block(s);
    for (const auto& e : shifted.entries()) total += e.value;
    if (total != 6.0 * static_cast<double>(s.pigs.size())) ++six_violations;

    const FeatureExtractor fn(ExtractorConfig{}, kActions);
    double level_sum[3] = {0.0, 0.0, 0.0};
    const SparseVector nested = fn.state_block(s);
    for (const auto& e : nested.entries()) level_sum[e.index < 18 ? 0 : e.index < 90 ? 1 : 2] += e.value;
    for (double sum : level_sum) {
      if (sum != static_cast<double>(s.pigs.size())) ++conservation_violations;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && six_violations == 0 && conservation_violations == 0 && secs < 10.0,
          fmt("100 states x 5 extractors: %d oracle mismatches; six-contribution violations %d over %d pigs; "
              "conservation violations %d; %.2f s (limit 10 s)",
              mismatches, six_violations, pigs_checked, conservation_violations, secs)};
}

// ---------------------------------------------------------------------------

ExperimentConfig base_config(Algorithm algo, ExtractorKind kind) {
  ExperimentConfig cfg;
  cfg.algorithm = algo;
  cfg.features.kind = kind;
  cfg.total_attempts = 300;
  return cfg;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int n) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), first);
  return out;
}

Verdict learning_trend(const LevelPack& pack) {
  const auto t0 = Clock::now();
  const auto seeds = seed_range(1, 5);
  const auto runs = run_seeds(base_config(Algorithm::QLearning, ExtractorKind::NPP), pack, seeds,
                              std::thread::hardware_concurrency());
  std::vector<double> early, late;
  std::string per_seed;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& ma = runs[i].moving_average;
    if (runs[i].error || ma.size() < 40) return {false, "run failed or moving average too short"};
    const std::span<const double> all(ma);
    const double e = mean(all.first(10));
    const double l = mean(all.last(30));
    early.push_back(e);
    late.push_back(l);
    per_seed += fmt(" seed %" PRIu64 ": %.0f -> %.0f;", seeds[i], e, l);
  }
  const double e = mean(early), l = mean(late);
  const double secs = seconds_since(t0);
  return {l >= 2.0 * e && e >= 0.0,
          fmt("Q(NPP) eval moving average, first 10 mean %.0f, last 30 mean %.0f, ratio %.2f (need >= 2); %.1f s.%s",
              e, l, e > 0.0 ? l / e : INFINITY, secs, per_seed.c_str())};
}

// ---------------------------------------------------------------------------

double first_clear(const ResultsBundle& b, int level) {
  const auto it = b.summary.trials_to_finish.find(level);
  return it == b.summary.trials_to_finish.end() ? b.config.total_attempts + 1.0 : it->second;
}

Verdict algorithm_ordering(const LevelPack& pack) {
  const auto t0 = Clock::now();
  const auto seeds = seed_range(1, 10);
  const unsigned threads = std::thread::hardware_concurrency();
  const auto q = run_seeds(base_config(Algorithm::QLearning, ExtractorKind::NPP), pack, seeds, threads);
  const auto r = run_seeds(base_config(Algorithm::Rlsvi, ExtractorKind::NPP), pack, seeds, threads);
  std::vector<double> q_first, r_first;
  int wins = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (q[i].error || r[i].error) return {false, "a run aborted"};
    q_first.push_back(first_clear(q[i], 0));
    r_first.push_back(first_clear(r[i], 0));
    const double qf = q[i].moving_average.back();
    const double rf = r[i].moving_average.back();
    if (rf >= qf) ++wins;
    per_seed += fmt(" %" PRIu64 ":%.0f/%.0f", seeds[i], rf, qf);
  }
  const double qm = median(q_first), rm = median(r_first);
  const double secs = seconds_since(t0);
  return {rm <= qm && wins >= 7,
          fmt("median first clear of level 0: RLSVI %.1f vs Q %.1f (need RLSVI <= Q); final moving average "
              "RLSVI >= Q in %d/10 seeds (need >= 7); %.1f s. Final MA RLSVI/Q per seed:%s",
              rm, qm, wins, secs, per_seed.c_str())};
}

// Reported without a threshold.
std::string generalization_report() {
  // Train on one target, then move it by one fine PP cell (20 units). NPP
  // sees the same 50-unit cell, PP sees a new cell.
  auto single = [](double x) {
    LevelSpec level;
    level.id = 0;
    level.birds = 3;
    level.pigs.push_back({{x, 15.0}, 15.0, true});
    return LevelPack{level};
  };
  const LevelPack before = single(500.0);
  const LevelPack after = single(520.0);
  std::string out;
  for (ExtractorKind kind : {ExtractorKind::PP, ExtractorKind::NPP}) {
    for (Algorithm algo : {Algorithm::QLearning, Algorithm::Rlsvi}) {
      std::vector<double> first_before, first_after, cleared_after;
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig cfg = base_config(algo, kind);
        cfg.total_attempts = 60;
        cfg.seed = seed;
        auto learner = make_learner(cfg);
        const ResultsBundle a = run_experiment(cfg, before, *learner);
        const ResultsBundle b = run_experiment(cfg, after, *learner);
        auto first_eval_clear = [](const ResultsBundle& rb) {
          for (const auto& rec : rb.records) {
            if (rec.kind == AttemptKind::Eval && !rec.levels_cleared.empty()) return rec.index + 1.0;
          }
          return rb.config.total_attempts + 1.0;
        };
        first_before.push_back(first_eval_clear(a));
        first_after.push_back(first_eval_clear(b));
        double cleared = 0.0;
        for (const auto& rec : b.records) cleared += rec.kind == AttemptKind::Eval && !rec.levels_cleared.empty();
        cleared_after.push_back(cleared / 30.0);
      }
      out += fmt("    %-9s %-4s first eval clear %.1f attempts before the move, %.1f after; eval clear rate after %.2f\n",
                 std::string(to_string(algo)).c_str(), std::string(to_string(kind)).c_str(), mean(first_before),
                 mean(first_after), mean(cleared_after));
    }
  }
  return out;
}

std::string obstacle_report(const LevelPack& pack) {
  std::string out;
  const auto seeds = seed_range(1, 5);
  const unsigned threads = std::thread::hardware_concurrency();
  for (Algorithm algo : {Algorithm::QLearning, Algorithm::Rlsvi}) {
    for (ExtractorKind kind : {ExtractorKind::NPP, ExtractorKind::NPPO}) {
      const auto runs = run_seeds(base_config(algo, kind), pack, seeds, threads);
      std::vector<double> last, level;
      for (const auto& r : runs) {
        last.push_back(mean(std::span<const double>(r.moving_average).last(30)));
        level.push_back(r.summary.max_level);
      }
      out += fmt("    %-9s %-4s mean of last 30 eval moving-average entries %.0f, mean max level %.1f\n",
                 std::string(to_string(algo)).c_str(), std::string(to_string(kind)).c_str(), mean(last),
                 mean(level));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Verdict protocol_purity(const LevelPack& pack) {
  int checked = 0, changed = 0;
  for (Algorithm algo : {Algorithm::QLearning, Algorithm::Rlsvi}) {
    ExperimentConfig cfg = base_config(algo, ExtractorKind::NPP);
    cfg.total_attempts = 100;
    cfg.seed = 11;
    auto learner = make_learner(cfg);
    std::uint64_t before = learner->state_hash();
    RunHooks hooks;
    hooks.on_attempt = [&](const AttemptRecord& rec, const Learner& l) {
      const std::uint64_t now = l.state_hash();
      if (rec.kind == AttemptKind::Eval) {
        ++checked;
        if (now != before) ++changed;
      }
      before = now;
    };
    const ResultsBundle b = run_experiment(cfg, pack, *learner, hooks);
    if (b.error) return {false, "run aborted: " + *b.error};
  }
  return {checked == 100 && changed == 0,
          fmt("%d eval attempts (Q and RLSVI, 100-attempt runs), %d changed the learner state hash", checked,
              changed)};
}

}  // namespace

int main() {
  const LevelPack pack = load_level_pack_file(oracle::default_pack_path());
  int failed = 0;
  auto report = [&](const char* name, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  };

  report("determinism", [&] { return determinism(pack); });
  report("bayesian-ls-oracle", [] { return bayes_ls_oracle(); });
  report("td-update-oracle", [] { return td_oracle(); });
  report("feature-oracles", [] { return feature_oracles(); });
  report("learning-trend", [&] { return learning_trend(pack); });
  report("algorithm-ordering", [&] { return algorithm_ordering(pack); });
  report("protocol-purity", [&] { return protocol_purity(pack); });

  std::printf("[INFO] generalization after moving the target by one fine cell (no threshold):\n%s",
              generalization_report().c_str());
  std::printf("[INFO] obstacle counters versus pigs only (no threshold):\n%s", obstacle_report(pack).c_str());
  std::printf("%s: %d criteria failed\n", failed ? "FAILED" : "OK", failed);
  return failed ? 1 : 0;
}
