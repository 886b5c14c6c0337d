#include "slingshot/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "slingshot/errors.hpp"
#include "slingshot/level_pack.hpp"
#include "slingshot/number_format.hpp"

namespace slingshot {

namespace {

using nlohmann::ordered_json;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::string_view line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

template <typename T>
T parse_num(std::string_view s, const std::string& what) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(what + ": cannot parse '" + std::string(s) + "'");
  }
  return value;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json summary_to_json(const Summary& s) {
  ordered_json trials = ordered_json::object();
  for (const auto& [level, n] : s.trials_to_finish) trials[std::to_string(level)] = n;
  return {{"attempts", s.attempts},
          {"max_score", s.max_score},
          {"max_level", s.max_level},
          {"trials_to_finish", trials}};
}

std::string features_label(const ExperimentConfig& cfg) {
  std::string s(to_string(cfg.features.kind));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

}  // namespace

std::string_view to_string(AttemptKind kind) { return kind == AttemptKind::Explore ? "explore" : "eval"; }

std::vector<double> forward_moving_average(std::span<const double> scores, int window) {
  if (window < 1) throw InvalidArgument("moving-average window must be at least 1");
  const auto w = static_cast<std::size_t>(window);
  std::vector<double> out;
  if (scores.size() < w) return out;
  out.reserve(scores.size() - w + 1);
  for (std::size_t i = 0; i + w <= scores.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k = i; k < i + w; ++k) sum += scores[k];
    out.push_back(sum / static_cast<double>(w));
  }
  return out;
}

std::vector<double> eval_scores(std::span<const AttemptRecord> records) {
  std::vector<double> out;
  for (const AttemptRecord& r : records) {
    if (r.kind == AttemptKind::Eval) out.push_back(static_cast<double>(r.score));
  }
  return out;
}

Summary summarize(std::span<const AttemptRecord> records) {
  Summary s;
  s.attempts = records.size();
  for (const AttemptRecord& r : records) {
    s.max_score = std::max(s.max_score, r.score);
    s.max_level = std::max(s.max_level, r.max_level_reached);
    for (const LevelClear& c : r.levels_cleared) s.trials_to_finish.try_emplace(c.level, r.index + 1);
  }
  return s;
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg) {
  FeatureExtractor fx(cfg.features, cfg.engine.actions.total());
  if (cfg.algorithm == Algorithm::QLearning) {
    return std::make_unique<QLearner>(std::move(fx), cfg.qlearning, cfg.seed);
  }
  return std::make_unique<RlsviAgent>(std::move(fx), cfg.rlsvi, cfg.seed);
}

ResultsBundle run_experiment(const ExperimentConfig& cfg, const LevelPack& pack, Learner& learner,
                             const RunHooks& hooks) {
  cfg.validate();
  ResultsBundle bundle;
  bundle.config = cfg;
  const FeatureExtractor& fx = learner.extractor();
  if (fx.n_actions() != cfg.engine.actions.total()) {
    throw InvalidArgument("learner action count does not match the action configuration");
  }

  try {
    for (int idx = 0; idx < cfg.total_attempts; ++idx) {
      AttemptRecord rec;
      rec.index = idx;
      rec.kind = idx % 2 == 0 ? AttemptKind::Explore : AttemptKind::Eval;
      const Mode mode = rec.kind == AttemptKind::Explore ? Mode::Explore : Mode::Eval;

      GameState s = initial_state(pack);
      rec.max_level_reached = s.level;
      while (true) {
        const ActionId a = learner.select(s, mode);
        const ShotOutcome out = simulate_shot(s, a, cfg.engine);
        ++rec.shots;
        rec.score += game_points(out);

        bool terminal = false;
        GameState successor = out.next_state;
        if (out.next_state.status == Status::Failed) {
          terminal = true;
        } else if (out.next_state.status == Status::Cleared) {
          rec.levels_cleared.push_back({out.next_state.level, idx + 1});
          successor = resolve_attempt(out.next_state, pack);
          terminal = successor.pack_complete;
          if (!terminal) rec.max_level_reached = std::max(rec.max_level_reached, successor.level);
        }

        if (mode == Mode::Explore) {
          TransitionRecord t;
          t.phi = fx.extract(s, a);
          t.reward = static_cast<double>(out.reward);
          t.terminal = terminal;
          if (!terminal) t.successor_phis = fx.extract_all(successor);
          learner.observe(std::move(t));
        }
        if (terminal) break;
        s = std::move(successor);
      }
      bundle.records.push_back(rec);
      if (hooks.on_attempt) hooks.on_attempt(bundle.records.back(), learner);
    }
  } catch (const Error& e) {
    bundle.error = e.what();
  }

  bundle.moving_average = forward_moving_average(eval_scores(bundle.records), cfg.ma_window);
  bundle.summary = summarize(bundle.records);
  return bundle;
}

ResultsBundle run_experiment(const ExperimentConfig& cfg, const LevelPack& pack) {
  auto learner = make_learner(cfg);
  return run_experiment(cfg, pack, *learner);
}

ResultsBundle run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, load_level_pack_file(cfg.levels, cfg.engine.physics.world));
}

std::vector<ResultsBundle> run_seeds(const ExperimentConfig& cfg, const LevelPack& pack,
                                     std::span<const std::uint64_t> seeds, unsigned threads) {
  std::vector<ResultsBundle> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        ExperimentConfig c = cfg;
        c.seed = seeds[i];
        results[i] = run_experiment(c, pack);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// ---------------------------------------------------------------------------

std::string attempts_csv(std::span<const AttemptRecord> records) {
  std::string out = "index,kind,score,max_level,shots,levels_cleared\n";
  for (const AttemptRecord& r : records) {
    out += std::to_string(r.index) + "," + std::string(to_string(r.kind)) + "," + std::to_string(r.score) +
           "," + std::to_string(r.max_level_reached) + "," + std::to_string(r.shots) + ",";
    for (std::size_t i = 0; i < r.levels_cleared.size(); ++i) {
      if (i > 0) out += ";";
      out += std::to_string(r.levels_cleared[i].level);
    }
    out += "\n";
  }
  return out;
}

std::vector<AttemptRecord> parse_attempts_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != "index,kind,score,max_level,shots,levels_cleared") {
    throw ParseError("attempts csv: missing or unexpected header");
  }
  std::vector<AttemptRecord> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string where = "attempts csv line " + std::to_string(li + 1);
    const auto f = split(lines[li], ',');
    if (f.size() != 6) throw ParseError(where + ": expected 6 fields");
    AttemptRecord r;
    r.index = parse_num<int>(f[0], where);
    if (f[1] == "explore") {
      r.kind = AttemptKind::Explore;
    } else if (f[1] == "eval") {
      r.kind = AttemptKind::Eval;
    } else {
      throw ParseError(where + ": unknown attempt kind");
    }
    r.score = parse_num<Points>(f[2], where);
    r.max_level_reached = parse_num<int>(f[3], where);
    r.shots = parse_num<int>(f[4], where);
    if (!f[5].empty()) {
      for (std::string_view lv : split(f[5], ';')) r.levels_cleared.push_back({parse_num<int>(lv, where), r.index + 1});
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string moving_average_csv(const ResultsBundle& bundle) {
  std::vector<int> eval_index;
  for (const AttemptRecord& r : bundle.records) {
    if (r.kind == AttemptKind::Eval) eval_index.push_back(r.index);
  }
  std::string out = "eval_index,attempt_index,moving_average\n";
  for (std::size_t i = 0; i < bundle.moving_average.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(eval_index[i]) + "," +
           format_number(bundle.moving_average[i]) + "\n";
  }
  return out;
}

std::string summary_json(const ResultsBundle& bundle) {
  ordered_json j;
  j["algorithm"] = std::string(to_string(bundle.config.algorithm));
  j["features"] = features_label(bundle.config);
  j["config"] = ordered_json::parse(experiment_config_to_json(bundle.config));
  j["summary"] = summary_to_json(bundle.summary);
  j["error"] = bundle.error ? ordered_json(*bundle.error) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string results_json(const ResultsBundle& bundle) {
  ordered_json j = ordered_json::parse(summary_json(bundle));
  ordered_json records = ordered_json::array();
  for (const AttemptRecord& r : bundle.records) {
    ordered_json cleared = ordered_json::array();
    for (const LevelClear& c : r.levels_cleared) cleared.push_back({{"level", c.level}, {"attempt", c.attempt}});
    records.push_back({{"index", r.index},
                       {"kind", std::string(to_string(r.kind))},
                       {"score", r.score},
                       {"max_level", r.max_level_reached},
                       {"shots", r.shots},
                       {"levels_cleared", cleared}});
  }
  j["attempts"] = records;
  j["moving_average"] = bundle.moving_average;
  return j.dump(2) + "\n";
}

void export_bundle(const ResultsBundle& bundle, const std::filesystem::path& dir, ExportFormat format) {
  std::filesystem::create_directories(dir);
  if (format == ExportFormat::Structured) {
    write_file(dir / "results.json", results_json(bundle));
    return;
  }
  write_file(dir / "attempts.csv", attempts_csv(bundle.records));
  write_file(dir / "moving_average.csv", moving_average_csv(bundle));
  write_file(dir / "summary.json", summary_json(bundle));
  const SummaryRow row = summary_row(bundle);
  write_file(dir / "summary_row.csv", summary_rows_csv(std::span(&row, 1)));
}

// ---------------------------------------------------------------------------

SummaryRow summary_row(std::string algorithm, std::string features, const Summary& summary) {
  SummaryRow row{std::move(algorithm), std::move(features), summary.max_score, summary.max_level, {}};
  for (const auto& [level, n] : summary.trials_to_finish) row.trials_to_finish[level] = n;
  return row;
}

SummaryRow summary_row(const ResultsBundle& bundle) {
  return summary_row(std::string(to_string(bundle.config.algorithm)), features_label(bundle.config),
                     bundle.summary);
}

std::string summary_rows_csv(std::span<const SummaryRow> rows) {
  std::string out = std::string(kSummaryRowHeader) + "\n";
  for (const SummaryRow& r : rows) {
    out += r.algorithm + "," + r.features + "," + std::to_string(r.max_score) + "," +
           std::to_string(r.max_level) + ",";
    bool first = true;
    for (const auto& [level, n] : r.trials_to_finish) {
      if (!first) out += ";";
      first = false;
      out += std::to_string(level) + ":" + format_number(n);
    }
    out += "\n";
  }
  return out;
}

std::vector<SummaryRow> parse_summary_rows_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kSummaryRowHeader) {
    throw ParseError("summary rows: expected header '" + std::string(kSummaryRowHeader) + "'");
  }
  std::vector<SummaryRow> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string where = "summary rows line " + std::to_string(li + 1);
    const auto f = split(lines[li], ',');
    if (f.size() != 5) throw ParseError(where + ": expected 5 fields");
    SummaryRow r;
    r.algorithm = std::string(f[0]);
    r.features = std::string(f[1]);
    r.max_score = parse_num<Points>(f[2], where);
    r.max_level = parse_num<int>(f[3], where);
    if (!f[4].empty()) {
      for (std::string_view pair : split(f[4], ';')) {
        const auto kv = split(pair, ':');
        if (kv.size() != 2) throw ParseError(where + ": expected level:count pairs");
        r.trials_to_finish[parse_num<int>(kv[0], where)] = parse_num<double>(kv[1], where);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReportRow> merge_summary_rows(std::span<const SummaryRow> rows) {
  std::vector<ReportRow> out;
  std::vector<std::map<int, double>> sums;
  for (const SummaryRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const ReportRow& g) {
      return g.algorithm == r.algorithm && g.features == r.features;
    });
    if (it == out.end()) {
      out.push_back({r.algorithm, r.features, 0, 0, 0, {}});
      sums.emplace_back();
      it = out.end() - 1;
    }
    auto& sum = sums[static_cast<std::size_t>(it - out.begin())];
    it->runs += 1;
    it->max_score = std::max(it->max_score, r.max_score);
    it->max_level = std::max(it->max_level, r.max_level);
    for (const auto& [level, n] : r.trials_to_finish) {
      sum[level] += n;
      it->trials_to_finish[level].second += 1;
    }
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    for (auto& [level, entry] : out[g].trials_to_finish) {
      entry.first = sums[g][level] / static_cast<double>(entry.second);
    }
  }
  return out;
}

std::string max_performance_table(std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Algorithm" << std::setw(10) << "Features" << std::right
     << std::setw(10) << "Score" << std::setw(7) << "Level" << std::setw(6) << "Runs" << "\n";
  for (const ReportRow& r : rows) {
    os << std::left << std::setw(12) << r.algorithm << std::setw(10) << r.features << std::right
       << std::setw(10) << r.max_score << std::setw(7) << r.max_level << std::setw(6) << r.runs << "\n";
  }
  return os.str();
}

std::string trials_table(std::span<const ReportRow> rows, std::span<const int> levels) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Algorithm" << std::setw(10) << "Features" << std::right;
  for (int level : levels) os << std::setw(10) << ("Level " + std::to_string(level));
  os << "\n";
  for (const ReportRow& r : rows) {
    os << std::left << std::setw(12) << r.algorithm << std::setw(10) << r.features << std::right;
    for (int level : levels) {
      const auto it = r.trials_to_finish.find(level);
      if (it == r.trials_to_finish.end()) {
        os << std::setw(10) << "-";
      } else {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(1) << it->second.first;
        os << std::setw(10) << cell.str();
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string report_csv(std::span<const ReportRow> rows) {
  std::string out = "algorithm,features,runs,max_score,max_level,level,mean_trials,runs_cleared\n";
  for (const ReportRow& r : rows) {
    const std::string head = r.algorithm + "," + r.features + "," + std::to_string(r.runs) + "," +
                             std::to_string(r.max_score) + "," + std::to_string(r.max_level) + ",";
    if (r.trials_to_finish.empty()) out += head + ",,\n";
    for (const auto& [level, entry] : r.trials_to_finish) {
      out += head + std::to_string(level) + "," + format_number(entry.first) + "," +
             std::to_string(entry.second) + "\n";
    }
  }
  return out;
}

std::vector<SummaryRow> load_summary_rows(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return parse_summary_rows_csv(read_file(path / "summary_row.csv"));
  return parse_summary_rows_csv(read_file(path));
}

}  // namespace slingshot
