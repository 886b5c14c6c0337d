#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slingshot/engine.hpp"
#include "slingshot/features.hpp"
#include "slingshot/learners.hpp"
#include "slingshot/rlsvi.hpp"

namespace slingshot {

enum class Algorithm { QLearning, Rlsvi };

std::string_view to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

struct ExperimentConfig {
  std::filesystem::path levels = "levels/default.pack";
  ExtractorConfig features;
  Algorithm algorithm = Algorithm::QLearning;
  QLearnerConfig qlearning;
  RlsviHyper rlsvi;
  EngineConfig engine;
  int total_attempts = 300;
  std::uint64_t seed = 1;
  int ma_window = 10;

  void validate() const;
};

/// Reads a JSON experiment configuration; missing keys keep their defaults,
/// unknown keys are rejected. Relative level paths resolve against
/// `base_dir` when given.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

enum class AttemptKind { Explore, Eval };

std::string_view to_string(AttemptKind kind);

struct LevelClear {
  int level = 0;
  int attempt = 0;  // 1-based attempt count at which the clear happened

  friend bool operator==(const LevelClear&, const LevelClear&) = default;
};

/// One attempt: shots from level 0 until a level is failed or the pack is
/// completed. `score` counts game points; the failure penalty is part of the
/// learner's reward stream only.
struct AttemptRecord {
  int index = 0;
  AttemptKind kind = AttemptKind::Explore;
  Points score = 0;
  int max_level_reached = 0;
  int shots = 0;
  std::vector<LevelClear> levels_cleared;

  friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

struct Summary {
  Points max_score = 0;
  int max_level = 0;
  std::size_t attempts = 0;
  /// level -> attempts elapsed until that level was first cleared
  std::map<int, int> trials_to_finish;

  friend bool operator==(const Summary&, const Summary&) = default;
};

struct ResultsBundle {
  ExperimentConfig config;
  std::vector<AttemptRecord> records;
  std::vector<double> moving_average;
  Summary summary;
  /// Set when the run aborted; records hold everything up to the failure.
  std::optional<std::string> error;
};

/// out[i] = mean(scores[i .. i + window - 1]); empty when the series is
/// shorter than the window.
std::vector<double> forward_moving_average(std::span<const double> scores, int window);

std::vector<double> eval_scores(std::span<const AttemptRecord> records);

Summary summarize(std::span<const AttemptRecord> records);

std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg);

struct RunHooks {
  /// Called after every attempt with the learner in its post-attempt state.
  std::function<void(const AttemptRecord&, const Learner&)> on_attempt;
};

/// Alternates Explore (exploration and learning on) and Eval (greedy, no
/// learning) attempts, starting with Explore.
ResultsBundle run_experiment(const ExperimentConfig& cfg, const LevelPack& pack, Learner& learner,
                             const RunHooks& hooks = {});
ResultsBundle run_experiment(const ExperimentConfig& cfg, const LevelPack& pack);
ResultsBundle run_experiment(const ExperimentConfig& cfg);

/// Runs cfg once per seed on up to `threads` worker threads. Results are
/// returned in seed order.
std::vector<ResultsBundle> run_seeds(const ExperimentConfig& cfg, const LevelPack& pack,
                                     std::span<const std::uint64_t> seeds, unsigned threads);

// ---------------------------------------------------------------------------
// Export

enum class ExportFormat { Csv, Structured };

std::string attempts_csv(std::span<const AttemptRecord> records);
std::vector<AttemptRecord> parse_attempts_csv(std::string_view text);
std::string moving_average_csv(const ResultsBundle& bundle);
std::string summary_json(const ResultsBundle& bundle);
std::string results_json(const ResultsBundle& bundle);

/// csv: attempts.csv, moving_average.csv, summary.json, summary_row.csv.
/// structured: results.json.
void export_bundle(const ResultsBundle& bundle, const std::filesystem::path& dir, ExportFormat format);

// ---------------------------------------------------------------------------
// Summary rows and multi-run reports

/// One Table-1/Table-2 style row; also the row a human oracle session exports.
struct SummaryRow {
  std::string algorithm;
  std::string features;
  Points max_score = 0;
  int max_level = 0;
  std::map<int, double> trials_to_finish;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

inline constexpr std::string_view kSummaryRowHeader =
    "algorithm,features,max_score,max_level,trials_to_finish";

SummaryRow summary_row(std::string algorithm, std::string features, const Summary& summary);
SummaryRow summary_row(const ResultsBundle& bundle);

/// CSV with kSummaryRowHeader; trials_to_finish is "level:count" pairs
/// separated by ';'.
std::string summary_rows_csv(std::span<const SummaryRow> rows);
std::vector<SummaryRow> parse_summary_rows_csv(std::string_view text);

struct ReportRow {
  std::string algorithm;
  std::string features;
  std::size_t runs = 0;
  Points max_score = 0;
  int max_level = 0;
  /// level -> (mean trials over runs that cleared it, number of such runs)
  std::map<int, std::pair<double, std::size_t>> trials_to_finish;
};

/// Groups rows by (algorithm, features) in first-seen order.
std::vector<ReportRow> merge_summary_rows(std::span<const SummaryRow> rows);

std::string max_performance_table(std::span<const ReportRow> rows);
std::string trials_table(std::span<const ReportRow> rows, std::span<const int> levels);
std::string report_csv(std::span<const ReportRow> rows);

/// Loads summary rows from a run directory (its summary_row.csv) or from a
/// summary-row CSV file.
std::vector<SummaryRow> load_summary_rows(const std::filesystem::path& path);

}  // namespace slingshot
