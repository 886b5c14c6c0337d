// Command line front end: experiments, reports, feature dumps and the play
// server.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <thread>

#include <CLI11.hpp>

#include "slingshot/checkpoint.hpp"
#include "slingshot/errors.hpp"
#include "slingshot/features.hpp"
#include "slingshot/harness.hpp"
#include "slingshot/level_pack.hpp"
#include "slingshot/number_format.hpp"
#include "slingshot/service.hpp"

namespace fs = std::filesystem;
using namespace slingshot;

namespace {

HttpService* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

fs::path default_levels() {
  if (fs::exists("levels/default.pack")) return "levels/default.pack";
  return SLINGSHOT_DEFAULT_LEVELS;
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  int seeds = 1;
  std::optional<int> attempts;
  std::string algo;
  std::string features;
  std::string out = "results";
  std::string levels;
  std::string format = "csv";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string save_checkpoint;
  std::string load_checkpoint;
};

int cmd_run(const RunArgs& args) {
  ExperimentConfig cfg;
  if (!args.config.empty()) {
    cfg = load_experiment_config(args.config);
  } else {
    cfg.levels = default_levels();
  }
  if (!args.levels.empty()) cfg.levels = args.levels;
  if (args.seed) cfg.seed = *args.seed;
  if (args.attempts) cfg.total_attempts = *args.attempts;
  if (!args.algo.empty()) cfg.algorithm = parse_algorithm(args.algo);
  if (!args.features.empty()) cfg.features.kind = parse_extractor_kind(args.features);
  cfg.validate();

  const LevelPack pack = load_level_pack_file(cfg.levels, cfg.engine.physics.world);
  const ExportFormat format = args.format == "structured" ? ExportFormat::Structured : ExportFormat::Csv;

  std::vector<ResultsBundle> bundles;
  if (args.seeds == 1) {
    auto learner = make_learner(cfg);
    if (!args.load_checkpoint.empty()) learner->restore(load_checkpoint(args.load_checkpoint));
    bundles.push_back(run_experiment(cfg, pack, *learner));
    if (!args.save_checkpoint.empty()) save_checkpoint(learner->checkpoint(), args.save_checkpoint);
  } else {
    if (!args.load_checkpoint.empty() || !args.save_checkpoint.empty()) {
      throw InvalidArgument("checkpoints are only supported for single-seed runs");
    }
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(args.seeds));
    std::iota(seeds.begin(), seeds.end(), cfg.seed);
    bundles = run_seeds(cfg, pack, seeds, args.threads);
  }

  int status = 0;
  for (const ResultsBundle& b : bundles) {
    const fs::path dir = bundles.size() == 1 ? fs::path(args.out)
                                              : fs::path(args.out) / ("seed_" + std::to_string(b.config.seed));
    export_bundle(b, dir, format);
    const double last_ma = b.moving_average.empty() ? 0.0 : b.moving_average.back();
    std::cout << "seed " << b.config.seed << ": " << to_string(b.config.algorithm) << "/"
              << to_string(b.config.features.kind) << " attempts=" << b.records.size()
              << " max_score=" << b.summary.max_score << " max_level=" << b.summary.max_level
              << " final_ma=" << format_number(last_ma) << " -> " << dir.string() << "\n";
    if (b.error) {
      std::cerr << "seed " << b.config.seed << " aborted: " << *b.error << "\n";
      status = 2;
    }
  }
  return status;
}

int cmd_summarize(const std::vector<std::string>& inputs, const std::string& out,
                  const std::vector<int>& levels) {
  std::vector<SummaryRow> rows;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in) && !fs::exists(fs::path(in) / "summary_row.csv")) {
      // A multi-seed output directory: take every run below it.
      std::vector<fs::path> runs;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_directory() && fs::exists(e.path() / "summary_row.csv")) runs.push_back(e.path());
      }
      std::sort(runs.begin(), runs.end());
      for (const fs::path& r : runs) {
        auto more = load_summary_rows(r);
        rows.insert(rows.end(), more.begin(), more.end());
      }
      continue;
    }
    auto more = load_summary_rows(in);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  const std::vector<ReportRow> report = merge_summary_rows(rows);
  std::cout << "Maximum performance\n" << max_performance_table(report) << "\n";
  std::cout << "Trials to finish\n" << trials_table(report, levels);
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out);
    f << report_csv(report);
  }
  return 0;
}

LevelPack load_pack(const std::string& path) {
  return load_level_pack_file(path.empty() ? default_levels() : fs::path(path));
}

int cmd_dump_features(const std::string& levels, int level, const std::vector<int>& shots, int action,
                      const std::string& features) {
  const LevelPack pack = load_pack(levels);
  if (level < 0 || level >= static_cast<int>(pack.size())) throw InvalidArgument("level out of range");
  EngineConfig engine;
  GameState s = level_start(pack[static_cast<std::size_t>(level)]);
  for (int a : shots) {
    const ShotOutcome out = simulate_shot(s, a, engine);
    s = out.next_state;
    if (s.status != Status::InProgress) throw InvalidArgument("shot sequence ends the level");
  }
  ExtractorConfig cfg;
  cfg.kind = parse_extractor_kind(features);
  const FeatureExtractor fx(cfg, engine.actions.total());
  const SparseVector phi = fx.extract(s, action);
  std::cout << "# " << cfg.describe() << " actions=" << fx.n_actions() << " dim=" << phi.dim() << "\n";
  for (const auto& e : phi.entries()) std::cout << e.index << ":" << format_number(e.value) << "\n";
  return 0;
}

int cmd_probe(const std::string& levels, int level) {
  const LevelPack pack = load_pack(levels);
  EngineConfig engine;
  const auto run_level = [&](int l) {
    const GameState s = level_start(pack[static_cast<std::size_t>(l)]);
    std::cout << "level " << l << " (" << s.pigs.size() << " pigs, " << s.blocks.size() << " blocks, "
              << s.birds_left << " birds)\n";
    for (ActionId a = 0; a < engine.actions.total(); ++a) {
      const ShotOutcome out = simulate_shot(s, a, engine);
      const LaunchParams lp = decode_action(a, engine.actions);
      std::cout << "  a=" << a << " angle=" << format_number(std::round(lp.angle * 1800.0 / 3.141592653589793) / 10.0)
                << " speed=" << format_number(lp.speed) << " reward=" << out.reward << " "
                << to_string(out.fate) << " @(" << std::lround(out.trajectory.back().x) << ","
                << std::lround(out.trajectory.back().y) << ")";
      for (const ShotEvent& e : out.events) {
        if (e.kind == EventKind::PigDestroyed) std::cout << " P" << e.index;
        if (e.kind == EventKind::BlockDestroyed) std::cout << " B" << e.index;
      }
      std::cout << "\n";
    }
  };
  if (level >= 0) {
    run_level(level);
  } else {
    for (int l = 0; l < static_cast<int>(pack.size()); ++l) run_level(l);
  }
  return 0;
}

int cmd_check_levels(const std::string& levels, bool print) {
  const LevelPack pack = load_pack(levels);
  if (print) {
    std::cout << serialize_level_pack(pack);
  } else {
    std::cout << pack.size() << " levels OK\n";
  }
  return 0;
}

int cmd_serve(const std::string& host, int port, const std::string& levels, const std::vector<std::string>& extra,
              const std::string& snapshot, bool discrete) {
  std::map<std::string, LevelPack> packs;
  packs["default"] = load_pack(levels);
  for (const std::string& spec : extra) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--pack expects name=path");
    packs[spec.substr(0, eq)] = load_level_pack_file(spec.substr(eq + 1));
  }
  ServiceOptions opts;
  opts.discrete_human = discrete;
  SessionManager sessions(std::move(packs), opts);

  HttpOptions http;
  http.host = host;
  http.port = port;
  if (!snapshot.empty()) {
    http.snapshot_path = snapshot;
    if (fs::exists(snapshot)) {
      std::ifstream in(snapshot, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      sessions.restore_snapshot(ss.str());
      std::cout << "restored " << sessions.size() << " sessions from " << snapshot << "\n";
    }
  }
  HttpService server(sessions, http);
  const int bound = server.bind();
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "serving on http://" << host << ":" << bound << std::endl;
  server.run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slingshot game reinforcement-learning workbench"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the explore/eval experiment protocol");
  run_cmd->add_option("--config", run.config, "Experiment configuration (JSON)");
  run_cmd->add_option("--seed", run.seed, "Random seed (first seed with --seeds)");
  run_cmd->add_option("--seeds", run.seeds, "Number of consecutive seeds to run")->check(CLI::PositiveNumber);
  run_cmd->add_option("--attempts", run.attempts, "Total attempts (even)");
  run_cmd->add_option("--algo", run.algo, "qlearning or rlsvi");
  run_cmd->add_option("--features", run.features, "pv, pp, npp, npps or nppo");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--levels", run.levels, "Level pack");
  run_cmd->add_option("--format", run.format, "csv or structured")->check(CLI::IsMember({"csv", "structured"}));
  run_cmd->add_option("--threads", run.threads, "Worker threads for multi-seed runs");
  run_cmd->add_option("--save-checkpoint", run.save_checkpoint, "Write the trained agent here");
  run_cmd->add_option("--load-checkpoint", run.load_checkpoint, "Start from a saved agent");

  std::vector<std::string> sum_inputs;
  std::string sum_out;
  std::vector<int> sum_levels{0, 5, 7};
  auto* sum_cmd = app.add_subcommand("summarize", "Merge run outputs and summary rows into report tables");
  sum_cmd->add_option("inputs", sum_inputs, "Run directories or summary-row CSV files")->required();
  sum_cmd->add_option("--out", sum_out, "Write the merged report as CSV");
  sum_cmd->add_option("--levels", sum_levels, "Levels shown in the trials table");

  std::string df_levels;
  int df_level = 0;
  int df_action = 0;
  std::vector<int> df_shots;
  std::string df_features = "npp";
  auto* df_cmd = app.add_subcommand("dump-features", "Print phi(s, a) as index:value lines");
  df_cmd->add_option("--levels", df_levels, "Level pack");
  df_cmd->add_option("--level", df_level, "Level index");
  df_cmd->add_option("--shots", df_shots, "Actions played before extracting");
  df_cmd->add_option("--action", df_action, "Action id");
  df_cmd->add_option("--features", df_features, "pv, pp, npp, npps or nppo");

  std::string probe_levels;
  int probe_level = -1;
  auto* probe_cmd = app.add_subcommand("probe", "Show the outcome of every action on a level's first shot");
  probe_cmd->add_option("--levels", probe_levels, "Level pack");
  probe_cmd->add_option("--level", probe_level, "Level index (all levels when omitted)");

  std::string cl_levels;
  bool cl_print = false;
  auto* cl_cmd = app.add_subcommand("check-levels", "Validate a level pack");
  cl_cmd->add_option("levels", cl_levels, "Level pack");
  cl_cmd->add_flag("--canonical", cl_print, "Print the canonical form");

  std::string serve_host = "0.0.0.0";
  int serve_port = 8173;
  std::string serve_levels;
  std::vector<std::string> serve_packs;
  std::string serve_snapshot;
  bool serve_discrete = false;
  auto* serve_cmd = app.add_subcommand("play-serve", "Serve the session API for human play");
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_option("--port", serve_port, "Port");
  serve_cmd->add_option("--levels", serve_levels, "Default level pack");
  serve_cmd->add_option("--pack", serve_packs, "Additional pack as name=path");
  serve_cmd->add_option("--snapshot", serve_snapshot, "Periodically save sessions to this file");
  serve_cmd->add_flag("--discrete-human", serve_discrete, "Snap human shots to the agents' action grid");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sum_cmd) return cmd_summarize(sum_inputs, sum_out, sum_levels);
    if (*df_cmd) return cmd_dump_features(df_levels, df_level, df_shots, df_action, df_features);
    if (*probe_cmd) return cmd_probe(probe_levels, probe_level);
    if (*cl_cmd) return cmd_check_levels(cl_levels, cl_print);
    if (*serve_cmd) return cmd_serve(serve_host, serve_port, serve_levels, serve_packs, serve_snapshot, serve_discrete);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
