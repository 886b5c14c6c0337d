#include "slingshot/service.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

namespace slingshot {

namespace {

using nlohmann::ordered_json;

ordered_json point_json(Vec2 p) { return ordered_json::array({p.x, p.y}); }

Vec2 point_from(const ordered_json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

ordered_json state_to(const GameState& s) {
  ordered_json pigs = ordered_json::array();
  for (const Pig& p : s.pigs) pigs.push_back({{"c", point_json(p.center)}, {"r", p.radius}});
  ordered_json blocks = ordered_json::array();
  for (const Block& b : s.blocks) {
    blocks.push_back({{"kind", std::string(to_string(b.kind))},
                      {"min", point_json(b.rect.min)},
                      {"w", b.rect.width},
                      {"h", b.rect.height}});
  }
  return {{"level", s.level},
          {"birds_left", s.birds_left},
          {"status", std::string(to_string(s.status))},
          {"attempt_score", s.attempt_score},
          {"level_reached", s.level_reached},
          {"pack_complete", s.pack_complete},
          {"slingshot", point_json(s.slingshot)},
          {"pigs", pigs},
          {"blocks", blocks}};
}

GameState state_from(const ordered_json& j) {
  GameState s;
  s.level = j.at("level").get<int>();
  s.birds_left = j.at("birds_left").get<int>();
  const std::string status = j.at("status").get<std::string>();
  s.status = status == "cleared" ? Status::Cleared : status == "failed" ? Status::Failed : Status::InProgress;
  s.attempt_score = j.at("attempt_score").get<Points>();
  s.level_reached = j.at("level_reached").get<int>();
  s.pack_complete = j.at("pack_complete").get<bool>();
  s.slingshot = point_from(j.at("slingshot"));
  for (const auto& p : j.at("pigs")) s.pigs.push_back({point_from(p.at("c")), p.at("r").get<double>(), true});
  for (const auto& b : j.at("blocks")) {
    Block block;
    block.kind = b.at("kind").get<std::string>() == "beam" ? BlockKind::Beam : BlockKind::Column;
    block.rect = {point_from(b.at("min")), b.at("w").get<double>(), b.at("h").get<double>()};
    s.blocks.push_back(block);
  }
  return s;
}

ordered_json attempt_to(const AttemptRecord& r) {
  ordered_json cleared = ordered_json::array();
  for (const LevelClear& c : r.levels_cleared) cleared.push_back({{"level", c.level}, {"attempt", c.attempt}});
  return {{"index", r.index},
          {"kind", std::string(to_string(r.kind))},
          {"score", r.score},
          {"max_level", r.max_level_reached},
          {"shots", r.shots},
          {"levels_cleared", cleared}};
}

AttemptRecord attempt_from(const ordered_json& j) {
  AttemptRecord r;
  r.index = j.at("index").get<int>();
  r.kind = j.at("kind").get<std::string>() == "explore" ? AttemptKind::Explore : AttemptKind::Eval;
  r.score = j.at("score").get<Points>();
  r.max_level_reached = j.at("max_level").get<int>();
  r.shots = j.at("shots").get<int>();
  for (const auto& c : j.at("levels_cleared")) {
    r.levels_cleared.push_back({c.at("level").get<int>(), c.at("attempt").get<int>()});
  }
  return r;
}

ordered_json summary_to(const Summary& s) {
  ordered_json trials = ordered_json::object();
  for (const auto& [level, n] : s.trials_to_finish) trials[std::to_string(level)] = n;
  return {{"attempts", s.attempts}, {"max_score", s.max_score}, {"max_level", s.max_level},
          {"trials_to_finish", trials}};
}

AttemptRecord fresh_attempt(int index) {
  AttemptRecord r;
  r.index = index;
  r.kind = AttemptKind::Eval;
  return r;
}

}  // namespace

LaunchParams launch_for(const ShotRequest& r, const ServiceOptions& opts) {
  if (!std::isfinite(r.angle_deg) || !(r.angle_deg > 0.0 && r.angle_deg < 90.0)) {
    throw InvalidArgument("angle_deg must lie in (0, 90): only forward shots are allowed");
  }
  if (!std::isfinite(r.extension) || !(r.extension > 0.0 && r.extension <= 1.0)) {
    throw InvalidArgument("extension must lie in (0, 1]");
  }
  LaunchParams launch{r.angle_deg * std::numbers::pi / 180.0, r.extension * opts.engine.actions.v_max};
  if (opts.discrete_human) launch = decode_action(nearest_action(launch, opts.engine.actions), opts.engine.actions);
  return launch;
}

SessionManager::SessionManager(std::map<std::string, LevelPack> packs, ServiceOptions opts)
    : packs_(std::move(packs)), opts_(opts) {
  opts_.engine.actions.validate();
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::vector<std::string> SessionManager::pack_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, pack] : packs_) ids.push_back(id);
  return ids;
}

const LevelPack& SessionManager::pack(const std::string& id) const {
  const auto it = packs_.find(id);
  if (it == packs_.end()) throw NotFound("unknown level pack '" + id + "'");
  return it->second;
}

std::string SessionManager::next_id() {
  std::lock_guard lock(id_mutex_);
  std::mt19937_64 mix(id_salt_ ^ ++id_counter_);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(mix()),
                static_cast<unsigned long long>(id_counter_));
  return buf;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

Session SessionManager::create_session(const std::string& pack_id) {
  const LevelPack& levels = pack(pack_id);
  auto entry = std::make_shared<Entry>();
  Session& s = entry->session;
  s.id = next_id();
  s.pack = pack_id;
  s.state = initial_state(levels);
  s.current = fresh_attempt(0);
  s.created_at = std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
  Session copy = s;
  std::unique_lock lock(sessions_mutex_);
  sessions_.emplace(copy.id, std::move(entry));
  return copy;
}

Session SessionManager::get(const std::string& id) const {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

ShotResult SessionManager::submit_shot(const std::string& id, const ShotRequest& request) {
  const auto entry = find(id);
  const LaunchParams launch = launch_for(request, opts_);
  std::lock_guard lock(entry->mutex);
  Session& s = entry->session;
  const LevelPack& levels = pack(s.pack);

  ShotResult result;
  result.launch = launch;
  result.outcome = simulate_launch(s.state, launch, opts_.engine);
  s.current.shots += 1;
  s.current.score += game_points(result.outcome);

  const int attempt_number = static_cast<int>(s.attempt_log.size()) + 1;
  GameState next = result.outcome.next_state;
  bool finished = false;
  if (next.status == Status::Cleared) {
    s.current.levels_cleared.push_back({next.level, attempt_number});
    next = resolve_attempt(next, levels);
    if (next.pack_complete) {
      finished = true;
      next = initial_state(levels);
    } else {
      s.current.max_level_reached = std::max(s.current.max_level_reached, next.level);
    }
  } else if (next.status == Status::Failed) {
    finished = true;
    next = resolve_attempt(next, levels);
  }
  if (finished) {
    s.attempt_log.push_back(s.current);
    result.finished_attempt = s.current;
    s.current = fresh_attempt(static_cast<int>(s.attempt_log.size()));
  }
  s.state = next;
  result.state = next;
  return result;
}

Summary SessionManager::session_summary(const std::string& id) const {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return summarize(entry->session.attempt_log);
}

std::size_t SessionManager::size() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::string SessionManager::snapshot_json() const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  ordered_json all = ordered_json::array();
  for (const auto& e : entries) {
    std::lock_guard lock(e->mutex);
    const Session& s = e->session;
    ordered_json log = ordered_json::array();
    for (const AttemptRecord& r : s.attempt_log) log.push_back(attempt_to(r));
    all.push_back({{"id", s.id},
                   {"pack", s.pack},
                   {"created_at", s.created_at},
                   {"state", state_to(s.state)},
                   {"current", attempt_to(s.current)},
                   {"attempt_log", log}});
  }
  return ordered_json{{"sessions", all}}.dump() + "\n";
}

void SessionManager::restore_snapshot(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
    std::unique_lock lock(sessions_mutex_);
    for (const auto& j : doc.at("sessions")) {
      auto entry = std::make_shared<Entry>();
      Session& s = entry->session;
      s.id = j.at("id").get<std::string>();
      s.pack = j.at("pack").get<std::string>();
      if (!packs_.contains(s.pack)) continue;
      s.created_at = j.at("created_at").get<std::int64_t>();
      s.state = state_from(j.at("state"));
      s.current = attempt_from(j.at("current"));
      for (const auto& r : j.at("attempt_log")) s.attempt_log.push_back(attempt_from(r));
      sessions_[s.id] = std::move(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("session snapshot: ") + e.what());
  }
}

void SessionManager::save_snapshot(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write snapshot " + tmp.string());
    out << snapshot_json();
  }
  std::filesystem::rename(tmp, path);
}

std::string state_json(const GameState& s) { return state_to(s).dump(); }

std::string session_json(const Session& s) {
  ordered_json j{{"id", s.id},
                 {"pack", s.pack},
                 {"created_at", s.created_at},
                 {"attempts", s.attempt_log.size()},
                 {"state", state_to(s.state)}};
  return j.dump();
}

std::string shot_result_json(const ShotResult& r) {
  ordered_json events = ordered_json::array();
  for (const ShotEvent& e : r.outcome.events) {
    ordered_json ev{{"kind", std::string(to_string(e.kind))}, {"points", e.points}};
    if (e.index >= 0) ev["index"] = e.index;
    events.push_back(ev);
  }
  ordered_json path = ordered_json::array();
  for (Vec2 p : r.outcome.trajectory) path.push_back(point_json(p));
  ordered_json j{{"launch", {{"angle_deg", r.launch.angle * 180.0 / std::numbers::pi}, {"speed", r.launch.speed}}},
                 {"events", events},
                 {"reward", r.outcome.reward},
                 {"fate", std::string(to_string(r.outcome.fate))},
                 {"trajectory", path},
                 {"outcome_state", state_to(r.outcome.next_state)},
                 {"state", state_to(r.state)},
                 {"attempt_finished", r.finished_attempt ? attempt_to(*r.finished_attempt) : ordered_json(nullptr)}};
  return j.dump();
}

std::string session_summary_json(const Summary& s) {
  ordered_json j = summary_to(s);
  const SummaryRow row = summary_row("human", "----", s);
  j["row"] = summary_rows_csv(std::span(&row, 1));
  return j.dump();
}

}  // namespace slingshot
