#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "slingshot/engine.hpp"
#include "slingshot/errors.hpp"
#include "slingshot/harness.hpp"

namespace slingshot {

class NotFound : public Error {
 public:
  using Error::Error;
};

/// A human shot: continuous aim and slingshot extension.
struct ShotRequest {
  double angle_deg = 45.0;  // (0, 90)
  double extension = 1.0;   // (0, 1]
};

struct ServiceOptions {
  EngineConfig engine;
  /// Snap human launches onto the agents' action grid.
  bool discrete_human = false;
};

struct Session {
  std::string id;
  std::string pack;
  GameState state;
  std::vector<AttemptRecord> attempt_log;
  AttemptRecord current;  // attempt in progress
  std::int64_t created_at = 0;  // unix seconds
};

struct ShotResult {
  LaunchParams launch;
  ShotOutcome outcome;
  /// State after resolve_attempt was applied to a terminal outcome.
  GameState state;
  std::optional<AttemptRecord> finished_attempt;
};

LaunchParams launch_for(const ShotRequest& r, const ServiceOptions& opts);

/// Owns all play sessions. Calls on one session are serialized; different
/// sessions proceed concurrently.
class SessionManager {
 public:
  explicit SessionManager(std::map<std::string, LevelPack> packs, ServiceOptions opts = {});

  std::vector<std::string> pack_ids() const;
  const ServiceOptions& options() const { return opts_; }

  Session create_session(const std::string& pack_id);
  Session get(const std::string& id) const;
  ShotResult submit_shot(const std::string& id, const ShotRequest& request);
  Summary session_summary(const std::string& id) const;

  std::size_t size() const;

  /// All sessions as one JSON document, and the inverse.
  std::string snapshot_json() const;
  void restore_snapshot(const std::string& text);
  void save_snapshot(const std::filesystem::path& path) const;

 private:
  struct Entry {
    mutable std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  const LevelPack& pack(const std::string& id) const;
  std::string next_id();

  std::map<std::string, LevelPack> packs_;
  ServiceOptions opts_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex id_mutex_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_ = 0;
};

// JSON bodies used by the HTTP API.
std::string state_json(const GameState& s);
std::string session_json(const Session& s);
std::string shot_result_json(const ShotResult& r);
std::string session_summary_json(const Summary& s);

struct HttpOptions {
  std::string host = "0.0.0.0";
  int port = 8173;
  std::optional<std::filesystem::path> snapshot_path;
  int snapshot_interval_s = 30;
};

/// HTTP front end:
///   GET  /packs
///   POST /sessions               {"pack": "default"}
///   GET  /sessions/{id}
///   POST /sessions/{id}/shots    {"angle_deg": 45, "extension": 0.8}
///   GET  /sessions/{id}/summary
/// Errors carry {"error": <code>, "message": <text>}.
class HttpService {
 public:
  HttpService(SessionManager& sessions, HttpOptions opts);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind();
  /// Serves until stop(); binds first if needed.
  void run();
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slingshot
