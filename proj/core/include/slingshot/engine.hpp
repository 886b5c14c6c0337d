#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace slingshot {

using Points = std::int64_t;
using ActionId = int;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2, Vec2) = default;
};

double norm(Vec2 v);

struct Pig {
  Vec2 center;
  double radius = 0.0;
  bool alive = true;

  friend bool operator==(const Pig&, const Pig&) = default;
};

enum class BlockKind { Beam, Column };

std::string_view to_string(BlockKind kind);

/// Axis-aligned rectangle given by its lower-left corner.
struct Rect {
  Vec2 min;
  double width = 0.0;
  double height = 0.0;

  Vec2 center() const { return {min.x + width / 2.0, min.y + height / 2.0}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Block {
  BlockKind kind = BlockKind::Beam;
  Rect rect;
  bool intact = true;

  friend bool operator==(const Block&, const Block&) = default;
};

struct WorldSize {
  double width = 1200.0;
  double height = 600.0;

  friend bool operator==(WorldSize, WorldSize) = default;
};

struct LevelSpec {
  int id = 0;
  int birds = 1;
  std::vector<Pig> pigs;
  std::vector<Block> blocks;
  Vec2 slingshot{140.0, 120.0};

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

using LevelPack = std::vector<LevelSpec>;

enum class Status { InProgress, Cleared, Failed };

std::string_view to_string(Status status);

/// Quiescent game state between two shots. Only alive pigs and intact blocks
/// are stored.
struct GameState {
  int level = 0;
  int birds_left = 0;
  std::vector<Pig> pigs;
  std::vector<Block> blocks;
  Vec2 slingshot{140.0, 120.0};
  Points attempt_score = 0;
  int level_reached = 0;
  Status status = Status::InProgress;
  // Set by resolve_attempt when the last level of the pack was cleared.
  bool pack_complete = false;

  friend bool operator==(const GameState&, const GameState&) = default;
};

/// Discretization of the slingshot into n_angles x n_extensions launches.
struct ActionConfig {
  int n_angles = 8;
  int n_extensions = 4;
  double angle_min_deg = 10.0;
  double angle_max_deg = 80.0;
  double v_max = 110.0;

  int total() const { return n_angles * n_extensions; }
  void validate() const;

  friend bool operator==(const ActionConfig&, const ActionConfig&) = default;
};

struct LaunchParams {
  double angle = 0.0;  // radians, (0, pi/2)
  double speed = 0.0;  // world units per second

  friend bool operator==(LaunchParams, LaunchParams) = default;
};

/// Physical constants of the simplified engine.
struct PhysicsConfig {
  WorldSize world;
  double gravity = 10.0;
  double dt = 0.01;
  double bird_radius = 10.0;
  double break_speed = 30.0;
  double stop_speed = 5.0;
  int max_steps = 1'000'000;
  // Every n-th integration step is kept in FlightResult::path.
  int path_stride = 10;

  friend bool operator==(const PhysicsConfig&, const PhysicsConfig&) = default;
};

/// Points awarded per event.
struct Scoring {
  Points pig = 10'000;
  Points block = 1'000;
  Points unused_bird = 5'000;
  Points failure_penalty = -10'000;

  friend bool operator==(const Scoring&, const Scoring&) = default;
};

struct EngineConfig {
  ActionConfig actions;
  PhysicsConfig physics;
  Scoring scoring;
};

LaunchParams decode_action(ActionId action, const ActionConfig& cfg);

/// Inverse of decode_action up to the grid: the action whose launch is
/// closest to the given one.
ActionId nearest_action(LaunchParams launch, const ActionConfig& cfg);

void validate_launch(LaunchParams launch, const ActionConfig& cfg);

// ---------------------------------------------------------------------------
// Flight resolution

enum class ImpactTarget { Pig, Block };

struct Impact {
  ImpactTarget target = ImpactTarget::Pig;
  int index = 0;  // into the pig or block list passed to trajectory_impact
  bool destroyed = false;
  double time = 0.0;
  Vec2 position;
};

enum class BirdFate { Landed, ExitedWorld, StoppedByBlock, TooSlow, StepLimit };

std::string_view to_string(BirdFate fate);

struct FlightResult {
  std::vector<Impact> impacts;
  BirdFate fate = BirdFate::Landed;
  Vec2 final_position;
  double flight_time = 0.0;
  std::vector<Vec2> path;
};

/// Integrates the bird along piecewise parabolic arcs with a fixed time step.
/// Pig contact destroys the pig and the bird flies on; block contact above the
/// break speed destroys the block and halves the bird velocity, below it the
/// bird stops. Dead pigs and broken blocks in the input are ignored.
FlightResult trajectory_impact(LaunchParams launch, std::span<const Pig> pigs,
                               std::span<const Block> blocks, Vec2 origin,
                               const PhysicsConfig& physics = {});

// ---------------------------------------------------------------------------
// Shots and attempts

enum class EventKind { PigDestroyed, BlockDestroyed, BirdSpent, LevelCleared, LevelFailed };

std::string_view to_string(EventKind kind);

struct ShotEvent {
  EventKind kind = EventKind::BirdSpent;
  int index = -1;  // pig/block index in the pre-shot state, -1 otherwise
  Points points = 0;

  friend bool operator==(const ShotEvent&, const ShotEvent&) = default;
};

struct ShotOutcome {
  std::vector<ShotEvent> events;
  Points reward = 0;
  GameState next_state;
  std::vector<Vec2> trajectory;
  BirdFate fate = BirdFate::Landed;
};

GameState level_start(const LevelSpec& level);
GameState initial_state(const LevelPack& pack);

ShotOutcome simulate_launch(const GameState& state, LaunchParams launch,
                            const EngineConfig& cfg = {});
ShotOutcome simulate_shot(const GameState& state, ActionId action,
                          const EngineConfig& cfg = {});

/// Moves a terminal state on: next level after a clear, level 0 after a
/// failure. Clearing the last level returns the cleared state with
/// pack_complete set.
GameState resolve_attempt(const GameState& state, const LevelPack& pack);

/// Game points of a reward stream entry, i.e. the reward without the failure
/// penalty.
Points game_points(const ShotOutcome& outcome);

}  // namespace slingshot
