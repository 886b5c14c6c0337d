#include "slingshot/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "slingshot/errors.hpp"

namespace slingshot {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double distance_to_rect(Vec2 p, const Rect& r) {
  const double dx = std::max({r.min.x - p.x, 0.0, p.x - (r.min.x + r.width)});
  const double dy = std::max({r.min.y - p.y, 0.0, p.y - (r.min.y + r.height)});
  return std::hypot(dx, dy);
}

double distance_to_pig(Vec2 p, const Pig& pig) {
  return std::max(0.0, norm(p - pig.center) - pig.radius);
}

struct Candidate {
  ImpactTarget target;
  int index;
  double distance;  // from the previous bird position to the object's surface
};

}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

std::string_view to_string(BlockKind kind) {
  return kind == BlockKind::Beam ? "beam" : "column";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::InProgress: return "in_progress";
    case Status::Cleared: return "cleared";
    case Status::Failed: return "failed";
  }
  return "unknown";
}

std::string_view to_string(BirdFate fate) {
  switch (fate) {
    case BirdFate::Landed: return "landed";
    case BirdFate::ExitedWorld: return "exited_world";
    case BirdFate::StoppedByBlock: return "stopped_by_block";
    case BirdFate::TooSlow: return "too_slow";
    case BirdFate::StepLimit: return "step_limit";
  }
  return "unknown";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::PigDestroyed: return "pig_destroyed";
    case EventKind::BlockDestroyed: return "block_destroyed";
    case EventKind::BirdSpent: return "bird_spent";
    case EventKind::LevelCleared: return "level_cleared";
    case EventKind::LevelFailed: return "level_failed";
  }
  return "unknown";
}

void ActionConfig::validate() const {
  if (n_angles < 1 || n_extensions < 1) {
    throw InvalidArgument("action grid needs at least one angle and one extension");
  }
  if (!(angle_min_deg > 0.0 && angle_min_deg < angle_max_deg && angle_max_deg < 90.0)) {
    throw InvalidArgument("action angles must satisfy 0 < angle_min < angle_max < 90");
  }
  if (!(v_max > 0.0) || !std::isfinite(v_max)) {
    throw InvalidArgument("v_max must be positive");
  }
}

LaunchParams decode_action(ActionId action, const ActionConfig& cfg) {
  if (action < 0 || action >= cfg.total()) {
    throw InvalidArgument("action id " + std::to_string(action) + " out of range [0, " +
                          std::to_string(cfg.total()) + ")");
  }
  const int i = action / cfg.n_extensions;
  const int j = action % cfg.n_extensions;
  const double step =
      cfg.n_angles > 1 ? (cfg.angle_max_deg - cfg.angle_min_deg) / (cfg.n_angles - 1) : 0.0;
  const double angle_deg = cfg.angle_min_deg + i * step;
  const double speed = cfg.v_max * (j + 1) / cfg.n_extensions;
  return {angle_deg * kDegToRad, speed};
}

ActionId nearest_action(LaunchParams launch, const ActionConfig& cfg) {
  const double angle_deg = launch.angle / kDegToRad;
  int i = 0;
  if (cfg.n_angles > 1) {
    const double step = (cfg.angle_max_deg - cfg.angle_min_deg) / (cfg.n_angles - 1);
    i = static_cast<int>(std::lround((angle_deg - cfg.angle_min_deg) / step));
    i = std::clamp(i, 0, cfg.n_angles - 1);
  }
  int j = static_cast<int>(std::lround(launch.speed / cfg.v_max * cfg.n_extensions)) - 1;
  j = std::clamp(j, 0, cfg.n_extensions - 1);
  return i * cfg.n_extensions + j;
}

void validate_launch(LaunchParams launch, const ActionConfig& cfg) {
  if (!(launch.angle > 0.0 && launch.angle < std::numbers::pi / 2.0)) {
    throw InvalidArgument("launch angle must point forward and upward, in (0, 90) degrees");
  }
  if (!(launch.speed > 0.0 && launch.speed <= cfg.v_max)) {
    throw InvalidArgument("launch speed must lie in (0, v_max]");
  }
}

FlightResult trajectory_impact(LaunchParams launch, std::span<const Pig> pigs,
                               std::span<const Block> blocks, Vec2 origin,
                               const PhysicsConfig& physics) {
  FlightResult result;
  std::vector<bool> pig_alive(pigs.size());
  std::vector<bool> block_intact(blocks.size());
  for (std::size_t i = 0; i < pigs.size(); ++i) pig_alive[i] = pigs[i].alive;
  for (std::size_t i = 0; i < blocks.size(); ++i) block_intact[i] = blocks[i].intact;

  const Vec2 accel{0.0, -physics.gravity};
  Vec2 seg_origin = origin;
  Vec2 seg_velocity{launch.speed * std::cos(launch.angle), launch.speed * std::sin(launch.angle)};
  double seg_start_time = 0.0;
  long seg_step = 0;

  Vec2 prev = origin;
  Vec2 pos = origin;
  double time = 0.0;
  result.path.push_back(origin);

  std::vector<Candidate> candidates;
  bool done = false;
  for (int step = 1; step <= physics.max_steps && !done; ++step) {
    ++seg_step;
    const double t = static_cast<double>(seg_step) * physics.dt;
    time = seg_start_time + t;
    pos = seg_origin + seg_velocity * t + accel * (0.5 * t * t);
    const Vec2 vel = seg_velocity + accel * t;

    if (pos.x < 0.0 || pos.x > physics.world.width || pos.y > physics.world.height) {
      result.fate = BirdFate::ExitedWorld;
      break;
    }

    candidates.clear();
    for (std::size_t i = 0; i < pigs.size(); ++i) {
      if (pig_alive[i] && norm(pos - pigs[i].center) <= pigs[i].radius + physics.bird_radius) {
        candidates.push_back({ImpactTarget::Pig, static_cast<int>(i), distance_to_pig(prev, pigs[i])});
      }
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (block_intact[i] && distance_to_rect(pos, blocks[i].rect) <= physics.bird_radius) {
        candidates.push_back(
            {ImpactTarget::Block, static_cast<int>(i), distance_to_rect(prev, blocks[i].rect)});
      }
    }

    if (!candidates.empty()) {
      // Stable: equal distances keep pigs-then-blocks index order.
      const auto hit = std::min_element(
          candidates.begin(), candidates.end(),
          [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
      Impact impact{hit->target, hit->index, false, time, pos};
      if (hit->target == ImpactTarget::Pig) {
        pig_alive[hit->index] = false;
        impact.destroyed = true;
        result.impacts.push_back(impact);
      } else {
        const double speed = norm(vel);
        if (speed >= physics.break_speed) {
          block_intact[hit->index] = false;
          impact.destroyed = true;
          result.impacts.push_back(impact);
          seg_origin = pos;
          seg_velocity = vel * 0.5;
          seg_start_time = time;
          seg_step = 0;
          result.path.push_back(pos);
          if (norm(seg_velocity) < physics.stop_speed) {
            result.fate = BirdFate::TooSlow;
            done = true;
          }
          prev = pos;
          continue;
        }
        result.impacts.push_back(impact);
        result.fate = BirdFate::StoppedByBlock;
        break;
      }
    }

    if (vel.y < 0.0 && pos.y - physics.bird_radius <= 0.0) {
      result.fate = BirdFate::Landed;
      break;
    }
    if (norm(vel) < physics.stop_speed) {
      result.fate = BirdFate::TooSlow;
      break;
    }
    if (physics.path_stride > 0 && step % physics.path_stride == 0) result.path.push_back(pos);
    prev = pos;
    if (step == physics.max_steps) result.fate = BirdFate::StepLimit;
  }

  result.final_position = pos;
  result.flight_time = time;
  if (result.path.back() != pos) result.path.push_back(pos);
  return result;
}

GameState level_start(const LevelSpec& level) {
  GameState s;
  s.level = level.id;
  s.birds_left = level.birds;
  s.pigs = level.pigs;
  s.blocks = level.blocks;
  s.slingshot = level.slingshot;
  s.level_reached = level.id;
  return s;
}

GameState initial_state(const LevelPack& pack) {
  if (pack.empty()) throw InvalidArgument("level pack is empty");
  return level_start(pack.front());
}

ShotOutcome simulate_launch(const GameState& state, LaunchParams launch, const EngineConfig& cfg) {
  if (state.status != Status::InProgress) {
    throw InvalidState("cannot shoot from a terminal state");
  }
  if (state.birds_left < 1) throw InvalidState("no birds left");
  validate_launch(launch, cfg.actions);

  const FlightResult flight =
      trajectory_impact(launch, state.pigs, state.blocks, state.slingshot, cfg.physics);

  ShotOutcome out;
  out.fate = flight.fate;
  out.trajectory = flight.path;

  std::vector<bool> pig_gone(state.pigs.size(), false);
  std::vector<bool> block_gone(state.blocks.size(), false);
  for (const Impact& impact : flight.impacts) {
    if (!impact.destroyed) continue;
    if (impact.target == ImpactTarget::Pig) {
      pig_gone[impact.index] = true;
      out.events.push_back({EventKind::PigDestroyed, impact.index, cfg.scoring.pig});
    } else {
      block_gone[impact.index] = true;
      out.events.push_back({EventKind::BlockDestroyed, impact.index, cfg.scoring.block});
    }
  }
  out.events.push_back({EventKind::BirdSpent, -1, 0});

  GameState next = state;
  next.birds_left = state.birds_left - 1;
  next.pigs.clear();
  next.blocks.clear();
  for (std::size_t i = 0; i < state.pigs.size(); ++i) {
    if (!pig_gone[i]) next.pigs.push_back(state.pigs[i]);
  }
  for (std::size_t i = 0; i < state.blocks.size(); ++i) {
    if (!block_gone[i]) next.blocks.push_back(state.blocks[i]);
  }

  if (next.pigs.empty()) {
    next.status = Status::Cleared;
    out.events.push_back({EventKind::LevelCleared, -1, cfg.scoring.unused_bird * next.birds_left});
  } else if (next.birds_left == 0) {
    next.status = Status::Failed;
    out.events.push_back({EventKind::LevelFailed, -1, cfg.scoring.failure_penalty});
  }

  for (const ShotEvent& e : out.events) out.reward += e.points;
  next.attempt_score += out.reward;
  out.next_state = std::move(next);
  return out;
}

ShotOutcome simulate_shot(const GameState& state, ActionId action, const EngineConfig& cfg) {
  return simulate_launch(state, decode_action(action, cfg.actions), cfg);
}

GameState resolve_attempt(const GameState& state, const LevelPack& pack) {
  switch (state.status) {
    case Status::InProgress:
      throw InvalidState("resolve_attempt called on a state that is still in progress");
    case Status::Failed:
      return initial_state(pack);
    case Status::Cleared:
      break;
  }
  const auto next_level = static_cast<std::size_t>(state.level) + 1;
  if (next_level < pack.size()) {
    GameState next = level_start(pack[next_level]);
    next.attempt_score = state.attempt_score;
    next.level_reached = std::max(state.level_reached, next.level);
    return next;
  }
  GameState done = state;
  done.pack_complete = true;
  return done;
}

Points game_points(const ShotOutcome& outcome) {
  Points points = 0;
  for (const ShotEvent& e : outcome.events) {
    if (e.kind != EventKind::LevelFailed) points += e.points;
  }
  return points;
}

}  // namespace slingshot
