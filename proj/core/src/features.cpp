#include "slingshot/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slingshot/errors.hpp"
#include "slingshot/number_format.hpp"

namespace slingshot {

namespace {

using Entry = SparseVector::Entry;

std::vector<Vec2> pig_centers(const GameState& s) {
  std::vector<Vec2> out;
  out.reserve(s.pigs.size());
  for (const Pig& p : s.pigs) {
    if (p.alive) out.push_back(p.center);
  }
  return out;
}

std::vector<Vec2> block_centers(const GameState& s) {
  std::vector<Vec2> out;
  out.reserve(s.blocks.size());
  for (const Block& b : s.blocks) {
    if (b.intact) out.push_back(b.rect.center());
  }
  return out;
}

std::size_t grid_cells(double cell, WorldSize world) {
  return static_cast<std::size_t>(grid_cols(cell, world)) * grid_rows(cell, world);
}

std::size_t nested_dim(const GridConfig& grid, WorldSize world) {
  std::size_t total = 0;
  for (double cell : grid.cell_sizes) total += grid_cells(cell, world);
  return total;
}

// Appends count entries for one grid starting at `base`.
void append_counts(const GridCounts& g, std::size_t base, std::vector<Entry>& out) {
  for (std::size_t i = 0; i < g.counts.size(); ++i) {
    if (g.counts[i] != 0) out.push_back({static_cast<SparseVector::Index>(base + i), double(g.counts[i])});
  }
}

void append_nested(std::span<const Vec2> points, const GridConfig& grid, WorldSize world,
                   Vec2 half_shift_sign, std::size_t& base, std::vector<Entry>& out) {
  for (double cell : grid.cell_sizes) {
    const Vec2 offset{half_shift_sign.x * cell / 2.0, half_shift_sign.y * cell / 2.0};
    append_counts(grid_counts(points, cell, offset, world), base, out);
    base += grid_cells(cell, world);
  }
}

SparseVector pv_block(const GameState& s, const ExtractorConfig& cfg) {
  std::vector<Vec2> centers = pig_centers(s);
  if (static_cast<int>(centers.size()) > cfg.pv.max_pigs) {
    throw InvalidArgument("state has " + std::to_string(centers.size()) +
                          " pigs but the position-value extractor holds at most " +
                          std::to_string(cfg.pv.max_pigs));
  }
  std::sort(centers.begin(), centers.end(),
            [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  std::vector<Entry> entries;
  const double g = cfg.pv.granularity;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    // Round half to even.
    const double x = std::nearbyint(centers[i].x / g) * g;
    const double y = std::nearbyint(centers[i].y / g) * g;
    const auto base = static_cast<SparseVector::Index>(3 * i);
    for (const Entry e : {Entry{base, x}, Entry{base + 1, y}, Entry{base + 2, x * y}}) {
      if (e.value != 0.0) entries.push_back(e);
    }
  }
  return SparseVector(block_dimension(cfg), std::move(entries));
}

SparseVector pp_block(const GameState& s, const ExtractorConfig& cfg) {
  const std::vector<Vec2> centers = pig_centers(s);
  const GridCounts g = grid_counts(centers, cfg.pp.cell, {}, cfg.world);
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < g.counts.size(); ++i) {
    if (g.counts[i] > 0) entries.push_back({static_cast<SparseVector::Index>(i), 1.0});
  }
  return SparseVector(block_dimension(cfg), std::move(entries));
}

SparseVector nested_block(const GameState& s, const ExtractorConfig& cfg) {
  const std::vector<Vec2> pigs = pig_centers(s);
  std::vector<Entry> entries;
  std::size_t base = 0;
  append_nested(pigs, cfg.grid, cfg.world, {0.0, 0.0}, base, entries);
  if (cfg.kind == ExtractorKind::NPPS) {
    append_nested(pigs, cfg.grid, cfg.world, {1.0, 1.0}, base, entries);
  } else if (cfg.kind == ExtractorKind::NPPO) {
    const std::vector<Vec2> obstacles = block_centers(s);
    append_nested(obstacles, cfg.grid, cfg.world, {0.0, 0.0}, base, entries);
  }
  return SparseVector(block_dimension(cfg), std::move(entries));
}

SparseVector block_for(const GameState& s, const ExtractorConfig& cfg) {
  switch (cfg.kind) {
    case ExtractorKind::PV: return pv_block(s, cfg);
    case ExtractorKind::PP: return pp_block(s, cfg);
    case ExtractorKind::NPP:
    case ExtractorKind::NPPS:
    case ExtractorKind::NPPO: return nested_block(s, cfg);
  }
  throw InvalidArgument("unknown extractor kind");
}

void check_action(ActionId a, int n_actions) {
  if (a < 0 || a >= n_actions) {
    throw InvalidArgument("action id " + std::to_string(a) + " out of range for " +
                          std::to_string(n_actions) + " actions");
  }
}

SparseVector extract_as(ExtractorKind kind, const GameState& s, ActionId a, ExtractorConfig cfg,
                        int n_actions) {
  cfg.kind = kind;
  check_action(a, n_actions);
  const SparseVector block = block_for(s, cfg);
  return block.translated(block.dim() * static_cast<std::size_t>(a),
                          block.dim() * static_cast<std::size_t>(n_actions));
}

}  // namespace

std::string_view to_string(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::PV: return "pv";
    case ExtractorKind::PP: return "pp";
    case ExtractorKind::NPP: return "npp";
    case ExtractorKind::NPPS: return "npps";
    case ExtractorKind::NPPO: return "nppo";
  }
  return "unknown";
}

ExtractorKind parse_extractor_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (ExtractorKind k : {ExtractorKind::PV, ExtractorKind::PP, ExtractorKind::NPP,
                          ExtractorKind::NPPS, ExtractorKind::NPPO}) {
    if (lower == to_string(k)) return k;
  }
  throw InvalidArgument("unknown feature extractor '" + std::string(name) +
                        "' (expected pv, pp, npp, npps or nppo)");
}

void ExtractorConfig::validate() const {
  if (!(world.width > 0.0 && world.height > 0.0)) throw InvalidArgument("world size must be positive");
  if (pv.max_pigs < 1) throw InvalidArgument("pv.max_pigs must be at least 1");
  if (!(pv.granularity > 0.0)) throw InvalidArgument("pv.granularity must be positive");
  if (!(pp.cell > 0.0)) throw InvalidArgument("pp.cell must be positive");
  for (std::size_t i = 0; i < grid.cell_sizes.size(); ++i) {
    if (!(grid.cell_sizes[i] > 0.0)) throw InvalidArgument("grid cell sizes must be positive");
    if (i > 0 && !(grid.cell_sizes[i] < grid.cell_sizes[i - 1])) {
      throw InvalidArgument("grid cell sizes must be strictly decreasing");
    }
  }
}

std::string ExtractorConfig::describe() const {
  std::ostringstream os;
  os << to_string(kind) << ";world=" << format_number(world.width) << "x"
     << format_number(world.height);
  switch (kind) {
    case ExtractorKind::PV:
      os << ";max_pigs=" << pv.max_pigs << ";granularity=" << format_number(pv.granularity);
      break;
    case ExtractorKind::PP:
      os << ";cell=" << format_number(pp.cell);
      break;
    default:
      os << ";cells=" << format_number(grid.cell_sizes[0]) << "," << format_number(grid.cell_sizes[1])
         << "," << format_number(grid.cell_sizes[2]);
      break;
  }
  return os.str();
}

int grid_cols(double cell, WorldSize world) { return static_cast<int>(std::ceil(world.width / cell)); }
int grid_rows(double cell, WorldSize world) { return static_cast<int>(std::ceil(world.height / cell)); }

GridCounts grid_counts(std::span<const Vec2> points, double cell, Vec2 offset, WorldSize world) {
  if (!(cell > 0.0)) throw InvalidArgument("grid cell size must be positive");
  GridCounts g;
  g.cols = grid_cols(cell, world);
  g.rows = grid_rows(cell, world);
  g.counts.assign(static_cast<std::size_t>(g.cols) * g.rows, 0);
  for (const Vec2 p : points) {
    const int c = std::clamp(static_cast<int>(std::floor((p.x - offset.x) / cell)), 0, g.cols - 1);
    const int r = std::clamp(static_cast<int>(std::floor((p.y - offset.y) / cell)), 0, g.rows - 1);
    ++g.counts[static_cast<std::size_t>(r) * g.cols + c];
  }
  return g;
}

std::size_t block_dimension(const ExtractorConfig& cfg) {
  switch (cfg.kind) {
    case ExtractorKind::PV: return static_cast<std::size_t>(cfg.pv.max_pigs) * 3;
    case ExtractorKind::PP: return grid_cells(cfg.pp.cell, cfg.world);
    case ExtractorKind::NPP: return nested_dim(cfg.grid, cfg.world);
    case ExtractorKind::NPPS:
    case ExtractorKind::NPPO: return 2 * nested_dim(cfg.grid, cfg.world);
  }
  return 0;
}

std::size_t dimension(const ExtractorConfig& cfg, int n_actions) {
  return block_dimension(cfg) * static_cast<std::size_t>(n_actions);
}

SparseVector extract_pv(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions) {
  return extract_as(ExtractorKind::PV, s, a, cfg, n_actions);
}
SparseVector extract_pp(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions) {
  return extract_as(ExtractorKind::PP, s, a, cfg, n_actions);
}
SparseVector extract_npp(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions) {
  return extract_as(ExtractorKind::NPP, s, a, cfg, n_actions);
}
SparseVector extract_npps(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions) {
  return extract_as(ExtractorKind::NPPS, s, a, cfg, n_actions);
}
SparseVector extract_nppo(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions) {
  return extract_as(ExtractorKind::NPPO, s, a, cfg, n_actions);
}

FeatureExtractor::FeatureExtractor(ExtractorConfig cfg, int n_actions)
    : cfg_(cfg), n_actions_(n_actions), block_dim_(0) {
  cfg_.validate();
  if (n_actions_ < 1) throw InvalidArgument("need at least one action");
  block_dim_ = slingshot::block_dimension(cfg_);
}

SparseVector FeatureExtractor::state_block(const GameState& s) const { return block_for(s, cfg_); }

SparseVector FeatureExtractor::place(const SparseVector& block, ActionId a) const {
  check_action(a, n_actions_);
  return block.translated(block_dim_ * static_cast<std::size_t>(a), dimension());
}

SparseVector FeatureExtractor::extract(const GameState& s, ActionId a) const {
  return place(state_block(s), a);
}

std::vector<SparseVector> FeatureExtractor::extract_all(const GameState& s) const {
  const SparseVector block = state_block(s);
  std::vector<SparseVector> out;
  out.reserve(static_cast<std::size_t>(n_actions_));
  for (ActionId a = 0; a < n_actions_; ++a) out.push_back(place(block, a));
  return out;
}

}  // namespace slingshot
