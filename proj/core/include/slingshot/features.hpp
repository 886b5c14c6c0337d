#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slingshot/engine.hpp"
#include "slingshot/sparse_vector.hpp"

namespace slingshot {

enum class ExtractorKind { PV, PP, NPP, NPPS, NPPO };

std::string_view to_string(ExtractorKind kind);
ExtractorKind parse_extractor_kind(std::string_view name);

/// Pig position values: (x, y, xy) per pig slot after rounding.
struct PvParams {
  int max_pigs = 8;
  double granularity = 10.0;
  friend bool operator==(const PvParams&, const PvParams&) = default;
};

/// Pig position indicator over one fine grid.
struct PpParams {
  double cell = 20.0;
  friend bool operator==(const PpParams&, const PpParams&) = default;
};

/// Three nested square grids, coarsest first.
struct GridConfig {
  std::array<double, 3> cell_sizes{200.0, 100.0, 50.0};
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct ExtractorConfig {
  ExtractorKind kind = ExtractorKind::NPP;
  PvParams pv;
  PpParams pp;
  GridConfig grid;
  WorldSize world;

  void validate() const;
  /// Stable one-line description, used for checkpoint compatibility checks.
  std::string describe() const;

  friend bool operator==(const ExtractorConfig&, const ExtractorConfig&) = default;
};

/// Dense per-cell point counts, row-major with row 0 at the bottom.
struct GridCounts {
  int cols = 0;
  int rows = 0;
  std::vector<int> counts;

  int at(int row, int col) const { return counts[static_cast<std::size_t>(row) * cols + col]; }
};

int grid_cols(double cell, WorldSize world);
int grid_rows(double cell, WorldSize world);

/// Counts points per cell of a ceil(W/cell) x ceil(H/cell) grid translated by
/// `offset`. Cells are half-open [x0, x0 + cell) x [y0, y0 + cell); points
/// outside the grid are clamped into the nearest boundary cell.
GridCounts grid_counts(std::span<const Vec2> points, double cell, Vec2 offset, WorldSize world);

/// Feature dimension per action for the given configuration.
std::size_t block_dimension(const ExtractorConfig& cfg);
std::size_t dimension(const ExtractorConfig& cfg, int n_actions);

SparseVector extract_pv(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions);
SparseVector extract_pp(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions);
SparseVector extract_npp(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions);
SparseVector extract_npps(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions);
SparseVector extract_nppo(const GameState& s, ActionId a, const ExtractorConfig& cfg, int n_actions);

/// phi(s, a) for a fixed configuration and action count. Every action owns a
/// disjoint block of block_dimension() features; phi(s, a) is nonzero only in
/// block a.
class FeatureExtractor {
 public:
  FeatureExtractor(ExtractorConfig cfg, int n_actions);

  const ExtractorConfig& config() const { return cfg_; }
  int n_actions() const { return n_actions_; }
  std::size_t block_dimension() const { return block_dim_; }
  std::size_t dimension() const { return block_dim_ * static_cast<std::size_t>(n_actions_); }

  /// Action-independent features in [0, block_dimension()).
  SparseVector state_block(const GameState& s) const;

  SparseVector extract(const GameState& s, ActionId a) const;
  SparseVector place(const SparseVector& block, ActionId a) const;
  std::vector<SparseVector> extract_all(const GameState& s) const;

 private:
  ExtractorConfig cfg_;
  int n_actions_;
  std::size_t block_dim_;
};

}  // namespace slingshot
