#pragma once

#include <algorithm>
#include <vector>

#include "oracles.hpp"
#include "slingshot/features.hpp"

namespace oracle {

inline std::vector<slingshot::Vec2> pig_points(const slingshot::GameState& s) {
  std::vector<slingshot::Vec2> out;
  for (const auto& p : s.pigs) {
    if (p.alive) out.push_back(p.center);
  }
  return out;
}

inline std::vector<slingshot::Vec2> block_points(const slingshot::GameState& s) {
  std::vector<slingshot::Vec2> out;
  for (const auto& b : s.blocks) {
    if (b.intact) out.push_back({b.rect.min.x + b.rect.width / 2.0, b.rect.min.y + b.rect.height / 2.0});
  }
  return out;
}

inline void append_grids(std::vector<double>& out, const std::vector<slingshot::Vec2>& points,
                         const slingshot::ExtractorConfig& cfg, bool shifted) {
  for (double cell : cfg.grid.cell_sizes) {
    const slingshot::Vec2 offset = shifted ? slingshot::Vec2{cell / 2.0, cell / 2.0} : slingshot::Vec2{};
    for (int c : membership_counts(points, cell, offset, cfg.world.width, cfg.world.height)) {
      out.push_back(c);
    }
  }
}

/// Dense action-independent feature block computed from first principles.
inline std::vector<double> expected_block(const slingshot::GameState& s,
                                          const slingshot::ExtractorConfig& cfg) {
  using slingshot::ExtractorKind;
  std::vector<double> out;
  const std::vector<slingshot::Vec2> pigs = pig_points(s);
  switch (cfg.kind) {
    case ExtractorKind::PV: {
      std::vector<slingshot::Vec2> sorted = pigs;
      std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
      });
      out.assign(static_cast<std::size_t>(cfg.pv.max_pigs) * 3, 0.0);
      const double g = cfg.pv.granularity;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double x = round_half_even(sorted[i].x / g) * g;
        const double y = round_half_even(sorted[i].y / g) * g;
        out[3 * i] = x;
        out[3 * i + 1] = y;
        out[3 * i + 2] = x * y;
      }
      break;
    }
    case ExtractorKind::PP:
      for (int c : membership_counts(pigs, cfg.pp.cell, {}, cfg.world.width, cfg.world.height)) {
        out.push_back(c > 0 ? 1.0 : 0.0);
      }
      break;
    case ExtractorKind::NPP:
      append_grids(out, pigs, cfg, false);
      break;
    case ExtractorKind::NPPS:
      append_grids(out, pigs, cfg, false);
      append_grids(out, pigs, cfg, true);
      break;
    case ExtractorKind::NPPO:
      append_grids(out, pigs, cfg, false);
      append_grids(out, block_points(s), cfg, false);
      break;
  }
  return out;
}

/// phi(s, a) as a dense vector: the block placed at offset a * block size.
inline std::vector<double> expected_phi(const slingshot::GameState& s, slingshot::ActionId a,
                                        const slingshot::ExtractorConfig& cfg, int n_actions) {
  const std::vector<double> block = expected_block(s, cfg);
  std::vector<double> out(block.size() * static_cast<std::size_t>(n_actions), 0.0);
  std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(block.size() * a));
  return out;
}

}  // namespace oracle
