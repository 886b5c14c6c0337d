#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "slingshot/engine.hpp"

namespace slingshot {

/// Parses a level pack document: a JSON list of levels, each
///
///   {"id": 0, "birds": 3, "slingshot": [140, 120],
///    "pigs": [{"c": [700, 15], "r": 15}],
///    "blocks": [{"kind": "column", "min": [600, 0], "w": 20, "h": 100}]}
///
/// Throws ParseError with a line or field locus, InvalidArgument naming the
/// level id when a level violates its invariants.
LevelPack load_level_pack(std::string_view text, WorldSize world = {});
LevelPack load_level_pack_file(const std::filesystem::path& path, WorldSize world = {});

void validate_level(const LevelSpec& level, WorldSize world = {});

/// Canonical text form: two-space indentation, one pig or block per line,
/// shortest round-trip numbers.
std::string serialize_level_pack(const LevelPack& pack);

}  // namespace slingshot
