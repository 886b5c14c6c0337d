#include "slingshot/level_pack.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slingshot/errors.hpp"
#include "slingshot/number_format.hpp"

namespace slingshot {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& locus, const std::string& what) {
  throw ParseError(locus + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& locus) {
  if (!obj.is_object()) field_error(locus, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) field_error(locus + "." + key, "missing field");
  return *it;
}

double number(const json& j, const std::string& locus) {
  if (!j.is_number()) field_error(locus, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(locus, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& locus) {
  if (!j.is_number_integer()) field_error(locus, "expected an integer");
  return j.get<int>();
}

Vec2 point(const json& j, const std::string& locus) {
  if (!j.is_array() || j.size() != 2) field_error(locus, "expected [x, y]");
  return {number(j[0], locus + "[0]"), number(j[1], locus + "[1]")};
}

std::string level_error(int id, const std::string& what) {
  return "level " + std::to_string(id) + ": " + what;
}

bool inside(Vec2 p, WorldSize w) {
  return p.x >= 0.0 && p.x <= w.width && p.y >= 0.0 && p.y <= w.height;
}

LevelSpec parse_level(const json& j, const std::string& locus) {
  LevelSpec level;
  level.id = integer(member(j, "id", locus), locus + ".id");
  level.birds = integer(member(j, "birds", locus), locus + ".birds");
  level.slingshot = point(member(j, "slingshot", locus), locus + ".slingshot");

  const json& pigs = member(j, "pigs", locus);
  if (!pigs.is_array()) field_error(locus + ".pigs", "expected a list");
  for (std::size_t i = 0; i < pigs.size(); ++i) {
    const std::string at = locus + ".pigs[" + std::to_string(i) + "]";
    Pig pig;
    pig.center = point(member(pigs[i], "c", at), at + ".c");
    pig.radius = number(member(pigs[i], "r", at), at + ".r");
    level.pigs.push_back(pig);
  }

  const json& blocks = member(j, "blocks", locus);
  if (!blocks.is_array()) field_error(locus + ".blocks", "expected a list");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string at = locus + ".blocks[" + std::to_string(i) + "]";
    Block block;
    const json& kind = member(blocks[i], "kind", at);
    if (kind == "beam") {
      block.kind = BlockKind::Beam;
    } else if (kind == "column") {
      block.kind = BlockKind::Column;
    } else {
      field_error(at + ".kind", "expected \"beam\" or \"column\"");
    }
    block.rect.min = point(member(blocks[i], "min", at), at + ".min");
    block.rect.width = number(member(blocks[i], "w", at), at + ".w");
    block.rect.height = number(member(blocks[i], "h", at), at + ".h");
    level.blocks.push_back(block);
  }
  return level;
}

std::string pt(Vec2 p) { return "[" + format_number(p.x) + ", " + format_number(p.y) + "]"; }

}  // namespace

void validate_level(const LevelSpec& level, WorldSize world) {
  if (level.birds < 1) throw InvalidArgument(level_error(level.id, "level needs at least one bird"));
  if (level.pigs.empty()) {
    throw InvalidArgument(level_error(level.id, "level must contain at least one pig"));
  }
  if (!inside(level.slingshot, world)) {
    throw InvalidArgument(level_error(level.id, "slingshot outside the world"));
  }
  for (std::size_t i = 0; i < level.pigs.size(); ++i) {
    const Pig& p = level.pigs[i];
    const std::string which = "pig " + std::to_string(i);
    if (!(p.radius > 0.0)) throw InvalidArgument(level_error(level.id, which + " radius must be positive"));
    if (!p.alive) throw InvalidArgument(level_error(level.id, which + " must start alive"));
    if (!inside(p.center - Vec2{p.radius, p.radius}, world) ||
        !inside(p.center + Vec2{p.radius, p.radius}, world)) {
      throw InvalidArgument(level_error(level.id, which + " lies outside the world"));
    }
  }
  for (std::size_t i = 0; i < level.blocks.size(); ++i) {
    const Block& b = level.blocks[i];
    const std::string which = "block " + std::to_string(i);
    if (!(b.rect.width > 0.0 && b.rect.height > 0.0)) {
      throw InvalidArgument(level_error(level.id, which + " needs positive width and height"));
    }
    if (b.kind == BlockKind::Beam && b.rect.width < b.rect.height) {
      throw InvalidArgument(level_error(level.id, which + " is a beam but taller than wide"));
    }
    if (b.kind == BlockKind::Column && b.rect.height < b.rect.width) {
      throw InvalidArgument(level_error(level.id, which + " is a column but wider than tall"));
    }
    if (!b.intact) throw InvalidArgument(level_error(level.id, which + " must start intact"));
    if (!inside(b.rect.min, world) ||
        !inside(b.rect.min + Vec2{b.rect.width, b.rect.height}, world)) {
      throw InvalidArgument(level_error(level.id, which + " lies outside the world"));
    }
  }
}

LevelPack load_level_pack(std::string_view text, WorldSize world) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                     ": malformed level pack");
  }
  if (!doc.is_array()) throw ParseError("level pack: expected a list of levels");

  LevelPack pack;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    LevelSpec level = parse_level(doc[i], "levels[" + std::to_string(i) + "]");
    if (level.id != static_cast<int>(i)) {
      throw InvalidArgument(level_error(level.id, "ids must count up from 0 in file order"));
    }
    validate_level(level, world);
    pack.push_back(std::move(level));
  }
  if (pack.empty()) throw InvalidArgument("level pack contains no levels");
  return pack;
}

LevelPack load_level_pack_file(const std::filesystem::path& path, WorldSize world) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open level pack " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return load_level_pack(ss.str(), world);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string serialize_level_pack(const LevelPack& pack) {
  std::string out = "[\n";
  for (std::size_t li = 0; li < pack.size(); ++li) {
    const LevelSpec& l = pack[li];
    out += "  {\n";
    out += "    \"id\": " + std::to_string(l.id) + ",\n";
    out += "    \"birds\": " + std::to_string(l.birds) + ",\n";
    out += "    \"slingshot\": " + pt(l.slingshot) + ",\n";
    out += "    \"pigs\": [";
    for (std::size_t i = 0; i < l.pigs.size(); ++i) {
      out += i == 0 ? "\n" : ",\n";
      out += "      {\"c\": " + pt(l.pigs[i].center) + ", \"r\": " + format_number(l.pigs[i].radius) + "}";
    }
    out += l.pigs.empty() ? "],\n" : "\n    ],\n";
    out += "    \"blocks\": [";
    for (std::size_t i = 0; i < l.blocks.size(); ++i) {
      const Block& b = l.blocks[i];
      out += i == 0 ? "\n" : ",\n";
      out += "      {\"kind\": \"" + std::string(to_string(b.kind)) + "\", \"min\": " + pt(b.rect.min) +
             ", \"w\": " + format_number(b.rect.width) + ", \"h\": " + format_number(b.rect.height) + "}";
    }
    out += l.blocks.empty() ? "]\n" : "\n    ]\n";
    out += li + 1 < pack.size() ? "  },\n" : "  }\n";
  }
  out += "]\n";
  return out;
}

}  // namespace slingshot
