#include "slingshot/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slingshot/errors.hpp"
#include "slingshot/hashing.hpp"

namespace slingshot {

namespace {
constexpr const char* kFormat = "slingshot-checkpoint";
}

std::string extractor_config_hash(const FeatureExtractor& fx) {
  Fnv1a h;
  h.str(fx.config().describe());
  h.u64(static_cast<std::uint64_t>(fx.n_actions()));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

std::string checkpoint_to_text(const Checkpoint& cp) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = cp.version;
  j["algorithm"] = cp.algorithm;
  j["extractor"] = cp.extractor;
  j["config_hash"] = cp.config_hash;
  j["memory_length"] = cp.memory_length;
  j["weights"] = cp.weights;
  j["posterior"] = {{"mean", cp.posterior_mean}, {"variance", cp.posterior_variance}};
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw ParseError("checkpoint: not a slingshot checkpoint");
    Checkpoint cp;
    cp.version = j.at("version").get<int>();
    if (cp.version != kCheckpointVersion) {
      throw ParseError("checkpoint: unsupported version " + std::to_string(cp.version));
    }
    cp.algorithm = j.at("algorithm").get<std::string>();
    cp.extractor = j.at("extractor").get<std::string>();
    cp.config_hash = j.at("config_hash").get<std::string>();
    cp.memory_length = j.at("memory_length").get<std::uint64_t>();
    cp.weights = j.at("weights").get<WeightVector>();
    cp.posterior_mean = j.at("posterior").at("mean").get<WeightVector>();
    cp.posterior_variance = j.at("posterior").at("variance").get<WeightVector>();
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_to_text(cp);
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_text(ss.str());
}

void check_compatible(const Checkpoint& cp, std::string_view algorithm, const FeatureExtractor& fx) {
  if (cp.algorithm != algorithm) {
    throw InvalidArgument("checkpoint was written by '" + cp.algorithm + "', not '" +
                          std::string(algorithm) + "'");
  }
  if (cp.config_hash != extractor_config_hash(fx)) {
    throw InvalidArgument("checkpoint extractor configuration does not match (" + cp.extractor + ")");
  }
  if (cp.weights.size() != fx.dimension()) {
    throw InvalidArgument("checkpoint weight vector has the wrong dimension");
  }
}

}  // namespace slingshot
