#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "entclf/config.hpp"
#include "entclf/corpus.hpp"
#include "entclf/error.hpp"
#include "entclf/util.hpp"

namespace entclf {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Frozen record of what a run was configured with. Written once, before the
/// first output of the run; later commands check they still match it.
struct RunManifest {
  std::string run_id;
  std::string config_fingerprint;
  std::map<std::string, std::string> config;
  std::string dataset_fingerprint;
  std::vector<std::string> source_signatures;
  std::string tool_version{kToolVersion};
  std::string created_at;
  std::vector<std::string> deviations;
};

/// Known departures from the reference setup, recorded in every manifest.
inline std::vector<std::string> standard_deviations(const Config& cfg) {
  std::vector<std::string> out;
  out.push_back("native classifier is a hashed bag-of-ngrams softmax model, not a fine-tuned transformer encoder");
  out.push_back("learning_rate " + cfg.str("train.learning_rate") +
                " retuned for the linear model (reference transformer setup uses 5e-5)");
  if (cfg.count("train.word_cap") == 0) out.push_back("no 512-token input truncation (train.word_cap = 0)");
  out.push_back("chat fine-tune system instruction version " + std::string(kSystemInstructionVersion));
  out.push_back("unparseable LLM completions are scored as the always-wrong label INVALID");
  return out;
}

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["run_id"] = m.run_id;
  j["tool_version"] = m.tool_version;
  j["created_at"] = m.created_at;
  j["config_fingerprint"] = m.config_fingerprint;
  j["dataset_fingerprint"] = m.dataset_fingerprint;
  j["source_signatures"] = m.source_signatures;
  j["deviations"] = m.deviations;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.created_at = j.at("created_at").get<std::string>();
  m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
  m.source_signatures = j.at("source_signatures").get<std::vector<std::string>>();
  m.deviations = j.at("deviations").get<std::vector<std::string>>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  return m;
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
  try {
    return manifest_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, dump_json(to_json(m), 2) + "\n");
}

}  // namespace entclf
