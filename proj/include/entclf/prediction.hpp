#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entclf/error.hpp"
#include "entclf/util.hpp"

namespace entclf {

/// Reserved label for completions that name no valid category. Always wrong.
inline constexpr std::string_view kInvalidLabel = "INVALID";

struct Prediction {
  std::string entity_id;
  std::string label;                 // category id or kInvalidLabel
  std::optional<double> confidence;  // native backend only
  std::vector<double> scores;        // class probabilities in scheme order, native backend only

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline nlohmann::ordered_json to_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["entity_id"] = p.entity_id;
  j["label"] = p.label;
  if (p.confidence) j["confidence"] = *p.confidence;
  if (!p.scores.empty()) j["scores"] = p.scores;
  return j;
}

inline Prediction prediction_from_json(const nlohmann::json& j) {
  Prediction p;
  p.entity_id = j.at("entity_id").get<std::string>();
  p.label = j.at("label").get<std::string>();
  if (j.contains("confidence") && !j.at("confidence").is_null()) p.confidence = j.at("confidence").get<double>();
  if (j.contains("scores")) p.scores = j.at("scores").get<std::vector<double>>();
  return p;
}

inline void write_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path) {
  std::string out;
  for (const auto& p : preds) out += dump_json(to_json(p)) + "\n";
  write_file_atomic(path, out);
}

inline std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    try {
      out.push_back(prediction_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace entclf
