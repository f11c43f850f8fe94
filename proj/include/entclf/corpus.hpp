#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entclf/acquisition.hpp"
#include "entclf/dataset.hpp"
#include "entclf/error.hpp"
#include "entclf/taxonomy.hpp"
#include "entclf/util.hpp"

namespace entclf {

using ojson = nlohmann::ordered_json;

struct ClassificationInstance {
  std::string entity_id;
  std::string input_text;
  std::optional<std::string> gold;  // category id; absent for inference sets
  std::string source_signature;

  friend bool operator==(const ClassificationInstance&, const ClassificationInstance&) = default;
};

struct BuildOptions {
  bool strict = false;      // missing text is an error instead of an empty description
  bool drop_empty = false;  // drop instances whose description is empty
};

struct BuildResult {
  std::vector<ClassificationInstance> instances;
  std::size_t empty_descriptions = 0;  // refusals, empty GSnip, or missing text
  std::size_t missing = 0;
};

/// Instances as `name + "\n" + text`, ordered by entity_id. Gold labels are
/// attached for train and dev records only.
inline BuildResult build_instances(const std::vector<EntityRecord>& records,
                                   const std::map<std::string, AcquiredText>& texts,
                                   const std::string& source_signature, const BuildOptions& opts = {}) {
  std::vector<const EntityRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const EntityRecord* a, const EntityRecord* b) { return a->entity_id < b->entity_id; });

  BuildResult out;
  for (const auto* rec : ordered) {
    std::string description;
    const auto it = texts.find(rec->entity_id);
    if (it == texts.end()) {
      if (opts.strict) throw Error(ErrorCode::MissingText, "no acquired text for entity '" + rec->entity_id + "'");
      ++out.missing;
    } else if (!it->second.refusal) {
      description = it->second.text;
    }
    if (description.empty()) {
      ++out.empty_descriptions;
      if (opts.drop_empty) continue;
    }
    ClassificationInstance inst;
    inst.entity_id = rec->entity_id;
    inst.input_text = rec->name + "\n" + description;
    if (rec->split != Split::Test) inst.gold = rec->label.id;
    inst.source_signature = source_signature;
    out.instances.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chat fine-tune records

inline constexpr std::string_view kSystemInstructionVersion = "v1";

/// Fixed per-task system message for chat fine-tune files.
inline std::string system_instruction(const TaxonomyScheme& scheme) {
  if (scheme.task() == Task::Sic) {
    return "You classify organizations into two-digit Standard Industrial Classification (SIC) major groups. "
           "The user gives an organization name followed by a description of its business activities. "
           "Reply with only the two-digit SIC code, one of: " + join(scheme.ids(), ", ") + ".";
  }
  return "You classify individual healthcare providers into Health Care Provider Taxonomy groupings. "
         "The user gives a provider name followed by a description of their practice. "
         "Reply with only the grouping id, one of: " + join(scheme.ids(), ", ") + ".";
}

struct ChatMessage {
  std::string role;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatFineTuneRecord {
  std::vector<ChatMessage> messages;
  friend bool operator==(const ChatFineTuneRecord&, const ChatFineTuneRecord&) = default;
};

inline ChatFineTuneRecord to_chat_record(const ClassificationInstance& inst, const TaxonomyScheme& scheme,
                                         bool with_label) {
  ChatFineTuneRecord rec;
  rec.messages.push_back({"system", system_instruction(scheme)});
  rec.messages.push_back({"user", inst.input_text});
  if (with_label) {
    if (!inst.gold) throw Error(ErrorCode::MissingGold, "instance '" + inst.entity_id + "' has no gold label");
    rec.messages.push_back({"assistant", *inst.gold});
  }
  return rec;
}

inline ojson chat_record_json(const ChatFineTuneRecord& rec) {
  ojson msgs = ojson::array();
  for (const auto& m : rec.messages) {
    ojson jm;
    jm["role"] = m.role;
    jm["content"] = m.content;
    msgs.push_back(std::move(jm));
  }
  ojson j;
  j["messages"] = std::move(msgs);
  return j;
}

inline ChatFineTuneRecord parse_chat_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  ChatFineTuneRecord rec;
  for (const auto& m : j.at("messages")) {
    rec.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  static const std::vector<std::string> kRoles{"system", "user", "assistant"};
  if (rec.messages.size() < 2 || rec.messages.size() > 3) {
    throw Error(ErrorCode::ParseError, "chat record must have 2 or 3 messages");
  }
  for (std::size_t i = 0; i < rec.messages.size(); ++i) {
    if (rec.messages[i].role != kRoles[i]) throw Error(ErrorCode::ParseError, "chat record roles out of order");
  }
  return rec;
}

/// One JSON object per line, LF-terminated. Labeled files carry the assistant
/// turn; inference files stop after the user turn.
inline std::string format_chat_finetune(const std::vector<ClassificationInstance>& instances,
                                        const TaxonomyScheme& scheme, bool with_labels) {
  std::string out;
  for (const auto& inst : instances) {
    out += dump_json(chat_record_json(to_chat_record(inst, scheme, with_labels)));
    out += '\n';
  }
  return out;
}

inline void emit_chat_finetune(const std::vector<ClassificationInstance>& instances, const TaxonomyScheme& scheme,
                               bool with_labels, const std::filesystem::path& out_path) {
  write_file_atomic(out_path, format_chat_finetune(instances, scheme, with_labels));
}

inline std::vector<ChatFineTuneRecord> read_chat_finetune(const std::filesystem::path& path) {
  std::vector<ChatFineTuneRecord> out;
  for (const auto& line : read_lines(path)) {
    if (!line.empty()) out.push_back(parse_chat_record(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tabular JSONL

inline ojson instance_json(const ClassificationInstance& inst) {
  ojson j;
  j["entity_id"] = inst.entity_id;
  j["input_text"] = inst.input_text;
  if (inst.gold) j["gold"] = *inst.gold;
  j["source_signature"] = inst.source_signature;
  return j;
}

inline ClassificationInstance parse_instance(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  ClassificationInstance inst;
  inst.entity_id = j.at("entity_id").get<std::string>();
  inst.input_text = j.at("input_text").get<std::string>();
  if (j.contains("gold")) inst.gold = j.at("gold").get<std::string>();
  inst.source_signature = j.at("source_signature").get<std::string>();
  return inst;
}

inline std::string format_tabular(const std::vector<ClassificationInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += dump_json(instance_json(inst));
    out += '\n';
  }
  return out;
}

inline void emit_tabular(const std::vector<ClassificationInstance>& instances, const std::filesystem::path& out_path) {
  write_file_atomic(out_path, format_tabular(instances));
}

inline std::vector<ClassificationInstance> read_tabular(const std::filesystem::path& path) {
  std::vector<ClassificationInstance> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    try {
      out.push_back(parse_instance(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace entclf
