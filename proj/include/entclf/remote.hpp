#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "entclf/clients.hpp"
#include "entclf/corpus.hpp"
#include "entclf/error.hpp"
#include "entclf/prediction.hpp"
#include "entclf/taxonomy.hpp"

namespace entclf {

// ---------------------------------------------------------------------------
// Response parsing

namespace detail {

inline std::vector<std::string_view> scan_tokens(std::string_view text, bool allow_dash) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto in_token = [&](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || (allow_dash && c == '-');
  };
  while (i < text.size()) {
    while (i < text.size() && !in_token(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && in_token(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

/// Map an LLM completion to a valid category id or kInvalidLabel. Exact
/// (trimmed) matches win; otherwise the first maximal token of the code shape
/// that is a valid id. Two-digit ids use alphanumeric tokens, so "2024" never
/// yields "20". The scheme supplies 10-char taxonomy codes and display names.
inline std::string parse_code_response(std::string_view text, std::span<const std::string> valid_ids,
                                       const TaxonomyScheme* scheme = nullptr) {
  if (valid_ids.empty()) throw Error(ErrorCode::InvalidArgument, "valid_ids is empty");
  auto valid = [&](std::string_view id) {
    return std::find(valid_ids.begin(), valid_ids.end(), id) != valid_ids.end();
  };
  const auto trimmed = trim(text);
  if (valid(trimmed)) return std::string(trimmed);

  const bool two_digit = std::all_of(valid_ids.begin(), valid_ids.end(), [](const std::string& id) { return is_two_digits(id); });
  if (two_digit) {
    for (auto tok : detail::scan_tokens(trimmed, false)) {
      if (is_two_digits(tok) && valid(tok)) return std::string(tok);
    }
    return std::string(kInvalidLabel);
  }

  if (scheme) {
    std::string_view name = trimmed;
    while (!name.empty() && (name.back() == '.' || name.back() == '"' || name.back() == '\'')) name.remove_suffix(1);
    for (const auto& c : scheme->categories()) {
      if (ascii_lower(c.display_name) == ascii_lower(name) && valid(c.id)) return c.id;
    }
  }
  for (auto tok : detail::scan_tokens(trimmed, true)) {
    while (!tok.empty() && tok.front() == '-') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == '-') tok.remove_suffix(1);
    if (tok.empty()) continue;
    const auto lower = ascii_lower(tok);
    if (valid(lower)) return lower;
    if (scheme && tok.size() == 10) {
      const auto it = scheme->code_map().find(detail::upper(tok));
      if (it != scheme->code_map().end() && valid(it->second)) return it->second;
    }
  }
  return std::string(kInvalidLabel);
}

inline std::string parse_code_response(std::string_view text, const TaxonomyScheme& scheme) {
  const auto ids = scheme.ids();
  return parse_code_response(text, ids, &scheme);
}

// ---------------------------------------------------------------------------
// Prompting baseline

struct BaselineWording {
  std::string task_name;
  std::string entity_name;
  std::string code_type;
  std::string category_description;
  std::string entity_line_label;
};

inline BaselineWording baseline_wording(Task task) {
  if (task == Task::Sic) {
    return {"SIC code classification", "organization name", "two-digit SIC code", "primary business activity",
            "Organization name"};
  }
  return {"healthcare provider taxonomy classification", "healthcare provider name",
          "healthcare provider taxonomy grouping code", "medical specialty and area of practice",
          "Healthcare provider name"};
}

/// Baseline prompt; the with-context variant appends the acquired text after
/// the entity name.
inline std::string build_baseline_prompt(const std::string& name, const TaxonomyScheme& scheme,
                                         const std::optional<std::string>& context = std::nullopt) {
  const auto w = baseline_wording(scheme.task());
  std::vector<std::string> options;
  for (const auto& c : scheme.categories()) options.push_back(c.id + " (" + c.display_name + ")");
  std::string prompt = "You are a classification assistant for " + w.task_name + ". Given the " + w.entity_name +
                       " below, predict the " + w.code_type + " that best represents its " +
                       w.category_description + ". Choose ONLY one code from the provided options: " +
                       join(options, "; ") + ". Return ONLY the code. Do not include explanations or extra text.";
  prompt += "\n\n" + w.entity_line_label + ": " + name;
  if (context) prompt += "\nContext: " + *context;
  return prompt;
}

/// Ask the LLM for a code directly. The result carries no confidence.
inline Prediction prompt_baseline(const std::string& entity_id, const std::string& name,
                                  const std::optional<std::string>& context, const TaxonomyScheme& scheme,
                                  const LlmClient& client, const std::string& model) {
  const auto completion = client.prompt(model, build_baseline_prompt(name, scheme, context));
  Prediction p;
  p.entity_id = entity_id;
  p.label = parse_code_response(completion.content, scheme);
  return p;
}

// ---------------------------------------------------------------------------
// Remote fine-tuning

struct JobStatus {
  std::string id;
  std::string status;
  std::string fine_tuned_model;
  std::string error;
};

/// OpenAI-style fine-tuning endpoints: `/files`, `/fine_tuning/jobs`.
class FineTuneClient {
 public:
  explicit FineTuneClient(JsonHttpClient http) : http_(std::move(http)) {}

  std::string upload(const std::filesystem::path& path) const {
    httplib::MultipartFormDataItems items{
        {"purpose", "fine-tune", "", ""},
        {"file", read_file(path), path.filename().string(), "application/jsonl"},
    };
    const auto body = http_.post_multipart("/files", items);
    if (!body.contains("id") || !body.at("id").is_string()) throw Error(ErrorCode::MalformedResponse, "file upload returned no id");
    return body.at("id").get<std::string>();
  }

  JobStatus create_job(const std::string& training_file, const std::string& validation_file,
                       const std::string& base_model) const {
    json req{{"training_file", training_file}, {"model", base_model}};
    if (!validation_file.empty()) req["validation_file"] = validation_file;
    return check(parse_status(http_.post("/fine_tuning/jobs", req)));
  }

  JobStatus status(const std::string& job_id) const {
    return parse_status(http_.get("/fine_tuning/jobs/" + job_id, {}));
  }

  /// Poll until the job succeeds (returns the fine-tuned model id) or fails.
  std::string wait(const std::string& job_id, std::chrono::milliseconds interval, int max_polls) const {
    for (int i = 0; i < max_polls; ++i) {
      const auto st = check(status(job_id));
      if (st.status == "succeeded") return st.fine_tuned_model;
      std::this_thread::sleep_for(interval);
    }
    throw Error(ErrorCode::JobFailed, "job " + job_id + " still running after " + std::to_string(max_polls) + " polls");
  }

 private:
  static JobStatus parse_status(const json& body) {
    try {
      JobStatus st;
      st.id = body.at("id").get<std::string>();
      st.status = body.at("status").get<std::string>();
      if (body.contains("fine_tuned_model") && body.at("fine_tuned_model").is_string()) {
        st.fine_tuned_model = body.at("fine_tuned_model").get<std::string>();
      }
      if (body.contains("error") && body.at("error").is_object() && body.at("error").contains("message")) {
        st.error = body.at("error").at("message").get<std::string>();
      }
      return st;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, std::string("fine-tune job response: ") + e.what());
    }
  }

  static JobStatus check(JobStatus st) {
    if (st.status == "failed" || st.status == "cancelled") {
      throw Error(ErrorCode::JobFailed, "job " + st.id + " status '" + st.status + "'" + (st.error.empty() ? "" : ": " + st.error));
    }
    return st;
  }

  JsonHttpClient http_;
};

/// Validate both chat fine-tune files, upload them, and create the job.
inline std::string remote_finetune_submit(const std::filesystem::path& train_file, const std::filesystem::path& dev_file,
                                          const FineTuneClient& client, const std::string& base_model) {
  for (const auto& path : {train_file, dev_file}) {
    if (path.empty()) continue;
    for (const auto& rec : read_chat_finetune(path)) {
      if (rec.messages.size() != 3) {
        throw Error(ErrorCode::MissingGold, path.string() + ": training records need an assistant message");
      }
    }
  }
  const auto train_id = client.upload(train_file);
  const auto dev_id = dev_file.empty() ? std::string() : client.upload(dev_file);
  return client.create_job(train_id, dev_id, base_model).id;
}

/// Send a 2-message inference record to a fine-tuned model and parse its reply.
inline Prediction remote_infer(const std::string& model_id, const ChatFineTuneRecord& record,
                               const std::string& entity_id, const LlmClient& client, const TaxonomyScheme& scheme) {
  if (record.messages.size() != 2) throw Error(ErrorCode::InvalidArgument, "inference record must have 2 messages");
  json messages = json::array();
  for (const auto& m : record.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  const auto completion = client.chat(model_id, messages);
  Prediction p;
  p.entity_id = entity_id;
  p.label = parse_code_response(completion.content, scheme);
  return p;
}

}  // namespace entclf
