#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "entclf/acquisition.hpp"
#include "entclf/error.hpp"
#include "entclf/http.hpp"

namespace entclf {

/// Search provider speaking the SerpAPI-style `organic_results` shape.
class SearchClient {
 public:
  explicit SearchClient(JsonHttpClient http) : http_(std::move(http)) {}

  /// Up to top_k results in provider rank order. Fewer results is not an error.
  std::vector<SearchResult> search(const std::string& name, std::size_t top_k) const {
    if (name.empty()) throw Error(ErrorCode::InvalidArgument, "search query is empty");
    const json body = http_.get("", {{"q", name}, {"num", std::to_string(top_k)}});
    if (!body.is_object()) throw Error(ErrorCode::MalformedResponse, "search response is not an object");
    std::vector<SearchResult> results;
    if (!body.contains("organic_results")) return results;
    const auto& organic = body.at("organic_results");
    if (!organic.is_array()) throw Error(ErrorCode::MalformedResponse, "organic_results is not an array");
    for (const auto& item : organic) {
      if (!item.is_object() || !item.contains("position") || !item.at("position").is_number_integer()) {
        throw Error(ErrorCode::MalformedResponse, "organic result without integer position");
      }
      auto text_field = [&](const char* key) -> std::string {
        if (!item.contains(key)) return {};
        const auto& v = item.at(key);
        if (!v.is_string()) throw Error(ErrorCode::MalformedResponse, std::string("field '") + key + "' is not a string");
        return v.get<std::string>();
      };
      results.push_back({item.at("position").get<int>(), text_field("title"), text_field("link"), text_field("snippet")});
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const SearchResult& a, const SearchResult& b) { return a.rank < b.rank; });
    for (std::size_t i = 1; i < results.size(); ++i) {
      if (results[i].rank == results[i - 1].rank) {
        throw Error(ErrorCode::MalformedResponse, "duplicate result position " + std::to_string(results[i].rank));
      }
    }
    if (results.size() > top_k) results.resize(top_k);
    return results;
  }

 private:
  JsonHttpClient http_;
};

struct Completion {
  std::string content;
  std::string finish_reason;
};

/// Chat-completions client (`POST {base}/chat/completions`).
class LlmClient {
 public:
  explicit LlmClient(JsonHttpClient http) : http_(std::move(http)) {}

  Completion chat(const std::string& model, const json& messages, int max_tokens = 0) const {
    json req{{"model", model}, {"messages", messages}};
    if (max_tokens > 0) req["max_tokens"] = max_tokens;
    const json body = http_.post("/chat/completions", req);
    try {
      const auto& choice = body.at("choices").at(0);
      Completion c;
      c.content = choice.at("message").at("content").get<std::string>();
      if (choice.contains("finish_reason") && choice.at("finish_reason").is_string()) {
        c.finish_reason = choice.at("finish_reason").get<std::string>();
      }
      return c;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, std::string("chat completion without choices[0].message.content: ") + e.what());
    }
  }

  Completion prompt(const std::string& model, const std::string& user_content, int max_tokens = 0) const {
    return chat(model, json::array({{{"role", "user"}, {"content", user_content}}}), max_tokens);
  }

  const JsonHttpClient& http() const { return http_; }

 private:
  JsonHttpClient http_;
};

/// Run one summary prompt for an entity. Completions cut by the token cap are
/// trimmed back to a sentence boundary; refusals keep the flag and lose the text.
inline AcquiredText generate_summary(const std::string& entity_id, const std::string& name, Task task, Source source,
                                     const LlmClient& client, const std::string& model, int max_tokens = 400,
                                     const std::vector<std::string>& refusal_phrases = default_refusal_phrases()) {
  const auto tid = template_for(source, task);
  const std::string prompt = prompt_template(tid).fill(name);
  const auto completion = client.prompt(model, prompt, max_tokens);
  std::string text(trim(completion.content));
  if (text.empty()) throw Error(ErrorCode::EmptyCompletion, "empty summary for '" + name + "'");
  if (completion.finish_reason == "length") text = truncate_at_sentence(text);

  AcquiredText out;
  out.task = task;
  out.entity_id = entity_id;
  out.source = source;
  out.params = {{"model", model}, {"max_tokens", max_tokens}, {"template", std::string(to_string(tid))}};
  out.retrieved_at = utc_timestamp();
  out.prompt_sha256 = sha256_hex(prompt);
  out.refusal = detect_refusal(text, refusal_phrases);
  if (!out.refusal) out.text = std::move(text);
  return out;
}

inline AcquiredText fetch_gsnip(const std::string& entity_id, const std::string& name, Task task,
                                const SearchClient& client, std::size_t k) {
  AcquiredText out;
  out.task = task;
  out.entity_id = entity_id;
  out.source = Source::Gsnip;
  out.params = {{"k", k}};
  out.results = client.search(name, k);
  out.text = aggregate_snippets(out.results, k);
  out.retrieved_at = utc_timestamp();
  return out;
}

}  // namespace entclf
