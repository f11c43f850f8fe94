#pragma once

#include <unicode/uchar.h>

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entclf/error.hpp"
#include "entclf/taxonomy.hpp"
#include "entclf/util.hpp"

namespace entclf {

enum class Source { Gsnip, GptSum, LlamaSum, Combined };

constexpr std::string_view to_string(Source s) {
  switch (s) {
    case Source::Gsnip: return "gsnip";
    case Source::GptSum: return "gptsum";
    case Source::LlamaSum: return "llamasum";
    case Source::Combined: return "combined";
  }
  return "";
}

inline Source parse_source(std::string_view s) {
  const auto lower = ascii_lower(trim(s));
  if (lower == "gsnip") return Source::Gsnip;
  if (lower == "gptsum") return Source::GptSum;
  if (lower == "llamasum") return Source::LlamaSum;
  if (lower == "combined") return Source::Combined;
  throw Error(ErrorCode::ConfigError, "unknown source '" + std::string(s) + "' (expected gsnip|gptsum|llamasum)");
}

struct SearchResult {
  int rank = 0;  // 1-based provider position
  std::string title;
  std::string url;
  std::string snippet;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

/// Text acquired for one entity from one source with one parameterization.
struct AcquiredText {
  Task task = Task::Sic;
  std::string entity_id;
  Source source = Source::Gsnip;
  nlohmann::json params = nlohmann::json::object();  // k | model+max_tokens+template | parts
  std::string text;
  std::string retrieved_at;
  std::vector<SearchResult> results;  // GSNIP provenance
  std::string prompt_sha256;          // summary provenance
  bool refusal = false;

  friend bool operator==(const AcquiredText&, const AcquiredText&) = default;
};

inline nlohmann::ordered_json to_json(const AcquiredText& a) {
  nlohmann::ordered_json j;
  j["task"] = std::string(to_string(a.task));
  j["entity_id"] = a.entity_id;
  j["source"] = std::string(to_string(a.source));
  j["params"] = a.params;
  j["text"] = a.text;
  j["retrieved_at"] = a.retrieved_at;
  if (a.source == Source::Gsnip) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : a.results) {
      arr.push_back({{"position", r.rank}, {"title", r.title}, {"link", r.url}, {"snippet", r.snippet}});
    }
    j["provenance"] = {{"results", arr}};
  } else {
    j["provenance"] = {{"prompt_sha256", a.prompt_sha256}};
  }
  j["refusal"] = a.refusal;
  return j;
}

inline AcquiredText acquired_from_json(const nlohmann::json& j) {
  AcquiredText a;
  a.task = parse_task(j.at("task").get<std::string>());
  a.entity_id = j.at("entity_id").get<std::string>();
  a.source = parse_source(j.at("source").get<std::string>());
  a.params = j.at("params");
  a.text = j.at("text").get<std::string>();
  a.retrieved_at = j.at("retrieved_at").get<std::string>();
  const auto& prov = j.at("provenance");
  if (prov.contains("results")) {
    for (const auto& r : prov.at("results")) {
      a.results.push_back({r.at("position").get<int>(), r.at("title").get<std::string>(),
                           r.at("link").get<std::string>(), r.at("snippet").get<std::string>()});
    }
  }
  if (prov.contains("prompt_sha256")) a.prompt_sha256 = prov.at("prompt_sha256").get<std::string>();
  a.refusal = j.at("refusal").get<bool>();
  return a;
}

// ---------------------------------------------------------------------------
// Snippets

/// GSnip text: snippets of the first k results, empty ones dropped, joined by
/// a single space. Duplicates are kept.
inline std::string aggregate_snippets(const std::vector<SearchResult>& results, std::size_t k) {
  std::vector<std::string_view> parts;
  for (std::size_t i = 0; i < results.size() && i < k; ++i) {
    const auto s = trim(results[i].snippet);
    if (!s.empty()) parts.push_back(s);
  }
  return std::string(trim(join(parts, " ")));
}

/// Re-aggregate a cached GSNIP record at a shallower depth.
inline AcquiredText truncate_gsnip(const AcquiredText& deep, std::size_t k) {
  if (deep.source != Source::Gsnip) throw Error(ErrorCode::InvalidArgument, "truncate_gsnip needs a GSNIP record");
  const auto depth = deep.params.value("k", std::size_t{0});
  if (depth < k) {
    throw Error(ErrorCode::InsufficientSnippets, "entity '" + deep.entity_id + "' cached at depth " +
                                                     std::to_string(depth) + ", need " + std::to_string(k));
  }
  AcquiredText out = deep;
  out.params["k"] = k;
  out.results.resize(std::min(out.results.size(), k));
  out.text = aggregate_snippets(out.results, k);
  return out;
}

// ---------------------------------------------------------------------------
// Summary prompts

enum class TemplateId { GptSic, GptHc, LlamaSic, LlamaHc };

struct PromptTemplate {
  TemplateId id;
  std::string_view placeholder;
  std::string_view body;

  std::string fill(std::string_view entity_name) const {
    std::string out(body);
    const auto pos = out.find(placeholder);
    out.replace(pos, placeholder.size(), entity_name);
    return out;
  }
};

constexpr std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::GptSic: return "GPT_SIC";
    case TemplateId::GptHc: return "GPT_HC";
    case TemplateId::LlamaSic: return "LLAMA_SIC";
    case TemplateId::LlamaHc: return "LLAMA_HC";
  }
  return "";
}

inline const PromptTemplate& prompt_template(TemplateId id) {
  static const PromptTemplate kGptSic{
      TemplateId::GptSic, "[ORG_NAME]",
      "Summarize the main business activities, services, vision, and mission of [ORG_NAME]."};
  static const PromptTemplate kGptHc{
      TemplateId::GptHc, "[Provider_NAME]",
      "Summarize the healthcare specialization, scope of practice, and typical services provided by "
      "[Provider_NAME]. The summary should describe the clinician’s professional type and main field of "
      "practice, following standard U.S. healthcare taxonomy conventions."};
  static const PromptTemplate kLlamaSic{
      TemplateId::LlamaSic, "[ORG_NAME]",
      "You are an assistant writing a factual summary about an organization based on its name. Given the "
      "[ORG_NAME], your goal is to identify and describe the organization's main business activities, core "
      "functions, and the industry it operates in. Use only publicly verifiable information. The description "
      "should be informative, objective, and around 250–300 words. Do not add any assumptions or "
      "speculative content."};
  static const PromptTemplate kLlamaHc{
      TemplateId::LlamaHc, "[PROVIDER_NAME]",
      "You are a research assistant writing a factual summary about a healthcare provider’s specialty. "
      "Given the [PROVIDER_NAME], your goal is to identify and describe their medical specialty, professional "
      "focus, qualifications, and the healthcare sector they operate in. Use only publicly verifiable "
      "information. The description should be informative, objective, and around 250–300 words. Do not "
      "add any assumptions or speculative content."};
  switch (id) {
    case TemplateId::GptSic: return kGptSic;
    case TemplateId::GptHc: return kGptHc;
    case TemplateId::LlamaSic: return kLlamaSic;
    case TemplateId::LlamaHc: return kLlamaHc;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown template id");
}

inline TemplateId template_for(Source source, Task task) {
  if (source == Source::GptSum) return task == Task::Sic ? TemplateId::GptSic : TemplateId::GptHc;
  if (source == Source::LlamaSum) return task == Task::Sic ? TemplateId::LlamaSic : TemplateId::LlamaHc;
  throw Error(ErrorCode::InvalidArgument, "source '" + std::string(to_string(source)) + "' has no summary template");
}

/// Cut text after its last sentence terminator ('.', '!' or '?' followed by
/// whitespace or end). Text without one is returned unchanged.
inline std::string truncate_at_sentence(std::string_view text) {
  for (std::size_t i = text.size(); i-- > 0;) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      return std::string(trim(text.substr(0, i + 1)));
    }
  }
  return std::string(trim(text));
}

// ---------------------------------------------------------------------------
// Refusal detection

inline const std::vector<std::string>& default_refusal_phrases() {
  static const std::vector<std::string> kPhrases{"i don't have", "i do not have", "i'm sorry", "as an ai"};
  return kPhrases;
}

/// Heuristic: true when any phrase occurs in the first 200 characters of the
/// text, compared case-insensitively with typographic apostrophes folded to '.
inline bool detect_refusal(std::string_view text,
                           const std::vector<std::string>& phrases = default_refusal_phrases()) {
  const auto cps = utf8_decode(text);
  std::string head;
  for (std::size_t i = 0; i < cps.size() && i < 200; ++i) {
    char32_t c = cps[i];
    if (c == U'‘' || c == U'’' || c == U'ʼ') c = U'\'';
    utf8_append(head, static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));
  }
  return std::any_of(phrases.begin(), phrases.end(), [&](const std::string& p) {
    return !p.empty() && head.find(ascii_lower(p)) != std::string::npos;
  });
}

// ---------------------------------------------------------------------------
// Combination

/// Joins part texts in order with a blank line; refused or empty parts drop
/// out together with their separator.
inline AcquiredText combine_texts(const std::vector<AcquiredText>& parts) {
  if (parts.size() < 2) throw Error(ErrorCode::InvalidArgument, "combine_texts needs at least two parts");
  AcquiredText out;
  out.task = parts.front().task;
  out.entity_id = parts.front().entity_id;
  out.source = Source::Combined;
  auto components = nlohmann::json::array();
  std::vector<std::string_view> texts;
  for (const auto& p : parts) {
    if (p.entity_id != out.entity_id) {
      throw Error(ErrorCode::MixedEntities, "cannot combine '" + out.entity_id + "' with '" + p.entity_id + "'");
    }
    components.push_back({{"source", std::string(to_string(p.source))}, {"params", p.params}});
    if (!p.refusal && !p.text.empty()) texts.push_back(p.text);
    out.retrieved_at = std::max(out.retrieved_at, p.retrieved_at);
  }
  out.params = {{"parts", components}};
  out.text = join(texts, "\n\n");
  return out;
}

}  // namespace entclf
