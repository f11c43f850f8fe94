#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "entclf/acquisition.hpp"
#include "entclf/cache.hpp"
#include "entclf/clients.hpp"
#include "entclf/dataset.hpp"

namespace entclf {

struct AcquisitionConfig {
  std::size_t top_k = 10;
  std::size_t max_parallel = 4;
  RetryPolicy retry{};
  std::filesystem::path cache_dir = "cache";
  int summary_max_tokens = 400;
  double requests_per_second = 0.0;  // 0 = unlimited
  std::vector<std::string> refusal_phrases = default_refusal_phrases();

  void validate() const {
    if (top_k < 1) throw Error(ErrorCode::ConfigError, "top_k must be >= 1");
    if (max_parallel < 1) throw Error(ErrorCode::ConfigError, "max_parallel must be >= 1");
  }
};

/// What to fetch for an entity: GSNIP at depth k, or one summary model.
struct SourceSpec {
  Source source = Source::Gsnip;
  std::size_t k = 10;
  std::string model;
  int max_tokens = 400;

  nlohmann::json params(Task task) const {
    if (source == Source::Gsnip) return {{"k", k}};
    return {{"model", model}, {"max_tokens", max_tokens}, {"template", std::string(to_string(template_for(source, task)))}};
  }

  std::string signature() const {
    return source == Source::Gsnip ? "gsnip" + std::to_string(k) : std::string(to_string(source));
  }
};

struct AcquireOutcome {
  AcquiredText text;
  bool from_cache = false;
};

struct AcquireFailure {
  std::string entity_id;
  ErrorCode code;
  std::string message;
};

struct AcquireReport {
  std::map<std::string, AcquiredText> texts;  // by entity_id
  std::size_t fetched = 0;
  std::size_t cache_hits = 0;
  std::size_t refusals = 0;
  std::vector<AcquireFailure> failures;
};

/// Cache-fronted dispatcher over the search and summary clients.
class Acquirer {
 public:
  Acquirer(Task task, TextCache& cache, const SearchClient* search, const LlmClient* gpt, const LlmClient* llama,
           AcquisitionConfig config = {}, bool refresh = false)
      : task_(task), cache_(cache), search_(search), gpt_(gpt), llama_(llama), config_(std::move(config)), refresh_(refresh) {
    config_.validate();
  }

  AcquireOutcome acquire(const EntityRecord& entity, const SourceSpec& spec) const {
    if (spec.source == Source::Combined) {
      throw Error(ErrorCode::InvalidArgument, "acquire one component source at a time; combine with combine_texts");
    }
    const auto key = TextCache::key(task_, entity.entity_id, spec.source, spec.params(task_));
    if (!refresh_) {
      if (auto hit = cache_.load(key)) return {std::move(*hit), true};
    }
    AcquiredText fresh;
    if (spec.source == Source::Gsnip) {
      if (!search_) throw Error(ErrorCode::ConfigError, "no search client configured");
      fresh = fetch_gsnip(entity.entity_id, entity.name, task_, *search_, spec.k);
    } else {
      const LlmClient* client = spec.source == Source::GptSum ? gpt_ : llama_;
      if (!client) throw Error(ErrorCode::ConfigError, "no LLM client configured for " + std::string(to_string(spec.source)));
      fresh = generate_summary(entity.entity_id, entity.name, task_, spec.source, *client, spec.model, spec.max_tokens,
                               config_.refusal_phrases);
    }
    cache_.store(fresh);
    return {std::move(fresh), false};
  }

  /// Acquire for every record with at most max_parallel fetches in flight.
  /// Per-entity failures are collected, not thrown.
  AcquireReport acquire_all(const std::vector<EntityRecord>& records, const SourceSpec& spec) const {
    AcquireReport report;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= records.size()) return;
        const auto& rec = records[i];
        try {
          auto out = acquire(rec, spec);
          std::lock_guard lock(mu);
          if (out.from_cache) ++report.cache_hits; else ++report.fetched;
          if (out.text.refusal) ++report.refusals;
          report.texts.emplace(rec.entity_id, std::move(out.text));
        } catch (const Error& e) {
          std::lock_guard lock(mu);
          report.failures.push_back({rec.entity_id, e.code(), e.what()});
        }
      }
    };
    const std::size_t n = std::min(config_.max_parallel, std::max<std::size_t>(1, records.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    std::sort(report.failures.begin(), report.failures.end(),
              [](const AcquireFailure& a, const AcquireFailure& b) { return a.entity_id < b.entity_id; });
    return report;
  }

  /// Cache-only lookup; nullopt when the entry has not been acquired.
  std::optional<AcquiredText> cached(const EntityRecord& entity, const SourceSpec& spec) const {
    return cache_.load(TextCache::key(task_, entity.entity_id, spec.source, spec.params(task_)));
  }

  const AcquisitionConfig& config() const { return config_; }

 private:
  Task task_;
  TextCache& cache_;
  const SearchClient* search_;
  const LlmClient* gpt_;
  const LlmClient* llama_;
  AcquisitionConfig config_;
  bool refresh_;
};

}  // namespace entclf
