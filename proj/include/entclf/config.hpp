#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "entclf/error.hpp"
#include "entclf/taxonomy.hpp"
#include "entclf/util.hpp"

namespace entclf {

#ifdef ENTCLF_DATA_DIR
inline constexpr const char* kDataDir = ENTCLF_DATA_DIR;
#else
inline constexpr const char* kDataDir = "data";
#endif

/// Pipeline settings as flat `section.key` strings. Every key has a default;
/// files and `--set` overrides may only change known keys.
class Config {
 public:
  Config() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> kDefaults{
        {"task.name", "sic"},
        {"task.taxonomy", ""},
        {"data.dataset", ""},
        {"data.seed", "13"},
        {"data.train_ratio", "0.5"},
        {"data.dev_ratio", "0.16666666666666667"},
        {"data.test_ratio", "0.33333333333333333"},
        {"acquisition.cache_dir", "cache"},
        {"acquisition.sources", "gsnip"},
        {"acquisition.max_parallel", "4"},
        {"acquisition.requests_per_second", "0"},
        {"acquisition.max_attempts", "3"},
        {"acquisition.backoff_s", "1.0"},
        {"acquisition.timeout_s", "60"},
        {"acquisition.refusal_phrases", "i don't have,i do not have,i'm sorry,as an ai"},
        {"search.url", "https://serpapi.com/search"},
        {"search.top_k", "10"},
        {"llm.url", "https://api.openai.com/v1"},
        {"llm.model", "gpt-4o-mini"},
        {"llm.max_tokens", "400"},
        {"llama.url", ""},
        {"llama.model", "llama-3.1-8b-instruct"},
        {"corpus.source", "gsnip"},
        {"corpus.drop_empty", "false"},
        {"train.epochs", "3"},
        {"train.batch_size", "8"},
        {"train.eval_batch_size", "16"},
        {"train.learning_rate", "0.05"},
        {"train.warmup_steps", "500"},
        {"train.weight_decay", "0.01"},
        {"train.seed", "13"},
        {"train.buckets", "262144"},
        {"train.word_cap", "0"},
        {"eval.thresholds", "0.60,0.65,0.70,0.75,0.80,0.85"},
        {"eval.inclusive", "false"},
        {"ablate.ks", "1,5,10,15,20"},
        {"baseline.model", "gpt-4o-mini"},
        {"baseline.context", "none"},
        {"finetune.url", ""},
        {"finetune.base_model", "gpt-4o-mini-2024-07-18"},
        {"finetune.poll_interval_s", "30"},
        {"finetune.max_polls", "240"},
    };
    return kDefaults;
  }

  /// Merge an INI file. Unknown sections or keys are rejected.
  void load_file(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw Error(ErrorCode::ConfigError, path.string() + ": key '" + section + "' outside a section");
      for (const auto& [key, value] : body) set(section + "." + key, value.get_value<std::string>());
    }
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    values_[key] = std::string(trim(value));
  }

  /// `section.key=value`
  void apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, "override must be key=value: '" + std::string(assignment) + "'");
    set(std::string(trim(assignment.substr(0, eq))), std::string(assignment.substr(eq + 1)));
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    return it->second;
  }

  long long integer(const std::string& key) const {
    const auto& s = str(key);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw bad(key, "an integer");
    return v;
  }

  std::size_t count(const std::string& key) const {
    const auto v = integer(key);
    if (v < 0) throw bad(key, "a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  double real(const std::string& key) const {
    const auto& s = str(key);
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw bad(key, "a number");
    return v;
  }

  bool boolean(const std::string& key) const {
    const auto s = ascii_lower(str(key));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw bad(key, "a boolean");
  }

  /// Comma-separated list, items trimmed, empties dropped.
  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& item : split(str(key), ',')) {
      const auto t = trim(item);
      if (!t.empty()) out.emplace_back(t);
    }
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) {
      double v = 0;
      const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || p != item.data() + item.size()) throw bad(key, "a list of numbers");
      out.push_back(v);
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& item : list(key)) {
      std::size_t v = 0;
      const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || p != item.data() + item.size()) throw bad(key, "a list of counts");
      out.push_back(v);
    }
    return out;
  }

  /// Type-check every typed key so a bad value fails before any work starts.
  void validate() const {
    for (const char* k : {"data.seed", "train.seed"}) integer(k);
    for (const char* k : {"acquisition.max_parallel", "acquisition.max_attempts", "search.top_k", "llm.max_tokens",
                          "train.epochs", "train.batch_size", "train.eval_batch_size", "train.warmup_steps",
                          "train.buckets", "train.word_cap", "finetune.max_polls"}) {
      count(k);
    }
    for (const char* k : {"data.train_ratio", "data.dev_ratio", "data.test_ratio", "acquisition.requests_per_second",
                          "acquisition.backoff_s", "acquisition.timeout_s", "train.learning_rate",
                          "train.weight_decay", "finetune.poll_interval_s"}) {
      real(k);
    }
    for (const char* k : {"corpus.drop_empty", "eval.inclusive"}) boolean(k);
    reals("eval.thresholds");
    counts("ablate.ks");
    parse_task(str("task.name"));
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// INI rendering of every key, sorted; the fingerprint hashes this text.
  std::string to_ini() const {
    std::string out, section;
    for (const auto& [key, value] : values_) {
      const auto dot = key.find('.');
      const auto sec = key.substr(0, dot);
      if (sec != section) {
        if (!section.empty()) out += "\n";
        out += "[" + sec + "]\n";
        section = sec;
      }
      out += key.substr(dot + 1) + " = " + value + "\n";
    }
    return out;
  }

  std::string fingerprint() const { return sha256_hex(to_ini()).substr(0, 16); }

 private:
  Error bad(const std::string& key, const char* what) const {
    return Error(ErrorCode::ConfigError, key + " = '" + str(key) + "' is not " + what);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace entclf
