#pragma once

#include <unicode/uchar.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "entclf/util.hpp"

namespace entclf {

inline constexpr std::uint32_t kDefaultBuckets = 1u << 18;

/// Sparse feature vector; indices strictly increasing, values positive.
struct FeatureVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeaturizerConfig {
  std::uint32_t buckets = kDefaultBuckets;
  std::size_t word_cap = 0;  // 0 = no truncation

  /// Hash of everything that changes the feature mapping.
  std::string fingerprint() const {
    return sha256_hex("fnv1a64|lower|unicode-alnum-split|uni+bi|l2|buckets=" + std::to_string(buckets) +
                      "|word_cap=" + std::to_string(word_cap))
        .substr(0, 16);
  }
};

/// Lowercased tokens: maximal runs of Unicode letters/digits.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t cp : utf8_decode(text)) {
    const auto c = static_cast<UChar32>(cp);
    if (u_isalnum(c)) {
      utf8_append(current, static_cast<char32_t>(u_tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Hashed unigram + adjacent-bigram counts, L2-normalized.
inline FeatureVector featurize(std::string_view text, const FeaturizerConfig& cfg = {}) {
  auto tokens = tokenize(text);
  if (cfg.word_cap > 0 && tokens.size() > cfg.word_cap) tokens.resize(cfg.word_cap);

  std::map<std::uint32_t, double> counts;
  auto add = [&](std::string_view gram) { counts[static_cast<std::uint32_t>(fnv1a64(gram) % cfg.buckets)] += 1.0; };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
  }

  FeatureVector fv;
  double norm2 = 0.0;
  for (const auto& [idx, v] : counts) norm2 += v * v;
  if (norm2 == 0.0) return fv;
  const double inv = 1.0 / std::sqrt(norm2);
  fv.indices.reserve(counts.size());
  fv.values.reserve(counts.size());
  for (const auto& [idx, v] : counts) {
    fv.indices.push_back(idx);
    fv.values.push_back(v * inv);
  }
  return fv;
}

}  // namespace entclf
