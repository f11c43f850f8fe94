#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "entclf/csv.hpp"
#include "entclf/error.hpp"
#include "entclf/taxonomy.hpp"
#include "entclf/util.hpp"

namespace entclf {

enum class Split { Train, Dev, Test };

constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  return std::nullopt;
}

struct EntityRecord {
  std::string entity_id;
  std::string name;
  std::string raw_code;
  CategoryLabel label;
  Split split = Split::Train;

  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;

  std::size_t total() const { return train + dev + test; }
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

inline SplitCounts count_splits(const std::vector<EntityRecord>& records) {
  SplitCounts c;
  for (const auto& r : records) {
    switch (r.split) {
      case Split::Train: ++c.train; break;
      case Split::Dev: ++c.dev; break;
      case Split::Test: ++c.test; break;
    }
  }
  return c;
}

struct Dataset {
  TaxonomyScheme scheme;
  std::vector<EntityRecord> records;

  SplitCounts split_counts() const { return count_splits(records); }

  std::vector<const EntityRecord*> in_split(Split s) const {
    std::vector<const EntityRecord*> out;
    for (const auto& r : records) {
      if (r.split == s) out.push_back(&r);
    }
    return out;
  }

  const EntityRecord* find(std::string_view entity_id) const {
    for (const auto& r : records) {
      if (r.entity_id == entity_id) return &r;
    }
    return nullptr;
  }

  /// Stable content hash of the records (ids, names, codes, splits).
  std::string fingerprint() const {
    std::string canon = scheme.fingerprint();
    for (const auto& r : records) {
      canon += "\n" + r.entity_id + "\x1f" + r.name + "\x1f" + r.raw_code + "\x1f" + std::string(to_string(r.split));
    }
    return sha256_hex(canon).substr(0, 16);
  }
};

struct SplitRatios {
  double train = 0.5;
  double dev = 1.0 / 6.0;
  double test = 1.0 / 3.0;
};

/// Split sizes for n records: train and test are floored, dev takes the
/// remainder. 5400 -> (2700, 900, 1800); 3400 -> (1700, 567, 1133).
inline SplitCounts split_sizes(std::size_t n, const SplitRatios& ratios) {
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0)) {
    throw Error(ErrorCode::BadRatios, "split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::BadRatios, "split ratios must sum to 1");
  }
  // The epsilon absorbs representation error such as 5400 * (1/6) landing just below 900.
  auto floor_of = [n](double r) { return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9)); };
  SplitCounts c;
  c.train = floor_of(ratios.train);
  c.test = floor_of(ratios.test);
  c.dev = n - c.train - c.test;
  return c;
}

/// Seeded Fisher-Yates shuffle followed by contiguous train/dev/test assignment.
inline std::vector<EntityRecord> split_dataset(std::vector<EntityRecord> records, const SplitRatios& ratios,
                                               std::uint64_t seed) {
  const auto sizes = split_sizes(records.size(), ratios);
  std::mt19937_64 rng(seed);
  for (std::size_t i = records.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(records[i - 1], records[j]);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].split = i < sizes.train ? Split::Train : (i < sizes.train + sizes.dev ? Split::Dev : Split::Test);
  }
  return records;
}

struct LoadOptions {
  SplitRatios ratios{};
  std::uint64_t seed = 13;
};

/// Parse a dataset CSV (`entity_id,name,raw_code,split[,label]`). Every row's
/// label is re-derived from raw_code; splits come from the file when present
/// in every row and from split_dataset when absent from every row.
inline Dataset parse_dataset(std::string_view text, const TaxonomyScheme& scheme, const LoadOptions& opts = {},
                             const std::string& origin = "<dataset>") {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorCode::ParseError, origin + ": empty file");
  const auto& header = rows.front().fields;
  const std::vector<std::string> base{"entity_id", "name", "raw_code", "split"};
  const bool has_label = header.size() == 5 && header[4] == "label";
  if (header.size() < 4 || !std::equal(base.begin(), base.end(), header.begin()) ||
      (header.size() == 5 && !has_label) || header.size() > 5) {
    throw Error(ErrorCode::ParseError, origin + " row 1: expected header entity_id,name,raw_code,split[,label]");
  }
  if (rows.size() == 1) throw Error(ErrorCode::ParseError, origin + ": no records");

  std::vector<EntityRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t with_split = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string where = origin + " row " + std::to_string(row.line);
    if (row.fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(header.size()) + " fields, got " +
                                             std::to_string(row.fields.size()));
    }
    EntityRecord rec;
    rec.entity_id = row.fields[0];
    rec.name = row.fields[1];
    rec.raw_code = row.fields[2];
    if (rec.entity_id.empty()) throw Error(ErrorCode::ParseError, where + ": empty entity_id");
    if (rec.name.empty()) throw Error(ErrorCode::ParseError, where + ": empty name");
    try {
      rec.label = resolve_label(rec.raw_code, scheme);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    if (has_label && row.fields[4] != rec.label.id) {
      throw Error(ErrorCode::LabelMismatch, where + ": label '" + row.fields[4] + "' but code '" + rec.raw_code +
                                                "' maps to '" + rec.label.id + "'");
    }
    const auto& split_field = row.fields[3];
    if (!split_field.empty()) {
      const auto s = parse_split(split_field);
      if (!s) throw Error(ErrorCode::ParseError, where + ": bad split '" + split_field + "'");
      rec.split = *s;
      ++with_split;
    }
    if (!seen.insert(rec.entity_id).second) {
      throw Error(ErrorCode::DuplicateEntity, where + ": duplicate entity_id '" + rec.entity_id + "'");
    }
    records.push_back(std::move(rec));
  }
  if (with_split != 0 && with_split != records.size()) {
    throw Error(ErrorCode::ParseError, origin + ": split column filled for some rows but not others");
  }
  if (with_split == 0) records = split_dataset(std::move(records), opts.ratios, opts.seed);
  return Dataset{scheme, std::move(records)};
}

inline Dataset load_dataset(const std::filesystem::path& path, const TaxonomyScheme& scheme,
                            const LoadOptions& opts = {}) {
  return parse_dataset(read_file(path), scheme, opts, path.string());
}

inline std::string serialize_dataset(const Dataset& ds) {
  std::string out = csv::format_row({"entity_id", "name", "raw_code", "split"});
  for (const auto& r : ds.records) {
    out += csv::format_row({r.entity_id, r.name, r.raw_code, std::string(to_string(r.split))});
  }
  return out;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(ds));
}

}  // namespace entclf
