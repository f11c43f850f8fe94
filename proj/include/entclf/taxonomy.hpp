#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entclf/csv.hpp"
#include "entclf/error.hpp"
#include "entclf/util.hpp"

namespace entclf {

enum class Task { Sic, Healthcare };

constexpr std::string_view to_string(Task t) { return t == Task::Sic ? "sic" : "healthcare"; }

inline Task parse_task(std::string_view s) {
  const auto lower = ascii_lower(trim(s));
  if (lower == "sic") return Task::Sic;
  if (lower == "healthcare" || lower == "hc") return Task::Healthcare;
  throw Error(ErrorCode::ConfigError, "unknown task '" + std::string(s) + "' (expected sic|healthcare)");
}

struct CategoryLabel {
  std::string id;
  std::string display_name;

  friend bool operator==(const CategoryLabel&, const CategoryLabel&) = default;
};

/// Lowercase ASCII slug: alphanumerics kept, every other run becomes one '-'.
inline std::string slugify(std::string_view name) {
  std::string out;
  bool dash = false;
  for (char c : name) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      if (dash && !out.empty()) out.push_back('-');
      out.push_back(static_cast<char>(std::tolower(uc)));
      dash = false;
    } else {
      dash = true;
    }
  }
  return out;
}

inline bool is_two_digits(std::string_view s) {
  return s.size() == 2 && std::isdigit(static_cast<unsigned char>(s[0])) &&
         std::isdigit(static_cast<unsigned char>(s[1]));
}

/// The label space of one task. Immutable once constructed.
class TaxonomyScheme {
 public:
  TaxonomyScheme(Task task, std::vector<CategoryLabel> categories,
                 std::unordered_map<std::string, std::string> code_map = {})
      : task_(task), categories_(std::move(categories)), code_map_(std::move(code_map)) {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
      const auto& id = categories_[i].id;
      if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty category id");
      if (task_ == Task::Sic && !is_two_digits(id)) {
        throw Error(ErrorCode::InvalidArgument, "SIC category id must be two ASCII digits: '" + id + "'");
      }
      if (!index_.emplace(id, i).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate category id '" + id + "'");
      }
    }
    for (const auto& [code, id] : code_map_) {
      if (!index_.count(id)) {
        throw Error(ErrorCode::InvalidArgument, "code '" + code + "' maps to unknown category '" + id + "'");
      }
    }
  }

  Task task() const noexcept { return task_; }
  const std::vector<CategoryLabel>& categories() const noexcept { return categories_; }
  std::size_t size() const noexcept { return categories_.size(); }
  const std::unordered_map<std::string, std::string>& code_map() const noexcept { return code_map_; }

  std::optional<std::size_t> index_of(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view id) const { return index_of(id).has_value(); }

  const CategoryLabel& at(std::size_t i) const { return categories_.at(i); }
  const CategoryLabel& label(std::string_view id) const {
    const auto idx = index_of(id);
    if (!idx) throw Error(ErrorCode::UnknownCategory, "'" + std::string(id) + "' is not a category");
    return categories_[*idx];
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(categories_.size());
    for (const auto& c : categories_) out.push_back(c.id);
    return out;
  }

  /// Identifies the label space (task + ordered ids + names). The code map is
  /// deliberately excluded: adding codes to a category does not change it.
  std::string fingerprint() const {
    std::string canon(to_string(task_));
    for (const auto& c : categories_) canon += "\n" + c.id + "\t" + c.display_name;
    return sha256_hex(canon).substr(0, 16);
  }

 private:
  Task task_;
  std::vector<CategoryLabel> categories_;
  std::unordered_map<std::string, std::string> code_map_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Bundled schemes

/// Two-digit SIC major groups in the industry dataset, in display order.
inline TaxonomyScheme sic_scheme() {
  static const std::array<std::pair<const char*, const char*>, 27> kGroups{{
      {"10", "Metal Mining"},
      {"13", "Oil and Gas Extraction"},
      {"20", "Food and Kindred Products"},
      {"27", "Printing, Publishing and Allied Industries"},
      {"28", "Chemicals and Allied Products"},
      {"34", "Fabricated Metal Products"},
      {"35", "Industrial and Commercial Machinery"},
      {"36", "Electronic"},
      {"37", "Transportation Equipment"},
      {"38", "Measuring, Photographic, Medical"},
      {"48", "Communications"},
      {"49", "Electric, Gas and Sanitary Services"},
      {"50", "Wholesale Trade - Durable Goods"},
      {"51", "Wholesale Trade - Nondurable Goods"},
      {"58", "Eating and Drinking Places"},
      {"59", "Miscellaneous Retail"},
      {"60", "Depository Institutions"},
      {"61", "Nondepository Credit Institutions"},
      {"62", "Security"},
      {"63", "Insurance Carriers"},
      {"65", "Real Estate"},
      {"67", "Holding and Other Investment Offices"},
      {"70", "Hotels, Rooming Houses, Camps"},
      {"73", "Business Services"},
      {"79", "Amusement and Recreation Services"},
      {"80", "Health Services"},
      {"87", "Engineering, Accounting, Research"},
  }};
  std::vector<CategoryLabel> cats;
  for (const auto& [id, name] : kGroups) cats.push_back({id, name});
  return TaxonomyScheme(Task::Sic, std::move(cats));
}

inline const std::array<const char*, 17>& healthcare_grouping_names() {
  static const std::array<const char*, 17> kNames{{
      "Allopathic & Osteopathic Physicians",
      "Behavioral Health and Social Service Providers",
      "Chiropractic Providers",
      "Dental Providers",
      "Dietary and Nutritional Service Providers",
      "Emergency Medical Service Providers",
      "Eye and Vision Service Providers",
      "Nursing Service Providers",
      "Nursing Service Related Providers",
      "Other Service Providers",
      "Pharmacy Service Providers",
      "Physician Assistants and Advanced Practice Nursing Providers",
      "Podiatric Medicine and Surgery Service Providers",
      "Respiratory, Developmental, Rehabilitative and Restorative Service Providers",
      "Speech, Language and Hearing Service Providers",
      "Student, Health Care",
      "Technologists, Technicians, and Other Technical Service Providers",
  }};
  return kNames;
}

/// Healthcare scheme with its code map read from a `code,category_id,category_name` table.
inline TaxonomyScheme healthcare_scheme_from_csv(std::string_view table_csv, const std::string& origin = "<table>") {
  std::vector<CategoryLabel> cats;
  for (const char* name : healthcare_grouping_names()) cats.push_back({slugify(name), name});

  const auto rows = csv::parse(table_csv);
  if (rows.empty()) throw Error(ErrorCode::ParseError, origin + ": empty code table");
  const std::vector<std::string> header{"code", "category_id", "category_name"};
  if (rows.front().fields != header) {
    throw Error(ErrorCode::ParseError, origin + ": expected header code,category_id,category_name");
  }
  std::unordered_map<std::string, std::string> code_map;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != 3) {
      throw Error(ErrorCode::ParseError, origin + " row " + std::to_string(rows[r].line) + ": expected 3 fields");
    }
    const bool known = std::any_of(cats.begin(), cats.end(), [&](const CategoryLabel& c) { return c.id == f[1]; });
    if (!known) {
      throw Error(ErrorCode::ParseError,
                  origin + " row " + std::to_string(rows[r].line) + ": unknown category id '" + f[1] + "'");
    }
    code_map[f[0]] = f[1];
  }
  return TaxonomyScheme(Task::Healthcare, std::move(cats), std::move(code_map));
}

inline TaxonomyScheme healthcare_scheme(const std::filesystem::path& table_path) {
  return healthcare_scheme_from_csv(read_file(table_path), table_path.string());
}

// ---------------------------------------------------------------------------
// Code normalization

/// Category for a 4-digit SIC code: its first two characters. Codes are
/// strings end to end so leading zeros survive ("0116" keeps prefix "01").
inline const CategoryLabel& normalize_sic(std::string_view code, const TaxonomyScheme& scheme) {
  const bool digits = code.size() == 4 && std::all_of(code.begin(), code.end(), [](char c) {
                        return c >= '0' && c <= '9';
                      });
  if (!digits) throw Error(ErrorCode::MalformedCode, "SIC code must be 4 ASCII digits: '" + std::string(code) + "'");
  const auto prefix = code.substr(0, 2);
  const auto idx = scheme.index_of(prefix);
  if (!idx) {
    throw Error(ErrorCode::UnknownCategory,
                "SIC prefix '" + std::string(prefix) + "' of '" + std::string(code) + "' is not in the scheme");
  }
  return scheme.at(*idx);
}

inline const CategoryLabel& lookup_healthcare_category(std::string_view code, const TaxonomyScheme& scheme) {
  const bool shape = code.size() == 10 && std::all_of(code.begin(), code.end(), [](char c) {
                       return std::isalnum(static_cast<unsigned char>(c)) != 0;
                     });
  if (!shape) {
    throw Error(ErrorCode::MalformedCode, "taxonomy code must be 10 alphanumeric chars: '" + std::string(code) + "'");
  }
  std::string upper(code);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const auto it = scheme.code_map().find(upper);
  if (it == scheme.code_map().end()) throw Error(ErrorCode::UnknownCode, "taxonomy code '" + upper + "' not in table");
  return scheme.label(it->second);
}

/// Label for a raw code under the scheme's task.
inline const CategoryLabel& resolve_label(std::string_view raw_code, const TaxonomyScheme& scheme) {
  return scheme.task() == Task::Sic ? normalize_sic(raw_code, scheme) : lookup_healthcare_category(raw_code, scheme);
}

}  // namespace entclf
