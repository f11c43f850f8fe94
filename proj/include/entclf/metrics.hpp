#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "entclf/csv.hpp"
#include "entclf/dataset.hpp"
#include "entclf/error.hpp"
#include "entclf/prediction.hpp"
#include "entclf/taxonomy.hpp"

namespace entclf {

/// Gold x predicted counts over the scheme's classes; column C holds INVALID
/// (and any label outside the scheme).
struct ConfusionMatrix {
  std::vector<CategoryLabel> classes;
  std::vector<std::uint64_t> counts;  // C rows x (C + 1) columns

  std::size_t num_classes() const { return classes.size(); }
  std::uint64_t at(std::size_t gold, std::size_t pred) const { return counts[gold * (num_classes() + 1) + pred]; }
  std::uint64_t& at(std::size_t gold, std::size_t pred) { return counts[gold * (num_classes() + 1) + pred]; }
  std::uint64_t invalid(std::size_t gold) const { return at(gold, num_classes()); }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

inline ConfusionMatrix empty_confusion(const TaxonomyScheme& scheme) {
  ConfusionMatrix m;
  m.classes = scheme.categories();
  m.counts.assign(scheme.size() * (scheme.size() + 1), 0);
  return m;
}

inline ConfusionMatrix confusion(const std::vector<std::string>& golds, const std::vector<std::string>& preds,
                                 const TaxonomyScheme& scheme) {
  if (golds.size() != preds.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(golds.size()) + " golds vs " + std::to_string(preds.size()) + " predictions");
  }
  auto m = empty_confusion(scheme);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto g = scheme.index_of(golds[i]);
    if (!g) throw Error(ErrorCode::UnknownGold, "gold label '" + golds[i] + "' not in scheme");
    const auto p = scheme.index_of(preds[i]);
    ++m.at(*g, p ? *p : scheme.size());
  }
  return m;
}

struct ClassMetrics {
  CategoryLabel label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct MacroReport {
  std::vector<ClassMetrics> per_class;
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f1 = 0.0;
};

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

/// Per-class P/R/F1 and their unweighted means over every scheme class,
/// zero-support classes included. Macro F1 is the mean of per-class F1, not
/// the harmonic mean of macro P and macro R.
inline MacroReport macro_report(const ConfusionMatrix& m) {
  const std::size_t C = m.num_classes();
  MacroReport r;
  for (std::size_t c = 0; c < C; ++c) {
    std::uint64_t predicted = 0, support = 0;
    for (std::size_t g = 0; g < C; ++g) predicted += m.at(g, c);
    for (std::size_t p = 0; p <= C; ++p) support += m.at(c, p);
    const auto tp = static_cast<double>(m.at(c, c));
    ClassMetrics cm;
    cm.label = m.classes[c];
    cm.precision = safe_ratio(tp, static_cast<double>(predicted));
    cm.recall = safe_ratio(tp, static_cast<double>(support));
    cm.f1 = f1_of(cm.precision, cm.recall);
    cm.support = support;
    r.macro_p += cm.precision;
    r.macro_r += cm.recall;
    r.macro_f1 += cm.f1;
    r.per_class.push_back(std::move(cm));
  }
  if (C) {
    r.macro_p /= static_cast<double>(C);
    r.macro_r /= static_cast<double>(C);
    r.macro_f1 /= static_cast<double>(C);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Selective prediction

struct ThresholdPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double coverage = 0.0;
  std::size_t n_labeled = 0;
};

inline std::vector<double> default_thresholds() { return {0.60, 0.65, 0.70, 0.75, 0.80, 0.85}; }

inline bool kept_at(const Prediction& p, double threshold, bool inclusive) {
  return inclusive ? *p.confidence >= threshold : *p.confidence > threshold;
}

/// Label only predictions whose confidence exceeds t (strictly, unless
/// `inclusive`). Precision is macro precision over the kept set; recall keeps
/// the full gold set as denominator, so abstentions count as misses.
inline std::vector<ThresholdPoint> threshold_sweep(const std::vector<Prediction>& preds,
                                                   const std::vector<std::string>& golds, const TaxonomyScheme& scheme,
                                                   const std::vector<double>& thresholds = default_thresholds(),
                                                   bool inclusive = false) {
  if (preds.size() != golds.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(golds.size()) + " golds vs " + std::to_string(preds.size()) + " predictions");
  }
  for (const auto& p : preds) {
    if (!p.confidence) {
      throw Error(ErrorCode::MissingConfidence,
                  "prediction for '" + p.entity_id + "' has no confidence; sweeps need the native backend");
    }
  }
  std::vector<std::uint64_t> support(scheme.size(), 0);
  for (const auto& g : golds) {
    const auto idx = scheme.index_of(g);
    if (!idx) throw Error(ErrorCode::UnknownGold, "gold label '" + g + "' not in scheme");
    ++support[*idx];
  }

  std::vector<ThresholdPoint> out;
  for (double t : thresholds) {
    std::vector<std::string> kept_golds, kept_preds;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (kept_at(preds[i], t, inclusive)) {
        kept_golds.push_back(golds[i]);
        kept_preds.push_back(preds[i].label);
      }
    }
    const auto kept = confusion(kept_golds, kept_preds, scheme);
    ThresholdPoint pt;
    pt.threshold = t;
    pt.n_labeled = kept_golds.size();
    pt.coverage = safe_ratio(static_cast<double>(pt.n_labeled), static_cast<double>(preds.size()));
    pt.precision = macro_report(kept).macro_p;
    double recall_sum = 0.0;
    for (std::size_t c = 0; c < scheme.size(); ++c) {
      recall_sum += safe_ratio(static_cast<double>(kept.at(c, c)), static_cast<double>(support[c]));
    }
    pt.recall = scheme.size() ? recall_sum / static_cast<double>(scheme.size()) : 0.0;
    out.push_back(pt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-category comparison

struct CategoryDelta {
  CategoryLabel label;
  double f1_a = 0.0;
  double f1_b = 0.0;
  double delta = 0.0;  // f1_b - f1_a
};

inline std::vector<CategoryDelta> per_category_table(const MacroReport& a, const MacroReport& b) {
  if (a.per_class.size() != b.per_class.size()) throw Error(ErrorCode::SchemeMismatch, "reports cover different class counts");
  std::vector<CategoryDelta> rows;
  for (std::size_t i = 0; i < a.per_class.size(); ++i) {
    if (a.per_class[i].label.id != b.per_class[i].label.id) {
      throw Error(ErrorCode::SchemeMismatch, "class " + std::to_string(i) + " differs: '" + a.per_class[i].label.id +
                                                 "' vs '" + b.per_class[i].label.id + "'");
    }
    rows.push_back({a.per_class[i].label, a.per_class[i].f1, b.per_class[i].f1, b.per_class[i].f1 - a.per_class[i].f1});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Alignment and output

/// Gold ids for predictions, looked up in the dataset by entity_id.
inline std::vector<std::string> golds_for(const std::vector<Prediction>& preds, const Dataset& ds) {
  std::unordered_map<std::string, const EntityRecord*> by_id;
  for (const auto& r : ds.records) by_id.emplace(r.entity_id, &r);
  std::vector<std::string> golds;
  golds.reserve(preds.size());
  for (const auto& p : preds) {
    const auto it = by_id.find(p.entity_id);
    if (it == by_id.end()) throw Error(ErrorCode::UnknownGold, "no dataset record for '" + p.entity_id + "'");
    golds.push_back(it->second->label.id);
  }
  return golds;
}

inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline nlohmann::ordered_json report_json(const MacroReport& r, const ConfusionMatrix& m,
                                          const std::string& config_fingerprint, const std::string& run_id = {}) {
  nlohmann::ordered_json j;
  if (!run_id.empty()) j["run_id"] = run_id;
  j["config_fingerprint"] = config_fingerprint;
  auto per = nlohmann::ordered_json::array();
  for (const auto& c : r.per_class) {
    nlohmann::ordered_json row;
    row["label"] = c.label.id;
    row["name"] = c.label.display_name;
    row["precision"] = c.precision;
    row["recall"] = c.recall;
    row["f1"] = c.f1;
    row["support"] = c.support;
    per.push_back(std::move(row));
  }
  j["per_class"] = std::move(per);
  j["macro_p"] = r.macro_p;
  j["macro_r"] = r.macro_r;
  j["macro_f1"] = r.macro_f1;
  nlohmann::ordered_json conf;
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : m.classes) cols.push_back(c.id);
  cols.push_back(std::string(kInvalidLabel));
  conf["columns"] = std::move(cols);
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < m.num_classes(); ++g) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p <= m.num_classes(); ++p) row.push_back(m.at(g, p));
    rows.push_back(std::move(row));
  }
  conf["counts"] = std::move(rows);
  j["confusion"] = std::move(conf);
  return j;
}

inline std::string sweep_csv(const std::vector<ThresholdPoint>& points) {
  std::string out = "threshold,precision,recall,coverage,n_labeled\n";
  for (const auto& p : points) {
    out += fmt6(p.threshold) + "," + fmt6(p.precision) + "," + fmt6(p.recall) + "," + fmt6(p.coverage) + "," +
           std::to_string(p.n_labeled) + "\n";
  }
  return out;
}

inline std::string per_category_csv(const std::vector<CategoryDelta>& rows) {
  std::string out = "category,name,f1_a,f1_b,delta\n";
  for (const auto& r : rows) {
    out += csv::escape(r.label.id) + "," + csv::escape(r.label.display_name) + "," + fmt6(r.f1_a) + "," +
           fmt6(r.f1_b) + "," + fmt6(r.delta) + "\n";
  }
  return out;
}

inline MacroReport report_from_json(const nlohmann::json& j, const TaxonomyScheme& scheme) {
  MacroReport r;
  for (const auto& row : j.at("per_class")) {
    ClassMetrics c;
    c.label = scheme.label(row.at("label").get<std::string>());
    c.precision = row.at("precision").get<double>();
    c.recall = row.at("recall").get<double>();
    c.f1 = row.at("f1").get<double>();
    c.support = row.at("support").get<std::uint64_t>();
    r.per_class.push_back(std::move(c));
  }
  r.macro_p = j.at("macro_p").get<double>();
  r.macro_r = j.at("macro_r").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  return r;
}

}  // namespace entclf
