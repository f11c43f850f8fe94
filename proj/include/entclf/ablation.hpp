#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "entclf/acquisition.hpp"
#include "entclf/corpus.hpp"
#include "entclf/dataset.hpp"
#include "entclf/metrics.hpp"
#include "entclf/softmax.hpp"

namespace entclf {

inline std::vector<EntityRecord> records_in(const Dataset& ds, Split s) {
  std::vector<EntityRecord> out;
  for (const auto& r : ds.records) {
    if (r.split == s) out.push_back(r);
  }
  return out;
}

struct NativeRun {
  TrainResult trained;
  std::vector<Prediction> predictions;  // test split, ordered by entity_id
  ConfusionMatrix confusion;
  MacroReport report;
};

/// Train on the train split, evaluate on the test split.
inline NativeRun train_and_evaluate(const Dataset& ds, const std::map<std::string, AcquiredText>& texts,
                                    const std::string& signature, const TrainConfig& config,
                                    const FeaturizerConfig& featurizer = {}) {
  const auto train_set = build_instances(records_in(ds, Split::Train), texts, signature).instances;
  const auto dev_set = build_instances(records_in(ds, Split::Dev), texts, signature).instances;
  const auto test_set = build_instances(records_in(ds, Split::Test), texts, signature).instances;

  NativeRun run{train(train_set, ds.scheme, config, featurizer, &dev_set), {}, {}, {}};
  run.predictions = predict_all(run.trained.model, test_set);
  const auto golds = golds_for(run.predictions, ds);
  std::vector<std::string> labels;
  for (const auto& p : run.predictions) labels.push_back(p.label);
  run.confusion = confusion(golds, labels, ds.scheme);
  run.report = macro_report(run.confusion);
  return run;
}

struct AblationResult {
  std::size_t k = 0;
  MacroReport report;
};

inline std::vector<std::size_t> default_ablation_ks() { return {1, 5, 10, 15, 20}; }

/// Retrain and evaluate at each snippet depth in ascending order, re-aggregating
/// GSnip from deep cached search results. Every entity needs depth >= max(ks).
inline std::vector<AblationResult> ablate_snippets(const Dataset& ds, const std::map<std::string, AcquiredText>& deep,
                                                   std::vector<std::size_t> ks, const TrainConfig& config,
                                                   const FeaturizerConfig& featurizer = {}) {
  if (ks.empty()) throw Error(ErrorCode::InvalidArgument, "no snippet counts given");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() == 0) throw Error(ErrorCode::InvalidArgument, "snippet count must be >= 1");

  for (const auto& [id, text] : deep) truncate_gsnip(text, ks.back());

  std::vector<AblationResult> out;
  for (auto k : ks) {
    std::map<std::string, AcquiredText> texts;
    for (const auto& [id, text] : deep) texts.emplace(id, truncate_gsnip(text, k));
    out.push_back({k, train_and_evaluate(ds, texts, "gsnip" + std::to_string(k), config, featurizer).report});
  }
  return out;
}

inline std::string ablation_csv(const std::vector<AblationResult>& rows) {
  std::string out = "k,macro_p,macro_r,macro_f1\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + "," + fmt6(r.report.macro_p) + "," + fmt6(r.report.macro_r) + "," +
           fmt6(r.report.macro_f1) + "\n";
  }
  return out;
}

}  // namespace entclf
