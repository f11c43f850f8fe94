#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "entclf/corpus.hpp"
#include "entclf/error.hpp"
#include "entclf/features.hpp"
#include "entclf/prediction.hpp"
#include "entclf/taxonomy.hpp"
#include "entclf/util.hpp"

namespace entclf {

struct TrainConfig {
  int epochs = 3;
  std::size_t batch_size = 8;
  std::size_t eval_batch_size = 16;
  double learning_rate = 0.05;
  std::size_t warmup_steps = 500;
  double weight_decay = 0.01;
  std::uint64_t seed = 13;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (epochs <= 0) throw Error(ErrorCode::ConfigError, "epochs must be positive");
    if (batch_size == 0 || eval_batch_size == 0) throw Error(ErrorCode::ConfigError, "batch sizes must be positive");
    if (!(learning_rate >= 0.0) || !(weight_decay >= 0.0)) {
      throw Error(ErrorCode::ConfigError, "learning_rate and weight_decay must be non-negative");
    }
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && epsilon > 0)) {
      throw Error(ErrorCode::ConfigError, "bad Adam moment parameters");
    }
  }
};

/// Linear warmup to the peak over the first `warmup` steps, then linear decay
/// that reaches zero on the final step. Steps are 1-based.
/// A warmup longer than the run is clamped to the run length.
class LinearWarmupSchedule {
 public:
  LinearWarmupSchedule(std::size_t warmup_steps, std::size_t total_steps)
      : total_(total_steps), warmup_(std::min(warmup_steps, total_steps)) {}

  double multiplier(std::size_t step) const {
    if (step == 0 || step > total_) return 0.0;
    if (step <= warmup_) return static_cast<double>(step) / static_cast<double>(warmup_);
    return static_cast<double>(total_ - step) / static_cast<double>(total_ - warmup_);
  }

  std::size_t warmup() const { return warmup_; }
  std::size_t total() const { return total_; }

 private:
  std::size_t total_;
  std::size_t warmup_;
};

/// Adam with decoupled weight decay. For a schedule multiplier eta:
///   p <- p - eta * (lr * mhat / (sqrt(vhat) + eps) + wd * p)
/// Decay never passes through the moment estimates.
class AdamW {
 public:
  AdamW(std::size_t num_params, const TrainConfig& cfg) : cfg_(cfg), m_(num_params, 0.0), v_(num_params, 0.0) {}

  /// One update. `decay` selects whether this parameter group is decayed
  /// (weights are, biases are not). `t` is the 1-based step count.
  void step(std::span<double> params, std::span<const double> grads, std::size_t offset, std::size_t t, double eta,
            bool decay) {
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t));
    const double shrink = decay ? eta * cfg_.weight_decay : 0.0;
    const double step_size = eta * cfg_.learning_rate;
    for (std::size_t i = 0; i < params.size(); ++i) {
      double& m = m_[offset + i];
      double& v = v_[offset + i];
      const double g = grads[i];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      params[i] -= shrink * params[i];
      params[i] -= step_size * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Linear softmax classifier over hashed features. Only feature columns seen
/// in training are stored; absent columns have weight zero.
struct SoftmaxModel {
  FeaturizerConfig featurizer{};
  std::vector<std::string> categories;  // scheme order
  std::string scheme_fingerprint;
  std::vector<std::uint32_t> columns;   // sorted bucket ids
  std::vector<double> weights;          // columns.size() x C, row per column
  std::vector<double> bias;             // C
  double final_train_loss = std::numeric_limits<double>::quiet_NaN();

  std::size_t num_classes() const { return categories.size(); }

  static SoftmaxModel zeros(const TaxonomyScheme& scheme, std::vector<std::uint32_t> columns = {},
                            FeaturizerConfig featurizer = {}) {
    SoftmaxModel m;
    m.featurizer = featurizer;
    m.categories = scheme.ids();
    m.scheme_fingerprint = scheme.fingerprint();
    m.columns = std::move(columns);
    m.weights.assign(m.columns.size() * m.categories.size(), 0.0);
    m.bias.assign(m.categories.size(), 0.0);
    return m;
  }

  std::optional<std::size_t> column_of(std::uint32_t bucket) const {
    const auto it = std::lower_bound(columns.begin(), columns.end(), bucket);
    if (it == columns.end() || *it != bucket) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
  }

  std::vector<double> logits(const FeatureVector& x) const {
    std::vector<double> z = bias;
    const std::size_t C = num_classes();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto col = column_of(x.indices[i]);
      if (!col) continue;
      const double* w = &weights[*col * C];
      for (std::size_t c = 0; c < C; ++c) z[c] += w[c] * x.values[i];
    }
    return z;
  }

  bool finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    return std::all_of(weights.begin(), weights.end(), ok) && std::all_of(bias.begin(), bias.end(), ok);
  }
};

/// Numerically stable softmax (max-shifted).
inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

struct Example {
  FeatureVector x;  // indices are model column positions, not buckets
  std::size_t label = 0;
};

struct Gradient {
  std::vector<double> weights;
  std::vector<double> bias;
  double loss = 0.0;
};

/// Mean cross-entropy over the batch and its exact gradient. Example feature
/// indices address model columns directly. Weight decay is not included.
inline Gradient loss_and_grad(const SoftmaxModel& model, std::span<const Example> batch) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "loss_and_grad needs a nonempty batch");
  const std::size_t C = model.num_classes();
  Gradient g;
  g.weights.assign(model.weights.size(), 0.0);
  g.bias.assign(C, 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> z(C);
  for (const auto& ex : batch) {
    z = model.bias;
    for (std::size_t i = 0; i < ex.x.size(); ++i) {
      const double* w = &model.weights[ex.x.indices[i] * C];
      for (std::size_t c = 0; c < C; ++c) z[c] += w[c] * ex.x.values[i];
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double log_sum = mx + std::log(sum);
    g.loss += (log_sum - z[ex.label]) * inv_n;
    for (std::size_t c = 0; c < C; ++c) {
      const double delta = (std::exp(z[c] - log_sum) - (c == ex.label ? 1.0 : 0.0)) * inv_n;
      g.bias[c] += delta;
      for (std::size_t i = 0; i < ex.x.size(); ++i) g.weights[ex.x.indices[i] * C + c] += delta * ex.x.values[i];
    }
  }
  return g;
}

inline double mean_loss(const SoftmaxModel& model, std::span<const Example> examples) {
  return examples.empty() ? 0.0 : loss_and_grad(model, examples).loss;
}

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean of batch losses seen during the epoch
  std::optional<double> dev_accuracy;
};

struct TrainResult {
  SoftmaxModel model;
  std::vector<EpochStats> history;
  std::size_t total_steps = 0;
};

/// Prediction for one text: softmax scores, argmax label (lowest index wins
/// ties), confidence = max score.
inline Prediction predict(const SoftmaxModel& model, std::string_view text, std::string entity_id = {}) {
  const auto probs = softmax(model.logits(featurize(text, model.featurizer)));
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  Prediction p;
  p.entity_id = std::move(entity_id);
  p.label = model.categories.at(best);
  p.confidence = probs[best];
  p.scores = probs;
  return p;
}

inline std::vector<Prediction> predict_all(const SoftmaxModel& model,
                                           const std::vector<ClassificationInstance>& instances) {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(predict(model, inst.input_text, inst.entity_id));
  return out;
}

/// Mini-batch AdamW training from zero initialization. Deterministic for a
/// fixed config: the shuffle is a seeded Fisher-Yates over one generator.
inline TrainResult train(const std::vector<ClassificationInstance>& instances, const TaxonomyScheme& scheme,
                         const TrainConfig& config, const FeaturizerConfig& featurizer = {},
                         const std::vector<ClassificationInstance>* dev = nullptr) {
  config.validate();
  if (instances.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training instances");

  std::vector<FeatureVector> feats;
  std::vector<std::size_t> labels;
  feats.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.gold) throw Error(ErrorCode::MissingGold, "training instance '" + inst.entity_id + "' has no gold label");
    const auto idx = scheme.index_of(*inst.gold);
    if (!idx) throw Error(ErrorCode::UnknownLabel, "label '" + *inst.gold + "' of '" + inst.entity_id + "' not in scheme");
    labels.push_back(*idx);
    feats.push_back(featurize(inst.input_text, featurizer));
  }

  std::vector<std::uint32_t> columns;
  for (const auto& f : feats) columns.insert(columns.end(), f.indices.begin(), f.indices.end());
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());

  TrainResult result;
  result.model = SoftmaxModel::zeros(scheme, columns, featurizer);
  auto& model = result.model;

  std::vector<Example> examples(feats.size());
  for (std::size_t n = 0; n < feats.size(); ++n) {
    examples[n].label = labels[n];
    examples[n].x.values = feats[n].values;
    for (auto b : feats[n].indices) examples[n].x.indices.push_back(static_cast<std::uint32_t>(*model.column_of(b)));
  }

  const std::size_t steps_per_epoch = (examples.size() + config.batch_size - 1) / config.batch_size;
  result.total_steps = steps_per_epoch * static_cast<std::size_t>(config.epochs);
  const LinearWarmupSchedule schedule(config.warmup_steps, result.total_steps);
  AdamW opt(model.weights.size() + model.bias.size(), config);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::vector<Example> batch;
  std::size_t t = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t j = start; j < std::min(order.size(), start + config.batch_size); ++j) {
        batch.push_back(examples[order[j]]);
      }
      const auto g = loss_and_grad(model, batch);
      loss_sum += g.loss;
      ++t;
      const double eta = schedule.multiplier(t);
      opt.step(model.weights, g.weights, 0, t, eta, true);
      opt.step(model.bias, g.bias, model.weights.size(), t, eta, false);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
    if (dev && !dev->empty()) {
      std::size_t correct = 0, total = 0;
      for (std::size_t s = 0; s < dev->size(); s += config.eval_batch_size) {
        for (std::size_t j = s; j < std::min(dev->size(), s + config.eval_batch_size); ++j) {
          const auto& inst = (*dev)[j];
          if (!inst.gold) continue;
          ++total;
          if (predict(model, inst.input_text).label == *inst.gold) ++correct;
        }
      }
      if (total) stats.dev_accuracy = static_cast<double>(correct) / static_cast<double>(total);
    }
    result.history.push_back(stats);
  }
  model.final_train_loss = mean_loss(model, examples);
  return result;
}

// ---------------------------------------------------------------------------
// Model file

inline constexpr std::string_view kModelFormat = "entclf-softmax";
inline constexpr int kModelVersion = 1;

inline std::string serialize_model(const SoftmaxModel& m) {
  const std::size_t C = m.num_classes();
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["buckets"] = m.featurizer.buckets;
  j["classes"] = C;
  j["categories"] = m.categories;
  j["scheme_fingerprint"] = m.scheme_fingerprint;
  j["featurizer"] = {{"word_cap", m.featurizer.word_cap}, {"fingerprint", m.featurizer.fingerprint()}};
  j["final_train_loss"] = m.final_train_loss;
  j["bias"] = m.bias;
  auto cols = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < m.columns.size(); ++k) {
    nlohmann::ordered_json col;
    col["bucket"] = m.columns[k];
    col["weights"] = std::vector<double>(m.weights.begin() + static_cast<std::ptrdiff_t>(k * C),
                                         m.weights.begin() + static_cast<std::ptrdiff_t>((k + 1) * C));
    cols.push_back(std::move(col));
  }
  j["columns"] = std::move(cols);
  return j.dump() + "\n";
}

inline SoftmaxModel parse_model(std::string_view text, const TaxonomyScheme& scheme) {
  SoftmaxModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat || j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::ModelMismatch, "unsupported model format/version");
    }
    m.featurizer.buckets = j.at("buckets").get<std::uint32_t>();
    m.featurizer.word_cap = j.at("featurizer").at("word_cap").get<std::size_t>();
    if (j.at("featurizer").at("fingerprint").get<std::string>() != m.featurizer.fingerprint()) {
      throw Error(ErrorCode::ModelMismatch, "featurizer fingerprint does not match this build");
    }
    m.categories = j.at("categories").get<std::vector<std::string>>();
    m.scheme_fingerprint = j.at("scheme_fingerprint").get<std::string>();
    m.final_train_loss = j.at("final_train_loss").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                            : j.at("final_train_loss").get<double>();
    m.bias = j.at("bias").get<std::vector<double>>();
    const std::size_t C = m.categories.size();
    if (j.at("classes").get<std::size_t>() != C || m.bias.size() != C) {
      throw Error(ErrorCode::ModelMismatch, "class count inconsistent");
    }
    for (const auto& col : j.at("columns")) {
      const auto b = col.at("bucket").get<std::uint32_t>();
      if (!m.columns.empty() && b <= m.columns.back()) throw Error(ErrorCode::ModelMismatch, "columns not sorted");
      m.columns.push_back(b);
      const auto w = col.at("weights").get<std::vector<double>>();
      if (w.size() != C) throw Error(ErrorCode::ModelMismatch, "column width != class count");
      m.weights.insert(m.weights.end(), w.begin(), w.end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
  }
  if (m.scheme_fingerprint != scheme.fingerprint() || m.categories != scheme.ids()) {
    throw Error(ErrorCode::ModelMismatch, "model was trained for a different label scheme");
  }
  if (!m.finite()) throw Error(ErrorCode::ModelMismatch, "model has non-finite parameters");
  return m;
}

inline void save_model(const SoftmaxModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(m));
}

inline SoftmaxModel load_model(const std::filesystem::path& path, const TaxonomyScheme& scheme) {
  return parse_model(read_file(path), scheme);
}

}  // namespace entclf
