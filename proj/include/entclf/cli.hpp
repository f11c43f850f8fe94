#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "entclf/ablation.hpp"
#include "entclf/acquire.hpp"
#include "entclf/config.hpp"
#include "entclf/corpus.hpp"
#include "entclf/dataset.hpp"
#include "entclf/manifest.hpp"
#include "entclf/metrics.hpp"
#include "entclf/remote.hpp"
#include "entclf/softmax.hpp"
#include "entclf/taxonomy.hpp"

namespace entclf {

namespace fs = std::filesystem;

namespace cli {

struct Globals {
  std::string config_path;
  std::string run_id;
  std::string runs_dir = "runs";
  bool refresh = false;
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

/// Everything a command needs, resolved once from the globals.
class Context {
 public:
  Context(const Globals& g, std::ostream& out, std::ostream& err) : out(out), err(err), globals_(g) {
    if (!g.config_path.empty()) cfg.load_file(g.config_path);
    for (const auto& o : g.overrides) cfg.apply_override(o);
    if (g.seed) {
      cfg.set("train.seed", std::to_string(*g.seed));
      cfg.set("data.seed", std::to_string(*g.seed));
    }
    cfg.validate();
  }

  Config cfg;
  std::ostream& out;
  std::ostream& err;

  bool refresh() const { return globals_.refresh; }
  bool strict() const { return globals_.strict; }

  const TaxonomyScheme& scheme() {
    if (!scheme_) {
      const auto task = parse_task(cfg.str("task.name"));
      if (task == Task::Sic) {
        scheme_ = sic_scheme();
      } else {
        const auto& table = cfg.str("task.taxonomy");
        scheme_ = healthcare_scheme(table.empty() ? fs::path(kDataDir) / "healthcare_taxonomy.csv" : fs::path(table));
      }
    }
    return *scheme_;
  }

  Task task() { return scheme().task(); }

  const Dataset& dataset() {
    if (!dataset_) {
      const auto& path = cfg.str("data.dataset");
      if (path.empty()) throw Error(ErrorCode::ConfigError, "data.dataset is not set");
      LoadOptions opts;
      opts.ratios = {cfg.real("data.train_ratio"), cfg.real("data.dev_ratio"), cfg.real("data.test_ratio")};
      opts.seed = static_cast<std::uint64_t>(cfg.integer("data.seed"));
      dataset_ = load_dataset(path, scheme(), opts);
    }
    return *dataset_;
  }

  std::string run_id() {
    if (!globals_.run_id.empty()) return globals_.run_id;
    return "run-" + sha256_hex(cfg.fingerprint() + dataset().fingerprint()).substr(0, 12);
  }

  fs::path run_dir() { return fs::path(globals_.runs_dir) / run_id(); }

  fs::path cache_dir() const { return cfg.str("acquisition.cache_dir"); }

  SourceSpec spec_for(Source s) const {
    SourceSpec spec;
    spec.source = s;
    if (s == Source::Gsnip) {
      spec.k = cfg.count("search.top_k");
    } else {
      spec.model = cfg.str(s == Source::GptSum ? "llm.model" : "llama.model");
      spec.max_tokens = static_cast<int>(cfg.integer("llm.max_tokens"));
    }
    return spec;
  }

  /// `gsnip`, `gptsum`, `gsnip+gptsum`; `combined` means gsnip+gptsum.
  std::vector<Source> corpus_parts() const { return parse_parts(cfg.str("corpus.source")); }

  std::vector<Source> parse_parts(const std::string& text) const {
    if (ascii_lower(trim(text)) == "combined") return {Source::Gsnip, Source::GptSum};
    std::vector<Source> parts;
    for (const auto& p : split(text, '+')) {
      const auto s = parse_source(p);
      if (s == Source::Combined) throw Error(ErrorCode::ConfigError, "'combined' cannot be nested in '" + text + "'");
      parts.push_back(s);
    }
    return parts;
  }

  std::string signature_of(const std::vector<Source>& parts) const {
    std::vector<std::string> sigs;
    for (auto s : parts) sigs.push_back(spec_for(s).signature());
    return join(sigs, "+");
  }

  AcquisitionConfig acquisition_config() const {
    AcquisitionConfig ac;
    ac.top_k = cfg.count("search.top_k");
    ac.max_parallel = cfg.count("acquisition.max_parallel");
    ac.retry = {static_cast<int>(cfg.integer("acquisition.max_attempts")), cfg.real("acquisition.backoff_s")};
    ac.cache_dir = cache_dir();
    ac.summary_max_tokens = static_cast<int>(cfg.integer("llm.max_tokens"));
    ac.requests_per_second = cfg.real("acquisition.requests_per_second");
    ac.refusal_phrases.clear();
    for (const auto& p : cfg.list("acquisition.refusal_phrases")) ac.refusal_phrases.push_back(ascii_lower(p));
    return ac;
  }

  JsonHttpClient http(const std::string& url, const char* key_env) {
    if (!limiter_) limiter_ = std::make_shared<RateLimiter>(cfg.real("acquisition.requests_per_second"));
    const auto ac = acquisition_config();
    return JsonHttpClient(url, require_env(key_env), ac.retry, limiter_, cfg.real("acquisition.timeout_s"));
  }

  std::string llama_url() const {
    const auto& u = cfg.str("llama.url");
    return u.empty() ? cfg.str("llm.url") : u;
  }

  TrainConfig train_config() const {
    TrainConfig tc;
    tc.epochs = static_cast<int>(cfg.integer("train.epochs"));
    tc.batch_size = cfg.count("train.batch_size");
    tc.eval_batch_size = cfg.count("train.eval_batch_size");
    tc.learning_rate = cfg.real("train.learning_rate");
    tc.warmup_steps = cfg.count("train.warmup_steps");
    tc.weight_decay = cfg.real("train.weight_decay");
    tc.seed = static_cast<std::uint64_t>(cfg.integer("train.seed"));
    tc.validate();
    return tc;
  }

  FeaturizerConfig featurizer() const {
    FeaturizerConfig fc;
    const auto buckets = cfg.count("train.buckets");
    if (buckets == 0 || buckets > (1ull << 31)) throw Error(ErrorCode::ConfigError, "train.buckets out of range");
    fc.buckets = static_cast<std::uint32_t>(buckets);
    fc.word_cap = cfg.count("train.word_cap");
    return fc;
  }

  /// Write the manifest on first use of a run; afterwards require that the
  /// configuration and dataset are unchanged.
  void ensure_manifest() {
    const auto path = run_dir() / "manifest.json";
    const auto& ds = dataset();
    if (fs::exists(path)) {
      const auto m = read_manifest(path);
      if (m.config_fingerprint != cfg.fingerprint() || m.dataset_fingerprint != ds.fingerprint()) {
        throw Error(ErrorCode::ConfigError, "run '" + run_id() + "' was created with a different configuration or dataset; "
                                            "use a new --run-id");
      }
      return;
    }
    RunManifest m;
    m.run_id = run_id();
    m.config_fingerprint = cfg.fingerprint();
    m.config = cfg.values();
    m.dataset_fingerprint = ds.fingerprint();
    for (const auto& s : cfg.list("acquisition.sources")) m.source_signatures.push_back(signature_of(parse_parts(s)));
    m.source_signatures.push_back(signature_of(corpus_parts()));
    std::sort(m.source_signatures.begin(), m.source_signatures.end());
    m.source_signatures.erase(std::unique(m.source_signatures.begin(), m.source_signatures.end()),
                              m.source_signatures.end());
    m.created_at = utc_timestamp();
    m.deviations = standard_deviations(cfg);
    write_manifest(m, path);
  }

  /// Acquired texts for the corpus source, read from the cache only.
  std::map<std::string, AcquiredText> cached_texts(const std::vector<Source>& parts) {
    TextCache cache(cache_dir());
    const Acquirer lookup(task(), cache, nullptr, nullptr, nullptr, acquisition_config());
    std::map<std::string, AcquiredText> texts;
    for (const auto& rec : dataset().records) {
      std::vector<AcquiredText> found;
      for (auto s : parts) {
        if (auto hit = lookup.cached(rec, spec_for(s))) found.push_back(std::move(*hit));
      }
      if (found.empty()) continue;
      texts.emplace(rec.entity_id, found.size() == 1 ? found.front() : combine_texts(found));
    }
    return texts;
  }

  std::vector<Prediction> predictions(const std::string& override_path) {
    const fs::path path = override_path.empty() ? run_dir() / "predictions.jsonl" : fs::path(override_path);
    if (!fs::exists(path)) throw Error(ErrorCode::IoError, "no predictions at " + path.string() + "; run predict first");
    return read_predictions(path);
  }

 private:
  Globals globals_;
  std::optional<TaxonomyScheme> scheme_;
  std::optional<Dataset> dataset_;
  std::shared_ptr<RateLimiter> limiter_;
};

inline fs::path require_file(const fs::path& p, const char* hint) {
  if (!fs::exists(p)) throw Error(ErrorCode::IoError, "missing " + p.string() + "; run " + hint + " first");
  return p;
}

inline std::string per_class_csv(const MacroReport& r) {
  std::string out = "label,name,precision,recall,f1,support\n";
  for (const auto& c : r.per_class) {
    out += csv::escape(c.label.id) + "," + csv::escape(c.label.display_name) + "," + fmt6(c.precision) + "," +
           fmt6(c.recall) + "," + fmt6(c.f1) + "," + std::to_string(c.support) + "\n";
  }
  return out;
}

/// report.json + per_class.csv under the run directory, with a file prefix.
inline MacroReport write_report(Context& ctx, const std::vector<Prediction>& preds, const std::string& prefix) {
  const auto golds = golds_for(preds, ctx.dataset());
  std::vector<std::string> labels;
  for (const auto& p : preds) labels.push_back(p.label);
  const auto m = confusion(golds, labels, ctx.scheme());
  const auto r = macro_report(m);
  write_file_atomic(ctx.run_dir() / (prefix + "report.json"),
                    dump_json(report_json(r, m, ctx.cfg.fingerprint(), ctx.run_id()), 2) + "\n");
  write_file_atomic(ctx.run_dir() / (prefix + "per_class.csv"), per_class_csv(r));
  ctx.out << prefix << "report: n=" << preds.size() << " macro_p=" << fmt6(r.macro_p) << " macro_r=" << fmt6(r.macro_r)
          << " macro_f1=" << fmt6(r.macro_f1) << "\n";
  return r;
}

// ---------------------------------------------------------------------------
// Commands

inline void cmd_acquire(Context& ctx, std::vector<std::string> sources) {
  if (sources.empty()) sources = ctx.cfg.list("acquisition.sources");
  if (sources.empty()) throw Error(ErrorCode::ConfigError, "no sources requested");
  std::vector<Source> wanted;
  for (const auto& s : sources) {
    for (auto part : ctx.parse_parts(s)) {
      if (std::find(wanted.begin(), wanted.end(), part) == wanted.end()) wanted.push_back(part);
    }
  }
  std::optional<SearchClient> search;
  std::optional<LlmClient> gpt, llama;
  for (auto s : wanted) {
    if (s == Source::Gsnip && !search) search.emplace(ctx.http(ctx.cfg.str("search.url"), "SEARCH_API_KEY"));
    if (s == Source::GptSum && !gpt) gpt.emplace(ctx.http(ctx.cfg.str("llm.url"), "LLM_API_KEY"));
    if (s == Source::LlamaSum && !llama) llama.emplace(ctx.http(ctx.llama_url(), "LLM_API_KEY"));
  }
  const auto& ds = ctx.dataset();
  ctx.ensure_manifest();

  TextCache cache(ctx.cache_dir());
  const Acquirer acq(ctx.task(), cache, search ? &*search : nullptr, gpt ? &*gpt : nullptr, llama ? &*llama : nullptr,
                     ctx.acquisition_config(), ctx.refresh());
  std::optional<AcquireFailure> first_failure;
  for (auto s : wanted) {
    const auto spec = ctx.spec_for(s);
    const auto rep = acq.acquire_all(ds.records, spec);
    ctx.out << "acquire " << spec.signature() << ": entities=" << ds.records.size() << " fetched=" << rep.fetched
            << " cache_hits=" << rep.cache_hits << " refusals=" << rep.refusals << " failures=" << rep.failures.size()
            << "\n";
    for (const auto& f : rep.failures) ctx.err << "  " << f.entity_id << ": " << f.message << "\n";
    if (!rep.failures.empty() && !first_failure) first_failure = rep.failures.front();
  }
  if (first_failure && ctx.strict()) {
    throw Error(first_failure->code, "acquisition failed for '" + first_failure->entity_id + "' (strict mode)");
  }
}

inline void cmd_build(Context& ctx) {
  ctx.ensure_manifest();
  const auto& ds = ctx.dataset();
  const auto parts = ctx.corpus_parts();
  const auto signature = ctx.signature_of(parts);
  const auto texts = ctx.cached_texts(parts);
  BuildOptions opts;
  opts.strict = ctx.strict();
  opts.drop_empty = ctx.cfg.boolean("corpus.drop_empty");

  const auto dir = ctx.run_dir();
  for (auto split : {Split::Train, Split::Dev, Split::Test}) {
    const auto res = build_instances(records_in(ds, split), texts, signature, opts);
    const std::string name(to_string(split));
    emit_tabular(res.instances, dir / "corpus" / (name + ".jsonl"));
    emit_chat_finetune(res.instances, ds.scheme, split != Split::Test, dir / ("chat_" + name + ".jsonl"));
    ctx.out << "build " << name << ": instances=" << res.instances.size() << " empty=" << res.empty_descriptions
            << " missing=" << res.missing << " source=" << signature << "\n";
  }
}

inline void cmd_train(Context& ctx) {
  ctx.ensure_manifest();
  const auto dir = ctx.run_dir();
  const auto train_set = read_tabular(require_file(dir / "corpus" / "train.jsonl", "build"));
  const auto dev_path = dir / "corpus" / "dev.jsonl";
  const auto dev_set = fs::exists(dev_path) ? read_tabular(dev_path) : std::vector<ClassificationInstance>{};
  const auto result = train(train_set, ctx.scheme(), ctx.train_config(), ctx.featurizer(), &dev_set);
  for (const auto& e : result.history) {
    ctx.out << "epoch " << e.epoch << ": train_loss=" << fmt6(e.train_loss);
    if (e.dev_accuracy) ctx.out << " dev_acc=" << fmt6(*e.dev_accuracy);
    ctx.out << "\n";
  }
  save_model(result.model, dir / "model.json");
  ctx.out << "train: steps=" << result.total_steps << " columns=" << result.model.columns.size()
          << " final_loss=" << fmt6(result.model.final_train_loss) << "\n";
}

inline std::string finetuned_model_id(Context& ctx) {
  const auto path = ctx.run_dir() / "finetune.json";
  if (!fs::exists(path)) return {};
  const auto j = nlohmann::json::parse(read_file(path));
  return j.value("fine_tuned_model", std::string());
}

inline void cmd_predict(Context& ctx, const std::string& backend, std::string model_id) {
  ctx.ensure_manifest();
  const auto dir = ctx.run_dir();
  const auto test_set = read_tabular(require_file(dir / "corpus" / "test.jsonl", "build"));
  std::vector<Prediction> preds;
  if (backend == "native") {
    const auto model = load_model(require_file(dir / "model.json", "train"), ctx.scheme());
    preds = predict_all(model, test_set);
  } else if (backend == "remote") {
    if (model_id.empty()) model_id = finetuned_model_id(ctx);
    if (model_id.empty()) throw Error(ErrorCode::ConfigError, "remote backend needs --model-id or a finished finetune");
    const auto records = read_chat_finetune(require_file(dir / "chat_test.jsonl", "build"));
    if (records.size() != test_set.size()) throw Error(ErrorCode::LengthMismatch, "chat_test.jsonl and corpus/test.jsonl differ");
    const LlmClient client(ctx.http(ctx.cfg.str("llm.url"), "LLM_API_KEY"));
    for (std::size_t i = 0; i < records.size(); ++i) {
      preds.push_back(remote_infer(model_id, records[i], test_set[i].entity_id, client, ctx.scheme()));
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown backend '" + backend + "' (expected native|remote)");
  }
  write_predictions(preds, dir / "predictions.jsonl");
  ctx.out << "predict " << backend << ": n=" << preds.size() << "\n";
}

inline void cmd_eval(Context& ctx, const std::string& predictions_path, const std::string& compare) {
  ctx.ensure_manifest();
  const auto report = write_report(ctx, ctx.predictions(predictions_path), "");
  if (!compare.empty()) {
    const auto other = report_from_json(nlohmann::json::parse(read_file(require_file(compare, "eval"))), ctx.scheme());
    write_file_atomic(ctx.run_dir() / "per_category.csv", per_category_csv(per_category_table(other, report)));
  }
}

inline void cmd_sweep(Context& ctx, const std::string& predictions_path, bool inclusive) {
  ctx.ensure_manifest();
  const auto preds = ctx.predictions(predictions_path);
  const auto points = threshold_sweep(preds, golds_for(preds, ctx.dataset()), ctx.scheme(),
                                      ctx.cfg.reals("eval.thresholds"), inclusive || ctx.cfg.boolean("eval.inclusive"));
  write_file_atomic(ctx.run_dir() / "sweep.csv", sweep_csv(points));
  for (const auto& p : points) {
    ctx.out << "sweep t=" << fmt6(p.threshold) << " precision=" << fmt6(p.precision) << " recall=" << fmt6(p.recall)
            << " coverage=" << fmt6(p.coverage) << "\n";
  }
}

inline void cmd_ablate(Context& ctx, std::vector<std::size_t> ks) {
  ctx.ensure_manifest();
  if (ks.empty()) ks = ctx.cfg.counts("ablate.ks");
  const auto& ds = ctx.dataset();
  const auto deep = ctx.cached_texts({Source::Gsnip});
  for (const auto& r : ds.records) {
    if (!deep.count(r.entity_id)) {
      throw Error(ErrorCode::MissingText, "no cached GSNIP at depth " + ctx.cfg.str("search.top_k") + " for '" +
                                              r.entity_id + "'; run acquire first");
    }
  }
  const auto rows = ablate_snippets(ds, deep, ks, ctx.train_config(), ctx.featurizer());
  write_file_atomic(ctx.run_dir() / "ablation.csv", ablation_csv(rows));
  for (const auto& r : rows) ctx.out << "ablate k=" << r.k << " macro_f1=" << fmt6(r.report.macro_f1) << "\n";
}

inline void cmd_baseline(Context& ctx, std::string context_source) {
  ctx.ensure_manifest();
  if (context_source.empty()) context_source = ctx.cfg.str("baseline.context");
  const bool with_context = ascii_lower(context_source) != "none";
  std::map<std::string, AcquiredText> texts;
  if (with_context) texts = ctx.cached_texts(ctx.parse_parts(context_source));
  const LlmClient client(ctx.http(ctx.cfg.str("llm.url"), "LLM_API_KEY"));
  std::vector<Prediction> preds;
  for (const auto& rec : records_in(ctx.dataset(), Split::Test)) {
    std::optional<std::string> context;
    if (with_context) {
      const auto it = texts.find(rec.entity_id);
      if (it == texts.end() && ctx.strict()) throw Error(ErrorCode::MissingText, "no cached context for '" + rec.entity_id + "'");
      context = it == texts.end() ? std::string() : it->second.text;
    }
    preds.push_back(prompt_baseline(rec.entity_id, rec.name, context, ctx.scheme(), client, ctx.cfg.str("baseline.model")));
  }
  std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) { return a.entity_id < b.entity_id; });
  write_predictions(preds, ctx.run_dir() / "baseline_predictions.jsonl");
  write_report(ctx, preds, "baseline_");
}

inline void cmd_finetune(Context& ctx, bool wait) {
  ctx.ensure_manifest();
  const auto dir = ctx.run_dir();
  const auto& url = ctx.cfg.str("finetune.url");
  const FineTuneClient client(ctx.http(url.empty() ? ctx.cfg.str("llm.url") : url, "LLM_API_KEY"));
  const auto base = ctx.cfg.str("finetune.base_model");
  const auto dev = dir / "chat_dev.jsonl";
  const auto job = remote_finetune_submit(require_file(dir / "chat_train.jsonl", "build"), fs::exists(dev) ? dev : fs::path(),
                                          client, base);
  nlohmann::ordered_json j;
  j["run_id"] = ctx.run_id();
  j["job_id"] = job;
  j["base_model"] = base;
  ctx.out << "finetune: job=" << job << "\n";
  if (wait) {
    const auto model = client.wait(job, std::chrono::milliseconds(static_cast<long long>(ctx.cfg.real("finetune.poll_interval_s") * 1000)),
                                   static_cast<int>(ctx.cfg.integer("finetune.max_polls")));
    j["fine_tuned_model"] = model;
    ctx.out << "finetune: model=" << model << "\n";
  }
  write_file_atomic(dir / "finetune.json", dump_json(j, 2) + "\n");
}

}  // namespace cli

/// Entry point for the `entclf` tool. Returns the process exit status:
/// 0 ok, 2 configuration/usage, 3 network/provider, 4 data, 1 unexpected.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Entity classification pipeline: acquire text, build corpora, train, evaluate."};
  app.require_subcommand(1);
  app.fallthrough();

  cli::Globals g;
  app.add_option("--config", g.config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--run-id", g.run_id, "Run identifier (default derived from config and dataset)");
  app.add_option("--runs-dir", g.runs_dir, "Directory holding run outputs");
  app.add_flag("--refresh", g.refresh, "Bypass the acquisition cache");
  app.add_flag("--strict", g.strict, "Treat missing texts and fetch failures as errors");
  app.add_option("--seed", g.seed, "Seed for splitting and training");
  app.add_option("--set", g.overrides, "Config override section.key=value")->take_all();

  std::vector<std::string> sources;
  auto* acquire = app.add_subcommand("acquire", "Fetch texts for every entity into the cache");
  acquire->add_option("--source", sources, "Sources to fetch (gsnip, gptsum, llamasum)");

  auto* build = app.add_subcommand("build", "Build corpora and chat fine-tune files from cached texts");
  auto* train_cmd = app.add_subcommand("train", "Train the native classifier");

  std::string backend = "native", model_id;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the test split");
  predict_cmd->add_option("--backend", backend, "native or remote")->check(CLI::IsMember({"native", "remote"}));
  predict_cmd->add_option("--model-id", model_id, "Fine-tuned model id for the remote backend");

  std::string predictions_path, compare;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold labels");
  eval_cmd->add_option("--predictions", predictions_path, "Predictions JSONL (default from the run)");
  eval_cmd->add_option("--compare", compare, "Another report.json for a per-category F1 table");

  bool inclusive = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Confidence-threshold precision/recall sweep");
  sweep_cmd->add_option("--predictions", predictions_path, "Predictions JSONL (default from the run)");
  sweep_cmd->add_flag("--inclusive", inclusive, "Keep predictions with confidence >= t instead of > t");

  std::vector<std::size_t> ks;
  auto* ablate_cmd = app.add_subcommand("ablate", "Retrain and evaluate at several snippet counts");
  ablate_cmd->add_option("--ks", ks, "Snippet counts")->delimiter(',');

  std::string context_source;
  auto* baseline_cmd = app.add_subcommand("baseline", "Zero-shot prompting baseline on the test split");
  baseline_cmd->add_option("--context", context_source, "none or a corpus source such as gsnip");

  bool wait = false;
  auto* finetune_cmd = app.add_subcommand("finetune", "Submit a remote fine-tuning job");
  finetune_cmd->add_flag("--wait", wait, "Poll until the job finishes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    cli::Context ctx(g, out, err);
    if (acquire->parsed()) cli::cmd_acquire(ctx, sources);
    else if (build->parsed()) cli::cmd_build(ctx);
    else if (train_cmd->parsed()) cli::cmd_train(ctx);
    else if (predict_cmd->parsed()) cli::cmd_predict(ctx, backend, model_id);
    else if (eval_cmd->parsed()) cli::cmd_eval(ctx, predictions_path, compare);
    else if (sweep_cmd->parsed()) cli::cmd_sweep(ctx, predictions_path, inclusive);
    else if (ablate_cmd->parsed()) cli::cmd_ablate(ctx, ks);
    else if (baseline_cmd->parsed()) cli::cmd_baseline(ctx, context_source);
    else if (finetune_cmd->parsed()) cli::cmd_finetune(ctx, wait);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace entclf
