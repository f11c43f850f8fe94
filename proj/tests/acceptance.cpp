// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "entclf/ablation.hpp"
#include "entclf/metrics.hpp"
#include "entclf/remote.hpp"
#include "entclf/softmax.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

using namespace entclf;

namespace {

struct Check {
  std::ostringstream notes;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) notes << what;
    ok = ok && cond;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// 1. macro_report against the brute-force counter.
void metric_oracle(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000 && c.ok; ++trial) {
    const std::size_t C = 2 + rng() % 29;
    const std::size_t n = 1 + rng() % 500;
    const auto scheme = oracles::numbered_scheme(C);
    const auto ids = scheme.ids();
    std::vector<std::string> golds, preds;
    for (std::size_t i = 0; i < n; ++i) {
      golds.push_back(ids[rng() % C]);
      preds.push_back(rng() % 25 == 0 ? std::string(kInvalidLabel) : ids[rng() % C]);
    }
    const auto m = confusion(golds, preds, scheme);
    const auto r = macro_report(m);
    const auto o = oracles::brute_force(golds, preds, ids);
    c.expect(m.total() == n, "confusion total");
    for (std::size_t k = 0; k < C; ++k) {
      std::uint64_t predicted = 0;
      for (std::size_t g = 0; g < C; ++g) predicted += m.at(g, k);
      c.expect(static_cast<long>(m.at(k, k)) == o.tallies[k].tp &&
                   static_cast<long>(predicted - m.at(k, k)) == o.tallies[k].fp &&
                   static_cast<long>(r.per_class[k].support - m.at(k, k)) == o.tallies[k].fn,
               "tally mismatch at trial " + std::to_string(trial));
      c.expect(std::abs(r.per_class[k].precision - o.p[k]) <= 1e-12 && std::abs(r.per_class[k].recall - o.r[k]) <= 1e-12 &&
                   std::abs(r.per_class[k].f1 - o.f1[k]) <= 1e-12,
               "per-class value mismatch");
    }
    c.expect(std::abs(r.macro_p - o.macro_p) <= 1e-12 && std::abs(r.macro_r - o.macro_r) <= 1e-12 &&
                 std::abs(r.macro_f1 - o.macro_f1) <= 1e-12,
             "macro mismatch at trial " + std::to_string(trial));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + std::to_string(secs) + " s");
  c.notes << "1000 sets, " << secs << " s";
}

// 2. Mean of per-class F1 on the asymmetric example and the reported table row.
void macro_f1_convention(Check& c) {
  const TaxonomyScheme s(Task::Sic, {{"10", "A"}, {"20", "B"}});
  const auto r = macro_report(confusion({"10", "10", "20"}, {"10", "20", "20"}, s));
  c.expect(std::abs(r.macro_p - 0.75) < 1e-15 && std::abs(r.macro_r - 0.75) < 1e-15, "macro P/R");
  c.expect(std::abs(r.macro_f1 - 2.0 / 3.0) < 1e-15, "macro F1");
  const double harmonic = f1_of(0.596, 0.445);
  c.expect(std::abs(harmonic - 0.468) > 0.03, "table row would be consistent with F1 of macros");
  c.notes << "macro_f1=" << r.macro_f1 << ", F1(0.596,0.445)=" << harmonic << " vs reported 0.468";
}

// 3. Analytic gradient against central differences, C=3, D=50.
void gradient_check(Check& c) {
  const auto t0 = Clock::now();
  const TaxonomyScheme scheme(Task::Sic, {{"01", "A"}, {"02", "B"}, {"03", "C"}});
  std::vector<std::uint32_t> cols(50);
  for (std::uint32_t i = 0; i < 50; ++i) cols[i] = i;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto m = SoftmaxModel::zeros(scheme, cols);
    for (double& w : m.weights) w = nd(rng) * 0.5;
    for (double& b : m.bias) b = nd(rng) * 0.5;
    std::vector<Example> batch(4);
    for (auto& ex : batch) {
      double n2 = 0;
      for (std::uint32_t i = 0; i < 50; ++i) {
        ex.x.indices.push_back(i);
        ex.x.values.push_back(std::abs(nd(rng)) + 0.05);
        n2 += ex.x.values.back() * ex.x.values.back();
      }
      for (double& v : ex.x.values) v /= std::sqrt(n2);
      ex.label = rng() % 3;
    }
    const auto g = loss_and_grad(m, batch);
    const double h = 1e-5;
    auto check = [&](double analytic, auto&& bump) {
      auto plus = m, minus = m;
      bump(plus, h);
      bump(minus, -h);
      const double fd = (loss_and_grad(plus, batch).loss - loss_and_grad(minus, batch).loss) / (2 * h);
      worst = std::max(worst, std::abs(analytic - fd) / (std::abs(analytic) + 1e-8));
    };
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      check(g.weights[i], [i](SoftmaxModel& mm, double d) { mm.weights[i] += d; });
    }
    for (std::size_t k = 0; k < 3; ++k) check(g.bias[k], [k](SoftmaxModel& mm, double d) { mm.bias[k] += d; });
  }
  const double secs = seconds_since(t0);
  c.expect(worst < 1e-4, "relative error " + std::to_string(worst));
  c.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s");
  c.notes << "worst relative error " << worst << ", " << secs << " s";
}

// 4. 27-class class-token corpus under the default 3-epoch schedule.
void training_sanity(Check& c) {
  const auto t0 = Clock::now();
  const auto scheme = sic_scheme();
  const auto train_set = oracles::classtoken_corpus(scheme, 100, 11, "tr");
  const auto test_set = oracles::classtoken_corpus(scheme, 20, 12, "te");
  const TrainConfig cfg;  // defaults: 3 epochs, batch 8, 500 warmup steps
  const auto a = train(train_set, scheme, cfg);
  const auto b = train(train_set, scheme, cfg);
  std::vector<std::string> golds, labels;
  for (const auto& p : predict_all(a.model, test_set)) labels.push_back(p.label);
  for (const auto& t : test_set) golds.push_back(*t.gold);
  const auto r = macro_report(confusion(golds, labels, scheme));
  const auto p3 = predict(a.model, "Entity 1\nclasstoken_3 company");
  const double secs = seconds_since(t0);
  c.expect(r.macro_f1 >= 0.95, "macro_f1 " + std::to_string(r.macro_f1));
  c.expect(serialize_model(a.model) == serialize_model(b.model), "model files differ across reruns");
  c.expect(p3.label == scheme.at(3).id && *p3.confidence > 1.0 / 27.0, "classtoken_3 not recognized");
  c.expect(secs < 60.0, "runtime " + std::to_string(secs) + " s");
  c.notes << "macro_f1=" << r.macro_f1 << ", bit-identical reruns, " << secs << " s";
}

// 5. Threshold sweep: nested kept sets, non-increasing coverage/recall, oracle match.
void sweep_contract(Check& c) {
  const auto grid = default_thresholds();
  c.expect(grid == std::vector<double>{0.60, 0.65, 0.70, 0.75, 0.80, 0.85}, "default grid");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500 && c.ok; ++trial) {
    const std::size_t C = 2 + rng() % 12;
    const auto scheme = oracles::numbered_scheme(C);
    const auto ids = scheme.ids();
    std::vector<Prediction> preds;
    std::vector<std::string> golds;
    const std::size_t n = 1 + rng() % 300;
    for (std::size_t i = 0; i < n; ++i) {
      golds.push_back(ids[rng() % C]);
      Prediction p;
      p.entity_id = "e" + std::to_string(i);
      p.label = rng() % 2 ? golds.back() : ids[rng() % C];
      p.confidence = u(rng);
      preds.push_back(p);
    }
    const auto pts = threshold_sweep(preds, golds, scheme, grid);
    std::set<std::size_t> prev_kept;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto o = oracles::sweep_at(preds, golds, ids, grid[i]);
      c.expect(pts[i].n_labeled == o.n && std::abs(pts[i].precision - o.precision) <= 1e-12 &&
                   std::abs(pts[i].recall - o.recall) <= 1e-12 && std::abs(pts[i].coverage - o.coverage) <= 1e-12,
               "oracle mismatch");
      if (i > 0) {
        c.expect(std::includes(prev_kept.begin(), prev_kept.end(), o.kept.begin(), o.kept.end()), "kept sets not nested");
        c.expect(pts[i].coverage <= pts[i - 1].coverage && pts[i].recall <= pts[i - 1].recall, "not monotone");
      }
      prev_kept = o.kept;
    }
  }
  const TaxonomyScheme s(Task::Sic, {{"10", "A"}, {"20", "B"}});
  std::vector<Prediction> desk(3);
  desk[0].label = "10", desk[0].confidence = 0.9;
  desk[1].label = "10", desk[1].confidence = 0.7;
  desk[2].label = "20", desk[2].confidence = 0.5;
  const std::vector<std::string> desk_golds{"10", "20", "20"};
  const auto pt = threshold_sweep(desk, desk_golds, s, {0.6}).at(0);
  const auto o = oracles::sweep_at(desk, desk_golds, s.ids(), 0.6);
  c.expect(pt.n_labeled == 2 && pt.coverage == 2.0 / 3.0 && pt.precision == o.precision && pt.recall == o.recall,
           "desk example");
  c.notes << "500 random sets; desk t=.6 coverage=" << pt.coverage << " P=" << pt.precision << " R=" << pt.recall;
}

// 6. Snippet aggregation fixture, prefix property, rank-sensitive ablation.
void snippet_aggregation(Check& c) {
  const auto doc = nlohmann::json::parse(read_file(std::filesystem::path(ENTCLF_TEST_DATA) / "gold_hills_search.json"));
  std::vector<SearchResult> results;
  for (const auto& r : doc.at("organic_results")) {
    results.push_back({r.at("position").get<int>(), r.at("title").get<std::string>(), r.at("link").get<std::string>(),
                       r.at("snippet").get<std::string>()});
  }
  const auto expected = read_file(std::filesystem::path(ENTCLF_TEST_DATA) / "gold_hills_gsnip10.txt");
  std::string oracle;
  for (const auto& r : results) oracle += (oracle.empty() ? "" : " ") + r.snippet;
  c.expect(aggregate_snippets(results, 10) == expected, "fixture bytes differ from expected file");
  c.expect(oracle == expected, "join oracle differs from expected file");
  for (std::size_t k = 1; k <= 10; ++k) {
    for (std::size_t kp = 1; kp <= k; ++kp) {
      const auto big = aggregate_snippets(results, k), small = aggregate_snippets(results, kp);
      c.expect(big.compare(0, small.size(), small) == 0, "prefix property");
    }
  }
  const auto fx = oracles::rank_sensitive(5, 60, 42);
  TrainConfig cfg;
  cfg.warmup_steps = 20;
  const auto rows = ablate_snippets(fx.dataset, fx.deep, {1, 5}, cfg);
  c.expect(rows[1].report.macro_f1 >= rows[0].report.macro_f1, "F1(5) < F1(1)");
  c.notes << expected.size() << "-byte GSnip matches; F1(1)=" << rows[0].report.macro_f1
          << " F1(5)=" << rows[1].report.macro_f1;
}

// 7. Chat fine-tune emission: 3 messages with a bare code, 2 for inference.
void format_fidelity(Check& c) {
  const auto scheme = sic_scheme();
  const std::vector<ClassificationInstance> labeled{{"e1", "Gold Hills Mining, Ltd.\nGold Hills Mining Ltd is a junior "
                                                           "mineral exploration company.", "10", "gsnip10"},
                                                    {"e2", "Café \"Quote\" Co\nline\nbreaks", "58", "gsnip10"}};
  auto unlabeled = labeled;
  for (auto& u : unlabeled) u.gold.reset();
  fixtures::TempDir tmp;
  emit_chat_finetune(labeled, scheme, true, tmp / "train.jsonl");
  emit_chat_finetune(unlabeled, scheme, false, tmp / "test.jsonl");
  const auto train_lines = read_lines(tmp / "train.jsonl");
  const auto back = read_chat_finetune(tmp / "train.jsonl");
  const auto test = read_chat_finetune(tmp / "test.jsonl");
  c.expect(back.size() == 2 && test.size() == 2, "record counts");
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto raw = nlohmann::json::parse(train_lines[i]);
    c.expect(raw.size() == 1 && raw.at("messages").size() == 3, "labeled record shape");
    c.expect(back[i].messages[0].role == "system" && back[i].messages[1].role == "user" &&
                 back[i].messages[2].role == "assistant",
             "roles");
    c.expect(back[i].messages[1].content == labeled[i].input_text, "user content");
    c.expect(back[i].messages[2].content == *labeled[i].gold, "assistant is not the bare code");
    c.expect(test[i].messages.size() == 2 && test[i].messages[1].content == labeled[i].input_text, "inference shape");
    c.expect(back[i] == to_chat_record(labeled[i], scheme, true), "round trip");
  }
  c.notes << "train 3-message, inference 2-message records round-trip";
}

// 8. acquire -> build -> train -> predict -> eval -> sweep twice on 50 entities.
void end_to_end(Check& c) {
  const auto t0 = Clock::now();
  pipeline::Env env(50);
  std::string outputs[2][2];
  const char* dirs[] = {"runs_a", "runs_b"};
  for (int run = 0; run < 2; ++run) {
    for (const char* cmd : {"acquire", "build", "train", "predict", "eval", "sweep"}) {
      const auto r = env.run({"--run-id", "toy", cmd}, dirs[run]);
      c.expect(r.code == 0, std::string(cmd) + " exited " + std::to_string(r.code) + ": " + r.err);
      if (!c.ok) return;
    }
    const auto dir = env.tmp / dirs[run] / "toy";
    outputs[run][0] = read_file(dir / "report.json");
    outputs[run][1] = read_file(dir / "sweep.csv");
  }
  const double secs = seconds_since(t0);
  c.expect(env.search.load.total.load() == 50, "second run should be served from the cache");
  c.expect(outputs[0][0] == outputs[1][0], "report.json differs");
  c.expect(outputs[0][1] == outputs[1][1], "sweep.csv differs");
  c.expect(nlohmann::json::parse(outputs[0][0]).contains("macro_f1"), "report lacks macro_f1");
  c.expect(secs < 120.0, "runtime " + std::to_string(secs) + " s");
  c.notes << "report.json and sweep.csv byte-identical, " << env.search.load.total.load() << " search calls, " << secs
          << " s";
}

// 9. parse_code_response contract and fuzz.
void response_parsing(Check& c) {
  const TaxonomyScheme s(Task::Sic, {{"07", "Agricultural Services"}, {"20", "Food"}, {"65", "Real Estate"}});
  c.expect(parse_code_response(" 07\n", s) == "07", "exact match");
  c.expect(parse_code_response("SIC 20 (Real Estate)", s) == "20", "embedded code");
  c.expect(parse_code_response("2024 revenue grew", s) == "INVALID", "4-digit token split");
  const auto sic = sic_scheme();
  const auto hc = healthcare_scheme(std::filesystem::path(ENTCLF_DATA_DIR) / "healthcare_taxonomy.csv");
  std::mt19937_64 rng(9);
  const std::string alphabet = "0123456789abcdefXYZ -_.,;:()\n\t\"'";
  int invalid = 0;
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const auto len = rng() % 48;
    for (std::size_t j = 0; j < len; ++j) text.push_back(alphabet[rng() % alphabet.size()]);
    if (rng() % 3 == 0) text.insert(rng() % (text.size() + 1), sic.at(rng() % sic.size()).id);
    if (rng() % 5 == 0) text.insert(rng() % (text.size() + 1), hc.at(rng() % hc.size()).id);
    const auto* scheme = i % 2 ? &sic : &hc;
    const auto out = parse_code_response(text, *scheme);
    c.expect(out == kInvalidLabel || scheme->contains(out), "out-of-range result '" + out + "'");
    invalid += out == kInvalidLabel;
  }
  c.notes << "3 contract examples; 500 fuzz cases in range (" << invalid << " INVALID)";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"metric oracle equivalence", metric_oracle},
      {"macro-F1 convention", macro_f1_convention},
      {"gradient correctness", gradient_check},
      {"training sanity", training_sanity},
      {"threshold sweep contract", sweep_contract},
      {"snippet aggregation", snippet_aggregation},
      {"chat format fidelity", format_fidelity},
      {"end-to-end mock run", end_to_end},
      {"response parsing", response_parsing},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.notes << "exception: " << e.what();
    }
    std::cout << (c.ok ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << c.notes.str()
              << std::endl;
    failed += !c.ok;
  }
  return failed == 0 ? 0 : 1;
}
