#include <gtest/gtest.h>

#include "entclf/corpus.hpp"
#include "fixtures.hpp"

using namespace entclf;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an entclf::Error";
  return ErrorCode::IoError;
}

EntityRecord record(const std::string& id, const std::string& name, const std::string& label, Split split) {
  const auto scheme = sic_scheme();
  return {id, name, label + "00", scheme.label(label), split};
}

AcquiredText text_for(const std::string& id, const std::string& text, bool refusal = false) {
  AcquiredText a;
  a.entity_id = id;
  a.source = Source::Gsnip;
  a.params = {{"k", 10}};
  a.text = text;
  a.refusal = refusal;
  return a;
}

}  // namespace

TEST(BuildInstances, NameNewlineDescription) {
  const std::vector<EntityRecord> records{record("e1", "Gold Hills Mining, Ltd.", "10", Split::Train)};
  const std::map<std::string, AcquiredText> texts{
      {"e1", text_for("e1", "Gold Hills Mining Ltd is a junior mineral exploration company.")}};
  const auto out = build_instances(records, texts, "gsnip10");
  ASSERT_EQ(out.instances.size(), 1u);
  const auto& inst = out.instances[0];
  EXPECT_EQ(inst.input_text, "Gold Hills Mining, Ltd.\nGold Hills Mining Ltd is a junior mineral exploration company.");
  EXPECT_EQ(inst.gold, std::optional<std::string>("10"));
  EXPECT_EQ(inst.source_signature, "gsnip10");
}

TEST(BuildInstances, RefusalAndEmptyKeepName) {
  const std::vector<EntityRecord> records{record("a", "Acme Corp", "20", Split::Train),
                                          record("b", "Beta LLC", "50", Split::Dev)};
  const std::map<std::string, AcquiredText> texts{{"a", text_for("a", "", true)}, {"b", text_for("b", "")}};
  const auto out = build_instances(records, texts, "gptsum");
  ASSERT_EQ(out.instances.size(), 2u);
  EXPECT_EQ(out.instances[0].input_text, "Acme Corp\n");
  EXPECT_EQ(out.instances[1].input_text, "Beta LLC\n");
  EXPECT_EQ(out.empty_descriptions, 2u);

  const auto dropped = build_instances(records, texts, "gptsum", {.strict = false, .drop_empty = true});
  EXPECT_TRUE(dropped.instances.empty());
}

TEST(BuildInstances, MissingTextLenientVersusStrict) {
  const std::vector<EntityRecord> records{record("a", "Acme Corp", "20", Split::Train)};
  const auto lenient = build_instances(records, {}, "gsnip10");
  EXPECT_EQ(lenient.missing, 1u);
  EXPECT_EQ(lenient.instances.at(0).input_text, "Acme Corp\n");
  EXPECT_EQ(code_of([&] { build_instances(records, {}, "gsnip10", {.strict = true}); }), ErrorCode::MissingText);
}

TEST(BuildInstances, SortedByIdAndTestUnlabeled) {
  const std::vector<EntityRecord> records{record("z", "Z", "20", Split::Test), record("a", "A", "20", Split::Train),
                                          record("m", "M", "20", Split::Dev)};
  const std::map<std::string, AcquiredText> texts{
      {"z", text_for("z", "zz")}, {"a", text_for("a", "aa")}, {"m", text_for("m", "mm")}};
  const auto out = build_instances(records, texts, "s").instances;
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].entity_id, "a");
  EXPECT_EQ(out[1].entity_id, "m");
  EXPECT_EQ(out[2].entity_id, "z");
  EXPECT_TRUE(out[1].gold.has_value());
  EXPECT_FALSE(out[2].gold.has_value());
}

TEST(ChatRecords, LabeledAndInferenceShapes) {
  const auto scheme = sic_scheme();
  const ClassificationInstance inst{"e1", "Gold Hills Mining, Ltd.\nexplores for gold", "10", "gsnip10"};
  const auto labeled = to_chat_record(inst, scheme, true);
  ASSERT_EQ(labeled.messages.size(), 3u);
  EXPECT_EQ(labeled.messages[0].role, "system");
  EXPECT_EQ(labeled.messages[1], (ChatMessage{"user", inst.input_text}));
  EXPECT_EQ(labeled.messages[2], (ChatMessage{"assistant", "10"}));

  const auto unlabeled = to_chat_record(inst, scheme, false);
  ASSERT_EQ(unlabeled.messages.size(), 2u);
  EXPECT_EQ(unlabeled.messages[0], labeled.messages[0]);

  auto no_gold = inst;
  no_gold.gold.reset();
  EXPECT_EQ(code_of([&] { to_chat_record(no_gold, scheme, true); }), ErrorCode::MissingGold);
}

TEST(ChatRecords, SystemMessageListsEveryCategory) {
  const auto scheme = sic_scheme();
  const auto sys = system_instruction(scheme);
  for (const auto& id : scheme.ids()) EXPECT_NE(sys.find(id), std::string::npos) << id;
}

TEST(ChatRecords, FileRoundTripWithUnicodeAndNewlines) {
  const auto scheme = sic_scheme();
  const std::vector<ClassificationInstance> insts{
      {"e1", "Café Ünïcode Ltd\nline one\nline two \"quoted\"", "58", "gsnip10"},
      {"e2", "Plain Co\n", "20", "gsnip10"}};
  fixtures::TempDir tmp;
  emit_chat_finetune(insts, scheme, true, tmp / "train.jsonl");
  const auto text = read_file(tmp / "train.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);  // embedded newlines are escaped
  const auto back = read_chat_finetune(tmp / "train.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], to_chat_record(insts[0], scheme, true));
  EXPECT_EQ(back[1], to_chat_record(insts[1], scheme, true));
}

TEST(ChatRecords, ParseRejectsBadShapes) {
  EXPECT_EQ(code_of([] { parse_chat_record(R"({"messages":[{"role":"user","content":"x"}]})"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] {
              parse_chat_record(R"({"messages":[{"role":"user","content":"x"},{"role":"system","content":"y"}]})");
            }),
            ErrorCode::ParseError);
}

TEST(Tabular, RoundTrip) {
  const std::vector<ClassificationInstance> insts{
      {"e1", "Name\nwith\nnewlines and tabs\t", "10", "gsnip10+gptsum"},
      {"e2", "Unlabeled\n", std::nullopt, "gsnip10+gptsum"}};
  fixtures::TempDir tmp;
  emit_tabular(insts, tmp / "t.jsonl");
  EXPECT_EQ(read_tabular(tmp / "t.jsonl"), insts);
  const auto line = read_lines(tmp / "t.jsonl").at(1);
  EXPECT_EQ(line.find("\"gold\""), std::string::npos);
}

TEST(Tabular, EmptyListIsEmptyFile) {
  fixtures::TempDir tmp;
  emit_tabular({}, tmp / "empty.jsonl");
  EXPECT_EQ(read_file(tmp / "empty.jsonl"), "");
  EXPECT_TRUE(read_tabular(tmp / "empty.jsonl").empty());
}

TEST(Tabular, CorruptLineIsParseError) {
  fixtures::TempDir tmp;
  write_file_atomic(tmp / "bad.jsonl", "{\"entity_id\":\"e\"}\n");
  EXPECT_EQ(code_of([&] { read_tabular(tmp / "bad.jsonl"); }), ErrorCode::ParseError);
}
