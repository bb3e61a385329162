#include <doctest.h>

#include <fstream>
#include <random>

#include "common.hpp"
#include "inlu/errors.hpp"
#include "inlu/pipeline.hpp"

using namespace inlu;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> test_texts() {
  std::vector<std::string> texts;
  for (const auto& ex : testing::snips_split().second.examples()) texts.push_back(ex.text);
  return texts;
}

NluResult stream(Interpreter& interpreter, const std::string& text) {
  interpreter.new_utterance();
  NluResult last = interpreter.result();
  for (const std::string& w : tokenize(text, false)) last = interpreter.add(w);
  return last;
}

std::map<std::string, std::string> files_under(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), root).string()] = testing::read_file(entry.path());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  const PipelineConfig c = PipelineConfig::parse(R"(# comment
language: "en"
pipeline:
- name: "tokenizer_whitespace"
- name: intent_sium   # trailing comment
  entity_threshold: '0.7'
  alpha: 0.5
)");
  CHECK(c.language == "en");
  REQUIRE(c.components.size() == 2);
  CHECK(c.components[0] == ComponentSpec{"tokenizer_whitespace", {}});
  CHECK(c.components[1].params == std::map<std::string, std::string>{{"alpha", "0.5"},
                                                                     {"entity_threshold", "0.7"}});
  CHECK(PipelineConfig::parse(c.to_text()) == c);
  CHECK(PipelineConfig::load(fs::path(INLU_CONFIG_DIR) / "pipeline.yml").components.size() == 5);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(
      validate_pipeline(PipelineConfig::parse("language: en\npipeline:\n- name: intent_magic\n")),
      ConfigError);
  CHECK_THROWS_AS(make_component({"intent_magic", {}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::parse("language: en\nflavour: mild\n"), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::parse("language: en\npipeline:\n"), ConfigError);
  CHECK_THROWS_AS(make_component({"intent_sium", {{"alhpa", "1"}}}), ConfigError);
  CHECK_THROWS_AS(make_component({"intent_sium", {{"alpha", "one"}}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::load("/nonexistent/pipeline.yml"), ConfigError);

  PipelineConfig out_of_order;
  out_of_order.components = {{"featurizer_count_vectors", {}}, {"tokenizer_whitespace", {}}};
  CHECK_THROWS_AS(validate_pipeline(out_of_order), ConfigError);
  PipelineConfig twice;
  twice.components = {{"tokenizer_whitespace", {}}, {"tokenizer_whitespace", {}}};
  CHECK_THROWS_AS(validate_pipeline(twice), ConfigError);
  CHECK_NOTHROW(validate_pipeline(default_config()));
}

TEST_CASE("full pipeline on all 700 utterances persists five component directories") {
  const auto bundle = ModelBundle::train(default_config(), testing::snips(), 1);
  CHECK(bundle->components().size() == 5);
  CHECK(bundle->training_examples() == 700);
  testing::TempDir dir;
  bundle->persist(dir.path());
  CHECK(fs::exists(dir / "manifest.json"));
  for (const std::string& name : registered_components()) CHECK(fs::is_directory(dir / name));
}

TEST_CASE("tokenizer-only pipeline yields tokens and no intent") {
  PipelineConfig config;
  config.components = {{"tokenizer_whitespace", {}}};
  const auto bundle = ModelBundle::train(config, testing::snips(), 0);
  Interpreter interpreter(bundle);
  const NluResult r = interpreter.parse_full("Play some Jazz");
  CHECK(r.tokens == Tokens{"play", "some", "jazz"});
  CHECK(r.intent.empty());
  CHECK(r.intent_ranking.empty());
  CHECK(r.entities.empty());
  CHECK(format_result_line(r) == "\t0.000000\t");
}

TEST_CASE("held-out style utterances get the expected intents") {
  Interpreter interpreter(testing::snips_bundle());
  // Neither sentence occurs verbatim in the data.
  for (const auto& ex : testing::snips().examples()) {
    REQUIRE(ex.text != "rate it five stars");
    REQUIRE(ex.text != "book a restaurant for two");
  }
  interpreter.new_utterance();
  NluResult r;
  for (const char* w : {"rate", "it", "five", "stars"}) r = interpreter.add(w);
  CHECK(r.intent == "RateBook");
  CHECK(interpreter.parse_full("book a restaurant for two").intent == "BookRestaurant");
}

TEST_CASE("empty utterance gives the prior and no entities") {
  Interpreter interpreter(testing::snips_bundle());
  const NluResult r = interpreter.parse_full("");
  CHECK(r.entities.empty());
  REQUIRE(r.intent_ranking.size() == 7);
  for (const auto& [label, p] : r.intent_ranking) CHECK(p == doctest::Approx(1.0 / 7));
  CHECK(r.intent == "AddToPlaylist");
  CHECK(r == interpreter.parse_batch(""));
  for (const auto& [name, out] : r.components) CHECK(out.entities.empty());
}

TEST_CASE("add then revoke returns to the empty-hypothesis result") {
  Interpreter interpreter(testing::snips_bundle());
  interpreter.new_utterance();
  const NluResult empty = interpreter.result();
  for (const char* w : {"play", "tomorrow", "qqqq", "Boston"}) {
    interpreter.add(w);
    CHECK(interpreter.revoke() == empty);
  }
  CHECK_THROWS_AS(interpreter.revoke(), UnderflowError);
  CHECK(interpreter.result() == empty);
}

TEST_CASE("payload rules") {
  Interpreter interpreter(testing::snips_bundle());
  CHECK_THROWS_AS(interpreter.parse_incremental(EditType::Add), InvalidPayloadError);
  CHECK_THROWS_AS(interpreter.parse_incremental(EditType::Revoke, "x"), InvalidPayloadError);
  CHECK_THROWS_AS(interpreter.add("two words"), InvalidPayloadError);
  CHECK(interpreter.blackboard().buffer().empty());
}

TEST_CASE("streamed results equal the non-incremental route on the test set") {
  Interpreter interpreter(testing::snips_bundle());
  for (const std::string& text : test_texts()) {
    const NluResult streamed = interpreter.parse_full(text);
    CHECK(streamed == interpreter.parse_batch(text));
    CHECK(streamed == stream(interpreter, text));
  }
}

TEST_CASE("mid-utterance prefixes yield valid distributions") {
  Interpreter interpreter(testing::snips_bundle());
  interpreter.new_utterance();
  for (const char* w : {"book", "a"}) {
    const NluResult r = interpreter.add(w);
    for (const auto& [name, out] : r.components) {
      if (out.intent_ranking.empty()) continue;
      double sum = 0;
      for (const auto& [label, p] : out.intent_ranking) sum += p;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("lock-step: every component sees every edit in pipeline order") {
  Interpreter interpreter(testing::snips_bundle());
  std::vector<std::pair<std::size_t, std::size_t>> calls;  // (surviving words, component index)
  interpreter.set_observer([&](std::size_t index, std::string_view, const Blackboard& bb) {
    calls.emplace_back(static_cast<std::size_t>(bb.buffer().units().size()), index);
  });
  interpreter.new_utterance();
  interpreter.add("play");
  interpreter.add("muzik");
  interpreter.revoke();
  interpreter.add("jazz");
  const std::size_t n = interpreter.bundle().components().size();
  REQUIRE(calls.size() == 4 * n);
  for (std::size_t edit = 0; edit < 4; ++edit) {
    for (std::size_t c = 0; c < n; ++c) {
      CHECK(calls[edit * n + c].second == c);
      // All components of one edit run before the next edit touches the buffer.
      CHECK(calls[edit * n + c].first == calls[edit * n].first);
    }
  }
}

TEST_CASE("new utterance isolates state") {
  const auto bundle = testing::snips_bundle();
  const auto texts = test_texts();
  Interpreter reused(bundle);
  reused.new_utterance();  // no-op on a fresh interpreter
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::string& a = texts[rng() % texts.size()];
    const std::string& b = texts[rng() % texts.size()];
    const Tokens prefix = tokenize(a, false);
    for (std::size_t i = 0; i < prefix.size() / 2 + 1 && i < prefix.size(); ++i) reused.add(prefix[i]);
    Interpreter fresh(bundle);
    CHECK(stream(reused, b) == stream(fresh, b));
  }
}

TEST_CASE("persist and load give identical predictions and files") {
  const auto bundle = testing::snips_bundle();
  testing::TempDir dir;
  bundle->persist(dir / "a");
  Interpreter before(bundle);
  Interpreter after = Interpreter::load(dir / "a");
  for (const std::string& text : test_texts()) CHECK(after.parse_full(text) == before.parse_full(text));

  after.bundle().persist(dir / "b");
  CHECK(files_under(dir / "a") == files_under(dir / "b"));

  const auto again = ModelBundle::train(testing::eval_config(), testing::snips_split().first,
                                        testing::kModelSeed);
  again->persist(dir / "c");
  CHECK(files_under(dir / "a") == files_under(dir / "c"));
}

TEST_CASE("load errors") {
  testing::TempDir dir;
  CHECK_THROWS_AS(ModelBundle::load(dir.path()), LoadError);

  testing::snips_bundle()->persist(dir / "m");
  const fs::path manifest = dir / "m" / "manifest.json";
  std::string text = testing::read_file(manifest);
  const auto pos = text.find("\"schema_version\": \"1\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("\"schema_version\": \"1\"").size(), "\"schema_version\": \"999\"");
  std::ofstream(manifest, std::ios::binary) << text;
  try {
    ModelBundle::load(dir / "m");
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    const std::string what = e.what();
    CHECK(what.find("999") != std::string::npos);
    CHECK(what.find("expected '1'") != std::string::npos);
  }

  testing::snips_bundle()->persist(dir / "n");
  fs::remove_all(dir / "n" / "intent_sium");
  CHECK_THROWS_AS(ModelBundle::load(dir / "n"), LoadError);
}

TEST_CASE("result line format") {
  NluResult r;
  r.intent = "GetWeather";
  r.confidence = 0.5;
  r.entities = {{"city", "new york", 2, 4, 0.9}, {"timeRange", "tomorrow", 4, 5, 1.0}};
  CHECK(format_result_line(r) == "GetWeather\t0.500000\tcity:new york:2:4;timeRange:tomorrow:4:5");
}
