#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "common.hpp"
#include "inlu/errors.hpp"
#include "inlu/harness.hpp"

using namespace inlu;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI through the shell with `input` on stdin.
Run run_cli(const std::string& args, const std::string& input = "") {
  testing::TempDir dir;
  std::ofstream(dir / "stdin") << input;
  const std::string command = std::string("\"") + INLU_CLI + "\" " + args + " < \"" +
                              (dir / "stdin").string() + "\" > \"" + (dir / "stdout").string() +
                              "\" 2>/dev/null";
  const int status = std::system(command.c_str());
  Run run;
  run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  run.out = testing::read_file(dir / "stdout");
  return run;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

const testing::TempDir& cli_model() {
  static testing::TempDir dir;
  static bool trained = false;
  if (!trained) {
    testing::snips_bundle()->persist(dir / "model");
    std::ofstream(dir / "test.json") << to_json(testing::snips_split().second);
    trained = true;
  }
  return dir;
}

}  // namespace

TEST_CASE("intent F1") {
  const std::vector<std::string> gold{"A", "A", "B", "C"};
  CHECK(f1_intent(gold, gold).micro == 1.0);
  CHECK(f1_intent(gold, gold).macro == 1.0);
  const std::vector<std::string> pred{"A", "B", "B", "C"};
  CHECK(f1_intent(pred, gold).micro == 0.75);
  // Per class: A 2/3, B 2/3, C 1.
  CHECK(f1_intent(pred, gold).macro == doctest::Approx((2.0 / 3 + 2.0 / 3 + 1.0) / 3));
  const std::vector<std::string> wrong{"B", "C", "A", "A"};
  CHECK(f1_intent(wrong, gold).micro == 0.0);
  CHECK_THROWS_AS(f1_intent(pred, std::vector<std::string>{"A"}), ConsistencyError);
}

TEST_CASE("entity span F1") {
  const std::vector<std::vector<TokenSpan>> gold{{{"city", 0, 1}, {"date", 2, 3}},
                                                 {{"city", 1, 3}, {"genre", 4, 5}}};
  const std::vector<std::vector<TokenSpan>> pred{{{"city", 0, 1}, {"date", 2, 4}},
                                                 {{"city", 1, 3}}};
  const SpanScores s = f1_entities(pred, gold);
  CHECK(s.precision == doctest::Approx(2.0 / 3));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(4.0 / 7));

  const std::vector<std::vector<TokenSpan>> none{{}, {}};
  const SpanScores empty = f1_entities(none, none);
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);
  CHECK(empty.f1 == 1.0);
  CHECK(f1_entities(gold, gold).f1 == 1.0);
  CHECK(f1_entities(none, gold).f1 == 0.0);
}

TEST_CASE("equivalence over the test set") {
  double norm = 0.0;
  const EquivalenceReport r =
      run_equivalence(testing::snips_bundle(), testing::snips_split().second, &norm);
  CHECK(r.utterances == 140);
  CHECK(r.exact_matches == 140);
  CHECK(r.passed());
  CHECK(r.components.at("intent_classifier_bow").exact == 140);
  CHECK(r.components.at("entity_tagger_sequence").exact == 140);
  CHECK(r.components.at("intent_sium").max_deviation < 1e-9);
  CHECK(norm < 1e-9);
  for (const auto& [name, c] : r.components) {
    if (c.batch.intent) CHECK(std::abs(c.batch.intent->micro - c.streamed.intent->micro) <= 0.01);
    if (c.batch.entities) CHECK(std::abs(c.batch.entities->f1 - c.streamed.entities->f1) <= 0.01);
  }
}

TEST_CASE("noise protocol") {
  const auto bundle = testing::snips_bundle();
  const auto& test = testing::snips_split().second;
  for (double rate : {0.0, 0.4, 1.0}) {
    const NoiseReport r = run_noise_protocol(bundle, test, {rate, bundle->vocabulary(), 99});
    CHECK(r.passes == r.utterances);
    CHECK(r.utterances == 140);
    if (rate == 0.0) CHECK(r.noise_words == 0);
    if (rate == 1.0) {
      std::size_t words = 0;
      for (const auto& ex : test.examples()) words += tokenize(ex.text).size();
      CHECK(r.noise_words == words);
    }
  }
  const NoiseReport a = run_noise_protocol(bundle, test, {0.4, bundle->vocabulary(), 5});
  const NoiseReport b = run_noise_protocol(bundle, test, {0.4, bundle->vocabulary(), 5});
  CHECK(a.noise_words == b.noise_words);
  CHECK_THROWS_AS(run_noise_protocol(bundle, test, {1.5, bundle->vocabulary(), 1}), ParameterError);
  CHECK_THROWS_AS(run_noise_protocol(bundle, test, {0.4, {}, 1}), ConfigError);
}

TEST_CASE("report lists all four routes next to the reference table") {
  const std::array<double, 1> rates{0.4};
  const EvalReport r = evaluate(testing::snips_bundle(), testing::snips_split().second, rates, 3);
  CHECK(r.all_checks_passed());
  const std::string kv = r.to_key_values();
  for (const char* key :
       {"scores.intent_classifier_bow.non_incremental.intent_micro_f1=",
        "scores.intent_classifier_bow.incremental.intent_micro_f1=",
        "scores.entity_tagger_sequence.non_incremental.entity_f1=",
        "scores.entity_tagger_sequence.incremental.entity_f1=",
        "scores.intent_sium.non_incremental.intent_micro_f1=",
        "scores.intent_sium.incremental.intent_micro_f1=",
        "scores.intent_sium.non_incremental.entity_f1=", "scores.intent_sium.incremental.entity_f1=",
        "reference.intent_classifier_bow.non_incremental.intent_f1=0.93",
        "reference.intent_classifier_bow.non_incremental.entity_f1=0.86",
        "reference.intent_classifier_bow.incremental.intent_f1=0.93",
        "reference.intent_classifier_bow.incremental.entity_f1=0.85",
        "reference.intent_sium.non_incremental.intent_f1=0.37",
        "reference.intent_sium.non_incremental.entity_f1=0.34",
        "reference.intent_sium.incremental.intent_f1=0.36",
        "reference.intent_sium.incremental.entity_f1=0.34", "noise.0.40.passes=140",
        "checks_passed=true"}) {
    CHECK_MESSAGE(kv.find(key) != std::string::npos, key);
  }
  CHECK(r.to_table().find("Checks: PASS") != std::string::npos);
}

TEST_CASE("cli stream protocol") {
  const std::string model = "stream --model \"" + (cli_model() / "model").string() + "\"";
  const Run reset = run_cli(model, "play\njazz\n\nplay\n");
  CHECK(reset.exit_code == 0);
  const auto out = lines(reset.out);
  REQUIRE(out.size() == 3);
  CHECK(out[2] == out[0]);  // the blank line started a new utterance

  const Run noisy = run_cli(model, "play\nmuzik\n<REVOKE>\njazz\n");
  const Run clean = run_cli(model, "play\njazz\n");
  REQUIRE(lines(noisy.out).size() == 4);
  REQUIRE(lines(clean.out).size() == 2);
  CHECK(lines(noisy.out)[3] == lines(clean.out)[1]);
  CHECK(lines(noisy.out)[2] == lines(clean.out)[0]);

  const Run underflow = run_cli(model, "<REVOKE>\nplay\n");
  CHECK(underflow.exit_code == 0);
  REQUIRE(lines(underflow.out).size() == 2);
  CHECK(lines(underflow.out)[0].starts_with("error\t"));
  CHECK(lines(underflow.out)[1] == lines(clean.out)[0]);

  CHECK(run_cli(model, "").exit_code == 0);
}

TEST_CASE("cli eval and usage errors") {
  const std::string model = (cli_model() / "model").string();
  const std::string test = (cli_model() / "test.json").string();
  testing::TempDir dir;
  const Run ok = run_cli("eval --model \"" + model + "\" --test \"" + test +
                         "\" --noise-rate 0.4 --seed 1 --report \"" + (dir / "r.txt").string() + "\"");
  CHECK(ok.exit_code == 0);
  const std::string report = testing::read_file(dir / "r.txt");
  CHECK(report.find("noise.0.40.passes=140") != std::string::npos);
  CHECK(report.find("noise.0.40.utterances=140") != std::string::npos);

  CHECK(run_cli("eval --model \"" + model + "\" --test \"" + test + "\" --noise-rate 1.5").exit_code == 1);
  CHECK(run_cli("train --out \"" + (dir / "x").string() + "\"").exit_code == 1);
  CHECK(run_cli("parse --model \"" + model + "\" --bogus").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("stream --model \"" + (dir / "missing").string() + "\"").exit_code == 1);

  const Run parsed = run_cli("parse --model \"" + model + "\"", "book a restaurant for two\n");
  CHECK(parsed.exit_code == 0);
  CHECK(parsed.out.starts_with("BookRestaurant\t"));
}

TEST_CASE("cli train is deterministic under a fixed seed") {
  testing::TempDir dir;
  const std::string data = (testing::data_dir() / "snips_subset.json").string();
  const std::string config = std::string(INLU_CONFIG_DIR) + "/pipeline.yml";
  for (const char* out : {"a", "b"}) {
    const Run r = run_cli("train --config \"" + config + "\" --data \"" + data + "\" --out \"" +
                          (dir / out).string() + "\" --seed 11 --holdout 0.2 --holdout-out \"" +
                          (dir / (std::string(out) + ".json")).string() + "\"");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("intent_sium") != std::string::npos);
  }
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir / "a");
    CHECK_MESSAGE(testing::read_file(entry.path()) == testing::read_file(dir / "b" / rel), rel.string());
  }
  CHECK(testing::read_file(dir / "a.json") == testing::read_file(dir / "b.json"));
  CHECK(load_json(dir / "a.json").size() == 140);
}
