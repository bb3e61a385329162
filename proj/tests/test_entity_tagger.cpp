#include <doctest.h>

#include <sstream>

#include "common.hpp"
#include "inlu/entity_tagger.hpp"
#include "inlu/errors.hpp"

using namespace inlu;

namespace {

std::vector<BioSentence> bio_of(const TrainingDataset& d) {
  std::vector<BioSentence> out;
  for (const auto& ex : d.examples()) out.push_back(project_bio(ex));
  return out;
}

TrainingDataset toy_dates() {
  return TrainingDataset({{"rain tomorrow", "GetWeather", {{5, 13, "date", "tomorrow"}}},
                          {"sun tomorrow please", "GetWeather", {{4, 12, "date", "tomorrow"}}},
                          {"is it cold tomorrow", "GetWeather", {{11, 19, "date", "tomorrow"}}},
                          {"is it cold", "GetWeather", {}},
                          {"play some rain sounds", "PlayMusic", {}}});
}

using Tags = std::vector<std::string>;

}  // namespace

TEST_CASE("memorizes a consistently labeled token") {
  const auto sentences = bio_of(toy_dates());
  const SequenceTagger tagger = SequenceTagger::train(sentences, {10, 1});
  const Tokens words{"rain", "tomorrow"};
  CHECK(tagger.decode(words) == Tags{"O", "B-date"});
}

TEST_CASE("no entities in training means all O") {
  const TrainingDataset d({{"play some jazz", "PlayMusic", {}}, {"is it cold", "GetWeather", {}}});
  const SequenceTagger tagger = SequenceTagger::train(bio_of(d), {});
  CHECK(tagger.tags() == Tags{"O"});
  const Tokens words{"play", "tomorrow", "jazz"};
  CHECK(tagger.decode(words) == Tags{"O", "O", "O"});
}

TEST_CASE("unseen words fall back to O") {
  const SequenceTagger tagger = SequenceTagger::train(bio_of(toy_dates()), {10, 1});
  const Tokens words{"qqqq", "zzzz", "xxxx"};
  CHECK(tagger.decode(words) == Tags{"O", "O", "O"});
  CHECK(tagger.decode(Tokens{}).empty());
}

TEST_CASE("decode is a pure function of the prefix") {
  const SequenceTagger tagger = SequenceTagger::train(bio_of(toy_dates()), {10, 1});
  const Tokens prefix{"sun", "tomorrow"};
  const auto before = tagger.decode(prefix);
  Tokens extended = prefix;
  extended.push_back("noise");
  (void)tagger.decode(extended);
  extended.pop_back();
  CHECK(tagger.decode(extended) == before);
}

TEST_CASE("decoded tags never start with an orphan I") {
  const auto& [train, test] = testing::snips_split();
  const SequenceTagger tagger = SequenceTagger::train(bio_of(train), {3, 1});
  for (const auto& ex : test.examples()) {
    const Tags tags = tagger.decode(tokenize(ex.text, false));
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (tags[i].starts_with("I-")) {
        REQUIRE(i > 0);
        CHECK(tags[i - 1].substr(2) == tags[i].substr(2));
      }
    }
  }
}

TEST_CASE("extract entities") {
  const Tokens words{"in", "new", "york"};
  const Tags tags{"O", "B-city", "I-city"};
  CHECK(extract_entities(tags, words) == Entities{{"city", "new york", 1, 3, 1.0}});
  CHECK(extract_entities(Tags{"O", "O", "O"}, words).empty());
  const Tokens two{"a", "b"};
  CHECK(extract_entities(Tags{"B-a", "B-a"}, two) ==
        Entities{{"a", "a", 0, 1, 1.0}, {"a", "b", 1, 2, 1.0}});
  CHECK_THROWS_AS(extract_entities(Tags{"O"}, two), ConsistencyError);
}

TEST_CASE("training is reproducible and persists bit-exactly") {
  const auto sentences = bio_of(testing::snips_split().first);
  const SequenceTagger a = SequenceTagger::train(sentences, {4, 9});
  const SequenceTagger b = SequenceTagger::train(sentences, {4, 9});
  std::stringstream sa, sb;
  a.write(sa);
  b.write(sb);
  CHECK(sa.str() == sb.str());

  const SequenceTagger back = SequenceTagger::read(sa);
  std::stringstream again;
  back.write(again);
  CHECK(again.str() == sb.str());
  for (const auto& ex : testing::snips_split().second.examples()) {
    const Tokens words = tokenize(ex.text, false);
    CHECK(back.decode(words) == a.decode(words));
  }
}

TEST_CASE("bad parameters and files") {
  CHECK_THROWS_AS(SequenceTagger::train(bio_of(toy_dates()), {-1, 0}), ParameterError);
  std::istringstream junk("nonsense line\n");
  CHECK_THROWS_AS(SequenceTagger::read(junk), LoadError);
}
