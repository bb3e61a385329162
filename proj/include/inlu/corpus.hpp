#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "inlu/types.hpp"

namespace inlu {

// Character-offset entity annotation; `end` is exclusive.
struct CharSpan {
  int start = 0;
  int end = 0;
  std::string entity;
  std::string value;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct TrainingExample {
  std::string text;
  std::string intent;
  std::vector<CharSpan> entities;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

// Entity span in token coordinates, as used for span-exact scoring.
struct TokenSpan {
  std::string type;
  int start = 0;
  int end = 0;

  friend auto operator<=>(const TokenSpan&, const TokenSpan&) = default;
};

class TrainingDataset {
 public:
  TrainingDataset() = default;

  // Validates every example (offsets in range, spans non-overlapping) and
  // builds the label inventories. A span whose value disagrees with the
  // text slice is repaired from the offsets and reported in warnings().
  explicit TrainingDataset(std::vector<TrainingExample> examples);

  const std::vector<TrainingExample>& examples() const { return examples_; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }

  // Sorted distinct labels.
  const std::vector<std::string>& intents() const { return intents_; }
  const std::vector<std::string>& entity_types() const { return entity_types_; }

  const std::vector<std::string>& warnings() const { return warnings_; }

  friend bool operator==(const TrainingDataset& a, const TrainingDataset& b) {
    return a.examples_ == b.examples_;
  }

 private:
  std::vector<TrainingExample> examples_;
  std::vector<std::string> intents_;
  std::vector<std::string> entity_types_;
  std::vector<std::string> warnings_;
};

// RASA common-examples JSON:
//   {"rasa_nlu_data": {"common_examples": [
//       {"text", "intent", "entities": [{"start", "end", "value", "entity"}]}]}}
TrainingDataset load_json(const std::filesystem::path& path);
TrainingDataset parse_json(std::string_view document);
std::string to_json(const TrainingDataset& dataset);

// RASA markdown: `## intent:<label>` sections holding `- <example>` lines,
// with inline entities written `[value](type)`.
TrainingDataset load_markdown(const std::filesystem::path& path);
TrainingDataset parse_markdown(std::string_view document);
std::string to_markdown(const TrainingDataset& dataset);

// Dispatches on extension: ".md" is markdown, anything else JSON.
TrainingDataset load_dataset(const std::filesystem::path& path);

// Per-intent seeded split; each intent contributes round(n * test_fraction)
// examples to the test side. Relative order of examples is preserved.
std::pair<TrainingDataset, TrainingDataset> stratified_split(const TrainingDataset& dataset,
                                                             double test_fraction,
                                                             std::uint64_t seed);

// Whitespace tokens of an example with BIO tags. Character spans are snapped
// outward to the tokens they touch; `snapped` counts spans that needed it.
struct BioSentence {
  Tokens words;
  std::vector<std::string> tags;
  int snapped = 0;
};

BioSentence project_bio(const TrainingExample& example);

// Maximal B/I runs of a BIO tag sequence.
std::vector<TokenSpan> bio_spans(const std::vector<std::string>& tags);

}  // namespace inlu
