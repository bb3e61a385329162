#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inlu/corpus.hpp"
#include "inlu/pipeline.hpp"

namespace inlu {

struct IntentScores {
  double micro = 0.0;  // equals accuracy for single-label data
  double macro = 0.0;  // unweighted mean of per-class F1 over gold and predicted classes
};

IntentScores f1_intent(std::span<const std::string> predicted, std::span<const std::string> gold);

// Span-exact micro scores: a prediction counts only if type, start and end
// all match. With nothing predicted precision is 1; with nothing gold recall
// is 1; so two empty sides score 1 across the board.
struct SpanScores {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

SpanScores f1_entities(const std::vector<std::vector<TokenSpan>>& predicted,
                       const std::vector<std::vector<TokenSpan>>& gold);

std::vector<TokenSpan> to_token_spans(const Entities& entities);

// Scores of one producer on one route.
struct PathScores {
  std::optional<IntentScores> intent;
  std::optional<SpanScores> entities;
};

struct ComponentEquivalence {
  std::size_t exact = 0;              // utterances whose outputs matched bit for bit
  std::size_t within_tolerance = 0;   // probabilities within tolerance, same entities
  double max_deviation = 0.0;         // largest |p_stream - p_batch| over all intents
  double tolerance = 0.0;             // 0 for restart-incremental components
  PathScores batch;
  PathScores streamed;
};

struct EquivalenceReport {
  std::size_t utterances = 0;
  std::size_t exact_matches = 0;  // whole NluResult identical
  std::map<std::string, ComponentEquivalence> components;
  bool passed() const;
};

// Streams every test utterance word by word and compares the final result
// with the non-incremental route (Interpreter::parse_batch).
EquivalenceReport run_equivalence(std::shared_ptr<const ModelBundle> bundle,
                                  const TrainingDataset& test,
                                  double* max_normalization_error = nullptr);

struct NoiseConfig {
  double insertion_rate = 0.4;
  std::vector<std::string> noise_vocabulary;
  std::uint64_t seed = 0;
};

struct NoiseReport {
  double insertion_rate = 0.0;
  std::uint64_t seed = 0;
  std::size_t utterances = 0;
  std::size_t passes = 0;
  std::size_t noise_words = 0;
  std::map<std::string, std::size_t> component_passes;
  std::vector<bool> per_utterance;
  bool passed() const { return passes == utterances; }
};

// Before each true word, with probability insertion_rate, ADDs a noise word
// drawn uniformly from the vocabulary and REVOKEs it; then ADDs the true
// word. Each utterance passes if its final result equals the clean run.
NoiseReport run_noise_protocol(std::shared_ptr<const ModelBundle> bundle,
                               const TrainingDataset& test, const NoiseConfig& noise,
                               double* max_normalization_error = nullptr);

// Largest |sum(p) - 1| over the intent distributions in `result`.
double normalization_error(const NluResult& result);

struct EvalReport {
  std::size_t test_utterances = 0;
  std::uint64_t noise_seed = 0;
  std::uint64_t model_seed = 0;
  EquivalenceReport equivalence;
  std::vector<NoiseReport> noise;
  double max_normalization_error = 0.0;
  std::optional<double> sium_table_normalization_error;
  double runtime_seconds = 0.0;

  bool all_checks_passed() const;
  std::string to_table() const;
  // `key=value` lines.
  std::string to_key_values() const;
};

EvalReport evaluate(std::shared_ptr<const ModelBundle> bundle, const TrainingDataset& test,
                    std::span<const double> noise_rates, std::uint64_t noise_seed);

}  // namespace inlu
