#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "inlu/iu.hpp"
#include "inlu/types.hpp"

namespace inlu {

class TrainingDataset;

struct SiumOptions {
  double alpha = 1.0;             // add-alpha smoothing, must be > 0
  double entity_threshold = 0.6;  // token posterior must exceed this
  bool lowercase = true;
};

// Generative word model behind the update-incremental intent recognizer.
//
// Intents carry add-alpha smoothed unigram tables log P(w | intent) over the
// training vocabulary plus one OOV bucket, and a uniform prior. Entity
// classes (every entity type plus "O" for tokens outside any span) carry the
// same kind of table, used for per-token entity decisions.
class SiumModel {
 public:
  static constexpr std::string_view kNoEntity = "O";

  SiumModel() = default;

  static SiumModel train(const TrainingDataset& dataset, const SiumOptions& options = {});

  const std::vector<std::string>& intents() const { return intents_; }
  // Entity types followed by kNoEntity.
  const std::vector<std::string>& entity_classes() const { return entity_classes_; }
  const SiumOptions& options() const { return options_; }

  const Eigen::VectorXd& log_prior() const { return log_prior_; }

  // Row of the vocabulary (or the OOV row) in the likelihood tables.
  int word_row(std::string_view word) const;
  int oov_row() const { return static_cast<int>(vocabulary_.size()); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  // log P(word | intent) for every intent.
  auto intent_log_likelihood(std::string_view word) const {
    return word_given_intent_.row(word_row(word)).transpose();
  }
  auto entity_log_likelihood(std::string_view word) const {
    return word_given_entity_.row(word_row(word)).transpose();
  }

  // Largest |sum_w P(w | c) - 1| over all intent and entity classes.
  double max_row_normalization_error() const;

  // Header (`#alpha`, `#threshold`, `#lowercase`, `#prior`), then
  // `intent\t<label>\t<word>\t<logprob>` and `entity\t<label>\t<word>\t<logprob>`
  // rows. The OOV bucket is written as `oov_intent` / `oov_entity` rows
  // without a word field.
  void write(std::ostream& out) const;
  static SiumModel read(std::istream& in);

 private:
  std::vector<std::string> intents_;
  std::vector<std::string> entity_classes_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> rows_;
  Eigen::VectorXd log_prior_;
  Eigen::MatrixXd word_given_intent_;  // (|V| + 1) x intents, log space
  Eigen::MatrixXd word_given_entity_;  // (|V| + 1) x entity classes, log space
  SiumOptions options_;
};

// Per-utterance SIUM state.
//
// The accumulated log posterior is kept as a stack of snapshots, one per
// applied word, so a REVOKE restores the previous vector exactly instead of
// subtracting in floating point.
class SiumState {
 public:
  explicit SiumState(const SiumModel& model);

  void add(const SiumModel& model, std::string_view word);
  // `word` must equal the most recently added word.
  void revoke(const SiumModel& model, std::string_view word);

  const Eigen::VectorXd& log_posterior() const { return snapshots_.back(); }
  Eigen::VectorXd posterior() const;
  const std::vector<std::string>& history() const { return history_; }

  void reset();

 private:
  std::vector<Eigen::VectorXd> snapshots_;
  std::vector<std::string> history_;
};

// Non-incremental route: prior plus the words' log likelihoods, summed in
// order, then normalized.
Eigen::VectorXd sium_batch_posterior(const SiumModel& model, std::span<const std::string> words);

// Ranked intents for a normalized posterior.
IntentDistribution sium_ranking(const SiumModel& model, const Eigen::VectorXd& posterior);

// Top intent and its probability; ties go to the lexicographically smallest
// label.
std::pair<std::string, double> sium_classify(const SiumModel& model, const SiumState& state);

// Per-token entity decision: the argmax class of P(class | word) under a
// uniform class prior, kept only if it is an entity type and its posterior
// exceeds the model's threshold.
struct TokenEntityDecision {
  int entity_class = -1;  // index into entity_classes(), -1 for none
  double posterior = 0.0;
};

TokenEntityDecision sium_token_entity(const SiumModel& model, std::string_view token);

// Adjacent tokens with the same class merge into one span whose confidence
// is the smallest token posterior.
Entities merge_entity_decisions(const SiumModel& model,
                                std::span<const TokenEntityDecision> decisions,
                                std::span<const std::string> tokens);

Entities sium_entities(const SiumModel& model, std::span<const std::string> tokens);

// exp-normalize in log space.
Eigen::VectorXd normalize_log(const Eigen::VectorXd& log_scores);

}  // namespace inlu
