#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "inlu/corpus.hpp"
#include "inlu/types.hpp"

namespace inlu {

struct TaggerOptions {
  int epochs = 10;
  std::uint64_t seed = 0;
};

// Linear-chain BIO tagger trained as an averaged structured perceptron.
// Decoding is constrained Viterbi: "I-t" may only follow "B-t" or "I-t".
class SequenceTagger {
 public:
  SequenceTagger();

  static SequenceTagger train(std::span<const BioSentence> sentences, const TaggerOptions& options);

  // Viterbi-optimal tags for `words` (case is preserved for the word
  // feature). Pure; the result depends only on `words`.
  std::vector<std::string> decode(std::span<const std::string> words) const;

  const std::vector<std::string>& tags() const { return tags_; }
  const TaggerOptions& options() const { return options_; }
  int feature_count() const { return static_cast<int>(features_.size()); }

  // Header lines (`#tags`, `#epochs`, `#seed`) then `feature\ttag\tweight`
  // for every non-zero weight. Transition weights use the feature name
  // `prev=<tag>`, with `prev=<s>` for the sentence start.
  void write(std::ostream& out) const;
  static SequenceTagger read(std::istream& in);

  // Feature strings fired at `position`, in template order.
  static std::vector<std::string> token_features(std::span<const std::string> words,
                                                 std::size_t position);

 private:
  enum class Kind : std::uint8_t { Outside, Begin, Inside };

  void set_tags(std::vector<std::string> tags);
  bool allowed(int previous, int current) const;  // previous == tag count is the start state

  std::vector<int> viterbi(const std::vector<std::vector<int>>& feature_ids,
                           const Eigen::MatrixXd& emission,
                           const Eigen::MatrixXd& transition) const;

  std::vector<std::vector<int>> feature_ids(std::span<const std::string> words) const;

  std::vector<std::string> tags_;
  std::vector<Kind> kinds_;
  std::vector<int> types_;  // entity-type id per tag, -1 for "O"

  std::unordered_map<std::string, int> feature_index_;
  std::vector<std::string> features_;  // sorted

  Eigen::MatrixXd emission_;    // tags x features
  Eigen::MatrixXd transition_;  // (tags + 1) x tags, last row = start

  TaggerOptions options_;
};

// Maximal B-I runs become spans with confidence 1.
Entities extract_entities(std::span<const std::string> tags, std::span<const std::string> tokens);

}  // namespace inlu
