#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "inlu/iu.hpp"
#include "inlu/types.hpp"

namespace inlu {

class TrainingDataset;

// Splits on runs of whitespace. No punctuation stripping, no sub-word
// splitting; lowercasing is ASCII only.
Tokens tokenize(std::string_view text, bool lowercase = true);

std::string to_lower(std::string_view text);

// Dense word index, frozen after fitting. Out-of-vocabulary words have no
// index and contribute nothing to a CountVector.
class Vocabulary {
 public:
  static constexpr int kOov = -1;

  Vocabulary() = default;

  // Indices follow first occurrence.
  static Vocabulary fit(const TrainingDataset& corpus, bool lowercase = true);
  static Vocabulary fit(std::span<const Tokens> sentences);

  int index_of(std::string_view word) const;
  bool contains(std::string_view word) const { return index_of(word) != kOov; }
  int size() const { return static_cast<int>(words_.size()); }

  // Words in index order.
  const std::vector<std::string>& words() const { return words_; }

  // `word\tindex` lines sorted by word.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  void insert(const std::string& word);

  std::unordered_map<std::string, int> index_;
  std::vector<std::string> words_;
};

CountVector zero_vector(const Vocabulary& vocab);

// Batch term counts of a token sequence.
CountVector count_tokens(const Vocabulary& vocab, std::span<const std::string> tokens);

// In-place incremental update: ADD increments the token's count, REVOKE
// decrements it; OOV tokens are a no-op. A REVOKE that would go negative
// throws ConsistencyError.
void vector_apply(CountVector& vec, const Vocabulary& vocab, std::string_view token, EditType edit);

inline CountVector vector_applied(CountVector vec, const Vocabulary& vocab, std::string_view token,
                                  EditType edit) {
  vector_apply(vec, vocab, token, edit);
  return vec;
}

}  // namespace inlu
