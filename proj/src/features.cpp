#include "inlu/features.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include "inlu/corpus.hpp"
#include "inlu/errors.hpp"
#include "text_io.hpp"

namespace inlu {

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Tokens tokenize(std::string_view text, bool lowercase) {
  Tokens tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (i < n) {
    while (i < n && space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t start = i;
    while (i < n && !space(text[i])) ++i;
    std::string_view token = text.substr(start, i - start);
    tokens.push_back(lowercase ? to_lower(token) : std::string(token));
  }
  return tokens;
}

void Vocabulary::insert(const std::string& word) {
  if (index_.try_emplace(word, static_cast<int>(words_.size())).second) words_.push_back(word);
}

Vocabulary Vocabulary::fit(const TrainingDataset& corpus, bool lowercase) {
  if (corpus.empty()) throw DataError("cannot fit a vocabulary on an empty corpus");
  Vocabulary vocab;
  for (const TrainingExample& ex : corpus.examples()) {
    for (const std::string& token : tokenize(ex.text, lowercase)) vocab.insert(token);
  }
  return vocab;
}

Vocabulary Vocabulary::fit(std::span<const Tokens> sentences) {
  if (sentences.empty()) throw DataError("cannot fit a vocabulary on an empty corpus");
  Vocabulary vocab;
  for (const Tokens& sentence : sentences) {
    for (const std::string& token : sentence) vocab.insert(token);
  }
  return vocab;
}

int Vocabulary::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kOov : it->second;
}

void Vocabulary::write(std::ostream& out) const {
  std::vector<std::string> sorted = words_;
  std::sort(sorted.begin(), sorted.end());
  for (const std::string& word : sorted) out << word << '\t' << index_.at(word) << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::vector<std::pair<int, std::string>> entries;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 2) {
      throw LoadError("vocabulary line " + std::to_string(line_number) + ": expected word\\tindex");
    }
    entries.emplace_back(detail::parse_int(fields[1], "vocabulary index"), std::string(fields[0]));
  }
  std::sort(entries.begin(), entries.end());
  Vocabulary vocab;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != static_cast<int>(i)) {
      throw LoadError("vocabulary indices are not a permutation of 0..size-1");
    }
    vocab.insert(entries[i].second);
  }
  if (vocab.size() != static_cast<int>(entries.size())) {
    throw LoadError("vocabulary contains duplicate words");
  }
  return vocab;
}

CountVector zero_vector(const Vocabulary& vocab) { return CountVector::Zero(vocab.size()); }

CountVector count_tokens(const Vocabulary& vocab, std::span<const std::string> tokens) {
  CountVector vec = zero_vector(vocab);
  for (const std::string& token : tokens) {
    if (const int i = vocab.index_of(token); i != Vocabulary::kOov) ++vec[i];
  }
  return vec;
}

void vector_apply(CountVector& vec, const Vocabulary& vocab, std::string_view token,
                  EditType edit) {
  if (vec.size() != vocab.size()) {
    throw ConsistencyError("count vector length does not match the vocabulary");
  }
  const int i = vocab.index_of(token);
  if (i == Vocabulary::kOov) return;
  if (edit == EditType::Add) {
    ++vec[i];
    return;
  }
  if (vec[i] == 0) {
    throw ConsistencyError("REVOKE of '" + std::string(token) +
                           "' would make its count negative; featurizer out of sync");
  }
  --vec[i];
}

}  // namespace inlu
