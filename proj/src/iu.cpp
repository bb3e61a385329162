#include "inlu/iu.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

namespace inlu {

void sort_ranking(IntentDistribution& ranking) {
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    return std::tie(b.second, a.first) < std::tie(a.second, b.first);
  });
}

std::string_view to_string(EditType edit) {
  return edit == EditType::Add ? "ADD" : "REVOKE";
}

EditType parse_edit_type(std::string_view text) {
  if (text == "ADD") return EditType::Add;
  if (text == "REVOKE") return EditType::Revoke;
  throw ParseError("unknown edit type '" + std::string(text) + "'");
}

std::string format_event(const IncrementalUnit& unit, EditType edit) {
  std::string line = std::to_string(unit.id);
  line += '\t';
  line += to_string(edit);
  line += '\t';
  line += unit.word;
  return line;
}

void validate_word(std::string_view word) {
  if (word.empty()) throw InvalidPayloadError("IU word is empty");
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  if (std::any_of(word.begin(), word.end(), is_space)) {
    throw InvalidPayloadError("IU word '" + std::string(word) + "' contains whitespace");
  }
}

const IncrementalUnit& IuBuffer::add(std::string_view word) {
  validate_word(word);
  units_.push_back(IncrementalUnit{next_id_++, std::string(word), surviving_, false});
  live_.push_back(units_.size() - 1);
  ++surviving_;
  return units_.back();
}

const IncrementalUnit& IuBuffer::revoke() {
  if (live_.empty()) throw UnderflowError("REVOKE on empty hypothesis");
  IncrementalUnit& unit = units_[live_.back()];
  live_.pop_back();
  unit.revoked = true;
  --surviving_;
  return unit;
}

Tokens IuBuffer::hypothesis() const {
  Tokens words;
  words.reserve(live_.size());
  for (std::size_t i : live_) words.push_back(units_[i].word);
  return words;
}

void IuBuffer::clear() {
  units_.clear();
  live_.clear();
  surviving_ = 0;
  next_id_ = 0;
}

std::string producer_key(std::string_view base, std::string_view component) {
  std::string key(base);
  key += '/';
  key += component;
  return key;
}

const IncrementalUnit& Blackboard::apply(EditType edit, std::optional<std::string_view> word) {
  if (edit == EditType::Add) {
    if (!word) throw InvalidPayloadError("ADD requires a word");
    last_unit_ = buffer_.add(*word);
  } else {
    last_unit_ = buffer_.revoke();
  }
  last_edit_ = edit;
  begin_cycle();
  return *last_unit_;
}

void Blackboard::put(std::string_view key, Annotation value, std::string_view writer) {
  auto it = writers_.find(key);
  if (it != writers_.end() && it->second != writer) {
    throw ConsistencyError("annotation '" + std::string(key) + "' already written by '" +
                           it->second + "' this cycle");
  }
  writers_.insert_or_assign(std::string(key), std::string(writer));
  annotations_.insert_or_assign(std::string(key), std::move(value));
}

bool Blackboard::contains(std::string_view key) const {
  return annotations_.find(key) != annotations_.end();
}

void Blackboard::clear() {
  buffer_.clear();
  annotations_.clear();
  writers_.clear();
  last_edit_.reset();
  last_unit_.reset();
  utterance_complete_ = false;
}

}  // namespace inlu
