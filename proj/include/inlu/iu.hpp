#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "inlu/errors.hpp"
#include "inlu/types.hpp"

namespace inlu {

enum class EditType { Add, Revoke };

// "ADD" / "REVOKE".
std::string_view to_string(EditType edit);
EditType parse_edit_type(std::string_view text);

struct IncrementalUnit {
  std::int64_t id = 0;
  std::string word;
  int position = 0;
  bool revoked = false;

  friend bool operator==(const IncrementalUnit&, const IncrementalUnit&) = default;
};

// Log line for one edit event: `<id>\t<ADD|REVOKE>\t<word>`.
std::string format_event(const IncrementalUnit& unit, EditType edit);

// Word-level IU store for one utterance. Units are kept in ADD order; a
// REVOKE flags the most recent surviving unit instead of erasing it.
class IuBuffer {
 public:
  const IncrementalUnit& add(std::string_view word);
  const IncrementalUnit& revoke();

  Tokens hypothesis() const;
  int surviving() const { return surviving_; }
  bool empty() const { return surviving_ == 0; }

  const std::vector<IncrementalUnit>& units() const { return units_; }

  void clear();

 private:
  std::vector<IncrementalUnit> units_;
  std::vector<std::size_t> live_;  // indices into units_, stack order
  int surviving_ = 0;
  std::int64_t next_id_ = 0;
};

// Throws InvalidPayloadError unless `word` is a non-empty whitespace-free
// string.
void validate_word(std::string_view word);

namespace keys {
inline constexpr std::string_view kTokens = "tokens";
inline constexpr std::string_view kCountVector = "count_vector";
inline constexpr std::string_view kEntities = "entities";
inline constexpr std::string_view kIntentDistribution = "intent_distribution";
}  // namespace keys

// Per-producer key, e.g. "intent_distribution/intent_sium". Used for the
// annotation kinds that more than one component may write.
std::string producer_key(std::string_view base, std::string_view component);

using Annotation = std::variant<Tokens, CountVector, Entities, IntentDistribution>;

// Shared per-utterance state: the IU buffer plus whatever the pipeline
// components have written about it.
class Blackboard {
 public:
  IuBuffer& buffer() { return buffer_; }
  const IuBuffer& buffer() const { return buffer_; }

  // Applies an edit to the buffer and opens a new annotation cycle.
  const IncrementalUnit& apply(EditType edit, std::optional<std::string_view> word);

  std::optional<EditType> last_edit() const { return last_edit_; }
  const std::optional<IncrementalUnit>& last_unit() const { return last_unit_; }

  // Starts a new write cycle without touching the buffer.
  void begin_cycle() { writers_.clear(); }

  // Writes `value` under `key`. A key may be written by one component per
  // cycle; a second writer is a ConsistencyError.
  void put(std::string_view key, Annotation value, std::string_view writer);

  bool contains(std::string_view key) const;

  template <typename T>
  const T* find(std::string_view key) const {
    auto it = annotations_.find(std::string(key));
    if (it == annotations_.end()) return nullptr;
    return std::get_if<T>(&it->second);
  }

  // Like find, but a missing or mistyped annotation is a ConfigError: it
  // means the pipeline order does not supply what a component needs.
  template <typename T>
  const T& get(std::string_view key) const {
    if (const T* value = find<T>(key)) return *value;
    throw ConfigError("annotation '" + std::string(key) +
                      "' is not available; check pipeline order");
  }

  const std::map<std::string, Annotation, std::less<>>& annotations() const {
    return annotations_;
  }

  bool utterance_complete() const { return utterance_complete_; }
  void flag_utterance_complete() { utterance_complete_ = true; }

  void clear();

 private:
  IuBuffer buffer_;
  std::map<std::string, Annotation, std::less<>> annotations_;
  std::map<std::string, std::string, std::less<>> writers_;
  std::optional<EditType> last_edit_;
  std::optional<IncrementalUnit> last_unit_;
  bool utterance_complete_ = false;
};

}  // namespace inlu
