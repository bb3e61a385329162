#include "inlu/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "inlu/errors.hpp"

namespace inlu {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

const json& member(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) throw ParseError(where + ": expected an object");
  auto it = object.find(key);
  if (it == object.end()) throw ParseError(where + "." + key + ": missing");
  return *it;
}

std::string string_member(const json& object, const char* key, const std::string& where) {
  const json& value = member(object, key, where);
  if (!value.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return value.get<std::string>();
}

int int_member(const json& object, const char* key, const std::string& where) {
  const json& value = member(object, key, where);
  if (!value.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return value.get<int>();
}

}  // namespace

TrainingDataset::TrainingDataset(std::vector<TrainingExample> examples)
    : examples_(std::move(examples)) {
  std::set<std::string> intents;
  std::set<std::string> types;
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    TrainingExample& ex = examples_[i];
    const std::string where = "example " + std::to_string(i) + " ('" + ex.text + "')";
    if (ex.intent.empty()) throw ValidationError(where + ": empty intent label");
    intents.insert(ex.intent);
    const int length = static_cast<int>(ex.text.size());
    std::sort(ex.entities.begin(), ex.entities.end(),
              [](const CharSpan& a, const CharSpan& b) { return a.start < b.start; });
    for (std::size_t k = 0; k < ex.entities.size(); ++k) {
      CharSpan& span = ex.entities[k];
      if (span.start < 0 || span.start >= span.end || span.end > length) {
        throw ValidationError(where + ": entity span [" + std::to_string(span.start) + ", " +
                              std::to_string(span.end) + ") out of range");
      }
      if (span.entity.empty()) throw ValidationError(where + ": entity with empty type");
      if (k > 0 && span.start < ex.entities[k - 1].end) {
        throw ValidationError(where + ": overlapping entity spans");
      }
      std::string slice = ex.text.substr(span.start, span.end - span.start);
      if (span.value != slice) {
        warnings_.push_back(where + ": entity value '" + span.value + "' replaced by '" + slice +
                            "'");
        span.value = std::move(slice);
      }
      types.insert(span.entity);
    }
    if (const int snapped = project_bio(ex).snapped; snapped > 0) {
      warnings_.push_back(where + ": " + std::to_string(snapped) +
                          " entity span(s) snapped to token boundaries");
    }
  }
  intents_.assign(intents.begin(), intents.end());
  entity_types_.assign(types.begin(), types.end());
}

TrainingDataset parse_json(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  const json& data = member(root, "rasa_nlu_data", "$");
  const json& common = member(data, "common_examples", "$.rasa_nlu_data");
  if (!common.is_array()) throw ParseError("$.rasa_nlu_data.common_examples: expected an array");

  std::vector<TrainingExample> examples;
  examples.reserve(common.size());
  for (std::size_t i = 0; i < common.size(); ++i) {
    const std::string where = "$.rasa_nlu_data.common_examples[" + std::to_string(i) + "]";
    const json& item = common[i];
    TrainingExample ex;
    ex.text = string_member(item, "text", where);
    ex.intent = string_member(item, "intent", where);
    if (item.contains("entities")) {
      const json& entities = item.at("entities");
      if (!entities.is_array()) throw ParseError(where + ".entities: expected an array");
      for (std::size_t k = 0; k < entities.size(); ++k) {
        const std::string ewhere = where + ".entities[" + std::to_string(k) + "]";
        CharSpan span;
        span.start = int_member(entities[k], "start", ewhere);
        span.end = int_member(entities[k], "end", ewhere);
        span.entity = string_member(entities[k], "entity", ewhere);
        span.value = entities[k].contains("value") ? string_member(entities[k], "value", ewhere)
                                                   : std::string();
        ex.entities.push_back(std::move(span));
      }
    }
    examples.push_back(std::move(ex));
  }
  return TrainingDataset(std::move(examples));
}

TrainingDataset load_json(const std::filesystem::path& path) { return parse_json(read_file(path)); }

std::string to_json(const TrainingDataset& dataset) {
  json common = json::array();
  for (const TrainingExample& ex : dataset.examples()) {
    json entities = json::array();
    for (const CharSpan& span : ex.entities) {
      entities.push_back(
          {{"start", span.start}, {"end", span.end}, {"value", span.value}, {"entity", span.entity}});
    }
    common.push_back({{"text", ex.text}, {"intent", ex.intent}, {"entities", entities}});
  }
  json root = {{"rasa_nlu_data", {{"common_examples", common}}}};
  return root.dump(2) + "\n";
}

namespace {

// One `- ...` line with inline `[value](type)` annotations.
TrainingExample parse_markdown_example(std::string_view line, const std::string& intent,
                                       int line_number) {
  auto fail = [&](const std::string& what) {
    throw ParseError("line " + std::to_string(line_number) + ": " + what);
  };
  TrainingExample ex;
  ex.intent = intent;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ']' || c == ')') {
      // A stray ')' is ordinary text; a stray ']' means an unopened bracket.
      if (c == ']') fail("unbalanced ']'");
      ex.text += c;
      ++i;
      continue;
    }
    if (c != '[') {
      ex.text += c;
      ++i;
      continue;
    }
    const std::size_t close = line.find(']', i + 1);
    if (close == std::string_view::npos) fail("unbalanced '['");
    const std::string_view value = line.substr(i + 1, close - i - 1);
    if (value.find('[') != std::string_view::npos) fail("nested '['");
    if (close + 1 >= line.size() || line[close + 1] != '(') fail("entity missing '(type)'");
    const std::size_t type_end = line.find(')', close + 2);
    if (type_end == std::string_view::npos) fail("unbalanced '('");
    const std::string_view type = line.substr(close + 2, type_end - close - 2);
    if (type.empty()) fail("entity with empty type");
    CharSpan span;
    span.start = static_cast<int>(ex.text.size());
    ex.text += value;
    span.end = static_cast<int>(ex.text.size());
    span.entity = std::string(type);
    span.value = std::string(value);
    if (span.end == span.start) fail("entity with empty value");
    ex.entities.push_back(std::move(span));
    i = type_end + 1;
  }
  return ex;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

TrainingDataset parse_markdown(std::string_view document) {
  std::vector<TrainingExample> examples;
  std::string intent;
  bool saw_intent_header = false;
  bool in_intent_section = false;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    std::size_t nl = document.find('\n', pos);
    if (nl == std::string_view::npos) nl = document.size();
    std::string_view line = document.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view content = trim(line);
    if (content.starts_with("##")) {
      const std::string_view header = trim(content.substr(2));
      in_intent_section = header.starts_with("intent:");
      if (in_intent_section) {
        intent = std::string(trim(header.substr(7)));
        if (intent.empty()) {
          throw ParseError("line " + std::to_string(line_number) + ": empty intent label");
        }
        saw_intent_header = true;
      }
      continue;
    }
    if (!in_intent_section || content.empty()) continue;
    if (content.front() != '-' && content.front() != '*') continue;
    const std::string_view body = trim(content.substr(1));
    if (body.empty()) continue;
    examples.push_back(parse_markdown_example(body, intent, line_number));
  }
  if (!saw_intent_header || examples.empty()) {
    throw DataError("markdown training data contains no '## intent:' examples");
  }
  return TrainingDataset(std::move(examples));
}

TrainingDataset load_markdown(const std::filesystem::path& path) {
  return parse_markdown(read_file(path));
}

std::string to_markdown(const TrainingDataset& dataset) {
  std::string out;
  for (const std::string& intent : dataset.intents()) {
    out += "## intent:" + intent + "\n";
    for (const TrainingExample& ex : dataset.examples()) {
      if (ex.intent != intent) continue;
      out += "- ";
      int pos = 0;
      for (const CharSpan& span : ex.entities) {
        out.append(ex.text, pos, span.start - pos);
        out += "[" + span.value + "](" + span.entity + ")";
        pos = span.end;
      }
      out.append(ex.text, pos);
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

TrainingDataset load_dataset(const std::filesystem::path& path) {
  return path.extension() == ".md" ? load_markdown(path) : load_json(path);
}

std::pair<TrainingDataset, TrainingDataset> stratified_split(const TrainingDataset& dataset,
                                                             double test_fraction,
                                                             std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw ParameterError("test fraction must lie in [0, 1]");
  }
  std::map<std::string, std::vector<std::size_t>> by_intent;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_intent[dataset.examples()[i].intent].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> in_test(dataset.size(), false);
  for (auto& [intent, indices] : by_intent) {
    if (indices.size() < 2) {
      throw SplitError("intent '" + intent + "' has fewer than 2 examples");
    }
    std::shuffle(indices.begin(), indices.end(), rng);
    const auto n_test =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(indices.size())));
    for (std::size_t k = 0; k < n_test; ++k) in_test[indices[k]] = true;
  }
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> test;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (in_test[i] ? test : train).push_back(dataset.examples()[i]);
  }
  return {TrainingDataset(std::move(train)), TrainingDataset(std::move(test))};
}

BioSentence project_bio(const TrainingExample& example) {
  BioSentence out;
  std::vector<std::pair<int, int>> offsets;
  const std::string& text = example.text;
  const int n = static_cast<int>(text.size());
  int i = 0;
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    const int start = i;
    while (i < n && !is_space(text[i])) ++i;
    offsets.emplace_back(start, i);
    out.words.push_back(text.substr(start, i - start));
  }
  out.tags.assign(out.words.size(), "O");
  for (const CharSpan& span : example.entities) {
    int first = -1;
    int last = -1;
    bool exact_start = false;
    bool exact_end = false;
    for (int t = 0; t < static_cast<int>(offsets.size()); ++t) {
      const auto [ts, te] = offsets[t];
      if (te <= span.start || ts >= span.end) continue;
      if (first < 0) {
        first = t;
        exact_start = ts == span.start;
      }
      last = t;
      exact_end = te == span.end;
    }
    if (first < 0) continue;  // span covers only whitespace
    if (!exact_start || !exact_end) ++out.snapped;
    // Snapping may make neighbouring spans meet on one token; the earlier
    // span keeps it.
    if (out.tags[first] != "O") {
      if (first == last) continue;
      ++first;
    }
    out.tags[first] = "B-" + span.entity;
    for (int t = first + 1; t <= last; ++t) out.tags[t] = "I-" + span.entity;
  }
  return out;
}

std::vector<TokenSpan> bio_spans(const std::vector<std::string>& tags) {
  std::vector<TokenSpan> spans;
  const int n = static_cast<int>(tags.size());
  int t = 0;
  while (t < n) {
    const std::string& tag = tags[t];
    if (tag.size() < 2 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') {
      ++t;
      continue;
    }
    const std::string type = tag.substr(2);
    const int start = t++;
    while (t < n && tags[t] == "I-" + type) ++t;
    spans.push_back(TokenSpan{type, start, t});
  }
  return spans;
}

}  // namespace inlu
