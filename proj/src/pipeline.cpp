#include "inlu/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "inlu/errors.hpp"
#include "text_io.hpp"

namespace inlu {

// ---------------------------------------------------------------------------
// Config

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing `# comment` that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(std::string_view value, int line_number) {
  value = trim(value);
  if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
    if (value.size() < 2 || value.back() != value.front()) {
      throw ConfigError("config line " + std::to_string(line_number) + ": unterminated quote");
    }
    return std::string(value.substr(1, value.size() - 2));
  }
  return std::string(value);
}

std::pair<std::string, std::string> split_key_value(std::string_view text, int line_number) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("config line " + std::to_string(line_number) + ": expected 'key: value'");
  }
  std::string key(trim(text.substr(0, colon)));
  if (key.empty()) throw ConfigError("config line " + std::to_string(line_number) + ": empty key");
  return {std::move(key), unquote(text.substr(colon + 1), line_number)};
}

}  // namespace

PipelineConfig PipelineConfig::parse(std::string_view text) {
  PipelineConfig config;
  config.language.clear();
  bool in_pipeline = false;
  bool saw_pipeline = false;
  std::size_t item_indent = 0;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view line = strip_comment(raw);
    if (trim(line).empty()) continue;
    const std::size_t indent = line.find_first_not_of(' ');
    if (line.find('\t') != std::string_view::npos && line.find('\t') < indent) {
      throw ConfigError("config line " + std::to_string(line_number) + ": tabs are not allowed");
    }
    const std::string_view content = trim(line);

    if (content.front() == '-') {
      if (!in_pipeline) {
        throw ConfigError("config line " + std::to_string(line_number) +
                          ": list item outside 'pipeline:'");
      }
      auto [key, value] = split_key_value(content.substr(1), line_number);
      if (key != "name") {
        throw ConfigError("config line " + std::to_string(line_number) +
                          ": pipeline entries must start with '- name:'");
      }
      if (value.empty()) {
        throw ConfigError("config line " + std::to_string(line_number) + ": empty component name");
      }
      config.components.push_back(ComponentSpec{std::move(value), {}});
      item_indent = indent;
      continue;
    }

    if (in_pipeline && !config.components.empty() && indent > item_indent) {
      auto [key, value] = split_key_value(content, line_number);
      auto& params = config.components.back().params;
      if (!params.emplace(key, std::move(value)).second) {
        throw ConfigError("config line " + std::to_string(line_number) + ": duplicate parameter '" +
                          key + "'");
      }
      continue;
    }

    if (indent != 0) {
      throw ConfigError("config line " + std::to_string(line_number) + ": unexpected indentation");
    }
    auto [key, value] = split_key_value(content, line_number);
    in_pipeline = false;
    if (key == "language") {
      config.language = value;
    } else if (key == "pipeline") {
      if (!value.empty()) {
        throw ConfigError("config line " + std::to_string(line_number) +
                          ": 'pipeline:' takes a list on the following lines");
      }
      if (saw_pipeline) {
        throw ConfigError("config line " + std::to_string(line_number) + ": duplicate 'pipeline:'");
      }
      in_pipeline = true;
      saw_pipeline = true;
    } else {
      throw ConfigError("config line " + std::to_string(line_number) + ": unknown key '" + key + "'");
    }
  }
  if (config.language.empty()) throw ConfigError("config is missing 'language'");
  if (!saw_pipeline || config.components.empty()) {
    throw ConfigError("config has no pipeline components");
  }
  return config;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string PipelineConfig::to_text() const {
  std::string out = "language: \"" + language + "\"\npipeline:\n";
  for (const ComponentSpec& c : components) {
    out += "- name: \"" + c.name + "\"\n";
    for (const auto& [key, value] : c.params) out += "  " + key + ": \"" + value + "\"\n";
  }
  return out;
}

PipelineConfig default_config() {
  PipelineConfig config;
  config.language = "en";
  for (const std::string& name : registered_components()) config.components.push_back({name, {}});
  return config;
}

void validate_pipeline(const PipelineConfig& config) {
  if (config.components.empty()) throw ConfigError("pipeline has no components");
  std::set<std::string> names;
  std::set<std::string, std::less<>> available;
  for (const ComponentSpec& spec : config.components) {
    if (!names.insert(spec.name).second) {
      throw ConfigError("component '" + spec.name + "' appears more than once");
    }
    const auto component = make_component(spec);
    for (std::string_view need : component->required_annotations()) {
      if (!available.contains(need)) {
        throw ConfigError("component '" + spec.name + "' needs '" + std::string(need) +
                          "' from an upstream component");
      }
    }
    for (std::string_view kind : component->provided_annotations()) available.emplace(kind);
  }
}

// ---------------------------------------------------------------------------
// Results

NluResult collect_result(const ModelBundle& bundle, const Blackboard& blackboard) {
  NluResult result;
  if (const Tokens* tokens = blackboard.find<Tokens>(keys::kTokens)) result.tokens = *tokens;

  const Component* intent_source = nullptr;
  const Component* entity_source = nullptr;
  for (const auto& component : bundle.components()) {
    const bool intents = component->provides(keys::kIntentDistribution);
    const bool entities = component->provides(keys::kEntities);
    if (!intents && !entities) continue;
    ComponentOutput& out = result.components[std::string(component->name())];
    if (intents) {
      const auto* ranking = blackboard.find<IntentDistribution>(
          producer_key(keys::kIntentDistribution, component->name()));
      if (ranking) out.intent_ranking = *ranking;
      intent_source = component.get();
    }
    if (entities) {
      const auto* spans =
          blackboard.find<Entities>(producer_key(keys::kEntities, component->name()));
      if (spans) out.entities = *spans;
      if (entity_source == nullptr || entity_source->name() != "entity_tagger_sequence") {
        entity_source = component.get();
      }
    }
  }
  if (intent_source) {
    result.intent_ranking = result.components.at(std::string(intent_source->name())).intent_ranking;
    if (!result.intent_ranking.empty()) {
      result.intent = result.intent_ranking.front().first;
      result.confidence = result.intent_ranking.front().second;
    }
  }
  if (entity_source) {
    result.entities = result.components.at(std::string(entity_source->name())).entities;
  }
  return result;
}

std::string format_result_line(const NluResult& result) {
  char confidence[32];
  std::snprintf(confidence, sizeof confidence, "%.6f", result.confidence);
  std::string line = result.intent + "\t" + confidence + "\t";
  for (std::size_t i = 0; i < result.entities.size(); ++i) {
    const EntitySpan& e = result.entities[i];
    if (i > 0) line += ';';
    line += e.type + ":" + e.value + ":" + std::to_string(e.start) + ":" + std::to_string(e.end);
  }
  return line;
}

// ---------------------------------------------------------------------------
// Bundle

namespace {

std::string checksum_of(const TrainingDataset& dataset) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a(to_json(dataset))));
  return hex;
}

std::vector<std::string> first_vocabulary(const std::vector<std::unique_ptr<Component>>& components) {
  for (const auto& c : components) {
    if (auto words = c->vocabulary(); !words.empty()) return words;
  }
  return {};
}

}  // namespace

std::shared_ptr<const ModelBundle> ModelBundle::train(const PipelineConfig& config,
                                                      const TrainingDataset& dataset,
                                                      std::uint64_t seed, TrainingReport* report) {
  validate_pipeline(config);
  if (dataset.empty()) throw DataError("training dataset is empty");

  std::shared_ptr<ModelBundle> bundle(new ModelBundle());
  bundle->config_ = config;
  bundle->seed_ = seed;
  bundle->checksum_ = checksum_of(dataset);
  bundle->training_examples_ = dataset.size();

  TrainingContext context(dataset, seed);
  context.warnings = dataset.warnings();
  for (const ComponentSpec& spec : config.components) {
    auto component = make_component(spec);
    const auto start = std::chrono::steady_clock::now();
    component->train(context);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    if (report) report->component_seconds.emplace_back(spec.name, elapsed.count());
    bundle->components_.push_back(std::move(component));
  }
  if (report) report->warnings = context.warnings;
  bundle->vocabulary_ = first_vocabulary(bundle->components_);
  return bundle;
}

void ModelBundle::persist(const fs::path& directory) const {
  fs::create_directories(directory);
  nlohmann::ordered_json manifest;
  manifest["schema_version"] = std::string(kSchemaVersion);
  manifest["language"] = config_.language;
  manifest["seed"] = seed_;
  manifest["training_checksum"] = checksum_;
  manifest["training_examples"] = training_examples_;
  auto& list = manifest["components"] = nlohmann::ordered_json::array();
  for (const ComponentSpec& spec : config_.components) {
    list.push_back({{"name", spec.name}, {"params", spec.params}});
  }
  {
    auto out = detail::open_output(directory / kManifest);
    out << manifest.dump(2) << '\n';
  }
  for (const auto& component : components_) {
    const fs::path sub = directory / component->name();
    fs::create_directories(sub);
    component->persist(sub);
  }
}

std::shared_ptr<const ModelBundle> ModelBundle::load(const fs::path& directory) {
  const fs::path manifest_path = directory / kManifest;
  if (!fs::exists(manifest_path)) {
    throw LoadError("no " + std::string(kManifest) + " in '" + directory.string() + "'");
  }
  nlohmann::json manifest;
  try {
    auto in = detail::open_input(manifest_path);
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed manifest: " + std::string(e.what()));
  }

  std::shared_ptr<ModelBundle> bundle(new ModelBundle());
  try {
    const std::string version = manifest.at("schema_version").get<std::string>();
    if (version != kSchemaVersion) {
      throw LoadError("unsupported bundle schema version '" + version + "'; expected '" +
                      std::string(kSchemaVersion) + "'");
    }
    bundle->config_.language = manifest.at("language").get<std::string>();
    bundle->seed_ = manifest.at("seed").get<std::uint64_t>();
    bundle->checksum_ = manifest.at("training_checksum").get<std::string>();
    bundle->training_examples_ = manifest.at("training_examples").get<std::size_t>();
    for (const auto& entry : manifest.at("components")) {
      bundle->config_.components.push_back(
          ComponentSpec{entry.at("name").get<std::string>(),
                        entry.at("params").get<std::map<std::string, std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed manifest: " + std::string(e.what()));
  }

  try {
    validate_pipeline(bundle->config_);
  } catch (const ConfigError& e) {
    throw LoadError(std::string("manifest pipeline is invalid: ") + e.what());
  }
  for (const ComponentSpec& spec : bundle->config_.components) {
    const fs::path sub = directory / spec.name;
    if (!fs::is_directory(sub)) {
      throw LoadError("bundle is missing the '" + spec.name + "' component directory");
    }
    auto component = make_component(spec);
    component->load(sub);
    bundle->components_.push_back(std::move(component));
  }
  bundle->vocabulary_ = first_vocabulary(bundle->components_);
  return bundle;
}

// ---------------------------------------------------------------------------
// Interpreter

Interpreter::Interpreter(std::shared_ptr<const ModelBundle> bundle) : bundle_(std::move(bundle)) {
  if (!bundle_) throw ConfigError("interpreter needs a model bundle");
  for (const auto& component : bundle_->components()) {
    sessions_.push_back(component->start_session());
  }
  prime();
}

Interpreter Interpreter::load(const fs::path& directory) {
  return Interpreter(ModelBundle::load(directory));
}

// Runs the (empty) hypothesis through every component so the blackboard
// holds the empty-utterance annotations.
void Interpreter::prime() {
  blackboard_.begin_cycle();
  for (auto& session : sessions_) session->process_utterance(blackboard_);
}

NluResult Interpreter::parse_incremental(EditType edit, std::optional<std::string_view> word) {
  if (edit == EditType::Add) {
    if (!word) throw InvalidPayloadError("ADD requires a word");
    validate_word(*word);
  } else if (word) {
    throw InvalidPayloadError("REVOKE does not take a word");
  }
  blackboard_.apply(edit, word);
  for (std::size_t i = 0; i < sessions_.size(); ++i) {
    sessions_[i]->process(blackboard_);
    if (observer_) observer_(i, bundle_->components()[i]->name(), blackboard_);
  }
  return result();
}

void Interpreter::new_utterance() {
  blackboard_.clear();
  for (auto& session : sessions_) session->new_utterance();
  prime();
}

NluResult Interpreter::parse_full(std::string_view utterance) {
  new_utterance();
  NluResult last = result();
  for (const std::string& word : tokenize(utterance, false)) last = add(word);
  return last;
}

NluResult Interpreter::parse_batch(std::string_view utterance) const {
  Blackboard board;
  for (const std::string& word : tokenize(utterance, false)) board.buffer().add(word);
  board.begin_cycle();
  for (const auto& component : bundle_->components()) {
    component->start_session()->process_utterance(board);
  }
  return collect_result(*bundle_, board);
}

NluResult Interpreter::result() const { return collect_result(*bundle_, blackboard_); }

}  // namespace inlu
