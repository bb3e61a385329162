#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inlu/corpus.hpp"
#include "inlu/features.hpp"
#include "inlu/iu.hpp"
#include "inlu/types.hpp"

namespace inlu {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

struct ComponentSpec {
  std::string name;
  std::map<std::string, std::string> params;

  friend bool operator==(const ComponentSpec&, const ComponentSpec&) = default;
};

// Pipeline definition read from a small YAML subset:
//
//   language: "en"
//   pipeline:
//   - name: "tokenizer_whitespace"
//   - name: "intent_sium"
//     entity_threshold: 0.6
//
// Top-level keys are `language` and `pipeline`. Each list item starts with
// `- name: <component>`; following lines indented deeper than the dash are
// that component's `key: value` parameters. Values may be bare or wrapped
// in single or double quotes. `#` starts a comment outside quotes.
struct PipelineConfig {
  std::string language = "en";
  std::vector<ComponentSpec> components;

  static PipelineConfig parse(std::string_view text);
  static PipelineConfig load(const fs::path& path);
  std::string to_text() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Names accepted in `pipeline:` entries, in the canonical order.
const std::vector<std::string>& registered_components();

// The five-component pipeline used for the SNIPS experiment.
PipelineConfig default_config();

// ---------------------------------------------------------------------------
// Component contract

// Shared state threaded through training: the dataset plus whatever the
// upstream components derived from it.
struct TrainingContext {
  explicit TrainingContext(const TrainingDataset& data, std::uint64_t seed_value = 0)
      : dataset(data), seed(seed_value) {}

  const TrainingDataset& dataset;
  std::uint64_t seed;
  std::optional<std::vector<Tokens>> tokens;
  std::optional<std::vector<CountVector>> count_vectors;
  std::shared_ptr<const Vocabulary> vocabulary;
  std::vector<std::string> warnings;
};

// Per-utterance processing state of one component.
class ComponentSession {
 public:
  virtual ~ComponentSession() = default;

  // Handles the newest edit on the blackboard (blackboard.last_edit()).
  virtual void process(Blackboard& blackboard) = 0;

  // Non-incremental route: processes the whole current hypothesis at once
  // and leaves the session as if every word had been added in order.
  virtual void process_utterance(Blackboard& blackboard) = 0;

  // End-of-utterance signal; afterwards the session behaves like a new one.
  virtual void new_utterance() = 0;
};

// A trained pipeline stage. Immutable once trained or loaded; sessions hold
// all per-utterance state so one component can serve many interpreters.
class Component {
 public:
  virtual ~Component() = default;

  virtual std::string_view name() const = 0;
  virtual const ComponentSpec& spec() const = 0;

  // Annotation kinds (keys::*) this component reads / writes.
  virtual std::vector<std::string_view> required_annotations() const = 0;
  virtual std::vector<std::string_view> provided_annotations() const = 0;

  virtual void train(TrainingContext& context) = 0;
  virtual void persist(const fs::path& directory) const = 0;
  virtual void load(const fs::path& directory) = 0;

  virtual std::unique_ptr<ComponentSession> start_session() const = 0;

  // Words this component knows from training; empty if it keeps none.
  virtual std::vector<std::string> vocabulary() const { return {}; }

  // For generative components: largest deviation of a likelihood table
  // column from summing to one.
  virtual std::optional<double> likelihood_normalization_error() const { return std::nullopt; }

  bool provides(std::string_view kind) const;
};

// Throws ConfigError for unknown names or parameters.
std::unique_ptr<Component> make_component(const ComponentSpec& spec);

// Checks that every component's required annotations are produced upstream
// and that no component appears twice.
void validate_pipeline(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Results

struct ComponentOutput {
  IntentDistribution intent_ranking;
  Entities entities;

  friend bool operator==(const ComponentOutput&, const ComponentOutput&) = default;
};

struct NluResult {
  Tokens tokens;
  // Ranking of the last intent component in the pipeline; empty if none.
  IntentDistribution intent_ranking;
  // Top label, or empty when the pipeline has no intent component.
  std::string intent;
  double confidence = 0.0;
  // Entity tagger output if the pipeline has one, else the last entity
  // producer's.
  Entities entities;
  // Output of every intent/entity producer, keyed by component name.
  std::map<std::string, ComponentOutput> components;

  friend bool operator==(const NluResult&, const NluResult&) = default;
};

// `<intent>\t<confidence, 6 decimals>\t<type:value:start:end;...>`
std::string format_result_line(const NluResult& result);

// ---------------------------------------------------------------------------
// Model bundle

struct TrainingReport {
  std::vector<std::pair<std::string, double>> component_seconds;
  std::vector<std::string> warnings;
};

class ModelBundle {
 public:
  static constexpr std::string_view kSchemaVersion = "1";
  static constexpr std::string_view kManifest = "manifest.json";

  // Trains components in config order, each seeing the dataset plus what
  // its upstream components derived.
  static std::shared_ptr<const ModelBundle> train(const PipelineConfig& config,
                                                  const TrainingDataset& dataset,
                                                  std::uint64_t seed = 0,
                                                  TrainingReport* report = nullptr);

  // manifest.json plus one subdirectory per component.
  void persist(const fs::path& directory) const;
  static std::shared_ptr<const ModelBundle> load(const fs::path& directory);

  const PipelineConfig& config() const { return config_; }
  const std::vector<std::unique_ptr<Component>>& components() const { return components_; }
  const std::string& training_checksum() const { return checksum_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t training_examples() const { return training_examples_; }

  // Training vocabulary of the first component that keeps one.
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

 private:
  ModelBundle() = default;

  PipelineConfig config_;
  std::vector<std::unique_ptr<Component>> components_;
  std::string checksum_;
  std::uint64_t seed_ = 0;
  std::size_t training_examples_ = 0;
  std::vector<std::string> vocabulary_;
};

// ---------------------------------------------------------------------------
// Interpreter

// One utterance session over a shared, immutable bundle. Every edit runs
// each component's process() once, in pipeline order, before returning.
class Interpreter {
 public:
  using Observer = std::function<void(std::size_t index, std::string_view component,
                                      const Blackboard& blackboard)>;

  explicit Interpreter(std::shared_ptr<const ModelBundle> bundle);

  static Interpreter load(const fs::path& directory);

  // `word` must be present iff `edit` is ADD.
  NluResult parse_incremental(EditType edit, std::optional<std::string_view> word = std::nullopt);
  NluResult add(std::string_view word) { return parse_incremental(EditType::Add, word); }
  NluResult revoke() { return parse_incremental(EditType::Revoke); }

  // Clears the blackboard and signals end of utterance to every component.
  void new_utterance();

  // new_utterance, then ADD each whitespace token in order.
  NluResult parse_full(std::string_view utterance);

  // Non-incremental reference: fresh sessions process the whole utterance
  // at once. Does not touch this interpreter's state.
  NluResult parse_batch(std::string_view utterance) const;

  // Result for the current hypothesis.
  NluResult result() const;

  const Blackboard& blackboard() const { return blackboard_; }
  const ModelBundle& bundle() const { return *bundle_; }

  // Called after each component's process() during parse_incremental.
  void set_observer(Observer observer) { observer_ = std::move(observer); }

 private:
  void prime();

  std::shared_ptr<const ModelBundle> bundle_;
  std::vector<std::unique_ptr<ComponentSession>> sessions_;
  Blackboard blackboard_;
  Observer observer_;
};

// Builds an NluResult from the annotations on `blackboard`.
NluResult collect_result(const ModelBundle& bundle, const Blackboard& blackboard);

}  // namespace inlu
