// The registered pipeline components.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "inlu/entity_tagger.hpp"
#include "inlu/pipeline.hpp"
#include "inlu/restart_classifier.hpp"
#include "inlu/sium.hpp"
#include "text_io.hpp"

namespace inlu {
namespace {

using namespace std::string_view_literals;

// Typed access to a component's parameter map. Every key must be consumed;
// leftovers are reported as unknown parameters.
class Params {
 public:
  explicit Params(const ComponentSpec& spec) : spec_(spec) {}

  bool get_bool(const std::string& key, bool fallback) {
    const std::string* raw = take(key);
    if (!raw) return fallback;
    if (*raw == "true" || *raw == "1") return true;
    if (*raw == "false" || *raw == "0") return false;
    fail(key, *raw, "a boolean");
  }

  long long get_int(const std::string& key, long long fallback) {
    const std::string* raw = take(key);
    if (!raw) return fallback;
    long long value = 0;
    const auto r = std::from_chars(raw->data(), raw->data() + raw->size(), value);
    if (r.ec != std::errc() || r.ptr != raw->data() + raw->size()) fail(key, *raw, "an integer");
    return value;
  }

  std::optional<std::uint64_t> get_seed(const std::string& key) {
    const std::string* raw = take(key);
    if (!raw) return std::nullopt;
    std::uint64_t value = 0;
    const auto r = std::from_chars(raw->data(), raw->data() + raw->size(), value);
    if (r.ec != std::errc() || r.ptr != raw->data() + raw->size()) {
      fail(key, *raw, "a non-negative integer");
    }
    return value;
  }

  double get_double(const std::string& key, double fallback) {
    const std::string* raw = take(key);
    if (!raw) return fallback;
    double value = 0;
    const auto r = std::from_chars(raw->data(), raw->data() + raw->size(), value);
    if (r.ec != std::errc() || r.ptr != raw->data() + raw->size()) fail(key, *raw, "a number");
    return value;
  }

  void finish() const {
    for (const auto& [key, _] : spec_.params) {
      if (!used_.contains(key)) {
        throw ConfigError("component '" + spec_.name + "' has no parameter '" + key + "'");
      }
    }
  }

 private:
  const std::string* take(const std::string& key) {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& raw, const char* expected) const {
    throw ConfigError("component '" + spec_.name + "': parameter '" + key + "' = '" + raw +
                      "' is not " + expected);
  }

  const ComponentSpec& spec_;
  std::set<std::string> used_;
};

// Components write entity and intent annotations under per-producer keys so
// that several producers can share one pipeline.
std::string entities_key(std::string_view component) {
  return producer_key(keys::kEntities, component);
}
std::string intents_key(std::string_view component) {
  return producer_key(keys::kIntentDistribution, component);
}

class ComponentBase : public Component {
 public:
  explicit ComponentBase(ComponentSpec spec) : spec_(std::move(spec)) {}
  std::string_view name() const override { return spec_.name; }
  const ComponentSpec& spec() const override { return spec_; }

 protected:
  static fs::path model_file(const fs::path& directory, const char* file) {
    return directory / file;
  }

  ComponentSpec spec_;
};

// ---------------------------------------------------------------------------

class WhitespaceTokenizer final : public ComponentBase {
 public:
  explicit WhitespaceTokenizer(ComponentSpec spec) : ComponentBase(std::move(spec)) {
    Params p(spec_);
    lowercase_ = p.get_bool("lowercase", true);
    p.finish();
  }

  std::vector<std::string_view> required_annotations() const override { return {}; }
  std::vector<std::string_view> provided_annotations() const override { return {keys::kTokens}; }

  void train(TrainingContext& context) override {
    std::vector<Tokens> tokens;
    tokens.reserve(context.dataset.size());
    for (const TrainingExample& ex : context.dataset.examples()) {
      tokens.push_back(tokenize(ex.text, lowercase_));
    }
    context.tokens = std::move(tokens);
  }

  void persist(const fs::path& directory) const override {
    auto out = detail::open_output(directory / "tokenizer.txt");
    out << "lowercase\t" << (lowercase_ ? 1 : 0) << '\n';
  }

  void load(const fs::path& directory) override {
    auto in = detail::open_input(directory / "tokenizer.txt");
    std::string line;
    if (!std::getline(in, line) || (line != "lowercase\t1" && line != "lowercase\t0")) {
      throw LoadError("tokenizer.txt: expected 'lowercase\\t<0|1>'");
    }
    lowercase_ = line.back() == '1';
  }

  std::unique_ptr<ComponentSession> start_session() const override {
    return std::make_unique<Session>(*this);
  }

 private:
  class Session final : public ComponentSession {
   public:
    explicit Session(const WhitespaceTokenizer& owner) : owner_(owner) {}

    void process(Blackboard& bb) override {
      if (bb.last_edit() == EditType::Add) {
        const Tokens t = tokenize(bb.last_unit()->word, owner_.lowercase_);
        if (t.size() != 1) throw ConsistencyError("IU word did not yield exactly one token");
        tokens_.push_back(t.front());
      } else {
        if (tokens_.empty()) throw ConsistencyError("tokenizer REVOKE with no tokens");
        tokens_.pop_back();
      }
      bb.put(keys::kTokens, tokens_, owner_.name());
    }

    void process_utterance(Blackboard& bb) override {
      tokens_.clear();
      for (const std::string& word : bb.buffer().hypothesis()) {
        for (std::string& t : tokenize(word, owner_.lowercase_)) tokens_.push_back(std::move(t));
      }
      bb.put(keys::kTokens, tokens_, owner_.name());
    }

    void new_utterance() override { tokens_.clear(); }

   private:
    const WhitespaceTokenizer& owner_;
    Tokens tokens_;
  };

  bool lowercase_ = true;
};

// ---------------------------------------------------------------------------

class CountVectorsFeaturizer final : public ComponentBase {
 public:
  explicit CountVectorsFeaturizer(ComponentSpec spec) : ComponentBase(std::move(spec)) {
    Params p(spec_);
    lowercase_ = p.get_bool("lowercase", true);
    p.finish();
  }

  std::vector<std::string_view> required_annotations() const override { return {keys::kTokens}; }
  std::vector<std::string_view> provided_annotations() const override {
    return {keys::kCountVector};
  }

  void train(TrainingContext& context) override {
    if (!context.tokens) throw ConfigError("featurizer needs tokens from an upstream tokenizer");
    std::vector<Tokens> normalized;
    normalized.reserve(context.tokens->size());
    for (const Tokens& sentence : *context.tokens) normalized.push_back(normalize(sentence));
    auto vocab = std::make_shared<Vocabulary>(Vocabulary::fit(normalized));
    std::vector<CountVector> vectors;
    vectors.reserve(normalized.size());
    for (const Tokens& sentence : normalized) vectors.push_back(count_tokens(*vocab, sentence));
    vocabulary_ = vocab;
    context.vocabulary = vocab;
    context.count_vectors = std::move(vectors);
  }

  void persist(const fs::path& directory) const override {
    {
      auto out = detail::open_output(directory / "featurizer.txt");
      out << "lowercase\t" << (lowercase_ ? 1 : 0) << '\n';
    }
    auto out = detail::open_output(directory / "vocabulary.tsv");
    vocabulary_->write(out);
  }

  void load(const fs::path& directory) override {
    {
      auto in = detail::open_input(directory / "featurizer.txt");
      std::string line;
      if (!std::getline(in, line) || (line != "lowercase\t1" && line != "lowercase\t0")) {
        throw LoadError("featurizer.txt: expected 'lowercase\\t<0|1>'");
      }
      lowercase_ = line.back() == '1';
    }
    auto in = detail::open_input(directory / "vocabulary.tsv");
    vocabulary_ = std::make_shared<Vocabulary>(Vocabulary::read(in));
  }

  std::vector<std::string> vocabulary() const override { return vocabulary_->words(); }

  std::unique_ptr<ComponentSession> start_session() const override {
    return std::make_unique<Session>(*this);
  }

 private:
  Tokens normalize(const Tokens& tokens) const {
    if (!lowercase_) return tokens;
    Tokens out;
    out.reserve(tokens.size());
    for (const std::string& t : tokens) out.push_back(to_lower(t));
    return out;
  }

  class Session final : public ComponentSession {
   public:
    explicit Session(const CountVectorsFeaturizer& owner)
        : owner_(owner), vector_(zero_vector(*owner.vocabulary_)) {}

    void process(Blackboard& bb) override {
      const Tokens& tokens = bb.get<Tokens>(keys::kTokens);
      const Vocabulary& vocab = *owner_.vocabulary_;
      if (bb.last_edit() == EditType::Add) {
        if (tokens.empty()) throw ConsistencyError("featurizer ADD with no tokens");
        applied_.push_back(owner_.lowercase_ ? to_lower(tokens.back()) : tokens.back());
        vector_apply(vector_, vocab, applied_.back(), EditType::Add);
      } else {
        if (applied_.empty()) throw ConsistencyError("featurizer REVOKE with nothing applied");
        vector_apply(vector_, vocab, applied_.back(), EditType::Revoke);
        applied_.pop_back();
      }
      if (applied_.size() != tokens.size()) {
        throw ConsistencyError("featurizer is out of sync with the token stream");
      }
      bb.put(keys::kCountVector, vector_, owner_.name());
    }

    void process_utterance(Blackboard& bb) override {
      applied_ = owner_.normalize(bb.get<Tokens>(keys::kTokens));
      vector_ = count_tokens(*owner_.vocabulary_, applied_);
      bb.put(keys::kCountVector, vector_, owner_.name());
    }

    void new_utterance() override {
      applied_.clear();
      vector_.setZero();
    }

   private:
    const CountVectorsFeaturizer& owner_;
    CountVector vector_;
    Tokens applied_;
  };

  bool lowercase_ = true;
  std::shared_ptr<const Vocabulary> vocabulary_ = std::make_shared<Vocabulary>();
};

// ---------------------------------------------------------------------------

class SequenceEntityTagger final : public ComponentBase {
 public:
  explicit SequenceEntityTagger(ComponentSpec spec) : ComponentBase(std::move(spec)) {
    Params p(spec_);
    epochs_ = static_cast<int>(p.get_int("epochs", 10));
    seed_ = p.get_seed("seed");
    p.finish();
    if (epochs_ < 0) throw ConfigError("entity_tagger_sequence: epochs must be >= 0");
  }

  std::vector<std::string_view> required_annotations() const override { return {keys::kTokens}; }
  std::vector<std::string_view> provided_annotations() const override { return {keys::kEntities}; }

  void train(TrainingContext& context) override {
    std::vector<BioSentence> sentences;
    sentences.reserve(context.dataset.size());
    int snapped = 0;
    for (const TrainingExample& ex : context.dataset.examples()) {
      sentences.push_back(project_bio(ex));
      snapped += sentences.back().snapped;
    }
    if (snapped > 0) {
      context.warnings.push_back("entity tagger: " + std::to_string(snapped) +
                                 " entity span(s) snapped to token boundaries");
    }
    tagger_ = SequenceTagger::train(sentences, {epochs_, seed_.value_or(context.seed)});
  }

  void persist(const fs::path& directory) const override {
    auto out = detail::open_output(directory / "tagger.tsv");
    tagger_.write(out);
  }

  void load(const fs::path& directory) override {
    auto in = detail::open_input(directory / "tagger.tsv");
    tagger_ = SequenceTagger::read(in);
  }

  std::unique_ptr<ComponentSession> start_session() const override {
    return std::make_unique<Session>(*this);
  }

  const SequenceTagger& tagger() const { return tagger_; }

 private:
  // Restart-incremental: every edit re-decodes the whole surviving prefix.
  class Session final : public ComponentSession {
   public:
    explicit Session(const SequenceEntityTagger& owner) : owner_(owner) {}

    void process(Blackboard& bb) override { decode(bb); }
    void process_utterance(Blackboard& bb) override { decode(bb); }
    void new_utterance() override {}

   private:
    void decode(Blackboard& bb) const {
      const Tokens& tokens = bb.get<Tokens>(keys::kTokens);
      const Tokens words = bb.buffer().hypothesis();
      if (words.size() != tokens.size()) {
        throw ConsistencyError("entity tagger: tokens and IU words differ in length");
      }
      const std::vector<std::string> tags = owner_.tagger_.decode(words);
      bb.put(entities_key(owner_.name()), extract_entities(tags, words), owner_.name());
    }

    const SequenceEntityTagger& owner_;
  };

  int epochs_ = 10;
  std::optional<std::uint64_t> seed_;
  SequenceTagger tagger_;
};

// ---------------------------------------------------------------------------

class SiumIntentRecognizer final : public ComponentBase {
 public:
  explicit SiumIntentRecognizer(ComponentSpec spec) : ComponentBase(std::move(spec)) {
    Params p(spec_);
    options_.alpha = p.get_double("alpha", 1.0);
    options_.entity_threshold = p.get_double("entity_threshold", 0.6);
    p.finish();
    if (!(options_.alpha > 0.0)) throw ConfigError("intent_sium: alpha must be > 0");
    if (!(options_.entity_threshold > 0.0 && options_.entity_threshold <= 1.0)) {
      throw ConfigError("intent_sium: entity_threshold must lie in (0, 1]");
    }
  }

  std::vector<std::string_view> required_annotations() const override { return {keys::kTokens}; }
  std::vector<std::string_view> provided_annotations() const override {
    return {keys::kIntentDistribution, keys::kEntities};
  }

  void train(TrainingContext& context) override { model_ = SiumModel::train(context.dataset, options_); }

  void persist(const fs::path& directory) const override {
    auto out = detail::open_output(directory / "sium.tsv");
    model_.write(out);
  }

  void load(const fs::path& directory) override {
    auto in = detail::open_input(directory / "sium.tsv");
    model_ = SiumModel::read(in);
    options_ = model_.options();
  }

  std::vector<std::string> vocabulary() const override { return model_.vocabulary(); }

  std::optional<double> likelihood_normalization_error() const override {
    return model_.max_row_normalization_error();
  }

  std::unique_ptr<ComponentSession> start_session() const override {
    return std::make_unique<Session>(*this);
  }

  const SiumModel& model() const { return model_; }

 private:
  // Update-incremental: one Bayesian step per ADD, an exact undo per REVOKE.
  class Session final : public ComponentSession {
   public:
    explicit Session(const SiumIntentRecognizer& owner) : owner_(owner), state_(owner.model_) {}

    void process(Blackboard& bb) override {
      const SiumModel& model = owner_.model_;
      const Tokens& tokens = bb.get<Tokens>(keys::kTokens);
      if (bb.last_edit() == EditType::Add) {
        if (tokens.empty()) throw ConsistencyError("SIUM ADD with no tokens");
        state_.add(model, tokens.back());
        decisions_.push_back(sium_token_entity(model, tokens.back()));
      } else {
        if (state_.history().empty()) throw ConsistencyError("SIUM REVOKE with empty history");
        state_.revoke(model, state_.history().back());
        decisions_.pop_back();
      }
      if (state_.history().size() != tokens.size()) {
        throw ConsistencyError("SIUM is out of sync with the token stream");
      }
      publish(bb, state_.posterior(), merge_entity_decisions(model, decisions_, tokens));
    }

    void process_utterance(Blackboard& bb) override {
      const SiumModel& model = owner_.model_;
      const Tokens& tokens = bb.get<Tokens>(keys::kTokens);
      new_utterance();
      for (const std::string& t : tokens) {
        state_.add(model, t);
        decisions_.push_back(sium_token_entity(model, t));
      }
      publish(bb, sium_batch_posterior(model, tokens), sium_entities(model, tokens));
    }

    void new_utterance() override {
      state_.reset();
      decisions_.clear();
    }

   private:
    void publish(Blackboard& bb, const Eigen::VectorXd& posterior, Entities entities) const {
      bb.put(intents_key(owner_.name()), sium_ranking(owner_.model_, posterior), owner_.name());
      bb.put(entities_key(owner_.name()), std::move(entities), owner_.name());
    }

    const SiumIntentRecognizer& owner_;
    SiumState state_;
    std::vector<TokenEntityDecision> decisions_;
  };

  SiumOptions options_;
  SiumModel model_;
};

// ---------------------------------------------------------------------------

class BowIntentClassifier final : public ComponentBase {
 public:
  explicit BowIntentClassifier(ComponentSpec spec) : ComponentBase(std::move(spec)) {
    Params p(spec_);
    options_.epochs = static_cast<int>(p.get_int("epochs", 50));
    options_.learning_rate = p.get_double("learning_rate", 0.1);
    options_.l2 = p.get_double("l2", 1e-4);
    options_.batch_size = static_cast<int>(p.get_int("batch_size", 16));
    seed_ = p.get_seed("seed");
    p.finish();
  }

  std::vector<std::string_view> required_annotations() const override {
    return {keys::kCountVector};
  }
  std::vector<std::string_view> provided_annotations() const override {
    return {keys::kIntentDistribution};
  }

  void train(TrainingContext& context) override {
    if (!context.count_vectors || !context.vocabulary) {
      throw ConfigError("intent_classifier_bow needs count vectors from an upstream featurizer");
    }
    const auto& intents = context.dataset.intents();
    std::vector<int> labels;
    labels.reserve(context.dataset.size());
    for (const TrainingExample& ex : context.dataset.examples()) {
      labels.push_back(static_cast<int>(
          std::lower_bound(intents.begin(), intents.end(), ex.intent) - intents.begin()));
    }
    ClassifierOptions options = options_;
    options.seed = seed_.value_or(context.seed);
    model_ = train_classifier(*context.count_vectors, labels, intents, context.vocabulary->size(),
                              options, &context.warnings);
  }

  void persist(const fs::path& directory) const override {
    auto out = detail::open_output(directory / "weights.tsv");
    write_classifier(out, model_);
  }

  void load(const fs::path& directory) override {
    auto in = detail::open_input(directory / "weights.tsv");
    model_ = read_classifier(in);
    options_ = model_.options();
  }

  std::unique_ptr<ComponentSession> start_session() const override {
    return std::make_unique<Session>(*this);
  }

  const IntentClassifier& model() const { return model_; }

 private:
  // Restart-incremental: classifies the prefix count vector as if it were a
  // whole utterance; keeps no state between edits.
  class Session final : public ComponentSession {
   public:
    explicit Session(const BowIntentClassifier& owner) : owner_(owner) {}

    void process(Blackboard& bb) override { classify(bb); }
    void process_utterance(Blackboard& bb) override { classify(bb); }
    void new_utterance() override {}

   private:
    void classify(Blackboard& bb) const {
      const CountVector& vec = bb.get<CountVector>(keys::kCountVector);
      IntentDistribution ranking =
          bb.buffer().empty() ? owner_.model_.uniform() : owner_.model_.predict(vec);
      bb.put(intents_key(owner_.name()), std::move(ranking), owner_.name());
    }

    const BowIntentClassifier& owner_;
  };

  ClassifierOptions options_;
  std::optional<std::uint64_t> seed_;
  IntentClassifier model_;
};

}  // namespace

const std::vector<std::string>& registered_components() {
  static const std::vector<std::string> names{
      "tokenizer_whitespace", "featurizer_count_vectors", "entity_tagger_sequence", "intent_sium",
      "intent_classifier_bow"};
  return names;
}

std::unique_ptr<Component> make_component(const ComponentSpec& spec) {
  if (spec.name == "tokenizer_whitespace") return std::make_unique<WhitespaceTokenizer>(spec);
  if (spec.name == "featurizer_count_vectors") return std::make_unique<CountVectorsFeaturizer>(spec);
  if (spec.name == "entity_tagger_sequence") return std::make_unique<SequenceEntityTagger>(spec);
  if (spec.name == "intent_sium") return std::make_unique<SiumIntentRecognizer>(spec);
  if (spec.name == "intent_classifier_bow") return std::make_unique<BowIntentClassifier>(spec);
  throw ConfigError("unknown component '" + spec.name + "'");
}

bool Component::provides(std::string_view kind) const {
  const auto kinds = provided_annotations();
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

}  // namespace inlu
