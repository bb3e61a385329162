#include "inlu/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "inlu/errors.hpp"
#include "inlu/features.hpp"

namespace inlu {
namespace {

constexpr double kSiumTolerance = 1e-9;

std::string fixed(double value, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string sci(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", value);
  return buf;
}

double max_ranking_deviation(const IntentDistribution& a, const IntentDistribution& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::map<std::string, double> lookup(b.begin(), b.end());
  double worst = 0.0;
  for (const auto& [label, p] : a) {
    auto it = lookup.find(label);
    if (it == lookup.end()) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(p - it->second));
  }
  return worst;
}

// Per-route collected predictions for one producer.
struct Collected {
  std::vector<std::string> intents;
  std::vector<std::vector<TokenSpan>> spans;
};

PathScores score(const Collected& c, bool has_intent, bool has_entities,
                 std::span<const std::string> gold_intents,
                 const std::vector<std::vector<TokenSpan>>& gold_spans) {
  PathScores s;
  if (has_intent) s.intent = f1_intent(c.intents, gold_intents);
  if (has_entities) s.entities = f1_entities(c.spans, gold_spans);
  return s;
}

void collect(Collected& into, const ComponentOutput& out) {
  into.intents.push_back(out.intent_ranking.empty() ? std::string()
                                                    : out.intent_ranking.front().first);
  into.spans.push_back(to_token_spans(out.entities));
}

Tokens words_of(const TrainingExample& ex) { return tokenize(ex.text, false); }

void track(double* worst, const NluResult& result) {
  if (worst) *worst = std::max(*worst, normalization_error(result));
}

}  // namespace

IntentScores f1_intent(std::span<const std::string> predicted, std::span<const std::string> gold) {
  if (predicted.size() != gold.size()) {
    throw ConsistencyError("intent predictions and gold labels differ in length");
  }
  IntentScores s;
  if (gold.empty()) return s;
  std::map<std::string, std::array<std::size_t, 3>> counts;  // tp, fp, fn
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] == gold[i]) {
      ++correct;
      ++counts[gold[i]][0];
    } else {
      ++counts[predicted[i]][1];
      ++counts[gold[i]][2];
    }
  }
  s.micro = static_cast<double>(correct) / static_cast<double>(gold.size());
  double sum = 0.0;
  for (const auto& [label, c] : counts) {
    const double denom = static_cast<double>(2 * c[0] + c[1] + c[2]);
    sum += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(c[0]) / denom;
  }
  s.macro = sum / static_cast<double>(counts.size());
  return s;
}

SpanScores f1_entities(const std::vector<std::vector<TokenSpan>>& predicted,
                       const std::vector<std::vector<TokenSpan>>& gold) {
  if (predicted.size() != gold.size()) {
    throw ConsistencyError("entity predictions and gold spans cover different utterance counts");
  }
  SpanScores s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::multiset<TokenSpan> remaining(gold[i].begin(), gold[i].end());
    for (const TokenSpan& p : predicted[i]) {
      if (auto it = remaining.find(p); it != remaining.end()) {
        ++s.true_positives;
        remaining.erase(it);
      }
    }
    s.predicted += predicted[i].size();
    s.gold += gold[i].size();
  }
  const auto tp = static_cast<double>(s.true_positives);
  s.precision = s.predicted == 0 ? 1.0 : tp / static_cast<double>(s.predicted);
  s.recall = s.gold == 0 ? 1.0 : tp / static_cast<double>(s.gold);
  s.f1 = s.precision + s.recall == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

std::vector<TokenSpan> to_token_spans(const Entities& entities) {
  std::vector<TokenSpan> spans;
  spans.reserve(entities.size());
  for (const EntitySpan& e : entities) spans.push_back(TokenSpan{e.type, e.start, e.end});
  return spans;
}

double normalization_error(const NluResult& result) {
  double worst = 0.0;
  for (const auto& [name, out] : result.components) {
    if (out.intent_ranking.empty()) continue;
    double sum = 0.0;
    for (const auto& [label, p] : out.intent_ranking) sum += p;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

bool EquivalenceReport::passed() const {
  for (const auto& [name, c] : components) {
    if (c.within_tolerance != utterances) return false;
  }
  return true;
}

EquivalenceReport run_equivalence(std::shared_ptr<const ModelBundle> bundle,
                                  const TrainingDataset& test, double* max_normalization_error) {
  Interpreter interpreter(bundle);
  EquivalenceReport report;
  report.utterances = test.size();

  std::vector<std::string> gold_intents;
  std::vector<std::vector<TokenSpan>> gold_spans;
  std::map<std::string, std::pair<Collected, Collected>> routes;  // batch, streamed

  for (const TrainingExample& ex : test.examples()) {
    gold_intents.push_back(ex.intent);
    gold_spans.push_back(bio_spans(project_bio(ex).tags));

    const NluResult batch = interpreter.parse_batch(ex.text);
    interpreter.new_utterance();
    NluResult streamed = interpreter.result();
    track(max_normalization_error, streamed);
    for (const std::string& word : words_of(ex)) {
      streamed = interpreter.add(word);
      track(max_normalization_error, streamed);
    }
    track(max_normalization_error, batch);
    if (streamed == batch) ++report.exact_matches;

    for (const auto& [name, b] : batch.components) {
      const ComponentOutput& s = streamed.components.at(name);
      ComponentEquivalence& eq = report.components[name];
      eq.tolerance = name == "intent_sium" ? kSiumTolerance : 0.0;
      const double deviation = max_ranking_deviation(s.intent_ranking, b.intent_ranking);
      eq.max_deviation = std::max(eq.max_deviation, deviation);
      if (s == b) ++eq.exact;
      const bool same_top = s.intent_ranking.empty() ||
                            s.intent_ranking.front().first == b.intent_ranking.front().first;
      if (s.entities == b.entities && same_top &&
          (eq.tolerance == 0.0 ? s == b : deviation < eq.tolerance)) {
        ++eq.within_tolerance;
      }
      collect(routes[name].first, b);
      collect(routes[name].second, s);
    }
  }
  interpreter.new_utterance();

  for (const auto& component : bundle->components()) {
    const std::string name(component->name());
    auto it = report.components.find(name);
    if (it == report.components.end()) continue;
    const bool intents = component->provides(keys::kIntentDistribution);
    const bool entities = component->provides(keys::kEntities);
    it->second.batch = score(routes[name].first, intents, entities, gold_intents, gold_spans);
    it->second.streamed = score(routes[name].second, intents, entities, gold_intents, gold_spans);
  }
  return report;
}

NoiseReport run_noise_protocol(std::shared_ptr<const ModelBundle> bundle,
                               const TrainingDataset& test, const NoiseConfig& noise,
                               double* max_normalization_error) {
  if (!(noise.insertion_rate >= 0.0 && noise.insertion_rate <= 1.0)) {
    throw ParameterError("noise insertion rate must lie in [0, 1]");
  }
  if (noise.insertion_rate > 0.0 && noise.noise_vocabulary.empty()) {
    throw ConfigError("noise protocol needs a non-empty noise vocabulary");
  }
  NoiseReport report;
  report.insertion_rate = noise.insertion_rate;
  report.seed = noise.seed;
  report.utterances = test.size();

  Interpreter interpreter(bundle);
  std::mt19937_64 rng(noise.seed);
  std::bernoulli_distribution insert(noise.insertion_rate);
  std::uniform_int_distribution<std::size_t> pick(
      0, noise.noise_vocabulary.empty() ? 0 : noise.noise_vocabulary.size() - 1);

  for (const TrainingExample& ex : test.examples()) {
    const Tokens words = words_of(ex);

    interpreter.new_utterance();
    NluResult clean = interpreter.result();
    for (const std::string& word : words) clean = interpreter.add(word);

    interpreter.new_utterance();
    NluResult noisy = interpreter.result();
    for (const std::string& word : words) {
      if (insert(rng)) {
        track(max_normalization_error, interpreter.add(noise.noise_vocabulary[pick(rng)]));
        track(max_normalization_error, interpreter.revoke());
        ++report.noise_words;
      }
      noisy = interpreter.add(word);
      track(max_normalization_error, noisy);
    }

    const bool pass = noisy == clean;
    report.per_utterance.push_back(pass);
    if (pass) ++report.passes;
    for (const auto& [name, out] : clean.components) {
      if (noisy.components.at(name) == out) ++report.component_passes[name];
    }
  }
  interpreter.new_utterance();
  return report;
}

bool EvalReport::all_checks_passed() const {
  if (!equivalence.passed()) return false;
  for (const NoiseReport& n : noise) {
    if (!n.passed()) return false;
  }
  return true;
}

namespace {

// Reference F1 values for the published counterparts of the two pipeline
// routes (embedding classifier + CRF, and SIUM).
struct Reference {
  const char* label;
  const char* intent_component;
  const char* entity_component;
  bool streamed;
  double intent_f1;
  double entity_f1;
};

constexpr Reference kReferences[] = {
    {"BoW classifier + tagger (non-incremental)", "intent_classifier_bow", "entity_tagger_sequence",
     false, 0.93, 0.86},
    {"BoW classifier + tagger (restart-incremental)", "intent_classifier_bow",
     "entity_tagger_sequence", true, 0.93, 0.85},
    {"SIUM (non-incremental)", "intent_sium", "intent_sium", false, 0.37, 0.34},
    {"SIUM (update-incremental)", "intent_sium", "intent_sium", true, 0.36, 0.34},
};

const PathScores* route(const EquivalenceReport& eq, const char* component, bool streamed) {
  auto it = eq.components.find(component);
  if (it == eq.components.end()) return nullptr;
  return streamed ? &it->second.streamed : &it->second.batch;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << "Test utterances: " << test_utterances << "   model seed: " << model_seed
      << "   noise seed: " << noise_seed << "\n\n";
  out << pad("Route", 48) << pad("Intent F1", 12) << pad("(macro)", 10) << pad("Entity F1", 12)
      << pad("Ref intent", 12) << "Ref entity\n";
  for (const Reference& ref : kReferences) {
    const PathScores* intent = route(equivalence, ref.intent_component, ref.streamed);
    const PathScores* entity = route(equivalence, ref.entity_component, ref.streamed);
    if (!intent && !entity) continue;
    out << pad(ref.label, 48);
    if (intent && intent->intent) {
      out << pad(fixed(intent->intent->micro), 12) << pad(fixed(intent->intent->macro), 10);
    } else {
      out << pad("-", 12) << pad("-", 10);
    }
    out << pad(entity && entity->entities ? fixed(entity->entities->f1) : "-", 12);
    out << pad(fixed(ref.intent_f1, 2), 12) << fixed(ref.entity_f1, 2) << '\n';
  }

  out << "\nIncremental vs non-incremental (" << equivalence.utterances << " utterances, "
      << equivalence.exact_matches << " identical results)\n";
  for (const auto& [name, c] : equivalence.components) {
    out << "  " << pad(name, 26) << "exact " << c.exact << "/" << equivalence.utterances
        << "   within tolerance " << c.within_tolerance << "   max deviation "
        << sci(c.max_deviation) << '\n';
  }

  out << "\nRevoke consistency\n";
  for (const NoiseReport& n : noise) {
    out << "  rate " << fixed(n.insertion_rate, 2) << ": " << n.passes << "/" << n.utterances
        << " identical to clean run (" << n.noise_words << " noise words)"
        << (n.passed() ? "" : "   FAILED") << '\n';
  }

  out << "\nMax |sum p - 1| over emitted intent distributions: " << sci(max_normalization_error)
      << '\n';
  if (sium_table_normalization_error) {
    out << "Max |sum P(w|c) - 1| over SIUM likelihood tables: "
        << sci(*sium_table_normalization_error) << '\n';
  }
  out << "Runtime: " << fixed(runtime_seconds, 2) << " s\n";
  out << "Checks: " << (all_checks_passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

std::string EvalReport::to_key_values() const {
  std::ostringstream out;
  out << "test_utterances=" << test_utterances << '\n';
  out << "model_seed=" << model_seed << '\n';
  out << "noise_seed=" << noise_seed << '\n';
  out << "equivalence.utterances=" << equivalence.utterances << '\n';
  out << "equivalence.exact_matches=" << equivalence.exact_matches << '\n';
  for (const auto& [name, c] : equivalence.components) {
    const std::string base = "equivalence." + name + ".";
    out << base << "exact=" << c.exact << '\n';
    out << base << "within_tolerance=" << c.within_tolerance << '\n';
    out << base << "max_deviation=" << sci(c.max_deviation) << '\n';
    for (const auto& [route_name, scores] :
         {std::pair{"non_incremental", &c.batch}, std::pair{"incremental", &c.streamed}}) {
      const std::string prefix = "scores." + name + "." + route_name + ".";
      if (scores->intent) {
        out << prefix << "intent_micro_f1=" << fixed(scores->intent->micro, 6) << '\n';
        out << prefix << "intent_macro_f1=" << fixed(scores->intent->macro, 6) << '\n';
      }
      if (scores->entities) {
        out << prefix << "entity_precision=" << fixed(scores->entities->precision, 6) << '\n';
        out << prefix << "entity_recall=" << fixed(scores->entities->recall, 6) << '\n';
        out << prefix << "entity_f1=" << fixed(scores->entities->f1, 6) << '\n';
      }
    }
  }
  for (const Reference& ref : kReferences) {
    const std::string key = std::string("reference.") + ref.intent_component +
                            (ref.streamed ? ".incremental" : ".non_incremental");
    out << key << ".intent_f1=" << fixed(ref.intent_f1, 2) << '\n';
    out << key << ".entity_f1=" << fixed(ref.entity_f1, 2) << '\n';
  }
  for (const NoiseReport& n : noise) {
    const std::string base = "noise." + fixed(n.insertion_rate, 2) + ".";
    out << base << "passes=" << n.passes << '\n';
    out << base << "utterances=" << n.utterances << '\n';
    out << base << "noise_words=" << n.noise_words << '\n';
    for (const auto& [name, passes] : n.component_passes) {
      out << base << name << ".passes=" << passes << '\n';
    }
  }
  out << "max_normalization_error=" << sci(max_normalization_error) << '\n';
  if (sium_table_normalization_error) {
    out << "sium_table_normalization_error=" << sci(*sium_table_normalization_error) << '\n';
  }
  out << "runtime_seconds=" << fixed(runtime_seconds, 3) << '\n';
  out << "checks_passed=" << (all_checks_passed() ? "true" : "false") << '\n';
  return out.str();
}

EvalReport evaluate(std::shared_ptr<const ModelBundle> bundle, const TrainingDataset& test,
                    std::span<const double> noise_rates, std::uint64_t noise_seed) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.test_utterances = test.size();
  report.noise_seed = noise_seed;
  report.model_seed = bundle->seed();
  report.equivalence = run_equivalence(bundle, test, &report.max_normalization_error);
  for (double rate : noise_rates) {
    NoiseConfig config{rate, bundle->vocabulary(), noise_seed};
    report.noise.push_back(
        run_noise_protocol(bundle, test, config, &report.max_normalization_error));
  }
  for (const auto& component : bundle->components()) {
    if (auto err = component->likelihood_normalization_error()) {
      report.sium_table_normalization_error =
          std::max(report.sium_table_normalization_error.value_or(0.0), *err);
    }
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace inlu
