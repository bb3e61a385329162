#include "inlu/sium.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "inlu/corpus.hpp"
#include "inlu/errors.hpp"
#include "inlu/features.hpp"
#include "text_io.hpp"

namespace inlu {

Eigen::VectorXd normalize_log(const Eigen::VectorXd& log_scores) {
  if (log_scores.size() == 0) return log_scores;
  const double peak = log_scores.maxCoeff();
  Eigen::VectorXd p = (log_scores.array() - peak).exp();
  return p / p.sum();
}

SiumModel SiumModel::train(const TrainingDataset& dataset, const SiumOptions& options) {
  if (dataset.empty()) throw DataError("cannot train SIUM on an empty dataset");
  if (!(options.alpha > 0.0)) throw ParameterError("SIUM smoothing alpha must be > 0");
  if (!(options.entity_threshold > 0.0 && options.entity_threshold <= 1.0)) {
    throw ParameterError("SIUM entity threshold must lie in (0, 1]");
  }

  SiumModel model;
  model.options_ = options;
  model.intents_ = dataset.intents();
  model.entity_classes_ = dataset.entity_types();
  model.entity_classes_.emplace_back(kNoEntity);

  std::map<std::string, int> intent_ids;
  for (std::size_t i = 0; i < model.intents_.size(); ++i) intent_ids[model.intents_[i]] = int(i);
  std::map<std::string, int> class_ids;
  for (std::size_t i = 0; i < model.entity_classes_.size(); ++i) {
    class_ids[model.entity_classes_[i]] = int(i);
  }
  const int no_entity = static_cast<int>(model.entity_classes_.size()) - 1;

  struct Counted {
    std::string word;
    int intent;
    int entity_class;
  };
  std::vector<Counted> tokens;
  for (const TrainingExample& ex : dataset.examples()) {
    const BioSentence bio = project_bio(ex);
    for (std::size_t i = 0; i < bio.words.size(); ++i) {
      std::string word = options.lowercase ? to_lower(bio.words[i]) : bio.words[i];
      const int cls = bio.tags[i] == "O" ? no_entity : class_ids.at(bio.tags[i].substr(2));
      if (model.rows_.try_emplace(word, static_cast<int>(model.vocabulary_.size())).second) {
        model.vocabulary_.push_back(word);
      }
      tokens.push_back({std::move(word), intent_ids.at(ex.intent), cls});
    }
  }

  const int v = static_cast<int>(model.vocabulary_.size());
  const int intents = static_cast<int>(model.intents_.size());
  const int classes = static_cast<int>(model.entity_classes_.size());
  Eigen::MatrixXd intent_counts = Eigen::MatrixXd::Zero(v + 1, intents);
  Eigen::MatrixXd class_counts = Eigen::MatrixXd::Zero(v + 1, classes);
  for (const Counted& t : tokens) {
    const int row = model.rows_.at(t.word);
    intent_counts(row, t.intent) += 1.0;
    class_counts(row, t.entity_class) += 1.0;
  }

  const double alpha = options.alpha;
  auto smooth = [&](const Eigen::MatrixXd& counts) {
    Eigen::MatrixXd logp(counts.rows(), counts.cols());
    for (Eigen::Index c = 0; c < counts.cols(); ++c) {
      const double denom = counts.col(c).sum() + alpha * static_cast<double>(v + 1);
      logp.col(c) = ((counts.col(c).array() + alpha) / denom).log();
    }
    return logp;
  };
  model.word_given_intent_ = smooth(intent_counts);
  model.word_given_entity_ = smooth(class_counts);
  model.log_prior_ = Eigen::VectorXd::Constant(intents, -std::log(static_cast<double>(intents)));
  return model;
}

int SiumModel::word_row(std::string_view word) const {
  auto it = rows_.find(options_.lowercase ? to_lower(word) : std::string(word));
  return it == rows_.end() ? oov_row() : it->second;
}

double SiumModel::max_row_normalization_error() const {
  double worst = 0.0;
  for (const Eigen::MatrixXd* table : {&word_given_intent_, &word_given_entity_}) {
    for (Eigen::Index c = 0; c < table->cols(); ++c) {
      worst = std::max(worst, std::abs(table->col(c).array().exp().sum() - 1.0));
    }
  }
  return worst;
}

void SiumModel::write(std::ostream& out) const {
  out << "#alpha\t" << detail::format_double(options_.alpha) << '\n';
  out << "#threshold\t" << detail::format_double(options_.entity_threshold) << '\n';
  out << "#lowercase\t" << (options_.lowercase ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < intents_.size(); ++i) {
    out << "#prior\t" << intents_[i] << '\t' << detail::format_double(log_prior_[i]) << '\n';
  }
  for (std::size_t c = 0; c < entity_classes_.size(); ++c) {
    out << "#entity_class\t" << entity_classes_[c] << '\n';
  }
  std::vector<int> order(vocabulary_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return vocabulary_[a] < vocabulary_[b]; });
  auto table = [&](const char* kind, const std::vector<std::string>& labels,
                   const Eigen::MatrixXd& logp) {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      for (int w : order) {
        out << kind << '\t' << labels[c] << '\t' << vocabulary_[w] << '\t'
            << detail::format_double(logp(w, static_cast<Eigen::Index>(c))) << '\n';
      }
      out << "oov_" << kind << '\t' << labels[c] << '\t'
          << detail::format_double(logp(oov_row(), static_cast<Eigen::Index>(c))) << '\n';
    }
  };
  table("intent", intents_, word_given_intent_);
  table("entity", entity_classes_, word_given_entity_);
}

SiumModel SiumModel::read(std::istream& in) {
  SiumModel model;
  std::vector<double> prior;
  // label -> (word -> logprob); OOV under the empty word.
  std::map<std::string, std::map<std::string, double>> intent_rows;
  std::map<std::string, std::map<std::string, double>> entity_rows;
  std::string line;
  int line_number = 0;
  auto fail = [&](const std::string& what) {
    throw LoadError("SIUM model line " + std::to_string(line_number) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto f = detail::split_tabs(line);
    if (f[0] == "#alpha" && f.size() == 2) {
      model.options_.alpha = detail::parse_double(f[1], "alpha");
    } else if (f[0] == "#threshold" && f.size() == 2) {
      model.options_.entity_threshold = detail::parse_double(f[1], "threshold");
    } else if (f[0] == "#lowercase" && f.size() == 2) {
      model.options_.lowercase = f[1] == "1";
    } else if (f[0] == "#prior" && f.size() == 3) {
      model.intents_.emplace_back(f[1]);
      prior.push_back(detail::parse_double(f[2], "prior"));
    } else if (f[0] == "#entity_class" && f.size() == 2) {
      model.entity_classes_.emplace_back(f[1]);
    } else if ((f[0] == "intent" || f[0] == "entity") && f.size() == 4) {
      if (f[2].empty()) fail("empty word");
      auto& rows = f[0] == "intent" ? intent_rows : entity_rows;
      rows[std::string(f[1])][std::string(f[2])] = detail::parse_double(f[3], "log probability");
    } else if ((f[0] == "oov_intent" || f[0] == "oov_entity") && f.size() == 3) {
      auto& rows = f[0] == "oov_intent" ? intent_rows : entity_rows;
      rows[std::string(f[1])][""] = detail::parse_double(f[2], "log probability");
    } else {
      fail("unrecognized record");
    }
  }
  if (model.intents_.empty()) fail("no intents");

  // Vocabulary order: sorted, taken from the first intent's table.
  for (const auto& [word, _] : intent_rows[model.intents_.front()]) {
    if (word.empty()) continue;
    model.rows_.emplace(word, static_cast<int>(model.vocabulary_.size()));
    model.vocabulary_.push_back(word);
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(model.vocabulary_.size()) + 1;
  auto build = [&](const std::vector<std::string>& labels,
                   std::map<std::string, std::map<std::string, double>>& table) {
    Eigen::MatrixXd logp(rows, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t c = 0; c < labels.size(); ++c) {
      const auto& column = table[labels[c]];
      if (static_cast<Eigen::Index>(column.size()) != rows) {
        throw LoadError("SIUM table for '" + labels[c] + "' has the wrong number of rows");
      }
      for (const auto& [word, value] : column) {
        const Eigen::Index r = word.empty() ? rows - 1 : model.rows_.at(word);
        logp(r, static_cast<Eigen::Index>(c)) = value;
      }
    }
    return logp;
  };
  try {
    model.word_given_intent_ = build(model.intents_, intent_rows);
    model.word_given_entity_ = build(model.entity_classes_, entity_rows);
  } catch (const std::out_of_range&) {
    throw LoadError("SIUM tables disagree on the vocabulary");
  }
  model.log_prior_ = Eigen::Map<const Eigen::VectorXd>(prior.data(), static_cast<Eigen::Index>(prior.size()));
  return model;
}

SiumState::SiumState(const SiumModel& model) { snapshots_.push_back(model.log_prior()); }

void SiumState::add(const SiumModel& model, std::string_view word) {
  snapshots_.push_back(snapshots_.back() + model.intent_log_likelihood(word));
  history_.emplace_back(word);
}

void SiumState::revoke(const SiumModel& /*model*/, std::string_view word) {
  if (history_.empty()) throw ConsistencyError("SIUM REVOKE with empty word history");
  if (history_.back() != word) {
    throw ConsistencyError("SIUM REVOKE of '" + std::string(word) + "' but last word is '" +
                           history_.back() + "'");
  }
  history_.pop_back();
  snapshots_.pop_back();
}

Eigen::VectorXd SiumState::posterior() const { return normalize_log(log_posterior()); }

void SiumState::reset() {
  snapshots_.resize(1);
  history_.clear();
}

Eigen::VectorXd sium_batch_posterior(const SiumModel& model, std::span<const std::string> words) {
  Eigen::VectorXd log_score = model.log_prior();
  for (const std::string& word : words) log_score += model.intent_log_likelihood(word);
  return normalize_log(log_score);
}

IntentDistribution sium_ranking(const SiumModel& model, const Eigen::VectorXd& posterior) {
  IntentDistribution ranking;
  ranking.reserve(model.intents().size());
  for (std::size_t i = 0; i < model.intents().size(); ++i) {
    ranking.emplace_back(model.intents()[i], posterior[static_cast<Eigen::Index>(i)]);
  }
  sort_ranking(ranking);
  return ranking;
}

std::pair<std::string, double> sium_classify(const SiumModel& model, const SiumState& state) {
  return sium_ranking(model, state.posterior()).front();
}

TokenEntityDecision sium_token_entity(const SiumModel& model, std::string_view token) {
  const auto& classes = model.entity_classes();
  const Eigen::Index no_entity = static_cast<Eigen::Index>(classes.size()) - 1;
  // Uniform class prior: the posterior is the normalized likelihood row.
  const Eigen::VectorXd post = normalize_log(model.entity_log_likelihood(token));
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < post.size(); ++c) {
    if (post[c] > post[best] || (post[c] == post[best] && classes[c] < classes[best])) best = c;
  }
  if (best == no_entity || !(post[best] > model.options().entity_threshold)) return {};
  return {static_cast<int>(best), post[best]};
}

Entities merge_entity_decisions(const SiumModel& model,
                                std::span<const TokenEntityDecision> decisions,
                                std::span<const std::string> tokens) {
  if (decisions.size() != tokens.size()) {
    throw ConsistencyError("entity decisions and tokens differ in length");
  }
  Entities out;
  int open_class = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TokenEntityDecision& d = decisions[i];
    if (d.entity_class < 0) {
      open_class = -1;
      continue;
    }
    if (d.entity_class == open_class) {
      EntitySpan& span = out.back();
      span.end = static_cast<int>(i) + 1;
      span.value += ' ';
      span.value += tokens[i];
      span.confidence = std::min(span.confidence, d.posterior);
    } else {
      out.push_back(EntitySpan{model.entity_classes()[d.entity_class], tokens[i],
                               static_cast<int>(i), static_cast<int>(i) + 1, d.posterior});
      open_class = d.entity_class;
    }
  }
  return out;
}

Entities sium_entities(const SiumModel& model, std::span<const std::string> tokens) {
  std::vector<TokenEntityDecision> decisions;
  decisions.reserve(tokens.size());
  for (const std::string& token : tokens) decisions.push_back(sium_token_entity(model, token));
  return merge_entity_decisions(model, decisions, tokens);
}

}  // namespace inlu
