#include "inlu/entity_tagger.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "inlu/errors.hpp"
#include "inlu/features.hpp"
#include "text_io.hpp"

namespace inlu {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::string_view kPrevPrefix = "prev=";
constexpr std::string_view kStart = "<s>";

bool all_digits(std::string_view word) {
  return !word.empty() &&
         std::all_of(word.begin(), word.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

SequenceTagger::SequenceTagger() { set_tags({"O"}); }

void SequenceTagger::set_tags(std::vector<std::string> tags) {
  tags_ = std::move(tags);
  kinds_.clear();
  types_.clear();
  std::map<std::string, int> type_ids;
  for (const std::string& tag : tags_) {
    if (tag == "O") {
      kinds_.push_back(Kind::Outside);
      types_.push_back(-1);
      continue;
    }
    if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') {
      throw LoadError("malformed BIO tag '" + tag + "'");
    }
    kinds_.push_back(tag[0] == 'B' ? Kind::Begin : Kind::Inside);
    types_.push_back(type_ids.try_emplace(tag.substr(2), static_cast<int>(type_ids.size()))
                         .first->second);
  }
}

bool SequenceTagger::allowed(int previous, int current) const {
  if (kinds_[current] != Kind::Inside) return true;
  if (previous == static_cast<int>(tags_.size())) return false;
  return kinds_[previous] != Kind::Outside && types_[previous] == types_[current];
}

std::vector<std::string> SequenceTagger::token_features(std::span<const std::string> words,
                                                        std::size_t position) {
  const std::string& word = words[position];
  const std::string lower = to_lower(word);
  std::vector<std::string> out;
  out.reserve(8);
  out.push_back("bias");
  out.push_back("w=" + word);
  out.push_back("lw=" + lower);
  out.push_back("p3=" + lower.substr(0, 3));
  out.push_back("s3=" + (lower.size() > 3 ? lower.substr(lower.size() - 3) : lower));
  out.push_back(all_digits(word) ? "digit=1" : "digit=0");
  out.push_back("pw=" + (position == 0 ? std::string(kStart) : to_lower(words[position - 1])));
  out.push_back("nw=" +
                (position + 1 == words.size() ? std::string("</s>") : to_lower(words[position + 1])));
  return out;
}

std::vector<std::vector<int>> SequenceTagger::feature_ids(std::span<const std::string> words) const {
  std::vector<std::vector<int>> ids(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (const std::string& feature : token_features(words, i)) {
      if (auto it = feature_index_.find(feature); it != feature_index_.end()) {
        ids[i].push_back(it->second);
      }
    }
  }
  return ids;
}

std::vector<int> SequenceTagger::viterbi(const std::vector<std::vector<int>>& feature_ids,
                                         const Eigen::MatrixXd& emission,
                                         const Eigen::MatrixXd& transition) const {
  const std::size_t n = feature_ids.size();
  const int tag_count = static_cast<int>(tags_.size());
  const int start = tag_count;
  if (n == 0) return {};

  Eigen::MatrixXd score(tag_count, n);
  Eigen::MatrixXi back(tag_count, n);
  Eigen::VectorXd local(tag_count);

  auto emit = [&](std::size_t i) {
    local.setZero();
    for (int f : feature_ids[i]) local += emission.col(f);
  };

  emit(0);
  for (int t = 0; t < tag_count; ++t) {
    score(t, 0) = allowed(start, t) ? transition(start, t) + local[t] : kNegInf;
    back(t, 0) = start;
  }
  for (std::size_t i = 1; i < n; ++i) {
    emit(i);
    for (int t = 0; t < tag_count; ++t) {
      double best = kNegInf;
      int arg = -1;
      for (int p = 0; p < tag_count; ++p) {
        if (score(p, i - 1) == kNegInf || !allowed(p, t)) continue;
        const double s = score(p, i - 1) + transition(p, t);
        if (arg < 0 || s > best) {
          best = s;
          arg = p;
        }
      }
      score(t, i) = arg < 0 ? kNegInf : best + local[t];
      back(t, i) = arg;
    }
  }

  std::vector<int> path(n);
  int last = 0;
  for (int t = 1; t < tag_count; ++t) {
    if (score(t, n - 1) > score(last, n - 1)) last = t;
  }
  path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back(path[i], i);
  return path;
}

SequenceTagger SequenceTagger::train(std::span<const BioSentence> sentences,
                                     const TaggerOptions& options) {
  if (options.epochs < 0) throw ParameterError("tagger epochs must be >= 0");

  SequenceTagger model;
  model.options_ = options;

  std::set<std::string> types;
  for (const BioSentence& s : sentences) {
    if (s.words.size() != s.tags.size()) {
      throw ConsistencyError("BIO sentence has mismatched word and tag counts");
    }
    for (const std::string& tag : s.tags) {
      if (tag != "O") types.insert(tag.substr(2));
    }
  }
  std::vector<std::string> tags{"O"};
  for (const std::string& type : types) {
    tags.push_back("B-" + type);
    tags.push_back("I-" + type);
  }
  model.set_tags(tags);
  std::map<std::string, int> tag_ids;
  for (std::size_t t = 0; t < tags.size(); ++t) tag_ids[tags[t]] = static_cast<int>(t);

  // Training-time feature ids follow first occurrence; they are remapped to
  // sorted order once the averaged weights are final.
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<int>>> sentence_features;
  std::vector<std::vector<int>> gold;
  sentence_features.reserve(sentences.size());
  for (const BioSentence& s : sentences) {
    std::vector<std::vector<int>> per_token(s.words.size());
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      for (std::string& feature : token_features(s.words, i)) {
        auto [it, inserted] =
            model.feature_index_.try_emplace(std::move(feature), static_cast<int>(names.size()));
        if (inserted) names.push_back(it->first);
        per_token[i].push_back(it->second);
      }
    }
    sentence_features.push_back(std::move(per_token));
    std::vector<int> g;
    for (const std::string& tag : s.tags) g.push_back(tag_ids.at(tag));
    gold.push_back(std::move(g));
  }

  const int tag_count = static_cast<int>(tags.size());
  const int start = tag_count;
  const int feature_count = static_cast<int>(names.size());
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(tag_count, feature_count);
  Eigen::MatrixXd weight_sums = Eigen::MatrixXd::Zero(tag_count, feature_count);
  Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(tag_count + 1, tag_count);
  Eigen::MatrixXd trans_sums = Eigen::MatrixXd::Zero(tag_count + 1, tag_count);

  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);
  double step = 1.0;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k : order) {
      const auto& feats = sentence_features[k];
      const std::vector<int>& truth = gold[k];
      const std::vector<int> guess = model.viterbi(feats, weights, trans);
      if (guess != truth) {
        for (std::size_t i = 0; i < truth.size(); ++i) {
          const int g = truth[i];
          const int p = guess[i];
          if (g != p) {
            for (int f : feats[i]) {
              weights(g, f) += 1.0;
              weight_sums(g, f) += step;
              weights(p, f) -= 1.0;
              weight_sums(p, f) -= step;
            }
          }
          const int g_prev = i == 0 ? start : truth[i - 1];
          const int p_prev = i == 0 ? start : guess[i - 1];
          if (g_prev != p_prev || g != p) {
            trans(g_prev, g) += 1.0;
            trans_sums(g_prev, g) += step;
            trans(p_prev, p) -= 1.0;
            trans_sums(p_prev, p) -= step;
          }
        }
      }
      step += 1.0;
    }
  }

  const Eigen::MatrixXd averaged = weights - weight_sums / step;
  model.transition_ = trans - trans_sums / step;

  // Keep features with at least one non-zero weight, in sorted order.
  std::vector<int> kept;
  for (int f = 0; f < feature_count; ++f) {
    if ((averaged.col(f).array() != 0.0).any()) kept.push_back(f);
  }
  std::sort(kept.begin(), kept.end(), [&](int a, int b) { return names[a] < names[b]; });
  model.feature_index_.clear();
  model.features_.clear();
  model.emission_.resize(tag_count, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    model.features_.push_back(names[kept[j]]);
    model.feature_index_.emplace(names[kept[j]], static_cast<int>(j));
    model.emission_.col(static_cast<Eigen::Index>(j)) = averaged.col(kept[j]);
  }
  return model;
}

std::vector<std::string> SequenceTagger::decode(std::span<const std::string> words) const {
  if (emission_.size() == 0 && tags_.size() == 1) return std::vector<std::string>(words.size(), "O");
  const std::vector<int> path = viterbi(feature_ids(words), emission_, transition_);
  std::vector<std::string> out;
  out.reserve(path.size());
  for (int t : path) out.push_back(tags_[t]);
  return out;
}

void SequenceTagger::write(std::ostream& out) const {
  out << "#tags";
  for (const std::string& tag : tags_) out << '\t' << tag;
  out << "\n#epochs\t" << options_.epochs << "\n#seed\t" << options_.seed << '\n';

  const int tag_count = static_cast<int>(tags_.size());
  std::vector<std::pair<std::string, int>> rows;  // feature name, transition row or -1
  for (int p = 0; p <= tag_count; ++p) {
    rows.emplace_back(std::string(kPrevPrefix) + (p == tag_count ? std::string(kStart) : tags_[p]),
                      p);
  }
  for (std::size_t f = 0; f < features_.size(); ++f) rows.emplace_back(features_[f], -1);
  std::sort(rows.begin(), rows.end());

  for (const auto& [name, prev] : rows) {
    for (int t = 0; t < tag_count; ++t) {
      const double w = prev >= 0 ? transition_(prev, t)
                                 : emission_(t, feature_index_.at(name));
      if (w == 0.0) continue;
      out << name << '\t' << tags_[t] << '\t' << detail::format_double(w) << '\n';
    }
  }
}

SequenceTagger SequenceTagger::read(std::istream& in) {
  SequenceTagger model;
  std::string line;
  int line_number = 0;
  bool have_tags = false;
  std::map<std::string, std::vector<std::pair<std::string, double>>> entries;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (line.front() == '#') {
      if (fields[0] == "#tags") {
        std::vector<std::string> tags(fields.begin() + 1, fields.end());
        if (tags.empty() || tags.front() != "O") throw LoadError("tagger tag set must start with O");
        model.set_tags(std::move(tags));
        have_tags = true;
      } else if (fields[0] == "#epochs" && fields.size() == 2) {
        model.options_.epochs = static_cast<int>(detail::parse_int(fields[1], "epochs"));
      } else if (fields[0] == "#seed" && fields.size() == 2) {
        model.options_.seed = static_cast<std::uint64_t>(detail::parse_int(fields[1], "seed"));
      } else {
        throw LoadError("tagger model line " + std::to_string(line_number) + ": unknown header");
      }
      continue;
    }
    if (fields.size() != 3) {
      throw LoadError("tagger model line " + std::to_string(line_number) +
                      ": expected feature\\ttag\\tweight");
    }
    entries[std::string(fields[0])].emplace_back(std::string(fields[1]),
                                                 detail::parse_double(fields[2], "weight"));
  }
  if (!have_tags) throw LoadError("tagger model is missing its #tags header");

  const int tag_count = static_cast<int>(model.tags_.size());
  std::map<std::string, int> tag_ids;
  for (int t = 0; t < tag_count; ++t) tag_ids[model.tags_[t]] = t;
  auto tag_id = [&](const std::string& tag) {
    auto it = tag_ids.find(tag);
    if (it == tag_ids.end()) throw LoadError("weight for unknown tag '" + tag + "'");
    return it->second;
  };

  model.transition_ = Eigen::MatrixXd::Zero(tag_count + 1, tag_count);
  for (const auto& [name, _] : entries) {
    if (!std::string_view(name).starts_with(kPrevPrefix)) model.features_.push_back(name);
  }
  // std::map iteration already yields sorted feature names.
  model.emission_ = Eigen::MatrixXd::Zero(tag_count, static_cast<Eigen::Index>(model.features_.size()));
  for (std::size_t f = 0; f < model.features_.size(); ++f) {
    model.feature_index_.emplace(model.features_[f], static_cast<int>(f));
  }
  for (const auto& [name, weights] : entries) {
    if (std::string_view(name).starts_with(kPrevPrefix)) {
      const std::string prev = name.substr(kPrevPrefix.size());
      const int row = prev == kStart ? tag_count : tag_id(prev);
      for (const auto& [tag, w] : weights) model.transition_(row, tag_id(tag)) = w;
    } else {
      const int col = model.feature_index_.at(name);
      for (const auto& [tag, w] : weights) model.emission_(tag_id(tag), col) = w;
    }
  }
  return model;
}

Entities extract_entities(std::span<const std::string> tags, std::span<const std::string> tokens) {
  if (tags.size() != tokens.size()) {
    throw ConsistencyError("tag sequence length " + std::to_string(tags.size()) +
                           " does not match token count " + std::to_string(tokens.size()));
  }
  Entities out;
  const std::vector<std::string> tag_copy(tags.begin(), tags.end());
  for (const TokenSpan& span : bio_spans(tag_copy)) {
    EntitySpan e;
    e.type = span.type;
    e.start = span.start;
    e.end = span.end;
    for (int i = span.start; i < span.end; ++i) {
      if (i > span.start) e.value += ' ';
      e.value += tokens[i];
    }
    e.confidence = 1.0;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace inlu
