#include "inlu/restart_classifier.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "text_io.hpp"

namespace inlu {

IntentClassifier train_classifier(std::span<const CountVector> features, std::span<const int> labels,
                                  std::vector<std::string> intents, Eigen::Index vocabulary_size,
                                  const ClassifierOptions& options,
                                  std::vector<std::string>* warnings) {
  if (features.size() != labels.size()) {
    throw ConsistencyError("feature and label counts differ");
  }
  if (features.empty()) throw DataError("cannot train the intent classifier on no examples");
  if (intents.empty()) throw DataError("intent inventory is empty");
  if (options.epochs < 0) throw ParameterError("classifier epochs must be >= 0");
  if (!(options.learning_rate > 0.0)) throw ParameterError("learning rate must be > 0");
  if (!(options.l2 >= 0.0)) throw ParameterError("l2 strength must be >= 0");
  if (options.batch_size < 1) throw ParameterError("batch size must be >= 1");
  for (int label : labels) {
    if (label < 0 || label >= static_cast<int>(intents.size())) {
      throw ConsistencyError("intent label index out of range");
    }
  }
  if (std::set<int>(labels.begin(), labels.end()).size() < 2 && warnings != nullptr) {
    warnings->push_back("intent classifier: training data has a single class; "
                        "the model is degenerate");
  }

  IntentClassifier model(std::move(intents), vocabulary_size, options);
  const Matrix<double> design = design_matrix<double>(features, vocabulary_size);
  const Eigen::Index n = design.rows();

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);
  Matrix<double> batch;
  std::vector<int> batch_labels;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index begin = 0; begin < n; begin += options.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(options.batch_size, n - begin);
      batch.resize(size, design.cols());
      batch_labels.resize(static_cast<std::size_t>(size));
      for (Eigen::Index k = 0; k < size; ++k) {
        const int row = order[static_cast<std::size_t>(begin + k)];
        batch.row(k) = design.row(row);
        batch_labels[static_cast<std::size_t>(k)] = labels[static_cast<std::size_t>(row)];
      }
      model.weights() -= options.learning_rate *
                         cross_entropy_gradient<double>(model.weights(), batch, batch_labels, options.l2);
    }
  }
  return model;
}

void write_classifier(std::ostream& out, const IntentClassifier& model) {
  out << "#intents";
  for (const std::string& intent : model.intents()) out << '\t' << intent;
  const ClassifierOptions& o = model.options();
  out << "\n#vocabulary_size\t" << model.vocabulary_size() << "\n#epochs\t" << o.epochs
      << "\n#learning_rate\t" << detail::format_double(o.learning_rate) << "\n#l2\t"
      << detail::format_double(o.l2) << "\n#seed\t" << o.seed << "\n#batch_size\t" << o.batch_size
      << '\n';
  const Matrix<double>& w = model.weights();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      if (c > 0) out << '\t';
      out << detail::format_double(w(r, c));
    }
    out << '\n';
  }
}

IntentClassifier read_classifier(std::istream& in) {
  std::vector<std::string> intents;
  ClassifierOptions options;
  long long vocabulary_size = -1;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto f = detail::split_tabs(line);
    if (line.front() == '#') {
      if (f[0] == "#intents") {
        intents.assign(f.begin() + 1, f.end());
      } else if (f.size() != 2) {
        throw LoadError("classifier line " + std::to_string(line_number) + ": malformed header");
      } else if (f[0] == "#vocabulary_size") {
        vocabulary_size = detail::parse_int(f[1], "vocabulary size");
      } else if (f[0] == "#epochs") {
        options.epochs = static_cast<int>(detail::parse_int(f[1], "epochs"));
      } else if (f[0] == "#learning_rate") {
        options.learning_rate = detail::parse_double(f[1], "learning rate");
      } else if (f[0] == "#l2") {
        options.l2 = detail::parse_double(f[1], "l2");
      } else if (f[0] == "#seed") {
        options.seed = static_cast<std::uint64_t>(detail::parse_int(f[1], "seed"));
      } else if (f[0] == "#batch_size") {
        options.batch_size = static_cast<int>(detail::parse_int(f[1], "batch size"));
      } else {
        throw LoadError("classifier line " + std::to_string(line_number) + ": unknown header");
      }
      continue;
    }
    std::vector<double> row;
    for (std::string_view field : f) row.push_back(detail::parse_double(field, "weight"));
    if (row.size() != intents.size()) {
      throw LoadError("classifier line " + std::to_string(line_number) + ": expected " +
                      std::to_string(intents.size()) + " weights");
    }
    rows.push_back(std::move(row));
  }
  if (intents.empty()) throw LoadError("classifier is missing its #intents header");
  if (vocabulary_size < 0 || static_cast<long long>(rows.size()) != vocabulary_size + 1) {
    throw LoadError("classifier weight matrix does not match #vocabulary_size");
  }
  IntentClassifier model(std::move(intents), static_cast<Eigen::Index>(vocabulary_size), options);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      model.weights()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return model;
}

}  // namespace inlu
