#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "inlu/errors.hpp"
#include "inlu/types.hpp"

namespace inlu {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  if (logits.size() == 0) return Vector<Scalar>();
  const Scalar peak = logits.maxCoeff();
  Vector<Scalar> p = (logits.array() - peak).exp();
  return p / p.sum();
}

// Rows are count vectors with a trailing constant 1 for the bias.
template <typename Scalar>
Matrix<Scalar> design_matrix(std::span<const CountVector> rows, Eigen::Index vocabulary_size) {
  Matrix<Scalar> x(static_cast<Eigen::Index>(rows.size()), vocabulary_size + 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != vocabulary_size) {
      throw ConsistencyError("count vector length does not match the vocabulary");
    }
    const auto r = static_cast<Eigen::Index>(i);
    x.row(r).head(vocabulary_size) = rows[i].cast<Scalar>().transpose();
    x(r, vocabulary_size) = Scalar(1);
  }
  return x;
}

// Row-wise softmax of design * weights.
template <typename Scalar>
Matrix<Scalar> class_probabilities(const Matrix<Scalar>& weights, const Matrix<Scalar>& design) {
  Matrix<Scalar> logits = design * weights;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    logits.row(i) = softmax(logits.row(i).transpose()).transpose();
  }
  return logits;
}

// Mean cross-entropy over the rows of `design` plus (l2 / 2) * ||W||^2 on
// the non-bias rows of W. `weights` is (vocabulary + 1) x classes.
template <typename Scalar>
Scalar cross_entropy(const Matrix<Scalar>& weights, const Matrix<Scalar>& design,
                     std::span<const int> labels, Scalar l2) {
  const Matrix<Scalar> p = class_probabilities(weights, design);
  Scalar loss = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) loss -= std::log(p(i, labels[i]));
  loss /= static_cast<Scalar>(p.rows());
  const Eigen::Index v = weights.rows() - 1;
  return loss + l2 / Scalar(2) * weights.topRows(v).squaredNorm();
}

template <typename Scalar>
Matrix<Scalar> cross_entropy_gradient(const Matrix<Scalar>& weights, const Matrix<Scalar>& design,
                                      std::span<const int> labels, Scalar l2) {
  Matrix<Scalar> residual = class_probabilities(weights, design);
  for (Eigen::Index i = 0; i < residual.rows(); ++i) residual(i, labels[i]) -= Scalar(1);
  Matrix<Scalar> grad = design.transpose() * residual / static_cast<Scalar>(design.rows());
  const Eigen::Index v = weights.rows() - 1;
  grad.topRows(v) += l2 * weights.topRows(v);
  return grad;
}

struct ClassifierOptions {
  int epochs = 50;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  int batch_size = 16;
};

// Multinomial logistic regression over bag-of-words counts. Stateless at
// prediction time: the same count vector always yields the same ranking.
template <typename Scalar>
class LinearIntentModel {
 public:
  LinearIntentModel() = default;
  LinearIntentModel(std::vector<std::string> intents, Eigen::Index vocabulary_size,
                    ClassifierOptions options = {})
      : intents_(std::move(intents)),
        weights_(Matrix<Scalar>::Zero(vocabulary_size + 1, static_cast<Eigen::Index>(intents_.size()))),
        options_(options) {}

  const std::vector<std::string>& intents() const { return intents_; }
  Eigen::Index vocabulary_size() const { return weights_.rows() - 1; }
  const ClassifierOptions& options() const { return options_; }

  const Matrix<Scalar>& weights() const { return weights_; }
  Matrix<Scalar>& weights() { return weights_; }

  Vector<Scalar> probabilities(const CountVector& counts) const {
    if (counts.size() != vocabulary_size()) {
      throw ConsistencyError("count vector has length " + std::to_string(counts.size()) +
                             ", classifier expects " + std::to_string(vocabulary_size()));
    }
    const Eigen::Index v = vocabulary_size();
    const Vector<Scalar> logits =
        weights_.topRows(v).transpose() * counts.cast<Scalar>() + weights_.row(v).transpose();
    return softmax(logits);
  }

  IntentDistribution predict(const CountVector& counts) const {
    return rank(probabilities(counts));
  }

  IntentDistribution uniform() const {
    return rank(Vector<Scalar>::Constant(static_cast<Eigen::Index>(intents_.size()),
                                         Scalar(1) / static_cast<Scalar>(intents_.size())));
  }

 private:
  IntentDistribution rank(const Vector<Scalar>& p) const {
    IntentDistribution ranking;
    ranking.reserve(intents_.size());
    for (std::size_t k = 0; k < intents_.size(); ++k) {
      ranking.emplace_back(intents_[k], static_cast<double>(p[static_cast<Eigen::Index>(k)]));
    }
    sort_ranking(ranking);
    return ranking;
  }

  std::vector<std::string> intents_;
  Matrix<Scalar> weights_;
  ClassifierOptions options_;
};

using IntentClassifier = LinearIntentModel<double>;

// Mini-batch gradient descent from zero weights; minibatch order is a seeded
// shuffle per epoch. `labels[i]` indexes `intents`. A single-class dataset
// still trains but appends a degeneracy note to `warnings`.
IntentClassifier train_classifier(std::span<const CountVector> features, std::span<const int> labels,
                                  std::vector<std::string> intents, Eigen::Index vocabulary_size,
                                  const ClassifierOptions& options,
                                  std::vector<std::string>* warnings = nullptr);

// `#intents` header row, hyperparameter headers, then one tab-separated row
// of weights per vocabulary index followed by the bias row.
void write_classifier(std::ostream& out, const IntentClassifier& model);
IntentClassifier read_classifier(std::istream& in);

}  // namespace inlu
