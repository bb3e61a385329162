#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "common.hpp"
#include "inlu/errors.hpp"
#include "inlu/restart_classifier.hpp"

using namespace inlu;

namespace {

struct Toy {
  Vocabulary vocab;
  std::vector<CountVector> features;
  std::vector<int> labels;
  std::vector<std::string> intents{"BookRestaurant", "PlayMusic"};
};

Toy separable() {
  Toy t;
  const std::vector<Tokens> texts{{"play", "music"}, {"book", "table"}};
  t.vocab = Vocabulary::fit(texts);
  for (int copy = 0; copy < 50; ++copy) {
    t.features.push_back(count_tokens(t.vocab, texts[0]));
    t.labels.push_back(1);
    t.features.push_back(count_tokens(t.vocab, texts[1]));
    t.labels.push_back(0);
  }
  return t;
}

// Mean negative log-likelihood plus l2/2 on non-bias rows, written out
// element by element.
double loss_oracle(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, const std::vector<int>& y,
                   double l2) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> z(static_cast<std::size_t>(w.cols()), 0.0);
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) z[k] += x(i, j) * w(j, k);
    }
    double peak = z[0];
    for (double v : z) peak = std::max(peak, v);
    double norm = 0.0;
    for (double v : z) norm += std::exp(v - peak);
    total -= z[static_cast<std::size_t>(y[i])] - peak - std::log(norm);
  }
  double reg = 0.0;
  for (Eigen::Index j = 0; j + 1 < w.rows(); ++j) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) reg += w(j, k) * w(j, k);
  }
  return total / static_cast<double>(x.rows()) + 0.5 * l2 * reg;
}

}  // namespace

TEST_CASE("separable toy set is learned perfectly") {
  const Toy t = separable();
  const IntentClassifier model =
      train_classifier(t.features, t.labels, t.intents, t.vocab.size(), {});
  for (std::size_t i = 0; i < t.features.size(); ++i) {
    CHECK(model.predict(t.features[i]).front().first == t.intents[static_cast<std::size_t>(t.labels[i])]);
  }
}

TEST_CASE("zero epochs leave uniform predictions") {
  const Toy t = separable();
  ClassifierOptions options;
  options.epochs = 0;
  const IntentClassifier model =
      train_classifier(t.features, t.labels, t.intents, t.vocab.size(), options);
  for (const auto& [label, p] : model.predict(t.features[0])) CHECK(p == 0.5);
  CHECK(model.predict(zero_vector(t.vocab)) == model.uniform());
}

TEST_CASE("distributions sum to one and dimensions are checked") {
  const TrainingDataset& train = testing::snips_split().first;
  const Vocabulary vocab = Vocabulary::fit(train);
  std::vector<CountVector> features;
  std::vector<int> labels;
  for (const auto& ex : train.examples()) {
    features.push_back(count_tokens(vocab, tokenize(ex.text)));
    const auto& intents = train.intents();
    labels.push_back(static_cast<int>(std::find(intents.begin(), intents.end(), ex.intent) - intents.begin()));
  }
  const IntentClassifier model =
      train_classifier(features, labels, train.intents(), vocab.size(), {10, 0.1, 1e-4, 1, 16});
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    CountVector v = CountVector::Zero(vocab.size());
    for (int k = 0; k < 6; ++k) v[static_cast<Eigen::Index>(rng() % static_cast<unsigned>(vocab.size()))] += 1;
    CHECK(model.probabilities(v).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(model.probabilities(CountVector::Zero(3)), ConsistencyError);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  int worst_case = 0;
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const int v = 1 + static_cast<int>(rng() % 5);
    const int k = 2 + static_cast<int>(rng() % 3);
    std::vector<CountVector> rows;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      CountVector c(v);
      for (int j = 0; j < v; ++j) c[j] = static_cast<int>(rng() % 3);
      rows.push_back(c);
      labels.push_back(static_cast<int>(rng() % static_cast<unsigned>(k)));
    }
    const Eigen::MatrixXd x = design_matrix<double>(rows, v);
    Eigen::MatrixXd w(v + 1, k);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = weight(rng);
    const double l2 = (instance % 2) ? 1e-2 : 0.0;

    const Eigen::MatrixXd analytic = cross_entropy_gradient<double>(w, x, labels, l2);
    Eigen::MatrixXd numeric(w.rows(), w.cols());
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Eigen::MatrixXd plus = w, minus = w;
      plus.data()[i] += h;
      minus.data()[i] -= h;
      numeric.data()[i] = (loss_oracle(plus, x, labels, l2) - loss_oracle(minus, x, labels, l2)) / (2 * h);
    }
    const double rel = (analytic - numeric).norm() / std::max(1e-12, analytic.norm() + numeric.norm());
    if (rel > worst) {
      worst = rel;
      worst_case = instance;
    }
    CHECK(cross_entropy<double>(w, x, labels, l2) == doctest::Approx(loss_oracle(w, x, labels, l2)).epsilon(1e-12));
  }
  INFO("worst instance " << worst_case);
  CHECK(worst < 1e-5);
}

TEST_CASE("float instantiation agrees with double") {
  const Toy t = separable();
  const IntentClassifier model = train_classifier(t.features, t.labels, t.intents, t.vocab.size(), {});
  LinearIntentModel<float> single(t.intents, t.vocab.size());
  single.weights() = model.weights().cast<float>();
  const Eigen::VectorXd pd = model.probabilities(t.features[0]);
  const Eigen::VectorXf pf = single.probabilities(t.features[0]);
  CHECK((pd - pf.cast<double>()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("training is seeded and persists bit-exactly") {
  const Toy t = separable();
  ClassifierOptions options{5, 0.1, 1e-4, 42, 7};
  const IntentClassifier a = train_classifier(t.features, t.labels, t.intents, t.vocab.size(), options);
  const IntentClassifier b = train_classifier(t.features, t.labels, t.intents, t.vocab.size(), options);
  CHECK(a.weights() == b.weights());
  std::stringstream file;
  write_classifier(file, a);
  const std::string text = file.str();
  const IntentClassifier back = read_classifier(file);
  CHECK(back.weights() == a.weights());
  CHECK(back.intents() == a.intents());
  CHECK(back.options().seed == 42);
  CHECK(back.options().batch_size == 7);
  std::stringstream again;
  write_classifier(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("single class trains with a warning; bad options are rejected") {
  const Toy t = separable();
  std::vector<int> same(t.labels.size(), 0);
  std::vector<std::string> warnings;
  (void)train_classifier(t.features, same, t.intents, t.vocab.size(), {}, &warnings);
  CHECK(warnings.size() == 1);
  ClassifierOptions bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_classifier(t.features, t.labels, t.intents, t.vocab.size(), bad), ParameterError);
  bad = {};
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_classifier(t.features, t.labels, t.intents, t.vocab.size(), bad), ParameterError);
  CHECK_THROWS_AS(train_classifier({}, {}, t.intents, t.vocab.size(), {}), DataError);
}
