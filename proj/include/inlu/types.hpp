#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace inlu {

using Tokens = std::vector<std::string>;

// Bag-of-words term counts, indexed by vocabulary position.
using CountVector = Eigen::VectorXi;

struct EntitySpan {
  std::string type;
  std::string value;  // surface tokens joined by a single space
  int start = 0;      // token index
  int end = 0;        // exclusive token index
  double confidence = 1.0;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

using Entities = std::vector<EntitySpan>;

// (label, probability), sorted by descending probability; equal
// probabilities are ordered by label.
using IntentDistribution = std::vector<std::pair<std::string, double>>;

// Sorts a distribution into ranking order.
void sort_ranking(IntentDistribution& ranking);

}  // namespace inlu
