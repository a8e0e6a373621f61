// Forest of CART classification trees with Gini impurity splits, used to rank
// which wrench channels carry misalignment-direction information.
//
// Importance of a feature is the impurity decrease accumulated over the
// splits that use it, weighted by the fraction of samples reaching the split,
// normalized per tree; the forest reports the mean and the tree-to-tree
// spread of those per-tree vectors.

#pragma once

#include <cstdint>
#include <vector>

#include "pih/core.hpp"
#include "pih/rng.hpp"

namespace pih {

struct ForestConfig {
  int num_trees = 100;
  int max_depth = 6;
  int min_leaf = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FeatureImportance {
  std::vector<double> mean;    // nonnegative, sums to 1
  std::vector<double> stddev;  // across trees
};

class RandomForest {
 public:
  // labels are -1/+1. Throws DegenerateDataError when only one class is
  // present, InsufficientDataError below 20 samples.
  static RandomForest fit(const std::vector<std::vector<double>>& X,
                          const std::vector<int>& labels,
                          const ForestConfig& cfg);

  int predict(const std::vector<double>& x) const;  // majority vote

  FeatureImportance feature_importance() const;

  int n_features() const { return n_features_; }

 private:
  struct Node {
    int feature = -1;       // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_label = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<double> importance;  // normalized per tree
  };

  int tree_predict(const Tree& t, const std::vector<double>& x) const;

  std::vector<Tree> trees_;
  int n_features_ = 0;
};

RandomForest fit_forest(const std::vector<std::vector<double>>& X,
                        const std::vector<int>& labels,
                        const ForestConfig& cfg);
FeatureImportance feature_importance(const RandomForest& forest);

}  // namespace pih
