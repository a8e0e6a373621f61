#include "pih/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pih {

namespace {

double gini(int n_pos, int n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(n_pos) / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct BuildContext {
  const std::vector<std::vector<double>>& X;
  const std::vector<int>& labels;
  int max_depth;
  int min_leaf;
  int n_total;  // bootstrap sample count, for importance weighting
};

}  // namespace

void ForestConfig::validate() const {
  if (num_trees < 1) throw InvalidSpecError("num_trees must be >= 1");
  if (max_depth < 1) throw InvalidSpecError("max_depth must be >= 1");
  if (min_leaf < 1) throw InvalidSpecError("min_leaf must be >= 1");
}

RandomForest RandomForest::fit(const std::vector<std::vector<double>>& X,
                               const std::vector<int>& labels,
                               const ForestConfig& cfg) {
  cfg.validate();
  if (X.size() < 20) {
    throw InsufficientDataError("forest fit needs >= 20 samples");
  }
  if (X.size() != labels.size()) {
    throw InvalidSpecError("feature/label count mismatch");
  }
  const int n_features = static_cast<int>(X.front().size());
  bool has_pos = false, has_neg = false;
  for (int l : labels) {
    if (l > 0) has_pos = true;
    if (l < 0) has_neg = true;
  }
  if (!has_pos || !has_neg) {
    throw DegenerateDataError("forest fit needs both classes present");
  }

  RandomForest forest;
  forest.n_features_ = n_features;
  forest.trees_.reserve(static_cast<std::size_t>(cfg.num_trees));

  const int n = static_cast<int>(X.size());
  for (int t = 0; t < cfg.num_trees; ++t) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> sample(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      sample[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    }

    Tree tree;
    tree.importance.assign(static_cast<std::size_t>(n_features), 0.0);
    BuildContext ctx{X, labels, cfg.max_depth, cfg.min_leaf, n};

    // Recursive CART build over index subsets.
    auto build = [&](auto&& self, std::vector<int>& idx, int depth) -> int {
      int n_pos = 0;
      for (int i : idx) {
        if (ctx.labels[static_cast<std::size_t>(i)] > 0) ++n_pos;
      }
      const int n_node = static_cast<int>(idx.size());
      const double imp = gini(n_pos, n_node);

      const auto make_leaf = [&]() {
        Node leaf;
        leaf.leaf_label = (2 * n_pos >= n_node) ? 1 : -1;
        tree.nodes.push_back(leaf);
        return static_cast<int>(tree.nodes.size()) - 1;
      };

      if (depth >= ctx.max_depth || n_node < 2 * ctx.min_leaf || imp == 0.0) {
        return make_leaf();
      }

      // Best split: maximize weighted impurity decrease; ties resolve to the
      // lowest feature index, then the lowest threshold, so the build is
      // deterministic.
      int best_feature = -1;
      double best_threshold = 0.0;
      double best_decrease = 0.0;
      std::vector<std::pair<double, int>> vals(
          static_cast<std::size_t>(n_node));
      for (int f = 0; f < static_cast<int>(ctx.X.front().size()); ++f) {
        for (std::size_t s = 0; s < idx.size(); ++s) {
          const int i = idx[s];
          vals[s] = {ctx.X[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(f)],
                     ctx.labels[static_cast<std::size_t>(i)]};
        }
        std::sort(vals.begin(), vals.end());
        int left_pos = 0;
        for (int s = 0; s + 1 < n_node; ++s) {
          if (vals[static_cast<std::size_t>(s)].second > 0) ++left_pos;
          const int n_left = s + 1;
          const int n_right = n_node - n_left;
          if (vals[static_cast<std::size_t>(s)].first ==
              vals[static_cast<std::size_t>(s + 1)].first) {
            continue;  // no threshold separates equal values
          }
          if (n_left < ctx.min_leaf || n_right < ctx.min_leaf) continue;
          const int right_pos = n_pos - left_pos;
          const double decrease =
              imp - (static_cast<double>(n_left) / n_node) *
                        gini(left_pos, n_left) -
              (static_cast<double>(n_right) / n_node) *
                  gini(right_pos, n_right);
          if (decrease > best_decrease + 1e-15) {
            best_decrease = decrease;
            best_feature = f;
            best_threshold = 0.5 * (vals[static_cast<std::size_t>(s)].first +
                                    vals[static_cast<std::size_t>(s + 1)].first);
          }
        }
      }

      if (best_feature < 0 || best_decrease <= 0.0) return make_leaf();

      tree.importance[static_cast<std::size_t>(best_feature)] +=
          (static_cast<double>(n_node) / ctx.n_total) * best_decrease;

      std::vector<int> left_idx, right_idx;
      left_idx.reserve(idx.size());
      right_idx.reserve(idx.size());
      for (int i : idx) {
        const double v = ctx.X[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(best_feature)];
        (v <= best_threshold ? left_idx : right_idx).push_back(i);
      }

      Node node;
      node.feature = best_feature;
      node.threshold = best_threshold;
      tree.nodes.push_back(node);
      const int node_id = static_cast<int>(tree.nodes.size()) - 1;
      const int left_id = self(self, left_idx, depth + 1);
      const int right_id = self(self, right_idx, depth + 1);
      tree.nodes[static_cast<std::size_t>(node_id)].left = left_id;
      tree.nodes[static_cast<std::size_t>(node_id)].right = right_id;
      return node_id;
    };

    build(build, sample, 0);

    const double total = std::accumulate(tree.importance.begin(),
                                         tree.importance.end(), 0.0);
    if (total > 0.0) {
      for (double& v : tree.importance) v /= total;
    }
    forest.trees_.push_back(std::move(tree));
  }
  return forest;
}

int RandomForest::tree_predict(const Tree& t,
                               const std::vector<double>& x) const {
  // Root is the first node pushed for the top-level build call. Because
  // children are pushed after their parent, index 0 is always the root.
  int cur = 0;
  while (t.nodes[static_cast<std::size_t>(cur)].feature >= 0) {
    const Node& nd = t.nodes[static_cast<std::size_t>(cur)];
    cur = (x[static_cast<std::size_t>(nd.feature)] <= nd.threshold) ? nd.left
                                                                    : nd.right;
  }
  return t.nodes[static_cast<std::size_t>(cur)].leaf_label;
}

int RandomForest::predict(const std::vector<double>& x) const {
  int votes = 0;
  for (const auto& t : trees_) votes += tree_predict(t, x);
  return votes >= 0 ? 1 : -1;
}

FeatureImportance RandomForest::feature_importance() const {
  const std::size_t d = static_cast<std::size_t>(n_features_);
  FeatureImportance out;
  out.mean.assign(d, 0.0);
  out.stddev.assign(d, 0.0);
  const double nt = static_cast<double>(trees_.size());
  for (const auto& t : trees_) {
    for (std::size_t f = 0; f < d; ++f) out.mean[f] += t.importance[f];
  }
  for (double& v : out.mean) v /= nt;
  for (const auto& t : trees_) {
    for (std::size_t f = 0; f < d; ++f) {
      const double dev = t.importance[f] - out.mean[f];
      out.stddev[f] += dev * dev;
    }
  }
  for (double& v : out.stddev) v = std::sqrt(v / nt);

  // Renormalize the mean so it sums to exactly 1 even if some trees ended up
  // with no usable split.
  const double total =
      std::accumulate(out.mean.begin(), out.mean.end(), 0.0);
  if (total > 0.0) {
    for (double& v : out.mean) v /= total;
  }
  return out;
}

RandomForest fit_forest(const std::vector<std::vector<double>>& X,
                        const std::vector<int>& labels,
                        const ForestConfig& cfg) {
  return RandomForest::fit(X, labels, cfg);
}

FeatureImportance feature_importance(const RandomForest& forest) {
  return forest.feature_importance();
}

}  // namespace pih
