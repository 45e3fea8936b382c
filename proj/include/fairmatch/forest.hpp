#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "fairmatch/error.hpp"
#include "fairmatch/features.hpp"
#include "fairmatch/hyperparams.hpp"
#include "fairmatch/parallel.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0;  // leaf only: mean target / positive fraction
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict_row(const double* row) const {
    int32_t i = 0;
    while (nodes[i].feature >= 0)
      i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
  }
};

struct ForestModel {
  bool classify = false;
  size_t n_features = 0;
  std::vector<Tree> trees;

  // Mean of tree outputs, accumulated in tree-index order.
  double predict_row(const double* row) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict_row(row);
    return sum / static_cast<double>(trees.size());
  }
};

namespace detail {

// Exact greedy CART split search. Candidates are midpoints between distinct
// consecutive values; both children must hold at least min_leaf samples.
// Impurity is weighted Gini (classification) or SSE (regression); the first
// strictly-best candidate wins, scanning features in ascending index order
// and thresholds ascending, so ties resolve deterministically.
struct SplitResult {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

inline double leaf_value(const std::vector<double>& y, const std::vector<uint32_t>& samples) {
  double sum = 0.0;
  for (uint32_t s : samples) sum += y[s];
  return sum / static_cast<double>(samples.size());
}

inline SplitResult best_split(const FeatureMatrix& X, const std::vector<double>& y,
                              const std::vector<uint32_t>& samples,
                              const std::vector<int>& features, int min_leaf,
                              bool classify) {
  SplitResult best;
  const size_t n = samples.size();
  std::vector<std::pair<double, double>> vals(n);  // (feature value, target)

  for (int f : features) {
    for (size_t i = 0; i < n; ++i) {
      const double* row = X.row(samples[i]);
      vals[i] = {row[f], y[samples[i]]};
    }
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) continue;

    double total_sum = 0.0, total_sumsq = 0.0;
    for (const auto& [v, t] : vals) {
      total_sum += t;
      total_sumsq += t * t;
    }

    double left_sum = 0.0, left_sumsq = 0.0;
    for (size_t i = 1; i < n; ++i) {
      left_sum += vals[i - 1].second;
      left_sumsq += vals[i - 1].second * vals[i - 1].second;
      if (vals[i - 1].first == vals[i].first) continue;
      if (i < static_cast<size_t>(min_leaf) || n - i < static_cast<size_t>(min_leaf))
        continue;
      double nl = static_cast<double>(i), nr = static_cast<double>(n - i);
      double impurity;
      if (classify) {
        double pl = left_sum / nl, pr = (total_sum - left_sum) / nr;
        impurity = nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr);
      } else {
        double sse_l = left_sumsq - left_sum * left_sum / nl;
        double right_sum = total_sum - left_sum;
        double sse_r = (total_sumsq - left_sumsq) - right_sum * right_sum / nr;
        impurity = sse_l + sse_r;
      }
      if (impurity < best.impurity) {
        best.impurity = impurity;
        best.feature = f;
        best.threshold = 0.5 * (vals[i - 1].first + vals[i].first);
      }
    }
  }
  return best;
}

inline Tree grow_tree(const FeatureMatrix& X, const std::vector<double>& y,
                      std::vector<uint32_t> root_samples, const Hyperparams& hp,
                      bool classify, Rng& rng) {
  Tree tree;
  struct Work {
    int32_t node;
    std::vector<uint32_t> samples;
    int depth;
  };
  std::vector<Work> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, std::move(root_samples), 0});

  const int d = static_cast<int>(X.cols);
  int mtry = std::clamp(static_cast<int>(std::lround(hp.feature_subsample * d)), 1, d);
  std::vector<int> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);

  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();

    bool pure = true;
    for (size_t i = 1; i < w.samples.size(); ++i)
      if (y[w.samples[i]] != y[w.samples[0]]) {
        pure = false;
        break;
      }
    bool depth_capped = hp.max_depth > 0 && w.depth >= hp.max_depth;
    if (pure || depth_capped ||
        w.samples.size() < 2 * static_cast<size_t>(hp.min_leaf) || w.samples.size() < 2) {
      tree.nodes[w.node].value = leaf_value(y, w.samples);
      continue;
    }

    // per-split feature subsample, sorted so scan order stays by index
    std::vector<int> features = all_features;
    if (mtry < d) {
      for (int i = 0; i < mtry; ++i) {
        int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(d - i)));
        std::swap(features[i], features[j]);
      }
      features.resize(mtry);
      std::sort(features.begin(), features.end());
    }

    SplitResult split = best_split(X, y, w.samples, features, hp.min_leaf, classify);
    if (split.feature < 0) {
      tree.nodes[w.node].value = leaf_value(y, w.samples);
      continue;
    }

    std::vector<uint32_t> left, right;
    left.reserve(w.samples.size());
    right.reserve(w.samples.size());
    for (uint32_t s : w.samples)
      (X.row(s)[split.feature] <= split.threshold ? left : right).push_back(s);

    const int32_t left_id = static_cast<int32_t>(tree.nodes.size());
    const int32_t right_id = left_id + 1;
    tree.nodes.emplace_back();  // may reallocate; write through indices only
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[w.node];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    stack.push_back({right_id, std::move(right), w.depth + 1});
    stack.push_back({left_id, std::move(left), w.depth + 1});
  }
  return tree;
}

}  // namespace detail

// Bagged CART ensemble. Each tree sees a bootstrap sample (when enabled) and
// draws its randomness from a stream keyed by (seed, tree index), so training
// is schedule-independent and parallelizable across trees.
inline ForestModel fit_forest(const FeatureMatrix& X, const std::vector<double>& y,
                              const Hyperparams& hp, uint64_t seed, bool classify,
                              int n_threads = 0) {
  require(X.rows > 0, "fit_forest: empty input");
  require(X.rows == y.size(), "fit_forest: row/target length mismatch");
  require(hp.n_trees >= 1, "fit_forest: n_trees must be >= 1");
  require(hp.min_leaf >= 1, "fit_forest: min_leaf must be >= 1");
  require(hp.feature_subsample > 0.0 && hp.feature_subsample <= 1.0,
          "fit_forest: feature_subsample must be in (0, 1]");
  if (classify)
    for (double v : y)
      require(v == 0.0 || v == 1.0, "fit_forest: classification targets must be 0/1");

  ForestModel model;
  model.classify = classify;
  model.n_features = X.cols;
  model.trees.resize(static_cast<size_t>(hp.n_trees));

  const size_t n = X.rows;
  parallel_for(model.trees.size(), n_threads, [&](size_t t) {
    Rng rng(derive_seed(seed, "forest-tree", t));
    std::vector<uint32_t> samples(n);
    if (hp.bootstrap) {
      for (size_t i = 0; i < n; ++i)
        samples[i] = static_cast<uint32_t>(rng.below(n));
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    model.trees[t] = detail::grow_tree(X, y, std::move(samples), hp, classify, rng);
  });
  return model;
}

inline std::vector<double> predict(const ForestModel& m, const FeatureMatrix& X) {
  require(m.n_features == X.cols, "forest predict: column count mismatch");
  std::vector<double> out(X.rows);
  for (size_t r = 0; r < X.rows; ++r) out[r] = m.predict_row(X.row(r));
  return out;
}

}  // namespace fairmatch
