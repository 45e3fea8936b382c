#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairmatch/error.hpp"
#include "fairmatch/json.hpp"

namespace fairmatch {

enum class ModelKind : uint8_t { Linear, Classifier, Forest };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Classifier: return "classifier";
    default: return "forest";
  }
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "linear") return ModelKind::Linear;
  if (s == "classifier") return ModelKind::Classifier;
  if (s == "forest") return ModelKind::Forest;
  fail("unknown model kind '" + s + "'");
}

// One bag of knobs for all three model kinds; each kind reads its own.
struct Hyperparams {
  // ridge regression
  double lambda = 1e-8;

  // classifier (logistic by default, MLP when hidden > 0)
  double l2 = 1e-6;
  int hidden = 0;
  double learning_rate = 0.1;
  int max_iter = 500;
  double tol = 1e-8;

  // forest
  int n_trees = 50;
  int max_depth = 16;  // 0 = unlimited
  int min_leaf = 1;
  double feature_subsample = 1.0;  // fraction of features per split
  bool bootstrap = true;

  bool operator==(const Hyperparams&) const = default;
};

// Tie-break ordering for cross-validation: true when `a` is the simpler
// model (fewer trees, shallower, larger penalty, narrower net).
inline bool simpler_than(const Hyperparams& a, const Hyperparams& b, ModelKind kind) {
  auto depth_rank = [](int d) { return d == 0 ? 1 << 30 : d; };
  switch (kind) {
    case ModelKind::Linear:
      return a.lambda > b.lambda;
    case ModelKind::Classifier:
      if (a.hidden != b.hidden) return a.hidden < b.hidden;
      return a.l2 > b.l2;
    case ModelKind::Forest:
      if (a.n_trees != b.n_trees) return a.n_trees < b.n_trees;
      if (depth_rank(a.max_depth) != depth_rank(b.max_depth))
        return depth_rank(a.max_depth) < depth_rank(b.max_depth);
      return a.min_leaf > b.min_leaf;
  }
  return false;
}

inline json hyperparams_to_json(const Hyperparams& h) {
  return json{{"lambda", h.lambda},
              {"l2", h.l2},
              {"hidden", h.hidden},
              {"learning_rate", h.learning_rate},
              {"max_iter", h.max_iter},
              {"tol", h.tol},
              {"n_trees", h.n_trees},
              {"max_depth", h.max_depth},
              {"min_leaf", h.min_leaf},
              {"feature_subsample", h.feature_subsample},
              {"bootstrap", h.bootstrap}};
}

// Partial objects are fine: unspecified knobs keep their defaults, so a grid
// point can name just the fields it varies.
inline Hyperparams hyperparams_from_json(const json& j, Hyperparams base = {}) {
  Hyperparams h = base;
  if (j.contains("lambda")) h.lambda = j.at("lambda").get<double>();
  if (j.contains("l2")) h.l2 = j.at("l2").get<double>();
  if (j.contains("hidden")) h.hidden = j.at("hidden").get<int>();
  if (j.contains("learning_rate")) h.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("max_iter")) h.max_iter = j.at("max_iter").get<int>();
  if (j.contains("tol")) h.tol = j.at("tol").get<double>();
  if (j.contains("n_trees")) h.n_trees = j.at("n_trees").get<int>();
  if (j.contains("max_depth")) h.max_depth = j.at("max_depth").get<int>();
  if (j.contains("min_leaf")) h.min_leaf = j.at("min_leaf").get<int>();
  if (j.contains("feature_subsample"))
    h.feature_subsample = j.at("feature_subsample").get<double>();
  if (j.contains("bootstrap")) h.bootstrap = j.at("bootstrap").get<bool>();
  return h;
}

// Default search grids. The ridge ladder spans under- to over-penalized; the
// forest grid crosses tree count, depth cap and leaf size.
inline std::vector<Hyperparams> default_grid(ModelKind kind) {
  std::vector<Hyperparams> grid;
  switch (kind) {
    case ModelKind::Linear:
      for (double lambda : {1e-8, 1e-2, 1.0}) {
        Hyperparams h;
        h.lambda = lambda;
        grid.push_back(h);
      }
      break;
    case ModelKind::Classifier:
      for (double l2 : {1e-6, 1e-2}) {
        Hyperparams h;
        h.l2 = l2;
        grid.push_back(h);
      }
      break;
    case ModelKind::Forest:
      for (int n_trees : {50, 200})
        for (int max_depth : {8, 16, 0})
          for (int min_leaf : {1, 20}) {
            Hyperparams h;
            h.n_trees = n_trees;
            h.max_depth = max_depth;
            h.min_leaf = min_leaf;
            grid.push_back(h);
          }
      break;
  }
  return grid;
}

}  // namespace fairmatch
