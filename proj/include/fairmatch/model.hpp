#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fairmatch/classifier.hpp"
#include "fairmatch/features.hpp"
#include "fairmatch/forest.hpp"
#include "fairmatch/hyperparams.hpp"
#include "fairmatch/linear.hpp"

namespace fairmatch {

// A trained predictor plus everything needed to reproduce its predictions:
// the feature policy it was encoded under, its hyperparameters and seed.
struct ModelHandle {
  ModelKind kind = ModelKind::Linear;
  FeaturePolicy policy;
  Hyperparams hp;
  uint64_t seed = 0;
  std::variant<LinearModel, ClassifierModel, ForestModel> model;

  bool classification() const {
    if (kind == ModelKind::Classifier) return true;
    if (kind == ModelKind::Forest) return std::get<ForestModel>(model).classify;
    return false;
  }
};

inline ModelHandle train_model(const std::vector<ApplicationRecord>& records,
                               const FeaturePolicy& policy, ModelKind kind,
                               const Hyperparams& hp, uint64_t seed, bool classify_task,
                               TargetLabel target, int n_threads = 0) {
  ModelHandle handle;
  handle.kind = kind;
  handle.policy = policy;
  handle.hp = hp;
  handle.seed = seed;

  FeatureMatrix X = encode(records, policy);
  if (kind == ModelKind::Classifier) {
    std::vector<int> y;
    y.reserve(records.size());
    for (const auto& r : records) y.push_back(r.approved ? 1 : 0);
    handle.model = fit_classifier(X, y, hp, seed);
    return handle;
  }

  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) {
    if (target == TargetLabel::Approval) {
      y.push_back(r.approved ? 1.0 : 0.0);
    } else {
      require(r.interest_rate.has_value(),
              "train: record '" + r.id + "' has no interest rate");
      y.push_back(*r.interest_rate);
    }
  }
  if (kind == ModelKind::Linear)
    handle.model = fit_linear(X, y, hp.lambda);
  else
    handle.model = fit_forest(X, y, hp, seed, classify_task, n_threads);
  return handle;
}

inline std::vector<double> predict(const ModelHandle& handle, const FeatureMatrix& X) {
  require(X.col_names == handle.policy.column_names(),
          "predict: feature columns do not match the handle's policy");
  return std::visit([&](const auto& m) { return predict(m, X); }, handle.model);
}

inline std::vector<double> predict_records(const ModelHandle& handle,
                                           const std::vector<ApplicationRecord>& records) {
  return predict(handle, encode(records, handle.policy));
}

// --- versioned JSON serialization -------------------------------------------

inline json model_to_json(const ModelHandle& h) {
  json j;
  j["format_version"] = 1;
  j["kind"] = to_string(h.kind);
  j["policy"] = policy_to_json(h.policy);
  j["hyperparams"] = hyperparams_to_json(h.hp);
  j["seed"] = h.seed;
  json params;
  if (h.kind == ModelKind::Linear) {
    const auto& m = std::get<LinearModel>(h.model);
    params["weights"] = m.weights;
    params["intercept"] = m.intercept;
  } else if (h.kind == ModelKind::Classifier) {
    const auto& m = std::get<ClassifierModel>(h.model);
    params["n_features"] = m.n_features;
    params["hidden"] = m.hidden;
    params["params"] = m.params;
  } else {
    const auto& m = std::get<ForestModel>(h.model);
    params["classify"] = m.classify;
    params["n_features"] = m.n_features;
    json trees = json::array();
    for (const auto& t : m.trees) {
      json nodes = json::array();
      for (const auto& n : t.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
      trees.push_back(std::move(nodes));
    }
    params["trees"] = std::move(trees);
  }
  j["params"] = std::move(params);
  return j;
}

inline ModelHandle model_from_json(const json& j) {
  require(j.at("format_version").get<int>() == 1, "model: unsupported format version");
  ModelHandle h;
  h.kind = model_kind_from_string(j.at("kind").get<std::string>());
  h.policy = policy_from_json(j.at("policy"));
  h.hp = hyperparams_from_json(j.at("hyperparams"));
  h.seed = j.at("seed").get<uint64_t>();
  const json& params = j.at("params");
  if (h.kind == ModelKind::Linear) {
    LinearModel m;
    m.weights = params.at("weights").get<std::vector<double>>();
    m.intercept = params.at("intercept").get<double>();
    h.model = std::move(m);
  } else if (h.kind == ModelKind::Classifier) {
    ClassifierModel m;
    m.n_features = params.at("n_features").get<size_t>();
    m.hidden = params.at("hidden").get<int>();
    m.params = params.at("params").get<std::vector<double>>();
    h.model = std::move(m);
  } else {
    ForestModel m;
    m.classify = params.at("classify").get<bool>();
    m.n_features = params.at("n_features").get<size_t>();
    for (const auto& tj : params.at("trees")) {
      Tree t;
      for (const auto& nj : tj) {
        TreeNode n;
        n.feature = nj.at(0).get<int32_t>();
        n.threshold = nj.at(1).get<double>();
        n.left = nj.at(2).get<int32_t>();
        n.right = nj.at(3).get<int32_t>();
        n.value = nj.at(4).get<double>();
        t.nodes.push_back(n);
      }
      m.trees.push_back(std::move(t));
    }
    h.model = std::move(m);
  }
  return h;
}

}  // namespace fairmatch
