#pragma once

#include <cstdint>
#include <vector>

#include "fairmatch/features.hpp"
#include "fairmatch/hyperparams.hpp"
#include "fairmatch/metrics.hpp"
#include "fairmatch/model.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

struct CvCell {
  Hyperparams hp;
  double mean_score = 0.0;  // AUC (higher better) or RMSE (lower better)
};

struct CvResult {
  Hyperparams best;
  std::vector<CvCell> cells;
};

// k-fold grid search on an already-encoded matrix. Fold assignment is a
// seeded shuffle dealt round-robin; the same folds score every grid point.
// Ties go to the simpler model.
inline CvResult cross_validate_matrix(const FeatureMatrix& X, const std::vector<double>& y,
                                      ModelKind kind, bool classify,
                                      const std::vector<Hyperparams>& grid, int k_folds,
                                      uint64_t seed, int n_threads = 0) {
  require(!grid.empty(), "cross_validate: empty grid");
  require(k_folds >= 2, "cross_validate: k_folds must be >= 2");
  require(X.rows >= static_cast<size_t>(k_folds), "cross_validate: fewer rows than folds");

  std::vector<uint32_t> order(X.rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "cv-folds"));
  rng.shuffle(order);
  std::vector<int> fold_of(X.rows);
  for (size_t i = 0; i < order.size(); ++i)
    fold_of[order[i]] = static_cast<int>(i % static_cast<size_t>(k_folds));

  auto subset = [&](int fold, bool validation) {
    std::pair<FeatureMatrix, std::vector<double>> out;
    FeatureMatrix& M = out.first;
    M.cols = X.cols;
    M.col_names = X.col_names;
    for (size_t r = 0; r < X.rows; ++r) {
      if ((fold_of[r] == fold) != validation) continue;
      M.data.insert(M.data.end(), X.row(r), X.row(r) + X.cols);
      M.row_ids.push_back(X.row_ids.empty() ? "" : X.row_ids[r]);
      out.second.push_back(y[r]);
      ++M.rows;
    }
    return out;
  };

  CvResult result;
  for (const auto& hp : grid) {
    double score_sum = 0.0;
    for (int fold = 0; fold < k_folds; ++fold) {
      auto [train_X, train_y] = subset(fold, false);
      auto [val_X, val_y] = subset(fold, true);
      std::vector<double> scores;
      if (kind == ModelKind::Linear) {
        scores = predict(fit_linear(train_X, train_y, hp.lambda), val_X);
      } else if (kind == ModelKind::Classifier) {
        std::vector<int> ty(train_y.size());
        for (size_t i = 0; i < train_y.size(); ++i) ty[i] = train_y[i] != 0.0;
        bool pos = false, neg = false;
        for (int v : ty) (v ? pos : neg) = true;
        require(pos && neg, "cross_validate: training fold is single-class");
        scores = predict(fit_classifier(train_X, ty, hp, derive_seed(seed, "cv-fit", fold)),
                         val_X);
      } else {
        scores = predict(fit_forest(train_X, train_y, hp,
                                    derive_seed(seed, "cv-fit", fold), classify, n_threads),
                         val_X);
      }
      if (classify) {
        std::vector<int> vy(val_y.size());
        bool pos = false, neg = false;
        for (size_t i = 0; i < val_y.size(); ++i) {
          vy[i] = val_y[i] != 0.0;
          (vy[i] ? pos : neg) = true;
        }
        require(pos && neg, "cross_validate: validation fold is single-class");
        score_sum += auc(scores, vy);
      } else {
        score_sum += rmse(scores, val_y);
      }
    }
    result.cells.push_back({hp, score_sum / k_folds});
  }

  size_t best = 0;
  for (size_t i = 1; i < result.cells.size(); ++i) {
    double cur = result.cells[i].mean_score, inc = result.cells[best].mean_score;
    bool better = classify ? cur > inc : cur < inc;
    bool tied = cur == inc;
    if (better || (tied && simpler_than(result.cells[i].hp, result.cells[best].hp, kind)))
      best = i;
  }
  result.best = result.cells[best].hp;
  return result;
}

// Record-level convenience wrapper used by the experiment harness.
inline CvResult cross_validate(const std::vector<ApplicationRecord>& records,
                               const FeaturePolicy& policy, ModelKind kind,
                               TargetLabel target, const std::vector<Hyperparams>& grid,
                               int k_folds, uint64_t seed, int n_threads = 0) {
  FeatureMatrix X = encode(records, policy);
  bool classify = target == TargetLabel::Approval;
  require(classify || kind != ModelKind::Classifier,
          "cross_validate: the classifier only fits the approval task");
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) {
    if (target == TargetLabel::Approval) {
      y.push_back(r.approved ? 1.0 : 0.0);
    } else {
      require(r.interest_rate.has_value(),
              "cross_validate: record '" + r.id + "' has no interest rate");
      y.push_back(*r.interest_rate);
    }
  }
  return cross_validate_matrix(X, y, kind, classify, grid, k_folds, seed, n_threads);
}

}  // namespace fairmatch
