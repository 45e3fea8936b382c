#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fairmatch/error.hpp"
#include "fairmatch/record.hpp"

namespace fairmatch {

// Model scores for the two members of one matched pair.
struct PredictionPair {
  std::string pair_id;  // the Black member's id
  double y_hat_black = 0.0;
  double y_hat_white = 0.0;
};

// Counterfactual unfairness: mean absolute score difference across pairs.
inline double cfu(const std::vector<PredictionPair>& pairs) {
  require(!pairs.empty(), "cfu: no prediction pairs");
  double sum = 0.0;
  for (const auto& p : pairs) sum += std::abs(p.y_hat_black - p.y_hat_white);
  return sum / static_cast<double>(pairs.size());
}

// Mann-Whitney AUC with ties counted 1/2, computed by average ranks.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  require(scores.size() == labels.size(), "auc: length mismatch");
  require(!scores.empty(), "auc: empty input");
  size_t n_pos = 0;
  for (int l : labels) n_pos += l != 0;
  size_t n_neg = scores.size() - n_pos;
  require(n_pos > 0 && n_neg > 0, "auc: labels contain a single class");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (size_t k = i; k < j; ++k)
      if (labels[order[k]] != 0) rank_sum_pos += avg_rank;
    i = j;
  }
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

inline double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
  require(predicted.size() == actual.size(), "rmse: length mismatch");
  require(!predicted.empty(), "rmse: empty input");
  double sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    double d = predicted[i] - actual[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

// The Tables 1-2 row shape: CFU plus overall and per-group accuracy.
struct MetricsReport {
  std::string metric_name;  // "auc" | "rmse"
  double cfu_value = 0.0;
  std::optional<double> overall;
  std::optional<double> metric_white;
  std::optional<double> metric_black;
  size_t n_pairs = 0;
};

// Per-group metric over the group's rows only, same definition as overall.
// A group whose labels are single-class (classification) is marked undefined
// rather than failing the run.
inline void group_metrics(const std::vector<double>& scores,
                          const std::vector<double>& labels,
                          const std::vector<Race>& groups, bool classification,
                          MetricsReport& out) {
  require(scores.size() == labels.size() && scores.size() == groups.size(),
          "group_metrics: length mismatch");
  auto metric_of = [&](const std::vector<size_t>& rows) -> std::optional<double> {
    if (rows.empty()) return std::nullopt;
    std::vector<double> s;
    s.reserve(rows.size());
    for (size_t r : rows) s.push_back(scores[r]);
    if (classification) {
      std::vector<int> l;
      l.reserve(rows.size());
      bool pos = false, neg = false;
      for (size_t r : rows) {
        l.push_back(labels[r] != 0.0);
        (labels[r] != 0.0 ? pos : neg) = true;
      }
      if (!pos || !neg) return std::nullopt;
      return auc(s, l);
    }
    std::vector<double> a;
    a.reserve(rows.size());
    for (size_t r : rows) a.push_back(labels[r]);
    return rmse(s, a);
  };

  std::vector<size_t> all(scores.size()), black, white;
  std::iota(all.begin(), all.end(), 0);
  for (size_t i = 0; i < groups.size(); ++i) {
    require(groups[i] != Race::Other, "group_metrics: rows must be Black or White");
    (groups[i] == Race::Black ? black : white).push_back(i);
  }
  out.metric_name = classification ? "auc" : "rmse";
  out.overall = metric_of(all);
  out.metric_black = metric_of(black);
  out.metric_white = metric_of(white);
}

}  // namespace fairmatch
