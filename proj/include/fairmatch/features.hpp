#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fairmatch/binning.hpp"
#include "fairmatch/error.hpp"
#include "fairmatch/json.hpp"
#include "fairmatch/record.hpp"

namespace fairmatch {

// Which columns a model sees and how they are derived. The categorical
// vocabulary and the standardization statistics live in the policy, not in
// the data, so column count and order are fixed before any matrix is built.
struct FeaturePolicy {
  bool include_race = false;
  bool coarsened_mode = false;  // encode bin indices + missing bits instead of raw numerics
  std::vector<std::string> numeric_vars = {"income", "dti", "ltv"};
  std::vector<std::string> state_vocab;  // sorted two-letter codes
  BinningSpec binning;                   // used in coarsened mode

  struct Scaler {
    double mean = 0.0;
    double stddev = 1.0;
  };
  std::map<std::string, Scaler> scalers;  // per numeric var, raw mode only

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    for (const auto& v : numeric_vars) {
      if (coarsened_mode) {
        names.push_back(v + "_bin");
        names.push_back(v + "_missing");
      } else {
        names.push_back(v);
      }
    }
    for (const char* s : {"Male", "Female", "Joint", "NotAvailable"})
      names.push_back(std::string("sex_") + s);
    for (const auto& s : state_vocab) names.push_back("state_" + s);
    for (const char* t : {"Conventional", "FHA", "VA", "RHS_FSA"})
      names.push_back(std::string("loan_type_") + t);
    names.push_back("lien_FirstLien");
    names.push_back("lien_SubordinateLien");
    if (include_race) names.push_back("race_black");
    return names;
  }
};

// Vocabulary comes from the full record set once, before any split; the
// numeric scalers are fit later on each variant's own training records.
inline FeaturePolicy make_policy(const std::vector<ApplicationRecord>& records,
                                 bool include_race, bool coarsened_mode,
                                 const BinningSpec& binning) {
  FeaturePolicy policy;
  policy.include_race = include_race;
  policy.coarsened_mode = coarsened_mode;
  policy.binning = binning;
  if (binning.use_age()) policy.numeric_vars.push_back("age");
  std::set<std::string> states;
  for (const auto& r : records) states.insert(r.state);
  policy.state_vocab.assign(states.begin(), states.end());
  return policy;
}

inline const std::optional<double>& numeric_field(const ApplicationRecord& r,
                                                  const std::string& var) {
  if (var == "income") return r.income;
  if (var == "dti") return r.dti;
  if (var == "ltv") return r.ltv;
  return r.age;
}

inline void fit_scalers(FeaturePolicy& policy,
                        const std::vector<ApplicationRecord>& training) {
  policy.scalers.clear();
  if (policy.coarsened_mode) return;
  for (const auto& var : policy.numeric_vars) {
    double sum = 0, sumsq = 0;
    size_t n = 0;
    for (const auto& r : training) {
      const auto& v = numeric_field(r, var);
      require(v.has_value(), "scaler: missing " + var + " (impute first)");
      sum += *v;
      sumsq += *v * *v;
      ++n;
    }
    require(n > 0, "scaler: no training records");
    FeaturePolicy::Scaler s;
    s.mean = sum / n;
    double var_est = sumsq / n - s.mean * s.mean;
    s.stddev = var_est > 1e-12 ? std::sqrt(var_est) : 1.0;
    policy.scalers[var] = s;
  }
}

// Row-major dense matrix with column metadata and row ids.
struct FeatureMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major
  std::vector<std::string> col_names;
  std::vector<std::string> row_ids;

  double at(size_t r, size_t c) const { return data[r * cols + c]; }
  const double* row(size_t r) const { return data.data() + r * cols; }
};

inline FeatureMatrix encode(const std::vector<ApplicationRecord>& records,
                            const FeaturePolicy& policy) {
  FeatureMatrix m;
  m.col_names = policy.column_names();
  m.cols = m.col_names.size();
  m.rows = records.size();
  m.data.assign(m.rows * m.cols, 0.0);
  m.row_ids.reserve(m.rows);

  std::map<std::string, size_t> state_pos;
  for (size_t i = 0; i < policy.state_vocab.size(); ++i)
    state_pos[policy.state_vocab[i]] = i;

  for (size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    m.row_ids.push_back(rec.id);
    double* row = m.data.data() + r * m.cols;
    size_t c = 0;

    for (const auto& var : policy.numeric_vars) {
      const auto& v = numeric_field(rec, var);
      if (policy.coarsened_mode) {
        row[c++] = v ? static_cast<double>(bin_index(*v, policy.binning.edges_for(var)))
                     : -1.0;
        row[c++] = v ? 0.0 : 1.0;
      } else {
        require(v.has_value(),
                "encode: record '" + rec.id + "' missing " + var + " (impute first)");
        auto it = policy.scalers.find(var);
        require(it != policy.scalers.end(), "encode: policy has no scaler for " + var);
        row[c++] = (*v - it->second.mean) / it->second.stddev;
      }
    }

    row[c + static_cast<size_t>(rec.sex)] = 1.0;
    c += 4;
    auto sit = state_pos.find(rec.state);
    require(sit != state_pos.end(),
            "encode: state '" + rec.state + "' not in policy vocabulary");
    row[c + sit->second] = 1.0;
    c += policy.state_vocab.size();
    row[c + static_cast<size_t>(rec.loan_type)] = 1.0;
    c += 4;
    row[c + static_cast<size_t>(rec.lien)] = 1.0;
    c += 2;
    if (policy.include_race) row[c++] = rec.race == Race::Black ? 1.0 : 0.0;
  }
  return m;
}

inline json policy_to_json(const FeaturePolicy& p) {
  json j;
  j["include_race"] = p.include_race;
  j["coarsened_mode"] = p.coarsened_mode;
  j["numeric_vars"] = p.numeric_vars;
  j["state_vocab"] = p.state_vocab;
  j["binning"] = binning_to_json(p.binning);
  json scalers;
  for (const auto& [var, s] : p.scalers)
    scalers[var] = {{"mean", s.mean}, {"stddev", s.stddev}};
  j["scalers"] = std::move(scalers);
  return j;
}

inline FeaturePolicy policy_from_json(const json& j) {
  FeaturePolicy p;
  p.include_race = j.at("include_race").get<bool>();
  p.coarsened_mode = j.at("coarsened_mode").get<bool>();
  p.numeric_vars = j.at("numeric_vars").get<std::vector<std::string>>();
  p.state_vocab = j.at("state_vocab").get<std::vector<std::string>>();
  binning_from_json(j.at("binning"), p.binning);
  if (j.contains("scalers"))
    for (auto& [var, s] : j.at("scalers").items())
      p.scalers[var] = {s.at("mean").get<double>(), s.at("stddev").get<double>()};
  return p;
}

}  // namespace fairmatch
