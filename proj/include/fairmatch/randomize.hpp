#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairmatch/matching.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

// Per-pair swap decisions. A pair is identified by its Black member's id,
// which is unique across pairs. The plan alone reproduces or undoes the swap.
struct RandomizationPlan {
  uint64_t seed = 0;
  TargetLabel label = TargetLabel::Approval;
  std::vector<std::pair<std::string, bool>> entries;  // (black_id, swapped)
};

namespace detail {

inline void swap_pair_label(ApplicationRecord& a, ApplicationRecord& b, TargetLabel label) {
  if (label == TargetLabel::Approval)
    std::swap(a.approved, b.approved);
  else
    std::swap(a.interest_rate, b.interest_rate);
}

}  // namespace detail

// Applies a persisted plan. Applying the same plan twice restores the input.
inline std::vector<ApplicationRecord> apply_plan(
    const std::vector<ApplicationRecord>& records, const std::vector<MatchedPair>& pairs,
    const RandomizationPlan& plan) {
  std::vector<ApplicationRecord> out = records;
  auto idx = index_by_id(out);
  std::unordered_map<std::string, const MatchedPair*> by_black;
  for (const auto& p : pairs) by_black[p.black_id] = &p;
  for (const auto& [black_id, swapped] : plan.entries) {
    if (!swapped) continue;
    auto pit = by_black.find(black_id);
    require(pit != by_black.end(), "plan: unknown pair '" + black_id + "'");
    auto b = idx.find(pit->second->black_id);
    auto w = idx.find(pit->second->white_id);
    require(b != idx.end() && w != idx.end(), "plan: pair member not in records");
    detail::swap_pair_label(out[b->second], out[w->second], plan.label);
  }
  return out;
}

// Within each training pair, exchanges the chosen label between the two
// members with probability 1/2. Each pair's draw comes from a stream keyed by
// its Black member's id, so results are independent of pair order and of any
// scheduling. Test pairs must not be passed in. Fails if a member lacks the
// chosen label (rate-incomplete pairs are excluded upstream).
inline std::pair<std::vector<ApplicationRecord>, RandomizationPlan> swap_labels(
    const std::vector<MatchedPair>& training_pairs,
    const std::vector<ApplicationRecord>& records, TargetLabel label, uint64_t seed) {
  RandomizationPlan plan;
  plan.seed = seed;
  plan.label = label;
  plan.entries.reserve(training_pairs.size());

  auto idx = index_by_id(records);
  uint64_t stream = derive_seed(seed, std::string("randomize-") + to_string(label));
  for (const auto& p : training_pairs) {
    auto b = idx.find(p.black_id);
    auto w = idx.find(p.white_id);
    require(b != idx.end() && w != idx.end(),
            "randomize: pair member not in records for pair '" + p.black_id + "'");
    if (label == TargetLabel::InterestRate) {
      require(records[b->second].interest_rate && records[w->second].interest_rate,
              "randomize: pair '" + p.black_id + "' lacks an interest rate");
    }
    Rng rng(derive_seed(stream, p.black_id));
    plan.entries.emplace_back(p.black_id, rng.bernoulli(0.5));
  }
  return {apply_plan(records, training_pairs, plan), plan};
}

inline json plan_to_json(const RandomizationPlan& plan) {
  json j;
  j["seed"] = plan.seed;
  j["label"] = to_string(plan.label);
  json entries = json::array();
  for (const auto& [id, swapped] : plan.entries)
    entries.push_back({{"pair", id}, {"swapped", swapped}});
  j["entries"] = std::move(entries);
  return j;
}

inline RandomizationPlan plan_from_json(const json& j) {
  RandomizationPlan plan;
  plan.seed = j.at("seed").get<uint64_t>();
  std::string label = j.at("label").get<std::string>();
  require(label == "approval" || label == "interest_rate",
          "plan: unknown label '" + label + "'");
  plan.label = label == "approval" ? TargetLabel::Approval : TargetLabel::InterestRate;
  for (const auto& e : j.at("entries"))
    plan.entries.emplace_back(e.at("pair").get<std::string>(), e.at("swapped").get<bool>());
  return plan;
}

}  // namespace fairmatch
