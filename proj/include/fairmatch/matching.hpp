#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairmatch/binning.hpp"
#include "fairmatch/csv.hpp"
#include "fairmatch/ingest.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

struct MatchedPair {
  std::string black_id;
  std::string white_id;
  CoarsenedKey key;
};

struct MatchedPairSet {
  std::vector<MatchedPair> pairs;  // sorted by (key, black_id)
  std::vector<std::string> unmatched_black;
  std::vector<std::string> unused_white;
  uint64_t seed = 0;
};

// 1:1 exact matching without replacement: records are grouped by CoarsenedKey
// in a single hash pass, and each bucket contributes min(#Black, #White)
// pairs. Partner assignment within a bucket is a uniformly random bijection
// onto a uniformly random subset of the larger side; the draw is keyed by
// (seed, key hash) so the result does not depend on bucket visit order.
// Records outside the two study races are ignored.
inline MatchedPairSet match_exact(const std::vector<ApplicationRecord>& records,
                                  const BinningSpec& spec, uint64_t seed) {
  spec.validate();

  struct Bucket {
    std::vector<uint32_t> black;
    std::vector<uint32_t> white;
  };
  std::unordered_map<CoarsenedKey, Bucket, CoarsenedKeyHash> buckets;
  buckets.reserve(records.size() / 2 + 1);

  for (uint32_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.race == Race::Black)
      buckets[coarsen(r, spec)].black.push_back(i);
    else if (r.race == Race::White)
      buckets[coarsen(r, spec)].white.push_back(i);
  }

  MatchedPairSet out;
  out.seed = seed;
  for (auto& [key, bucket] : buckets) {
    Rng rng(derive_seed(seed, "match-bucket", key.hash()));
    rng.shuffle(bucket.black);
    rng.shuffle(bucket.white);
    size_t n = std::min(bucket.black.size(), bucket.white.size());
    for (size_t i = 0; i < n; ++i)
      out.pairs.push_back({records[bucket.black[i]].id, records[bucket.white[i]].id, key});
    for (size_t i = n; i < bucket.black.size(); ++i)
      out.unmatched_black.push_back(records[bucket.black[i]].id);
    for (size_t i = n; i < bucket.white.size(); ++i)
      out.unused_white.push_back(records[bucket.white[i]].id);
  }

  std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) {
    if (!(a.key == b.key)) return a.key < b.key;
    return a.black_id < b.black_id;
  });
  std::sort(out.unmatched_black.begin(), out.unmatched_black.end());
  std::sort(out.unused_white.begin(), out.unused_white.end());
  return out;
}

inline std::unordered_map<std::string, size_t> index_by_id(
    const std::vector<ApplicationRecord>& records) {
  std::unordered_map<std::string, size_t> idx;
  idx.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) idx.emplace(records[i].id, i);
  return idx;
}

// Ids of all pair members (both sides), in pair order.
inline std::vector<std::string> matched_ids(const MatchedPairSet& pairs) {
  std::vector<std::string> ids;
  ids.reserve(pairs.pairs.size() * 2);
  for (const auto& p : pairs.pairs) {
    ids.push_back(p.black_id);
    ids.push_back(p.white_id);
  }
  return ids;
}

// Fills missing covariates among matched records with the mean of the
// variable over matched records where it is observed. One global mean per
// variable; observed values are never touched. The variable set follows the
// binning spec (income, dti, ltv, and age when matched on).
inline std::vector<ApplicationRecord> impute_means(
    const MatchedPairSet& pairs, const std::vector<ApplicationRecord>& records,
    const BinningSpec& spec) {
  require(!pairs.pairs.empty(), "impute: no matched pairs");
  std::vector<ApplicationRecord> out = records;
  auto idx = index_by_id(records);

  std::vector<size_t> members;
  members.reserve(pairs.pairs.size() * 2);
  for (const auto& id : matched_ids(pairs)) {
    auto it = idx.find(id);
    require(it != idx.end(), "impute: pair id '" + id + "' not in records");
    members.push_back(it->second);
  }

  auto field = [](ApplicationRecord& r, const std::string& var) -> std::optional<double>& {
    if (var == "income") return r.income;
    if (var == "dti") return r.dti;
    if (var == "ltv") return r.ltv;
    return r.age;
  };

  for (const auto& var : spec.variables()) {
    double sum = 0.0;
    size_t n = 0;
    for (size_t i : members) {
      const auto& v = field(out[i], var);
      if (v) {
        sum += *v;
        ++n;
      }
    }
    require(n > 0, "impute: variable '" + var + "' is missing in every matched record");
    double mean = sum / static_cast<double>(n);
    for (size_t i : members) {
      auto& v = field(out[i], var);
      if (!v) v = mean;
    }
  }
  return out;
}

// Approval rate and mean interest rate per race, on the full population and
// on matched records only. Plot-ready.
struct BalanceRow {
  std::string population;  // "all" | "matched"
  Race race = Race::Black;
  size_t count = 0;
  std::optional<double> approval_rate;
  std::optional<double> mean_interest_rate;
};

struct BalanceReport {
  std::vector<BalanceRow> rows;  // all/Black, all/White, matched/Black, matched/White
};

inline BalanceReport balance_report(const std::vector<ApplicationRecord>& records,
                                    const MatchedPairSet& pairs) {
  auto idx = index_by_id(records);
  std::vector<const ApplicationRecord*> matched;
  for (const auto& id : matched_ids(pairs)) {
    auto it = idx.find(id);
    require(it != idx.end(), "balance: pair id '" + id + "' not in records");
    matched.push_back(&records[it->second]);
  }

  auto row = [](const char* pop, Race race, auto begin, auto end) {
    BalanceRow r;
    r.population = pop;
    r.race = race;
    size_t approved = 0, rate_n = 0;
    double rate_sum = 0;
    for (auto it = begin; it != end; ++it) {
      const ApplicationRecord& rec = **it;
      if (rec.race != race) continue;
      ++r.count;
      approved += rec.approved;
      if (rec.interest_rate) {
        rate_sum += *rec.interest_rate;
        ++rate_n;
      }
    }
    if (r.count) r.approval_rate = static_cast<double>(approved) / r.count;
    if (rate_n) r.mean_interest_rate = rate_sum / rate_n;
    return r;
  };

  std::vector<const ApplicationRecord*> all;
  all.reserve(records.size());
  for (const auto& r : records) all.push_back(&r);

  BalanceReport report;
  report.rows.push_back(row("all", Race::Black, all.begin(), all.end()));
  report.rows.push_back(row("all", Race::White, all.begin(), all.end()));
  report.rows.push_back(row("matched", Race::Black, matched.begin(), matched.end()));
  report.rows.push_back(row("matched", Race::White, matched.begin(), matched.end()));
  return report;
}

inline void write_balance_csv(std::ostream& os, const BalanceReport& report,
                              const std::string& provenance = "") {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  write_csv_row(os, {"population", "race", "count", "approval_rate", "mean_interest_rate"});
  for (const auto& r : report.rows) {
    auto fmt = [](const std::optional<double>& v) {
      return v ? format_decimal4(*v) : std::string("NA");
    };
    write_csv_row(os, {r.population, to_string(r.race), std::to_string(r.count),
                       fmt(r.approval_rate), fmt(r.mean_interest_rate)});
  }
}

inline void write_pairs_csv(std::ostream& os, const MatchedPairSet& pairs,
                            const std::string& provenance = "") {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  bool age = !pairs.pairs.empty() && pairs.pairs.front().key.n_binned == 4;
  std::vector<std::string> header = {"black_id", "white_id", "income_bin", "dti_bin", "ltv_bin"};
  if (age) header.push_back("age_bin");
  for (const char* c : {"sex", "state", "loan_type", "lien", "missing_pattern"})
    header.push_back(c);
  write_csv_row(os, header);
  for (const auto& p : pairs.pairs) {
    std::vector<std::string> row = {p.black_id, p.white_id};
    for (size_t i = 0; i < p.key.n_binned; ++i)
      row.push_back(p.key.bins[i] >= 0 ? std::to_string(p.key.bins[i]) : "");
    row.push_back(to_string(static_cast<Sex>(p.key.sex_code)));
    row.push_back(state_from_code(p.key.state_code));
    row.push_back(to_string(static_cast<LoanType>(p.key.loan_type_code)));
    row.push_back(to_string(static_cast<Lien>(p.key.lien_code)));
    row.push_back(std::to_string(p.key.missing_mask));
    write_csv_row(os, row);
  }
}

inline json pairs_to_json(const MatchedPairSet& pairs) {
  json j;
  j["seed"] = pairs.seed;
  j["pairs"] = json::array();
  for (const auto& p : pairs.pairs)
    j["pairs"].push_back(
        {{"black", p.black_id}, {"white", p.white_id}, {"key", key_to_json(p.key)}});
  j["unmatched_black"] = pairs.unmatched_black;
  j["unused_white"] = pairs.unused_white;
  return j;
}

}  // namespace fairmatch
