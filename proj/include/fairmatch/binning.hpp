#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "fairmatch/error.hpp"
#include "fairmatch/json.hpp"
#include "fairmatch/record.hpp"

namespace fairmatch {

// Bracket edges per matched numeric variable. k edges define k+1 bins under
// the (lo, hi] convention: bin 0 = (-inf, e1], bin k = (e_k, +inf). An edge
// value itself belongs to the lower bin.
struct BinningSpec {
  std::vector<double> income_edges{32, 53, 107, 374};
  std::vector<double> dti_edges{0, 20, 30, 36, 40, 45, 50, 60};
  std::vector<double> ltv_edges{40, 60, 79, 81, 90, 100};
  // Hook for an extra matched variable; when empty, age is ignored entirely.
  std::vector<double> age_edges{};

  bool use_age() const { return !age_edges.empty(); }

  std::vector<std::string> variables() const {
    std::vector<std::string> v = {"income", "dti", "ltv"};
    if (use_age()) v.push_back("age");
    return v;
  }

  const std::vector<double>& edges_for(const std::string& var) const {
    if (var == "income") return income_edges;
    if (var == "dti") return dti_edges;
    if (var == "ltv") return ltv_edges;
    if (var == "age") return age_edges;
    fail("binning: unknown variable '" + var + "'");
  }

  void validate() const {
    for (const auto& var : std::vector<std::string>{"income", "dti", "ltv", "age"}) {
      const auto& e = edges_for(var);
      require(std::is_sorted(e.begin(), e.end()) &&
                  std::adjacent_find(e.begin(), e.end()) == e.end(),
              "binning: " + var + " edges must be strictly increasing");
      for (double x : e)
        require(std::isfinite(x), "binning: " + var + " edges must be finite");
    }
    require(!income_edges.empty() && !dti_edges.empty() && !ltv_edges.empty(),
            "binning: income, dti and ltv need at least one edge");
  }
};

// bin(v) under (lo, hi]: index of the first edge >= v, or k past the last.
inline int bin_index(double value, const std::vector<double>& edges) {
  auto it = std::lower_bound(edges.begin(), edges.end(), value);
  return static_cast<int>(it - edges.begin());
}

// The exact-match bucket: bin index per matched numeric (-1 when missing),
// raw categoricals, and the missingness pattern over the matched numerics.
// Race and both outcome fields never contribute.
struct CoarsenedKey {
  static constexpr size_t kMaxBinned = 4;  // income, dti, ltv, optional age

  std::array<int8_t, kMaxBinned> bins{{-1, -1, -1, -1}};
  uint8_t n_binned = 3;
  uint8_t missing_mask = 0;  // bit i set iff binned variable i is missing
  uint8_t sex_code = 0;
  uint8_t loan_type_code = 0;
  uint8_t lien_code = 0;
  uint16_t state_code = 0;  // two packed letters

  bool operator==(const CoarsenedKey&) const = default;

  // Total order used for deterministic pair emission.
  auto tie() const {
    return std::tie(state_code, sex_code, loan_type_code, lien_code, bins,
                    missing_mask, n_binned);
  }
  bool operator<(const CoarsenedKey& o) const { return tie() < o.tie(); }

  uint64_t hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto step = [&h](uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ULL;
    };
    for (size_t i = 0; i < kMaxBinned; ++i) step(static_cast<uint8_t>(bins[i]));
    step(n_binned);
    step(missing_mask);
    step(sex_code);
    step(loan_type_code);
    step(lien_code);
    step(state_code);
    return h;
  }
};

struct CoarsenedKeyHash {
  size_t operator()(const CoarsenedKey& k) const { return k.hash(); }
};

inline CoarsenedKey coarsen(const ApplicationRecord& r, const BinningSpec& spec) {
  CoarsenedKey key;
  const std::optional<double>* values[CoarsenedKey::kMaxBinned] = {
      &r.income, &r.dti, &r.ltv, &r.age};
  const std::vector<double>* edges[CoarsenedKey::kMaxBinned] = {
      &spec.income_edges, &spec.dti_edges, &spec.ltv_edges, &spec.age_edges};
  key.n_binned = spec.use_age() ? 4 : 3;
  for (size_t i = 0; i < key.n_binned; ++i) {
    if (values[i]->has_value())
      key.bins[i] = static_cast<int8_t>(bin_index(**values[i], *edges[i]));
    else
      key.missing_mask |= static_cast<uint8_t>(1u << i);
  }
  key.sex_code = static_cast<uint8_t>(r.sex);
  key.loan_type_code = static_cast<uint8_t>(r.loan_type);
  key.lien_code = static_cast<uint8_t>(r.lien);
  key.state_code = r.state.size() == 2
                       ? static_cast<uint16_t>((static_cast<uint8_t>(r.state[0]) << 8) |
                                               static_cast<uint8_t>(r.state[1]))
                       : 0;
  return key;
}

inline std::string state_from_code(uint16_t code) {
  if (code == 0) return "";
  std::string s(2, ' ');
  s[0] = static_cast<char>(code >> 8);
  s[1] = static_cast<char>(code & 0xff);
  return s;
}

inline json key_to_json(const CoarsenedKey& k) {
  json j;
  const char* names[] = {"income_bin", "dti_bin", "ltv_bin", "age_bin"};
  for (size_t i = 0; i < k.n_binned; ++i) {
    if (k.bins[i] >= 0) j[names[i]] = k.bins[i];
    else j[names[i]] = nullptr;
  }
  j["sex"] = to_string(static_cast<Sex>(k.sex_code));
  j["state"] = state_from_code(k.state_code);
  j["loan_type"] = to_string(static_cast<LoanType>(k.loan_type_code));
  j["lien"] = to_string(static_cast<Lien>(k.lien_code));
  j["missing_pattern"] = k.missing_mask;
  return j;
}

inline void binning_from_json(const json& j, BinningSpec& spec) {
  auto load = [&](const char* name, std::vector<double>& out) {
    if (j.contains(name)) out = j.at(name).get<std::vector<double>>();
  };
  load("income", spec.income_edges);
  load("dti", spec.dti_edges);
  load("ltv", spec.ltv_edges);
  load("age", spec.age_edges);
  spec.validate();
}

inline json binning_to_json(const BinningSpec& spec) {
  json j;
  j["income"] = spec.income_edges;
  j["dti"] = spec.dti_edges;
  j["ltv"] = spec.ltv_edges;
  j["age"] = spec.age_edges;
  return j;
}

}  // namespace fairmatch
