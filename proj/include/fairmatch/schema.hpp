#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairmatch/error.hpp"
#include "fairmatch/json.hpp"
#include "fairmatch/record.hpp"

namespace fairmatch {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Column mapping + value vocabularies for the delimited input. Defaults cover
// both the canonical schema written by the synthetic generator and the public
// HMDA LAR column names / codes; a config file can override any part.
struct ColumnSchema {
  char delimiter = ',';

  // logical field -> column name. id/ethnicity/age/year/purpose are optional.
  std::map<std::string, std::string> columns = {
      {"id", "id"},
      {"race", "derived_race"},
      {"ethnicity", "derived_ethnicity"},
      {"sex", "derived_sex"},
      {"income", "income"},
      {"state", "state_code"},
      {"loan_type", "loan_type"},
      {"dti", "debt_to_income_ratio"},
      {"ltv", "loan_to_value_ratio"},
      {"lien", "lien_status"},
      {"action", "action_taken"},
      {"interest_rate", "interest_rate"},
      {"age", "age"},
      {"year", "activity_year"},
      {"purpose", "loan_purpose"},
  };

  std::vector<std::string> missing_tokens = {"", "NA", "N/A", "Exempt", "NaN", "nan"};

  // Value vocabularies, matched case-insensitively after trimming.
  std::map<std::string, std::vector<std::string>> values = {
      {"race_black", {"Black or African American", "Black", "3"}},
      {"race_white", {"White", "5"}},
      {"ethnicity_hispanic", {"Hispanic or Latino", "1", "11", "12", "13", "14"}},
      {"ethnicity_not_hispanic", {"Not Hispanic or Latino", "2"}},
      {"sex_male", {"Male", "1"}},
      {"sex_female", {"Female", "2"}},
      {"sex_joint", {"Joint", "6"}},
      {"sex_not_available", {"Sex Not Available", "NotAvailable", "3", "4"}},
      {"loan_type_conventional", {"Conventional", "1"}},
      {"loan_type_fha", {"FHA", "2"}},
      {"loan_type_va", {"VA", "3"}},
      {"loan_type_rhs_fsa", {"RHS_FSA", "RHS or FSA", "4"}},
      {"lien_first", {"FirstLien", "Secured by a first lien", "1"}},
      {"lien_subordinate", {"SubordinateLien", "Secured by a subordinate lien", "2"}},
      // approved = originated / approved-not-accepted, denied = denied;
      // every other action code is excluded at ingest.
      {"action_approved", {"1", "2"}},
      {"action_denied", {"3"}},
  };

  // HMDA reports DTI as bands in part of its range; bands map to midpoints.
  // The open-ended bands get the midpoint of a 20-wide closing bracket.
  std::map<std::string, double> dti_bands = {
      {"<20%", 10.0},   {"20%-<30%", 25.0}, {"30%-<36%", 33.0},
      {"36%-<40%", 38.0}, {"40%-<46%", 43.0}, {"46%-<50%", 48.0},
      {"50%-60%", 55.0}, {">60%", 70.0},
  };

  // Population filter predicates applied when the raw file carries the
  // corresponding columns.
  int filter_year = 2019;
  int home_purchase_code = 1;

  bool is_missing(const std::string& raw) const {
    std::string t = lower(trim(raw));
    for (const auto& tok : missing_tokens)
      if (t == lower(tok)) return true;
    return false;
  }

  bool value_in(const std::string& key, const std::string& raw) const {
    auto it = values.find(key);
    if (it == values.end()) return false;
    std::string t = lower(trim(raw));
    for (const auto& v : it->second)
      if (t == lower(v)) return true;
    return false;
  }

  std::optional<double> dti_band_midpoint(const std::string& raw) const {
    std::string t = trim(raw);
    auto it = dti_bands.find(t);
    if (it != dti_bands.end()) return it->second;
    return std::nullopt;
  }

  bool has_column(const std::string& logical) const {
    auto it = columns.find(logical);
    return it != columns.end() && !it->second.empty();
  }
};

inline void from_json_into(const json& j, ColumnSchema& s) {
  if (j.contains("delimiter")) {
    std::string d = j.at("delimiter").get<std::string>();
    require(d.size() == 1, "schema: delimiter must be a single character");
    s.delimiter = d[0];
  }
  if (j.contains("columns"))
    for (auto& [k, v] : j.at("columns").items()) s.columns[k] = v.get<std::string>();
  if (j.contains("missing_tokens"))
    s.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
  if (j.contains("values"))
    for (auto& [k, v] : j.at("values").items())
      s.values[k] = v.get<std::vector<std::string>>();
  if (j.contains("dti_bands"))
    for (auto& [k, v] : j.at("dti_bands").items()) s.dti_bands[k] = v.get<double>();
  if (j.contains("filter_year")) s.filter_year = j.at("filter_year").get<int>();
  if (j.contains("home_purchase_code"))
    s.home_purchase_code = j.at("home_purchase_code").get<int>();
}

inline json to_json(const ColumnSchema& s) {
  json j;
  j["delimiter"] = std::string(1, s.delimiter);
  j["columns"] = s.columns;
  j["missing_tokens"] = s.missing_tokens;
  j["values"] = s.values;
  j["dti_bands"] = s.dti_bands;
  j["filter_year"] = s.filter_year;
  j["home_purchase_code"] = s.home_purchase_code;
  return j;
}

}  // namespace fairmatch
