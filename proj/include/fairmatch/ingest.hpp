#pragma once

#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "fairmatch/csv.hpp"
#include "fairmatch/record.hpp"
#include "fairmatch/schema.hpp"

namespace fairmatch {

struct RejectedRow {
  size_t row_number = 0;  // 1-based data row index, header excluded
  std::string reason;
  std::string raw;
};

struct ParseResult {
  std::vector<ApplicationRecord> records;
  std::vector<RejectedRow> rejects;
};

struct DatasetSummary {
  size_t total_count = 0;
  size_t count_black = 0;
  size_t count_white = 0;
  size_t count_other = 0;
  std::optional<double> approval_rate_overall;
  std::optional<double> approval_rate_black;
  std::optional<double> approval_rate_white;
  std::optional<double> mean_interest_rate_black;
  std::optional<double> mean_interest_rate_white;
  std::map<std::string, double> missing_rate;  // per optional numeric field
};

namespace detail {

inline std::optional<double> parse_number(const std::string& raw) {
  std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  const char* begin = t.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + t.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string rejoin(const std::vector<std::string>& fields, char delim) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(delim);
    out += fields[i];
  }
  return out;
}

}  // namespace detail

// Parses delimited text into records. Every data row lands in exactly one of
// the two outputs; value problems reject the row, only a broken header is
// fatal. Rows whose action code is outside the approved/denied mapping
// (withdrawn, incomplete, purchased) are excluded here; rows outside the two
// study races parse fine and are left for filter_population.
inline ParseResult parse_records(std::istream& in, const ColumnSchema& schema) {
  static const std::vector<std::string> kRequired = {
      "race", "sex", "income", "state", "loan_type",
      "dti",  "ltv", "lien",   "action", "interest_rate"};

  CsvReader reader(in, schema.delimiter);
  std::vector<std::string> header;
  require(reader.next(header), "parse: input has no header row");

  std::map<std::string, size_t> col_index;
  for (size_t i = 0; i < header.size(); ++i) col_index[trim(header[i])] = i;

  // logical field -> column position; optional fields may be absent.
  std::map<std::string, size_t> pos;
  for (const auto& [logical, column] : schema.columns) {
    if (column.empty()) continue;
    auto it = col_index.find(column);
    if (it != col_index.end()) pos[logical] = it->second;
  }
  for (const auto& req : kRequired)
    require(pos.count(req), "parse: header lacks mapped column '" +
                                schema.columns.at(req) + "' for field '" + req + "'");

  ParseResult result;
  std::unordered_set<std::string> seen_ids;
  std::vector<std::string> row;
  size_t row_number = 0;

  auto get = [&](const std::string& logical) -> const std::string& {
    return row[pos.at(logical)];
  };
  auto reject = [&](const std::string& reason) {
    result.rejects.push_back({row_number, reason, detail::rejoin(row, schema.delimiter)});
  };

  while (reader.next(row)) {
    ++row_number;
    if (row.size() == 1 && row[0].empty()) {
      --row_number;  // trailing blank line, not a data row
      continue;
    }
    if (row.size() != header.size()) {
      reject("malformed row: expected " + std::to_string(header.size()) +
             " fields, got " + std::to_string(row.size()));
      continue;
    }

    ApplicationRecord rec;
    std::string problem;

    // categorical fields
    auto parse_enum = [&](const std::string& logical, auto&& assign) {
      if (!problem.empty()) return;
      const std::string& raw = get(logical);
      if (!assign(raw)) {
        problem = schema.is_missing(raw) ? "missing " + logical
                                         : "out-of-domain " + logical;
      }
    };

    parse_enum("sex", [&](const std::string& raw) {
      if (schema.value_in("sex_male", raw)) rec.sex = Sex::Male;
      else if (schema.value_in("sex_female", raw)) rec.sex = Sex::Female;
      else if (schema.value_in("sex_joint", raw)) rec.sex = Sex::Joint;
      else if (schema.value_in("sex_not_available", raw)) rec.sex = Sex::NotAvailable;
      else return false;
      return true;
    });
    parse_enum("loan_type", [&](const std::string& raw) {
      if (schema.value_in("loan_type_conventional", raw)) rec.loan_type = LoanType::Conventional;
      else if (schema.value_in("loan_type_fha", raw)) rec.loan_type = LoanType::FHA;
      else if (schema.value_in("loan_type_va", raw)) rec.loan_type = LoanType::VA;
      else if (schema.value_in("loan_type_rhs_fsa", raw)) rec.loan_type = LoanType::RhsFsa;
      else return false;
      return true;
    });
    parse_enum("lien", [&](const std::string& raw) {
      if (schema.value_in("lien_first", raw)) rec.lien = Lien::FirstLien;
      else if (schema.value_in("lien_subordinate", raw)) rec.lien = Lien::SubordinateLien;
      else return false;
      return true;
    });

    if (problem.empty()) {
      const std::string& raw = get("action");
      if (schema.value_in("action_approved", raw)) rec.approved = true;
      else if (schema.value_in("action_denied", raw)) rec.approved = false;
      else if (schema.is_missing(raw)) problem = "missing action";
      else problem = "excluded action code";
    }

    if (problem.empty()) {
      // race; White means non-Hispanic White when an ethnicity column exists
      const std::string& raw = get("race");
      if (schema.is_missing(raw)) {
        problem = "missing race";
      } else if (schema.value_in("race_black", raw)) {
        rec.race = Race::Black;
      } else if (schema.value_in("race_white", raw)) {
        rec.race = Race::White;
        if (pos.count("ethnicity") &&
            !schema.value_in("ethnicity_not_hispanic", get("ethnicity"))) {
          rec.race = Race::Other;
        }
      } else {
        rec.race = Race::Other;
      }
    }

    if (problem.empty()) {
      std::string st = trim(get("state"));
      if (schema.is_missing(st)) {
        problem = "missing state";
      } else if (st.size() != 2 || !std::isalpha(static_cast<unsigned char>(st[0])) ||
                 !std::isalpha(static_cast<unsigned char>(st[1]))) {
        problem = "unparseable state";
      } else {
        rec.state = {static_cast<char>(std::toupper(st[0])),
                     static_cast<char>(std::toupper(st[1]))};
      }
    }

    // optional numerics, quantized to the 1e-4 grid
    auto parse_numeric = [&](const std::string& logical, std::optional<double>& out,
                             bool allow_band) {
      if (!problem.empty() || !pos.count(logical)) return;
      const std::string& raw = get(logical);
      if (schema.is_missing(raw)) return;
      if (allow_band) {
        if (auto mid = schema.dti_band_midpoint(raw)) {
          out = quantize4(*mid);
          return;
        }
      }
      auto v = detail::parse_number(raw);
      if (!v) problem = "unparseable " + logical;
      else if (*v < 0) problem = "out-of-range " + logical;
      else out = quantize4(*v);
    };
    parse_numeric("income", rec.income, false);
    parse_numeric("dti", rec.dti, true);
    parse_numeric("ltv", rec.ltv, false);
    parse_numeric("interest_rate", rec.interest_rate, false);
    parse_numeric("age", rec.age, false);

    auto parse_int = [&](const std::string& logical, std::optional<int>& out) {
      if (!problem.empty() || !pos.count(logical)) return;
      const std::string& raw = get(logical);
      if (schema.is_missing(raw)) return;
      auto v = detail::parse_number(raw);
      if (!v || *v != static_cast<int>(*v)) problem = "unparseable " + logical;
      else out = static_cast<int>(*v);
    };
    parse_int("year", rec.activity_year);
    parse_int("purpose", rec.loan_purpose);

    if (problem.empty()) {
      rec.id = pos.count("id") ? trim(get("id")) : "";
      if (rec.id.empty()) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "r%07zu", row_number);
        rec.id = buf;
      }
      if (!seen_ids.insert(rec.id).second) problem = "duplicate id";
    }

    if (problem.empty()) result.records.push_back(std::move(rec));
    else reject(problem);
  }
  return result;
}

// Keeps only the two study races, and when the raw file carried loan-purpose
// or year columns, only the configured home-purchase year. Idempotent; never
// mutates a surviving record.
inline std::vector<ApplicationRecord> filter_population(
    const std::vector<ApplicationRecord>& records, int year = 2019,
    int home_purchase_code = 1) {
  std::vector<ApplicationRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.race == Race::Other) continue;
    if (r.activity_year && *r.activity_year != year) continue;
    if (r.loan_purpose && *r.loan_purpose != home_purchase_code) continue;
    out.push_back(r);
  }
  return out;
}

inline DatasetSummary summarize(const std::vector<ApplicationRecord>& records) {
  DatasetSummary s;
  s.total_count = records.size();
  size_t approved = 0, approved_b = 0, approved_w = 0;
  double rate_sum_b = 0, rate_sum_w = 0;
  size_t rate_n_b = 0, rate_n_w = 0;
  size_t miss_income = 0, miss_dti = 0, miss_ltv = 0, miss_rate = 0, miss_age = 0;
  bool any_age = false;

  for (const auto& r : records) {
    if (r.race == Race::Black) ++s.count_black;
    else if (r.race == Race::White) ++s.count_white;
    else ++s.count_other;
    if (r.approved) {
      ++approved;
      if (r.race == Race::Black) ++approved_b;
      if (r.race == Race::White) ++approved_w;
    }
    if (r.interest_rate) {
      if (r.race == Race::Black) { rate_sum_b += *r.interest_rate; ++rate_n_b; }
      if (r.race == Race::White) { rate_sum_w += *r.interest_rate; ++rate_n_w; }
    }
    miss_income += !r.income;
    miss_dti += !r.dti;
    miss_ltv += !r.ltv;
    miss_rate += !r.interest_rate;
    if (r.age) any_age = true;
    miss_age += !r.age;
  }

  auto rate = [](size_t num, size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  s.approval_rate_overall = rate(approved, s.total_count);
  s.approval_rate_black = rate(approved_b, s.count_black);
  s.approval_rate_white = rate(approved_w, s.count_white);
  if (rate_n_b) s.mean_interest_rate_black = rate_sum_b / rate_n_b;
  if (rate_n_w) s.mean_interest_rate_white = rate_sum_w / rate_n_w;
  if (s.total_count) {
    double n = static_cast<double>(s.total_count);
    s.missing_rate["income"] = miss_income / n;
    s.missing_rate["dti"] = miss_dti / n;
    s.missing_rate["ltv"] = miss_ltv / n;
    s.missing_rate["interest_rate"] = miss_rate / n;
    if (any_age) s.missing_rate["age"] = miss_age / n;
  }
  return s;
}

// Canonical CSV writer; output parses back with the default ColumnSchema.
// Optional columns (age, year, purpose) appear only when some record carries
// a value, so absent-everywhere fields round-trip as absent.
inline void write_records(std::ostream& os, const std::vector<ApplicationRecord>& records,
                          const std::string& provenance = "") {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  bool any_age = false, any_year = false, any_purpose = false;
  for (const auto& r : records) {
    any_age |= r.age.has_value();
    any_year |= r.activity_year.has_value();
    any_purpose |= r.loan_purpose.has_value();
  }
  std::vector<std::string> header = {
      "id", "derived_race", "derived_sex", "income", "state_code",
      "loan_type", "debt_to_income_ratio", "loan_to_value_ratio",
      "lien_status", "action_taken", "interest_rate"};
  if (any_age) header.push_back("age");
  if (any_year) header.push_back("activity_year");
  if (any_purpose) header.push_back("loan_purpose");
  write_csv_row(os, header);

  std::vector<std::string> row;
  for (const auto& r : records) {
    row = {r.id,
           to_string(r.race),
           to_string(r.sex),
           format_opt4(r.income),
           r.state,
           to_string(r.loan_type),
           format_opt4(r.dti),
           format_opt4(r.ltv),
           to_string(r.lien),
           r.approved ? "1" : "3",
           format_opt4(r.interest_rate)};
    if (any_age) row.push_back(format_opt4(r.age));
    if (any_year) row.push_back(r.activity_year ? std::to_string(*r.activity_year) : "");
    if (any_purpose) row.push_back(r.loan_purpose ? std::to_string(*r.loan_purpose) : "");
    write_csv_row(os, row);
  }
}

inline void write_rejects_csv(std::ostream& os, const std::vector<RejectedRow>& rejects,
                              const std::string& provenance = "") {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  write_csv_row(os, {"row_number", "reason", "raw"});
  for (const auto& r : rejects)
    write_csv_row(os, {std::to_string(r.row_number), r.reason, r.raw});
}

inline json rejects_to_json(const std::vector<RejectedRow>& rejects) {
  json arr = json::array();
  for (const auto& r : rejects)
    arr.push_back({{"row_number", r.row_number}, {"reason", r.reason}, {"raw", r.raw}});
  return arr;
}

inline json summary_to_json(const DatasetSummary& s) {
  json j;
  j["total_count"] = s.total_count;
  j["count_by_race"] = {{"Black", s.count_black},
                        {"White", s.count_white},
                        {"Other", s.count_other}};
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
    else j[key] = nullptr;
  };
  put("approval_rate_overall", s.approval_rate_overall);
  put("approval_rate_black", s.approval_rate_black);
  put("approval_rate_white", s.approval_rate_white);
  put("mean_interest_rate_black", s.mean_interest_rate_black);
  put("mean_interest_rate_white", s.mean_interest_rate_white);
  j["missing_rate"] = s.missing_rate;
  return j;
}

inline void write_summary_csv(std::ostream& os, const DatasetSummary& s,
                              const std::string& provenance = "") {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  write_csv_row(os, {"metric", "value"});
  auto fmt = [](const std::optional<double>& v) {
    return v ? format_decimal4(*v) : std::string("NA");
  };
  write_csv_row(os, {"total_count", std::to_string(s.total_count)});
  write_csv_row(os, {"count_black", std::to_string(s.count_black)});
  write_csv_row(os, {"count_white", std::to_string(s.count_white)});
  write_csv_row(os, {"count_other", std::to_string(s.count_other)});
  write_csv_row(os, {"approval_rate_overall", fmt(s.approval_rate_overall)});
  write_csv_row(os, {"approval_rate_black", fmt(s.approval_rate_black)});
  write_csv_row(os, {"approval_rate_white", fmt(s.approval_rate_white)});
  write_csv_row(os, {"mean_interest_rate_black", fmt(s.mean_interest_rate_black)});
  write_csv_row(os, {"mean_interest_rate_white", fmt(s.mean_interest_rate_white)});
  for (const auto& [field, rate] : s.missing_rate)
    write_csv_row(os, {"missing_rate_" + field, format_decimal4(rate)});
}

}  // namespace fairmatch
