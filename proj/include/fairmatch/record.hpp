#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "fairmatch/error.hpp"

namespace fairmatch {

// Race::Other exists only between parsing and the population filter; every
// operation downstream of filter_population sees Black/White records only.
enum class Race : uint8_t { Black, White, Other };
enum class Sex : uint8_t { Male, Female, Joint, NotAvailable };
enum class LoanType : uint8_t { Conventional, FHA, VA, RhsFsa };
enum class Lien : uint8_t { FirstLien, SubordinateLien };

inline const char* to_string(Race r) {
  switch (r) {
    case Race::Black: return "Black";
    case Race::White: return "White";
    default: return "Other";
  }
}
inline const char* to_string(Sex s) {
  switch (s) {
    case Sex::Male: return "Male";
    case Sex::Female: return "Female";
    case Sex::Joint: return "Joint";
    default: return "NotAvailable";
  }
}
inline const char* to_string(LoanType t) {
  switch (t) {
    case LoanType::Conventional: return "Conventional";
    case LoanType::FHA: return "FHA";
    case LoanType::VA: return "VA";
    default: return "RHS_FSA";
  }
}
inline const char* to_string(Lien l) {
  return l == Lien::FirstLien ? "FirstLien" : "SubordinateLien";
}

// The two prediction tasks; also the label a randomization pass may swap.
enum class TargetLabel : uint8_t { Approval, InterestRate };

inline const char* to_string(TargetLabel l) {
  return l == TargetLabel::Approval ? "approval" : "interest_rate";
}

// One loan application. Numeric fields are optional; a field is missing iff
// the optional is empty, there is no separate flag to keep in sync.
struct ApplicationRecord {
  std::string id;
  Race race = Race::Other;
  Sex sex = Sex::NotAvailable;
  std::optional<double> income;  // thousands of USD / year
  std::string state;             // two-letter code
  LoanType loan_type = LoanType::Conventional;
  std::optional<double> dti;  // percent
  std::optional<double> ltv;  // percent
  Lien lien = Lien::FirstLien;
  bool approved = false;
  std::optional<double> interest_rate;  // percent; absent for most denied rows

  // Optional extra matching variable, wired through schema + binning config.
  std::optional<double> age;

  // Raw-file provenance used only by the population filter.
  std::optional<int> activity_year;
  std::optional<int> loan_purpose;

  bool operator==(const ApplicationRecord&) const = default;
};

// Monetary/percent fields are kept on a 1e-4 grid: interest rates are quoted
// in increments >= 0.001, and the fixed grid makes serialize/parse a clean
// round trip.
inline double quantize4(double v) { return std::round(v * 10000.0) / 10000.0; }

inline std::string format_decimal4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

inline std::string format_opt4(const std::optional<double>& v) {
  return v ? format_decimal4(*v) : std::string();
}

}  // namespace fairmatch
