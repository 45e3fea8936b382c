#pragma once

#include <stdexcept>
#include <string>

namespace fairmatch {

// Single exception type for contract and input violations. The CLI layer
// turns these into a machine-readable error record and a nonzero exit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

}  // namespace fairmatch
