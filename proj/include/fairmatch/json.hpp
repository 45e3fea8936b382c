#pragma once

#include <nlohmann/json.hpp>

namespace fairmatch {

// Ordered so serialized configs and reports keep a stable field order,
// which the byte-identical-rerun contract relies on.
using json = nlohmann::ordered_json;

}  // namespace fairmatch
