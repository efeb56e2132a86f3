#pragma once

#include <json.hpp>

namespace rgt {

// Insertion-ordered JSON everywhere: serialized artifacts (suites, reports)
// must have a stable key order so identical campaigns produce identical bytes.
using Json = nlohmann::ordered_json;

}  // namespace rgt
