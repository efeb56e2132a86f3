#pragma once

#include <set>
#include <string>
#include <vector>

#include "rgt/classify.hpp"
#include "rgt/runner.hpp"
#include "rgt/schema.hpp"
#include "rgt/util.hpp"

namespace rgt {

struct FixturePatchSpec {
    std::string file;                         // canonical patch filename
    std::string intended_verdict;             // "correct" or "overfitting"
    std::set<DiffCategory> intended_categories;
};

struct FixtureSpec {
    std::string bug_id;
    bool finite_domain = false;
    bool deterministic = false;
    std::vector<FixturePatchSpec> patches;
};

std::vector<FixtureSpec> load_fixture_manifest(const fs::path& file);

struct BruteForceVerdict {
    bool overfitting = false;
    std::set<DiffCategory> categories;
    std::vector<Json> differing_inputs;  // canonical enumeration order
};

/// Independent oracle: enumerates the whole finite input domain on both
/// built programs and classifies every differing input. Capped at 10^6
/// enumerations (DomainTooLargeError beyond).
BruteForceVerdict brute_force_verdict(const ProgramDescriptor& ground_truth_built,
                                      const ProgramDescriptor& patch_built,
                                      const InputSchema& schema, Millis per_test_timeout,
                                      std::uint64_t cap = 1000000);

}  // namespace rgt
