#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rgt/runner.hpp"
#include "rgt/testgen.hpp"
#include "rgt/util.hpp"

namespace rgt {

struct FlakyFinding {
    std::string test_id;
    int round = 0;  // 1-based round in which the test first failed
    std::string diagnostic;
};

struct FlakyReport {
    std::string bug_id;
    int generator_run = 1;
    std::vector<FlakyFinding> flaky;
    int rounds_executed = 0;  // equals the configured rounds unless the suite emptied
    Millis wall_time{0};
};

struct SanityOptions {
    int rounds = 3;
    Millis per_test_timeout{300000};
    unsigned workers = 1;
};

/// Exec seed exported to the ground-truth adapter when re-running `test_id`
/// in sanity round `round`.
std::uint64_t sanity_seed(const std::string& test_id, int round);

/// Runs the suite against the ground truth `rounds` consecutive times,
/// removing every test that fails for any reason (wrong value, unexpected
/// exception, timeout, error) at the end of each round. Returns the stable
/// subset (same tests, same order, nothing rewritten) and the findings.
std::pair<TestSuite, FlakyReport> sanity_check_suite(const ProgramDescriptor& ground_truth_built,
                                                     const TestSuite& suite,
                                                     const SanityOptions& options);

std::pair<std::vector<TestSuite>, std::vector<FlakyReport>> sanity_check(
    const ProgramDescriptor& ground_truth_built, const std::vector<TestSuite>& suites,
    const SanityOptions& options);

Json flaky_report_to_json(const std::vector<FlakyReport>& reports, const std::string& bug_id);
std::vector<FlakyReport> flaky_report_from_json(const Json& j);

}  // namespace rgt
