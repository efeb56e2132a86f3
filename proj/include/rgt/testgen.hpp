#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgt/json.hpp"
#include "rgt/outcome.hpp"
#include "rgt/runner.hpp"
#include "rgt/schema.hpp"
#include "rgt/util.hpp"

namespace rgt {

inline constexpr const char* kToolVersion = "0.1.0";

/// One generated regression test: an input plus the oracle observed by
/// actually running the ground-truth program on it.
struct RgtTest {
    std::string test_id;  // "<bug>-s<seed>-d<index>", stable across reruns
    Json input;
    Outcome oracle;       // Value or Exception only
    std::uint64_t seed = 0;
    int generator_run = 1;
};

struct TestSuite {
    std::string bug_id;
    std::uint64_t seed = 0;
    int generator_run = 1;
    Millis budget{0};
    Millis per_test_timeout{0};
    double boundary_bias = 0.1;
    InputSchema schema;
    std::vector<RgtTest> tests;
    std::uint64_t dropped_capture_failures = 0;  // Timeout/Error oracles, discarded
    int sanity_rounds = 0;  // 0 until the suite survives a sanity check
    Millis generation_wall{0};
};

struct GenOptions {
    Millis budget{100000};            // per-run generation budget
    Millis per_test_timeout{300000};  // oracle-capture deadline per input
    double boundary_bias = 0.1;
    /// Optional deterministic cap on suite size (0 = none). Not a pipeline
    /// default; used where tests need budget-independent truncation.
    std::uint64_t max_tests = 0;
};

/// Exec seed exported to the ground-truth adapter while capturing the
/// oracle of draw `index`.
std::uint64_t capture_seed(const std::string& bug_id, std::uint64_t seed, std::uint64_t index);

/// Draws inputs with the seeded PRNG (deduplicating at draw time) and runs
/// the built ground-truth program on each to capture its oracle. Stops at
/// the earliest of: domain exhausted, max_tests reached, budget elapsed, or
/// 4096 consecutive duplicate draws. Timeout/Error oracles are dropped and
/// counted. The draw stream is a pure function of (schema, seed), so a
/// longer budget only ever extends the suite.
TestSuite generate_suite(const ProgramDescriptor& ground_truth_built, const InputSchema& schema,
                         const std::string& bug_id, std::uint64_t seed, int generator_run,
                         const GenOptions& options);

/// Runs generate_suite n_runs times; run i (1-based) uses seed
/// base_seed + i.
std::vector<TestSuite> generate_campaign(const ProgramDescriptor& ground_truth_built,
                                         const InputSchema& schema, const std::string& bug_id,
                                         int n_runs, std::uint64_t base_seed,
                                         const GenOptions& options);

/// Line-delimited suite file: a header record, then one record per test.
/// Contains no wall-clock data; identical campaigns produce identical bytes.
std::string suite_to_jsonl(const TestSuite& suite);
TestSuite suite_from_jsonl(const std::string& content);
void write_suite(const TestSuite& suite, const fs::path& file);
TestSuite read_suite(const fs::path& file);

}  // namespace rgt
