#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rgt/classify.hpp"
#include "rgt/corpus.hpp"
#include "rgt/testgen.hpp"
#include "rgt/timing.hpp"
#include "rgt/util.hpp"

namespace rgt {

struct FailingTest {
    std::string test_id;
    DiffCategory category;
    std::string diagnostic;
    Json input;
    int generator_run = 1;
};

struct AssessmentVerdict {
    PatchIdentity patch;
    bool overfitting = false;
    std::set<DiffCategory> categories;      // over failing tests only
    std::vector<FailingTest> failing_tests;
    std::vector<FailingTest> suppressed;    // differences in disabled categories
    std::map<int, bool> per_run_detection;  // generator run -> that run alone flags the patch
    bool build_failed = false;
    std::optional<std::string> claimed_label;
    Millis exec_wall{0};

    const char* label() const { return overfitting ? "overfitting" : "correct"; }
};

struct AssessOptions {
    Millis per_test_timeout{300000};
    ActiveCategories active;
    double epsilon = 0.0;
    unsigned workers = 1;
};

std::uint64_t assess_seed(const std::string& test_id, const std::string& patch_name);

/// Outcome and classification of one suite test against one patch.
struct ExecutedTest {
    const RgtTest* test = nullptr;
    Outcome actual;
    std::optional<DiffCategory> category;
};

struct ExecutedSuite {
    const TestSuite* suite = nullptr;
    std::vector<ExecutedTest> results;
    Millis wall{0};
};

/// Runs every test of the suite (stored order) against the built program.
ExecutedSuite run_suite_against(const ProgramDescriptor& prog_built, const TestSuite& suite,
                                const std::string& patch_name, const AssessOptions& options);

/// Pure verdict assembly from per-suite execution results (suites in seed
/// order). Differences in disabled categories land in `suppressed` and
/// never make the patch overfitting.
AssessmentVerdict assemble_verdict(const PatchIdentity& patch,
                                   const std::optional<std::string>& claimed_label,
                                   const std::vector<ExecutedSuite>& executed,
                                   const AssessOptions& options);

/// Full execution, no short-circuit: per-run detection data needs every
/// suite to run even after the first failure.
AssessmentVerdict assess_patch(const ProgramDescriptor& patch_built, const PatchIdentity& patch,
                               const std::optional<std::string>& claimed_label,
                               const std::vector<TestSuite>& stable_suites,
                               const AssessOptions& options);

struct UnassessedPatch {
    PatchIdentity patch;
    std::string reason;
};

struct CampaignReport {
    std::string corpus_digest;
    Json config_snapshot;
    std::map<std::string, std::map<int, std::string>> suite_digests;  // bug -> run -> sha256
    std::vector<AssessmentVerdict> verdicts;  // sorted by PatchIdentity
    std::vector<UnassessedPatch> unassessed;
    std::vector<ExcludedPatch> excluded;
    TimeBreakdown timing;
};

struct CorpusAssessOptions {
    AssessOptions per_patch;
    BuildCache* cache = nullptr;
    Millis build_timeout{120000};
    /// Generation and sanity wall time measured upstream, carried into the
    /// report's breakdown.
    Millis tcgen{0};
    Millis sc{0};
};

/// Assesses every manifest patch that has stable suites for its bug.
/// Patches of bugs without suites are reported as unassessed, never
/// silently correct. Patch x suite execution runs in parallel; results are
/// merged in (patch, suite) order so worker count never changes a verdict.
CampaignReport assess_corpus(const CorpusManifest& manifest,
                             const std::map<std::string, std::vector<TestSuite>>& stable_suites,
                             const CorpusAssessOptions& options);

Json report_to_json(const CampaignReport& report);
CampaignReport report_from_json(const Json& j);

/// Flat CSV: patch,label,categories,failing_count,exec_ms
std::string report_to_csv(const CampaignReport& report);

/// Deterministic views for byte comparison: timing data stripped.
Json canonical_report_json(const Json& report_json);
std::string canonical_report_csv(const std::string& csv);

}  // namespace rgt
