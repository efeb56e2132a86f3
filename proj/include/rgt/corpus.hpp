#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgt/diff.hpp"
#include "rgt/json.hpp"
#include "rgt/runner.hpp"
#include "rgt/schema.hpp"
#include "rgt/util.hpp"

namespace rgt {

/// Identity carried by the canonical patch filename
/// `patch<No>-<ProjectID>-<BugID>-<ToolID>.patch`.
struct PatchIdentity {
    std::int64_t patch_no = 0;
    std::string project_id;
    std::string bug_id;
    std::string tool_id;

    friend auto operator<=>(const PatchIdentity& a, const PatchIdentity& b) {
        if (auto c = a.project_id <=> b.project_id; c != 0) return c;
        if (auto c = a.bug_id <=> b.bug_id; c != 0) return c;
        if (auto c = a.tool_id <=> b.tool_id; c != 0) return c;
        return a.patch_no <=> b.patch_no;
    }
    friend bool operator==(const PatchIdentity&, const PatchIdentity&) = default;
};

/// Throws MalformedNameError on anything that does not follow the 4-segment
/// convention exactly.
PatchIdentity parse_patch_name(const std::string& filename);
std::string render_patch_name(const PatchIdentity& identity);

/// A directory of source files plus the digest of their contents as of the
/// moment the tree was created (builds may later drop artifacts into the
/// directory; the digest deliberately reflects the sources only).
struct SourceTree {
    fs::path root;
    std::string content_digest;
};

SourceTree load_tree(const fs::path& root);

/// Copies `base` to `dest` and applies the patch there. The base tree is
/// never touched; applying the same document twice fails with
/// NotApplicableError.
SourceTree apply_patch(const PatchDocument& doc, const SourceTree& base, const fs::path& dest);

/// Reverts a previously applied document in place.
SourceTree revert_patch(const PatchDocument& doc, const SourceTree& patched);

struct DevTest {
    std::string name;
    Json input;
    Outcome expected;  // Value or Exception; site compared only when given
};

std::vector<DevTest> load_dev_tests(const fs::path& file);

/// True iff every developer test passes against the (already built)
/// program. The first failure, if any, is described in failure_note.
bool check_plausible(const ProgramDescriptor& prog, const std::vector<DevTest>& tests,
                     Millis per_test_timeout, std::string* failure_note = nullptr);

/// Per-bug program description, from `program.json` in the bug directory.
struct ProgramSpec {
    std::optional<std::string> build_command;
    std::string run_command;
    std::map<std::string, std::string> env;
    InputSchema schema;
};

ProgramSpec load_program_spec(const fs::path& file);
ProgramDescriptor descriptor_for(const ProgramSpec& spec, const fs::path& tree_root);

struct PatchRecord {
    PatchIdentity identity;
    std::string file_name;
    PatchDocument doc;
    SourceTree tree;      // patched copy of the buggy tree
    fs::path exec_dir;    // where the built artifact lives (may alias another tree)
    std::optional<std::string> claimed_label;  // "correct" / "overfitting"
};

struct ExcludedPatch {
    std::string bug_id;
    std::string file_name;
    std::string reason;  // malformed_name, diff_syntax, empty_diff, bug_mismatch,
                         // duplicate_identity, not_applicable, build_failure, not_plausible
    std::string detail;
};

struct BugEntry {
    std::string bug_id;
    fs::path dir;
    ProgramSpec spec;
    SourceTree ground_truth;            // working copy
    std::optional<SourceTree> buggy;    // read-only corpus tree
    std::vector<DevTest> dev_tests;
};

struct CorpusManifest {
    fs::path corpus_root;
    std::string corpus_digest;
    std::map<std::string, BugEntry> bugs;
    std::vector<PatchRecord> patches;    // applicable + plausible only
    std::vector<ExcludedPatch> excluded;
};

struct LoadOptions {
    fs::path work_dir;
    /// When false, patches are parsed but not applied, built, or
    /// plausibility-checked (enough for test generation and sanity).
    bool gate_patches = true;
    Millis build_timeout{120000};
    Millis per_test_timeout{300000};
    std::vector<std::string> bug_filter;  // empty = all bugs
    unsigned workers = 1;
    BuildCache* cache = nullptr;
};

/// Loads `root` laid out as:
///   <root>/<bug_id>/ground_truth/     source tree
///   <root>/<bug_id>/buggy/            source tree patches apply to
///   <root>/<bug_id>/patches/*.patch   candidate patches
///   <root>/<bug_id>/program.json      build/run commands + input schema
///   <root>/<bug_id>/dev_tests.json    developer tests (plausibility gate)
///   <root>/<bug_id>/labels.csv        optional: patch_file,claimed_label
/// Patches that fail any gate are excluded with a reason, never silently.
CorpusManifest load_corpus(const fs::path& root, const LoadOptions& options);

}  // namespace rgt
