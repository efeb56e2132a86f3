#include <doctest.h>

#include <set>

#include "helpers/test_support.hpp"
#include "rgt/corpus.hpp"
#include "rgt/errors.hpp"
#include "rgt/rng.hpp"

using namespace rgt;
using rgt_test::TempDir;

// ---------------------------------------------------------------- names ----

TEST_CASE("canonical patch names parse into their four fields") {
    const PatchIdentity a = parse_patch_name("patch1-Lang-24-ACS.patch");
    CHECK(a.patch_no == 1);
    CHECK(a.project_id == "Lang");
    CHECK(a.bug_id == "24");
    CHECK(a.tool_id == "ACS");

    const PatchIdentity b = parse_patch_name("patch2-Lang-43-CapGen.patch");
    CHECK(b.patch_no == 2);
    CHECK(b.tool_id == "CapGen");
}

TEST_CASE("malformed names are rejected") {
    CHECK_THROWS_AS(parse_patch_name("fix.patch"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name("patch1-Lang-24.patch"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name("patch1-Lang-24-ACS-extra.patch"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name("patch0-Lang-24-ACS.patch"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name("patchx-Lang-24-ACS.patch"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name("patch1--24-ACS.patch"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name("patch1-Lang--ACS.patch"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name("patch1-Lang-24-ACS.txt"), MalformedNameError);
    CHECK_THROWS_AS(parse_patch_name(".patch"), MalformedNameError);
}

TEST_CASE("render/parse round-trips any valid identity") {
    static const char* tokens[] = {"Lang", "Math", "x1", "CapGen", "T", "Fix9"};
    SplitMix64 rng(4242);
    for (int i = 0; i < 200; ++i) {
        PatchIdentity id;
        id.patch_no = static_cast<std::int64_t>(rng.next_below(99999)) + 1;
        id.project_id = tokens[rng.next_below(6)];
        id.bug_id = tokens[rng.next_below(6)];
        id.tool_id = tokens[rng.next_below(6)];
        CHECK(parse_patch_name(render_patch_name(id)) == id);
    }
}

// ----------------------------------------------------------------- diff ----

namespace {

const char* kOneLineAdd =
    "--- a/note.txt\n"
    "+++ b/note.txt\n"
    "@@ -1,1 +1,2 @@\n"
    " hello\n"
    "+world\n";

}  // namespace

TEST_CASE("a one-hunk diff adding one line") {
    const PatchDocument doc = parse_unified_diff(kOneLineAdd);
    REQUIRE(doc.hunks.size() == 1);
    const Hunk& h = doc.hunks[0];
    CHECK(h.target_file() == "note.txt");
    int added = 0, removed = 0, context = 0;
    for (const auto& l : h.lines) {
        if (l.op == DiffLine::Op::Added) ++added;
        if (l.op == DiffLine::Op::Removed) ++removed;
        if (l.op == DiffLine::Op::Context) ++context;
    }
    CHECK(added == 1);
    CHECK(removed == 0);
    CHECK(context == 1);
    CHECK(doc.raw_text == kOneLineAdd);
}

TEST_CASE("declared counts must match the body") {
    const char* claims_three =
        "--- a/note.txt\n"
        "+++ b/note.txt\n"
        "@@ -1,2 +1,3 @@\n"
        " hello\n"
        "+world\n";
    CHECK_THROWS_AS(parse_unified_diff(claims_three), DiffSyntaxError);

    const char* body_overflows =
        "--- a/note.txt\n"
        "+++ b/note.txt\n"
        "@@ -1,1 +1,2 @@\n"
        " hello\n"
        "+world\n"
        "+again\n";
    CHECK_THROWS_AS(parse_unified_diff(body_overflows), DiffSyntaxError);
}

TEST_CASE("a two-line insertion parses as one hunk with two added lines") {
    const char* text =
        "--- a/TimeSeries.java\n"
        "+++ b/TimeSeries.java\n"
        "@@ -1056,2 +1056,4 @@\n"
        "       TimeSeries copy = (TimeSeries)super.clone();\n"
        "+      copy.minY = Double.NaN;\n"
        "+      copy.maxY = Double.NaN;\n"
        "       copy.data = new java.util.ArrayList();\n";
    const PatchDocument doc = parse_unified_diff(text);
    REQUIRE(doc.hunks.size() == 1);
    int added = 0;
    for (const auto& l : doc.hunks[0].lines)
        if (l.op == DiffLine::Op::Added) ++added;
    CHECK(added == 2);
}

TEST_CASE("empty and hunk-free inputs raise EmptyDiff") {
    CHECK_THROWS_AS(parse_unified_diff(""), EmptyDiffError);
    CHECK_THROWS_AS(parse_unified_diff("diff --git a/x b/x\nindex 123..456\n"), EmptyDiffError);
}

TEST_CASE("non-UTF-8 bytes pass through unharmed") {
    const std::string text =
        "--- a/note.txt\n"
        "+++ b/note.txt\n"
        "@@ -1,1 +1,1 @@\n"
        "-caf\xE9\n"
        "+cafe\n";
    const PatchDocument doc = parse_unified_diff(text);
    REQUIRE(doc.hunks.size() == 1);
    CHECK(doc.hunks[0].lines[0].text == "caf\xE9");
    CHECK(doc.raw_text == text);
}

TEST_CASE("paths may not escape the tree") {
    const char* escape =
        "--- a/../outside.txt\n"
        "+++ b/../outside.txt\n"
        "@@ -1,1 +1,1 @@\n"
        "-x\n"
        "+y\n";
    CHECK_THROWS_AS(parse_unified_diff(escape), DiffSyntaxError);
    const char* absolute =
        "--- /etc/passwd\n"
        "+++ /etc/passwd\n"
        "@@ -1,1 +1,1 @@\n"
        "-x\n"
        "+y\n";
    CHECK_THROWS_AS(parse_unified_diff(absolute), DiffSyntaxError);
}

TEST_CASE("multi-file documents keep hunk order") {
    const char* text =
        "--- a/mode.txt\n"
        "+++ b/mode.txt\n"
        "@@ -1,1 +1,1 @@\n"
        "-ident\n"
        "+abs\n"
        "--- a/note.txt\n"
        "+++ b/note.txt\n"
        "@@ -1,1 +1,2 @@\n"
        " hello\n"
        "+world\n";
    const PatchDocument doc = parse_unified_diff(text);
    REQUIRE(doc.hunks.size() == 2);
    CHECK(doc.hunks[0].target_file() == "mode.txt");
    CHECK(doc.hunks[1].target_file() == "note.txt");
}

TEST_CASE("parsing is deterministic") {
    const PatchDocument a = parse_unified_diff(kOneLineAdd);
    const PatchDocument b = parse_unified_diff(kOneLineAdd);
    CHECK(a.raw_text == b.raw_text);
    REQUIRE(a.hunks.size() == b.hunks.size());
    for (std::size_t i = 0; i < a.hunks.size(); ++i) {
        CHECK(a.hunks[i].old_start == b.hunks[i].old_start);
        CHECK(a.hunks[i].lines.size() == b.hunks[i].lines.size());
    }
}

// ---------------------------------------------------------------- apply ----

namespace {

TempDir make_base_tree() {
    TempDir dir("base-tree");
    write_file(dir.path() / "mode.txt", "ident\n");
    write_file(dir.path() / "note.txt", "hello\n");
    write_file(dir.path() / "sub/deep.txt", "one\ntwo\nthree\n");
    return dir;
}

}  // namespace

TEST_CASE("apply produces a new tree and leaves the base untouched") {
    TempDir base_dir = make_base_tree();
    TempDir out("apply-out");
    const SourceTree base = load_tree(base_dir.path());
    const PatchDocument doc = parse_unified_diff(
        "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-ident\n+abs\n");

    const SourceTree patched = apply_patch(doc, base, out.path() / "t1");
    CHECK(patched.content_digest != base.content_digest);
    CHECK(read_file(patched.root / "mode.txt") == "abs\n");
    CHECK(read_file(base.root / "mode.txt") == "ident\n");
    CHECK(digest_tree(base.root) == base.content_digest);
}

TEST_CASE("a context line off by one character is NotApplicable") {
    TempDir base_dir = make_base_tree();
    TempDir out("apply-miss");
    const SourceTree base = load_tree(base_dir.path());
    const PatchDocument doc = parse_unified_diff(
        "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-idenT\n+abs\n");
    CHECK_THROWS_AS(apply_patch(doc, base, out.path() / "t"), NotApplicableError);
}

TEST_CASE("a missing file is NotApplicable") {
    TempDir base_dir = make_base_tree();
    TempDir out("apply-missing");
    const SourceTree base = load_tree(base_dir.path());
    const PatchDocument doc = parse_unified_diff(
        "--- a/ghost.txt\n+++ b/ghost.txt\n@@ -1,1 +1,1 @@\n-x\n+y\n");
    CHECK_THROWS_AS(apply_patch(doc, base, out.path() / "t"), NotApplicableError);
}

TEST_CASE("apply then revert restores the content digest") {
    const char* patches[] = {
        // plain replacement
        "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-ident\n+abs\n",
        // two hunks in one file
        "--- a/sub/deep.txt\n+++ b/sub/deep.txt\n"
        "@@ -1,1 +1,1 @@\n-one\n+ONE\n"
        "@@ -3,1 +3,2 @@\n three\n+four\n",
        // file creation
        "--- /dev/null\n+++ b/created.txt\n@@ -0,0 +1,2 @@\n+alpha\n+beta\n",
        // file deletion
        "--- a/note.txt\n+++ /dev/null\n@@ -1,1 +0,0 @@\n-hello\n",
        // multi-file
        "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-ident\n+abs\n"
        "--- a/note.txt\n+++ b/note.txt\n@@ -1,1 +1,2 @@\n hello\n+world\n",
    };
    for (const char* text : patches) {
        TempDir base_dir = make_base_tree();
        TempDir out("roundtrip");
        const SourceTree base = load_tree(base_dir.path());
        const PatchDocument doc = parse_unified_diff(text);
        SourceTree patched = apply_patch(doc, base, out.path() / "t");
        CHECK(patched.content_digest != base.content_digest);
        const SourceTree reverted = revert_patch(doc, patched);
        CHECK(reverted.content_digest == base.content_digest);
    }
}

TEST_CASE("applying the same document twice fails") {
    TempDir base_dir = make_base_tree();
    TempDir out("twice");
    const SourceTree base = load_tree(base_dir.path());
    const PatchDocument doc = parse_unified_diff(
        "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-ident\n+abs\n");
    const SourceTree patched = apply_patch(doc, base, out.path() / "first");
    CHECK_THROWS_AS(apply_patch(doc, patched, out.path() / "second"), NotApplicableError);
}

TEST_CASE("later hunks see earlier insertions at shifted positions") {
    TempDir base_dir = make_base_tree();
    TempDir out("offsets");
    const SourceTree base = load_tree(base_dir.path());
    const PatchDocument doc = parse_unified_diff(
        "--- a/sub/deep.txt\n+++ b/sub/deep.txt\n"
        "@@ -1,1 +1,2 @@\n one\n+inserted\n"
        "@@ -3,1 +4,1 @@\n-three\n+THREE\n");
    const SourceTree patched = apply_patch(doc, base, out.path() / "t");
    CHECK(read_file(patched.root / "sub/deep.txt") == "one\ninserted\ntwo\nTHREE\n");
}

TEST_CASE("files without trailing newline round-trip through the marker") {
    TempDir base_dir("no-newline");
    write_file(base_dir.path() / "raw.txt", "alpha\nomega");
    TempDir out("no-newline-out");
    const SourceTree base = load_tree(base_dir.path());
    const PatchDocument doc = parse_unified_diff(
        "--- a/raw.txt\n+++ b/raw.txt\n@@ -2,1 +2,1 @@\n-omega\n\\ No newline at end of file\n"
        "+OMEGA\n\\ No newline at end of file\n");
    const SourceTree patched = apply_patch(doc, base, out.path() / "t");
    CHECK(read_file(patched.root / "raw.txt") == "alpha\nOMEGA");
    const SourceTree reverted = revert_patch(doc, patched);
    CHECK(reverted.content_digest == base.content_digest);
}

// ----------------------------------------------------------- plausible ----

namespace {

Json abs_schema() {
    return Json::parse(R"({"parameters":[{"name":"x","domain":{"kind":"int","min":-10,"max":10}}]})");
}

Json abs_dev_tests() {
    return Json::parse(R"({"tests":[
        {"name":"neg","input":-3,"expected":{"status":"value","value":3}},
        {"name":"pos","input":5,"expected":{"status":"value","value":5}},
        {"name":"zero","input":0,"expected":{"status":"value","value":0}}
    ]})");
}

/// A bug whose program behavior is selected by mode.txt inside the tree, so
/// patches can change behavior without a compiler.
void write_bug(const fs::path& corpus, const std::string& bug_id, const std::string& gt_mode,
               const std::string& buggy_mode, const std::optional<std::string>& build_command =
                   std::nullopt) {
    const fs::path dir = corpus / bug_id;
    write_file(dir / "ground_truth" / "mode.txt", gt_mode + "\n");
    write_file(dir / "buggy" / "mode.txt", buggy_mode + "\n");
    if (build_command) {
        write_file(dir / "ground_truth" / "flag.txt", "ok\n");
        write_file(dir / "buggy" / "flag.txt", "ok\n");
    }
    Json prog;
    if (build_command) prog["build_command"] = *build_command;
    prog["run_command"] = rgt_test::toy_adapter() + " $(cat mode.txt)";
    prog["schema"] = abs_schema();
    write_file(dir / "program.json", prog.dump(2) + "\n");
    write_file(dir / "dev_tests.json", abs_dev_tests().dump(2) + "\n");
}

void write_patch(const fs::path& corpus, const std::string& bug_id, const std::string& name,
                 const std::string& text) {
    write_file(corpus / bug_id / "patches" / name, text);
}

const char* kFixPatch =
    "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-ident\n+abs\n";

LoadOptions test_load_options(const fs::path& work) {
    LoadOptions opts;
    opts.work_dir = work;
    opts.per_test_timeout = Millis{5000};
    opts.workers = 2;
    return opts;
}

}  // namespace

TEST_CASE("the ground truth passes its own developer tests") {
    TempDir corpus("plaus-corpus");
    TempDir work("plaus-work");
    write_bug(corpus.path(), "B1", "abs", "ident");

    const ProgramSpec spec = load_program_spec(corpus.path() / "B1" / "program.json");
    const auto tests = load_dev_tests(corpus.path() / "B1" / "dev_tests.json");
    const ProgramDescriptor gt = descriptor_for(spec, corpus.path() / "B1" / "ground_truth");
    std::string note;
    CHECK(check_plausible(gt, tests, Millis{5000}, &note));
    CHECK(note.empty());
}

TEST_CASE("a patch that keeps the buggy behavior is not plausible") {
    TempDir corpus("plaus-bad");
    write_bug(corpus.path(), "B1", "abs", "ident");
    const ProgramSpec spec = load_program_spec(corpus.path() / "B1" / "program.json");
    const auto tests = load_dev_tests(corpus.path() / "B1" / "dev_tests.json");
    const ProgramDescriptor buggy = descriptor_for(spec, corpus.path() / "B1" / "buggy");
    std::string note;
    CHECK(!check_plausible(buggy, tests, Millis{5000}, &note));
    CHECK(note.find("neg") != std::string::npos);
}

TEST_CASE("load_corpus keeps valid patches and reports the malformed one") {
    TempDir corpus("load-basic");
    TempDir work("load-basic-work");
    write_bug(corpus.path(), "B1", "abs", "ident");
    write_patch(corpus.path(), "B1", "patch1-Demo-B1-FixA.patch", kFixPatch);
    write_patch(corpus.path(), "B1", "patch1-Demo-B1-FixB.patch", kFixPatch);
    write_patch(corpus.path(), "B1", "patch2-Demo-B1-FixA.patch", kFixPatch);
    write_patch(corpus.path(), "B1", "oops.patch", kFixPatch);
    write_file(corpus.path() / "B1" / "labels.csv",
               "patch_file,claimed_label\npatch1-Demo-B1-FixA.patch,correct\n");

    const CorpusManifest manifest = load_corpus(corpus.path(), test_load_options(work.path()));
    CHECK(manifest.patches.size() == 3);
    REQUIRE(manifest.excluded.size() == 1);
    CHECK(manifest.excluded[0].file_name == "oops.patch");
    CHECK(manifest.excluded[0].reason == "malformed_name");

    CHECK(manifest.patches[0].claimed_label == std::optional<std::string>("correct"));
    CHECK(!manifest.patches[1].claimed_label.has_value());
    for (const auto& p : manifest.patches) CHECK(!p.exec_dir.empty());
}

TEST_CASE("gates exclude unapplicable, unbuildable, and implausible patches") {
    TempDir corpus("load-gates");
    TempDir work("load-gates-work");
    write_bug(corpus.path(), "B1", "abs", "ident", "grep -qx ok flag.txt");

    write_patch(corpus.path(), "B1", "patch1-Demo-B1-Good.patch", kFixPatch);
    write_patch(corpus.path(), "B1", "patch1-Demo-B1-NoCtx.patch",
                "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-wrongctx\n+abs\n");
    write_patch(corpus.path(), "B1", "patch1-Demo-B1-NoBuild.patch",
                "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-ident\n+abs\n"
                "--- a/flag.txt\n+++ b/flag.txt\n@@ -1,1 +1,1 @@\n-ok\n+broken\n");
    write_patch(corpus.path(), "B1", "patch1-Demo-B1-Lazy.patch",
                "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 +1,1 @@\n-ident\n+abs_raise0\n");
    write_patch(corpus.path(), "B1", "patch1-Demo-B1-Bad.patch",
                "--- a/mode.txt\n+++ b/mode.txt\n@@ -1,1 @@\nbroken hunk\n");

    const CorpusManifest manifest = load_corpus(corpus.path(), test_load_options(work.path()));
    REQUIRE(manifest.patches.size() == 1);
    CHECK(render_patch_name(manifest.patches[0].identity) == "patch1-Demo-B1-Good.patch");

    std::map<std::string, std::string> reasons;
    for (const auto& e : manifest.excluded) reasons[e.file_name] = e.reason;
    CHECK(reasons.at("patch1-Demo-B1-NoCtx.patch") == "not_applicable");
    CHECK(reasons.at("patch1-Demo-B1-NoBuild.patch") == "build_failure");
    CHECK(reasons.at("patch1-Demo-B1-Lazy.patch") == "not_plausible");
    CHECK(reasons.at("patch1-Demo-B1-Bad.patch") == "diff_syntax");
}

TEST_CASE("an empty corpus is an empty manifest, not an error") {
    TempDir corpus("load-empty");
    TempDir work("load-empty-work");
    const CorpusManifest manifest = load_corpus(corpus.path(), test_load_options(work.path()));
    CHECK(manifest.bugs.empty());
    CHECK(manifest.patches.empty());
    CHECK(manifest.excluded.empty());
}

TEST_CASE("a bug directory without ground truth is a manifest error") {
    TempDir corpus("load-nogt");
    TempDir work("load-nogt-work");
    write_file(corpus.path() / "B9" / "patches" / "patch1-Demo-B9-X.patch", kFixPatch);
    CHECK_THROWS_AS(load_corpus(corpus.path(), test_load_options(work.path())), ManifestError);
}

TEST_CASE("a patch filed under the wrong bug is excluded") {
    TempDir corpus("load-mismatch");
    TempDir work("load-mismatch-work");
    write_bug(corpus.path(), "B1", "abs", "ident");
    write_patch(corpus.path(), "B1", "patch1-Demo-OTHER-Fix.patch", kFixPatch);
    const CorpusManifest manifest = load_corpus(corpus.path(), test_load_options(work.path()));
    CHECK(manifest.patches.empty());
    REQUIRE(manifest.excluded.size() == 1);
    CHECK(manifest.excluded[0].reason == "bug_mismatch");
}

TEST_CASE("bug filter restricts the load and rejects unknown ids") {
    TempDir corpus("load-filter");
    TempDir work("load-filter-work");
    write_bug(corpus.path(), "B1", "abs", "ident");
    write_bug(corpus.path(), "B2", "abs", "ident");

    LoadOptions opts = test_load_options(work.path());
    opts.bug_filter = {"B2"};
    const CorpusManifest manifest = load_corpus(corpus.path(), opts);
    CHECK(manifest.bugs.size() == 1);
    CHECK(manifest.bugs.count("B2") == 1);

    opts.bug_filter = {"nope"};
    CHECK_THROWS_AS(load_corpus(corpus.path(), opts), ManifestError);
}

TEST_CASE("gate_patches=false parses patches without building them") {
    TempDir corpus("load-nogate");
    TempDir work("load-nogate-work");
    write_bug(corpus.path(), "B1", "abs", "ident");
    write_patch(corpus.path(), "B1", "patch1-Demo-B1-Fix.patch", kFixPatch);

    LoadOptions opts = test_load_options(work.path());
    opts.gate_patches = false;
    const CorpusManifest manifest = load_corpus(corpus.path(), opts);
    REQUIRE(manifest.patches.size() == 1);
    CHECK(manifest.patches[0].exec_dir.empty());
}
