#include "rgt/corpus.hpp"

#include <algorithm>
#include <set>

#include "rgt/errors.hpp"
#include "rgt/parallel.hpp"
#include "rgt/rng.hpp"

namespace rgt {

namespace {

constexpr const char* kPatchSuffix = ".patch";
constexpr const char* kPatchPrefix = "patch";

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return c >= '0' && c <= '9';
    });
}

bool clean_token(const std::string& s) {
    if (s.empty()) return false;
    return s.find('/') == std::string::npos && s.find('\\') == std::string::npos;
}

}  // namespace

PatchIdentity parse_patch_name(const std::string& filename) {
    const std::string suffix = kPatchSuffix;
    if (filename.size() <= suffix.size() ||
        filename.compare(filename.size() - suffix.size(), suffix.size(), suffix) != 0)
        throw MalformedNameError("patch filename must end in .patch: " + filename);

    const std::string stem = filename.substr(0, filename.size() - suffix.size());
    const auto segments = split(stem, '-');
    if (segments.size() != 4)
        throw MalformedNameError("expected 4 dash-separated segments: " + filename);

    const std::string& head = segments[0];
    if (!starts_with(head, kPatchPrefix))
        throw MalformedNameError("first segment must be patch<No>: " + filename);
    const std::string digits = head.substr(std::string(kPatchPrefix).size());
    if (!all_digits(digits) || digits.size() > 18)
        throw MalformedNameError("bad patch number in " + filename);

    PatchIdentity id;
    id.patch_no = std::stoll(digits);
    if (id.patch_no <= 0) throw MalformedNameError("patch number must be positive: " + filename);
    id.project_id = segments[1];
    id.bug_id = segments[2];
    id.tool_id = segments[3];
    if (!clean_token(id.project_id) || !clean_token(id.bug_id) || !clean_token(id.tool_id))
        throw MalformedNameError("empty or unclean token in " + filename);
    return id;
}

std::string render_patch_name(const PatchIdentity& identity) {
    return std::string(kPatchPrefix) + std::to_string(identity.patch_no) + "-" +
           identity.project_id + "-" + identity.bug_id + "-" + identity.tool_id + kPatchSuffix;
}

SourceTree load_tree(const fs::path& root) {
    SourceTree tree;
    tree.root = root;
    tree.content_digest = digest_tree(root);
    return tree;
}

SourceTree apply_patch(const PatchDocument& doc, const SourceTree& base, const fs::path& dest) {
    if (fs::exists(dest)) fs::remove_all(dest);
    copy_tree(base.root, dest);
    apply_in_place(doc, dest);
    return load_tree(dest);
}

SourceTree revert_patch(const PatchDocument& doc, const SourceTree& patched) {
    apply_in_place(invert(doc), patched.root);
    return load_tree(patched.root);
}

std::vector<DevTest> load_dev_tests(const fs::path& file) {
    const Json spec = Json::parse(read_file(file));
    std::vector<DevTest> tests;
    for (const auto& t : spec.at("tests")) {
        DevTest test;
        test.name = t.at("name").get<std::string>();
        test.input = t.at("input");
        const Json& expected = t.at("expected");
        const std::string status = expected.at("status").get<std::string>();
        if (status == "value") {
            test.expected = Outcome::make_value(expected.at("value"));
        } else if (status == "exception") {
            std::optional<std::string> site;
            if (expected.contains("site")) site = expected.at("site").get<std::string>();
            test.expected = Outcome::make_exception(expected.at("type").get<std::string>(), site);
        } else {
            throw ConfigError("dev test '" + test.name + "' has unknown status " + status);
        }
        tests.push_back(std::move(test));
    }
    return tests;
}

namespace {

bool dev_test_matches(const Outcome& expected, const Outcome& actual) {
    if (expected.kind != actual.kind) return false;
    if (expected.kind == Outcome::Kind::Value)
        return values_equal(expected.value, actual.value, 0.0);
    if (expected.exception_type != actual.exception_type) return false;
    if (expected.exception_site && expected.exception_site != actual.exception_site) return false;
    return true;
}

std::string describe_outcome(const Outcome& o) {
    switch (o.kind) {
        case Outcome::Kind::Value: return "value " + o.value.dump();
        case Outcome::Kind::Exception:
            return "exception " + o.exception_type +
                   (o.exception_site ? " at " + *o.exception_site : "");
        case Outcome::Kind::Timeout: return "timeout";
        case Outcome::Kind::Error: return "error: " + o.diagnostic;
    }
    return "?";
}

}  // namespace

bool check_plausible(const ProgramDescriptor& prog, const std::vector<DevTest>& tests,
                     Millis per_test_timeout, std::string* failure_note) {
    for (const auto& test : tests) {
        RunOptions opts;
        opts.timeout = per_test_timeout;
        opts.exec_seed = mix64(fnv1a64("plausible") ^ fnv1a64(test.name));
        const Outcome actual = run_once(prog, test.input, opts);
        if (!dev_test_matches(test.expected, actual)) {
            if (failure_note)
                *failure_note = "developer test '" + test.name + "' expected " +
                                describe_outcome(test.expected) + ", got " +
                                describe_outcome(actual);
            return false;
        }
    }
    return true;
}

ProgramSpec load_program_spec(const fs::path& file) {
    const Json spec = Json::parse(read_file(file));
    ProgramSpec prog;
    if (spec.contains("build_command"))
        prog.build_command = spec.at("build_command").get<std::string>();
    prog.run_command = spec.at("run_command").get<std::string>();
    if (spec.contains("env"))
        prog.env = spec.at("env").get<std::map<std::string, std::string>>();
    prog.schema = schema_from_json(spec.at("schema"));
    return prog;
}

ProgramDescriptor descriptor_for(const ProgramSpec& spec, const fs::path& tree_root) {
    ProgramDescriptor d;
    d.build_command = spec.build_command;
    d.run_command = spec.run_command;
    d.working_dir = tree_root;
    d.env = spec.env;
    return d;
}

namespace {

std::map<std::string, std::string> load_labels(const fs::path& file) {
    std::map<std::string, std::string> labels;
    if (!fs::exists(file)) return labels;
    const FileLines lines = split_lines(read_file(file));
    for (std::size_t i = 0; i < lines.lines.size(); ++i) {
        std::string line = lines.lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (i == 0 && starts_with(line, "patch_file")) continue;  // header row
        const auto cells = split(line, ',');
        if (cells.size() != 2)
            throw ManifestError("bad labels.csv row: " + line);
        labels[cells[0]] = cells[1];
    }
    return labels;
}

struct GateResult {
    bool included = false;
    PatchRecord record;
    ExcludedPatch exclusion;
};

}  // namespace

CorpusManifest load_corpus(const fs::path& root, const LoadOptions& options) {
    if (!fs::is_directory(root)) throw ManifestError("corpus root missing: " + root.string());

    CorpusManifest manifest;
    manifest.corpus_root = root;
    manifest.corpus_digest = digest_tree(root);

    std::vector<std::string> bug_ids;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) bug_ids.push_back(entry.path().filename().string());
    std::sort(bug_ids.begin(), bug_ids.end());

    if (!options.bug_filter.empty()) {
        const std::set<std::string> keep(options.bug_filter.begin(), options.bug_filter.end());
        for (const auto& wanted : keep)
            if (std::find(bug_ids.begin(), bug_ids.end(), wanted) == bug_ids.end())
                throw ManifestError("bug filter names unknown bug: " + wanted);
        std::erase_if(bug_ids, [&](const std::string& b) { return !keep.count(b); });
    }

    BuildCache local_cache;
    BuildCache* cache = options.cache ? options.cache : &local_cache;

    struct PendingPatch {
        std::string bug_id;
        fs::path file;
    };
    std::vector<PendingPatch> pending;

    for (const auto& bug_id : bug_ids) {
        const fs::path dir = root / bug_id;
        BugEntry bug;
        bug.bug_id = bug_id;
        bug.dir = dir;

        if (!fs::is_directory(dir / "ground_truth"))
            throw ManifestError("bug " + bug_id + " has no ground_truth tree");
        if (!fs::exists(dir / "program.json"))
            throw ManifestError("bug " + bug_id + " has no program.json");
        bug.spec = load_program_spec(dir / "program.json");

        const fs::path gt_work = options.work_dir / ("gt-" + bug_id);
        if (fs::exists(gt_work)) fs::remove_all(gt_work);
        copy_tree(dir / "ground_truth", gt_work);
        bug.ground_truth = load_tree(gt_work);

        if (fs::is_directory(dir / "buggy")) bug.buggy = load_tree(dir / "buggy");
        if (fs::exists(dir / "dev_tests.json"))
            bug.dev_tests = load_dev_tests(dir / "dev_tests.json");

        std::vector<fs::path> patch_files;
        if (fs::is_directory(dir / "patches"))
            for (const auto& entry : fs::directory_iterator(dir / "patches"))
                if (entry.is_regular_file()) patch_files.push_back(entry.path());
        std::sort(patch_files.begin(), patch_files.end());

        if (!patch_files.empty()) {
            if (!bug.buggy)
                throw ManifestError("bug " + bug_id + " has patches but no buggy tree");
            if (options.gate_patches && bug.dev_tests.empty())
                throw ManifestError("bug " + bug_id + " has patches but no dev_tests.json");
        }
        for (const auto& f : patch_files) pending.push_back({bug_id, f});

        manifest.bugs.emplace(bug_id, std::move(bug));
    }

    // Names and identities are checked sequentially so duplicate detection
    // is order-stable; the expensive gates (apply, build, dev tests) run in
    // parallel below.
    struct Parsed {
        std::string bug_id;
        fs::path file;
        PatchIdentity identity;
        std::optional<std::string> claimed_label;
    };
    std::vector<Parsed> gated;
    std::set<std::string> seen_names;
    std::map<std::string, std::map<std::string, std::string>> labels_by_bug;
    for (const auto& [bug_id, bug] : manifest.bugs)
        labels_by_bug[bug_id] = load_labels(bug.dir / "labels.csv");

    for (const auto& p : pending) {
        const std::string name = p.file.filename().string();
        PatchIdentity identity;
        try {
            identity = parse_patch_name(name);
        } catch (const MalformedNameError& e) {
            manifest.excluded.push_back({p.bug_id, name, "malformed_name", e.what()});
            continue;
        }
        if (identity.bug_id != p.bug_id) {
            manifest.excluded.push_back(
                {p.bug_id, name, "bug_mismatch",
                 "filename names bug " + identity.bug_id + " but lives under " + p.bug_id});
            continue;
        }
        const std::string rendered = render_patch_name(identity);
        if (!seen_names.insert(rendered).second) {
            manifest.excluded.push_back({p.bug_id, name, "duplicate_identity", rendered});
            continue;
        }
        Parsed parsed{p.bug_id, p.file, identity, std::nullopt};
        const auto& labels = labels_by_bug[p.bug_id];
        if (auto it = labels.find(name); it != labels.end()) parsed.claimed_label = it->second;
        gated.push_back(std::move(parsed));
    }

    std::vector<GateResult> results(gated.size());
    parallel_for(gated.size(), options.workers, [&](std::size_t i) {
        const Parsed& p = gated[i];
        GateResult& out = results[i];
        const std::string name = p.file.filename().string();
        const BugEntry& bug = manifest.bugs.at(p.bug_id);

        PatchRecord record;
        record.identity = p.identity;
        record.file_name = name;
        record.claimed_label = p.claimed_label;
        try {
            record.doc = parse_unified_diff(read_file(p.file));
        } catch (const EmptyDiffError& e) {
            out.exclusion = {p.bug_id, name, "empty_diff", e.what()};
            return;
        } catch (const DiffSyntaxError& e) {
            out.exclusion = {p.bug_id, name, "diff_syntax", e.what()};
            return;
        }

        if (options.gate_patches) {
            const fs::path dest = options.work_dir / ("patch-" + name);
            try {
                record.tree = apply_patch(record.doc, *bug.buggy, dest);
            } catch (const NotApplicableError& e) {
                out.exclusion = {p.bug_id, name, "not_applicable", e.what()};
                return;
            }
            const ProgramDescriptor prog = descriptor_for(bug.spec, record.tree.root);
            const BuildResult built =
                cache->build(prog, record.tree.content_digest, options.build_timeout);
            if (!built.ok) {
                out.exclusion = {p.bug_id, name, "build_failure", built.log.substr(0, 500)};
                return;
            }
            record.exec_dir = built.built_dir;
            std::string note;
            const ProgramDescriptor exec = descriptor_for(bug.spec, built.built_dir);
            if (!check_plausible(exec, bug.dev_tests, options.per_test_timeout, &note)) {
                out.exclusion = {p.bug_id, name, "not_plausible", note};
                return;
            }
        }
        out.included = true;
        out.record = std::move(record);
    });

    for (auto& r : results) {
        if (r.included)
            manifest.patches.push_back(std::move(r.record));
        else
            manifest.excluded.push_back(std::move(r.exclusion));
    }
    std::sort(manifest.patches.begin(), manifest.patches.end(),
              [](const PatchRecord& a, const PatchRecord& b) { return a.identity < b.identity; });
    return manifest;
}

}  // namespace rgt
