#include "rgt/assess.hpp"

#include <algorithm>

#include "rgt/errors.hpp"
#include "rgt/parallel.hpp"
#include "rgt/rng.hpp"

namespace rgt {

std::uint64_t assess_seed(const std::string& test_id, const std::string& patch_name) {
    return mix64(fnv1a64(test_id) ^ fnv1a64("assess") ^ fnv1a64(patch_name));
}

ExecutedSuite run_suite_against(const ProgramDescriptor& prog_built, const TestSuite& suite,
                                const std::string& patch_name, const AssessOptions& options) {
    ExecutedSuite executed;
    executed.suite = &suite;
    executed.results.resize(suite.tests.size());
    const auto start = Clock::now();
    for (std::size_t i = 0; i < suite.tests.size(); ++i) {
        const RgtTest& test = suite.tests[i];
        RunOptions run_opts;
        run_opts.timeout = options.per_test_timeout;
        run_opts.exec_seed = assess_seed(test.test_id, patch_name);
        ExecutedTest& r = executed.results[i];
        r.test = &test;
        r.actual = run_once(prog_built, test.input, run_opts);
        r.category = classify_pair(test.oracle, r.actual, options.epsilon);
    }
    executed.wall = since(start);
    return executed;
}

AssessmentVerdict assemble_verdict(const PatchIdentity& patch,
                                   const std::optional<std::string>& claimed_label,
                                   const std::vector<ExecutedSuite>& executed,
                                   const AssessOptions& options) {
    AssessmentVerdict verdict;
    verdict.patch = patch;
    verdict.claimed_label = claimed_label;

    for (const ExecutedSuite& suite : executed) {
        const int run = suite.suite->generator_run;
        verdict.per_run_detection.emplace(run, false);
        verdict.exec_wall += suite.wall;
        for (const ExecutedTest& r : suite.results) {
            if (!r.category) continue;
            FailingTest failing;
            failing.test_id = r.test->test_id;
            failing.category = *r.category;
            failing.diagnostic =
                format_diagnostic(r.test->oracle, r.actual, *r.category, options.per_test_timeout);
            failing.input = r.test->input;
            failing.generator_run = run;
            if (options.active.enabled(*r.category)) {
                verdict.categories.insert(*r.category);
                verdict.per_run_detection[run] = true;
                verdict.failing_tests.push_back(std::move(failing));
            } else {
                verdict.suppressed.push_back(std::move(failing));
            }
        }
    }
    verdict.overfitting = !verdict.failing_tests.empty();
    return verdict;
}

AssessmentVerdict assess_patch(const ProgramDescriptor& patch_built, const PatchIdentity& patch,
                               const std::optional<std::string>& claimed_label,
                               const std::vector<TestSuite>& stable_suites,
                               const AssessOptions& options) {
    std::vector<const TestSuite*> ordered;
    for (const auto& s : stable_suites) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const TestSuite* a, const TestSuite* b) {
        return a->generator_run < b->generator_run;
    });

    const std::string patch_name = render_patch_name(patch);
    std::vector<ExecutedSuite> executed(ordered.size());
    parallel_for(ordered.size(), options.workers, [&](std::size_t i) {
        executed[i] = run_suite_against(patch_built, *ordered[i], patch_name, options);
    });
    return assemble_verdict(patch, claimed_label, executed, options);
}

namespace {

AssessmentVerdict build_failure_verdict(const PatchRecord& record, const std::string& log,
                                        const std::vector<TestSuite>& suites) {
    AssessmentVerdict verdict;
    verdict.patch = record.identity;
    verdict.claimed_label = record.claimed_label;
    verdict.overfitting = true;
    verdict.build_failed = true;
    verdict.categories.insert(DiffCategory::Error);
    FailingTest failing;
    failing.test_id = "build";
    failing.category = DiffCategory::Error;
    failing.diagnostic = "Unexpected error: build failed: " + log.substr(0, 300);
    failing.generator_run = 0;
    verdict.failing_tests.push_back(std::move(failing));
    for (const auto& s : suites) verdict.per_run_detection.emplace(s.generator_run, true);
    return verdict;
}

}  // namespace

CampaignReport assess_corpus(const CorpusManifest& manifest,
                             const std::map<std::string, std::vector<TestSuite>>& stable_suites,
                             const CorpusAssessOptions& options) {
    CampaignReport report;
    report.corpus_digest = manifest.corpus_digest;
    report.excluded = manifest.excluded;
    report.timing.tcgen = options.tcgen;
    report.timing.sc = options.sc;

    for (const auto& [bug_id, suites] : stable_suites)
        for (const auto& s : suites)
            report.suite_digests[bug_id][s.generator_run] = sha256_hex(suite_to_jsonl(s));

    BuildCache local_cache;
    BuildCache* cache = options.cache ? options.cache : &local_cache;

    struct PatchPlan {
        const PatchRecord* record = nullptr;
        const std::vector<TestSuite>* suites = nullptr;
        ProgramDescriptor exec;
        bool build_ok = true;
        std::string build_log;
    };
    std::vector<PatchPlan> plans;

    for (const auto& record : manifest.patches) {
        const auto suites_it = stable_suites.find(record.identity.bug_id);
        if (suites_it == stable_suites.end() || suites_it->second.empty()) {
            report.unassessed.push_back({record.identity, "missing_suites"});
            continue;
        }
        PatchPlan plan;
        plan.record = &record;
        plan.suites = &suites_it->second;
        const BugEntry& bug = manifest.bugs.at(record.identity.bug_id);
        fs::path exec_dir = record.exec_dir;
        if (exec_dir.empty()) {
            // Not pre-built during corpus gating; build now. A failure here
            // means the environment drifted since the corpus was gated.
            const ProgramDescriptor prog = descriptor_for(bug.spec, record.tree.root);
            const BuildResult built =
                cache->build(prog, record.tree.content_digest, options.build_timeout);
            if (!built.ok) {
                plan.build_ok = false;
                plan.build_log = built.log;
            }
            exec_dir = built.built_dir;
        }
        plan.exec = descriptor_for(bug.spec, exec_dir);
        plans.push_back(std::move(plan));
    }

    // Flat (patch, suite) task grid; results land in per-plan slots so the
    // merge order is fixed regardless of scheduling.
    struct Task {
        std::size_t plan = 0;
        std::size_t suite = 0;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<ExecutedSuite>> executed(plans.size());
    for (std::size_t p = 0; p < plans.size(); ++p) {
        if (!plans[p].build_ok) continue;
        executed[p].resize(plans[p].suites->size());
        for (std::size_t s = 0; s < plans[p].suites->size(); ++s) tasks.push_back({p, s});
    }
    parallel_for(tasks.size(), options.per_patch.workers, [&](std::size_t i) {
        const Task& t = tasks[i];
        const PatchPlan& plan = plans[t.plan];
        executed[t.plan][t.suite] =
            run_suite_against(plan.exec, (*plan.suites)[t.suite],
                              render_patch_name(plan.record->identity), options.per_patch);
    });

    for (std::size_t p = 0; p < plans.size(); ++p) {
        const PatchPlan& plan = plans[p];
        AssessmentVerdict verdict =
            plan.build_ok
                ? assemble_verdict(plan.record->identity, plan.record->claimed_label, executed[p],
                                   options.per_patch)
                : build_failure_verdict(*plan.record, plan.build_log, *plan.suites);
        (verdict.overfitting ? report.timing.exec_overfitting : report.timing.exec_correct) +=
            verdict.exec_wall;
        report.verdicts.push_back(std::move(verdict));
    }

    std::sort(report.verdicts.begin(), report.verdicts.end(),
              [](const AssessmentVerdict& a, const AssessmentVerdict& b) {
                  return a.patch < b.patch;
              });
    return report;
}

namespace {

Json failing_to_json(const FailingTest& f) {
    Json j;
    j["test_id"] = f.test_id;
    j["category"] = category_tag(f.category);
    j["diagnostic"] = f.diagnostic;
    j["input"] = f.input;
    j["generator_run"] = f.generator_run;
    return j;
}

FailingTest failing_from_json(const Json& j) {
    FailingTest f;
    f.test_id = j.at("test_id").get<std::string>();
    f.category = category_from_tag(j.at("category").get<std::string>()).value();
    f.diagnostic = j.at("diagnostic").get<std::string>();
    f.input = j.at("input");
    f.generator_run = j.at("generator_run").get<int>();
    return f;
}

Json identity_to_json(const PatchIdentity& id) {
    Json j;
    j["patch_no"] = id.patch_no;
    j["project_id"] = id.project_id;
    j["bug_id"] = id.bug_id;
    j["tool_id"] = id.tool_id;
    return j;
}

PatchIdentity identity_from_json(const Json& j) {
    PatchIdentity id;
    id.patch_no = j.at("patch_no").get<std::int64_t>();
    id.project_id = j.at("project_id").get<std::string>();
    id.bug_id = j.at("bug_id").get<std::string>();
    id.tool_id = j.at("tool_id").get<std::string>();
    return id;
}

}  // namespace

Json report_to_json(const CampaignReport& report) {
    Json j;
    j["format"] = "rgt-campaign";
    j["tool_version"] = kToolVersion;
    j["corpus_digest"] = report.corpus_digest;
    j["config"] = report.config_snapshot;

    Json digests = Json::object();
    for (const auto& [bug, runs] : report.suite_digests) {
        Json per_run = Json::object();
        for (const auto& [run, digest] : runs) per_run[std::to_string(run)] = digest;
        digests[bug] = std::move(per_run);
    }
    j["suite_digests"] = std::move(digests);

    Json verdicts = Json::array();
    for (const auto& v : report.verdicts) {
        Json rec;
        rec["patch"] = identity_to_json(v.patch);
        rec["patch_name"] = render_patch_name(v.patch);
        rec["label"] = v.label();
        Json cats = Json::array();
        for (DiffCategory c : all_categories())
            if (v.categories.count(c)) cats.push_back(category_tag(c));
        rec["categories"] = std::move(cats);
        Json failing = Json::array();
        for (const auto& f : v.failing_tests) failing.push_back(failing_to_json(f));
        rec["failing_tests"] = std::move(failing);
        Json suppressed = Json::array();
        for (const auto& f : v.suppressed) suppressed.push_back(failing_to_json(f));
        rec["suppressed"] = std::move(suppressed);
        Json per_run = Json::object();
        for (const auto& [run, hit] : v.per_run_detection) per_run[std::to_string(run)] = hit;
        rec["per_run_detection"] = std::move(per_run);
        rec["build_failed"] = v.build_failed;
        if (v.claimed_label) rec["claimed_label"] = *v.claimed_label;
        rec["exec_ms"] = v.exec_wall.count();
        verdicts.push_back(std::move(rec));
    }
    j["verdicts"] = std::move(verdicts);

    Json unassessed = Json::array();
    for (const auto& u : report.unassessed) {
        Json rec;
        rec["patch"] = identity_to_json(u.patch);
        rec["patch_name"] = render_patch_name(u.patch);
        rec["reason"] = u.reason;
        unassessed.push_back(std::move(rec));
    }
    j["unassessed"] = std::move(unassessed);

    Json excluded = Json::array();
    for (const auto& e : report.excluded) {
        Json rec;
        rec["bug_id"] = e.bug_id;
        rec["file"] = e.file_name;
        rec["reason"] = e.reason;
        rec["detail"] = e.detail;
        excluded.push_back(std::move(rec));
    }
    j["excluded"] = std::move(excluded);

    Json timing;
    timing["tcgen_ms"] = report.timing.tcgen.count();
    timing["sc_ms"] = report.timing.sc.count();
    timing["exec_correct_ms"] = report.timing.exec_correct.count();
    timing["exec_overfitting_ms"] = report.timing.exec_overfitting.count();
    j["timing"] = std::move(timing);
    return j;
}

CampaignReport report_from_json(const Json& j) {
    if (j.value("format", std::string{}) != "rgt-campaign")
        throw Error("not a campaign report");
    CampaignReport report;
    report.corpus_digest = j.at("corpus_digest").get<std::string>();
    report.config_snapshot = j.at("config");

    for (const auto& [bug, runs] : j.at("suite_digests").items())
        for (const auto& [run, digest] : runs.items())
            report.suite_digests[bug][std::stoi(run)] = digest.get<std::string>();

    for (const auto& rec : j.at("verdicts")) {
        AssessmentVerdict v;
        v.patch = identity_from_json(rec.at("patch"));
        v.overfitting = rec.at("label").get<std::string>() == "overfitting";
        for (const auto& tag : rec.at("categories"))
            v.categories.insert(category_from_tag(tag.get<std::string>()).value());
        for (const auto& f : rec.at("failing_tests")) v.failing_tests.push_back(failing_from_json(f));
        for (const auto& f : rec.at("suppressed")) v.suppressed.push_back(failing_from_json(f));
        for (const auto& [run, hit] : rec.at("per_run_detection").items())
            v.per_run_detection[std::stoi(run)] = hit.get<bool>();
        v.build_failed = rec.at("build_failed").get<bool>();
        if (rec.contains("claimed_label"))
            v.claimed_label = rec.at("claimed_label").get<std::string>();
        v.exec_wall = Millis{rec.at("exec_ms").get<std::int64_t>()};
        report.verdicts.push_back(std::move(v));
    }

    for (const auto& rec : j.at("unassessed"))
        report.unassessed.push_back(
            {identity_from_json(rec.at("patch")), rec.at("reason").get<std::string>()});
    for (const auto& rec : j.at("excluded"))
        report.excluded.push_back({rec.at("bug_id").get<std::string>(),
                                   rec.at("file").get<std::string>(),
                                   rec.at("reason").get<std::string>(),
                                   rec.at("detail").get<std::string>()});

    const Json& timing = j.at("timing");
    report.timing.tcgen = Millis{timing.at("tcgen_ms").get<std::int64_t>()};
    report.timing.sc = Millis{timing.at("sc_ms").get<std::int64_t>()};
    report.timing.exec_correct = Millis{timing.at("exec_correct_ms").get<std::int64_t>()};
    report.timing.exec_overfitting = Millis{timing.at("exec_overfitting_ms").get<std::int64_t>()};
    return report;
}

std::string report_to_csv(const CampaignReport& report) {
    std::string csv = "patch,label,categories,failing_count,exec_ms\n";
    for (const auto& v : report.verdicts) {
        std::string cats;
        for (DiffCategory c : all_categories()) {
            if (!v.categories.count(c)) continue;
            if (!cats.empty()) cats += '|';
            cats += category_tag(c);
        }
        csv += render_patch_name(v.patch) + "," + v.label() + "," + cats + "," +
               std::to_string(v.failing_tests.size()) + "," + std::to_string(v.exec_wall.count()) +
               "\n";
    }
    return csv;
}

Json canonical_report_json(const Json& report_json) {
    Json canonical = report_json;
    canonical.erase("timing");
    if (canonical.contains("verdicts"))
        for (auto& v : canonical["verdicts"]) v.erase("exec_ms");
    return canonical;
}

std::string canonical_report_csv(const std::string& csv) {
    std::string out;
    for (const auto& line : split_lines(csv).lines) {
        auto cells = split(line, ',');
        if (cells.size() == 5) cells.pop_back();
        std::string joined;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) joined += ',';
            joined += cells[i];
        }
        out += joined + "\n";
    }
    return out;
}

}  // namespace rgt
