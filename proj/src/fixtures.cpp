#include "rgt/fixtures.hpp"

#include "rgt/errors.hpp"
#include "rgt/rng.hpp"

namespace rgt {

std::vector<FixtureSpec> load_fixture_manifest(const fs::path& file) {
    const Json j = Json::parse(read_file(file));
    std::vector<FixtureSpec> fixtures;
    for (const auto& rec : j.at("fixtures")) {
        FixtureSpec spec;
        spec.bug_id = rec.at("bug_id").get<std::string>();
        spec.finite_domain = rec.at("finite_domain").get<bool>();
        spec.deterministic = rec.at("deterministic").get<bool>();
        for (const auto& p : rec.value("patches", Json::array())) {
            FixturePatchSpec patch;
            patch.file = p.at("file").get<std::string>();
            patch.intended_verdict = p.at("intended_verdict").get<std::string>();
            for (const auto& tag : p.at("intended_categories")) {
                const auto cat = category_from_tag(tag.get<std::string>());
                if (!cat)
                    throw ConfigError("unknown category in fixture manifest: " +
                                      tag.get<std::string>());
                patch.intended_categories.insert(*cat);
            }
            spec.patches.push_back(std::move(patch));
        }
        fixtures.push_back(std::move(spec));
    }
    return fixtures;
}

BruteForceVerdict brute_force_verdict(const ProgramDescriptor& ground_truth_built,
                                      const ProgramDescriptor& patch_built,
                                      const InputSchema& schema, Millis per_test_timeout,
                                      std::uint64_t cap) {
    BruteForceVerdict verdict;
    for (const Json& input : schema.enumerate(cap)) {
        const std::string key = input.dump();
        RunOptions gt_opts;
        gt_opts.timeout = per_test_timeout;
        gt_opts.exec_seed = mix64(fnv1a64("brute-gt") ^ fnv1a64(key));
        const Outcome oracle = run_once(ground_truth_built, input, gt_opts);
        if (oracle.kind == Outcome::Kind::Timeout || oracle.kind == Outcome::Kind::Error)
            continue;  // no usable oracle on this input, as in suite capture

        RunOptions patch_opts;
        patch_opts.timeout = per_test_timeout;
        patch_opts.exec_seed = mix64(fnv1a64("brute-patch") ^ fnv1a64(key));
        const Outcome actual = run_once(patch_built, input, patch_opts);

        if (const auto category = classify_pair(oracle, actual)) {
            verdict.overfitting = true;
            verdict.categories.insert(*category);
            verdict.differing_inputs.push_back(input);
        }
    }
    return verdict;
}

}  // namespace rgt
