#include "rgt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgt/errors.hpp"
#include "rgt/rng.hpp"

namespace rgt {

Adjudication load_adjudication(const fs::path& file) {
    const Json j = Json::parse(read_file(file));
    Adjudication adj;
    for (const auto& [patch, verdict] : j.items()) {
        const std::string v = verdict.get<std::string>();
        if (v != "true_positive" && v != "false_positive")
            throw ConfigError("adjudication for " + patch + " must be true_positive or "
                              "false_positive, got " + v);
        adj[patch] = v;
    }
    return adj;
}

EffectivenessSummary summarize(const CampaignReport& report, const Adjudication* adjudication) {
    EffectivenessSummary s;
    long adjudicated_fp = 0, adjudicated_tp = 0;
    bool all_flagged_adjudicated = true;

    for (const auto& v : report.verdicts) {
        for (const auto& f : v.failing_tests) ++s.category_histogram[f.category];

        if (!v.claimed_label) {
            ++s.n_unlabeled;
            continue;
        }
        if (*v.claimed_label == "correct") {
            ++s.n_claimed_correct;
            if (v.overfitting) {
                ++s.n_flagged_among_correct;
                const std::string name = render_patch_name(v.patch);
                const auto it = adjudication ? adjudication->find(name) : Adjudication::const_iterator{};
                if (!adjudication || it == adjudication->end()) {
                    all_flagged_adjudicated = false;
                    s.notes.push_back("flagged patch not adjudicated: " + name);
                } else if (it->second == "false_positive") {
                    ++adjudicated_fp;
                } else {
                    ++adjudicated_tp;
                }
            }
        } else if (*v.claimed_label == "overfitting") {
            ++s.n_claimed_overfitting;
            if (v.overfitting) ++s.n_detected_overfitting;
        } else {
            ++s.n_unlabeled;
            s.notes.push_back("unknown claimed label '" + *v.claimed_label + "' on " +
                              render_patch_name(v.patch));
        }
    }

    if (s.n_unlabeled > 0)
        s.notes.push_back(std::to_string(s.n_unlabeled) +
                          " patches lack a claimed label; summary covers the labeled subset");

    if (all_flagged_adjudicated) {
        s.true_positives = adjudicated_tp;
        s.false_positives = adjudicated_fp;
        if (s.n_claimed_correct > 0)
            s.fp_rate = static_cast<double>(adjudicated_fp) /
                        static_cast<double>(s.n_claimed_correct);
    }
    if (s.n_claimed_overfitting > 0)
        s.detection_rate = static_cast<double>(s.n_detected_overfitting) /
                           static_cast<double>(s.n_claimed_overfitting);
    return s;
}

std::optional<TimeFractions> time_fractions(const TimeBreakdown& breakdown) {
    const double total = static_cast<double>(breakdown.total().count());
    if (total <= 0) return std::nullopt;
    TimeFractions f;
    f.tcgen = static_cast<double>(breakdown.tcgen.count()) / total;
    f.sc = static_cast<double>(breakdown.sc.count()) / total;
    f.exec = static_cast<double>((breakdown.exec_correct + breakdown.exec_overfitting).count()) /
             total;
    return f;
}

TradeoffCurve tradeoff_curve(const std::vector<std::vector<bool>>& detection, long group_count,
                             int runs_per_group, std::uint64_t seed,
                             const std::vector<double>& targets) {
    if (group_count < 1) throw ConfigError("group_count must be >= 1");
    if (runs_per_group < 1) throw ConfigError("runs_per_group must be >= 1");
    for (double t : targets)
        if (!(t > 0.0 && t <= 1.0))
            throw ConfigError("effectiveness targets must lie in (0, 1]");
    for (const auto& row : detection)
        if (row.size() < static_cast<std::size_t>(runs_per_group))
            throw InsufficientRunsError("per-run detection known for " +
                                        std::to_string(row.size()) + " runs, need " +
                                        std::to_string(runs_per_group));

    // Baseline: patches the full campaign detects at all.
    std::vector<std::size_t> baseline;
    for (std::size_t p = 0; p < detection.size(); ++p)
        for (int r = 0; r < runs_per_group; ++r)
            if (detection[p][static_cast<std::size_t>(r)]) {
                baseline.push_back(p);
                break;
            }
    if (baseline.empty())
        throw InsufficientRunsError("no patch is detected by any run; curve undefined");
    const double denom = static_cast<double>(baseline.size());

    TradeoffCurve curve;
    curve.group_count = group_count;
    curve.runs_per_group = runs_per_group;
    curve.seed = seed;

    std::vector<double> sum(static_cast<std::size_t>(runs_per_group), 0.0);
    std::vector<double> sumsq(static_cast<std::size_t>(runs_per_group), 0.0);
    std::map<double, double> passage_sum;
    for (double t : targets) passage_sum[t] = 0.0;

    SplitMix64 rng(seed);
    std::vector<int> perm(static_cast<std::size_t>(runs_per_group));
    std::vector<char> found(baseline.size());

    for (long g = 0; g < group_count; ++g) {
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.next_below(i)]);

        std::fill(found.begin(), found.end(), 0);
        std::size_t detected = 0;
        double prev_eff = 0.0;
        std::map<double, int> passage;
        for (int k = 1; k <= runs_per_group; ++k) {
            const int run = perm[static_cast<std::size_t>(k - 1)];
            for (std::size_t b = 0; b < baseline.size(); ++b) {
                if (found[b]) continue;
                if (detection[baseline[b]][static_cast<std::size_t>(run)]) {
                    found[b] = 1;
                    ++detected;
                }
            }
            const double eff = static_cast<double>(detected) / denom;
            if (eff + 1e-12 < prev_eff) curve.per_group_monotone = false;
            prev_eff = eff;
            sum[static_cast<std::size_t>(k - 1)] += eff;
            sumsq[static_cast<std::size_t>(k - 1)] += eff * eff;
            for (double t : targets)
                if (!passage.count(t) && eff + 1e-12 >= t) passage[t] = k;
        }
        for (double t : targets) passage_sum[t] += passage.at(t);  // eff reaches 1.0 at k=R
    }

    const double n = static_cast<double>(group_count);
    for (int k = 1; k <= runs_per_group; ++k) {
        TradeoffPoint point;
        point.k = k;
        point.mean_effectiveness = sum[static_cast<std::size_t>(k - 1)] / n;
        const double var = std::max(
            0.0, sumsq[static_cast<std::size_t>(k - 1)] / n -
                     point.mean_effectiveness * point.mean_effectiveness);
        point.stderr_mean = std::sqrt(var / n);
        curve.points.push_back(point);
    }
    for (double t : targets) curve.mean_runs_to_target[t] = passage_sum[t] / n;
    return curve;
}

std::vector<std::vector<bool>> detection_matrix(const CampaignReport& report) {
    std::vector<std::vector<bool>> matrix;
    for (const auto& v : report.verdicts) {
        if (v.per_run_detection.empty()) continue;
        const int max_run = v.per_run_detection.rbegin()->first;
        std::vector<bool> row(static_cast<std::size_t>(max_run), false);
        for (const auto& [run, hit] : v.per_run_detection)
            if (run >= 1) row[static_cast<std::size_t>(run - 1)] = hit;
        matrix.push_back(std::move(row));
    }
    return matrix;
}

Json summary_to_json(const EffectivenessSummary& s) {
    Json j;
    j["n_claimed_correct"] = s.n_claimed_correct;
    j["n_flagged_among_correct"] = s.n_flagged_among_correct;
    if (s.true_positives) j["true_positives"] = *s.true_positives;
    if (s.false_positives) j["false_positives"] = *s.false_positives;
    if (s.fp_rate) j["fp_rate"] = *s.fp_rate;
    j["n_claimed_overfitting"] = s.n_claimed_overfitting;
    j["n_detected_overfitting"] = s.n_detected_overfitting;
    if (s.detection_rate) j["detection_rate"] = *s.detection_rate;
    j["n_unlabeled"] = s.n_unlabeled;
    Json hist = Json::object();
    for (DiffCategory c : all_categories()) {
        const auto it = s.category_histogram.find(c);
        hist[category_tag(c)] = it == s.category_histogram.end() ? 0 : it->second;
    }
    j["category_histogram"] = std::move(hist);
    j["notes"] = s.notes;
    return j;
}

std::string summary_to_csv(const EffectivenessSummary& s) {
    auto opt_long = [](const std::optional<long>& v) {
        return v ? std::to_string(*v) : std::string{};
    };
    auto opt_rate = [](const std::optional<double>& v) {
        if (!v) return std::string{};
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        return std::string(buf);
    };
    std::string csv =
        "n_claimed_correct,n_flagged_among_correct,true_positives,false_positives,fp_rate,"
        "n_claimed_overfitting,n_detected_overfitting,detection_rate,n_unlabeled\n";
    csv += std::to_string(s.n_claimed_correct) + "," + std::to_string(s.n_flagged_among_correct) +
           "," + opt_long(s.true_positives) + "," + opt_long(s.false_positives) + "," +
           opt_rate(s.fp_rate) + "," + std::to_string(s.n_claimed_overfitting) + "," +
           std::to_string(s.n_detected_overfitting) + "," + opt_rate(s.detection_rate) + "," +
           std::to_string(s.n_unlabeled) + "\n";
    return csv;
}

Json tradeoff_to_json(const TradeoffCurve& curve) {
    Json j;
    j["group_count"] = curve.group_count;
    j["runs_per_group"] = curve.runs_per_group;
    j["seed"] = curve.seed;
    j["per_group_monotone"] = curve.per_group_monotone;
    Json points = Json::array();
    for (const auto& p : curve.points) {
        Json rec;
        rec["k"] = p.k;
        rec["mean_effectiveness"] = p.mean_effectiveness;
        rec["stderr"] = p.stderr_mean;
        points.push_back(std::move(rec));
    }
    j["points"] = std::move(points);
    Json targets = Json::object();
    for (const auto& [target, runs] : curve.mean_runs_to_target) {
        char key[16];
        std::snprintf(key, sizeof key, "%.2f", target);
        targets[key] = runs;
    }
    j["mean_runs_to_target"] = std::move(targets);
    return j;
}

std::string tradeoff_to_csv(const TradeoffCurve& curve) {
    std::string csv = "k,mean_effectiveness,stderr\n";
    for (const auto& p : curve.points) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", p.k, p.mean_effectiveness,
                      p.stderr_mean);
        csv += buf;
    }
    return csv;
}

Json timing_to_json(const TimeBreakdown& breakdown) {
    Json j;
    j["tcgen_ms"] = breakdown.tcgen.count();
    j["sc_ms"] = breakdown.sc.count();
    j["exec_correct_ms"] = breakdown.exec_correct.count();
    j["exec_overfitting_ms"] = breakdown.exec_overfitting.count();
    j["total_ms"] = breakdown.total().count();
    if (const auto f = time_fractions(breakdown)) {
        j["tcgen_fraction"] = f->tcgen;
        j["sc_fraction"] = f->sc;
        j["exec_fraction"] = f->exec;
    }
    return j;
}

}  // namespace rgt
