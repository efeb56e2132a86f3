#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgt/assess.hpp"
#include "rgt/timing.hpp"

namespace rgt {

/// Human adjudication of flagged-but-claimed-correct patches: patch name ->
/// "true_positive" or "false_positive". The harness never adjudicates on
/// its own.
using Adjudication = std::map<std::string, std::string>;

Adjudication load_adjudication(const fs::path& file);

struct EffectivenessSummary {
    long n_claimed_correct = 0;
    long n_flagged_among_correct = 0;
    std::optional<long> true_positives;   // require full adjudication of flagged patches
    std::optional<long> false_positives;
    std::optional<double> fp_rate;        // false_positives / n_claimed_correct
    long n_claimed_overfitting = 0;
    long n_detected_overfitting = 0;
    std::optional<double> detection_rate;  // detected / claimed overfitting
    long n_unlabeled = 0;
    std::map<DiffCategory, long> category_histogram;  // failing tests, suppressed excluded
    std::vector<std::string> notes;
};

EffectivenessSummary summarize(const CampaignReport& report,
                               const Adjudication* adjudication = nullptr);

struct TimeFractions {
    double tcgen = 0, sc = 0, exec = 0;
};

/// Fractions of the campaign total; absent when the total is zero.
std::optional<TimeFractions> time_fractions(const TimeBreakdown& breakdown);

struct TradeoffPoint {
    int k = 0;                 // number of generation runs considered
    double mean_effectiveness = 0;
    double stderr_mean = 0;
};

struct TradeoffCurve {
    std::vector<TradeoffPoint> points;  // k = 1..runs_per_group, ascending
    long group_count = 0;
    int runs_per_group = 0;
    std::uint64_t seed = 0;
    /// Mean over groups of the first k reaching each effectiveness target
    /// (first-passage mean).
    std::map<double, double> mean_runs_to_target;
    bool per_group_monotone = true;
};

/// Estimates detection effectiveness as a function of how many generation
/// runs a campaign uses, over `group_count` random permutations of the
/// runs. Effectiveness is relative to the full campaign's detection set.
/// detection[patch][run] says whether that run alone flags the patch.
TradeoffCurve tradeoff_curve(const std::vector<std::vector<bool>>& detection, long group_count,
                             int runs_per_group, std::uint64_t seed,
                             const std::vector<double>& targets = {0.8, 0.9, 0.95, 1.0});

/// Per-run detection matrix of the report's overfitting-capable patches
/// (row per patch, column per generator run, run order ascending).
std::vector<std::vector<bool>> detection_matrix(const CampaignReport& report);

Json summary_to_json(const EffectivenessSummary& summary);
std::string summary_to_csv(const EffectivenessSummary& summary);
Json tradeoff_to_json(const TradeoffCurve& curve);
std::string tradeoff_to_csv(const TradeoffCurve& curve);
Json timing_to_json(const TimeBreakdown& breakdown);

}  // namespace rgt
