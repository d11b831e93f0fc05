#pragma once

// Prognostic evaluation metrics: percent error, the asymmetric accuracy score
// (over-predicted RUL decays with a 5-point half-life, under-predicted with a
// 20-point half-life), and aggregate report rows.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vispro/common.hpp"

namespace vispro {

struct BearingResult {
    std::string bearing;
    double truncation_time = 0.0;  // t_c, seconds
    double predicted_rul = 0.0;    // seconds
    double true_rul = 0.0;         // seconds
    // confidence level -> [lower, upper]
    std::map<double, std::pair<double, double>> bounds;
};

inline double percent_error(double true_rul, double predicted_rul) {
    if (!(true_rul > 0.0)) {
        throw UserError("percent error: ground truth RUL must be positive");
    }
    return (true_rul - predicted_rul) / true_rul * 100.0;
}

inline double accuracy_score(double er_percent) {
    const double ln_half = std::log(0.5);
    return er_percent <= 0.0 ? std::exp(-ln_half * er_percent / 5.0)
                             : std::exp(ln_half * er_percent / 20.0);
}

struct AggregateScore {
    double score = 0.0;     // mean accuracy score
    double mean_er = 0.0;   // mean of signed percent errors
    double std_er = 0.0;    // population std of signed percent errors
    double mean_abs_er = 0.0;
    double std_abs_er = 0.0;
};

// The published Mean/STD rows are arithmetic over the signed percent errors
// (population standard deviation); absolute-error statistics are kept
// alongside for completeness.
inline AggregateScore aggregate_score(const std::vector<BearingResult>& results) {
    if (results.empty()) throw UserError("aggregate score: empty result list");
    AggregateScore agg;
    std::vector<double> errors;
    errors.reserve(results.size());
    for (const BearingResult& r : results) {
        const double er = percent_error(r.true_rul, r.predicted_rul);
        errors.push_back(er);
        agg.score += accuracy_score(er);
        agg.mean_er += er;
        agg.mean_abs_er += std::abs(er);
    }
    const double n = static_cast<double>(errors.size());
    agg.score /= n;
    agg.mean_er /= n;
    agg.mean_abs_er /= n;
    double var = 0.0, var_abs = 0.0;
    for (const double er : errors) {
        var += (er - agg.mean_er) * (er - agg.mean_er);
        var_abs += (std::abs(er) - agg.mean_abs_er) * (std::abs(er) - agg.mean_abs_er);
    }
    agg.std_er = std::sqrt(var / n);
    agg.std_abs_er = std::sqrt(var_abs / n);
    return agg;
}

struct CoverageReport {
    double level = 0.0;
    int count = 0;
    double mean_width = 0.0;
    int invalid = 0;  // ground truth outside the closed interval
};

inline CoverageReport coverage_report(const std::vector<BearingResult>& results,
                                      double level) {
    CoverageReport report;
    report.level = level;
    for (const BearingResult& r : results) {
        const auto it = r.bounds.find(level);
        if (it == r.bounds.end()) {
            throw UserError("coverage report: bearing " + r.bearing +
                            " has no bounds at level " + std::to_string(level));
        }
        const auto& [lower, upper] = it->second;
        report.count += 1;
        report.mean_width += upper - lower;
        if (r.true_rul < lower || r.true_rul > upper) report.invalid += 1;
    }
    if (report.count == 0) throw UserError("coverage report: no results");
    report.mean_width /= static_cast<double>(report.count);
    return report;
}

}  // namespace vispro
