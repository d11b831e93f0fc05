#pragma once

// Downhill simplex minimizer (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Deterministic given the start point.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace vispro {

struct SimplexResult {
    std::vector<double> best_point;
    double best_value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
};

struct SimplexOptions {
    int max_iterations = 2000;
    double tolerance = 1e-9;     // stop when the value spread falls below this
    double initial_step = 0.25;  // per-coordinate simplex offset
};

inline SimplexResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const SimplexOptions& options = {}) {
    const std::size_t n = start.size();
    SimplexResult result;

    std::vector<std::vector<double>> points(n + 1, start);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) points[i + 1][i] += options.initial_step;
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = objective(points[i]);
        ++result.evaluations;
    }

    auto record_best = [&result](const std::vector<double>& p, double v) {
        if (v < result.best_value) {
            result.best_value = v;
            result.best_point = p;
        }
    };
    for (std::size_t i = 0; i <= n; ++i) record_best(points[i], values[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), candidate(n);

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&values](std::size_t a, std::size_t b) {
                             return values[a] < values[b];
                         });
        const std::size_t best = order.front(), worst = order.back();
        const std::size_t second_worst = order[n - 1];

        if (std::abs(values[worst] - values[best]) <= options.tolerance) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += points[k][i];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto offset_point = [&](double scale) {
            for (std::size_t i = 0; i < n; ++i) {
                candidate[i] = centroid[i] + scale * (centroid[i] - points[worst][i]);
            }
            ++result.evaluations;
            return objective(candidate);
        };

        const double reflected = offset_point(1.0);
        record_best(candidate, reflected);
        if (reflected < values[best]) {
            const std::vector<double> reflect_pt = candidate;
            const double expanded = offset_point(2.0);
            record_best(candidate, expanded);
            if (expanded < reflected) {
                points[worst] = candidate;
                values[worst] = expanded;
            } else {
                points[worst] = reflect_pt;
                values[worst] = reflected;
            }
            continue;
        }
        if (reflected < values[second_worst]) {
            points[worst] = candidate;
            values[worst] = reflected;
            continue;
        }

        const bool outside = reflected < values[worst];
        const double contracted = offset_point(outside ? 0.5 : -0.5);
        record_best(candidate, contracted);
        if (contracted < (outside ? reflected : values[worst])) {
            points[worst] = candidate;
            values[worst] = contracted;
            continue;
        }

        // Shrink toward the best vertex.
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == best) continue;
            for (std::size_t i = 0; i < n; ++i) {
                points[k][i] = points[best][i] + 0.5 * (points[k][i] - points[best][i]);
            }
            values[k] = objective(points[k]);
            ++result.evaluations;
            record_best(points[k], values[k]);
        }
    }
    return result;
}

}  // namespace vispro
