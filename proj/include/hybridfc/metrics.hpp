#pragma once
// Evaluation metrics: AUROC via the Mann-Whitney statistic with average
// ranks for ties, and the two-sided Wilcoxon signed-rank test (exact
// permutation distribution up to n=25, normal approximation with tie and
// continuity corrections beyond).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hybridfc/errors.hpp"

namespace hybridfc {

// Ranks 1..n in ascending value order; tied values share the average rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
    std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double auroc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw ContractViolation("auroc: scores and labels differ in length");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) {
        if (y == 1) ++n_pos;
        else if (y == 0) ++n_neg;
        else throw ContractViolation("auroc: labels must be 0 or 1");
    }
    if (n_pos == 0 || n_neg == 0)
        throw MetricError("auroc is undefined: need both positive and negative labels (got " +
                          std::to_string(n_pos) + " positive, " + std::to_string(n_neg) +
                          " negative)");
    std::vector<double> ranks = average_ranks(scores);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 1) rank_sum_pos += ranks[i];
    double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * nn);
}

struct WilcoxonResult {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double statistic = 0.0;  // min(W+, W−)
    std::size_t n = 0;       // non-zero differences
    double p_value = 1.0;
    bool exact = false;
    bool reject = false;
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;
inline constexpr std::size_t kWilcoxonMinDiffs = 5;

// Two-sided paired test of x vs y. Zero differences are dropped; fewer than
// 5 remaining is a MetricError. Exact doubled-rank enumeration handles the
// half-integer average ranks produced by ties.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x,
                                           std::span<const double> y, double alpha = 0.05) {
    if (x.size() != y.size())
        throw ContractViolation("wilcoxon_signed_rank: paired samples differ in length");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        if (d != 0.0) diffs.push_back(d);
    }
    std::size_t n = diffs.size();
    if (n < kWilcoxonMinDiffs)
        throw MetricError("wilcoxon_signed_rank needs at least " +
                          std::to_string(kWilcoxonMinDiffs) + " non-zero differences, got " +
                          std::to_string(n));

    std::vector<double> abs_diffs(n);
    for (std::size_t i = 0; i < n; ++i) abs_diffs[i] = std::fabs(diffs[i]);
    std::vector<double> ranks = average_ranks(abs_diffs);

    WilcoxonResult result;
    result.n = n;
    for (std::size_t i = 0; i < n; ++i)
        (diffs[i] > 0.0 ? result.w_plus : result.w_minus) += ranks[i];
    result.statistic = std::min(result.w_plus, result.w_minus);

    if (n <= kWilcoxonExactLimit) {
        // Doubled ranks are integers even with tied averages; count subsets
        // by doubled-rank sum to get the exact permutation distribution.
        std::vector<long long> doubled(n);
        long long total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = std::llround(2.0 * ranks[i]);
            total += doubled[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        long long reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            reach += doubled[i];
            for (long long w = reach; w >= doubled[i]; --w)
                count[static_cast<std::size_t>(w)] +=
                    count[static_cast<std::size_t>(w - doubled[i])];
        }
        long long threshold = std::llround(2.0 * result.statistic);
        double below = 0.0;
        for (long long w = 0; w <= threshold && w <= total; ++w)
            below += count[static_cast<std::size_t>(w)];
        double p = 2.0 * below / std::pow(2.0, static_cast<double>(n));
        result.p_value = std::min(1.0, p);
        result.exact = true;
    } else {
        double dn = static_cast<double>(n);
        double mean = dn * (dn + 1.0) / 4.0;
        double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
        // Tie correction: subtract Σ(t³−t)/48 over groups of tied |d|.
        std::vector<double> sorted_abs = abs_diffs;
        std::sort(sorted_abs.begin(), sorted_abs.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted_abs[j + 1] == sorted_abs[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
        if (var <= 0.0)
            throw MetricError("wilcoxon_signed_rank: variance vanished (all differences tied)");
        double z = (result.statistic - mean + 0.5) / std::sqrt(var);
        double p = 2.0 * 0.5 * std::erfc(-z / std::sqrt(2.0));
        result.p_value = std::min(1.0, p);
        result.exact = false;
    }
    result.reject = result.p_value < alpha;
    return result;
}

}  // namespace hybridfc
