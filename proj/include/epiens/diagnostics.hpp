/**
 * @file diagnostics.hpp
 * @brief Discrete growth-rate and concavity analysis of a cumulative series.
 */
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "case_series.hpp"
#include "errors.hpp"

namespace epiens {

/// Per-day derivatives. Values that cannot be formed at a day are nullopt.
struct DerivativeSeries {
    std::vector<int> days;
    std::vector<std::optional<double>> first;            ///< cumulative[d] - cumulative[d-1]
    std::vector<std::optional<double>> second;           ///< first[d] - first[d-1]
    std::vector<std::optional<double>> smoothed_first;   ///< centred 3-day mean of first
    std::vector<std::optional<double>> smoothed_second;  ///< centred 3-day mean of second

    std::size_t index(int day) const { return static_cast<std::size_t>(day - days.front()); }
};

namespace detail {

inline std::vector<std::optional<double>> centred_mean3(const std::vector<std::optional<double>>& x) {
    std::vector<std::optional<double>> out(x.size());
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (x[i - 1] && x[i] && x[i + 1]) {
            out[i] = (*x[i - 1] + *x[i] + *x[i + 1]) / 3.0;
        }
    }
    return out;
}

} // namespace detail

inline DerivativeSeries derivatives(const CaseSeries& series) {
    if (series.size() < 3) {
        throw SizeError("derivatives need at least 3 days, got " + std::to_string(series.size()));
    }
    DerivativeSeries out;
    const auto n = series.size();
    const auto& c = series.cumulative();
    out.first.resize(n);
    out.second.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.days.push_back(series.first_day() + static_cast<int>(i));
        if (i >= 1) out.first[i] = c[i] - c[i - 1];
        if (i >= 2) out.second[i] = *out.first[i] - *out.first[i - 1];
    }
    out.smoothed_first = detail::centred_mean3(out.first);
    out.smoothed_second = detail::centred_mean3(out.second);
    return out;
}

/// First day on which the smoothed second derivative turns negative after
/// being positive, or nullopt if it never does.
inline std::optional<int> concavity_sign_change(const DerivativeSeries& ds) {
    bool seen_positive = false;
    for (std::size_t i = 0; i < ds.days.size(); ++i) {
        const auto& v = ds.smoothed_second[i];
        if (!v) continue;
        if (*v > 0.0) seen_positive = true;
        if (*v < 0.0 && seen_positive) return ds.days[i];
    }
    return std::nullopt;
}

inline constexpr int kDefaultReadinessK = 2;

struct ReadinessVerdict {
    bool ready = false;
    std::optional<int> first_ready_day;
    int consecutive_negative_days_required = kDefaultReadinessK;
    std::string explanation;
};

/**
 * Decide whether the series has left its exponential phase.
 *
 * Ready at the first day d where the smoothed second derivative is negative on
 * the k days ending at d and the smoothed first derivative at d is below its
 * running maximum. Smoothed values stop one day before the last observation.
 */
inline ReadinessVerdict readiness(const CaseSeries& series, int k_consecutive = kDefaultReadinessK) {
    if (series.size() < 5) {
        throw SizeError("readiness needs at least 5 days, got " + std::to_string(series.size()));
    }
    if (k_consecutive < 1) {
        throw ValueError("readiness k must be >= 1");
    }
    const auto ds = derivatives(series);
    ReadinessVerdict v;
    v.consecutive_negative_days_required = k_consecutive;

    std::optional<double> running_max;
    int longest_run = 0;
    int run = 0;
    bool slowdown_seen = false;
    for (std::size_t i = 0; i < ds.days.size(); ++i) {
        const auto& sf = ds.smoothed_first[i];
        const auto& ss = ds.smoothed_second[i];
        if (sf) running_max = running_max ? std::max(*running_max, *sf) : *sf;
        run = (ss && *ss < 0.0) ? run + 1 : 0;
        longest_run = std::max(longest_run, run);
        const bool slowing = sf && running_max && *sf < *running_max;
        slowdown_seen = slowdown_seen || slowing;
        if (run >= k_consecutive && slowing) {
            v.ready = true;
            v.first_ready_day = ds.days[i];
            v.explanation = "smoothed second derivative negative for " + std::to_string(k_consecutive) +
                            " consecutive day(s) ending at day " + std::to_string(ds.days[i]) +
                            " and smoothed increment below its running maximum";
            return v;
        }
    }
    const int latest = series.last_day() - 1;
    if (longest_run < k_consecutive) {
        v.explanation = "concavity has not turned: smoothed second derivative never negative for " +
                        std::to_string(k_consecutive) + " consecutive day(s) through day " +
                        std::to_string(latest) + " (longest run " + std::to_string(longest_run) + ")";
    } else if (!slowdown_seen) {
        v.explanation = "growth has not slowed: smoothed increment still at its running maximum through day " +
                        std::to_string(latest);
    } else {
        v.explanation = "negative concavity and slowing growth never coincide through day " + std::to_string(latest);
    }
    return v;
}

} // namespace epiens
