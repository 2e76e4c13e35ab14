/**
 * @file verification.hpp
 * @brief Scores for deterministic fits and ensemble fans against held-out days.
 */
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "case_series.hpp"
#include "ensemble.hpp"
#include "errors.hpp"
#include "fitting.hpp"
#include "stats.hpp"

namespace epiens {

struct VerificationReport {
    double rmse = 0.0;
    std::optional<double> correlation;      ///< nullopt when undefined
    std::optional<double> minmax_coverage;  ///< ensemble reports only
    std::optional<double> iqr_coverage;     ///< ensemble reports only
    int first_day = 0;
    int last_day = 0;
    int n_days = 0;
};

inline VerificationReport verify_deterministic(const FitResult& result, const CaseSeries& series, int from, int to) {
    const auto q = fit_quality(result, series, from, to);
    VerificationReport r;
    r.rmse = q.rmse;
    r.correlation = q.correlation;
    r.first_day = from;
    r.last_day = to;
    r.n_days = static_cast<int>(q.n_days);
    return r;
}

/// Coverage of [min, max] and [q25, q75] (closed intervals) over the days of
/// [from, to] that are both forecast and observed; rmse/correlation use the median.
inline VerificationReport verify_ensemble(const EnsembleForecast& forecast, const CaseSeries& series, int from,
                                          int to) {
    if (forecast.days.empty()) throw RangeError("forecast has no days");
    const int lo = std::max({from, forecast.days.front(), series.first_day()});
    const int hi = std::min({to, forecast.days.back(), series.last_day()});
    if (lo > hi) {
        throw RangeError("no overlap between [" + std::to_string(from) + ", " + std::to_string(to) +
                         "], the forecast horizon and the observations");
    }
    std::vector<double> median, obs;
    int in_minmax = 0, in_iqr = 0;
    for (int d = lo; d <= hi; ++d) {
        const auto f = *forecast.fan_at(d);
        const double o = series.at(d);
        median.push_back(f.median);
        obs.push_back(o);
        in_minmax += (o >= f.min && o <= f.max) ? 1 : 0;
        in_iqr += (o >= f.q25 && o <= f.q75) ? 1 : 0;
    }
    VerificationReport r;
    r.first_day = lo;
    r.last_day = hi;
    r.n_days = hi - lo + 1;
    r.rmse = stats::rmse(median, obs);
    r.correlation = median.size() >= 2 ? stats::pearson(median, obs) : std::nullopt;
    r.minmax_coverage = static_cast<double>(in_minmax) / r.n_days;
    r.iqr_coverage = static_cast<double>(in_iqr) / r.n_days;
    return r;
}

} // namespace epiens
