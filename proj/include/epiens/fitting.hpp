/**
 * @file fitting.hpp
 * @brief Least-squares estimation of the logistic rate-equation coefficients.
 *
 * The rate equation is linear in (alpha, beta, gamma), so the daily increments
 * are regressed on the cumulative level:
 *
 *     dE(d) = alpha * Ebar(d) - beta * Ebar(d)^2 + gamma
 *
 * with dE(d) = E(d) - E(d-1) and, by default, the midpoint abscissa
 * Ebar(d) = (E(d) + E(d-1)) / 2. The closed-form trajectory is then anchored on
 * the first training day.
 */
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "case_series.hpp"
#include "errors.hpp"
#include "logistic.hpp"
#include "stats.hpp"

namespace epiens {

enum class Abscissa {
    Midpoint,  ///< (E(d) + E(d-1)) / 2
    Previous,  ///< E(d-1), the plain forward difference
};

struct FitOptions {
    Abscissa abscissa = Abscissa::Midpoint;
    /// Fits whose asymptote lies more than this fraction below the largest
    /// observed count are rejected.
    double asymptote_tolerance = 0.10;
    /// Reject fits whose inflection level has not been reached by the data.
    bool require_inflection = true;
    /// Refits that remove the one-day discretization error of the regression,
    /// estimated from the current fit. 0 gives the plain regression.
    int correction_passes = 4;
};

enum class FitStatus {
    Valid,
    NotLogistic,
    NoRealAsymptote,
    SaturatedStart,
    UnstableStart,
    AsymptoteBelowData,
    PreInflection,
};

inline const char* to_string(FitStatus s) {
    switch (s) {
    case FitStatus::Valid: return "Valid";
    case FitStatus::NotLogistic: return "NotLogistic";
    case FitStatus::NoRealAsymptote: return "NoRealAsymptote";
    case FitStatus::SaturatedStart: return "SaturatedStart";
    case FitStatus::UnstableStart: return "UnstableStart";
    case FitStatus::AsymptoteBelowData: return "AsymptoteBelowData";
    case FitStatus::PreInflection: return "PreInflection";
    }
    return "Unknown";
}

struct FitResult {
    LogisticParams params;
    std::optional<LogisticSolution> solution;  ///< absent when no bounded solution exists
    int first_day = 0;                         ///< first training day (anchor of the solution)
    int last_day = 0;
    std::size_t n_points = 0;                  ///< regression rows
    double residual_ss = 0.0;                  ///< sum of squared rate residuals, (cases/day)^2
    double residual_rms = 0.0;                 ///< cases/day
    bool valid_for_forecast = false;
    FitStatus status = FitStatus::NotLogistic;
    std::string reason;
};

namespace detail {

/// Least squares for an n x 3 system via Householder QR on equilibrated columns.
inline std::array<double, 3> solve_ls3(std::vector<std::array<double, 3>> rows, std::vector<double> y) {
    const std::size_t n = rows.size();
    if (n < 3) throw SizeError("least squares needs at least 3 rows");

    std::array<double, 3> scale{};
    for (const auto& r : rows) {
        for (int j = 0; j < 3; ++j) scale[j] = std::max(scale[j], std::abs(r[j]));
    }
    for (int j = 0; j < 3; ++j) {
        if (!(scale[j] > 0.0) || !std::isfinite(scale[j])) {
            throw DegenerateDesign("design column " + std::to_string(j) + " is zero or non-finite");
        }
    }
    for (auto& r : rows) {
        for (int j = 0; j < 3; ++j) r[j] /= scale[j];
    }

    std::array<double, 3> rdiag{};
    for (int k = 0; k < 3; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm = std::hypot(norm, rows[i][k]);
        if (norm == 0.0) throw DegenerateDesign("rank-deficient design");
        if (rows[k][k] > 0.0) norm = -norm;
        // v = x - norm * e_k stored in place, scaled so v[k] = x_k - norm
        for (std::size_t i = k; i < n; ++i) rows[i][k] /= -norm;
        rows[k][k] += 1.0;
        for (int j = k + 1; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += rows[i][k] * rows[i][j];
            s = -s / rows[k][k];
            for (std::size_t i = k; i < n; ++i) rows[i][j] += s * rows[i][k];
        }
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += rows[i][k] * y[i];
        s = -s / rows[k][k];
        for (std::size_t i = k; i < n; ++i) y[i] += s * rows[i][k];
        rdiag[k] = norm;
    }
    const double rmax = std::max({std::abs(rdiag[0]), std::abs(rdiag[1]), std::abs(rdiag[2])});
    const double tol = 1e-12 * static_cast<double>(n) * rmax;
    for (int k = 0; k < 3; ++k) {
        if (std::abs(rdiag[k]) <= tol) throw DegenerateDesign("singular least-squares design");
    }
    std::array<double, 3> x{};
    for (int k = 2; k >= 0; --k) {
        double s = y[k];
        for (int j = k + 1; j < 3; ++j) s -= rows[k][j] * x[j];
        x[k] = s / rdiag[k];
    }
    for (int j = 0; j < 3; ++j) {
        x[j] /= scale[j];
        if (!std::isfinite(x[j])) throw DegenerateDesign("non-finite coefficient");
    }
    return x;
}

/// E after one day of the rate equation from e, by RK4; nullopt if it diverges.
inline std::optional<double> one_day(const LogisticParams& p, double e) {
    constexpr int kSteps = 16;
    constexpr double h = 1.0 / kSteps;
    for (int i = 0; i < kSteps; ++i) {
        const double k1 = p.rate(e);
        const double k2 = p.rate(e + 0.5 * h * k1);
        const double k3 = p.rate(e + 0.5 * h * k2);
        const double k4 = p.rate(e + h * k3);
        e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(e)) return std::nullopt;
    }
    return e;
}

} // namespace detail

/**
 * Fit (alpha, beta, gamma) on days [first non-zero day, last_day].
 *
 * The leading zero day is excluded: its jump reflects reporting onset. The
 * result is always returned when the regression itself is solvable; whether
 * it can be used for forecasting is reported in valid_for_forecast.
 */
inline FitResult fit(const CaseSeries& series, int last_day, const FitOptions& opts = {}) {
    if (series.empty() || last_day < series.first_day()) {
        throw SizeError("no observations up to day " + std::to_string(last_day));
    }
    last_day = std::min(last_day, series.last_day());
    int first = series.first_day();
    while (first <= last_day && !(series.at(first) > 0.0)) ++first;
    int nonzero = 0;
    for (int d = first; d <= last_day; ++d) nonzero += series.at(d) > 0.0 ? 1 : 0;
    if (nonzero < 5) {
        throw SizeError("fit needs at least 5 non-zero observations up to day " + std::to_string(last_day) +
                        ", found " + std::to_string(nonzero));
    }

    std::vector<std::array<double, 3>> rows;
    std::vector<double> y;
    for (int d = first + 1; d <= last_day; ++d) {
        const double prev = series.at(d - 1);
        const double cur = series.at(d);
        const double x = opts.abscissa == Abscissa::Midpoint ? 0.5 * (prev + cur) : prev;
        rows.push_back({x, -x * x, 1.0});
        y.push_back(cur - prev);
    }
    auto coef = detail::solve_ls3(rows, y);
    auto target = y;

    // Deferred correction: the regression row for day d is exact for the
    // continuous model only up to c(d) = dE*(d) - rate(x*(d)), with dE* the
    // model's one-day increment from E(d-1). Subtract c and refit.
    for (int pass = 0; pass < opts.correction_passes; ++pass) {
        const LogisticParams p{coef[0], coef[1], coef[2]};
        if (!(p.beta > 0.0)) break;
        std::vector<double> corrected(y.size());
        bool ok = true;
        for (std::size_t i = 0; i < y.size() && ok; ++i) {
            const double prev = series.at(first + static_cast<int>(i));
            const auto next = detail::one_day(p, prev);
            if (!next) {
                ok = false;
                break;
            }
            const double x = opts.abscissa == Abscissa::Midpoint ? 0.5 * (prev + *next) : prev;
            corrected[i] = y[i] - ((*next - prev) - p.rate(x));
        }
        if (!ok) break;
        try {
            coef = detail::solve_ls3(rows, corrected);
        } catch (const DegenerateDesign&) {
            break;
        }
        target = std::move(corrected);
    }

    FitResult r;
    r.params = {coef[0], coef[1], coef[2]};
    r.first_day = first;
    r.last_day = last_day;
    r.n_points = y.size();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double res = target[i] - (coef[0] * rows[i][0] + coef[1] * rows[i][1] + coef[2]);
        r.residual_ss += res * res;
    }
    r.residual_rms = std::sqrt(r.residual_ss / static_cast<double>(y.size()));

    const double E0 = series.at(first);
    try {
        r.solution = derive_solution(r.params, E0, first);
    } catch (const ModelError& e) {
        switch (e.kind()) {
        case ModelErrorKind::NoRealAsymptote: r.status = FitStatus::NoRealAsymptote; break;
        case ModelErrorKind::SaturatedStart: r.status = FitStatus::SaturatedStart; break;
        default: r.status = FitStatus::NotLogistic; break;
        }
        r.reason = e.detail();
        return r;
    }
    const auto& s = *r.solution;
    double max_obs = 0.0;
    for (int d = first; d <= last_day; ++d) max_obs = std::max(max_obs, series.at(d));

    if (!(s.C2 > 0.0)) {
        r.status = FitStatus::NotLogistic;
        r.reason = "non-positive logistic rate C2";
    } else if (!(s.C1 > 0.0)) {
        r.status = FitStatus::UnstableStart;
        r.reason = "initial value lies at or below the lower fixed point " + std::to_string(-s.S / s.a) +
                   "; the trajectory does not grow towards the asymptote";
    } else if (s.E_inf < (1.0 - opts.asymptote_tolerance) * max_obs) {
        r.status = FitStatus::AsymptoteBelowData;
        r.reason = "asymptote " + std::to_string(s.E_inf) + " is below the observed maximum " +
                   std::to_string(max_obs);
    } else if (opts.require_inflection && inflection_level(r.params) > max_obs) {
        r.status = FitStatus::PreInflection;
        r.reason = "fitted curve still accelerating: inflection level " +
                   std::to_string(inflection_level(r.params)) + " above observed maximum " +
                   std::to_string(max_obs);
    } else {
        r.status = FitStatus::Valid;
        r.valid_for_forecast = true;
    }
    return r;
}

struct FitQuality {
    double rmse = 0.0;                 ///< cases
    std::optional<double> correlation; ///< nullopt when undefined (zero variance)
    std::size_t n_days = 0;
};

/// RMSE and Pearson correlation of the fitted curve against cumulative[d], d in [from, to].
inline FitQuality fit_quality(const FitResult& result, const CaseSeries& series, int from, int to) {
    if (!result.solution) {
        throw ValueError("fit has no solution to evaluate (" + result.reason + ")");
    }
    if (from > to || !series.contains(from) || !series.contains(to)) {
        throw RangeError("evaluation range [" + std::to_string(from) + ", " + std::to_string(to) +
                         "] not inside the series");
    }
    std::vector<double> pred, obs;
    for (int d = from; d <= to; ++d) {
        pred.push_back(evaluate_at_day(*result.solution, d));
        obs.push_back(series.at(d));
    }
    FitQuality q;
    q.rmse = stats::rmse(pred, obs);
    q.correlation = pred.size() >= 2 ? stats::pearson(pred, obs) : std::nullopt;
    q.n_days = pred.size();
    return q;
}

} // namespace epiens
