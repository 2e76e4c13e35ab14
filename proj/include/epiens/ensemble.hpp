/**
 * @file ensemble.hpp
 * @brief Perturbed-observation, lag-shifted ensembles of logistic fits.
 *
 * Each member refits the logistic rate equation to a copy of the training
 * observations in which every cumulative value is multiplied by (1 + r(d)),
 * r(d) Gaussian. A share of the members additionally has its day labels moved
 * one day forward or backward to mimic reporting-timing errors. Member curves
 * are always evaluated on the canonical (unshifted) day axis and reduced to a
 * per-day quantile fan.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "case_series.hpp"
#include "errors.hpp"
#include "fitting.hpp"
#include "logistic.hpp"
#include "stats.hpp"

namespace epiens {

/// How the standard deviation of r(d) is set.
enum class NoiseModel {
    /// sigma_scale * |dn_obs(d)|: each observation is perturbed by a fraction
    /// of its own daily percentage increment.
    DailyIncrement,
    /// sigma_scale * sigma_obs for every day, sigma_obs being the sample
    /// standard deviation of all dn_obs(d) in the training window.
    Pooled,
};

inline const char* to_string(NoiseModel m) {
    return m == NoiseModel::Pooled ? "pooled" : "daily";
}

inline NoiseModel noise_model_from_string(std::string_view s) {
    if (s == "daily") return NoiseModel::DailyIncrement;
    if (s == "pooled") return NoiseModel::Pooled;
    throw ValueError("unknown noise model '" + std::string(s) + "' (expected daily or pooled)");
}

struct EnsembleConfig {
    int n_members = 30;
    int n_lag_forward = 10;
    int n_lag_backward = 10;
    double sigma_scale = 0.1;
    std::uint64_t seed = 1;
    int horizon_days = 30;
    int issuance_day = 0;
    NoiseModel noise = NoiseModel::DailyIncrement;
    unsigned threads = 0;  ///< 0 = hardware concurrency
    /// Fraction of members that must fit; below it the ensemble collapses.
    /// At least two members are always required.
    double min_success_fraction = 2.0 / 3.0;
    FitOptions fit;

    int min_successful() const {
        const int frac = static_cast<int>(std::ceil(min_success_fraction * n_members - 1e-9));
        return std::max(2, frac);
    }

    void validate() const {
        if (n_members < 0 || n_lag_forward < 0 || n_lag_backward < 0) {
            throw ValueError("member counts must be non-negative");
        }
        if (n_lag_forward + n_lag_backward > n_members) {
            throw ValueError("lagged members exceed the ensemble size");
        }
        if (!(sigma_scale >= 0.0) || !std::isfinite(sigma_scale)) {
            throw ValueError("sigma_scale must be a non-negative number");
        }
        if (horizon_days < 1) throw ValueError("horizon_days must be >= 1");
        if (!(min_success_fraction >= 0.0 && min_success_fraction <= 1.0)) {
            throw ValueError("min_success_fraction must lie in [0, 1]");
        }
    }

    /// Day-label shift applied to member j (0-based).
    int shift_of(int j) const {
        const int unshifted = n_members - n_lag_forward - n_lag_backward;
        if (j < unshifted) return 0;
        if (j < unshifted + n_lag_forward) return +1;
        return -1;
    }
};

// ---------------------------------------------------------------------------
// Perturbations

struct PerturbationSpec {
    int first_day = 0;
    std::vector<std::optional<double>> delta_n_obs;  ///< per training day; nullopt where E(d-1) = 0
    double sigma_obs = 0.0;
    double sigma_scale = 0.0;
    NoiseModel model = NoiseModel::DailyIncrement;
    std::vector<std::string> warnings;

    /// Standard deviation of r(day).
    double stddev(int day) const {
        const auto i = static_cast<std::size_t>(day - first_day);
        if (model == NoiseModel::Pooled) return sigma_scale * sigma_obs;
        return (i < delta_n_obs.size() && delta_n_obs[i]) ? sigma_scale * std::abs(*delta_n_obs[i]) : 0.0;
    }
};

/// Fractional daily increments of the training window and their spread.
inline PerturbationSpec perturbation_spec(const CaseSeries& training, double sigma_scale,
                                          NoiseModel model = NoiseModel::DailyIncrement) {
    PerturbationSpec spec;
    spec.first_day = training.first_day();
    spec.sigma_scale = sigma_scale;
    spec.model = model;
    spec.delta_n_obs.resize(training.size());
    std::vector<double> defined;
    bool outbreak_started = false;
    for (int d = training.first_day() + 1; d <= training.last_day(); ++d) {
        const double prev = training.at(d - 1);
        if (prev > 0.0) {
            outbreak_started = true;
            const double dn = (training.at(d) - prev) / prev;
            spec.delta_n_obs[static_cast<std::size_t>(d - spec.first_day)] = dn;
            defined.push_back(dn);
        } else if (outbreak_started) {
            spec.warnings.push_back("day " + std::to_string(d) +
                                    ": previous cumulative is zero, fractional increment skipped");
        }
    }
    spec.sigma_obs = stats::sample_stddev(defined);
    return spec;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Box-Muller on a 64-bit Mersenne Twister. Portable across standard
/// libraries, unlike std::normal_distribution.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (cached_) {
            cached_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        cached_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool cached_ = false;
};

} // namespace detail

/// `count` standard normal draws of member j, a function of (seed, j) alone.
inline std::vector<double> standard_normals(std::uint64_t seed, int member, std::size_t count) {
    detail::NormalStream stream(detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(member) + 1)));
    std::vector<double> z(count);
    for (auto& v : z) v = stream.next();
    return z;
}

/// r(d) for every day of the training window.
inline std::vector<double> member_draws(const PerturbationSpec& spec, std::uint64_t seed, int member) {
    auto z = standard_normals(seed, member, spec.delta_n_obs.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] *= spec.stddev(spec.first_day + static_cast<int>(i));
    }
    return z;
}

/// cumulative[d] * (1 + r(d)), floored at zero. Local decreases are kept.
inline CaseSeries perturb_series(const CaseSeries& series, std::span<const double> r) {
    if (r.size() != series.size()) {
        throw SizeError("perturbation length " + std::to_string(r.size()) + " does not match series length " +
                        std::to_string(series.size()));
    }
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::max(0.0, series.cumulative()[i] * (1.0 + r[i]));
    }
    return series.with_values(std::move(out));
}

/// Move every observation from day d to day d + shift.
inline CaseSeries lag_shift(const CaseSeries& series, int shift) {
    if (shift < -1 || shift > 1) {
        throw ValueError("lag shift must be -1, 0 or +1");
    }
    return series.relabeled(series.first_day() + shift);
}

// ---------------------------------------------------------------------------
// Quantile fan

struct FanPoint {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;

    bool operator==(const FanPoint&) const = default;
};

namespace detail {

/// Linear interpolation between order statistics at zero-based position p*(n-1).
inline double sorted_quantile(std::span<const double> sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace detail

inline FanPoint quantile_fan(std::span<const double> values) {
    if (values.size() < 2) {
        throw SizeError("quantile fan needs at least 2 values");
    }
    std::vector<double> v(values.begin(), values.end());
    for (double x : v) {
        if (!std::isfinite(x)) throw ValueError("non-finite member value");
    }
    std::sort(v.begin(), v.end());
    return {v.front(), detail::sorted_quantile(v, 0.25), detail::sorted_quantile(v, 0.5),
            detail::sorted_quantile(v, 0.75), v.back()};
}

// ---------------------------------------------------------------------------
// Ensemble generation

struct MemberOutcome {
    int index = 0;
    int shift = 0;
    bool success = false;
    std::optional<FitResult> fit;  ///< absent when the regression itself failed
    std::string failure;
    std::vector<double> curve;     ///< one value per forecast day, successful members only
};

struct EnsembleForecast {
    int issuance_day = 0;
    int horizon_days = 0;
    double sigma_obs = 0.0;
    std::vector<int> days;  ///< issuance_day + 1 .. issuance_day + horizon_days
    std::vector<MemberOutcome> members;
    std::vector<FanPoint> fan;
    int n_failed = 0;
    std::vector<std::string> warnings;

    /// Fan entry of a forecast day; nullopt outside the horizon.
    std::optional<FanPoint> fan_at(int day) const {
        if (days.empty() || day < days.front() || day > days.back()) return std::nullopt;
        return fan[static_cast<std::size_t>(day - days.front())];
    }
};

namespace detail {

inline MemberOutcome run_member(const CaseSeries& training, const PerturbationSpec& spec,
                                const EnsembleConfig& cfg, int j) {
    MemberOutcome m;
    m.index = j;
    m.shift = cfg.shift_of(j);
    try {
        const auto r = member_draws(spec, cfg.seed, j);
        const auto shifted = lag_shift(perturb_series(training, r), m.shift);
        m.fit = fit(shifted, cfg.issuance_day + m.shift, cfg.fit);
    } catch (const Error& e) {
        m.failure = e.what();
        return m;
    }
    if (!m.fit->valid_for_forecast) {
        m.failure = std::string(to_string(m.fit->status)) + ": " + m.fit->reason;
        return m;
    }
    const auto& sol = *m.fit->solution;
    for (int h = 1; h <= cfg.horizon_days; ++h) {
        m.curve.push_back(evaluate_at_day(sol, cfg.issuance_day + h));
    }
    m.success = true;
    return m;
}

} // namespace detail

/**
 * Build the ensemble forecast issued on config.issuance_day.
 *
 * Only days up to the issuance day are used for training. All draws depend on
 * (seed, member index, day) only, so the result does not depend on the thread
 * count. Throws EnsembleCollapse when fewer than config.min_successful()
 * members fit.
 */
inline EnsembleForecast generate(const CaseSeries& series, const EnsembleConfig& config) {
    config.validate();
    if (!series.contains(config.issuance_day)) {
        throw RangeError("issuance day " + std::to_string(config.issuance_day) + " outside the observed days [" +
                         std::to_string(series.first_day()) + ", " + std::to_string(series.last_day()) + "]");
    }
    const auto training = series.slice(series.first_day(), config.issuance_day);
    const auto spec = perturbation_spec(training, config.sigma_scale, config.noise);

    EnsembleForecast out;
    out.issuance_day = config.issuance_day;
    out.horizon_days = config.horizon_days;
    out.sigma_obs = spec.sigma_obs;
    out.warnings = spec.warnings;
    for (int h = 1; h <= config.horizon_days; ++h) out.days.push_back(config.issuance_day + h);
    out.members.resize(static_cast<std::size_t>(config.n_members));

    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(1, config.n_members)));
    if (threads <= 1) {
        for (int j = 0; j < config.n_members; ++j) out.members[j] = detail::run_member(training, spec, config, j);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int j = next++; j < config.n_members; j = next++) {
                    out.members[static_cast<std::size_t>(j)] = detail::run_member(training, spec, config, j);
                }
            });
        }
    }

    std::vector<std::string> reasons;
    std::vector<const MemberOutcome*> ok;
    for (const auto& m : out.members) {
        if (m.success) {
            ok.push_back(&m);
        } else {
            ++out.n_failed;
            reasons.push_back("member " + std::to_string(m.index + 1) + " (shift " + std::to_string(m.shift) +
                              "): " + m.failure);
        }
    }
    if (static_cast<int>(ok.size()) < config.min_successful()) {
        throw EnsembleCollapse("only " + std::to_string(ok.size()) + " of " + std::to_string(config.n_members) +
                                   " ensemble members produced a usable logistic fit on day " +
                                   std::to_string(config.issuance_day) + " (" +
                                   std::to_string(config.min_successful()) + " required)",
                               std::move(reasons));
    }
    std::vector<double> column(ok.size());
    for (std::size_t h = 0; h < out.days.size(); ++h) {
        for (std::size_t i = 0; i < ok.size(); ++i) column[i] = ok[i]->curve[h];
        out.fan.push_back(quantile_fan(column));
    }
    return out;
}

} // namespace epiens
