/**
 * @file report.hpp
 * @brief JSON and plot-file renderings of fits, diagnostics and forecasts.
 */
#pragma once

#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "case_series.hpp"
#include "dataio.hpp"
#include "diagnostics.hpp"
#include "ensemble.hpp"
#include "fitting.hpp"
#include "logistic.hpp"
#include "verification.hpp"

namespace epiens {

using json = nlohmann::ordered_json;

namespace detail {

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

/// CSV/plot cell: shortest round-trip text, or `missing` when absent.
inline std::string cell(const std::optional<double>& v, const char* missing = "") {
    return v ? format_number(*v) : std::string(missing);
}

} // namespace detail

inline json to_json(const LogisticParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}};
}

inline json to_json(const LogisticSolution& s) {
    return {{"S", s.S},   {"a", s.a},   {"E_inf", s.E_inf},          {"C1", s.C1},
            {"C2", s.C2}, {"E0", s.E0}, {"origin_day", s.origin_day}};
}

inline json to_json(const QcReport& r) {
    json days = json::array();
    for (const auto& c : r.corrected_days) {
        days.push_back({{"day", c.day}, {"original", c.original}, {"replacement", c.replacement}, {"reason", c.reason}});
    }
    return {{"threshold_used", r.threshold_used}, {"corrected_days", days}};
}

inline json to_json(const ReadinessVerdict& v) {
    return {{"ready", v.ready},
            {"first_ready_day", detail::opt(v.first_ready_day)},
            {"consecutive_negative_days_required", v.consecutive_negative_days_required},
            {"explanation", v.explanation}};
}

inline json to_json(const FitResult& r) {
    json j = {{"params", to_json(r.params)},
              {"solution", r.solution ? to_json(*r.solution) : json(nullptr)},
              {"training_range", {r.first_day, r.last_day}},
              {"n_points", r.n_points},
              {"residual_rms", r.residual_rms},
              {"valid_for_forecast", r.valid_for_forecast},
              {"status", to_string(r.status)},
              {"reason", r.reason}};
    return j;
}

inline json to_json(const FitQuality& q) {
    return {{"rmse", q.rmse}, {"correlation", detail::opt(q.correlation)}, {"n_days", q.n_days}};
}

inline json to_json(const VerificationReport& r) {
    return {{"range", {r.first_day, r.last_day}},
            {"n_days", r.n_days},
            {"rmse", r.rmse},
            {"correlation", detail::opt(r.correlation)},
            {"minmax_coverage", detail::opt(r.minmax_coverage)},
            {"iqr_coverage", detail::opt(r.iqr_coverage)}};
}

inline json to_json(const FanPoint& f) {
    return {{"min", f.min}, {"q25", f.q25}, {"median", f.median}, {"q75", f.q75}, {"max", f.max}};
}

inline json to_json(const EnsembleForecast& f) {
    json fan = json::array();
    for (std::size_t i = 0; i < f.days.size(); ++i) {
        json p = {{"day", f.days[i]}};
        p.update(to_json(f.fan[i]));
        fan.push_back(std::move(p));
    }
    json members = json::array();
    for (const auto& m : f.members) {
        json mj = {{"member", m.index + 1}, {"shift", m.shift}, {"success", m.success}};
        if (m.fit) {
            mj["params"] = to_json(m.fit->params);
            mj["E_inf"] = m.fit->solution ? json(m.fit->solution->E_inf) : json(nullptr);
        }
        if (!m.success) mj["failure"] = m.failure;
        members.push_back(std::move(mj));
    }
    return {{"issuance_day", f.issuance_day},
            {"horizon_days", f.horizon_days},
            {"sigma_obs", f.sigma_obs},
            {"n_members", f.members.size()},
            {"n_failed", f.n_failed},
            {"warnings", f.warnings},
            {"fan", fan},
            {"members", members}};
}

/// Rebuild the fan part of a forecast written by to_json().
inline EnsembleForecast forecast_from_json(const json& j) {
    EnsembleForecast f;
    f.issuance_day = j.at("issuance_day").get<int>();
    f.horizon_days = j.at("horizon_days").get<int>();
    f.n_failed = j.value("n_failed", 0);
    for (const auto& p : j.at("fan")) {
        f.days.push_back(p.at("day").get<int>());
        f.fan.push_back({p.at("min").get<double>(), p.at("q25").get<double>(), p.at("median").get<double>(),
                         p.at("q75").get<double>(), p.at("max").get<double>()});
    }
    for (std::size_t i = 1; i < f.days.size(); ++i) {
        if (f.days[i] != f.days[i - 1] + 1) throw StructuralError("forecast fan days are not consecutive");
    }
    return f;
}

// ---------------------------------------------------------------------------
// Tabular outputs

inline std::string diagnostics_csv(const CaseSeries& series, const ReadinessVerdict& verdict) {
    const auto ds = derivatives(series);
    std::ostringstream os;
    os << "day,increment,second_diff,smoothed_increment,smoothed_second_diff,ready\n";
    for (std::size_t i = 0; i < ds.days.size(); ++i) {
        const bool ready = verdict.first_ready_day && ds.days[i] >= *verdict.first_ready_day;
        os << ds.days[i] << ',' << detail::cell(ds.first[i]) << ',' << detail::cell(ds.second[i]) << ','
           << detail::cell(ds.smoothed_first[i]) << ',' << detail::cell(ds.smoothed_second[i]) << ','
           << (ready ? 1 : 0) << '\n';
    }
    return os.str();
}

inline std::string fan_csv(const EnsembleForecast& f) {
    std::ostringstream os;
    os << "day,min,q25,median,q75,max\n";
    for (std::size_t i = 0; i < f.days.size(); ++i) {
        const auto& p = f.fan[i];
        os << f.days[i] << ',' << detail::format_number(p.min) << ',' << detail::format_number(p.q25) << ','
           << detail::format_number(p.median) << ',' << detail::format_number(p.q75) << ',' << detail::format_number(p.max) << '\n';
    }
    return os.str();
}

/// Long format: one row per successful member and forecast day.
inline std::string members_csv(const EnsembleForecast& f) {
    std::ostringstream os;
    os << "member,shift,day,value\n";
    for (const auto& m : f.members) {
        if (!m.success) continue;
        for (std::size_t i = 0; i < f.days.size(); ++i) {
            os << m.index + 1 << ',' << m.shift << ',' << f.days[i] << ',' << detail::format_number(m.curve[i]) << '\n';
        }
    }
    return os.str();
}

/**
 * Whitespace-separated table for gnuplot (`set datafile missing "?"`):
 * day, observation used for training, held-out observation, min, q25,
 * median, q75, max.
 */
inline std::string plot_data(const CaseSeries& series, const EnsembleForecast& f) {
    std::ostringstream os;
    os << "# day obs_used obs_heldout min q25 median q75 max\n";
    const int last = std::max(series.last_day(), f.days.empty() ? f.issuance_day : f.days.back());
    for (int d = series.first_day(); d <= last; ++d) {
        std::optional<double> used, held;
        if (series.contains(d)) (d <= f.issuance_day ? used : held) = series.at(d);
        os << d << ' ' << detail::cell(used, "?") << ' ' << detail::cell(held, "?");
        if (auto p = f.fan_at(d)) {
            os << ' ' << detail::format_number(p->min) << ' ' << detail::format_number(p->q25) << ' ' << detail::format_number(p->median)
               << ' ' << detail::format_number(p->q75) << ' ' << detail::format_number(p->max);
        } else {
            os << " ? ? ? ? ?";
        }
        os << '\n';
    }
    return os.str();
}

} // namespace epiens
