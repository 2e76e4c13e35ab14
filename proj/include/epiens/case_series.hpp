/**
 * @file case_series.hpp
 * @brief Dated cumulative confirmed-case counts for one country.
 */
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace epiens {

/**
 * A contiguous run of daily cumulative counts.
 *
 * Day labels are consecutive integers starting at first_day(). By convention
 * day 0 is the last zero-count day and day 1 the first non-zero report, but
 * lag-shifted copies may start at any integer (including negative ones).
 * Counts are stored as doubles so perturbed series share the type.
 */
class CaseSeries {
public:
    CaseSeries() = default;

    CaseSeries(std::string label, int first_day, std::vector<double> cumulative,
               std::vector<std::string> dates = {})
        : label_(std::move(label)), first_day_(first_day), cumulative_(std::move(cumulative)),
          dates_(std::move(dates)) {
        if (!dates_.empty() && dates_.size() != cumulative_.size()) {
            throw StructuralError("date column length does not match count column");
        }
        if (dates_.empty()) {
            dates_.assign(cumulative_.size(), std::string{});
        }
    }

    const std::string& label() const noexcept { return label_; }
    int first_day() const noexcept { return first_day_; }
    int last_day() const noexcept { return first_day_ + static_cast<int>(cumulative_.size()) - 1; }
    std::size_t size() const noexcept { return cumulative_.size(); }
    bool empty() const noexcept { return cumulative_.empty(); }

    bool contains(int day) const noexcept { return !empty() && day >= first_day_ && day <= last_day(); }

    double at(int day) const {
        if (!contains(day)) {
            throw RangeError("day " + std::to_string(day) + " outside series [" +
                             std::to_string(first_day_) + ", " + std::to_string(last_day()) + "]");
        }
        return cumulative_[static_cast<std::size_t>(day - first_day_)];
    }

    /// cumulative[day] - cumulative[day - 1]; requires day > first_day().
    double increment(int day) const { return at(day) - at(day - 1); }

    const std::vector<double>& cumulative() const noexcept { return cumulative_; }
    const std::vector<std::string>& dates() const noexcept { return dates_; }
    const std::string& date(int day) const {
        (void)at(day);
        return dates_[static_cast<std::size_t>(day - first_day_)];
    }

    /// Increments for days first_day()+1 .. last_day().
    std::vector<double> increments() const {
        std::vector<double> out;
        for (std::size_t i = 1; i < cumulative_.size(); ++i) {
            out.push_back(cumulative_[i] - cumulative_[i - 1]);
        }
        return out;
    }

    double max_cumulative() const noexcept {
        double m = 0.0;
        for (double v : cumulative_) m = v > m ? v : m;
        return m;
    }

    /// Days [from, to] clipped to the series.
    CaseSeries slice(int from, int to) const {
        from = from < first_day_ ? first_day_ : from;
        to = to > last_day() ? last_day() : to;
        if (from > to) {
            throw RangeError("empty slice of series " + label_);
        }
        auto b = static_cast<std::ptrdiff_t>(from - first_day_);
        auto e = static_cast<std::ptrdiff_t>(to - first_day_ + 1);
        return CaseSeries(label_, from, {cumulative_.begin() + b, cumulative_.begin() + e},
                          {dates_.begin() + b, dates_.begin() + e});
    }

    /// Same values under a new label or starting day.
    CaseSeries with_values(std::vector<double> cumulative) const {
        return CaseSeries(label_, first_day_, std::move(cumulative), dates_);
    }
    CaseSeries relabeled(int new_first_day) const {
        return CaseSeries(label_, new_first_day, cumulative_, dates_);
    }

    bool operator==(const CaseSeries&) const = default;

private:
    std::string label_;
    int first_day_ = 0;
    std::vector<double> cumulative_;
    std::vector<std::string> dates_;
};

} // namespace epiens
