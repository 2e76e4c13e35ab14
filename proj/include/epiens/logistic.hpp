/**
 * @file logistic.hpp
 * @brief The logistic growth model dE/dt = alpha*E - beta*E^2 + gamma.
 *
 * Provides the parameter container, the derived closed-form coefficients,
 * evaluation of the analytic trajectory, the doubling time, and a classical
 * Runge-Kutta integrator used to validate the closed form.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace epiens {

struct LogisticParams {
    double alpha = 0.0;  ///< linear growth rate, 1/day
    double beta = 0.0;   ///< quadratic damping, 1/(day*cases)
    double gamma = 0.0;  ///< constant source, cases/day

    /// Right-hand side of the rate equation.
    double rate(double e) const noexcept { return alpha * e - beta * e * e + gamma; }

    bool operator==(const LogisticParams&) const = default;
};

/// Coefficients of the analytic trajectory, anchored at origin_day (t = 0).
struct LogisticSolution {
    double S = 0.0;      ///< cases/day
    double a = 0.0;      ///< 1/day
    double E_inf = 0.0;  ///< asymptote, cases
    double C1 = 0.0;
    double C2 = 0.0;     ///< 1/day
    double E0 = 0.0;     ///< value at t = 0, cases
    int origin_day = 0;

    bool operator==(const LogisticSolution&) const = default;
};

/// Positive root of beta*E^2 - alpha*E - gamma = 0.
inline double asymptote(const LogisticParams& p) {
    if (!(p.beta > 0.0)) {
        throw ModelError(ModelErrorKind::NotLogistic, "beta must be positive (beta = " + std::to_string(p.beta) + ")");
    }
    const double h = p.alpha / (2.0 * p.beta);
    const double disc = h * h + p.gamma / p.beta;
    if (!(disc >= 0.0)) {
        throw ModelError(ModelErrorKind::NoRealAsymptote, "alpha^2/(4 beta^2) + gamma/beta < 0");
    }
    return h + std::sqrt(disc);
}

/// Case count at which growth is fastest (d2E/dt2 = 0).
inline double inflection_level(const LogisticParams& p) { return p.alpha / (2.0 * p.beta); }

inline LogisticSolution derive_solution(const LogisticParams& p, double E0, int origin_day) {
    LogisticSolution s;
    s.E_inf = asymptote(p);
    if (!(E0 < s.E_inf)) {
        throw ModelError(ModelErrorKind::SaturatedStart,
                         "initial value " + std::to_string(E0) + " is not below the asymptote " +
                             std::to_string(s.E_inf));
    }
    s.S = p.gamma;
    s.a = p.beta * s.E_inf;
    s.C1 = (E0 + s.S / s.a) / (s.E_inf - E0);
    s.C2 = s.a + s.S / s.E_inf;
    s.E0 = E0;
    s.origin_day = origin_day;
    return s;
}

/// E(t) with t in days since origin_day.
inline double evaluate(const LogisticSolution& s, double t) {
    const double damp = 1.0 / (1.0 + s.C1 * std::exp(s.C2 * t));
    return s.E_inf * (1.0 - damp * (1.0 + s.S / (s.a * s.E_inf)));
}

/// E(day - origin_day), i.e. evaluation on the series' own day axis.
inline double evaluate_at_day(const LogisticSolution& s, double day) { return evaluate(s, day - s.origin_day); }

inline double evaluate_normalized(const LogisticSolution& s, double t) { return evaluate(s, t) / s.E_inf; }

/**
 * Doubling time ln(2) / (alpha + gamma/E).
 *
 * Note the quadratic term is deliberately absent, so this is the doubling time
 * of the linear-plus-source growth only.
 */
inline double doubling_time(const LogisticParams& p, double E) {
    if (!(E > 0.0)) {
        throw ModelError(ModelErrorKind::UndefinedDoublingTime, "E must be positive");
    }
    const double denom = p.alpha + p.gamma / E;
    if (!(denom > 0.0)) {
        throw ModelError(ModelErrorKind::UndefinedDoublingTime, "alpha + gamma/E is not positive");
    }
    return std::numbers::ln2 / denom;
}

struct Trajectory {
    std::vector<double> t;
    std::vector<double> e;
};

/// Classical RK4 on the rate equation. The final step is shortened to land on t_end.
inline Trajectory integrate_ode(const LogisticParams& p, double E0, double t_end, double step) {
    if (!(step > 0.0)) {
        throw ValueError("integration step must be positive");
    }
    Trajectory out;
    double t = 0.0;
    double e = E0;
    out.t.push_back(t);
    out.e.push_back(e);
    const auto n = static_cast<long long>(std::ceil(t_end / step - 1e-9));
    for (long long i = 0; i < n; ++i) {
        const double h = std::min(step, t_end - t);
        const double k1 = p.rate(e);
        const double k2 = p.rate(e + 0.5 * h * k1);
        const double k3 = p.rate(e + 0.5 * h * k2);
        const double k4 = p.rate(e + h * k3);
        e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (i + 1 == n) ? t_end : t + h;
        out.t.push_back(t);
        out.e.push_back(e);
    }
    return out;
}

} // namespace epiens
