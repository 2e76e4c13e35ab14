#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "epiens/dataio.hpp"
#include "epiens/diagnostics.hpp"
#include "epiens/fitting.hpp"

using namespace epiens;
using Catch::Approx;

namespace {

CaseSeries corrected(const char* name) { return qc_correct(bundled_dataset(name)).first; }

/// Normal equations in long double with Cramer's rule.
std::array<long double, 3> normal_equations(const std::vector<std::array<double, 3>>& x, const std::vector<double>& y) {
    long double a[3][3] = {}, b[3] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int r = 0; r < 3; ++r) {
            b[r] += static_cast<long double>(x[i][r]) * y[i];
            for (int c = 0; c < 3; ++c) a[r][c] += static_cast<long double>(x[i][r]) * x[i][c];
        }
    }
    auto det = [](long double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const long double d = det(a);
    std::array<long double, 3> out{};
    for (int k = 0; k < 3; ++k) {
        long double m[3][3];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] = c == k ? b[r] : a[r][c];
        }
        out[k] = det(m) / d;
    }
    return out;
}

CaseSeries synthetic(const LogisticParams& p, double e0, int days) {
    const auto s = derive_solution(p, e0, 1);
    std::vector<double> c{0.0};
    for (int d = 1; d <= days; ++d) c.push_back(evaluate_at_day(s, d));
    return CaseSeries("synthetic", 0, c);
}

} // namespace

TEST_CASE("least squares agrees with the normal equations") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::array<double, 3>> x;
        std::vector<double> y;
        for (int i = 0; i < 8 + trial; ++i) {
            const double e = 1000.0 * (i + 1) * (1.0 + 0.1 * u(rng));
            x.push_back({e, -e * e, 1.0});
            y.push_back(0.2 * e - 3e-5 * e * e + 40.0 + 30.0 * u(rng));
        }
        const auto got = detail::solve_ls3(x, y);
        const auto want = normal_equations(x, y);
        for (int k = 0; k < 3; ++k) {
            CHECK(got[k] == Approx(static_cast<double>(want[k])).epsilon(1e-7));
        }
    }
}

TEST_CASE("least squares rejects degenerate designs") {
    std::vector<std::array<double, 3>> x(5, {10.0, -100.0, 1.0});
    CHECK_THROWS_AS(detail::solve_ls3(x, {1, 2, 3, 4, 5}), DegenerateDesign);
    CHECK_THROWS_AS(detail::solve_ls3({{1, -1, 1}, {2, -4, 1}}, {1, 2}), SizeError);
}

TEST_CASE("noiseless synthetic series round trip") {
    const LogisticParams truth{0.4, 5e-6, 10.0};
    const auto s = synthetic(truth, 20.0, 60);
    const auto r = fit(s, 60);
    REQUIRE(r.valid_for_forecast);
    CHECK(r.solution->E_inf == Approx(asymptote(truth)).epsilon(0.01));
    CHECK(r.params.alpha == Approx(truth.alpha).epsilon(0.05));
    CHECK(r.params.beta == Approx(truth.beta).epsilon(0.05));
    CHECK(r.params.gamma == Approx(truth.gamma).epsilon(0.05));
}

TEST_CASE("plain regression is biased only in the source term") {
    const LogisticParams truth{0.4, 5e-6, 10.0};
    const auto s = synthetic(truth, 20.0, 60);
    FitOptions plain;
    plain.correction_passes = 0;
    const auto r = fit(s, 60, plain);
    CHECK(r.solution->E_inf == Approx(asymptote(truth)).epsilon(0.01));
    CHECK(r.params.alpha == Approx(truth.alpha).epsilon(0.01));
    CHECK(std::abs(r.params.gamma - truth.gamma) > 1.0);
    // the corrected fit is exact up to the integrator
    const auto c = fit(s, 60);
    CHECK(c.params.gamma == Approx(truth.gamma).epsilon(1e-3));
    CHECK(c.residual_rms < 1e-3);
}

TEST_CASE("fit is equivariant under rescaling the counts") {
    const auto base = corrected("china");
    const auto r0 = fit(base, 45);
    for (double c : {0.37, 3.0, 1234.5}) {
        std::vector<double> scaled;
        for (double v : base.cumulative()) scaled.push_back(c * v);
        const auto r = fit(base.with_values(scaled), 45);
        CHECK(r.params.alpha == Approx(r0.params.alpha).epsilon(1e-9));
        CHECK(r.params.beta == Approx(r0.params.beta / c).epsilon(1e-9));
        CHECK(r.params.gamma == Approx(r0.params.gamma * c).epsilon(1e-9));
        CHECK(r.solution->E_inf == Approx(r0.solution->E_inf * c).epsilon(1e-9));
        CHECK(r.residual_rms == Approx(r0.residual_rms * c).epsilon(1e-9));
    }
}

TEST_CASE("an extra day exactly on the fitted parabola changes nothing") {
    const auto s = corrected("italy");
    FitOptions plain;
    plain.correction_passes = 0;
    const auto r = fit(s, 25, plain);
    // Append day 26 so that the new row has zero residual: solve the midpoint
    // relation dE = rate((E25 + E26) / 2) for E26 by fixed-point iteration.
    const double e25 = s.at(25);
    double e26 = s.at(26);
    for (int it = 0; it < 200; ++it) e26 = e25 + r.params.rate(0.5 * (e25 + e26));
    auto values = s.slice(0, 25).cumulative();
    values.push_back(e26);
    const auto r2 = fit(CaseSeries("x", 0, values), 26, plain);
    CHECK(r2.params.alpha == Approx(r.params.alpha).epsilon(1e-7));
    CHECK(r2.params.beta == Approx(r.params.beta).epsilon(1e-7));
    CHECK(r2.params.gamma == Approx(r.params.gamma).epsilon(1e-7));
    CHECK(r2.residual_ss == Approx(r.residual_ss).epsilon(1e-7));
}

TEST_CASE("China fits") {
    const auto s = corrected("china");
    const auto full = fit(s, 45);
    REQUIRE(full.valid_for_forecast);
    CHECK(full.first_day == 1);
    CHECK(full.n_points == 44);
    CHECK(full.solution->origin_day == 1);
    CHECK(full.solution->E0 == s.at(1));
    CHECK(full.solution->E_inf == Approx(68790.0).epsilon(0.05));
    const auto qfull = fit_quality(full, s, 1, 45);
    CHECK(qfull.rmse >= 800.0);
    CHECK(qfull.rmse <= 2000.0);

    const auto early = fit(s, 25);
    REQUIRE(early.valid_for_forecast);
    const auto q = fit_quality(early, s, 1, 45);
    CHECK(q.n_days == 45);
    CHECK(*q.correlation >= 0.99);
    CHECK(q.rmse >= 1000.0);
    CHECK(q.rmse <= 3000.0);
}

TEST_CASE("previous-day abscissa is available") {
    const auto s = corrected("china");
    FitOptions o;
    o.abscissa = Abscissa::Previous;
    const auto r = fit(s, 45, o);
    REQUIRE(r.solution);
    CHECK(r.solution->E_inf == Approx(fit(s, 45).solution->E_inf).epsilon(0.1));
}

TEST_CASE("fits before the turn are not usable") {
    const auto uk = fit(corrected("uk"), 26);
    CHECK_FALSE(uk.valid_for_forecast);
    CHECK(uk.status != FitStatus::Valid);
    CHECK_FALSE(uk.reason.empty());

    const auto italy = fit(corrected("italy"), 29);
    CHECK_FALSE(italy.valid_for_forecast);

    std::vector<double> c{0};
    for (int d = 1; d < 20; ++d) c.push_back(std::round(10 * std::pow(1.25, d)));
    CHECK_FALSE(fit(CaseSeries("exp", 0, c), 19).valid_for_forecast);
}

TEST_CASE("an unusable fit implies the series is not ready") {
    // Checked on the bundled issuance days. Italy day 31 is the one case where
    // the fit is already usable a day before the readiness rule fires.
    struct Case {
        const char* name;
        int day;
    };
    for (auto [name, day] : {Case{"china", 22}, Case{"china", 25}, Case{"italy", 29}, Case{"italy", 30},
                             Case{"italy", 32}, Case{"south_korea", 20}, Case{"south_korea", 30},
                             Case{"south_korea", 33}, Case{"uk", 26}}) {
        const auto s = corrected(name).slice(0, day);
        const auto r = fit(s, day);
        const auto v = readiness(s);
        INFO(name << " day " << day);
        if (!v.ready) CHECK_FALSE(r.valid_for_forecast);
    }
    const auto italy31 = corrected("italy").slice(0, 31);
    CHECK(fit(italy31, 31).valid_for_forecast);
    CHECK_FALSE(readiness(italy31).ready);
}

TEST_CASE("fit input checks") {
    const CaseSeries tiny("t", 0, {0, 0, 0, 1, 2, 4, 7});
    CHECK_THROWS_AS(fit(tiny, 6), SizeError);
    CHECK_THROWS_AS(fit(tiny, -1), SizeError);
    const auto s = corrected("china");
    const auto r = fit(s, 45);
    CHECK_THROWS_AS(fit_quality(r, s, 10, 50), RangeError);
    CHECK_THROWS_AS(fit_quality(r, s, 20, 10), RangeError);
    FitResult empty;
    CHECK_THROWS_AS(fit_quality(empty, s, 1, 10), ValueError);
}

TEST_CASE("quality of a perfect forecast") {
    const auto s = synthetic({0.3, 1e-5, 5.0}, 10.0, 40);
    const auto r = fit(s, 40);
    REQUIRE(r.solution);
    const auto model = [&] {
        std::vector<double> c{0.0};
        for (int d = 1; d <= 40; ++d) c.push_back(evaluate_at_day(*r.solution, d));
        return CaseSeries("m", 0, c);
    }();
    const auto q = fit_quality(r, model, 1, 40);
    CHECK(q.rmse == Approx(0.0).margin(1e-9));
    CHECK(*q.correlation == Approx(1.0));
}
