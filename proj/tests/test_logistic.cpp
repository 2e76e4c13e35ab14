#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "epiens/logistic.hpp"

using namespace epiens;
using Catch::Approx;

TEST_CASE("solution constants, pure logistic") {
    const auto s = derive_solution({1.0, 0.5, 0.0}, 0.5, 0);
    CHECK(s.E_inf == Approx(2.0));
    CHECK(s.S == 0.0);
    CHECK(s.a == Approx(1.0));
    CHECK(s.C1 == Approx(1.0 / 3.0));
    CHECK(s.C2 == Approx(1.0));
    CHECK(evaluate(s, 0.0) == Approx(0.5));
}

TEST_CASE("solution constants with a source term") {
    const auto s = derive_solution({1.0, 1.0, 2.0}, 1.0, 0);
    CHECK(s.E_inf == Approx(2.0));
    CHECK(s.a == Approx(2.0));
    CHECK(s.S == Approx(2.0));
    CHECK(s.C2 == Approx(3.0));
    CHECK(s.C1 == Approx(2.0));
    CHECK(evaluate(s, 0.0) == Approx(1.0));
    CHECK(evaluate(s, 50.0) == Approx(2.0));
}

TEST_CASE("asymptote errors") {
    CHECK_THROWS_AS(asymptote({1.0, 0.0, 1.0}), ModelError);
    try {
        asymptote({1.0, -1.0, 1.0});
        FAIL("expected NotLogistic");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelErrorKind::NotLogistic);
    }
    try {
        asymptote({1.0, 1.0, -1.0});
        FAIL("expected NoRealAsymptote");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelErrorKind::NoRealAsymptote);
    }
    try {
        derive_solution({1.0, 0.5, 0.0}, 2.0, 0);
        FAIL("expected SaturatedStart");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelErrorKind::SaturatedStart);
    }
}

TEST_CASE("doubling time") {
    CHECK(doubling_time({std::numbers::ln2, 0.0, 0.0}, 100.0) == Approx(1.0));
    CHECK(doubling_time({0.3, 0.0, 0.0}, 5.0) == Approx(2.3104906).epsilon(1e-6));
    // the source term shortens it
    CHECK(doubling_time({0.3, 0.0, 30.0}, 100.0) == Approx(std::numbers::ln2 / 0.6));
    CHECK_THROWS_AS(doubling_time({0.0, 0.0, 0.0}, 10.0), ModelError);
    CHECK_THROWS_AS(doubling_time({-0.1, 0.0, 1.0}, 100.0), ModelError);
}

TEST_CASE("inflection level") {
    CHECK(inflection_level({0.4, 0.002, 0.0}) == Approx(100.0));
}

TEST_CASE("closed form matches RK4 over random parameters") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> alpha(0.05, 0.6);
    std::uniform_real_distribution<double> log_einf(2.0, 6.0);
    std::uniform_real_distribution<double> frac_gamma(0.0, 0.05);
    std::uniform_real_distribution<double> frac_e0(0.001, 0.5);
    int tested = 0;
    while (tested < 100) {
        const double a = alpha(rng);
        const double target = std::pow(10.0, log_einf(rng));
        const double beta = a / target;
        const double gamma = frac_gamma(rng) * a * target;
        const LogisticParams p{a, beta, gamma};
        const double e0 = frac_e0(rng) * asymptote(p);
        const auto s = derive_solution(p, e0, 0);
        const double t_end = 8.0 / s.C2;
        const auto traj = integrate_ode(p, e0, t_end, 0.01 / s.C2);
        double worst = 0.0;
        for (std::size_t i = 0; i < traj.t.size(); ++i) {
            worst = std::max(worst, std::abs(evaluate(s, traj.t[i]) - traj.e[i]) / traj.e[i]);
        }
        CHECK(worst < 1e-5);
        ++tested;
    }
}

TEST_CASE("closed form solves the rate equation") {
    const LogisticParams p{0.3, 1e-5, 50.0};
    const auto s = derive_solution(p, 200.0, 4);
    for (double t = 0.0; t < 60.0; t += 0.7) {
        const double h = 1e-4;
        const double slope = (evaluate(s, t + h) - evaluate(s, t - h)) / (2 * h);
        CHECK(slope == Approx(p.rate(evaluate(s, t))).epsilon(1e-6));
    }
    CHECK(evaluate_at_day(s, 4.0) == Approx(200.0));
    CHECK(evaluate_normalized(s, 1e4) == Approx(1.0));
}

TEST_CASE("trajectory is monotone and bounded") {
    const auto s = derive_solution({0.25, 2e-6, 100.0}, 50.0, 0);
    double prev = evaluate(s, 0.0);
    for (int t = 1; t < 200; ++t) {
        const double v = evaluate(s, t);
        CHECK(v >= prev);
        CHECK(v <= s.E_inf * (1 + 1e-12));
        prev = v;
    }
}

TEST_CASE("integrator bookkeeping") {
    const auto tr = integrate_ode({0.2, 0.001, 0.0}, 1.0, 1.05, 0.1);
    CHECK(tr.t.front() == 0.0);
    CHECK(tr.t.back() == Approx(1.05));
    CHECK(tr.e.size() == tr.t.size());
    CHECK_THROWS_AS(integrate_ode({0.2, 0.001, 0.0}, 1.0, 1.0, 0.0), ValueError);
}
