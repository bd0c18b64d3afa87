#include <cmath>
#include <functional>

#include "doctest.h"
#include "errors.hpp"
#include "parameter.hpp"
#include "registry.hpp"

using namespace resilience;

namespace {

// Bistable cubic with a constant harvesting term c; basin of 1 is (0.2, inf) at c = 0.
VectorField harvest(double c = 0.0) {
    auto f = VectorField::from_expressions({"x"}, {"x*(1 - x)*(x - 0.2) - c"}, {{"c", c}});
    f.set_equilibria([](std::span<const double>) { return std::vector<State>{{0.0}, {0.2}, {1.0}}; });
    return f;
}

double g(double x) { return x * (1.0 - x) * (x - 0.2); }

double rk4(const std::function<double(double, double)>& f, double x, double t0, double t1, int steps) {
    const double h = (t1 - t0) / steps;
    double t = t0;
    for (int i = 0; i < steps; ++i, t += h) {
        const double k1 = f(t, x), k2 = f(t + h / 2, x + h / 2 * k1), k3 = f(t + h / 2, x + h / 2 * k2),
                     k4 = f(t + h, x + h * k3);
        x += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
        if (std::fabs(x) > 1e6) return x;
    }
    return x;
}

// Composite Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, int n = 200000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("distance to a saddle-node along a ray") {
    const auto f = VectorField::from_expressions({"x"}, {"a - x^2"}, {{"a", 1.0}});
    const auto d = distance_to_bifurcation(f, 1.0, {ParameterRay{{"a"}, {-1.0}, 5.0}});
    REQUIRE(d.is_finite());
    CHECK(d.value == doctest::Approx(1.0).epsilon(1e-9));
    // moving away from the fold never bifurcates
    const auto away = distance_to_bifurcation(f, 1.0, {ParameterRay{{"a"}, {1.0}, 5.0}});
    CHECK(away.kind == IndicatorValue::Kind::PosInf);
    // the minimum over rays is reported
    const auto both = distance_to_bifurcation(f, 1.0, {ParameterRay{{"a"}, {1.0}, 5.0}, ParameterRay{{"a"}, {-2.0}, 5.0}});
    CHECK(both.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("distance to a transcritical point in a registry model") {
    for (double L : {0.2, 0.6}) {
        const auto m = registry_get("allee", {{"L", L}});
        const auto d = distance_to_bifurcation(m.field, 1.0, {ParameterRay{{"L"}, {1.0}, 5.0}});
        CHECK(d.value == doctest::Approx(1.0 - L).epsilon(1e-8));
    }
}

TEST_CASE("resistance and elasticity of a carrying-capacity stress") {
    // logistic from 1 under K' = 0.8: x(t) = K' / (1 + (K' - 1) e^{-t})
    const auto m = registry_get("logistic");
    for (double T : {0.5, 2.0}) {
        const StressProtocol s{{{{"K", 0.8}}}, T};
        const double xT = 0.8 / (1.0 + (0.8 - 1.0) * std::exp(-T));
        const auto r = harrison_resistance(m.field, m.attractor, s);
        CHECK(r.value == doctest::Approx(1.0 - xT).epsilon(1e-9));
        // recovery rate f(u)/(u - 1) = -u is largest at the start
        const auto e = harrison_elasticity(m.field, m.attractor, s);
        CHECK(e.value == doctest::Approx(-xT).epsilon(1e-7));
        const auto rw = harrison_resistance(m.field, m.attractor, s, HarrisonMode::Weak);
        CHECK(rw.value == doctest::Approx(r.value).epsilon(1e-9));
    }
    CHECK_THROWS_AS(harrison_resistance(m.field, m.attractor, {{{{"K", 0.8}}}, 0.0}), DomainError);
    CHECK_THROWS_AS(harrison_resistance(m.field, m.attractor, {{}, 1.0}), DomainError);
}

TEST_CASE("resistance grows with stress duration") {
    const auto m = registry_get("logistic");
    double last = 0;
    for (double T : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double r = harrison_resistance(m.field, m.attractor, {{{{"K", 0.7}}}, T}).value;
        CHECK(r >= last);
        last = r;
    }
}

TEST_CASE("persistence under harvesting") {
    const BasinOracle o(harvest(), AttractorSpec::point({1.0}));
    const double c = 0.3;
    // time from 1 down to the threshold 0.2 under x' = g(x) - c
    const double want = simpson([c](double x) { return 1.0 / (c - g(x)); }, 0.2, 1.0);
    const auto p = persistence_intensity(o, {{"c", c}});
    REQUIRE(p.is_finite());
    CHECK(p.value == doctest::Approx(want).epsilon(1e-6));
    // weak harvesting keeps a stable state inside the basin
    const auto weak = persistence_intensity(o, {{"c", 0.01}});
    CHECK(weak.kind == IndicatorValue::Kind::PosInf);
}

TEST_CASE("persistence duration matches a bisection on an independent integrator") {
    const BasinOracle o(harvest(), AttractorSpec::point({1.0}));
    const double T = 5.0;
    auto end = [T](double c) { return rk4([c](double, double x) { return g(x) - c; }, 1.0, 0.0, T, 20000); };
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (end(mid) > 0.2 ? lo : hi) = mid;
    }
    const auto d = persistence_duration(o, "c", 1.0, T, 10.0);
    REQUIRE(d.is_finite());
    CHECK(d.value == doctest::Approx(lo).epsilon(1e-6));
}

TEST_CASE("ramp profiles") {
    const auto r = RampProfile::tanh(1.0, 3.0, 2.0);
    CHECK(r(0.0) == doctest::Approx(2.0));
    CHECK(r(-50.0) == doctest::Approx(1.0));
    CHECK(r(50.0) == doctest::Approx(3.0));
    for (double s : {-1.0, -0.1, 0.3, 2.0}) {
        const double fd = (r(s + 1e-6) - r(s - 1e-6)) / 2e-6;
        CHECK(r.derivative(s) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_NOTHROW(r.validate());
    const auto [s_lo, s_hi] = r.settle(1e-10);
    CHECK(std::fabs(r(-1.01 * s_lo) - 1.0) < 1e-10);
    CHECK(std::fabs(r(1.01 * s_hi) - 3.0) < 1e-10);
    CHECK(std::fabs(r(0.9 * s_hi) - 3.0) > 1e-10);
    const auto es = RampProfile::expression(1.0, 3.0, "(1 + tanh(2*s)) / 2").settle(1e-10);
    CHECK(es.second == doctest::Approx(s_hi).epsilon(1e-6));

    const auto e = RampProfile::expression(0.0, 1.0, "(1 + tanh(s)) / 2");
    CHECK(e(0.7) == doctest::Approx(0.5 * (1 + std::tanh(0.7))));
    CHECK_NOTHROW(e.validate());
    CHECK_THROWS_AS(RampProfile::expression(0.0, 1.0, "s").validate(), DomainError);
}

TEST_CASE("rate-induced tipping threshold") {
    // x' = (x + lam)^2 - 1 with a tanh ramp of lam from 0 to 3
    RTipProblem p{VectorField::from_expressions({"x"}, {"(x + lam)^2 - 1"}, {{"lam", 0.0}}), "lam",
                  RampProfile::tanh(0.0, 3.0, 1.0), {-1.0}};
    std::vector<RTipTrace> trace;
    const auto thr = rtip_threshold(p, {}, &trace);
    REQUIRE(thr.is_finite());
    CHECK_FALSE(trace.empty());

    // independent verdict: RK4 in the original frame, tipped if x leaves past the unstable branch
    auto tipped = [](double r) {
        const auto lam = [r](double t) { return 1.5 * (1.0 + std::tanh(r * t)); };
        const double t0 = -40.0 / r, t1 = 40.0 / r + 20.0;
        const double x = rk4([&](double t, double x) { const double y = x + lam(t); return y * y - 1.0; },
                             -1.0 - lam(t0), t0, t1, 400000);
        return !(std::fabs(x + 4.0) < 1e-3);
    };
    const double rs = thr.value;
    CHECK_FALSE(tipped(0.98 * rs));
    CHECK(tipped(1.02 * rs));

    const RTipSolver solver(p);
    CHECK(solver.future_equilibrium()[0] == doctest::Approx(-4.0));
    CHECK(solver.track(0.5 * rs).verdict == RTipOutcome::Verdict::Tracked);
    CHECK(solver.track(2.0 * rs).verdict != RTipOutcome::Verdict::Tracked);
    CHECK_THROWS_AS(solver.track(0.0), DomainError);
}

TEST_CASE("newton polish") {
    const auto f = VectorField::from_expressions({"x"}, {"x^3 - 2"}, {});
    const auto x = newton_equilibrium(f, {1.0});
    REQUIRE(x.has_value());
    CHECK((*x)[0] == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));
}
