#include <cmath>
#include <numbers>

#include "doctest.h"
#include "errors.hpp"
#include "registry.hpp"
#include "transient.hpp"

using namespace resilience;

namespace {

BasinOracle logistic_oracle() {
    auto m = registry_get("logistic");
    return BasinOracle(m.field, m.attractor);
}

BasinOracle eps_oracle(double eps) {
    auto m = registry_get("epsilon_1d", {{"eps", eps}});
    return BasinOracle(m.field, m.attractor);
}

// Logistic flow with r = K = 1.
double logistic_flow(double x, double t) { return 1.0 / (1.0 + (1.0 - x) / x * std::exp(-t)); }

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("return time is the normalized integrated distance") {
    const auto o = logistic_oracle();
    for (double x0 : {0.2, 0.5, 0.9, 1.6}) {
        CAPTURE(x0);
        // integral of |1 - x(t)| dt over [0, inf) is |ln x0| for the logistic flow
        const double want = std::fabs(std::log(x0)) / std::fabs(1.0 - x0);
        const auto rt = return_time(o, State{x0});
        REQUIRE(rt.is_finite());
        CHECK(rt.value == doctest::Approx(want).epsilon(1e-8));
    }
    // approaches 1/ev near the attractor
    CHECK(return_time(o, State{1.0 - 1e-6}).value == doctest::Approx(1.0).epsilon(1e-5));
    const auto tiny = return_time(o, State{1.0 + 1e-12});
    CHECK(tiny.value == doctest::Approx(1.0));
    CHECK(tiny.has_flag("within stopping radius; linearized value"));
    CHECK_THROWS_AS(return_time(o, State{1.0}), DomainError);
    CHECK_THROWS_AS(return_time(o, State{-0.5}), DomainError);
}

TEST_CASE("mean return time averages per-sample values") {
    const auto o = logistic_oracle();
    const auto roi = RegionOfInterest::interval(0.3, 0.9);
    std::vector<double> per;
    const auto m = mean_return_time(o, roi, 64, 9, 2, {}, &per);
    REQUIRE(per.size() == 64);
    double sum = 0;
    for (std::size_t i = 0; i < per.size(); ++i) {
        const double x = roi.sample(9, i)[0];
        CHECK(per[i] == doctest::Approx(std::fabs(std::log(x)) / (1.0 - x)).epsilon(1e-7));
        sum += per[i];
    }
    CHECK(m.value == doctest::Approx(sum / 64).epsilon(1e-12));
    CHECK(m.samples == 64);
    const auto m1 = mean_return_time(o, roi, 64, 9, 1);
    CHECK(m1.value == m.value);
}

TEST_CASE("gradient barrier of the cubic model") {
    for (double e : {0.5, 0.8}) {
        CAPTURE(e);
        // V(-e) - V(0) and V(1/e) - V(0) for V' = -x (x - 1/e)(x + e)
        const double lower = std::pow(e, 4) / 12.0 + e * e / 6.0;
        const double upper = 1.0 / (12.0 * std::pow(e, 4)) + 1.0 / (6.0 * e * e);
        const auto w = gradient_resistance(eps_oracle(e));
        REQUIRE(w.is_finite());
        CHECK(w.value == doctest::Approx(std::min(lower, upper)).epsilon(1e-9));
        CHECK(w.extras.at("walker_ratio") == doctest::Approx(w.value / (e + 1.0 / e)).epsilon(1e-8));
        const auto lit = gradient_resistance(eps_oracle(e), GradientMode::Literal);
        CHECK(lit.value <= w.value + 1e-12);
    }
    const auto wl = gradient_resistance(logistic_oracle());
    // logistic: V(0) - V(1) = 1/6
    CHECK(wl.value == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("scalar intensity is the smallest side maximum of |f|") {
    const double e = 0.5;
    const auto o = eps_oracle(e);
    const auto b = scalar_basin(o);
    auto f = [e](double x) { return std::fabs(x * (x - 1.0 / e) * (x + e)); };
    double lo = 0, hi = 0;
    for (int k = 0; k <= 100000; ++k) {
        lo = std::max(lo, f(-e * k / 100000.0));
        hi = std::max(hi, f((1.0 / e) * k / 100000.0));
    }
    const auto i = intensity_scalar(o, b);
    CHECK(i.value == doctest::Approx(std::min(lo, hi)).epsilon(1e-8));
}

TEST_CASE("flow-kick verdicts bracket the fixed-point threshold") {
    const auto o = logistic_oracle();
    for (double tau : {0.5, 2.0}) {
        CAPTURE(tau);
        // the kick map x -> phi_tau(x) - k keeps a fixed point iff k <= max (phi_tau(x) - x)
        double kstar = 0;
        for (int k = 1; k < 200000; ++k) {
            const double x = k / 200000.0;
            kstar = std::max(kstar, logistic_flow(x, tau) - x);
        }
        const auto ok = flow_kick_verdict(o, {tau, {-0.9 * kstar}}, State{1.0});
        CHECK(ok.verdict == FlowKickOrbit::Verdict::Resilient);
        const auto bad = flow_kick_verdict(o, {tau, {-1.1 * kstar}}, State{1.0});
        CHECK(bad.verdict == FlowKickOrbit::Verdict::Escaped);
        CHECK(bad.escape_iteration >= 1);

        const std::vector<double> grid{tau};
        const State down{-1.0};
        const auto rb = resilience_boundary(o, grid, down);
        CHECK(rb.dt == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(rb.kappa_star[0] == doctest::Approx(kstar).epsilon(1e-5));
        CHECK(rb.kappa_star[0] <= rb.dt);
    }
    CHECK_THROWS_AS(flow_kick_verdict(o, {0.0, {-0.1}}, State{1.0}), DomainError);
}

TEST_CASE("resilience boundary is monotone in tau and parallel safe") {
    const auto o = logistic_oracle();
    const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 4.0};
    const State down{-1.0};
    const auto a = resilience_boundary(o, grid, down, 1);
    const auto b = resilience_boundary(o, grid, down, 3);
    CHECK(a.kappa_star == b.kappa_star);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(a.kappa_star[i] >= a.kappa_star[i - 1] - 1e-6);
    CHECK(a.area_cumulative.back() == doctest::Approx(a.area));
    CHECK(a.area >= 0.0);
}

TEST_CASE("Ornstein-Uhlenbeck mean first passage time") {
    // dX = -X dt + dW, upward passage 0 -> 1:
    // T = int_0^1 2 e^{y^2} int_{-inf}^y e^{-z^2} dz dy
    const double inf = std::numeric_limits<double>::infinity();
    const StationaryDensity d([](double x) { return -x; }, [](double) { return 1.0; }, -inf, inf, 0.0, 1e-6);
    const double want = simpson([](double y) { return std::exp(y * y) * std::sqrt(std::numbers::pi) * (1.0 + std::erf(y)); }, 0.0, 1.0);
    const auto t = escape_time(d, 0.0, 1.0);
    REQUIRE(t.is_finite());
    CHECK(t.value == doctest::Approx(want).epsilon(1e-6));
    // symmetric problem downward
    const auto t2 = escape_time(d, 0.0, -1.0);
    CHECK(t2.value == doctest::Approx(want).epsilon(1e-6));
    // density normalizes to one
    CHECK(d.mass(d.a(), d.b()) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(d.density(0.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-6));
}
