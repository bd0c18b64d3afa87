#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "linalg.hpp"
#include "ode.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

using namespace resilience;

namespace {

VectorField decay(double k) {
    return VectorField("decay", {"x"}, {"k"}, {k},
                       [](double, std::span<const double> x, std::span<const double> p, std::span<double> dx) {
                           dx[0] = -p[0] * x[0];
                       });
}

VectorField oscillator() {
    return VectorField("osc", {"q", "p"}, {}, {},
                       [](double, std::span<const double> x, std::span<const double>, std::span<double> dx) {
                           dx[0] = x[1];
                           dx[1] = -x[0];
                       });
}

}  // namespace

TEST_CASE("exponential decay matches the closed form") {
    const auto f = decay(0.7);
    for (double t : {0.1, 1.0, 5.0, 20.0}) {
        const auto x = flow(f, State{2.0}, t);
        CHECK(x[0] == doctest::Approx(2.0 * std::exp(-0.7 * t)).epsilon(1e-10));
    }
}

TEST_CASE("dense output agrees with the exact solution between steps") {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-12;
    const auto tr = integrate(oscillator(), State{1.0, 0.0}, 0.0, 10.0, cfg);
    CHECK(tr.termination == Termination::Horizon);
    CHECK(tr.final_time() == 10.0);
    for (double t = 0.05; t < 10.0; t += 0.37) {
        const auto x = tr.at(t);
        CHECK(std::fabs(x[0] - std::cos(t)) < 1e-8);
        CHECK(std::fabs(x[1] + std::sin(t)) < 1e-8);
    }
}

TEST_CASE("energy drift stays small over many periods") {
    const auto x = flow(oscillator(), State{0.0, 1.0}, 200.0 * std::numbers::pi);
    CHECK(std::fabs(x[0] * x[0] + x[1] * x[1] - 1.0) < 1e-8);
}

TEST_CASE("fixed step mode is fourth order or better") {
    auto err = [](double h) {
        IntegratorConfig c;
        c.fixed_step = h;
        return std::fabs(flow(decay(1.0), State{1.0}, 2.0, c)[0] - std::exp(-2.0));
    };
    const double e1 = err(0.2), e2 = err(0.1);
    CHECK(e1 / e2 > 15.0);
}

TEST_CASE("ball entry event is located on the exact crossing") {
    // x(t) = e^{-t}; enters the ball of radius 0.25 around 0 at t = ln 4
    const auto ev = EventSpec::enter_ball(std::vector<State>{{0.0}}, 0.25);
    const auto tr = integrate(decay(1.0), State{1.0}, 0.0, 50.0, {}, std::span<const EventSpec>(&ev, 1));
    REQUIRE(tr.termination == Termination::Event);
    REQUIRE(tr.events.size() == 1);
    CHECK(tr.events[0].t == doctest::Approx(std::log(4.0)).epsilon(1e-9));
    CHECK(tr.final_time() == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("threshold direction filters crossings") {
    // q = cos t crosses zero downward at pi/2, upward at 3pi/2
    auto q = [](std::span<const double> x) { return x[0]; };
    const auto up = EventSpec::threshold(q, 0.0, EventSpec::Direction::Up);
    const auto tr = integrate(oscillator(), State{1.0, 0.0}, 0.0, 10.0, {}, std::span<const EventSpec>(&up, 1));
    REQUIRE(tr.events.size() == 1);
    CHECK(tr.events[0].t == doctest::Approx(1.5 * std::numbers::pi).epsilon(1e-9));

    auto any = EventSpec::threshold(q, 0.0);
    any.terminal = false;
    const auto tr2 = integrate(oscillator(), State{1.0, 0.0}, 0.0, 10.0, {}, std::span<const EventSpec>(&any, 1));
    CHECK(tr2.events.size() == 3);
    CHECK(tr2.termination == Termination::Horizon);
}

TEST_CASE("finite-time blow-up is reported") {
    const VectorField sq("sq", {"x"}, {}, {}, [](double, std::span<const double> x, std::span<const double>, std::span<double> dx) {
        dx[0] = x[0] * x[0];
    });
    const auto tr = integrate(sq, State{1.0}, 0.0, 5.0);
    CHECK(tr.termination == Termination::BlowUp);
    CHECK(tr.final_time() < 1.0 + 1e-6);
    CHECK_THROWS_AS(flow(sq, State{1.0}, 5.0), NumericalError);
}

TEST_CASE("integrator config validation") {
    IntegratorConfig c;
    c.rel_tol = -1.0;
    CHECK_THROWS(c.validate());
    IntegratorConfig d;
    d.max_step = 0.0;
    CHECK_THROWS(d.validate());
    IntegratorConfig ok;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("matrix exponential and propagator") {
    // rotation generator: e^{tJ} = [[cos, sin], [-sin, cos]]
    Matrix j(2, 2);
    j << 0, 1, -1, 0;
    const Matrix e = expm(j * 0.8);
    CHECK(e(0, 0) == doctest::Approx(std::cos(0.8)).epsilon(1e-13));
    CHECK(e(0, 1) == doctest::Approx(std::sin(0.8)).epsilon(1e-13));
    CHECK(e(1, 0) == doctest::Approx(-std::sin(0.8)).epsilon(1e-13));

    // Jordan block: e^{tA} = e^{-t} [[1, t], [0, 1]]
    Matrix a(2, 2);
    a << -1, 1, 0, -1;
    for (double t : {0.1, 1.0, 7.0, 40.0}) {
        const Matrix p = propagator(a, t);
        const Matrix v = propagator(a, t, PropagatorMethod::Variational);
        CHECK(p(0, 1) == doctest::Approx(t * std::exp(-t)).epsilon(1e-11));
        CHECK(p(0, 0) == doctest::Approx(std::exp(-t)).epsilon(1e-11));
        CHECK((p - v).norm() < 1e-9 * (1.0 + p.norm()));
    }
}

TEST_CASE("norms, eigenvalues and Lyapunov solutions") {
    Matrix m(2, 2);
    m << 3, 0, 4, 5;
    // singular values of [[3,0],[4,5]] are sqrt(45) and sqrt(5)
    CHECK(spectral_norm(m) == doctest::Approx(std::sqrt(45.0)).epsilon(1e-13));
    Matrix a(2, 2);
    a << -1, 3, 0, -2;
    CHECK(max_real_eigenvalue(a) == doctest::Approx(-1.0));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
        const int n = 1 + k % 4;
        Matrix b(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) b(r, c) = g(rng);
        // shift into the stable half-plane
        const double shift = max_real_eigenvalue(b) + 0.5;
        b -= shift * Matrix::Identity(n, n);
        const Matrix s = Matrix::Identity(n, n);
        const Matrix c = lyapunov_solve(b, s);
        CHECK((b * c + c * b.transpose() + s).norm() < 1e-9 * (1.0 + c.norm()));
        CHECK((c - c.transpose()).norm() < 1e-9 * (1.0 + c.norm()));
    }
}

TEST_CASE("quadrature") {
    // n-point Gauss-Legendre integrates degree 2n-1 exactly
    for (std::size_t n : {2u, 5u, 10u, 20u}) {
        const int deg = static_cast<int>(2 * n - 1);
        const double got = gauss_legendre_integrate([deg](double x) { return std::pow(x, deg - 1) * (deg); }, 0.0, 1.5, n);
        CHECK(got == doctest::Approx(std::pow(1.5, deg)).epsilon(1e-12));
        double wsum = 0;
        for (double w : gauss_legendre(n).weights) wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    }
    const auto r = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-11));

    const auto ex = maximize_on_interval([](double x) { return x * std::exp(-x); }, 0.0, 10.0);
    CHECK(ex.x == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ex.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("counter RNG and parallel_for are order independent") {
    CHECK(counter_uniform(5, 17) == counter_uniform(5, 17));
    CHECK(counter_uniform(5, 17) != counter_uniform(6, 17));
    double mean = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean += counter_uniform(1, i);
    CHECK(mean / n == doctest::Approx(0.5).epsilon(0.02));

    std::vector<double> a(500), b(500);
    parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = counter_normal(9, i); });
    parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = counter_normal(9, i); });
    CHECK(a == b);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 4) throw NumericalError("x"); }), NumericalError);
}
