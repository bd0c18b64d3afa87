#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "local_indicators.hpp"
#include "registry.hpp"

using namespace resilience;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

// Largest singular value of a real 2x2 from the closed form.
double norm2x2(double a, double b, double c, double d) {
    const double s = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    return std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4.0 * det * det))));
}

// e^{tA} for A = [[-p, q], [0, -s]], p != s.
double upper_envelope(double p, double q, double s, double t) {
    const double e1 = std::exp(-p * t), e2 = std::exp(-s * t);
    return norm2x2(e1, q * (e1 - e2) / (p - s), 0.0, e2);
}

// ||(iw - A)^{-1}|| for A = [[-p, q], [0, -s]] via the complex Gram matrix.
double upper_resolvent(double p, double q, double s, double w) {
    using C = std::complex<double>;
    const C a(p, w), d(s, w);  // iw - A = [[p + iw, -q], [0, s + iw]]
    const C r00 = 1.0 / a, r11 = 1.0 / d, r01 = q / (a * d);
    const double g00 = std::norm(r00), g11 = std::norm(r01) + std::norm(r11);
    const C g01 = std::conj(r00) * r01;
    const double tr = g00 + g11, det = g00 * g11 - std::norm(g01);
    return std::sqrt(0.5 * (tr + std::sqrt(tr * tr - 4.0 * det)));
}

}  // namespace

TEST_CASE("normal matrices have no transient amplification") {
    const auto l = LinearizedSystem::from_matrix(mat2(-2.0, 0.0, 0.0, -0.5));
    const auto r = local_indicators(l);
    CHECK(r.ev == doctest::Approx(0.5));
    CHECK(r.t_r == doctest::Approx(2.0));
    CHECK(r.r0 == doctest::Approx(-0.5));
    CHECK_FALSE(r.reactive);
    CHECK(r.rho_max == 1.0);
    CHECK(r.t_max == 0.0);
    // C = diag(1/4, 1)
    CHECK(r.v_s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.i_s == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.v_d == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r.i_d == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("nonnormal upper triangular system") {
    const double p = 1.0, q = 10.0, s = 2.0;
    const auto r = local_indicators(LinearizedSystem::from_matrix(mat2(-p, q, 0.0, -s)));
    CHECK(r.ev == doctest::Approx(1.0));
    // symmetric part [[-1, 5], [5, -2]]
    CHECK(r.r0 == doctest::Approx(-1.5 + std::sqrt(25.25)).epsilon(1e-12));
    CHECK(r.reactive);

    double best = 0, best_t = 0;
    for (int k = 1; k <= 200000; ++k) {
        const double t = k * 5e-5;
        const double v = upper_envelope(p, q, s, t);
        if (v > best) best = v, best_t = t;
    }
    CHECK(r.rho_max == doctest::Approx(best).epsilon(1e-8));
    CHECK(r.t_max == doctest::Approx(best_t).epsilon(1e-3));

    double vd = 0;
    for (int k = 0; k <= 200000; ++k) vd = std::max(vd, upper_resolvent(p, q, s, k * 1e-4));
    CHECK(r.v_d == doctest::Approx(vd).epsilon(1e-7));
    CHECK(r.i_d == doctest::Approx(1.0 / vd).epsilon(1e-7));

    // C solves A C + C A^T = -I; entries from the 3x3 linear system by hand
    // c11: -2p c11 + 2q c12 = -1, c12: -(p+s) c12 + q c22 = 0, c22: -2s c22 = -1
    const double c22 = 1.0 / (2.0 * s);
    const double c12 = q * c22 / (p + s);
    const double c11 = (1.0 + 2.0 * q * c12) / (2.0 * p);
    const double vs = norm2x2(c11, c12, c12, c22);
    CHECK(r.v_s == doctest::Approx(vs).epsilon(1e-10));
    CHECK(r.i_s == doctest::Approx(1.0 / (2.0 * vs)).epsilon(1e-10));
}

TEST_CASE("amplification envelope starts at one and decays") {
    const auto l = LinearizedSystem::from_matrix(mat2(-1.0, 10.0, 0.0, -2.0));
    const std::vector<double> t{0.0, 0.5, 1.0, 30.0};
    const auto env = amplification_envelope(l, t);
    CHECK(env[0] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(env[i] == doctest::Approx(upper_envelope(1, 10, 2, t[i])).epsilon(1e-10));
}

TEST_CASE("time rescaling properties") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int k = 0; k < 25; ++k) {
        const int n = 2 + k % 3;
        Matrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = g(rng);
        a -= (max_real_eigenvalue(a) + 0.3) * Matrix::Identity(n, n);
        const double c = 3.0;
        const auto r1 = local_indicators(LinearizedSystem::from_matrix(a));
        const auto r2 = local_indicators(LinearizedSystem::from_matrix(c * a));
        CHECK(r2.ev == doctest::Approx(c * r1.ev).epsilon(1e-9));
        CHECK(r2.t_r == doctest::Approx(r1.t_r / c).epsilon(1e-9));
        CHECK(r2.r0 == doctest::Approx(c * r1.r0).epsilon(1e-9));
        CHECK(r2.rho_max == doctest::Approx(r1.rho_max).epsilon(1e-6));
        CHECK(r2.i_s == doctest::Approx(c * r1.i_s).epsilon(1e-8));
        CHECK(r2.i_d == doctest::Approx(c * r1.i_d).epsilon(1e-6));
        // general bounds
        CHECK(r1.rho_max >= 1.0);
        CHECK(r1.reactive == (r1.r0 > 0.0));
        CHECK((r1.rho_max > 1.0) == r1.reactive);
        CHECK(r1.i_d <= r1.ev * (1.0 + 1e-9));
    }
}

TEST_CASE("unstable linearizations are rejected") {
    const auto l = LinearizedSystem::from_matrix(mat2(0.1, 0.0, 0.0, -1.0));
    CHECK_FALSE(l.asymptotically_stable());
    CHECK_THROWS_AS(l.require_stable(), DomainError);
    CHECK_THROWS_AS(local_indicators(l), DomainError);
}

TEST_CASE("linearization at a registry equilibrium") {
    const double r = 0.4, L = 0.3;
    const auto m = registry_get("allee", {{"r", r}, {"L", L}});
    const auto l = LinearizedSystem::at_equilibrium(m.field, State{1.0});
    CHECK(l.source == LinearizedSystem::Source::Equilibrium);
    CHECK(characteristic_return_time(l).ev == doctest::Approx(r * (1.0 - L) / L).epsilon(1e-12));
}
