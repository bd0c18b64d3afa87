#include <cmath>
#include <numbers>

#include "basin.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "registry.hpp"

using namespace resilience;

namespace {

BasinOracle eps_oracle(double eps) {
    auto m = registry_get("epsilon_1d", {{"eps", eps}});
    return BasinOracle(m.field, m.attractor);
}

// x' = -x, y' = y(y^2 - 1): basin of the origin is the strip |y| < 1.
BasinOracle strip_oracle() {
    auto f = VectorField::from_expressions({"x", "y"}, {"-x", "y*(y^2 - 1)"}, {});
    return BasinOracle(f, AttractorSpec::point({0.0, 0.0}));
}

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("pointwise classification") {
    const auto o = eps_oracle(0.1);
    CHECK(o.classify(State{5.0}).verdict == Verdict::Inside);
    CHECK(o.classify(State{-0.05}).verdict == Verdict::Inside);
    CHECK(o.classify(State{10.5}).verdict == Verdict::Outside);
    CHECK(o.classify(State{-0.2}).verdict == Verdict::Outside);
    const auto s = strip_oracle();
    CHECK(s.classify(State{40.0, 0.9}).verdict == Verdict::Inside);
    CHECK(s.classify(State{0.0, 1.1}).verdict == Verdict::Outside);
}

TEST_CASE("scalar basin edges and distance indicators") {
    for (double eps : {0.1, 0.5, 1.0}) {
        CAPTURE(eps);
        const auto o = eps_oracle(eps);
        const auto b = scalar_basin(o);
        CHECK(b.lower == doctest::Approx(-eps).epsilon(1e-8));
        CHECK(b.upper == doctest::Approx(1.0 / eps).epsilon(1e-8));
        const auto dt = distance_to_threshold(o);
        REQUIRE(dt.is_finite());
        CHECK(dt.value == doctest::Approx(eps).epsilon(1e-8));
        const auto lw = latitude_width(o);
        REQUIRE(lw.is_finite());
        CHECK(lw.value == doctest::Approx(eps + 1.0 / eps).epsilon(1e-8));
        const double x0 = 0.3 * (1.0 / eps - eps);
        const auto pr = precariousness(o, State{x0});
        CHECK(pr.value == doctest::Approx(std::min(x0 + eps, 1.0 / eps - x0)).epsilon(1e-8));
    }
}

TEST_CASE("unbounded basin side") {
    const auto m = registry_get("allee", {{"L", 0.3}});
    const BasinOracle o(m.field, m.attractor);
    const auto b = scalar_basin(o);
    CHECK(b.lower == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(std::isinf(b.upper));
    CHECK(distance_to_threshold(o).value == doctest::Approx(0.7).epsilon(1e-8));
    CHECK(latitude_width(o).kind == IndicatorValue::Kind::PosInf);
}

TEST_CASE("precariousness sign convention") {
    ScalarBasin b;
    b.lower = -1.0;
    b.upper = 2.0;
    CHECK(b.precariousness(0.5) == 1.5);
    CHECK(b.precariousness(1.5) == 0.5);
    CHECK(b.precariousness(3.0) == -1.0);
    CHECK(b.precariousness(-4.0) == -3.0);
}

TEST_CASE("planar distance to threshold") {
    RaySearchConfig cfg;
    cfg.rays = 72;
    const auto dt = distance_to_threshold(strip_oracle(), cfg);
    REQUIRE(dt.is_finite());
    CHECK(dt.value == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(dt.has_flag("ray-sampled upper bound"));
}

TEST_CASE("region of interest geometry") {
    const auto box = RegionOfInterest::box({-1.0, 0.0}, {1.0, 3.0});
    CHECK(box.measure() == doctest::Approx(6.0));
    const auto ball = RegionOfInterest::ball({1.0, 1.0}, 2.0);
    CHECK(ball.measure() == doctest::Approx(4.0 * std::numbers::pi));
    for (std::uint64_t i = 0; i < 500; ++i) {
        CHECK(box.contains(box.sample(3, i)));
        CHECK(ball.contains(ball.sample(3, i)));
    }
    CHECK_FALSE(box.contains(State{1.5, 1.0}));
    CHECK(box.sample(3, 17) == box.sample(3, 17));
}

TEST_CASE("latitude volume against the exact basin fraction") {
    const auto o = eps_oracle(0.1);
    const auto roi = RegionOfInterest::interval(-1.0, 11.0);
    const auto lv = latitude_volume(o, roi, 2000, 5);
    REQUIRE(lv.is_finite());
    const double exact = 10.1 / 12.0;
    CHECK(lv.samples == 2000);
    CHECK(lv.undecided == 0);
    CHECK(std::fabs(lv.value - exact) < 4.0 * std::sqrt(exact * (1 - exact) / 2000));
    CHECK(lv.std_error == doctest::Approx(std::sqrt(lv.value * (1 - lv.value) / 2000)));

    std::vector<SampleRecord> dump;
    const auto lv4 = latitude_volume(o, roi, 2000, 5, 4, &dump);
    CHECK(lv4.value == lv.value);
    REQUIRE(dump.size() == 2000);
    std::size_t inside = 0;
    for (const auto& r : dump) {
        const bool in = r.x[0] > -0.1 && r.x[0] < 10.0;
        if (std::fabs(r.x[0] + 0.1) > 1e-6 && std::fabs(r.x[0] - 10.0) > 1e-6) CHECK(in == (r.verdict == Verdict::Inside));
        inside += r.verdict == Verdict::Inside;
    }
    CHECK(static_cast<double>(inside) / 2000 == lv.value);
    CHECK_THROWS_AS(latitude_volume(o, RegionOfInterest::half_line(0.0, 1), 10, 1), DomainError);
}

TEST_CASE("basin stability under a truncated Gaussian") {
    const auto o = eps_oracle(0.1);
    const auto sampler = truncated_gaussian_sampler({0.0}, {1.0}, {-3.0}, {3.0});
    const auto sb = basin_stability(o, sampler, 3000, 21);
    const double exact = (phi(3.0) - phi(-0.1)) / (phi(3.0) - phi(-3.0));
    CHECK(std::fabs(sb.value - exact) < 4.0 * std::sqrt(exact * (1 - exact) / 3000));
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto x = sampler(1, i);
        CHECK(x[0] >= -3.0);
        CHECK(x[0] <= 3.0);
    }
}

TEST_CASE("ray directions are unit vectors") {
    for (std::size_t n : {2u, 3u, 4u}) {
        const auto d = ray_directions(n, 50);
        CHECK_FALSE(d.empty());
        for (const auto& v : d) {
            double s = 0;
            for (double c : v) s += c * c;
            CHECK(s == doctest::Approx(1.0));
        }
    }
}
