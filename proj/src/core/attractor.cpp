#include "attractor.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"

namespace resilience {

namespace {

double norm_diff(std::span<const double> x, const State& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double d = x[i] - c[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

AttractorSpec AttractorSpec::point(State p, double conv_radius) {
    AttractorSpec a;
    a.components.push_back({AttractorComponent::Kind::Point, std::move(p), 0.0});
    a.conv_radius = conv_radius;
    return a;
}

std::size_t AttractorSpec::dimension() const {
    if (components.empty()) throw DomainError("attractor has no components");
    return components.front().center.size();
}

double AttractorSpec::distance(std::span<const double> x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : components) {
        double r = norm_diff(x, c.center);
        double d = r;
        if (c.kind == AttractorComponent::Kind::Circle) d = std::fabs(r - c.radius);
        if (c.kind == AttractorComponent::Kind::Ball) d = std::max(0.0, r - c.radius);
        best = std::min(best, d);
    }
    return best;
}

bool AttractorSpec::is_single_point() const {
    return components.size() == 1 && components.front().kind == AttractorComponent::Kind::Point;
}

const State& AttractorSpec::single_point() const {
    if (!is_single_point()) throw DomainError("attractor is not a single equilibrium point");
    return components.front().center;
}

std::vector<State> AttractorSpec::samples(std::size_t per_curve) const {
    std::vector<State> out;
    for (const auto& c : components) {
        if (c.kind == AttractorComponent::Kind::Point) {
            out.push_back(c.center);
            continue;
        }
        const std::size_t n = c.center.size();
        if (c.kind == AttractorComponent::Kind::Ball) out.push_back(c.center);
        if (n == 2) {
            for (std::size_t k = 0; k < per_curve; ++k) {
                double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(per_curve);
                out.push_back({c.center[0] + c.radius * std::cos(th), c.center[1] + c.radius * std::sin(th)});
            }
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (double s : {-1.0, 1.0}) {
                    State p = c.center;
                    p[i] += s * c.radius;
                    out.push_back(p);
                }
        }
    }
    return out;
}

}  // namespace resilience
