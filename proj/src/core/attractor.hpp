#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vector_field.hpp"

namespace resilience {

struct AttractorComponent {
    enum class Kind { Point, Circle, Ball };
    Kind kind = Kind::Point;
    State center;
    double radius = 0.0;  // Circle and Ball only; Circle requires a planar center
};

// Reference attractor as a union of points, planar circles and closed balls.
// Points within conv_radius of the set count as "returned".
struct AttractorSpec {
    std::vector<AttractorComponent> components;
    double conv_radius = 1e-6;

    static AttractorSpec point(State p, double conv_radius = 1e-6);

    std::size_t dimension() const;
    double distance(std::span<const double> x) const;
    bool reached(std::span<const double> x) const { return distance(x) <= conv_radius; }
    bool is_single_point() const;
    const State& single_point() const;

    // Exact membership up to roundoff (distance below 1e-12).
    bool contains(std::span<const double> x) const { return distance(x) <= 1e-12; }

    // Representative points: circles and ball boundaries sampled every 360/per_curve degrees.
    std::vector<State> samples(std::size_t per_curve = 72) const;
};

}  // namespace resilience
