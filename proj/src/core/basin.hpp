#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "attractor.hpp"
#include "indicator_value.hpp"
#include "ode.hpp"

namespace resilience {

enum class Verdict { Inside, Outside, Undecided };

const char* verdict_name(Verdict v);

struct Classification {
    Verdict verdict = Verdict::Undecided;
    double time_to_decision = 0.0;
    std::string diagnostic;
};

class BasinOracle {
public:
    BasinOracle(VectorField field, AttractorSpec attractor);

    const VectorField& field() const noexcept { return field_; }
    const AttractorSpec& attractor() const noexcept { return attractor_; }
    std::size_t dimension() const noexcept { return field_.dimension(); }

    // Stable documented equilibria outside the attractor act as competing attractors;
    // the remaining documented equilibria outside it are candidate boundary points.
    const std::vector<State>& competitors() const noexcept { return competitors_; }
    const std::vector<State>& equilibria() const noexcept { return equilibria_; }
    void set_competitors(std::vector<State> c) { competitors_ = std::move(c); }
    void set_equilibria(std::vector<State> e);

    double horizon() const noexcept { return horizon_; }
    void set_horizon(double h) { horizon_ = h; }
    double search_radius() const noexcept { return search_radius_; }
    void set_search_radius(double r) { search_radius_ = r; }
    const IntegratorConfig& integrator() const noexcept { return integrator_; }
    void set_integrator(const IntegratorConfig& c) { integrator_ = c; }

    Classification classify(std::span<const double> x0, double horizon_scale = 1.0) const;
    // Re-tests an undecided point once with a doubled horizon.
    Classification classify_retry(std::span<const double> x0) const;
    // Looser integration tolerances; falls back to classify_retry when undecided.
    Classification classify_coarse(std::span<const double> x0) const;

    // Equilibria outside the attractor with inside points arbitrarily close (e.g. an
    // unstable node embedded in the basin).
    const std::vector<State>& isolated_boundary_points() const;

private:
    Classification classify_with(std::span<const double> x0, double horizon_scale,
                                 const IntegratorConfig& integrator) const;

    VectorField field_;
    AttractorSpec attractor_;
    std::vector<State> competitors_;
    std::vector<State> equilibria_;
    double horizon_ = 0.0;
    double search_radius_ = 1e3;
    IntegratorConfig integrator_;
    mutable std::optional<std::vector<State>> isolated_;
};

struct RaySearchConfig {
    std::size_t rays = 360;              // planar ray count; N >= 3 uses a Fibonacci sphere of this size
    std::size_t samples_per_curve = 36;  // attractor sampling for circles and balls
    double scan_start = 1e-3;
    double scan_factor = 1.5;
    double tolerance = 1e-9;
    bool refine_angle = true;
};

class RegionOfInterest {
public:
    enum class Shape { Box, Ball };

    static RegionOfInterest box(State lo, State hi);
    static RegionOfInterest interval(double lo, double hi) { return box({lo}, {hi}); }
    static RegionOfInterest half_line(double origin, int direction);
    static RegionOfInterest ball(State center, double radius);

    Shape shape() const noexcept { return shape_; }
    std::size_t dimension() const noexcept { return lo_.size(); }
    bool contains(std::span<const double> x) const;
    bool bounded() const;
    double measure() const;
    State sample(std::uint64_t seed, std::uint64_t index) const;
    const State& lo() const noexcept { return lo_; }
    const State& hi() const noexcept { return hi_; }
    double radius() const noexcept { return radius_; }

private:
    Shape shape_ = Shape::Box;
    State lo_, hi_;
    double radius_ = 0.0;
};

using DensitySampler = std::function<State(std::uint64_t seed, std::uint64_t index)>;

struct SampleRecord {
    std::uint64_t index = 0;
    State x;
    Verdict verdict = Verdict::Undecided;
    double time_to_decision = 0.0;
};

struct BoundaryHit {
    double s = 0.0;  // distance along the unit direction
    State point;
};

// First classification change along base + s*dir for s in (0, s_max]. nullopt if none
// is found; throws NumericalError on persistent undecided classifications.
std::optional<BoundaryHit> first_transition(const BasinOracle& oracle, std::span<const double> base,
                                            std::span<const double> dir, double s_max,
                                            const RaySearchConfig& cfg = {});

// Bisection between two points that classify differently.
BoundaryHit boundary_on_ray(const BasinOracle& oracle, std::span<const double> base, std::span<const double> dir,
                            double s_lo, double s_hi, double tolerance = 1e-9);

IndicatorValue distance_to_threshold(const BasinOracle& oracle, const RaySearchConfig& cfg = {},
                                     const RegionOfInterest* roi = nullptr);
IndicatorValue latitude_width(const BasinOracle& oracle, const RaySearchConfig& cfg = {});
IndicatorValue precariousness(const BasinOracle& oracle, std::span<const double> x0, const RaySearchConfig& cfg = {});
IndicatorValue latitude_volume(const BasinOracle& oracle, const RegionOfInterest& roi, std::size_t n_samples,
                               std::uint64_t seed, std::size_t workers = 1, std::vector<SampleRecord>* dump = nullptr);
IndicatorValue basin_stability(const BasinOracle& oracle, const DensitySampler& sampler, std::size_t n_samples,
                               std::uint64_t seed, std::size_t workers = 1, std::vector<SampleRecord>* dump = nullptr);

// Truncated Gaussian per coordinate by rejection on counter-based draws.
DensitySampler truncated_gaussian_sampler(State mean, State sigma, State lo, State hi);

// Basin of a scalar point attractor as the open interval (lower, upper); infinite ends are unbounded.
struct ScalarBasin {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double attractor = 0.0;

    bool inside(double x) const { return x > lower && x < upper; }
    double precariousness(double x) const;
};

ScalarBasin scalar_basin(const BasinOracle& oracle, const RaySearchConfig& cfg = {});

std::vector<State> ray_directions(std::size_t dimension, std::size_t count);

}  // namespace resilience
