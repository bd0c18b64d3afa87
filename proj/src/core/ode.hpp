#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "linalg.hpp"
#include "vector_field.hpp"

namespace resilience {

struct IntegratorConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double max_time = 1e9;
    double initial_step = 0.0;  // 0 selects automatically
    double blowup_bound = 1e12;
    double fixed_step = 0.0;  // > 0 disables error control
    std::size_t max_steps = 50'000'000;
    bool store_dense = true;

    void validate() const;
};

// Quartic continuous extension of one Dormand-Prince step over [t0, t0 + h].
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    std::vector<double> coef;  // 5 blocks of N

    std::size_t dimension() const { return coef.size() / 5; }
    void eval(double t, std::span<double> out) const;
};

using DistanceFn = std::function<double(std::span<const double>)>;

struct EventSpec {
    enum class Kind { EnterBall, ExitSet, Threshold };
    enum class Direction { Any, Up, Down };

    Kind kind = Kind::Threshold;
    DistanceFn functional;  // distance to the centre set, inside margin, or scalar functional
    double level = 0.0;     // ball radius or threshold level
    Direction direction = Direction::Any;
    bool terminal = true;

    static EventSpec enter_ball(std::vector<State> centers, double radius);
    static EventSpec enter_ball(DistanceFn distance, double radius);
    // margin(x) > 0 inside the region; fires when the margin reaches zero.
    static EventSpec exit_set(DistanceFn margin);
    static EventSpec threshold(DistanceFn functional, double level, Direction dir = Direction::Any);

    // Signed so that the event is a zero crossing of g.
    double g(std::span<const double> x) const;
};

struct EventHit {
    std::size_t event = 0;
    double t = 0.0;
    State x;
};

enum class Termination { Horizon, Event, BlowUp };

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<DenseSegment> segments;  // empty unless store_dense
    std::vector<EventHit> events;
    Termination termination = Termination::Horizon;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    double final_time() const { return times.back(); }
    const State& final_state() const { return states.back(); }
    State at(double t) const;
};

struct StepView {
    double t0;
    double t1;  // may be an event time inside the step
    const DenseSegment& dense;
};

using StepObserver = std::function<void(const StepView&)>;

Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                     const IntegratorConfig& config = {}, std::span<const EventSpec> events = {},
                     const StepObserver& observer = {});

// Endpoint of the flow; throws NumericalError on blow-up.
State flow(const VectorField& field, std::span<const double> x0, double t, const IntegratorConfig& config = {});

enum class PropagatorMethod { Pade, Variational };

Matrix propagator(const Matrix& a, double t, PropagatorMethod method = PropagatorMethod::Pade);

}  // namespace resilience
