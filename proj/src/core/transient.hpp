#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "basin.hpp"
#include "quadrature.hpp"

namespace resilience {

struct ReturnTimeConfig {
    double eps_stop = 1e-10;  // stop once the distance to the attractor drops below this
    IntegratorConfig integrator{};
    double horizon_scale = 10.0;  // multiple of the oracle horizon
};

IndicatorValue return_time(const BasinOracle& oracle, std::span<const double> x_p, const ReturnTimeConfig& cfg = {});

IndicatorValue mean_return_time(const BasinOracle& oracle, const RegionOfInterest& roi, std::size_t n_samples,
                                std::uint64_t seed, std::size_t workers = 1, const ReturnTimeConfig& cfg = {},
                                std::vector<double>* per_sample = nullptr);

enum class GradientMode { Barrier, Literal };

// Scalar fields only; V' = -f. Reports the Walker ratio W/L_w in extras["walker_ratio"] when L_w is finite.
IndicatorValue gradient_resistance(const BasinOracle& oracle, GradientMode mode = GradientMode::Barrier);

struct DisturbancePattern {
    double tau = 1.0;
    State kappa;
};

struct FlowKickConfig {
    std::size_t max_iters = 2000;
    double margin = 1e-8;
    double converge_tol = 1e-10;
    IntegratorConfig integrator{};
};

struct FlowKickOrbit {
    enum class Verdict { Resilient, Escaped, Undecided };
    Verdict verdict = Verdict::Undecided;
    std::size_t escape_iteration = 0;  // 1-based, valid when escaped
    std::vector<State> states;         // post-kick states
    std::string reason;
};

const char* flow_kick_name(FlowKickOrbit::Verdict v);

// Caches basin data shared by repeated verdicts on the same oracle.
class FlowKick {
public:
    explicit FlowKick(const BasinOracle& oracle, FlowKickConfig cfg = {});

    FlowKickOrbit verdict(const DisturbancePattern& pattern, std::span<const double> a0) const;
    const BasinOracle& oracle() const noexcept { return oracle_; }
    const FlowKickConfig& config() const noexcept { return cfg_; }
    const std::optional<ScalarBasin>& scalar() const noexcept { return scalar_; }

private:
    const BasinOracle& oracle_;
    FlowKickConfig cfg_;
    std::optional<ScalarBasin> scalar_;
};

FlowKickOrbit flow_kick_verdict(const BasinOracle& oracle, const DisturbancePattern& pattern,
                                std::span<const double> a0, const FlowKickConfig& cfg = {});

struct ResilienceBoundary {
    std::vector<double> tau;
    std::vector<double> kappa_star;  // kick magnitude at the resilient/escaped transition
    std::vector<double> area_cumulative;
    double dt = 0.0;
    double area = 0.0;  // integral of (DT - kappa_star) over the tau grid
    double normalized_area = 0.0;
};

ResilienceBoundary resilience_boundary(const BasinOracle& oracle, const std::vector<double>& tau_grid,
                                       std::span<const double> kick_direction, std::size_t workers = 1,
                                       const FlowKickConfig& cfg = {}, double tolerance = 1e-6);

// Scalar intensity of attraction from the basin interval.
IndicatorValue intensity_scalar(const BasinOracle& oracle, const ScalarBasin& basin);

// Stationary density of dX = f dt + sqrt(nu) dW on (lower, upper), truncated delta away from
// each edge (at -1/delta or 1/delta for infinite edges).
class StationaryDensity {
public:
    StationaryDensity(ScalarFn drift, ScalarFn nu, double lower, double upper, double x_ref, double delta = 1e-6);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    double delta() const noexcept { return delta_; }
    StationaryDensity with_delta(double delta) const;

    double drift(double x) const { return drift_(x); }
    double nu(double x) const;
    // 2 * integral of f/nu from x to y.
    double potential_difference(double x, double y) const;
    double density(double x) const;
    double mass(double lo, double hi) const;

    // Integral of exp(U(z) - U(y)) / nu(z) for z between y and edge.
    double relative_mass(double y, double edge) const;

private:
    ScalarFn drift_, nu_;
    double lower_, upper_, x_ref_, delta_;
    double a_ = 0.0, b_ = 0.0;
    double log_norm_ = 0.0;
};

// tau_1 for x0 < x, tau_2 for x0 > x.
IndicatorValue escape_time(const StationaryDensity& density, double x0, double x);

}  // namespace resilience
