#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "basin.hpp"
#include "expr.hpp"

namespace resilience {

using ParamMap = std::map<std::string, double>;

struct ParameterRay {
    std::vector<std::string> params;
    State direction;  // normalized internally
    double rho_max = 10.0;
};

// Continues the attracting root x_star of a scalar field along each ray; +inf (flagged) if no
// bifurcation is detected within rho_max.
IndicatorValue distance_to_bifurcation(const VectorField& field, double x_star, const std::vector<ParameterRay>& rays,
                                       double step = 0.0);

struct StressProtocol {
    std::vector<ParamMap> lambdas;  // perturbed parameter sets
    double duration = 1.0;          // stress period [0, T]
};

enum class HarrisonMode { Reference, Weak };

IndicatorValue harrison_resistance(const VectorField& field, const AttractorSpec& attractor,
                                   const StressProtocol& protocol, HarrisonMode mode = HarrisonMode::Reference);
IndicatorValue harrison_elasticity(const VectorField& field, const AttractorSpec& attractor,
                                   const StressProtocol& protocol, HarrisonMode mode = HarrisonMode::Reference);

// Longest stress duration at fixed perturbed parameters keeping the attractor in its basin.
IndicatorValue persistence_intensity(const BasinOracle& oracle, const ParamMap& lambda, double horizon = 0.0);

// Largest |lambda - lambda0| along `param` (sign of `direction`) keeping the attractor in its
// basin over [0, T]; inadmissible parameter values count as violations.
IndicatorValue persistence_duration(const BasinOracle& oracle, const std::string& param, double direction,
                                    double duration, double rho_max = 1e3, double tolerance = 1e-9);

class RampProfile {
public:
    enum class Shape { Tanh, Expression };

    // gamma(s) = lam0 + (lam_inf - lam0) * (1 + tanh(scale * s)) / 2
    static RampProfile tanh(double lam0, double lam_inf, double scale = 1.0);
    // gamma(s) = lam0 + (lam_inf - lam0) * e(s) with e rising from 0 to 1; `scale` sets the check window.
    static RampProfile expression(double lam0, double lam_inf, const std::string& source, double scale = 1.0);

    Shape shape() const noexcept { return shape_; }
    double lam0() const noexcept { return lam0_; }
    double lam_inf() const noexcept { return lam_inf_; }
    double scale() const noexcept { return scale_; }
    double operator()(double s) const;
    double derivative(double s) const;

    // Throws DomainError unless the profile settles at both ends (checked at s = +-30/scale).
    void validate() const;
    // Smallest s0 with |gamma(-s) - lam0| < tol and |gamma(s) - lam_inf| < tol for all s >= s0.
    std::pair<double, double> settle(double tol = 1e-10) const;

private:
    Shape shape_ = Shape::Tanh;
    double lam0_ = 0.0, lam_inf_ = 0.0, scale_ = 1.0;
    std::optional<Expression> expr_;
};

struct RTipOutcome {
    enum class Verdict { Tracked, Tipped, BlowUp };
    Verdict verdict = Verdict::Tracked;
    State terminal;
    double escape_time = std::numeric_limits<double>::quiet_NaN();
};

const char* rtip_name(RTipOutcome::Verdict v);

struct RTipProblem {
    VectorField field;
    std::string param;
    RampProfile ramp;
    State x_start;  // attracting equilibrium at lam0 (polished by Newton)
    double eps_conv = 1e-6;
    IntegratorConfig integrator{};
};

class RTipSolver {
public:
    // Throws DomainError("not applicable: tips for all r") when the continued equilibrium
    // loses stability or disappears along the ramp image.
    explicit RTipSolver(RTipProblem problem);

    RTipOutcome track(double r) const;
    const State& past_equilibrium() const noexcept { return x_past_; }
    const State& future_equilibrium() const noexcept { return x_future_; }

private:
    RTipProblem p_;
    State x_past_, x_future_;
    double t_settle_ = 0.0;
    double s0_ = 0.0, s1_ = 0.0;
};

RTipOutcome rtip_track(const RTipProblem& problem, double r);

struct RTipTrace {
    double r;
    RTipOutcome outcome;
};

struct RTipThresholdConfig {
    double r_start = 1e-3;
    double r_max = 1e6;
    double rel_width = 1e-6;
    std::size_t monotone_checks = 8;
};

IndicatorValue rtip_threshold(const RTipProblem& problem, const RTipThresholdConfig& cfg = {},
                              std::vector<RTipTrace>* trace = nullptr);

// Newton polish of an equilibrium; nullopt if the iteration fails.
std::optional<State> newton_equilibrium(const VectorField& field, const State& guess);

}  // namespace resilience
