#include "transient.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "local_indicators.hpp"
#include "parallel.hpp"

namespace resilience {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double attractor_rate(const BasinOracle& oracle) {
    const AttractorSpec& a = oracle.attractor();
    if (!a.is_single_point()) return 0.0;
    LinearizedSystem l = LinearizedSystem::at_equilibrium(oracle.field(), a.single_point());
    if (!l.asymptotically_stable()) return 0.0;
    return characteristic_return_time(l).ev;
}

double scalar_f(const VectorField& f, double x) {
    const double xs[1] = {x};
    double dx[1];
    f.eval(0.0, xs, dx);
    return dx[0];
}

// Integral of fn from `from` toward `to` over pieces of geometrically growing width, so that
// mass concentrated near `from` is resolved even when `to` is far away.
double graded(const ScalarFn& fn, double from, double to) {
    if (from == to) return 0.0;
    const double sgn = to > from ? 1.0 : -1.0;
    const double span = std::fabs(to - from);
    double h = std::min(span, 1e-3 * (1.0 + std::fabs(from)));
    double pos = 0.0, total = 0.0;
    for (int k = 0; k < 200 && pos < span; ++k) {
        const double next = std::min(span, pos + h);
        const double piece = integrate_adaptive(fn, from + sgn * pos, from + sgn * next, 0.0, 1e-11).value;
        total += piece;
        const bool decaying = std::fabs(fn(from + sgn * next)) <= std::fabs(fn(from + sgn * pos));
        if (k > 8 && decaying && std::fabs(piece) <= 1e-17 * std::fabs(total)) break;
        pos = next;
        h *= 2.0;
    }
    return total;
}

}  // namespace

IndicatorValue return_time(const BasinOracle& oracle, std::span<const double> x_p, const ReturnTimeConfig& cfg) {
    if (!(cfg.eps_stop > 0.0)) throw DomainError("eps_stop must be positive");
    const AttractorSpec& att = oracle.attractor();
    const double d0 = att.distance(x_p);
    if (att.contains(x_p)) throw DomainError("state lies in the attractor");
    const double ev = attractor_rate(oracle);
    if (d0 <= cfg.eps_stop) {
        // Already inside the stopping radius: only the linearized tail remains.
        if (!(ev > 0.0)) throw DomainError("state lies within the stopping radius of a non-hyperbolic attractor");
        IndicatorValue out = IndicatorValue::finite(1.0 / ev);
        out.flag("within stopping radius; linearized value");
        return out;
    }
    const Classification c = oracle.classify_retry(x_p);
    if (c.verdict != Verdict::Inside) throw DomainError("state is not in the basin of attraction");

    const std::size_t n = x_p.size();
    const GaussRule& gl = gauss_legendre(5);
    double integral = 0.0;
    State buf(n);
    auto observer = [&](const StepView& s) {
        const double half = 0.5 * (s.t1 - s.t0), mid = 0.5 * (s.t1 + s.t0);
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            s.dense.eval(mid + half * gl.nodes[k], buf);
            integral += half * gl.weights[k] * att.distance(buf);
        }
    };
    IntegratorConfig ic = cfg.integrator;
    ic.store_dense = false;
    const double t_end = oracle.horizon() * cfg.horizon_scale;
    ic.max_time = std::max(ic.max_time, t_end);
    const EventSpec ev_stop =
        EventSpec::enter_ball([&att](std::span<const double> y) { return att.distance(y); }, cfg.eps_stop);
    Trajectory tr = integrate(oracle.field(), x_p, 0.0, t_end, ic, std::span<const EventSpec>(&ev_stop, 1), observer);
    if (tr.termination != Termination::Event) throw NumericalError("trajectory did not return within the horizon");
    IndicatorValue out = IndicatorValue::finite(0.0);
    if (ev > 0.0) {
        integral += cfg.eps_stop / ev;
    } else {
        out.flag("no linearized tail correction");
    }
    out.value = integral / d0;
    out.extras["hitting_time"] = tr.final_time();
    return out;
}

IndicatorValue mean_return_time(const BasinOracle& oracle, const RegionOfInterest& roi, std::size_t n_samples,
                                std::uint64_t seed, std::size_t workers, const ReturnTimeConfig& cfg,
                                std::vector<double>* per_sample) {
    if (n_samples == 0) throw DomainError("n_samples must be at least 1");
    std::vector<double> vals(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
        const State x = roi.sample(seed, i);
        try {
            vals[i] = return_time(oracle, x, cfg).value;
        } catch (const Error& e) {
            throw NumericalError("sample " + std::to_string(i) + " at " + format_double(x[0]) + ": " + e.what());
        }
    });
    double sum = 0.0;
    for (double v : vals) sum += v;
    const double mean = sum / static_cast<double>(n_samples);
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    IndicatorValue out = IndicatorValue::finite(mean);
    out.samples = n_samples;
    out.std_error = n_samples > 1 ? std::sqrt(ss / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples)) : 0.0;
    if (per_sample) *per_sample = std::move(vals);
    return out;
}

IndicatorValue gradient_resistance(const BasinOracle& oracle, GradientMode mode) {
    if (oracle.dimension() != 1) throw DomainError("gradient resistance requires a scalar field");
    const VectorField& field = oracle.field();
    const ScalarBasin basin = scalar_basin(oracle);
    const double a = basin.attractor;
    auto f = [&](double x) { return scalar_f(field, x); };
    // V(y) - V(a) with V' = -f.
    auto lift = [&](double y) { return -integrate_adaptive(f, a, y, 1e-15, 1e-13).value; };

    double w = kInf;
    if (mode == GradientMode::Barrier) {
        if (std::isfinite(basin.lower)) w = std::min(w, lift(basin.lower));
        if (std::isfinite(basin.upper)) w = std::min(w, lift(basin.upper));
    } else {
        std::vector<double> cands;
        for (double edge : {basin.lower, basin.upper}) {
            if (!std::isfinite(edge)) continue;
            cands.push_back(edge);
            const double reach = 10.0 * (1.0 + std::fabs(edge - a));
            const double far = edge < a ? edge - reach : edge + reach;
            for (int k = 0; k <= 2000; ++k) cands.push_back(edge + (far - edge) * k / 2000.0);
        }
        for (const auto& e : oracle.equilibria())
            if (!basin.inside(e[0])) cands.push_back(e[0]);
        for (double y : cands) w = std::min(w, lift(y));
    }
    IndicatorValue out =
        std::isfinite(w) ? IndicatorValue::finite(w) : IndicatorValue::pos_inf("basin unbounded on both sides");
    if (mode == GradientMode::Literal) out.flag("sampled complement");
    const IndicatorValue lw = latitude_width(oracle);
    if (lw.is_finite() && lw.value > 0.0 && out.is_finite()) out.extras["walker_ratio"] = out.value / lw.value;
    return out;
}

const char* flow_kick_name(FlowKickOrbit::Verdict v) {
    switch (v) {
        case FlowKickOrbit::Verdict::Resilient: return "resilient";
        case FlowKickOrbit::Verdict::Escaped: return "escaped";
        case FlowKickOrbit::Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

FlowKick::FlowKick(const BasinOracle& oracle, FlowKickConfig cfg) : oracle_(oracle), cfg_(std::move(cfg)) {
    if (cfg_.max_iters == 0) throw DomainError("max_iters must be at least 1");
    if (oracle.dimension() == 1) scalar_ = scalar_basin(oracle);
}

FlowKickOrbit FlowKick::verdict(const DisturbancePattern& pattern, std::span<const double> a0) const {
    if (!(pattern.tau > 0.0)) throw DomainError("flow time tau must be positive");
    const std::size_t n = oracle_.dimension();
    if (pattern.kappa.size() != n || a0.size() != n) throw DomainError("kick and start state must match the field");
    FlowKickOrbit orbit;
    State x(a0.begin(), a0.end());
    double min_margin = kInf;
    for (std::size_t j = 1; j <= cfg_.max_iters; ++j) {
        State y;
        try {
            y = flow(oracle_.field(), x, pattern.tau, cfg_.integrator);
        } catch (const NumericalError& e) {
            orbit.verdict = FlowKickOrbit::Verdict::Escaped;
            orbit.escape_iteration = j;
            orbit.reason = e.what();
            return orbit;
        }
        for (std::size_t i = 0; i < n; ++i) y[i] += pattern.kappa[i];
        orbit.states.push_back(y);
        if (scalar_) {
            const double p = scalar_->precariousness(y[0]);
            min_margin = std::min(min_margin, p);
            if (p <= cfg_.margin) {
                orbit.verdict = FlowKickOrbit::Verdict::Escaped;
                orbit.escape_iteration = j;
                return orbit;
            }
        } else {
            const Classification c = oracle_.classify_retry(y);
            if (c.verdict == Verdict::Outside) {
                orbit.verdict = FlowKickOrbit::Verdict::Escaped;
                orbit.escape_iteration = j;
                return orbit;
            }
            if (c.verdict == Verdict::Undecided) {
                orbit.reason = "post-kick state undecided: " + c.diagnostic;
                return orbit;
            }
        }
        double step = 0.0;
        for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::fabs(y[i] - x[i]));
        x = std::move(y);
        if (step < cfg_.converge_tol) {
            orbit.verdict = FlowKickOrbit::Verdict::Resilient;
            orbit.reason = "kick map converged";
            return orbit;
        }
    }
    if (!scalar_ || min_margin >= 10.0 * cfg_.margin) {
        orbit.verdict = FlowKickOrbit::Verdict::Resilient;
        orbit.reason = "margin sustained over max_iters";
    } else {
        orbit.reason = "orbit approached the boundary without converging";
    }
    return orbit;
}

FlowKickOrbit flow_kick_verdict(const BasinOracle& oracle, const DisturbancePattern& pattern,
                                std::span<const double> a0, const FlowKickConfig& cfg) {
    return FlowKick(oracle, cfg).verdict(pattern, a0);
}

ResilienceBoundary resilience_boundary(const BasinOracle& oracle, const std::vector<double>& tau_grid,
                                       std::span<const double> kick_direction, std::size_t workers,
                                       const FlowKickConfig& cfg, double tolerance) {
    if (tau_grid.empty()) throw DomainError("tau grid is empty");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (!(tau_grid[i] > 0.0)) throw DomainError("tau grid values must be positive");
        if (i > 0 && !(tau_grid[i] > tau_grid[i - 1])) throw DomainError("tau grid must be increasing");
    }
    const double dn = norm(kick_direction);
    if (!(dn > 0.0) || kick_direction.size() != oracle.dimension()) throw DomainError("invalid kick direction");
    State dir(kick_direction.begin(), kick_direction.end());
    for (double& v : dir) v /= dn;
    if (!oracle.attractor().is_single_point()) throw DomainError("resilience boundary needs a point attractor");
    const State a0 = oracle.attractor().single_point();

    ResilienceBoundary out;
    const IndicatorValue dt = distance_to_threshold(oracle);
    if (!dt.is_finite()) throw DomainError("distance to threshold is not finite");
    out.dt = dt.value;
    out.tau = tau_grid;
    out.kappa_star.assign(tau_grid.size(), 0.0);

    const FlowKick fk(oracle, cfg);
    FlowKickConfig doubled = cfg;
    doubled.max_iters *= 2;
    const FlowKick fk2(oracle, doubled);
    auto escapes = [&](double tau, double m) {
        DisturbancePattern p{tau, dir};
        for (double& v : p.kappa) v *= m;
        FlowKickOrbit o = fk.verdict(p, a0);
        if (o.verdict == FlowKickOrbit::Verdict::Undecided) o = fk2.verdict(p, a0);
        if (o.verdict == FlowKickOrbit::Verdict::Undecided)
            throw NumericalError("undecided flow-kick verdict at tau " + format_double(tau) + ", kick " + format_double(m));
        return o.verdict == FlowKickOrbit::Verdict::Escaped;
    };
    parallel_for(tau_grid.size(), workers, [&](std::size_t i) {
        double lo = 0.0, hi = 2.0 * out.dt;
        if (!escapes(tau_grid[i], hi)) {
            out.kappa_star[i] = hi;
            return;
        }
        while (hi - lo > tolerance) {
            const double mid = 0.5 * (lo + hi);
            if (escapes(tau_grid[i], mid))
                hi = mid;
            else
                lo = mid;
        }
        out.kappa_star[i] = 0.5 * (lo + hi);
    });
    out.area_cumulative.assign(tau_grid.size(), 0.0);
    for (std::size_t i = 1; i < tau_grid.size(); ++i) {
        const double g0 = out.dt - out.kappa_star[i - 1], g1 = out.dt - out.kappa_star[i];
        out.area_cumulative[i] = out.area_cumulative[i - 1] + 0.5 * (g0 + g1) * (tau_grid[i] - tau_grid[i - 1]);
    }
    out.area = out.area_cumulative.back();
    out.normalized_area = out.area / out.dt;
    return out;
}

IndicatorValue intensity_scalar(const BasinOracle& oracle, const ScalarBasin& basin) {
    if (oracle.dimension() != 1) throw DomainError("scalar intensity requires a scalar field");
    const VectorField& field = oracle.field();
    auto absf = [&](double x) { return std::fabs(scalar_f(field, x)); };
    const double a = basin.attractor;
    double best = kInf;
    bool unbounded_growth = false;
    for (double edge : {basin.lower, basin.upper}) {
        if (std::isfinite(edge)) {
            const double lo = std::min(a, edge), hi = std::max(a, edge);
            best = std::min(best, maximize_on_interval(absf, lo, hi, 2000, 1e-13).value);
            continue;
        }
        // Unbounded side: sup of |f| along the half-line, +inf if it keeps growing.
        const double sgn = std::isinf(edge) && edge > 0 ? 1.0 : -1.0;
        const double reach = oracle.search_radius();
        double side = 0.0, last = 0.0;
        std::size_t arg = 0;
        const std::size_t m = 4000;
        for (std::size_t k = 0; k <= m; ++k) {
            const double s = reach * std::pow(1e-9, 1.0 - static_cast<double>(k) / m);
            last = absf(a + sgn * s);
            if (last >= side) {
                side = last;
                arg = k;
            }
        }
        if (arg == m) {
            unbounded_growth = true;
            continue;
        }
        best = std::min(best, side);
    }
    if (!std::isfinite(best)) {
        IndicatorValue out = IndicatorValue::pos_inf(unbounded_growth ? "|f| unbounded on every escape side" : "");
        return out;
    }
    return IndicatorValue::finite(best);
}

StationaryDensity::StationaryDensity(ScalarFn drift, ScalarFn nu, double lower, double upper, double x_ref,
                                     double delta)
    : drift_(std::move(drift)), nu_(std::move(nu)), lower_(lower), upper_(upper), x_ref_(x_ref), delta_(delta) {
    if (!(delta > 0.0)) throw DomainError("truncation delta must be positive");
    if (!(lower < upper)) throw DomainError("density domain must satisfy lower < upper");
    a_ = std::isfinite(lower) ? lower + delta : -1.0 / delta;
    b_ = std::isfinite(upper) ? upper - delta : 1.0 / delta;
    if (!(x_ref > a_ && x_ref < b_)) throw DomainError("reference point must lie inside the truncated domain");
    for (int k = 0; k <= 1000; ++k) {
        const double s = static_cast<double>(k) / 1000.0;
        (void)this->nu(a_ + (b_ - a_) * s);
        (void)this->nu(x_ref_ + (k % 2 ? 1.0 : -1.0) * std::min(b_ - x_ref_, x_ref_ - a_) * s);
    }
    auto q = [&](double z) { return std::exp(potential_difference(x_ref_, z)) / this->nu(z); };
    const double z = graded(q, x_ref_, a_) * -1.0 + graded(q, x_ref_, b_);
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("stationary density is not normalizable");
    log_norm_ = std::log(z);
}

StationaryDensity StationaryDensity::with_delta(double delta) const {
    return StationaryDensity(drift_, nu_, lower_, upper_, x_ref_, delta);
}

double StationaryDensity::nu(double x) const {
    const double v = nu_(x);
    if (!(v > 0.0)) throw DomainError("noise variance must be positive, got " + format_double(v) + " at " + format_double(x));
    return v;
}

double StationaryDensity::potential_difference(double x, double y) const {
    return 2.0 * integrate_adaptive([&](double z) { return drift_(z) / nu(z); }, x, y, 1e-15, 1e-12).value;
}

double StationaryDensity::density(double x) const {
    if (x < a_ || x > b_) return 0.0;
    return std::exp(potential_difference(x_ref_, x) - log_norm_) / nu(x);
}

double StationaryDensity::mass(double lo, double hi) const {
    lo = std::max(lo, a_);
    hi = std::min(hi, b_);
    if (!(lo < hi)) return 0.0;
    auto p = [&](double z) { return density(z); };
    if (x_ref_ <= lo) return graded(p, lo, hi);
    if (x_ref_ >= hi) return -graded(p, hi, lo);
    return -graded(p, x_ref_, lo) + graded(p, x_ref_, hi);
}

double StationaryDensity::relative_mass(double y, double edge) const {
    auto g = [&](double z) { return std::exp(potential_difference(y, z)) / nu(z); };
    return std::fabs(graded(g, y, edge));
}

namespace {

double escape_integral(const StationaryDensity& d, double x0, double x) {
    if (x0 < d.a() || x0 > d.b()) throw DomainError("start point lies outside the truncated domain");
    if (x > x0) {
        const double hi = std::min(x, d.b());
        auto g = [&](double y) { return d.relative_mass(y, d.a()); };
        return 2.0 * integrate_adaptive(g, x0, hi, 0.0, 1e-10).value;
    }
    const double lo = std::max(x, d.a());
    auto g = [&](double y) { return d.relative_mass(y, d.b()); };
    return 2.0 * integrate_adaptive(g, lo, x0, 0.0, 1e-10).value;
}

}  // namespace

IndicatorValue escape_time(const StationaryDensity& density, double x0, double x) {
    if (x == x0) return IndicatorValue::finite(0.0);
    const double coarse = escape_integral(density, x0, x);
    const StationaryDensity fine_d = density.with_delta(density.delta() * 1e-3);
    const double fine = escape_integral(fine_d, x0, x);
    if (!std::isfinite(fine) || !std::isfinite(coarse) || fine > 10.0 * coarse) {
        IndicatorValue out = IndicatorValue::pos_inf("divergent under truncation refinement");
        out.extras["coarse"] = coarse;
        out.extras["fine"] = fine;
        return out;
    }
    IndicatorValue out = IndicatorValue::finite(fine);
    out.extras["coarse"] = coarse;
    out.extras["kind"] = x > x0 ? 1.0 : 2.0;
    return out;
}

}  // namespace resilience
