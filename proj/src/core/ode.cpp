#include "ode.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace resilience {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool crossed(EventSpec::Direction dir, double g_start, double g) {
    switch (dir) {
        case EventSpec::Direction::Down: return g <= 0.0;
        case EventSpec::Direction::Up: return g >= 0.0;
        case EventSpec::Direction::Any: return g == 0.0 || (g > 0.0) != (g_start > 0.0);
    }
    return false;
}

bool armed(EventSpec::Direction dir, double g) {
    switch (dir) {
        case EventSpec::Direction::Down: return g > 0.0;
        case EventSpec::Direction::Up: return g < 0.0;
        case EventSpec::Direction::Any: return g != 0.0;
    }
    return false;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("integrator tolerances must be positive");
    if (!(max_time > 0.0)) throw DomainError("integrator max_time must be positive");
    if (!(max_step > 0.0)) throw DomainError("integrator max_step must be positive");
    if (!(blowup_bound > 0.0)) throw DomainError("integrator blow-up bound must be positive");
}

void DenseSegment::eval(double t, std::span<double> out) const {
    const std::size_t n = dimension();
    const double th = h == 0.0 ? 0.0 : (t - t0) / h;
    const double th1 = 1.0 - th;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = coef[i] +
                 th * (coef[n + i] + th1 * (coef[2 * n + i] + th * (coef[3 * n + i] + th1 * coef[4 * n + i])));
    }
}

EventSpec EventSpec::enter_ball(std::vector<State> centers, double radius) {
    auto c = std::make_shared<std::vector<State>>(std::move(centers));
    return enter_ball(
        [c](std::span<const double> x) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : *c) {
                double s = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) s += (x[i] - p[i]) * (x[i] - p[i]);
                best = std::min(best, s);
            }
            return std::sqrt(best);
        },
        radius);
}

EventSpec EventSpec::enter_ball(DistanceFn distance, double radius) {
    EventSpec e;
    e.kind = Kind::EnterBall;
    e.functional = std::move(distance);
    e.level = radius;
    e.direction = Direction::Down;
    return e;
}

EventSpec EventSpec::exit_set(DistanceFn margin) {
    EventSpec e;
    e.kind = Kind::ExitSet;
    e.functional = std::move(margin);
    e.direction = Direction::Down;
    return e;
}

EventSpec EventSpec::threshold(DistanceFn functional, double level, Direction dir) {
    EventSpec e;
    e.kind = Kind::Threshold;
    e.functional = std::move(functional);
    e.level = level;
    e.direction = dir;
    return e;
}

double EventSpec::g(std::span<const double> x) const {
    switch (kind) {
        case Kind::EnterBall: return functional(x) - level;
        case Kind::ExitSet: return functional(x);
        case Kind::Threshold: return functional(x) - level;
    }
    return 0.0;
}

State Trajectory::at(double t) const {
    if (segments.empty()) throw DomainError("trajectory has no dense output");
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const DenseSegment& s) { return v < s.t0; });
    const DenseSegment& seg = it == segments.begin() ? segments.front() : *(it - 1);
    State out(seg.dimension());
    seg.eval(t, out);
    return out;
}

Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                     const IntegratorConfig& config, std::span<const EventSpec> events,
                     const StepObserver& observer) {
    config.validate();
    const std::size_t n = field.dimension();
    if (x0.size() != n) throw DomainError("initial state has wrong dimension");
    if (!all_finite(x0)) throw DomainError("initial state is not finite");
    if (!(t1 > t0)) throw DomainError("integration span must be non-degenerate and forward in time");
    const double t_end = std::min(t1, t0 + config.max_time);

    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.emplace_back(x0.begin(), x0.end());

    std::vector<double> g_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        g_prev[e] = events[e].g(x0);
        const bool starts_inside = events[e].kind != EventSpec::Kind::Threshold && g_prev[e] <= 0.0;
        if (starts_inside) {
            traj.events.push_back({e, t0, State(x0.begin(), x0.end())});
            if (events[e].terminal) {
                traj.termination = Termination::Event;
                return traj;
            }
        }
    }

    std::vector<double> y(x0.begin(), x0.end()), y1(n), yt(n), err(n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    DenseSegment seg;
    seg.coef.resize(5 * n);
    std::vector<double> probe(n);

    double t = t0;
    const double y0_scale = 1.0 + max_abs(y);
    field.eval(t, y, k1);
    if (!all_finite(k1)) throw NumericalError("vector field is not finite at the initial state");

    const bool fixed = config.fixed_step > 0.0;
    const double hmax = std::min(config.max_step, t_end - t0);
    double h = 0.0;
    if (fixed) {
        h = config.fixed_step;
    } else if (config.initial_step > 0.0) {
        h = std::min(config.initial_step, hmax);
    } else {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double sk = config.abs_tol + config.rel_tol * std::fabs(y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, hmax);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * k1[i];
        field.eval(t + h, yt, k2);
        double der2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double sk = config.abs_tol + config.rel_tol * std::fabs(y[i]);
            der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
        }
        der2 = std::isfinite(der2) ? std::sqrt(der2) / h : 0.0;
        double der12 = std::max(der2, std::sqrt(dnf));
        double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        h = std::min({100.0 * h, h1, hmax});
    }

    double facold = 1e-4;
    bool last_rejected = false;
    std::size_t steps = 0;

    auto stage = [&](double tt, std::span<double> out) {
        field.eval(tt, yt, out);
    };

    while (t < t_end) {
        if (++steps > config.max_steps) throw NumericalError("integrator exceeded the maximum number of steps");
        bool last = false;
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }
        const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t));
        if (!fixed && h < hmin) {
            // Step collapse during large growth signals finite-time blow-up.
            if (max_abs(y) > std::min(1e-3 * config.blowup_bound, 1e3 * y0_scale)) {
                traj.termination = Termination::BlowUp;
                break;
            }
            throw StiffnessError("step size underflow at t=" + format_double(t) + " (stiffness failure)");
        }

        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * a21 * k1[i];
        stage(t + c2 * h, k2);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        stage(t + c3 * h, k3);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        stage(t + c4 * h, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        stage(t + c5 * h, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double tph = last ? t_end : t + h;
        stage(tph, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        field.eval(tph, y1, k7);

        const bool finite = all_finite(y1) && all_finite(k7);
        double errn = 0.0;
        if (finite && !fixed) {
            for (std::size_t i = 0; i < n; ++i) {
                double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double sk = config.abs_tol + config.rel_tol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
                errn += (e / sk) * (e / sk);
            }
            errn = std::sqrt(errn / static_cast<double>(n));
        }
        if (!finite) {
            if (fixed) throw NumericalError("non-finite state in fixed-step integration");
            h *= 0.25;
            last_rejected = true;
            ++traj.rejected_steps;
            continue;
        }

        if (!fixed && errn > 1.0) {
            double fac11 = std::pow(errn, 0.17);
            h /= std::min(5.0, fac11 / 0.9);
            last_rejected = true;
            ++traj.rejected_steps;
            continue;
        }

        // Accepted step: build the continuous extension.
        for (std::size_t i = 0; i < n; ++i) {
            const double ydiff = y1[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            seg.coef[i] = y[i];
            seg.coef[n + i] = ydiff;
            seg.coef[2 * n + i] = bspl;
            seg.coef[3 * n + i] = ydiff - h * k7[i] - bspl;
            seg.coef[4 * n + i] =
                h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        seg.t0 = t;
        seg.h = h;
        ++traj.accepted_steps;

        // Event scan at the midpoint and the end of the step.
        double stop_t = tph;
        std::size_t stop_event = events.size();
        std::vector<std::pair<double, std::size_t>> hits;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const EventSpec& ev = events[e];
            if (!armed(ev.direction, g_prev[e]) && ev.direction != EventSpec::Direction::Any) {
                g_prev[e] = ev.g(y1);
                continue;
            }
            double lo = t, hi = -1.0;
            const double tm = t + 0.5 * h;
            seg.eval(tm, probe);
            double gm = ev.g(probe);
            if (crossed(ev.direction, g_prev[e], gm)) {
                hi = tm;
            } else {
                double g1 = ev.g(y1);
                if (crossed(ev.direction, g_prev[e], g1)) {
                    lo = tm;
                    hi = tph;
                }
            }
            if (hi < 0.0) {
                g_prev[e] = ev.g(y1);
                continue;
            }
            for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
                double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                seg.eval(mid, probe);
                if (crossed(ev.direction, g_prev[e], ev.g(probe)))
                    hi = mid;
                else
                    lo = mid;
            }
            hits.emplace_back(hi, e);
            g_prev[e] = ev.g(y1);
        }
        std::sort(hits.begin(), hits.end());
        for (const auto& [te, e] : hits) {
            if (te > stop_t) break;
            State xe(n);
            seg.eval(te, xe);
            traj.events.push_back({e, te, xe});
            if (events[e].terminal) {
                stop_t = te;
                stop_event = e;
                break;
            }
        }

        if (observer) observer(StepView{t, stop_t, seg});
        if (config.store_dense) traj.segments.push_back(seg);

        if (stop_event < events.size()) {
            traj.times.push_back(stop_t);
            traj.states.push_back(traj.events.back().x);
            traj.termination = Termination::Event;
            return traj;
        }

        t = tph;
        y.swap(y1);
        k1.swap(k7);
        if (config.store_dense) {
            traj.times.push_back(t);
            traj.states.push_back(y);
        }

        if (max_abs(y) > config.blowup_bound) {
            traj.termination = Termination::BlowUp;
            break;
        }
        if (last) break;

        if (!fixed) {
            double fac11 = std::pow(std::max(errn, 1e-300), 0.17);
            double fac = fac11 / std::pow(facold, 0.04);
            fac = std::max(0.1, std::min(5.0, fac / 0.9));
            double hnew = h / fac;
            if (last_rejected) hnew = std::min(hnew, h);
            facold = std::max(errn, 1e-4);
            h = std::min(hnew, hmax);
            last_rejected = false;
        }
    }

    if (!config.store_dense || traj.times.back() != t) {
        traj.times.push_back(t);
        traj.states.push_back(y);
    }
    return traj;
}

State flow(const VectorField& field, std::span<const double> x0, double t, const IntegratorConfig& config) {
    if (t == 0.0) return State(x0.begin(), x0.end());
    if (t < 0.0) throw DomainError("flow time must be nonnegative");
    IntegratorConfig cfg = config;
    cfg.store_dense = false;
    cfg.max_time = std::max(cfg.max_time, t);
    Trajectory tr = integrate(field, x0, 0.0, t, cfg);
    if (tr.termination == Termination::BlowUp) throw NumericalError("trajectory exceeded the blow-up bound");
    return tr.final_state();
}

Matrix propagator(const Matrix& a, double t, PropagatorMethod method) {
    if (t < 0.0) throw DomainError("propagator time must be nonnegative");
    const Eigen::Index n = a.rows();
    if (t == 0.0) return Matrix::Identity(n, n);
    if (method == PropagatorMethod::Pade) return expm(a * t);

    const Matrix am = a;
    std::vector<std::string> names(static_cast<std::size_t>(n * n));
    for (std::size_t i = 0; i < names.size(); ++i) names[i] = "m" + std::to_string(i);
    VectorField var("variational", names, {}, {},
                    [am, n](double, std::span<const double> x, std::span<const double>, std::span<double> dx) {
                        Eigen::Map<const Matrix> m(x.data(), n, n);
                        Eigen::Map<Matrix> d(dx.data(), n, n);
                        d.noalias() = am * m;
                    });
    Matrix id = Matrix::Identity(n, n);
    std::vector<double> x0(id.data(), id.data() + n * n);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-13;
    cfg.abs_tol = 1e-15;
    State end = flow(var, x0, t, cfg);
    Matrix out = Eigen::Map<Matrix>(end.data(), n, n);
    if (!out.allFinite()) throw NumericalError("propagator: non-finite result");
    return out;
}

}  // namespace resilience
