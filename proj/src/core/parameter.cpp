#include "parameter.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "local_indicators.hpp"
#include "quadrature.hpp"

namespace resilience {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

bool attracting(const VectorField& f, std::span<const double> x) {
    try {
        return LinearizedSystem::at_equilibrium(f, x).asymptotically_stable();
    } catch (const Error&) {
        return false;
    }
}

IntegratorConfig tight() {
    IntegratorConfig c;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-12;
    return c;
}

double settle_horizon(const VectorField& field, const AttractorSpec& attractor) {
    if (attractor.is_single_point()) {
        try {
            LinearizedSystem l = LinearizedSystem::at_equilibrium(field, attractor.single_point());
            if (l.asymptotically_stable()) return 200.0 * characteristic_return_time(l).t_r;
        } catch (const Error&) {
        }
    }
    return 1e4;
}

// Maximum of g over [0, T] sampled on the step grid and refined by golden section.
double sup_on_trajectory(const std::function<double(double)>& g, const Trajectory& tr) {
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double v = g(tr.times[i]);
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    const double t_end = tr.times.back();
    Extremum e = maximize_on_interval(g, 0.0, t_end, 2000, 1e-13 * (1.0 + t_end));
    best = std::max(best, e.value);
    const double lo = tr.times[arg == 0 ? 0 : arg - 1];
    const double hi = tr.times[std::min(arg + 1, tr.times.size() - 1)];
    if (hi > lo) best = std::max(best, golden_section_max(g, lo, hi, 1e-13 * (1.0 + hi)).value);
    return best;
}

}  // namespace

std::optional<State> newton_equilibrium(const VectorField& field, const State& guess) {
    const std::size_t n = field.dimension();
    if (guess.size() != n) throw DomainError("equilibrium guess has wrong dimension");
    State x = guess;
    State f;
    try {
        f = field.eval(x);
    } catch (const Error&) {
        return std::nullopt;
    }
    for (int it = 0; it < 100; ++it) {
        const double fn = norm_inf(f);
        if (fn <= 1e-15 * (1.0 + norm_inf(x))) return x;
        Matrix j;
        try {
            j = field.jacobian(x);
        } catch (const Error&) {
            return std::nullopt;
        }
        Eigen::FullPivLU<Matrix> lu(j);
        if (!lu.isInvertible()) return fn <= 1e-12 * (1.0 + norm_inf(x)) ? std::optional<State>(x) : std::nullopt;
        Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(n));
        Eigen::VectorXd step = lu.solve(rhs);
        double lam = 1.0;
        State xn(n), fnew;
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + lam * step(static_cast<Eigen::Index>(i));
            try {
                fnew = field.eval(xn);
            } catch (const Error&) {
                fnew.assign(n, kInf);
            }
            if (norm_inf(fnew) < fn || lam < 1e-6) break;
            lam *= 0.5;
        }
        if (!(norm_inf(fnew) < fn)) return fn <= 1e-12 * (1.0 + norm_inf(x)) ? std::optional<State>(x) : std::nullopt;
        const double moved = lam * step.cwiseAbs().maxCoeff();
        x = xn;
        f = fnew;
        if (moved <= 1e-15 * (1.0 + norm_inf(x))) break;
    }
    if (norm_inf(f) <= 1e-11 * (1.0 + norm_inf(x))) return x;
    return std::nullopt;
}

IndicatorValue distance_to_bifurcation(const VectorField& field, double x_star, const std::vector<ParameterRay>& rays,
                                       double step) {
    if (field.dimension() != 1) throw DomainError("distance to bifurcation requires a scalar field");
    if (rays.empty()) throw DomainError("at least one parameter ray is required");
    double best = kInf;
    for (const auto& ray : rays) {
        if (ray.params.empty() || ray.params.size() != ray.direction.size())
            throw DomainError("ray direction must have one entry per parameter");
        if (!(ray.rho_max > 0.0)) throw DomainError("rho_max must be positive");
        double dn = 0.0;
        for (double d : ray.direction) dn += d * d;
        dn = std::sqrt(dn);
        if (!(dn > 0.0)) throw DomainError("ray direction must be nonzero");
        ParamMap base;
        for (const auto& p : ray.params) base[p] = field.param(p);
        auto at = [&](double rho) {
            ParamMap m = base;
            for (std::size_t i = 0; i < ray.params.size(); ++i) m[ray.params[i]] += rho * ray.direction[i] / dn;
            return field.with_params(m);
        };
        // Attracting root continued from `guess`, or nullopt once it has bifurcated away.
        auto good = [&](double rho, double guess) -> std::optional<double> {
            const VectorField f = at(rho);
            auto root = newton_equilibrium(f, State{guess});
            if (!root) return std::nullopt;
            if (!(f.jacobian(*root)(0, 0) < 0.0)) return std::nullopt;
            return (*root)[0];
        };
        auto start = good(0.0, x_star);
        if (!start || std::fabs(*start - x_star) > 1e-6 * (1.0 + std::fabs(x_star)))
            throw DomainError("attractor is not a hyperbolic attracting root at the base parameters");
        const double h = step > 0.0 ? step : std::min(0.01, ray.rho_max / 100.0);
        double rho = 0.0, x = *start;
        double found = kInf;
        while (rho < ray.rho_max && rho < best) {
            const double next = std::min(rho + h, ray.rho_max);
            if (auto r = good(next, x)) {
                rho = next;
                x = *r;
                continue;
            }
            double lo = rho, hi = next;
            while (hi - lo > 1e-13 * std::max(1.0, hi)) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (auto r = good(mid, x)) {
                    lo = mid;
                    x = *r;
                } else {
                    hi = mid;
                }
            }
            found = 0.5 * (lo + hi);
            break;
        }
        best = std::min(best, found);
    }
    if (std::isfinite(best)) return IndicatorValue::finite(best);
    return IndicatorValue::pos_inf("none found in bound");
}

IndicatorValue harrison_resistance(const VectorField& field, const AttractorSpec& attractor,
                                   const StressProtocol& protocol, HarrisonMode mode) {
    if (!(protocol.duration > 0.0)) throw DomainError("stress duration must be positive");
    if (protocol.lambdas.empty()) throw DomainError("stress protocol needs at least one parameter set");
    const double t_end = protocol.duration;
    double best = 0.0;
    IntegratorConfig cfg = tight();
    cfg.max_time = std::max(cfg.max_time, t_end);
    for (const auto& a : attractor.samples()) {
        std::optional<Trajectory> ref;
        if (mode == HarrisonMode::Reference) ref = integrate(field, a, 0.0, t_end, cfg);
        for (const auto& lam : protocol.lambdas) {
            const VectorField pf = field.with_params(lam);
            pf.validate();
            Trajectory tr = integrate(pf, a, 0.0, t_end, cfg);
            if (tr.termination == Termination::BlowUp) throw DomainError("perturbed flow leaves the domain");
            std::function<double(double)> g;
            if (ref) {
                g = [&](double t) {
                    if (t >= t_end) return dist(tr.final_state(), ref->final_state());
                    return dist(tr.at(t), ref->at(t));
                };
            } else {
                g = [&](double t) { return attractor.distance(t >= t_end ? tr.final_state() : tr.at(t)); };
            }
            best = std::max(best, sup_on_trajectory(g, tr));
        }
    }
    return IndicatorValue::finite(best);
}

IndicatorValue harrison_elasticity(const VectorField& field, const AttractorSpec& attractor,
                                   const StressProtocol& protocol, HarrisonMode mode) {
    if (!(protocol.duration > 0.0)) throw DomainError("stress duration must be positive");
    if (protocol.lambdas.empty()) throw DomainError("stress protocol needs at least one parameter set");
    const std::size_t n = field.dimension();
    const double t_stress = protocol.duration;
    const double horizon = settle_horizon(field, attractor);
    const bool point = attractor.is_single_point();
    IntegratorConfig cfg = tight();

    // Displacement pair (u, v): perturbed state relaxing under lambda0 and the reference trajectory.
    std::vector<std::string> names;
    for (std::size_t i = 0; i < 2 * n; ++i) names.push_back((i < n ? "u" : "v") + std::to_string(i % n));
    const VectorField base = field;
    VectorField pair("recovery", names, {}, {}, [base, n](double t, std::span<const double> x, std::span<const double>,
                                                          std::span<double> dx) {
        base.eval(t, x.subspan(0, n), dx.subspan(0, n));
        base.eval(t, x.subspan(n, n), dx.subspan(n, n));
    });
    auto phi = [&](std::span<const double> y) {
        if (mode == HarrisonMode::Weak) return attractor.distance(y.subspan(0, n));
        return dist(y.subspan(0, n), y.subspan(n, n));
    };
    auto rate = [&](std::span<const double> y) {
        const auto u = y.subspan(0, n), v = y.subspan(n, n);
        const State fu = base.eval(u);
        if (mode == HarrisonMode::Reference || point) {
            const State fv = point && mode == HarrisonMode::Weak ? State(n, 0.0) : base.eval(v);
            const State& c = attractor.single_point();
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = mode == HarrisonMode::Weak ? c[i] : v[i];
                num += (u[i] - w) * (fu[i] - fv[i]);
                den += (u[i] - w) * (u[i] - w);
            }
            return num / den;
        }
        const double d = attractor.distance(u);
        const double h = 1e-7 * (1.0 + norm_inf(u));
        State up(u.begin(), u.end()), dn(u.begin(), u.end());
        for (std::size_t i = 0; i < n; ++i) {
            up[i] += h * fu[i];
            dn[i] -= h * fu[i];
        }
        return (attractor.distance(up) - attractor.distance(dn)) / (2.0 * h) / d;
    };

    double best = -kInf;
    for (const auto& a : attractor.samples()) {
        const State v_t = flow(field, a, t_stress, cfg);
        for (const auto& lam : protocol.lambdas) {
            const VectorField pf = field.with_params(lam);
            pf.validate();
            const State u_t = flow(pf, a, t_stress, cfg);
            State y0(u_t);
            y0.insert(y0.end(), v_t.begin(), v_t.end());
            if (phi(y0) < 1e-10) continue;
            const EventSpec stop = EventSpec::threshold(phi, 1e-10, EventSpec::Direction::Down);
            double local = rate(y0);
            const DenseSegment* best_seg = nullptr;
            std::vector<DenseSegment> segs;
            IntegratorConfig rc = cfg;
            rc.max_time = std::max(rc.max_time, horizon);
            State buf(2 * n);
            std::size_t best_idx = 0, idx = 0;
            auto observer = [&](const StepView& s) {
                segs.push_back(s.dense);
                for (int k = 1; k <= 8; ++k) {
                    s.dense.eval(s.t0 + (s.t1 - s.t0) * k / 8.0, buf);
                    if (phi(buf) < 1e-10) continue;
                    const double r = rate(buf);
                    if (r > local) {
                        local = r;
                        best_idx = idx;
                    }
                }
                ++idx;
            };
            Trajectory tr = integrate(pair, y0, t_stress, t_stress + horizon, rc,
                                      std::span<const EventSpec>(&stop, 1), observer);
            if (tr.termination != Termination::Event)
                throw DomainError("recovery does not return to the attractor (stress exceeded persistence)");
            if (!segs.empty() && best_idx < segs.size()) {
                best_seg = &segs[best_idx];
                auto g = [&](double t) {
                    best_seg->eval(t, buf);
                    return phi(buf) < 1e-10 ? -kInf : rate(buf);
                };
                const double lo = best_seg->t0, hi = best_seg->t0 + best_seg->h;
                local = std::max(local, golden_section_max(g, lo, hi, 1e-13 * (1.0 + hi)).value);
            }
            best = std::max(best, local);
        }
    }
    if (!std::isfinite(best)) return IndicatorValue::undefined("no displacement at the end of the stress period");
    return IndicatorValue::finite(best);
}

namespace {

// Exit time from the unperturbed basin of trajectories started on the attractor, or +inf.
double exit_time(const BasinOracle& oracle, const VectorField& perturbed, double horizon) {
    double best = kInf;
    IntegratorConfig cfg = tight();
    cfg.store_dense = oracle.dimension() > 1;
    cfg.max_time = std::max(cfg.max_time, horizon);
    if (oracle.dimension() == 1) {
        const ScalarBasin basin = scalar_basin(oracle);
        const EventSpec ev =
            EventSpec::exit_set([basin](std::span<const double> x) { return basin.precariousness(x[0]); });
        for (const auto& a : oracle.attractor().samples()) {
            Trajectory tr = integrate(perturbed, a, 0.0, horizon, cfg, std::span<const EventSpec>(&ev, 1));
            if (tr.termination == Termination::Event || tr.termination == Termination::BlowUp)
                best = std::min(best, tr.final_time());
        }
        return best;
    }
    for (const auto& a : oracle.attractor().samples()) {
        Trajectory tr = integrate(perturbed, a, 0.0, horizon, cfg);
        if (tr.termination == Termination::BlowUp) {
            best = std::min(best, tr.final_time());
            continue;
        }
        double prev = 0.0;
        for (std::size_t i = 1; i < tr.times.size(); ++i) {
            if (oracle.classify_retry(tr.states[i]).verdict == Verdict::Inside) {
                prev = tr.times[i];
                continue;
            }
            double lo = prev, hi = tr.times[i];
            while (hi - lo > 1e-9 * (1.0 + hi)) {
                const double mid = 0.5 * (lo + hi);
                if (oracle.classify_retry(tr.at(mid)).verdict == Verdict::Inside)
                    lo = mid;
                else
                    hi = mid;
            }
            best = std::min(best, hi);
            break;
        }
    }
    return best;
}

}  // namespace

IndicatorValue persistence_intensity(const BasinOracle& oracle, const ParamMap& lambda, double horizon) {
    const VectorField pf = oracle.field().with_params(lambda);
    pf.validate();
    const double h = horizon > 0.0 ? horizon : std::max(oracle.horizon(), settle_horizon(pf, oracle.attractor()));
    const double t = exit_time(oracle, pf, h);
    if (std::isfinite(t)) return IndicatorValue::finite(t);
    IndicatorValue out = IndicatorValue::pos_inf("perturbed trajectories remain in the basin");
    out.extras["horizon"] = h;
    return out;
}

IndicatorValue persistence_duration(const BasinOracle& oracle, const std::string& param, double direction,
                                    double duration, double rho_max, double tolerance) {
    if (!(duration > 0.0)) throw DomainError("stress duration must be positive");
    if (direction == 0.0) throw DomainError("direction must be nonzero");
    const double sgn = direction > 0.0 ? 1.0 : -1.0;
    const double lam0 = oracle.field().param(param);
    auto holds = [&](double rho) {
        const double lam = lam0 + sgn * rho;
        if (!oracle.field().admissible_with(param, lam)) return false;
        return !std::isfinite(exit_time(oracle, oracle.field().with_param(param, lam), duration));
    };
    if (!holds(0.0)) throw DomainError("attractor leaves its basin without perturbation");
    double lo = 0.0, hi = 1e-3 * std::max(1.0, std::fabs(lam0));
    while (holds(hi)) {
        lo = hi;
        if (hi >= rho_max) {
            IndicatorValue out = IndicatorValue::pos_inf("no violation within bound");
            out.extras["rho_max"] = rho_max;
            return out;
        }
        hi = std::min(2.0 * hi, rho_max);
    }
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (holds(mid))
            lo = mid;
        else
            hi = mid;
    }
    return IndicatorValue::finite(0.5 * (lo + hi));
}

RampProfile RampProfile::tanh(double lam0, double lam_inf, double scale) {
    if (!(scale > 0.0)) throw DomainError("ramp scale must be positive");
    RampProfile r;
    r.shape_ = Shape::Tanh;
    r.lam0_ = lam0;
    r.lam_inf_ = lam_inf;
    r.scale_ = scale;
    return r;
}

RampProfile RampProfile::expression(double lam0, double lam_inf, const std::string& source, double scale) {
    if (!(scale > 0.0)) throw DomainError("ramp scale must be positive");
    RampProfile r;
    r.shape_ = Shape::Expression;
    r.lam0_ = lam0;
    r.lam_inf_ = lam_inf;
    r.scale_ = scale;
    r.expr_ = Expression::parse(source, {"s"});
    r.validate();
    return r;
}

double RampProfile::operator()(double s) const {
    double e;
    if (shape_ == Shape::Tanh) {
        e = 0.5 * (1.0 + std::tanh(scale_ * s));
    } else {
        const double v[1] = {s};
        e = expr_->evaluate(v);
    }
    return lam0_ + (lam_inf_ - lam0_) * e;
}

double RampProfile::derivative(double s) const {
    if (shape_ == Shape::Tanh) {
        const double c = std::cosh(scale_ * s);
        return std::isfinite(c) ? (lam_inf_ - lam0_) * 0.5 * scale_ / (c * c) : 0.0;
    }
    const double h = 1e-5 * (1.0 + std::fabs(s));
    return ((*this)(s + h) - (*this)(s - h)) / (2.0 * h);
}

void RampProfile::validate() const {
    const double w = 30.0 / scale_;
    const double span = std::max(1.0, std::fabs(lam_inf_ - lam0_));
    if (!std::isfinite((*this)(0.0))) throw DomainError("ramp profile is not finite");
    if (std::fabs((*this)(-w) - lam0_) > 1e-6 * span || std::fabs((*this)(w) - lam_inf_) > 1e-6 * span)
        throw DomainError("ramp profile does not settle to its end values");
    if (std::fabs(derivative(-w)) > 1e-6 * span || std::fabs(derivative(w)) > 1e-6 * span)
        throw DomainError("ramp derivative does not vanish asymptotically");
}

std::pair<double, double> RampProfile::settle(double tol) const {
    const double delta = std::fabs(lam_inf_ - lam0_);
    if (delta <= tol) return {0.0, 0.0};
    if (shape_ == Shape::Tanh) {
        // delta / (1 + exp(2 scale s)) < tol
        const double s = std::log(delta / tol) / (2.0 * scale_);
        return {s, s};
    }
    auto find = [&](auto&& off) {
        double hi = 1.0 / scale_;
        while (off(hi) >= tol) {
            hi *= 2.0;
            if (hi > 1e12) throw DomainError("ramp profile does not settle");
        }
        double lo = 0.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (off(mid) < tol)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    };
    const double s0 = find([&](double s) { return std::fabs((*this)(-s) - lam0_); });
    const double s1 = find([&](double s) { return std::fabs((*this)(s) - lam_inf_); });
    return {s0, s1};
}

const char* rtip_name(RTipOutcome::Verdict v) {
    switch (v) {
        case RTipOutcome::Verdict::Tracked: return "tracked";
        case RTipOutcome::Verdict::Tipped: return "tipped";
        case RTipOutcome::Verdict::BlowUp: return "blow-up";
    }
    return "tipped";
}

RTipSolver::RTipSolver(RTipProblem problem) : p_(std::move(problem)) {
    p_.ramp.validate();
    const VectorField f0 = p_.field.with_param(p_.param, p_.ramp.lam0());
    auto past = newton_equilibrium(f0, p_.x_start);
    if (!past || !attracting(f0, *past)) throw DomainError("past-limit equilibrium is not hyperbolic attracting");
    x_past_ = *past;
    // Continue the quasi-static equilibrium along the ramp image.
    State x = x_past_;
    const int steps = 200;
    for (int k = 1; k <= steps; ++k) {
        const double lam = p_.ramp.lam0() + (p_.ramp.lam_inf() - p_.ramp.lam0()) * k / steps;
        const VectorField fk = p_.field.with_param(p_.param, lam);
        auto next = newton_equilibrium(fk, x);
        if (!next || !attracting(fk, *next)) throw DomainError("not applicable: tips for all r");
        x = *next;
    }
    x_future_ = x;
    const VectorField f1 = p_.field.with_param(p_.param, p_.ramp.lam_inf());
    t_settle_ = 20.0 * characteristic_return_time(LinearizedSystem::at_equilibrium(f1, x_future_)).t_r;
    std::tie(s0_, s1_) = p_.ramp.settle(1e-10);
}

RTipOutcome RTipSolver::track(double r) const {
    if (!(r > 0.0)) throw DomainError("rate must be positive");
    const RampProfile ramp = p_.ramp;
    const VectorField f = p_.field.with_param_path(p_.param, [ramp, r](double t) { return ramp(r * t); });
    const double t0 = -s0_ / r, t1 = s1_ / r + t_settle_;
    IntegratorConfig cfg = p_.integrator;
    cfg.store_dense = false;
    cfg.max_time = std::max(cfg.max_time, t1 - t0);
    Trajectory tr = integrate(f, x_past_, t0, t1, cfg);
    RTipOutcome out;
    out.terminal = tr.final_state();
    if (tr.termination == Termination::BlowUp) {
        out.verdict = RTipOutcome::Verdict::BlowUp;
        out.escape_time = tr.final_time();
        return out;
    }
    out.verdict = dist(out.terminal, x_future_) <= p_.eps_conv ? RTipOutcome::Verdict::Tracked
                                                                : RTipOutcome::Verdict::Tipped;
    return out;
}

RTipOutcome rtip_track(const RTipProblem& problem, double r) { return RTipSolver(problem).track(r); }

IndicatorValue rtip_threshold(const RTipProblem& problem, const RTipThresholdConfig& cfg, std::vector<RTipTrace>* trace) {
    std::optional<RTipSolver> solver;
    try {
        solver.emplace(problem);
    } catch (const DomainError& e) {
        if (std::string(e.what()).find("not applicable") != std::string::npos) {
            IndicatorValue out = IndicatorValue::undefined(e.what());
            out.flag("not applicable: tips for all r");
            return out;
        }
        throw;
    }
    auto tipped = [&](double r) {
        RTipOutcome o = solver->track(r);
        if (trace) trace->push_back({r, o});
        return o.verdict != RTipOutcome::Verdict::Tracked;
    };
    if (tipped(cfg.r_start)) return IndicatorValue::undefined("tips already at the smallest rate");
    double lo = cfg.r_start, hi = cfg.r_start;
    for (;;) {
        hi = 2.0 * lo;
        if (hi > cfg.r_max) {
            IndicatorValue out = IndicatorValue::pos_inf("no tipping up to r_max (bound, not certified)");
            out.extras["r_max"] = cfg.r_max;
            return out;
        }
        if (tipped(hi)) break;
        lo = hi;
    }
    // Single-transition check across the explored range.
    bool seen_tip = false;
    for (std::size_t k = 1; k <= cfg.monotone_checks; ++k) {
        const double r = cfg.r_start * std::pow(hi / cfg.r_start, static_cast<double>(k) / (cfg.monotone_checks + 1));
        const bool t = tipped(r);
        if (seen_tip && !t) {
            IndicatorValue out = IndicatorValue::undefined("non-monotone verdicts in r; transversality fails");
            out.flag("non-monotone");
            return out;
        }
        if (t && r < lo) {
            IndicatorValue out = IndicatorValue::undefined("non-monotone verdicts in r; transversality fails");
            out.flag("non-monotone");
            return out;
        }
        seen_tip = seen_tip || t;
        if (t && r < hi) hi = r;
        if (!t && r > lo) lo = r;
    }
    while (hi - lo > cfg.rel_width * hi) {
        const double mid = 0.5 * (lo + hi);
        if (tipped(mid))
            hi = mid;
        else
            lo = mid;
    }
    IndicatorValue out = IndicatorValue::finite(0.5 * (lo + hi));
    out.extras["r_lo"] = lo;
    out.extras["r_hi"] = hi;
    return out;
}

}  // namespace resilience
