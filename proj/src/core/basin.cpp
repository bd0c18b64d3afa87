#include "basin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "local_indicators.hpp"
#include "parallel.hpp"

namespace resilience {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

State along(std::span<const double> base, std::span<const double> dir, double s) {
    State x(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) x[i] = base[i] + s * dir[i];
    return x;
}

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

Verdict must_decide(const BasinOracle& o, std::span<const double> x, bool coarse = false) {
    Classification c = coarse ? o.classify_coarse(x) : o.classify_retry(x);
    if (c.verdict == Verdict::Undecided)
        throw NumericalError("persistent undecided classification: " + c.diagnostic);
    return c.verdict;
}

// Parameter s > 0 at which an isolated boundary point lies on the ray, or +inf.
double isolated_on_ray(const BasinOracle& o, std::span<const double> base, std::span<const double> dir) {
    double best = kInf;
    for (const auto& p : o.isolated_boundary_points()) {
        double s = 0.0;
        for (std::size_t i = 0; i < base.size(); ++i) s += (p[i] - base[i]) * dir[i];
        if (s <= 1e-12) continue;
        State q = along(base, dir, s);
        if (dist(q, p) <= 1e-9 * (1.0 + s)) best = std::min(best, s);
    }
    return best;
}

BoundaryHit bisect(const BasinOracle& o, std::span<const double> base, std::span<const double> dir, double lo,
                   Verdict v_lo, double hi, double tol) {
    for (int it = 0; it < 200 && hi - lo >= tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (must_decide(o, along(base, dir, mid)) == v_lo)
            lo = mid;
        else
            hi = mid;
    }
    const double s = 0.5 * (lo + hi);
    return {s, along(base, dir, s)};
}

std::optional<BoundaryHit> transition_from(const BasinOracle& o, std::span<const double> base, Verdict v0,
                                           std::span<const double> dir, double s_max, const RaySearchConfig& cfg) {
    const double s_iso = isolated_on_ray(o, base, dir);
    const double cap = std::min(s_max, s_iso);
    if (cap > 0.0) {
        double prev = 0.0;
        double s = std::min(cfg.scan_start, cap);
        for (;;) {
            // Scan points only locate a bracket; the bisection re-decides at full accuracy.
            const Verdict v = must_decide(o, along(base, dir, s), true);
            if (v != v0) {
                BoundaryHit h = bisect(o, base, dir, prev, v0, s, cfg.tolerance);
                if (h.s <= cap) return h;
                break;
            }
            if (s >= cap) break;
            prev = s;
            s = std::min(s * cfg.scan_factor, cap);
        }
    }
    if (s_iso <= s_max) return BoundaryHit{s_iso, along(base, dir, s_iso)};
    return std::nullopt;
}

State planar(double th) { return {std::cos(th), std::sin(th)}; }

// Golden-section minimization of a ray functional over the angle bracket [a, b].
template <class Fn>
std::pair<double, double> golden_min(Fn&& fn, double a, double b, double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    while (b - a > tol) {
        if (f1 > f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = fn(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = fn(x1);
        }
    }
    return f1 < f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Inside: return "inside";
        case Verdict::Outside: return "outside";
        case Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

BasinOracle::BasinOracle(VectorField field, AttractorSpec attractor)
    : field_(std::move(field)), attractor_(std::move(attractor)) {
    if (attractor_.dimension() != field_.dimension())
        throw DomainError("attractor dimension does not match the vector field");
    set_equilibria(field_.documented_equilibria());
    horizon_ = 200.0;
    if (attractor_.is_single_point()) {
        try {
            LinearizedSystem l = LinearizedSystem::at_equilibrium(field_, attractor_.single_point());
            if (l.asymptotically_stable()) horizon_ = 200.0 * characteristic_return_time(l).t_r;
        } catch (const Error&) {
        }
    }
    integrator_.rel_tol = 1e-10;
    integrator_.abs_tol = 1e-12;
    integrator_.store_dense = false;
}

void BasinOracle::set_equilibria(std::vector<State> e) {
    equilibria_.clear();
    competitors_.clear();
    isolated_.reset();
    for (auto& p : e) {
        if (attractor_.reached(p)) continue;
        bool stable = false;
        try {
            stable = LinearizedSystem::at_equilibrium(field_, p).asymptotically_stable();
        } catch (const Error&) {
        }
        if (stable) competitors_.push_back(p);
        equilibria_.push_back(std::move(p));
    }
}

Classification BasinOracle::classify(std::span<const double> x0, double horizon_scale) const {
    return classify_with(x0, horizon_scale, integrator_);
}

Classification BasinOracle::classify_coarse(std::span<const double> x0) const {
    IntegratorConfig loose = integrator_;
    loose.rel_tol = std::max(loose.rel_tol, 1e-7);
    loose.abs_tol = std::max(loose.abs_tol, 1e-9);
    Classification c = classify_with(x0, 1.0, loose);
    if (c.verdict == Verdict::Undecided) c = classify_retry(x0);
    return c;
}

Classification BasinOracle::classify_with(std::span<const double> x0, double horizon_scale,
                                          const IntegratorConfig& integrator) const {
    Classification out;
    if (attractor_.reached(x0)) {
        out.verdict = Verdict::Inside;
        return out;
    }
    const std::size_t n = dimension();
    State f0;
    try {
        f0 = field_.eval(x0);
    } catch (const Error& e) {
        out.diagnostic = e.what();
        return out;
    }
    bool stationary = true;
    for (double v : f0) stationary = stationary && v == 0.0;
    if (stationary) {
        out.verdict = Verdict::Outside;
        out.diagnostic = "stationary point outside the attractor";
        return out;
    }
    if (n == 1) {
        // Scalar flows are monotone: the state moves toward the nearest attractor point
        // in the direction of f and cannot cross an equilibrium.
        const double x = x0[0];
        const double d = f0[0] > 0.0 ? 1.0 : -1.0;
        double target = kInf;
        for (const auto& c : attractor_.components) {
            double lo = c.center[0], hi = c.center[0];
            if (c.kind == AttractorComponent::Kind::Ball) {
                lo -= c.radius;
                hi += c.radius;
            }
            for (double p : {lo, hi}) {
                const double s = (p - x) * d;
                if (s > 0.0) target = std::min(target, s);
            }
        }
        if (!std::isfinite(target)) {
            out.verdict = Verdict::Outside;
            out.diagnostic = "flow points away from the attractor";
            return out;
        }
        for (const auto& e : equilibria_) {
            const double s = (e[0] - x) * d;
            if (s > 0.0 && s < target) {
                out.verdict = Verdict::Outside;
                out.diagnostic = "equilibrium between the state and the attractor";
                return out;
            }
        }
        if (field_.has_documented_equilibria()) {
            // No zero of f separates the state from the attractor, so the monotone flow reaches it.
            out.verdict = Verdict::Inside;
            out.diagnostic = "monotone scalar flow";
            return out;
        }
    }
    std::vector<EventSpec> events;
    const AttractorSpec* att = &attractor_;
    events.push_back(EventSpec::enter_ball([att](std::span<const double> y) { return att->distance(y); },
                                           attractor_.conv_radius));
    for (const auto& c : competitors_) events.push_back(EventSpec::enter_ball(std::vector<State>{c}, attractor_.conv_radius));
    IntegratorConfig cfg = integrator;
    cfg.store_dense = false;
    const double t_end = horizon_ * horizon_scale;
    cfg.max_time = t_end;
    try {
        Trajectory tr = integrate(field_, x0, 0.0, t_end, cfg, events);
        out.time_to_decision = tr.final_time();
        if (tr.termination == Termination::Event) {
            const std::size_t which = tr.events.back().event;
            out.verdict = which == 0 ? Verdict::Inside : Verdict::Outside;
            if (which != 0) out.diagnostic = "converged to a competing attractor";
        } else if (tr.termination == Termination::BlowUp) {
            out.verdict = Verdict::Outside;
            out.diagnostic = "exceeded the blow-up bound";
        } else {
            out.diagnostic = "no decision within horizon " + format_double(t_end);
        }
    } catch (const NumericalError& e) {
        out.diagnostic = e.what();
    }
    return out;
}

Classification BasinOracle::classify_retry(std::span<const double> x0) const {
    Classification c = classify(x0, 1.0);
    if (c.verdict == Verdict::Undecided) c = classify(x0, 2.0);
    return c;
}

const std::vector<State>& BasinOracle::isolated_boundary_points() const {
    if (isolated_) return *isolated_;
    std::vector<State> out;
    const std::size_t n = dimension();
    for (const auto& e : equilibria_) {
        bool competitor = false;
        for (const auto& c : competitors_) competitor = competitor || dist(c, e) == 0.0;
        if (competitor) continue;
        double scale = 0.0;
        for (double v : e) scale = std::max(scale, std::fabs(v));
        const double delta = 1e-6 * (1.0 + scale);
        std::vector<State> probes;
        if (n == 2) {
            for (int k = 0; k < 8; ++k) probes.push_back(along(e, planar(k * std::numbers::pi / 4.0), delta));
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (double sgn : {-1.0, 1.0}) {
                    State p = e;
                    p[i] += sgn * delta;
                    probes.push_back(p);
                }
        }
        for (const auto& p : probes) {
            if (classify(p).verdict == Verdict::Inside) {
                out.push_back(e);
                break;
            }
        }
    }
    isolated_ = std::move(out);
    return *isolated_;
}

std::optional<BoundaryHit> first_transition(const BasinOracle& oracle, std::span<const double> base,
                                            std::span<const double> dir, double s_max, const RaySearchConfig& cfg) {
    const Verdict v0 = must_decide(oracle, base);
    return transition_from(oracle, base, v0, dir, s_max, cfg);
}

BoundaryHit boundary_on_ray(const BasinOracle& oracle, std::span<const double> base, std::span<const double> dir,
                            double s_lo, double s_hi, double tolerance) {
    const Verdict v_lo = must_decide(oracle, along(base, dir, s_lo));
    const Verdict v_hi = must_decide(oracle, along(base, dir, s_hi));
    if (v_lo == v_hi) throw NumericalError("no classification change inside the bracket");
    return bisect(oracle, base, dir, s_lo, v_lo, s_hi, tolerance);
}

std::vector<State> ray_directions(std::size_t dimension, std::size_t count) {
    std::vector<State> out;
    if (dimension == 1) return {{1.0}, {-1.0}};
    if (dimension == 2) {
        for (std::size_t k = 0; k < count; ++k)
            out.push_back(planar(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count)));
        return out;
    }
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
        const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        State d(dimension, 0.0);
        d[0] = r * std::cos(golden * static_cast<double>(k));
        d[1] = r * std::sin(golden * static_cast<double>(k));
        d[2] = z;
        out.push_back(d);
    }
    return out;
}

IndicatorValue distance_to_threshold(const BasinOracle& oracle, const RaySearchConfig& cfg,
                                     const RegionOfInterest* roi) {
    const std::size_t n = oracle.dimension();
    double best = kInf;
    for (const auto& p : oracle.isolated_boundary_points()) {
        if (roi && !roi->contains(p)) continue;
        best = std::min(best, oracle.attractor().distance(p));
    }
    const auto samples = oracle.attractor().samples(cfg.samples_per_curve);
    const auto dirs = ray_directions(n, cfg.rays);
    std::size_t failed = 0, total = 0;
    std::size_t best_sample = samples.size(), best_dir = 0;
    auto probe = [&](const State& a, std::span<const double> d, double cap) -> double {
        auto hit = transition_from(oracle, a, Verdict::Inside, d, cap, cfg);
        if (!hit) return kInf;
        if (roi && !roi->contains(hit->point)) return kInf;
        return hit->s;
    };
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            ++total;
            try {
                const double s = probe(samples[i], dirs[k], std::min(oracle.search_radius(), best));
                if (s < best) {
                    best = s;
                    best_sample = i;
                    best_dir = k;
                }
            } catch (const NumericalError&) {
                ++failed;
            }
        }
    }
    if (failed == total && total > 0) return IndicatorValue::undefined("all rays undecided");
    if (n == 2 && cfg.refine_angle && best_sample < samples.size()) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(best_dir) / static_cast<double>(dirs.size());
        const double step = 2.0 * std::numbers::pi / static_cast<double>(dirs.size());
        const double cap = 1.5 * best;
        auto fn = [&](double t) {
            try {
                return probe(samples[best_sample], planar(t), cap);
            } catch (const NumericalError&) {
                return kInf;
            }
        };
        best = std::min(best, golden_min(fn, th - step, th + step, 1e-9).second);
    }
    IndicatorValue out = std::isfinite(best) ? IndicatorValue::finite(best)
                                             : IndicatorValue::pos_inf("no boundary within search radius");
    if (n >= 2) out.flag("ray-sampled upper bound");
    if (failed > 0) {
        out.flag("undecided rays");
        out.undecided = failed;
    }
    out.samples = total;
    return out;
}

IndicatorValue latitude_width(const BasinOracle& oracle, const RaySearchConfig& cfg) {
    const std::size_t n = oracle.dimension();
    const auto samples = oracle.attractor().samples(cfg.samples_per_curve);
    std::vector<State> dirs;
    if (n == 1) {
        dirs = {{1.0}};
    } else {
        for (const auto& d : ray_directions(n, cfg.rays)) {
            // Half of the directions; the opposite side is searched explicitly.
            const bool upper = n == 2 ? (d[1] > 1e-12 || (std::fabs(d[1]) <= 1e-12 && d[0] > 0.0)) : d[2] >= 0.0;
            if (upper) dirs.push_back(d);
        }
    }
    double best = kInf;
    std::size_t failed = 0, total = 0, best_sample = samples.size();
    State best_d;
    auto segment = [&](const State& a, const State& d, double cap) -> double {
        auto plus = transition_from(oracle, a, Verdict::Inside, d, std::min(oracle.search_radius(), cap), cfg);
        if (!plus) return kInf;
        State md(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) md[i] = -d[i];
        auto minus =
            transition_from(oracle, a, Verdict::Inside, md, std::min(oracle.search_radius(), cap - plus->s), cfg);
        if (!minus) return kInf;
        return plus->s + minus->s;
    };
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (const auto& d : dirs) {
            ++total;
            try {
                const double len = segment(samples[i], d, best);
                if (len < best) {
                    best = len;
                    best_sample = i;
                    best_d = d;
                }
            } catch (const NumericalError&) {
                ++failed;
            }
        }
    }
    if (failed == total && total > 0) return IndicatorValue::undefined("all rays undecided");
    if (n == 2 && cfg.refine_angle && best_sample < samples.size()) {
        const double th = std::atan2(best_d[1], best_d[0]);
        const double step = 2.0 * std::numbers::pi / static_cast<double>(cfg.rays);
        const double cap = 1.5 * best;
        auto fn = [&](double t) {
            try {
                return segment(samples[best_sample], planar(t), cap);
            } catch (const NumericalError&) {
                return kInf;
            }
        };
        best = std::min(best, golden_min(fn, th - step, th + step, 1e-9).second);
    }
    IndicatorValue out = std::isfinite(best) ? IndicatorValue::finite(best)
                                             : IndicatorValue::pos_inf("unbounded along every sampled line");
    if (n >= 2) out.flag("ray-sampled upper bound");
    if (failed > 0) {
        out.flag("undecided rays");
        out.undecided = failed;
    }
    out.samples = total;
    return out;
}

IndicatorValue precariousness(const BasinOracle& oracle, std::span<const double> x0, const RaySearchConfig& cfg) {
    const Classification c = oracle.classify_retry(x0);
    if (c.verdict == Verdict::Undecided) return IndicatorValue::undefined("state could not be classified: " + c.diagnostic);
    const std::size_t n = oracle.dimension();
    double best = kInf;
    for (const auto& p : oracle.isolated_boundary_points()) best = std::min(best, dist(x0, p));
    const auto dirs = ray_directions(n, cfg.rays);
    std::size_t failed = 0, best_dir = dirs.size();
    State base(x0.begin(), x0.end());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        try {
            auto hit = transition_from(oracle, base, c.verdict, dirs[k], std::min(oracle.search_radius(), best), cfg);
            if (hit && hit->s < best) {
                best = hit->s;
                best_dir = k;
            }
        } catch (const NumericalError&) {
            ++failed;
        }
    }
    if (failed == dirs.size()) return IndicatorValue::undefined("all rays undecided");
    if (n == 2 && cfg.refine_angle && best_dir < dirs.size()) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(best_dir) / static_cast<double>(dirs.size());
        const double step = 2.0 * std::numbers::pi / static_cast<double>(dirs.size());
        const double cap = 1.5 * best;
        auto fn = [&](double t) {
            try {
                auto hit = transition_from(oracle, base, c.verdict, planar(t), cap, cfg);
                return hit ? hit->s : kInf;
            } catch (const NumericalError&) {
                return kInf;
            }
        };
        best = std::min(best, golden_min(fn, th - step, th + step, 1e-9).second);
    }
    const bool inside = c.verdict == Verdict::Inside;
    IndicatorValue out;
    if (!std::isfinite(best)) {
        out = inside ? IndicatorValue::pos_inf("no boundary within search radius")
                     : IndicatorValue::undefined("outside state with no boundary within search radius");
    } else {
        out = IndicatorValue::finite(inside ? best : -best);
    }
    if (n >= 2) out.flag("ray-sampled upper bound");
    if (failed > 0) out.flag("undecided rays");
    return out;
}

RegionOfInterest RegionOfInterest::box(State lo, State hi) {
    if (lo.size() != hi.size() || lo.empty()) throw DomainError("box bounds must have equal, positive dimension");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw DomainError("box bounds must satisfy lo < hi");
    RegionOfInterest r;
    r.shape_ = Shape::Box;
    r.lo_ = std::move(lo);
    r.hi_ = std::move(hi);
    return r;
}

RegionOfInterest RegionOfInterest::half_line(double origin, int direction) {
    return direction >= 0 ? box({origin}, {kInf}) : box({-kInf}, {origin});
}

RegionOfInterest RegionOfInterest::ball(State center, double radius) {
    if (!(radius > 0.0) || center.empty()) throw DomainError("ball needs a centre and a positive radius");
    RegionOfInterest r;
    r.shape_ = Shape::Ball;
    r.lo_ = center;
    r.hi_ = std::move(center);
    r.radius_ = radius;
    return r;
}

bool RegionOfInterest::contains(std::span<const double> x) const {
    if (shape_ == Shape::Box) {
        for (std::size_t i = 0; i < lo_.size(); ++i)
            if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
        return true;
    }
    return dist(x, lo_) <= radius_;
}

bool RegionOfInterest::bounded() const {
    if (shape_ == Shape::Ball) return true;
    for (std::size_t i = 0; i < lo_.size(); ++i)
        if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i])) return false;
    return true;
}

double RegionOfInterest::measure() const {
    if (!bounded()) return kInf;
    if (shape_ == Shape::Box) {
        double m = 1.0;
        for (std::size_t i = 0; i < lo_.size(); ++i) m *= hi_[i] - lo_[i];
        return m;
    }
    const double n = static_cast<double>(lo_.size());
    return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0) * std::pow(radius_, n);
}

State RegionOfInterest::sample(std::uint64_t seed, std::uint64_t index) const {
    if (!bounded()) throw DomainError("cannot sample uniformly from an unbounded region");
    const std::size_t n = lo_.size();
    State x(n);
    if (shape_ == Shape::Box) {
        for (std::size_t i = 0; i < n; ++i) x[i] = lo_[i] + (hi_[i] - lo_[i]) * counter_uniform(seed, index, i);
        return x;
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = counter_normal(seed, index, i);
        norm += x[i] * x[i];
    }
    norm = std::sqrt(norm);
    const double r = radius_ * std::pow(counter_uniform(seed, index, 1000 + n), 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i] = lo_[i] + r * x[i] / norm;
    return x;
}

namespace {

IndicatorValue monte_carlo(const BasinOracle& oracle, const std::function<State(std::uint64_t)>& draw,
                           std::size_t n_samples, std::size_t workers, std::vector<SampleRecord>* dump) {
    if (n_samples == 0) throw DomainError("n_samples must be at least 1");
    std::vector<SampleRecord> records(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
        SampleRecord& r = records[i];
        r.index = i;
        r.x = draw(i);
        Classification c = oracle.classify_retry(r.x);
        r.verdict = c.verdict;
        r.time_to_decision = c.time_to_decision;
    });
    std::size_t inside = 0, undecided = 0;
    for (const auto& r : records) {
        if (r.verdict == Verdict::Inside) ++inside;
        if (r.verdict == Verdict::Undecided) ++undecided;
    }
    const std::size_t decided = n_samples - undecided;
    IndicatorValue out;
    if (decided == 0) {
        out = IndicatorValue::undefined("every sample undecided");
    } else {
        const double p = static_cast<double>(inside) / static_cast<double>(decided);
        out = IndicatorValue::finite(p);
        out.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(decided));
    }
    out.samples = n_samples;
    out.undecided = undecided;
    if (static_cast<double>(undecided) > 0.01 * static_cast<double>(n_samples)) out.flag("undecided fraction above 1%");
    if (dump) *dump = std::move(records);
    return out;
}

}  // namespace

IndicatorValue latitude_volume(const BasinOracle& oracle, const RegionOfInterest& roi, std::size_t n_samples,
                               std::uint64_t seed, std::size_t workers, std::vector<SampleRecord>* dump) {
    const double m = roi.measure();
    if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("region of interest needs finite positive measure");
    if (roi.dimension() != oracle.dimension()) throw DomainError("region dimension does not match the field");
    return monte_carlo(oracle, [&](std::uint64_t i) { return roi.sample(seed, i); }, n_samples, workers, dump);
}

IndicatorValue basin_stability(const BasinOracle& oracle, const DensitySampler& sampler, std::size_t n_samples,
                               std::uint64_t seed, std::size_t workers, std::vector<SampleRecord>* dump) {
    return monte_carlo(oracle, [&](std::uint64_t i) { return sampler(seed, i); }, n_samples, workers, dump);
}

DensitySampler truncated_gaussian_sampler(State mean, State sigma, State lo, State hi) {
    const std::size_t n = mean.size();
    if (sigma.size() != n || lo.size() != n || hi.size() != n) throw DomainError("sampler dimensions differ");
    return [=](std::uint64_t seed, std::uint64_t index) {
        State x(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::uint64_t k = 0;; ++k) {
                if (k > 100000) throw NumericalError("truncated Gaussian rejection did not terminate");
                const double v = mean[i] + sigma[i] * counter_normal(seed, index, (i << 24) + k);
                if (v >= lo[i] && v <= hi[i]) {
                    x[i] = v;
                    break;
                }
            }
        }
        return x;
    };
}

double ScalarBasin::precariousness(double x) const {
    if (inside(x)) return std::min(x - lower, upper - x);
    double d = kInf;
    if (std::isfinite(lower)) d = std::min(d, std::fabs(x - lower));
    if (std::isfinite(upper)) d = std::min(d, std::fabs(x - upper));
    return -d;
}

ScalarBasin scalar_basin(const BasinOracle& oracle, const RaySearchConfig& cfg) {
    if (oracle.dimension() != 1) throw DomainError("scalar basin requires a one-dimensional field");
    const double a = oracle.attractor().single_point()[0];
    ScalarBasin b;
    b.attractor = a;
    const State base{a};
    const State down{-1.0}, up{1.0};
    if (auto h = transition_from(oracle, base, Verdict::Inside, down, oracle.search_radius(), cfg)) b.lower = a - h->s;
    if (auto h = transition_from(oracle, base, Verdict::Inside, up, oracle.search_radius(), cfg)) b.upper = a + h->s;
    return b;
}

}  // namespace resilience
