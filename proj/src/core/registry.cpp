#include "registry.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace resilience {

namespace {

using Params = std::span<const double>;
using Span = std::span<const double>;
using Out = std::span<double>;

struct Definition {
    std::vector<std::string> states;
    std::vector<std::pair<std::string, double>> defaults;
    RhsFn rhs;
    JacFn jac;
    EquilibriaFn equilibria;
    DomainFn domain;
    std::function<AttractorSpec(Params)> attractor;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

AttractorSpec point_attractor(State p) { return AttractorSpec::point(std::move(p)); }

double pop1(double x) { return x * (1.0 - x / 100.0) * (x / 20.0 - 1.0); }
double pop1_dx(double x) {
    return (1.0 - x / 100.0) * (x / 20.0 - 1.0) - (x / 100.0) * (x / 20.0 - 1.0) + (x / 20.0) * (1.0 - x / 100.0);
}
double pop2_q(double x) { return 0.0002 * x * x - 0.024 * x + 1.4; }

// Nonzero equilibrium of the planar example with a saddle separatrix: x2 = 10 exp(-x2^2), x1 = 10 x2.
double kerswell_upper_root() {
    double y = 1.4;
    for (int i = 0; i < 60; ++i) {
        double g = y - 10.0 * std::exp(-y * y);
        double dg = 1.0 + 20.0 * y * std::exp(-y * y);
        double step = g / dg;
        y -= step;
        if (std::fabs(step) < 1e-16) break;
    }
    return y;
}

std::map<std::string, Definition> build() {
    std::map<std::string, Definition> m;

    m["allee"] = Definition{
        {"x"},
        {{"r", 0.5}, {"L", 0.2}, {"K", 1.0}},
        [](double, Span x, Params p, Out dx) {
            const double r = p[0], L = p[1], K = p[2];
            dx[0] = r * x[0] * (1.0 - x[0] / K) * (x[0] / L - 1.0);
        },
        [](double, Span x, Params p, Out j) {
            const double r = p[0], L = p[1], K = p[2], v = x[0];
            j[0] = r * ((1.0 - v / K) * (v / L - 1.0) - (v / K) * (v / L - 1.0) + (v / L) * (1.0 - v / K));
        },
        [](Params p) { return std::vector<State>{{0.0}, {p[1]}, {p[2]}}; },
        [](Params p) {
            require(p[0] > 0.0, "allee: r must be positive");
            require(p[2] > 0.0, "allee: K must be positive");
            require(p[1] > 0.0 && p[1] <= p[2], "allee: L must satisfy 0 < L <= K");
        },
        [](Params p) { return point_attractor({p[2]}); },
    };

    m["logistic"] = Definition{
        {"x"},
        {{"r", 1.0}, {"K", 1.0}},
        [](double, Span x, Params p, Out dx) { dx[0] = p[0] * x[0] * (1.0 - x[0] / p[1]); },
        [](double, Span x, Params p, Out j) { j[0] = p[0] * (1.0 - 2.0 * x[0] / p[1]); },
        [](Params p) { return std::vector<State>{{0.0}, {p[1]}}; },
        [](Params p) {
            require(p[0] > 0.0, "logistic: r must be positive");
            require(p[1] > 0.0, "logistic: K must be positive");
        },
        [](Params p) { return point_attractor({p[1]}); },
    };

    m["epsilon_1d"] = Definition{
        {"x"},
        {{"eps", 0.1}},
        [](double, Span x, Params p, Out dx) {
            const double e = p[0];
            dx[0] = x[0] * (x[0] - 1.0 / e) * (x[0] + e);
        },
        [](double, Span x, Params p, Out j) {
            const double e = p[0], a = 1.0 / e, v = x[0];
            j[0] = (v - a) * (v + e) + v * (v + e) + v * (v - a);
        },
        [](Params p) { return std::vector<State>{{-p[0]}, {0.0}, {1.0 / p[0]}}; },
        [](Params p) { require(p[0] > 0.0 && p[0] <= 1.0, "epsilon_1d: eps must lie in (0, 1]"); },
        [](Params) { return point_attractor({0.0}); },
    };

    m["polar_rings"] = Definition{
        {"x", "y"},
        {},
        [](double, Span x, Params, Out dx) {
            const double r = std::hypot(x[0], x[1]);
            const double h = (r - 1.0) * (r - 3.0);
            dx[0] = x[0] * h - x[1];
            dx[1] = x[1] * h + x[0];
        },
        [](double, Span x, Params, Out j) {
            const double r = std::hypot(x[0], x[1]);
            const double h = (r - 1.0) * (r - 3.0);
            const double hr = r > 0.0 ? (2.0 * r - 4.0) / r : 0.0;
            j[0] = h + hr * x[0] * x[0];
            j[1] = -1.0 + hr * x[0] * x[1];
            j[2] = 1.0 + hr * x[1] * x[0];
            j[3] = h + hr * x[1] * x[1];
        },
        [](Params) { return std::vector<State>{{0.0, 0.0}}; },
        {},
        [](Params) {
            AttractorSpec a;
            a.components.push_back({AttractorComponent::Kind::Circle, {0.0, 0.0}, 1.0});
            return a;
        },
    };

    m["flower"] = Definition{
        {"x", "y"},
        {{"eps", 0.2}},
        [](double, Span x, Params p, Out dx) {
            const double r = std::hypot(x[0], x[1]);
            const double phi = std::atan2(x[1], x[0]);
            const double g = r - std::cos(7.0 * phi) - (1.0 + p[0]);
            dx[0] = x[0] * g;
            dx[1] = x[1] * g;
        },
        [](double, Span x, Params p, Out j) {
            const double r = std::hypot(x[0], x[1]);
            if (r == 0.0) {
                // Not differentiable at the origin; direction-averaged linear part.
                j[0] = j[3] = -(1.0 + p[0]);
                j[1] = j[2] = 0.0;
                return;
            }
            const double phi = std::atan2(x[1], x[0]);
            const double g = r - std::cos(7.0 * phi) - (1.0 + p[0]);
            const double s7 = 7.0 * std::sin(7.0 * phi);
            const double gx = x[0] / r - s7 * x[1] / (r * r);
            const double gy = x[1] / r + s7 * x[0] / (r * r);
            j[0] = g + x[0] * gx;
            j[1] = x[0] * gy;
            j[2] = x[1] * gx;
            j[3] = g + x[1] * gy;
        },
        [](Params) { return std::vector<State>{{0.0, 0.0}}; },
        [](Params p) { require(p[0] > 0.0, "flower: eps must be positive"); },
        [](Params) { return point_attractor({0.0, 0.0}); },
    };

    m["duffing"] = Definition{
        {"x", "y"},
        {{"delta", 0.25}},
        [](double, Span x, Params p, Out dx) {
            dx[0] = x[1];
            dx[1] = x[0] - x[0] * x[0] * x[0] - p[0] * x[1];
        },
        [](double, Span x, Params p, Out j) {
            j[0] = 0.0;
            j[1] = 1.0;
            j[2] = 1.0 - 3.0 * x[0] * x[0];
            j[3] = -p[0];
        },
        [](Params) { return std::vector<State>{{0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}}; },
        [](Params p) { require(p[0] >= 0.0, "duffing: delta must be nonnegative"); },
        [](Params) { return point_attractor({1.0, 0.0}); },
    };

    m["kerswell_planar"] = Definition{
        {"x1", "x2"},
        {},
        [](double, Span x, Params, Out dx) {
            const double e = 10.0 * std::exp(-x[0] * x[0] / 100.0);
            dx[0] = -x[0] + 10.0 * x[1];
            dx[1] = x[1] * (e - x[1]) * (x[1] - 1.0);
        },
        [](double, Span x, Params, Out j) {
            const double e = 10.0 * std::exp(-x[0] * x[0] / 100.0);
            const double de = e * (-2.0 * x[0] / 100.0);
            const double y = x[1];
            j[0] = -1.0;
            j[1] = 10.0;
            j[2] = y * de * (y - 1.0);
            j[3] = (e - y) * (y - 1.0) - y * (y - 1.0) + y * (e - y);
        },
        [](Params) {
            const double y = kerswell_upper_root();
            return std::vector<State>{{0.0, 0.0}, {10.0, 1.0}, {10.0 * y, y}};
        },
        {},
        [](Params) { return point_attractor({0.0, 0.0}); },
    };

    m["meyer_f"] = Definition{
        {"x"},
        {},
        [](double, Span x, Params, Out dx) {
            const double v = x[0];
            if (v < 0.0)
                dx[0] = v;
            else if (v <= 1.0)
                dx[0] = std::sin(std::numbers::pi * v) / std::numbers::pi;
            else
                dx[0] = 1.0 - v;
        },
        [](double, Span x, Params, Out j) {
            const double v = x[0];
            if (v < 0.0)
                j[0] = 1.0;
            else if (v <= 1.0)
                j[0] = std::cos(std::numbers::pi * v);
            else
                j[0] = -1.0;
        },
        [](Params) { return std::vector<State>{{0.0}, {1.0}}; },
        {},
        [](Params) { return point_attractor({1.0}); },
    };

    m["meyer_g"] = Definition{
        {"x"},
        {},
        [](double, Span x, Params, Out dx) { dx[0] = -x[0] * (x[0] - 1.0); },
        [](double, Span x, Params, Out j) { j[0] = 1.0 - 2.0 * x[0]; },
        [](Params) { return std::vector<State>{{0.0}, {1.0}}; },
        {},
        [](Params) { return point_attractor({1.0}); },
    };

    m["pop1"] = Definition{
        {"x"},
        {},
        [](double, Span x, Params, Out dx) { dx[0] = pop1(x[0]); },
        [](double, Span x, Params, Out j) { j[0] = pop1_dx(x[0]); },
        [](Params) { return std::vector<State>{{0.0}, {20.0}, {100.0}}; },
        {},
        [](Params) { return point_attractor({100.0}); },
    };

    m["pop2"] = Definition{
        {"x"},
        {},
        [](double, Span x, Params, Out dx) { dx[0] = pop1(x[0]) * pop2_q(x[0]); },
        [](double, Span x, Params, Out j) {
            const double v = x[0];
            j[0] = pop1_dx(v) * pop2_q(v) + pop1(v) * (0.0004 * v - 0.024);
        },
        [](Params) { return std::vector<State>{{0.0}, {20.0}, {100.0}}; },
        {},
        [](Params) { return point_attractor({100.0}); },
    };

    m["shifted_saddle_node"] = Definition{
        {"x"},
        {{"lam", 0.0}},
        [](double, Span x, Params p, Out dx) {
            const double y = x[0] + p[0];
            dx[0] = y * y - 1.0;
        },
        [](double, Span x, Params p, Out j) { j[0] = 2.0 * (x[0] + p[0]); },
        [](Params p) { return std::vector<State>{{-p[0] - 1.0}, {-p[0] + 1.0}}; },
        {},
        [](Params p) { return point_attractor({-p[0] - 1.0}); },
    };

    return m;
}

const std::map<std::string, Definition>& definitions() {
    static const std::map<std::string, Definition> defs = build();
    return defs;
}

}  // namespace

const std::vector<std::string>& registry_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : definitions()) out.push_back(k);
        return out;
    }();
    return names;
}

ModelEntry registry_get(const std::string& name, const std::map<std::string, double>& params) {
    auto it = definitions().find(name);
    if (it == definitions().end()) throw DomainError("unknown model '" + name + "'");
    const Definition& d = it->second;
    std::vector<std::string> pnames;
    std::vector<double> pvalues;
    for (const auto& [k, v] : d.defaults) {
        pnames.push_back(k);
        auto given = params.find(k);
        pvalues.push_back(given == params.end() ? v : given->second);
    }
    for (const auto& [k, v] : params) {
        bool known = false;
        for (const auto& n : pnames) known = known || n == k;
        if (!known) throw DomainError("model '" + name + "' has no parameter '" + k + "'");
    }
    VectorField f(name, d.states, pnames, pvalues, d.rhs, d.jac);
    f.set_equilibria(d.equilibria);
    if (d.domain) f.set_domain(d.domain);
    f.validate();
    return ModelEntry{f, d.attractor(pvalues)};
}

}  // namespace resilience
