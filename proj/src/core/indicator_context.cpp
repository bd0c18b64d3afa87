#include "indicator_context.hpp"

#include <cmath>

#include "errors.hpp"
#include "local_indicators.hpp"
#include "transient.hpp"

namespace resilience {

namespace {

AttractorSpec attractor_from(const json& a) {
    AttractorSpec spec;
    spec.conv_radius = a.value("conv_radius", 1e-6);
    if (a.contains("points"))
        for (const auto& p : a["points"])
            spec.components.push_back({AttractorComponent::Kind::Point, p.get<State>(), 0.0});
    if (a.contains("components"))
        for (const auto& c : a["components"]) {
            const std::string kind = c.value("kind", "point");
            AttractorComponent comp;
            comp.kind = kind == "circle" ? AttractorComponent::Kind::Circle
                        : kind == "ball" ? AttractorComponent::Kind::Ball
                                         : AttractorComponent::Kind::Point;
            comp.center = c["center"].get<State>();
            comp.radius = c.value("radius", 0.0);
            spec.components.push_back(comp);
        }
    return spec;
}

double edge_value(const json& e, const char* key, double def) {
    if (!e.contains(key)) return def;
    const json& v = e[key];
    if (v.is_number()) return v.get<double>();
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError(std::string("config.escape.") + key, "expected a number or \"inf\"");
}

bool needs_point(const std::string& n) {
    return n == "ev" || n == "tr" || n == "reactivity" || n == "rho_max" || n == "t_max" || n == "i_s" || n == "i_d";
}

}  // namespace

ModelEntry build_model(const json& cfg, const ParamMap& overrides) {
    ParamMap params;
    const json given = cfg.value("params", json::object());
    for (const auto& [k, v] : given.items()) params[k] = v.get<double>();
    for (const auto& [k, v] : overrides) params[k] = v;
    if (cfg.contains("model")) {
        ModelEntry m = registry_get(cfg["model"].get<std::string>(), params);
        if (cfg.contains("attractor")) m.attractor = attractor_from(cfg["attractor"]);
        return m;
    }
    const json& e = cfg["expr"];
    const auto states = e["states"].get<std::vector<std::string>>();
    const auto rhs = e["rhs"].get<std::vector<std::string>>();
    const auto jac = e.value("jacobian", std::vector<std::string>{});
    if (rhs.size() != states.size()) throw ConfigError("config.expr.rhs", "one right-hand side per state is required");
    ModelEntry m{VectorField::from_expressions(states, rhs, params, jac), attractor_from(cfg["attractor"])};
    if (e.contains("equilibria")) {
        const auto eq = e["equilibria"].get<std::vector<State>>();
        m.field.set_equilibria([eq](std::span<const double>) { return eq; });
    }
    if (m.attractor.dimension() != m.field.dimension())
        throw ConfigError("config.attractor", "dimension differs from the model");
    return m;
}

IndicatorContext::IndicatorContext(const json& cfg, const ParamMap& overrides) : cfg_(cfg) {
    ModelEntry m = build_model(cfg, overrides);
    m.field.validate();
    const auto& names = m.field.param_names();
    for (std::size_t i = 0; i < names.size(); ++i) params_[names[i]] = m.field.params()[i];
    oracle_ = std::make_unique<BasinOracle>(std::move(m.field), std::move(m.attractor));
}

IntegratorConfig IndicatorContext::integrator() const {
    IntegratorConfig ic;
    if (cfg_.contains("integrator")) {
        ic.rel_tol = cfg_["integrator"].value("rel_tol", ic.rel_tol);
        ic.abs_tol = cfg_["integrator"].value("abs_tol", ic.abs_tol);
    }
    return ic;
}

const ScalarBasin& IndicatorContext::basin() {
    if (!basin_) basin_ = scalar_basin(*oracle_);
    return *basin_;
}

RegionOfInterest IndicatorContext::roi() {
    const json& r = cfg_["roi"];
    if (r.contains("box")) return RegionOfInterest::box(r["box"]["lo"].get<State>(), r["box"]["hi"].get<State>());
    if (r.contains("ball")) return RegionOfInterest::ball(r["ball"]["center"].get<State>(), r["ball"]["radius"].get<double>());
    if (oracle_->dimension() != 1) throw ConfigError("config.roi.basin_interval", "scalar models only");
    const ScalarBasin& b = basin();
    const double off = r["basin_interval"]["offset"].get<double>();
    if (r["basin_interval"]["side"] == "lower") {
        if (!std::isfinite(b.lower)) throw DomainError("basin has no finite lower edge");
        return RegionOfInterest::interval(b.lower + off, b.attractor);
    }
    if (!std::isfinite(b.upper)) throw DomainError("basin has no finite upper edge");
    return RegionOfInterest::interval(b.attractor, b.upper - off);
}

IndicatorValue IndicatorContext::compute(const std::string& name, std::size_t workers, std::vector<SampleRecord>* dump) {
    if (name.rfind("inv_", 0) == 0) return evaluate(name.substr(4), workers, dump).reciprocal();
    return evaluate(name, workers, dump);
}

IndicatorValue IndicatorContext::evaluate(const std::string& name, std::size_t workers,
                                          std::vector<SampleRecord>* dump) {
    const BasinOracle& o = *oracle_;
    const std::uint64_t seed = cfg_.value("seed", std::uint64_t{0});
    const std::size_t samples = cfg_.value("samples", std::size_t{1000});
    const bool point = o.attractor().is_single_point();
    const bool scalar = o.dimension() == 1;

    if (needs_point(name)) {
        if (!point) return IndicatorValue::undefined("needs a point attractor");
        const auto l = LinearizedSystem::at_equilibrium(o.field(), o.attractor().single_point());
        if (!l.asymptotically_stable()) return IndicatorValue::undefined("equilibrium is not asymptotically stable");
        const LocalIndicatorReport r = local_indicators(l);
        if (name == "ev") return IndicatorValue::finite(r.ev);
        if (name == "tr") return IndicatorValue::from_double(r.t_r);
        if (name == "reactivity") {
            auto v = IndicatorValue::finite(r.r0);
            v.extras["reactive"] = r.reactive ? 1.0 : 0.0;
            return v;
        }
        if (name == "rho_max") return IndicatorValue::finite(r.rho_max);
        if (name == "t_max") return IndicatorValue::finite(r.t_max);
        if (name == "i_s") {
            auto v = IndicatorValue::from_double(r.i_s);
            v.extras["v_s"] = r.v_s;
            return v;
        }
        auto v = IndicatorValue::from_double(r.i_d);
        v.extras["v_d"] = r.v_d;
        return v;
    }
    if (name == "dt") {
        if (cfg_.contains("roi") && !cfg_["roi"].contains("basin_interval")) {
            const RegionOfInterest region = roi();
            return distance_to_threshold(o, {}, &region);
        }
        return distance_to_threshold(o);
    }
    if (name == "lw") return latitude_width(o);
    if (name == "lv") return latitude_volume(o, roi(), samples, seed, workers, dump);
    if (name == "sb") {
        const json& d = cfg_["density"];
        const auto sampler = truncated_gaussian_sampler(d["mean"].get<State>(), d["sigma"].get<State>(),
                                                        d["lo"].get<State>(), d["hi"].get<State>());
        return basin_stability(o, sampler, samples, seed, workers, dump);
    }
    if (name == "precariousness") return precariousness(o, cfg_["x0"].get<State>());
    ReturnTimeConfig rt;
    rt.integrator = integrator();
    if (name == "return_time") return return_time(o, cfg_["x0"].get<State>(), rt);
    if (name == "mean_return_time") return mean_return_time(o, roi(), samples, seed, workers, rt);

    if (name == "w" || name == "w_literal" || name == "intensity" || name == "dbif" || name == "escape_time") {
        if (!scalar || !point) return IndicatorValue::undefined("scalar models with a point attractor only");
    }
    if (name == "w") return gradient_resistance(o, GradientMode::Barrier);
    if (name == "w_literal") return gradient_resistance(o, GradientMode::Literal);
    if (name == "intensity") return intensity_scalar(o, basin());
    if (name == "dbif") {
        const json& b = cfg_["bifurcation"];
        ParameterRay ray{b["params"].get<std::vector<std::string>>(), b["direction"].get<State>(),
                         b["rho_max"].get<double>()};
        if (ray.params.size() != ray.direction.size())
            throw ConfigError("config.bifurcation.direction", "one component per parameter is required");
        for (const auto& p : ray.params)
            if (!o.field().has_param(p)) throw ConfigError("config.bifurcation.params", "unknown parameter '" + p + "'");
        return distance_to_bifurcation(o.field(), o.attractor().single_point()[0], {ray}, b["step"].get<double>());
    }
    if (name == "resistance" || name == "elasticity" || name == "persistence_intensity") {
        const json& s = cfg_["stress"];
        StressProtocol protocol;
        protocol.duration = s["duration"].get<double>();
        for (std::size_t i = 0; i < s["lambdas"].size(); ++i) {
            ParamMap lam;
            for (const auto& [k, v] : s["lambdas"][i].items()) {
                if (!o.field().has_param(k) || !v.is_number())
                    throw ConfigError("config.stress.lambdas[" + std::to_string(i) + "]." + k,
                                      "expected a numeric model parameter");
                lam[k] = v.get<double>();
            }
            protocol.lambdas.push_back(lam);
        }
        const HarrisonMode mode = s["mode"] == "weak" ? HarrisonMode::Weak : HarrisonMode::Reference;
        if (name == "resistance") return harrison_resistance(o.field(), o.attractor(), protocol, mode);
        if (name == "elasticity") return harrison_elasticity(o.field(), o.attractor(), protocol, mode);
        return persistence_intensity(o, protocol.lambdas.front());
    }
    if (name == "persistence_duration") {
        const json& p = cfg_["persistence"];
        const std::string param = p["param"].get<std::string>();
        if (!o.field().has_param(param)) throw ConfigError("config.persistence.param", "unknown parameter '" + param + "'");
        return persistence_duration(o, param, p["direction"].get<double>(), p["duration"].get<double>(),
                                    p["rho_max"].get<double>());
    }
    if (name == "escape_time") {
        const json& e = cfg_["escape"];
        const Expression nu = Expression::parse(e["nu"].get<std::string>(), {"x"});
        const VectorField field = o.field();
        const ScalarFn drift = [field](double x) { return field.eval(std::span<const double>(&x, 1))[0]; };
        const ScalarFn nufn = [nu](double x) { return nu.evaluate(std::span<const double>(&x, 1)); };
        const double inf = std::numeric_limits<double>::infinity();
        const StationaryDensity density(drift, nufn, edge_value(e, "lower", -inf), edge_value(e, "upper", inf),
                                        e["x_ref"].get<double>(), e["delta"].get<double>());
        return escape_time(density, e["x0"].get<double>(), e["x"].get<double>());
    }
    throw ConfigError("config.indicators", "unknown indicator '" + name + "'");
}

}  // namespace resilience
