#include "bench.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "errors.hpp"
#include "indicator_context.hpp"
#include "local_indicators.hpp"
#include "parallel.hpp"
#include "transient.hpp"

namespace resilience {

namespace {

const std::vector<std::string> kBenchIndicators = {"ev",        "dt",         "inv_mean_return_time",
                                                   "w",         "intensity",  "inv_resistance",
                                                   "inv_elasticity"};

json stress_block() {
    return {{"lambdas", json::array({{{"K", kBenchStressK}}})}, {"duration", kBenchStressDuration}, {"mode", "reference"}};
}

json species_model(double r, double L) {
    return {{"model", "allee"},
            {"params", {{"r", r}, {"L", L}, {"K", 1.0}}},
            {"stress", stress_block()},
            {"roi", {{"basin_interval", {{"offset", 1e-7}, {"side", "lower"}}}}},
            {"integrator", {{"rel_tol", 1e-12}, {"abs_tol", 1e-12}}}};
}

std::vector<std::size_t> species_subset(const json& cfg) {
    std::vector<std::size_t> out;
    if (!cfg.contains("species")) {
        for (std::size_t i = 0; i < benchmark_species().size(); ++i) out.push_back(i);
        return out;
    }
    const json& s = cfg["species"];
    if (!s.is_array() || s.empty()) throw ConfigError("config.species", "expected a non-empty array of species numbers");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number_integer() || s[i].get<long long>() < 1 || s[i].get<long long>() > 5)
            throw ConfigError("config.species[" + std::to_string(i) + "]", "expected a species number from 1 to 5");
        out.push_back(s[i].get<std::size_t>() - 1);
    }
    return out;
}

// Rank 1 is the most resilient; every bench indicator is oriented so larger is more resilient.
std::vector<json> ranks(const std::vector<IndicatorValue>& v) {
    std::vector<json> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_defined()) continue;
        std::size_t better = 0;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[j].is_defined() && v[j].as_double() > v[i].as_double()) ++better;
        out[i] = better + 1;
    }
    return out;
}

}  // namespace

const std::array<std::pair<double, double>, 5>& benchmark_species() {
    static const std::array<std::pair<double, double>, 5> s = {
        {{0.5, 0.2}, {1.3, 0.3}, {2.5, 0.4}, {5.0, 0.6}, {10.0, 0.7}}};
    return s;
}

json validate_bench_config(const json& in) {
    json cfg = in;
    const std::string cmd = cfg["command"].get<std::string>();
    std::set<std::string> allowed = {"command", "samples", "seed", "workers", "format", "out"};
    if (cmd == "bench-sweep") allowed.insert("grid");
    else allowed.insert("species");
    if (cmd == "bench-flowkick") allowed.insert("tau_grid");
    for (const auto& [k, v] : cfg.items())
        if (!allowed.count(k)) throw ConfigError("config." + k, "not accepted by " + cmd);
    species_subset(cfg);

    if (cmd == "bench-species") {
        if (!cfg.contains("samples")) cfg["samples"] = 1000;
        cfg["indicators"] = kBenchIndicators;
        cfg["stress"] = stress_block();
        return cfg;
    }
    if (cmd == "bench-flowkick") {
        if (!cfg.contains("tau_grid")) cfg["tau_grid"] = {{"from", 0.05}, {"to", 20.0}, {"count", 40}};
        const json& g = cfg["tau_grid"];
        if (!g.is_object()) throw ConfigError("config.tau_grid", "expected an object");
        for (const auto& [k, v] : g.items())
            if (k != "from" && k != "to" && k != "count") throw ConfigError("config.tau_grid." + k, "unknown key");
        if (!g.contains("from") || !g["from"].is_number() || !(g["from"].get<double>() > 0.0))
            throw ConfigError("config.tau_grid.from", "expected a positive multiple of t_r");
        if (!g.contains("to") || !g["to"].is_number() || !(g["to"].get<double>() > g["from"].get<double>()))
            throw ConfigError("config.tau_grid.to", "expected a number above from");
        if (!g.contains("count") || !g["count"].is_number_integer() || g["count"].get<long long>() < 2)
            throw ConfigError("config.tau_grid.count", "expected an integer of at least 2");
        return cfg;
    }
    // bench-sweep expands into a plain two-axis sweep over (r, L).
    json sweep = species_model(0.5, 0.2);
    for (const char* k : {"command", "seed", "workers", "format", "out"})
        if (cfg.contains(k)) sweep[k] = cfg[k];
    sweep["samples"] = cfg.value("samples", 32);
    sweep["indicators"] = kBenchIndicators;
    sweep["grid"] = cfg.value("grid", json::array({{{"param", "r"}, {"from", 0.01}, {"to", 0.5}, {"count", 50}, {"log", false}},
                                                   {{"param", "L"}, {"from", 0.5}, {"to", 0.95}, {"count", 46}, {"log", false}}}));
    const json& g = sweep["grid"];
    if (!g.is_array() || g.size() != 2) throw ConfigError("config.grid", "expected the r axis then the L axis");
    const char* names[2] = {"r", "L"};
    for (std::size_t i = 0; i < 2; ++i) {
        const std::string p = "config.grid[" + std::to_string(i) + "]";
        if (!g[i].is_object() || g[i].value("param", "") != names[i])
            throw ConfigError(p + ".param", std::string("expected ") + names[i]);
        for (const char* k : {"from", "to"})
            if (!g[i].contains(k) || !g[i][k].is_number() || !(g[i][k].get<double>() > 0.0))
                throw ConfigError(p + "." + k, "expected a positive number");
        if (!g[i].contains("count") || !g[i]["count"].is_number_integer() || g[i]["count"].get<long long>() < 1)
            throw ConfigError(p + ".count", "expected a positive integer");
    }
    // Stress responses need the perturbed carrying capacity above the threshold.
    sweep["restrict"] = json::array({{{"indicator", "inv_resistance"}, {"param", "L"}, {"below", kBenchStressK}},
                                     {{"indicator", "inv_elasticity"}, {"param", "L"}, {"below", kBenchStressK}}});
    return sweep;
}

Report run_bench_species(const json& cfg) {
    Report rep;
    const auto subset = species_subset(cfg);
    const auto& species = benchmark_species();
    const std::size_t samples = cfg["samples"].get<std::size_t>();
    const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
    const std::size_t workers = cfg.value("workers", std::size_t{1});

    std::vector<std::vector<IndicatorValue>> values(kBenchIndicators.size(),
                                                    std::vector<IndicatorValue>(subset.size()));
    for (std::size_t s = 0; s < subset.size(); ++s) {
        const auto [r, L] = species[subset[s]];
        json model = species_model(r, L);
        model["samples"] = samples;
        model["seed"] = seed;
        IndicatorContext ctx(model, {});
        for (std::size_t k = 0; k < kBenchIndicators.size(); ++k) {
            try {
                values[k][s] = ctx.compute(kBenchIndicators[k], workers, nullptr);
            } catch (const Error& e) {
                values[k][s] = IndicatorValue::undefined(e.what());
            }
            if (!values[k][s].is_defined()) rep.success = false;
        }
    }
    Table t;
    t.columns = {"indicator", "species", "r", "L", "value", "std_error", "rank", "reason"};
    json top = json::object();
    for (std::size_t k = 0; k < kBenchIndicators.size(); ++k) {
        const auto rk = ranks(values[k]);
        for (std::size_t s = 0; s < subset.size(); ++s) {
            const auto [r, L] = species[subset[s]];
            const IndicatorValue& v = values[k][s];
            t.rows.push_back({kBenchIndicators[k], subset[s] + 1, r, L, indicator_cell(v),
                              std::isnan(v.std_error) ? json() : number_cell(v.std_error), rk[s], v.reason});
            if (rk[s] == 1) top[kBenchIndicators[k]].push_back(subset[s] + 1);
        }
    }
    rep.artifacts.push_back(render_table(t, cfg));
    rep.summary = {{"command", "bench-species"}, {"success", rep.success}, {"top_ranked", top}};
    return rep;
}

Report run_bench_flowkick(const json& cfg) {
    Report rep;
    const auto subset = species_subset(cfg);
    const auto& species = benchmark_species();
    const std::size_t workers = cfg.value("workers", std::size_t{1});
    const json& g = cfg["tau_grid"];
    const double from = g["from"].get<double>(), to = g["to"].get<double>();
    const std::size_t count = g["count"].get<std::size_t>();

    Table areas, curves;
    areas.columns = {"species", "r", "L", "dt", "area", "normalized_area"};
    curves.columns = {"species", "tau", "kappa_star", "area_cumulative"};
    json summary = json::array();
    for (std::size_t s : subset) {
        const auto [r, L] = species[s];
        const ModelEntry m = registry_get("allee", {{"r", r}, {"L", L}, {"K", 1.0}});
        const BasinOracle oracle(m.field, m.attractor);
        const double t_r =
            characteristic_return_time(LinearizedSystem::at_equilibrium(m.field, m.attractor.single_point())).t_r;
        std::vector<double> taus(count);
        for (std::size_t i = 0; i < count; ++i)
            taus[i] = t_r * from * std::pow(to / from, static_cast<double>(i) / static_cast<double>(count - 1));
        const double dir = -1.0;
        const ResilienceBoundary rb = resilience_boundary(oracle, taus, std::span<const double>(&dir, 1), workers);
        areas.rows.push_back({s + 1, r, L, rb.dt, rb.area, rb.normalized_area});
        for (std::size_t i = 0; i < rb.tau.size(); ++i)
            curves.rows.push_back({s + 1, rb.tau[i], rb.kappa_star[i], rb.area_cumulative[i]});
        summary.push_back({{"species", s + 1}, {"area", rb.area}, {"normalized_area", rb.normalized_area}});
    }
    rep.artifacts.push_back(render_table(areas, cfg));
    rep.artifacts.push_back(render_table(curves, cfg, "boundary"));
    rep.summary = {{"command", "bench-flowkick"}, {"success", true}, {"species", summary}};
    return rep;
}

}  // namespace resilience
