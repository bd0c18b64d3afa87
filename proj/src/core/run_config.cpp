#include "run_config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <set>
#include <sstream>

#include "bench.hpp"
#include "errors.hpp"
#include "indicator_context.hpp"
#include "local_indicators.hpp"
#include "parallel.hpp"
#include "parameter.hpp"
#include "transient.hpp"

namespace resilience {

namespace {

const std::vector<std::string> kCommands = {"eval",          "sweep",       "flowkick",      "rtip",
                                            "bench-species", "bench-sweep", "bench-flowkick"};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string render_csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_string()) return csv_escape(v.get<std::string>());
    return csv_escape(v.dump());
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// --- validation helpers ---

void allow_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError(path + "." + k, "unknown key");
}

double need_number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw ConfigError(path + "." + key, "missing required number");
    if (!obj[key].is_number()) throw ConfigError(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

double opt_number(json& obj, const std::string& key, const std::string& path, double def) {
    if (!obj.contains(key)) {
        obj[key] = def;
        return def;
    }
    if (!obj[key].is_number()) throw ConfigError(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

void positive(double v, const std::string& path) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path, "must be a positive finite number");
}

std::vector<double> number_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<double> axis_values(const json& g, const std::string& path) {
    const double from = need_number(g, "from", path), to = need_number(g, "to", path);
    if (!g.contains("count") || !g["count"].is_number_integer() || g["count"].get<long long>() < 1)
        throw ConfigError(path + ".count", "expected a positive integer");
    const std::size_t n = g["count"].get<std::size_t>();
    const bool log = g.value("log", false);
    if (log && !(from > 0.0 && to > 0.0)) throw ConfigError(path, "log spacing needs positive bounds");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = log ? from * std::pow(to / from, s) : from + (to - from) * s;
    }
    if (n > 1) out.back() = to;
    return out;
}

void validate_axis(json& g, const std::string& path, bool need_param) {
    std::set<std::string> keys = {"from", "to", "count", "log"};
    if (need_param) keys.insert("param");
    allow_keys(g, path, keys);
    if (need_param && (!g.contains("param") || !g["param"].is_string()))
        throw ConfigError(path + ".param", "expected a parameter name");
    axis_values(g, path);
    if (!g.contains("log")) g["log"] = false;
}

void validate_model(json& cfg) {
    const bool has_model = cfg.contains("model"), has_expr = cfg.contains("expr");
    if (has_model == has_expr) throw ConfigError("config.model", "exactly one of 'model' or 'expr' is required");
    if (!cfg.contains("params")) cfg["params"] = json::object();
    if (!cfg["params"].is_object()) throw ConfigError("config.params", "expected an object of numbers");
    for (const auto& [k, v] : cfg["params"].items())
        if (!v.is_number()) throw ConfigError("config.params." + k, "expected a number");
    if (has_model) {
        if (!cfg["model"].is_string()) throw ConfigError("config.model", "expected a model name");
        const auto& names = registry_names();
        const std::string m = cfg["model"].get<std::string>();
        if (std::find(names.begin(), names.end(), m) == names.end())
            throw ConfigError("config.model", "unknown model '" + m + "'");
    } else {
        json& e = cfg["expr"];
        allow_keys(e, "config.expr", {"states", "rhs", "jacobian", "equilibria"});
        for (const char* k : {"states", "rhs"}) {
            if (!e.contains(k) || !e[k].is_array() || e[k].empty())
                throw ConfigError(std::string("config.expr.") + k, "expected a non-empty array of strings");
            for (const auto& s : e[k])
                if (!s.is_string()) throw ConfigError(std::string("config.expr.") + k, "expected strings");
        }
        if (!cfg.contains("attractor")) throw ConfigError("config.attractor", "required for expression models");
    }
    if (cfg.contains("attractor")) {
        json& a = cfg["attractor"];
        allow_keys(a, "config.attractor", {"points", "components", "conv_radius"});
        if (a.contains("points")) {
            if (!a["points"].is_array() || a["points"].empty())
                throw ConfigError("config.attractor.points", "expected a non-empty array of states");
            for (std::size_t i = 0; i < a["points"].size(); ++i)
                number_array(a["points"][i], "config.attractor.points[" + std::to_string(i) + "]");
        }
        if (a.contains("components")) {
            if (!a["components"].is_array()) throw ConfigError("config.attractor.components", "expected an array");
            for (std::size_t i = 0; i < a["components"].size(); ++i) {
                const std::string p = "config.attractor.components[" + std::to_string(i) + "]";
                json& c = a["components"][i];
                allow_keys(c, p, {"kind", "center", "radius"});
                const std::string kind = c.value("kind", "point");
                if (kind != "point" && kind != "circle" && kind != "ball")
                    throw ConfigError(p + ".kind", "expected point, circle or ball");
                number_array(c.value("center", json()), p + ".center");
                if (kind != "point") positive(need_number(c, "radius", p), p + ".radius");
            }
        }
        if (!a.contains("points") && !a.contains("components"))
            throw ConfigError("config.attractor", "expected 'points' or 'components'");
    }
    // Building the model surfaces parse and domain errors with their key.
    try {
        build_model(cfg, {});
    } catch (const ParseError& e) {
        throw ConfigError("config.expr.rhs", e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(cfg.contains("model") ? "config.params" : "config.expr", e.what());
    }
}

void validate_roi(json& roi, const std::string& path) {
    allow_keys(roi, path, {"box", "ball", "basin_interval"});
    if (roi.size() != 1) throw ConfigError(path, "expected exactly one of box, ball or basin_interval");
    if (roi.contains("box")) {
        allow_keys(roi["box"], path + ".box", {"lo", "hi"});
        const auto lo = number_array(roi["box"].value("lo", json()), path + ".box.lo");
        const auto hi = number_array(roi["box"].value("hi", json()), path + ".box.hi");
        if (lo.size() != hi.size()) throw ConfigError(path + ".box", "lo and hi differ in length");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw ConfigError(path + ".box", "bounds must satisfy lo < hi");
    } else if (roi.contains("ball")) {
        allow_keys(roi["ball"], path + ".ball", {"center", "radius"});
        number_array(roi["ball"].value("center", json()), path + ".ball.center");
        positive(need_number(roi["ball"], "radius", path + ".ball"), path + ".ball.radius");
    } else {
        allow_keys(roi["basin_interval"], path + ".basin_interval", {"offset", "side"});
        opt_number(roi["basin_interval"], "offset", path + ".basin_interval", 1e-7);
        const std::string side = roi["basin_interval"].value("side", "lower");
        if (side != "lower" && side != "upper") throw ConfigError(path + ".basin_interval.side", "expected lower or upper");
        roi["basin_interval"]["side"] = side;
    }
}

void validate_indicators(json& cfg) {
    if (!cfg.contains("indicators")) throw ConfigError("config.indicators", "missing indicator list");
    const json& list = cfg["indicators"];
    if (!list.is_array()) throw ConfigError("config.indicators", "expected an array of names");
    if (list.empty()) throw ConfigError("config.indicators", "empty indicator list");
    const auto& known = indicator_names();
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string p = "config.indicators[" + std::to_string(i) + "]";
        if (!list[i].is_string()) throw ConfigError(p, "expected an indicator name");
        std::string name = list[i].get<std::string>();
        if (name.rfind("inv_", 0) == 0) name = name.substr(4);
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError(p, "unknown indicator '" + list[i].get<std::string>() + "'");
        auto need = [&](const char* key) {
            if (!cfg.contains(key)) throw ConfigError(std::string("config.") + key, "required by indicator '" + name + "'");
        };
        if (name == "lv" || name == "mean_return_time") need("roi");
        if (name == "sb") need("density");
        if (name == "precariousness" || name == "return_time") need("x0");
        if (name == "resistance" || name == "elasticity" || name == "persistence_intensity") need("stress");
        if (name == "persistence_duration") need("persistence");
        if (name == "dbif") need("bifurcation");
        if (name == "escape_time") need("escape");
    }
}

void validate_blocks(json& cfg) {
    if (cfg.contains("integrator")) {
        json& ic = cfg["integrator"];
        allow_keys(ic, "config.integrator", {"rel_tol", "abs_tol", "max_step"});
    } else {
        cfg["integrator"] = json::object();
    }
    positive(opt_number(cfg["integrator"], "rel_tol", "config.integrator", 1e-12), "config.integrator.rel_tol");
    positive(opt_number(cfg["integrator"], "abs_tol", "config.integrator", 1e-12), "config.integrator.abs_tol");
    if (cfg.contains("roi")) validate_roi(cfg["roi"], "config.roi");
    if (cfg.contains("density")) {
        json& d = cfg["density"];
        allow_keys(d, "config.density", {"mean", "sigma", "lo", "hi"});
        const auto m = number_array(d.value("mean", json()), "config.density.mean");
        const auto s = number_array(d.value("sigma", json()), "config.density.sigma");
        const auto lo = number_array(d.value("lo", json()), "config.density.lo");
        const auto hi = number_array(d.value("hi", json()), "config.density.hi");
        if (s.size() != m.size() || lo.size() != m.size() || hi.size() != m.size())
            throw ConfigError("config.density", "mean, sigma, lo and hi must have equal length");
    }
    if (cfg.contains("x0")) number_array(cfg["x0"], "config.x0");
    if (cfg.contains("stress")) {
        json& s = cfg["stress"];
        allow_keys(s, "config.stress", {"lambdas", "duration", "mode"});
        if (!s.contains("lambdas") || !s["lambdas"].is_array() || s["lambdas"].empty())
            throw ConfigError("config.stress.lambdas", "expected a non-empty array of parameter objects");
        positive(need_number(s, "duration", "config.stress"), "config.stress.duration");
        const std::string mode = s.value("mode", "reference");
        if (mode != "reference" && mode != "weak") throw ConfigError("config.stress.mode", "expected reference or weak");
        s["mode"] = mode;
    }
    if (cfg.contains("persistence")) {
        json& p = cfg["persistence"];
        allow_keys(p, "config.persistence", {"param", "direction", "duration", "rho_max"});
        if (!p.contains("param") || !p["param"].is_string()) throw ConfigError("config.persistence.param", "expected a name");
        positive(need_number(p, "duration", "config.persistence"), "config.persistence.duration");
        opt_number(p, "direction", "config.persistence", -1.0);
        opt_number(p, "rho_max", "config.persistence", 1e3);
    }
    if (cfg.contains("bifurcation")) {
        json& b = cfg["bifurcation"];
        allow_keys(b, "config.bifurcation", {"params", "direction", "rho_max", "step"});
        if (!b.contains("params") || !b["params"].is_array()) throw ConfigError("config.bifurcation.params", "expected names");
        number_array(b.value("direction", json()), "config.bifurcation.direction");
        opt_number(b, "rho_max", "config.bifurcation", 10.0);
        opt_number(b, "step", "config.bifurcation", 0.0);
    }
    if (cfg.contains("escape")) {
        json& e = cfg["escape"];
        allow_keys(e, "config.escape", {"nu", "lower", "upper", "x_ref", "x0", "x", "delta"});
        if (!e.contains("nu") || !e["nu"].is_string()) throw ConfigError("config.escape.nu", "expected an expression in x");
        for (const char* k : {"x_ref", "x0", "x"}) need_number(e, k, "config.escape");
        for (const char* k : {"lower", "upper"})
            if (e.contains(k) && !e[k].is_number() && !e[k].is_string())
                throw ConfigError(std::string("config.escape.") + k, "expected a number or \"inf\"");
        opt_number(e, "delta", "config.escape", 1e-6);
    }
}

std::uint64_t seed_of(const json& cfg) { return cfg.value("seed", std::uint64_t{0}); }
std::size_t workers_of(const json& cfg) { return cfg.value("workers", std::size_t{1}); }

std::string params_label(const ParamMap& p) {
    std::string s;
    for (const auto& [k, v] : p) {
        if (!s.empty()) s += ';';
        s += k + "=" + format_double(v);
    }
    return s;
}

std::string join_flags(const IndicatorValue& v) {
    std::string s;
    for (const auto& f : v.flags) {
        if (!s.empty()) s += ';';
        s += f;
    }
    return s;
}

std::string join_state(std::span<const double> x) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ';';
        s += format_double(x[i]);
    }
    return s;
}

}  // namespace

Artifact render_table(const Table& t, const json& cfg, const std::string& name) {
    const std::string fmt = cfg.value("format", "csv");
    if (fmt == "json") {
        json doc = {{"version", kVersion}, {"config", cfg}, {"table", t.to_json()}};
        return {name, "application/json", doc.dump(2) + "\n"};
    }
    return {name, "text/csv", t.to_csv(cfg)};
}

namespace {

// --- commands ---

Report run_eval(const json& cfg) {
    Report rep;
    IndicatorContext ctx(cfg, {});
    Table t;
    t.columns = {"model", "params", "indicator", "value", "std_error", "samples", "undecided", "flags", "reason"};
    const std::string model = cfg.contains("model") ? cfg["model"].get<std::string>() : "expr";
    const std::string plabel = params_label(ctx.params());
    json records = json::array();
    std::vector<SampleRecord> dump;
    for (const auto& n : cfg["indicators"]) {
        const std::string name = n.get<std::string>();
        IndicatorValue v;
        try {
            v = ctx.compute(name, workers_of(cfg), cfg.value("dump_samples", false) ? &dump : nullptr);
        } catch (const Error& e) {
            v = IndicatorValue::undefined(e.what());
        }
        if (!v.is_defined()) rep.success = false;
        t.rows.push_back({model, plabel, name, indicator_cell(v),
                          std::isnan(v.std_error) ? json() : number_cell(v.std_error),
                          v.samples ? json(v.samples) : json(), v.samples ? json(v.undecided) : json(), join_flags(v),
                          v.reason});
        json rec = {{"indicator", name}, {"value", indicator_cell(v)}, {"flags", v.flags}, {"reason", v.reason}};
        for (const auto& [k, x] : v.extras) rec["extras"][k] = number_cell(x);
        records.push_back(rec);
    }
    rep.artifacts.push_back(render_table(t, cfg));
    if (!dump.empty()) {
        Table s;
        s.columns = {"index", "x", "verdict", "time_to_decision"};
        for (const auto& r : dump)
            s.rows.push_back({r.index, join_state(r.x), verdict_name(r.verdict), number_cell(r.time_to_decision)});
        rep.artifacts.push_back(render_table(s, cfg, "samples"));
    }
    rep.summary = {{"command", "eval"}, {"success", rep.success}, {"records", records}};
    return rep;
}

}  // namespace

std::string csv_header(const json& config) {
    std::string h = "# resilience ";
    h += kVersion;
    h += " generated " + utc_now() + "\n";
    h += "# config " + config.dump() + "\n";
    return h;
}

std::string Table::to_csv(const json& config) const {
    std::ostringstream os;
    os << csv_header(config);
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_escape(columns[i]);
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << render_csv_cell(row[i]);
        os << "\n";
    }
    return os.str();
}

json Table::to_json() const {
    json out = {{"columns", columns}, {"rows", json::array()}};
    for (const auto& row : rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i) r[columns[i]] = row[i];
        out["rows"].push_back(r);
    }
    return out;
}

json number_cell(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json indicator_cell(const IndicatorValue& v) {
    switch (v.kind) {
        case IndicatorValue::Kind::Finite: return v.value;
        case IndicatorValue::Kind::PosInf: return "inf";
        case IndicatorValue::Kind::NegInf: return "-inf";
        case IndicatorValue::Kind::Undefined: return nullptr;
    }
    return nullptr;
}

const std::vector<std::string>& indicator_names() {
    static const std::vector<std::string> names = {
        "ev",          "tr",         "reactivity",       "rho_max",        "t_max",
        "i_s",         "i_d",        "dt",               "lw",             "lv",
        "sb",          "precariousness", "return_time",  "mean_return_time", "w",
        "w_literal",   "intensity",  "dbif",             "resistance",     "elasticity",
        "persistence_intensity", "persistence_duration", "escape_time"};
    return names;
}

json validate_config(const json& input) {
    if (!input.is_object()) throw ConfigError("config", "expected a JSON object");
    json cfg = input;
    allow_keys(cfg, "config",
               {"command", "model", "params", "expr", "attractor", "indicators", "integrator", "roi", "density",
                "samples", "seed", "workers", "x0", "stress", "bifurcation", "persistence", "escape", "flowkick",
                "rtip", "grid", "format", "out", "dump_samples", "species", "tau_grid", "restrict"});
    if (!cfg.contains("command")) cfg["command"] = "eval";
    if (!cfg["command"].is_string()) throw ConfigError("config.command", "expected a command name");
    const std::string cmd = cfg["command"].get<std::string>();
    if (std::find(kCommands.begin(), kCommands.end(), cmd) == kCommands.end())
        throw ConfigError("config.command", "unknown command '" + cmd + "'");
    if (!cfg.contains("format")) cfg["format"] = "csv";
    if (cfg["format"] != "csv" && cfg["format"] != "json") throw ConfigError("config.format", "expected csv or json");
    if (!cfg.contains("seed")) cfg["seed"] = 0;
    if (!cfg["seed"].is_number_unsigned() && !(cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() >= 0))
        throw ConfigError("config.seed", "expected a nonnegative integer");
    if (!cfg.contains("workers")) cfg["workers"] = 1;
    if (!cfg["workers"].is_number_integer() || cfg["workers"].get<long long>() < 1)
        throw ConfigError("config.workers", "expected a positive integer");
    if (cfg.contains("samples") && (!cfg["samples"].is_number_integer() || cfg["samples"].get<long long>() < 1))
        throw ConfigError("config.samples", "expected a positive integer");
    if (cfg.contains("out") && !cfg["out"].is_string()) throw ConfigError("config.out", "expected a path");
    if (cfg.contains("dump_samples") && !cfg["dump_samples"].is_boolean())
        throw ConfigError("config.dump_samples", "expected true or false");

    if (cmd.rfind("bench-", 0) == 0) return validate_bench_config(cfg);
    if (cfg.contains("restrict")) {
        if (!cfg["restrict"].is_array()) throw ConfigError("config.restrict", "expected an array");
        for (std::size_t i = 0; i < cfg["restrict"].size(); ++i) {
            const std::string p = "config.restrict[" + std::to_string(i) + "]";
            const json& r = cfg["restrict"][i];
            allow_keys(r, p, {"indicator", "param", "below"});
            if (!r.contains("indicator") || !r["indicator"].is_string()) throw ConfigError(p + ".indicator", "expected a name");
            if (!r.contains("param") || !r["param"].is_string()) throw ConfigError(p + ".param", "expected a name");
            need_number(r, "below", p);
        }
    }

    validate_model(cfg);
    validate_blocks(cfg);
    if (cmd == "eval" || cmd == "sweep") validate_indicators(cfg);
    if (cmd == "sweep") {
        if (!cfg.contains("grid") || !cfg["grid"].is_array() || cfg["grid"].empty() || cfg["grid"].size() > 2)
            throw ConfigError("config.grid", "expected one or two axes");
        const ParamMap params = IndicatorContext(cfg, {}).params();
        for (std::size_t i = 0; i < cfg["grid"].size(); ++i) {
            const std::string p = "config.grid[" + std::to_string(i) + "]";
            validate_axis(cfg["grid"][i], p, true);
            if (!params.count(cfg["grid"][i]["param"].get<std::string>()))
                throw ConfigError(p + ".param", "unknown parameter for this model");
        }
    }
    if (cmd == "flowkick") {
        if (!cfg.contains("flowkick")) cfg["flowkick"] = json::object();
        json& f = cfg["flowkick"];
        allow_keys(f, "config.flowkick", {"tau", "tau_grid", "direction", "kappa", "max_iters", "margin", "a0"});
        if (f.contains("tau") && f.contains("tau_grid"))
            throw ConfigError("config.flowkick", "give either tau or tau_grid");
        if (f.contains("tau")) {
            for (double v : number_array(f["tau"], "config.flowkick.tau")) positive(v, "config.flowkick.tau");
        } else {
            if (!f.contains("tau_grid")) f["tau_grid"] = {{"from", 0.05}, {"to", 20.0}, {"count", 40}, {"log", true}, {"relative_to_tr", true}};
            json& g = f["tau_grid"];
            const bool rel = g.value("relative_to_tr", false);
            json axis = g;
            axis.erase("relative_to_tr");
            validate_axis(axis, "config.flowkick.tau_grid", false);
            for (double v : axis_values(axis, "config.flowkick.tau_grid")) positive(v, "config.flowkick.tau_grid");
            axis["relative_to_tr"] = rel;
            g = axis;
        }
        if (f.contains("kappa")) number_array(f["kappa"], "config.flowkick.kappa");
        if (f.contains("direction")) number_array(f["direction"], "config.flowkick.direction");
        if (!f.contains("max_iters")) f["max_iters"] = 2000;
        opt_number(f, "margin", "config.flowkick", 1e-8);
    }
    if (cmd == "rtip") {
        if (!cfg.contains("rtip")) throw ConfigError("config.rtip", "missing rtip block");
        json& r = cfg["rtip"];
        allow_keys(r, "config.rtip", {"param", "lam0", "lam_inf", "profile", "scale", "x_start", "rates", "rate_grid",
                                       "threshold", "eps_conv"});
        if (!r.contains("param") || !r["param"].is_string()) throw ConfigError("config.rtip.param", "expected a name");
        need_number(r, "lam_inf", "config.rtip");
        if (!r.contains("profile")) r["profile"] = "tanh";
        if (!r["profile"].is_string()) throw ConfigError("config.rtip.profile", "expected tanh or an expression in s");
        positive(opt_number(r, "scale", "config.rtip", 1.0), "config.rtip.scale");
        positive(opt_number(r, "eps_conv", "config.rtip", 1e-6), "config.rtip.eps_conv");
        if (r.contains("rates")) {
            for (double v : number_array(r["rates"], "config.rtip.rates")) positive(v, "config.rtip.rates");
        }
        if (r.contains("rate_grid")) validate_axis(r["rate_grid"], "config.rtip.rate_grid", false);
        if (!r.contains("threshold")) r["threshold"] = true;
        if (r.contains("x_start")) number_array(r["x_start"], "config.rtip.x_start");
    }
    return cfg;
}

Report run(const json& config) {
    const json cfg = validate_config(config);
    const std::string cmd = cfg["command"].get<std::string>();
    Report rep;
    if (cmd == "eval") rep = run_eval(cfg);
    else if (cmd == "sweep" || cmd == "bench-sweep") rep = run_sweep(cfg);
    else if (cmd == "flowkick") rep = run_flowkick(cfg);
    else if (cmd == "rtip") rep = run_rtip(cfg);
    else if (cmd == "bench-species") rep = run_bench_species(cfg);
    else rep = run_bench_flowkick(cfg);
    rep.summary["config"] = cfg;
    return rep;
}

Report run_sweep(const json& cfg) {
    Report rep;
    const auto& grid = cfg["grid"];
    std::vector<std::string> axes;
    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        axes.push_back(grid[i]["param"].get<std::string>());
        values.push_back(axis_values(grid[i], "config.grid[" + std::to_string(i) + "]"));
    }
    const std::size_t n0 = values[0].size(), n1 = values.size() > 1 ? values[1].size() : 1;
    std::vector<std::string> names;
    for (const auto& n : cfg["indicators"]) names.push_back(n.get<std::string>());
    const std::size_t cells = n0 * n1;
    std::vector<std::vector<IndicatorValue>> results(cells, std::vector<IndicatorValue>(names.size()));
    auto restricted = [&](const std::string& name, const ParamMap& at) {
        if (!cfg.contains("restrict")) return false;
        for (const auto& r : cfg["restrict"]) {
            if (r.value("indicator", "") != name) continue;
            const auto it = at.find(r.value("param", ""));
            if (it != at.end() && !(it->second < r.value("below", 0.0))) return true;
        }
        return false;
    };
    parallel_for(cells, workers_of(cfg), [&](std::size_t c) {
        ParamMap over;
        over[axes[0]] = values[0][c / n1];
        if (axes.size() > 1) over[axes[1]] = values[1][c % n1];
        std::optional<IndicatorContext> ctx;
        try {
            ctx.emplace(cfg, over);
        } catch (const Error& e) {
            for (auto& r : results[c]) r = IndicatorValue::undefined(e.what());
            return;
        }
        for (std::size_t k = 0; k < names.size(); ++k) {
            try {
                if (restricted(names[k], over)) {
                    results[c][k] = IndicatorValue::undefined("outside the restricted parameter range");
                    continue;
                }
                results[c][k] = ctx->compute(names[k], 1, nullptr);
            } catch (const Error& e) {
                results[c][k] = IndicatorValue::undefined(e.what());
            }
        }
    });
    // Min-max normalization per indicator over finite cells.
    std::vector<double> lo(names.size(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(names.size(), -std::numeric_limits<double>::infinity());
    for (const auto& row : results)
        for (std::size_t k = 0; k < names.size(); ++k)
            if (row[k].is_finite()) {
                lo[k] = std::min(lo[k], row[k].value);
                hi[k] = std::max(hi[k], row[k].value);
            }
    Table t;
    t.columns = axes;
    for (const char* c : {"indicator", "raw", "normalized", "reason"}) t.columns.push_back(c);
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t k = 0; k < names.size(); ++k) {
            const IndicatorValue& v = results[c][k];
            std::vector<json> row{values[0][c / n1]};
            if (axes.size() > 1) row.push_back(values[1][c % n1]);
            row.push_back(names[k]);
            row.push_back(indicator_cell(v));
            json norm = nullptr;
            if (v.is_finite() && hi[k] > lo[k]) norm = (v.value - lo[k]) / (hi[k] - lo[k]);
            row.push_back(norm);
            row.push_back(v.is_defined() ? json(join_flags(v)) : json(v.reason));
            t.rows.push_back(std::move(row));
        }
    }
    rep.artifacts.push_back(render_table(t, cfg));
    rep.summary = {{"command", cfg["command"]}, {"success", true}, {"cells", cells}};
    return rep;
}

Report run_flowkick(const json& cfg) {
    Report rep;
    IndicatorContext ctx(cfg, {});
    const BasinOracle& oracle = ctx.oracle();
    const json& f = cfg["flowkick"];
    FlowKickConfig fc;
    fc.max_iters = f["max_iters"].get<std::size_t>();
    fc.margin = f["margin"].get<double>();
    fc.integrator.rel_tol = cfg["integrator"]["rel_tol"].get<double>();
    fc.integrator.abs_tol = cfg["integrator"]["abs_tol"].get<double>();
    if (!oracle.attractor().is_single_point()) throw DomainError("flow-kick needs a point attractor");
    const State a0 = f.contains("a0") ? number_array(f["a0"], "config.flowkick.a0") : oracle.attractor().single_point();

    std::vector<double> taus;
    if (f.contains("tau")) {
        taus = f["tau"].get<std::vector<double>>();
    } else {
        taus = axis_values(f["tau_grid"], "config.flowkick.tau_grid");
        if (f["tau_grid"].value("relative_to_tr", false)) {
            const double t_r = characteristic_return_time(
                                   LinearizedSystem::at_equilibrium(oracle.field(), oracle.attractor().single_point()))
                                   .t_r;
            for (double& t : taus) t *= t_r;
        }
    }
    Table t;
    if (f.contains("kappa")) {
        const State kappa = f["kappa"].get<std::vector<double>>();
        const FlowKick fk(oracle, fc);
        t.columns = {"tau", "kappa", "verdict", "escape_iteration", "iterations", "reason"};
        std::vector<FlowKickOrbit> orbits(taus.size());
        parallel_for(taus.size(), workers_of(cfg), [&](std::size_t i) { orbits[i] = fk.verdict({taus[i], kappa}, a0); });
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const auto& o = orbits[i];
            if (o.verdict == FlowKickOrbit::Verdict::Undecided) rep.success = false;
            t.rows.push_back({taus[i], join_state(kappa), flow_kick_name(o.verdict),
                              o.verdict == FlowKickOrbit::Verdict::Escaped ? json(o.escape_iteration) : json(),
                              o.states.size(), o.reason});
        }
        rep.summary = {{"command", "flowkick"}, {"success", rep.success}};
    } else {
        State dir;
        if (f.contains("direction")) {
            dir = f["direction"].get<std::vector<double>>();
        } else {
            // Toward the nearest finite basin edge for scalar models.
            dir = {-1.0};
            if (oracle.dimension() == 1) {
                const ScalarBasin b = scalar_basin(oracle);
                if (!std::isfinite(b.lower) && std::isfinite(b.upper)) dir = {1.0};
            } else {
                throw ConfigError("config.flowkick.direction", "required for multidimensional models");
            }
        }
        const ResilienceBoundary rb = resilience_boundary(oracle, taus, dir, workers_of(cfg), fc);
        t.columns = {"tau", "kappa_star", "area_cumulative"};
        for (std::size_t i = 0; i < rb.tau.size(); ++i)
            t.rows.push_back({rb.tau[i], rb.kappa_star[i], rb.area_cumulative[i]});
        rep.summary = {{"command", "flowkick"},
                       {"success", true},
                       {"dt", rb.dt},
                       {"area", rb.area},
                       {"normalized_area", rb.normalized_area}};
    }
    rep.artifacts.push_back(render_table(t, cfg));
    return rep;
}

Report run_rtip(const json& cfg) {
    Report rep;
    IndicatorContext ctx(cfg, {});
    const json& r = cfg["rtip"];
    RTipProblem prob;
    prob.field = ctx.oracle().field();
    prob.param = r["param"].get<std::string>();
    if (!prob.field.has_param(prob.param)) throw ConfigError("config.rtip.param", "unknown parameter for this model");
    const double lam0 = r.contains("lam0") ? r["lam0"].get<double>() : prob.field.param(prob.param);
    const double lam_inf = r["lam_inf"].get<double>();
    const std::string profile = r["profile"].get<std::string>();
    try {
        prob.ramp = profile == "tanh" ? RampProfile::tanh(lam0, lam_inf, r["scale"].get<double>())
                                      : RampProfile::expression(lam0, lam_inf, profile, r["scale"].get<double>());
    } catch (const Error& e) {
        throw ConfigError("config.rtip.profile", e.what());
    }
    if (r.contains("x_start")) {
        prob.x_start = r["x_start"].get<std::vector<double>>();
    } else if (ctx.oracle().attractor().is_single_point()) {
        prob.x_start = ctx.oracle().attractor().single_point();
    } else {
        throw ConfigError("config.rtip.x_start", "required when the attractor is not a point");
    }
    prob.eps_conv = r["eps_conv"].get<double>();
    prob.integrator.rel_tol = cfg["integrator"]["rel_tol"].get<double>();
    prob.integrator.abs_tol = cfg["integrator"]["abs_tol"].get<double>();

    std::vector<double> rates;
    if (r.contains("rates")) rates = r["rates"].get<std::vector<double>>();
    if (r.contains("rate_grid")) {
        const auto g = axis_values(r["rate_grid"], "config.rtip.rate_grid");
        rates.insert(rates.end(), g.begin(), g.end());
    }
    Table t;
    t.columns = {"r", "verdict", "terminal_state", "escape_time"};
    json summary = {{"command", "rtip"}};
    try {
        const RTipSolver solver(prob);
        std::vector<RTipOutcome> outs(rates.size());
        parallel_for(rates.size(), workers_of(cfg), [&](std::size_t i) { outs[i] = solver.track(rates[i]); });
        for (std::size_t i = 0; i < rates.size(); ++i)
            t.rows.push_back({rates[i], rtip_name(outs[i].verdict), join_state(outs[i].terminal),
                              number_cell(outs[i].escape_time)});
    } catch (const DomainError& e) {
        if (std::string(e.what()).find("not applicable") == std::string::npos) throw;
        summary["flag"] = e.what();
        rep.success = false;
    }
    if (r["threshold"].get<bool>()) {
        std::vector<RTipTrace> trace;
        const IndicatorValue v = rtip_threshold(prob, {}, &trace);
        summary["r_star"] = indicator_cell(v);
        summary["flags"] = v.flags;
        summary["reason"] = v.reason;
        if (!v.is_defined()) rep.success = false;
        Table tr;
        tr.columns = {"r", "verdict", "terminal_state"};
        for (const auto& s : trace) tr.rows.push_back({s.r, rtip_name(s.outcome.verdict), join_state(s.outcome.terminal)});
        rep.artifacts.push_back(render_table(t, cfg));
        rep.artifacts.push_back(render_table(tr, cfg, "trace"));
    } else {
        rep.artifacts.push_back(render_table(t, cfg));
    }
    summary["success"] = rep.success;
    rep.summary = summary;
    return rep;
}

}  // namespace resilience
