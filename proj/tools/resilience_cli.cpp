// Command-line front end over the C API.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "resilience/resilience.h"

using json = nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

double number(const std::string& s, const std::string& flag) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "not a number: '" + s + "'");
    }
}

json numbers(const std::string& s, const std::string& flag) {
    json a = json::array();
    for (const auto& t : split(s, ',')) a.push_back(number(t, flag));
    return a;
}

json parse_params(const std::string& s) {
    json p = json::object();
    for (const auto& kv : split(s, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--params", "expected k=v, got '" + kv + "'");
        p[kv.substr(0, eq)] = number(kv.substr(eq + 1), "--params");
    }
    return p;
}

// box:lo1,lo2:hi1,hi2 | ball:c1,c2:radius | basin:lower|upper[:offset]
json parse_roi(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() >= 2 && parts[0] == "box" && parts.size() == 3)
        return {{"box", {{"lo", numbers(parts[1], "--roi")}, {"hi", numbers(parts[2], "--roi")}}}};
    if (parts.size() == 3 && parts[0] == "ball")
        return {{"ball", {{"center", numbers(parts[1], "--roi")}, {"radius", number(parts[2], "--roi")}}}};
    if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "basin") {
        json b = {{"side", parts[1]}};
        if (parts.size() == 3) b["offset"] = number(parts[2], "--roi");
        return {{"basin_interval", b}};
    }
    throw CLI::ValidationError("--roi", "expected box:LO:HI, ball:CENTER:R or basin:SIDE[:OFFSET]");
}

// name=from:to:count[:log],...
json parse_grid(const std::string& s) {
    json g = json::array();
    for (const auto& axis : split(s, ',')) {
        const auto eq = axis.find('=');
        const auto parts = eq == std::string::npos ? std::vector<std::string>{} : split(axis.substr(eq + 1), ':');
        if (parts.size() < 3 || parts.size() > 4) throw CLI::ValidationError("--grid", "expected name=from:to:count[:log]");
        g.push_back({{"param", axis.substr(0, eq)},
                     {"from", number(parts[0], "--grid")},
                     {"to", number(parts[1], "--grid")},
                     {"count", static_cast<long long>(number(parts[2], "--grid"))},
                     {"log", parts.size() == 4 && parts[3] == "log"}});
    }
    return g;
}

json parse_points(const std::string& s, const std::string& flag) {
    json a = json::array();
    for (const auto& p : split(s, ';')) a.push_back(numbers(p, flag));
    return a;
}

std::string extension(const std::string& media) { return media == "application/json" ? ".json" : ".csv"; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resilience indicators for dynamical systems"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(rsl_version()));

    std::string config_path, out, format, model, params, expr, states, attractor, equilibria, indicators, roi, x0,
        grid, tau, tau_grid, direction, kappa, param, profile, x_start, rates, species;
    std::uint64_t seed = 0;
    std::size_t workers = 0, samples = 0;
    double rel_tol = 0, abs_tol = 0, lam0 = 0, lam_inf = 0, scale = 0;

    app.add_option("--config", config_path, "JSON config file; flags override its keys")->check(CLI::ExistingFile);
    app.add_option("--out", out, "Output path for the main table (stdout if omitted)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--samples", samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
    app.add_option("--rel-tol", rel_tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
    app.add_option("--abs-tol", abs_tol, "Integrator absolute tolerance")->check(CLI::PositiveNumber);
    app.add_option("--model", model, "Registry model name");
    app.add_option("--params", params, "Parameter overrides k=v[,k=v]");
    app.add_option("--expr", expr, "Inline right-hand sides separated by ';'");
    app.add_option("--states", states, "State names for --expr, comma separated");
    app.add_option("--attractor", attractor, "Attractor points for --expr: x1,x2;y1,y2");
    app.add_option("--equilibria", equilibria, "All equilibria for --expr: x1,x2;y1,y2");
    app.add_option("--indicators", indicators, "Indicator names, comma separated");
    app.add_option("--roi", roi, "box:LO:HI, ball:CENTER:R or basin:SIDE[:OFFSET]");
    app.add_option("--x0", x0, "State for pointwise indicators");

    auto* eval = app.add_subcommand("eval", "Evaluate indicators for one model");
    auto* sweep = app.add_subcommand("sweep", "Evaluate indicators over a parameter grid");
    sweep->add_option("--grid", grid, "name=from:to:count[:log][,name=...]");
    auto* flowkick = app.add_subcommand("flowkick", "Flow-kick verdicts or the resilience boundary");
    flowkick->add_option("--tau", tau, "Flow times, comma separated");
    flowkick->add_option("--tau-grid", tau_grid, "from:to:count in units of t_r, log spaced");
    flowkick->add_option("--direction", direction, "Kick direction for the boundary");
    flowkick->add_option("--kappa", kappa, "Fixed kick vector; prints verdicts instead of the boundary");
    auto* rtip = app.add_subcommand("rtip", "Rate-induced tipping sweep and critical rate");
    rtip->add_option("--param", param, "Ramped parameter")->required();
    rtip->add_option("--lam0", lam0, "Start value (defaults to the model value)");
    rtip->add_option("--lam-inf", lam_inf, "End value")->required();
    rtip->add_option("--scale", scale, "Ramp steepness")->check(CLI::PositiveNumber);
    rtip->add_option("--profile", profile, "tanh or an expression in s rising from 0 to 1");
    rtip->add_option("--x-start", x_start, "Past equilibrium guess");
    rtip->add_option("--r", rates, "Rates to track, comma separated");
    auto* bench = app.add_subcommand("bench", "Canned benchmark of the Allee species");
    bench->require_subcommand(1);
    auto* b_species = bench->add_subcommand("species-table", "Five-species indicator table with ranks");
    b_species->add_option("--species", species, "Species numbers, comma separated");
    auto* b_sweep = bench->add_subcommand("sweep", "Indicator heat-map data over (r, L)");
    b_sweep->add_option("--grid", grid, "r=from:to:count,L=from:to:count");
    auto* b_flowkick = bench->add_subcommand("flowkick-areas", "Resilience boundary areas per species");
    b_flowkick->add_option("--species", species, "Species numbers, comma separated");
    b_flowkick->add_option("--tau-grid", tau_grid, "from:to:count in units of t_r");

    json cfg = json::object();
    try {
        app.parse(argc, argv);
        if (app.get_subcommands().empty() && config_path.empty())
            throw CLI::RequiredError("a subcommand or --config");
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                cfg = json::parse(in);
            } catch (const json::parse_error& e) {
                std::cerr << "error: " << config_path << ": " << e.what() << "\n";
                return 2;
            }
        }
        auto set_if = [&](bool given, const char* key, const json& v) {
            if (given) cfg[key] = v;
        };
        if (*eval) cfg["command"] = "eval";
        if (*sweep) cfg["command"] = "sweep";
        if (*flowkick) cfg["command"] = "flowkick";
        if (*rtip) cfg["command"] = "rtip";
        if (*b_species) cfg["command"] = "bench-species";
        if (*b_sweep) cfg["command"] = "bench-sweep";
        if (*b_flowkick) cfg["command"] = "bench-flowkick";

        set_if(app.count("--format"), "format", format);
        if (app.count("--out")) cfg["out"] = out;
        if (out.empty() && cfg.contains("out") && cfg["out"].is_string()) out = cfg["out"].get<std::string>();
        set_if(app.count("--seed"), "seed", seed);
        set_if(app.count("--workers"), "workers", workers);
        set_if(app.count("--samples"), "samples", samples);
        if (app.count("--rel-tol")) cfg["integrator"]["rel_tol"] = rel_tol;
        if (app.count("--abs-tol")) cfg["integrator"]["abs_tol"] = abs_tol;
        if (app.count("--model")) {
            cfg.erase("expr");
            cfg["model"] = model;
        }
        if (app.count("--params")) {
            if (!cfg.contains("params")) cfg["params"] = json::object();
            cfg["params"].update(parse_params(params));
        }
        if (app.count("--expr")) {
            cfg.erase("model");
            const auto rhs = split(expr, ';');
            json names = json::array();
            if (app.count("--states")) {
                for (const auto& s : split(states, ',')) names.push_back(s);
            } else {
                const char* defaults[] = {"x", "y", "z"};
                if (rhs.size() > 3) throw CLI::ValidationError("--states", "required beyond three states");
                for (std::size_t i = 0; i < rhs.size(); ++i) names.push_back(defaults[i]);
            }
            cfg["expr"] = {{"states", names}, {"rhs", rhs}};
            if (app.count("--equilibria")) cfg["expr"]["equilibria"] = parse_points(equilibria, "--equilibria");
        }
        if (app.count("--attractor")) cfg["attractor"] = {{"points", parse_points(attractor, "--attractor")}};
        if (app.count("--indicators")) {
            cfg["indicators"] = json::array();
            for (const auto& s : split(indicators, ',')) cfg["indicators"].push_back(s);
        }
        if (app.count("--roi")) cfg["roi"] = parse_roi(roi);
        if (app.count("--x0")) cfg["x0"] = numbers(x0, "--x0");
        if (!grid.empty()) cfg["grid"] = parse_grid(grid);
        if (*flowkick) {
            if (!cfg.contains("flowkick")) cfg["flowkick"] = json::object();
            json& f = cfg["flowkick"];
            if (!tau.empty()) {
                f.erase("tau_grid");
                f["tau"] = numbers(tau, "--tau");
            }
            if (!tau_grid.empty()) {
                const auto p = split(tau_grid, ':');
                if (p.size() != 3) throw CLI::ValidationError("--tau-grid", "expected from:to:count");
                f.erase("tau");
                f["tau_grid"] = {{"from", number(p[0], "--tau-grid")},
                                 {"to", number(p[1], "--tau-grid")},
                                 {"count", static_cast<long long>(number(p[2], "--tau-grid"))},
                                 {"log", true},
                                 {"relative_to_tr", true}};
            }
            if (!direction.empty()) f["direction"] = numbers(direction, "--direction");
            if (!kappa.empty()) f["kappa"] = numbers(kappa, "--kappa");
        }
        if (*b_flowkick && !tau_grid.empty()) {
            const auto p = split(tau_grid, ':');
            if (p.size() != 3) throw CLI::ValidationError("--tau-grid", "expected from:to:count");
            cfg["tau_grid"] = {{"from", number(p[0], "--tau-grid")},
                               {"to", number(p[1], "--tau-grid")},
                               {"count", static_cast<long long>(number(p[2], "--tau-grid"))}};
        }
        if (!species.empty()) {
            cfg["species"] = json::array();
            for (const auto& s : split(species, ',')) cfg["species"].push_back(static_cast<long long>(number(s, "--species")));
        }
        if (*rtip) {
            json& r = cfg["rtip"];
            r["param"] = param;
            r["lam_inf"] = lam_inf;
            if (rtip->count("--lam0")) r["lam0"] = lam0;
            if (rtip->count("--scale")) r["scale"] = scale;
            if (!profile.empty()) r["profile"] = profile;
            if (!x_start.empty()) r["x_start"] = numbers(x_start, "--x-start");
            if (!rates.empty()) r["rates"] = numbers(rates, "--r");
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    rsl_report* report = nullptr;
    const rsl_status st = rsl_run(cfg.dump().c_str(), &report);
    if (!report) {
        std::cerr << "error: " << rsl_last_error() << "\n";
        return st == RSL_CONFIG || st == RSL_INVALID_ARGUMENT || st == RSL_PARSE ? 2 : 1;
    }
    const std::size_t n = rsl_report_artifact_count(report);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string name = rsl_report_artifact_name(report, i);
        const std::string data(rsl_report_artifact_data(report, i), rsl_report_artifact_size(report, i));
        const bool is_json = data.rfind("{", 0) == 0;
        if (out.empty()) {
            if (i > 0) std::cout << "\n";
            std::cout << data;
            continue;
        }
        const std::string path = i == 0 ? out : out + "." + name + extension(is_json ? "application/json" : "text/csv");
        std::ofstream os(path, std::ios::binary);
        os << data;
        if (!os) {
            std::cerr << "error: cannot write " << path << "\n";
            rsl_report_free(report);
            return 2;
        }
    }
    // Scalar results (critical rates, areas, top ranks) travel in the summary.
    const std::string summary = rsl_report_summary(report);
    if (out.empty()) {
        std::cerr << summary << "\n";
    } else {
        std::ofstream os(out + ".summary.json", std::ios::binary);
        os << summary << "\n";
    }
    const bool ok = rsl_report_success(report);
    rsl_report_free(report);
    if (!ok) std::cerr << "warning: at least one indicator is undefined or failed\n";
    return ok ? 0 : 1;
}
