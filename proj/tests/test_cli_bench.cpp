#include <cmath>
#include <set>
#include <sstream>

#include "bench.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "run_config.hpp"

using namespace resilience;

namespace {

json rows_of(const Report& r, const std::string& name = "main") {
    for (const auto& a : r.artifacts)
        if (a.name == name) return json::parse(a.content)["table"]["rows"];
    FAIL("missing artifact " << name);
    return {};
}

std::string config_error_path(const json& cfg) {
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        return e.key_path();
    }
    return "<accepted>";
}

json allee_eval(std::vector<std::string> ind) {
    return {{"command", "eval"}, {"model", "allee"}, {"params", {{"r", 0.5}, {"L", 0.2}}},
            {"indicators", ind}, {"format", "json"}};
}

}  // namespace

TEST_CASE("config validation reports key paths") {
    CHECK(config_error_path({{"command", "eval"}}) != "<accepted>");
    CHECK(config_error_path({{"command", "frobnicate"}, {"model", "allee"}, {"indicators", {"ev"}}}) == "config.command");
    CHECK(config_error_path(allee_eval({"bogus"})).rfind("config.indicators", 0) == 0);
    json extra = allee_eval({"ev"});
    extra["colour"] = "blue";
    CHECK(config_error_path(extra) != "<accepted>");
    json bad_int = allee_eval({"ev"});
    bad_int["integrator"] = {{"rel_tol", -1.0}};
    CHECK(config_error_path(bad_int).rfind("config.integrator", 0) == 0);
    CHECK(config_error_path(allee_eval({"ev"})) == "<accepted>");
}

TEST_CASE("defaults are filled in") {
    const json v = validate_config(allee_eval({"ev"}));
    CHECK(v.contains("seed"));
    CHECK(v.contains("workers"));
}

TEST_CASE("eval reports closed-form local values") {
    const Report r = run(allee_eval({"ev", "tr", "dt", "inv_dt"}));
    CHECK(r.success);
    const json rows = rows_of(r);
    REQUIRE(rows.size() == 4);
    // allee at K = 1: ev = r (1 - L) / L, DT = K - L
    CHECK(rows[0]["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rows[1]["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rows[2]["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(rows[3]["value"].get<double>() == doctest::Approx(1.25).epsilon(1e-8));
    CHECK(r.summary.contains("config"));
}

TEST_CASE("undefined indicators carry a reason and mark the run") {
    json cfg = {{"command", "eval"}, {"model", "polar_rings"}, {"indicators", {"ev"}}, {"format", "json"}};
    const Report r = run(cfg);
    CHECK_FALSE(r.success);
    const json rows = rows_of(r);
    CHECK(rows[0]["value"].is_null());
    CHECK_FALSE(rows[0]["reason"].get<std::string>().empty());
}

TEST_CASE("expression models through the config") {
    json cfg = {{"command", "eval"},
                {"expr", {{"states", {"x"}}, {"rhs", {"-k*x"}}}},
                {"params", {{"k", 3.0}}},
                {"attractor", {{"points", {{0.0}}}}},
                {"indicators", {"ev", "return_time"}},
                {"x0", {0.5}},
                {"format", "json"}};
    const json rows = rows_of(run(cfg));
    CHECK(rows[0]["value"].get<double>() == doctest::Approx(3.0).epsilon(1e-8));
    // linear decay: normalized integrated distance is 1/k
    CHECK(rows[1]["value"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("csv carries the version and config header") {
    json cfg = allee_eval({"ev"});
    cfg["format"] = "csv";
    const Report r = run(cfg);
    const std::string& csv = r.artifacts.at(0).content;
    std::istringstream in(csv);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(l1.rfind(std::string("# resilience ") + kVersion, 0) == 0);
    CHECK(l2.rfind("# config {", 0) == 0);
    CHECK(l3 == "model,params,indicator,value,std_error,samples,undecided,flags,reason");
}

TEST_CASE("number cells map the extended reals") {
    CHECK(number_cell(1.5) == json(1.5));
    CHECK(number_cell(INFINITY) == json("inf"));
    CHECK(number_cell(-INFINITY) == json("-inf"));
    CHECK(number_cell(NAN).is_null());
}

TEST_CASE("sweep normalization lies in the unit interval") {
    json cfg = {{"command", "sweep"},
                {"model", "allee"},
                {"indicators", {"ev", "dt"}},
                {"grid", {{{"param", "L"}, {"from", 0.1}, {"to", 0.9}, {"count", 9}}}},
                {"format", "json"}};
    const json rows = rows_of(run(cfg));
    REQUIRE(rows.size() == 18);
    std::set<double> seen0, seen1;
    for (const auto& row : rows) {
        const double n = row["normalized"].get<double>();
        CHECK(n >= 0.0);
        CHECK(n <= 1.0);
        (row["indicator"] == "ev" ? seen0 : seen1).insert(n);
        if (row["indicator"] == "dt")
            CHECK(row["raw"].get<double>() == doctest::Approx(1.0 - row["L"].get<double>()).epsilon(1e-7));
    }
    CHECK(*seen0.begin() == 0.0);
    CHECK(*seen0.rbegin() == 1.0);
    CHECK(*seen1.begin() == 0.0);
    CHECK(*seen1.rbegin() == 1.0);
}

TEST_CASE("sweep output does not depend on the worker count") {
    json cfg = {{"command", "sweep"},
                {"model", "allee"},
                {"indicators", {"lv"}},
                {"roi", {{"box", {{"lo", {0.0}}, {"hi", {2.0}}}}}},
                {"samples", 50},
                {"grid", {{{"param", "L"}, {"from", 0.2}, {"to", 0.8}, {"count", 4}}}},
                {"format", "json"}};
    cfg["workers"] = 1;
    const json a = rows_of(run(cfg));
    cfg["workers"] = 3;
    const json b = rows_of(run(cfg));
    CHECK(a == b);
}

TEST_CASE("benchmark species table") {
    const auto& sp = benchmark_species();
    REQUIRE(sp.size() == 5);
    json cfg = {{"command", "bench-species"}, {"samples", 200}, {"format", "json"}};
    const Report r = run(cfg);
    const json rows = rows_of(r);
    std::map<std::string, std::set<int>> ranks;
    for (const auto& row : rows) {
        if (row["indicator"] == "ev") {
            const int s = row["species"].get<int>();
            const double r_ = sp[s - 1].first, L = sp[s - 1].second;
            CHECK(row["value"].get<double>() == doctest::Approx(r_ * (1 - L) / L).epsilon(1e-10));
        }
        if (row["indicator"] == "dt") {
            const int s = row["species"].get<int>();
            CHECK(row["value"].get<double>() == doctest::Approx(1.0 - sp[s - 1].second).epsilon(1e-8));
        }
        if (row["rank"].is_number()) ranks[row["indicator"]].insert(row["rank"].get<int>());
    }
    // each ranked indicator uses ranks 1..5 once
    for (const auto& [name, rs] : ranks) {
        CAPTURE(name);
        CHECK(rs == std::set<int>{1, 2, 3, 4, 5});
    }
    CHECK(r.summary.contains("top_ranked"));
}
