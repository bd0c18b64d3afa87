#include "resilience/resilience.h"

#include <exception>
#include <string>

#include "errors.hpp"
#include "indicator_context.hpp"
#include "local_indicators.hpp"
#include "ode.hpp"
#include "registry.hpp"
#include "run_config.hpp"

struct rsl_model {
    resilience::ModelEntry entry;
};

struct rsl_report {
    resilience::Report report;
    std::string summary;
};

namespace {

thread_local std::string last_error;

// Maps core exceptions to status codes and records the message.
template <class Fn>
rsl_status guarded(Fn&& fn) {
    try {
        last_error.clear();
        return fn();
    } catch (const resilience::ConfigError& e) {
        last_error = e.what();
        return RSL_CONFIG;
    } catch (const resilience::ParseError& e) {
        last_error = e.what();
        return RSL_PARSE;
    } catch (const resilience::DomainError& e) {
        last_error = e.what();
        return RSL_DOMAIN;
    } catch (const resilience::NumericalError& e) {
        last_error = e.what();
        return RSL_NUMERICAL;
    } catch (const nlohmann::json::exception& e) {
        last_error = std::string("invalid JSON: ") + e.what();
        return RSL_CONFIG;
    } catch (const std::exception& e) {
        last_error = e.what();
        return RSL_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return RSL_INTERNAL;
    }
}

rsl_status invalid(const char* what) {
    last_error = what;
    return RSL_INVALID_ARGUMENT;
}

void fill(const resilience::LocalIndicatorReport& r, rsl_local_report* out) {
    out->ev = r.ev;
    out->t_r = r.t_r;
    out->reactivity = r.r0;
    out->reactive = r.reactive ? 1 : 0;
    out->rho_max = r.rho_max;
    out->t_max = r.t_max;
    out->v_s = r.v_s;
    out->i_s = r.i_s;
    out->v_d = r.v_d;
    out->i_d = r.i_d;
}

}  // namespace

extern "C" {

const char* rsl_version(void) { return resilience::kVersion; }

const char* rsl_last_error(void) { return last_error.c_str(); }

rsl_status rsl_model_from_registry(const char* name, const char* params_json, rsl_model** out) {
    if (!name || !out) return invalid("name and out must be non-null");
    *out = nullptr;
    return guarded([&] {
        std::map<std::string, double> params;
        if (params_json) {
            const auto j = nlohmann::json::parse(params_json);
            if (!j.is_object()) throw resilience::ConfigError("params", "expected a JSON object");
            for (const auto& [k, v] : j.items()) params[k] = v.get<double>();
        }
        *out = new rsl_model{resilience::registry_get(name, params)};
        return RSL_OK;
    });
}

rsl_status rsl_model_from_json(const char* model_json, rsl_model** out) {
    if (!model_json || !out) return invalid("model_json and out must be non-null");
    *out = nullptr;
    return guarded([&] {
        nlohmann::json cfg = nlohmann::json::parse(model_json);
        if (!cfg.is_object()) throw resilience::ConfigError("config", "expected a JSON object");
        cfg["command"] = "eval";
        cfg["indicators"] = {"ev"};
        cfg = resilience::validate_config(cfg);
        *out = new rsl_model{resilience::build_model(cfg, {})};
        return RSL_OK;
    });
}

void rsl_model_free(rsl_model* model) { delete model; }

size_t rsl_model_dimension(const rsl_model* model) { return model ? model->entry.field.dimension() : 0; }

rsl_status rsl_model_eval(const rsl_model* model, double t, const double* x, double* dx) {
    if (!model || !x || !dx) return invalid("model, x and dx must be non-null");
    return guarded([&] {
        const std::size_t n = model->entry.field.dimension();
        model->entry.field.eval(t, std::span<const double>(x, n), std::span<double>(dx, n));
        return RSL_OK;
    });
}

rsl_status rsl_model_jacobian(const rsl_model* model, const double* x, double* jac) {
    if (!model || !x || !jac) return invalid("model, x and jac must be non-null");
    return guarded([&] {
        const std::size_t n = model->entry.field.dimension();
        const Eigen::MatrixXd j = model->entry.field.jacobian(std::span<const double>(x, n));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) jac[r * n + c] = j(r, c);
        return RSL_OK;
    });
}

rsl_status rsl_flow(const rsl_model* model, const double* x0, double t, double* out) {
    if (!model || !x0 || !out) return invalid("model, x0 and out must be non-null");
    return guarded([&] {
        const std::size_t n = model->entry.field.dimension();
        const auto x = resilience::flow(model->entry.field, std::span<const double>(x0, n), t);
        std::copy(x.begin(), x.end(), out);
        return RSL_OK;
    });
}

rsl_status rsl_local_indicators(const rsl_model* model, const double* x_eq, rsl_local_report* out) {
    if (!model || !x_eq || !out) return invalid("model, x_eq and out must be non-null");
    return guarded([&] {
        const std::size_t n = model->entry.field.dimension();
        const auto l = resilience::LinearizedSystem::at_equilibrium(model->entry.field, std::span<const double>(x_eq, n));
        fill(resilience::local_indicators(l), out);
        return RSL_OK;
    });
}

rsl_status rsl_local_indicators_matrix(size_t n, const double* a, rsl_local_report* out) {
    if (n == 0 || !a || !out) return invalid("n must be positive and a, out non-null");
    return guarded([&] {
        resilience::Matrix m(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) m(r, c) = a[r * n + c];
        fill(resilience::local_indicators(resilience::LinearizedSystem::from_matrix(m)), out);
        return RSL_OK;
    });
}

rsl_status rsl_run(const char* config_json, rsl_report** out) {
    if (!config_json || !out) return invalid("config_json and out must be non-null");
    *out = nullptr;
    return guarded([&] {
        nlohmann::json cfg;
        try {
            cfg = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw resilience::ConfigError("config", std::string("malformed JSON: ") + e.what());
        }
        auto* r = new rsl_report{resilience::run(cfg), {}};
        r->summary = r->report.summary.dump();
        *out = r;
        return r->report.success ? RSL_OK : RSL_INDICATOR_FAILED;
    });
}

int rsl_report_success(const rsl_report* report) { return report && report->report.success ? 1 : 0; }

size_t rsl_report_artifact_count(const rsl_report* report) { return report ? report->report.artifacts.size() : 0; }

const char* rsl_report_artifact_name(const rsl_report* report, size_t i) {
    if (!report || i >= report->report.artifacts.size()) return nullptr;
    return report->report.artifacts[i].name.c_str();
}

const char* rsl_report_artifact_data(const rsl_report* report, size_t i) {
    if (!report || i >= report->report.artifacts.size()) return nullptr;
    return report->report.artifacts[i].content.c_str();
}

size_t rsl_report_artifact_size(const rsl_report* report, size_t i) {
    if (!report || i >= report->report.artifacts.size()) return 0;
    return report->report.artifacts[i].content.size();
}

const char* rsl_report_summary(const rsl_report* report) { return report ? report->summary.c_str() : nullptr; }

void rsl_report_free(rsl_report* report) { delete report; }

}  // extern "C"
