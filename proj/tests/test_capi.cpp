// Exercises the shared library through its C interface only.
#include <cmath>
#include <cstdio>
#include <cstring>

#include "resilience/resilience.h"

static int failures = 0;

#define EXPECT(cond)                                                     \
    do {                                                                 \
        if (!(cond)) {                                                   \
            std::fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                  \
        }                                                                \
    } while (0)

static bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol * (1.0 + std::fabs(b)); }

int main() {
    EXPECT(std::strcmp(rsl_version(), "1.0.0") == 0);

    rsl_model* m = nullptr;
    EXPECT(rsl_model_from_registry("allee", "{\"r\": 0.5, \"L\": 0.25}", &m) == RSL_OK);
    EXPECT(m != nullptr);
    EXPECT(rsl_model_dimension(m) == 1);

    double x = 0.5, dx = 0;
    EXPECT(rsl_model_eval(m, 0.0, &x, &dx) == RSL_OK);
    EXPECT(near(dx, 0.5 * 0.5 * 0.5 * (0.5 / 0.25 - 1.0), 1e-14));

    double jac = 0, k = 1.0;
    EXPECT(rsl_model_jacobian(m, &k, &jac) == RSL_OK);
    EXPECT(near(jac, -0.5 * (1.0 / 0.25 - 1.0), 1e-12));

    rsl_local_report rep;
    EXPECT(rsl_local_indicators(m, &k, &rep) == RSL_OK);
    EXPECT(near(rep.ev, 1.5, 1e-12));
    EXPECT(near(rep.t_r, 1.0 / 1.5, 1e-12));
    EXPECT(rep.reactive == 0);

    double x0 = 0.9, xt = 0;
    EXPECT(rsl_flow(m, &x0, 50.0, &xt) == RSL_OK);
    EXPECT(near(xt, 1.0, 1e-9));
    rsl_model_free(m);

    // errors set status and message
    rsl_model* bad = nullptr;
    EXPECT(rsl_model_from_registry("nope", nullptr, &bad) == RSL_DOMAIN);
    EXPECT(bad == nullptr);
    EXPECT(std::strlen(rsl_last_error()) > 0);
    EXPECT(rsl_model_from_registry("allee", "[1,2]", &bad) == RSL_CONFIG);
    EXPECT(rsl_model_from_registry(nullptr, nullptr, &bad) == RSL_INVALID_ARGUMENT);
    EXPECT(rsl_model_eval(nullptr, 0.0, &x, &dx) == RSL_INVALID_ARGUMENT);

    const double a[4] = {-1.0, 10.0, 0.0, -2.0};
    EXPECT(rsl_local_indicators_matrix(2, a, &rep) == RSL_OK);
    EXPECT(rep.reactive == 1);
    EXPECT(rep.rho_max > 1.0);
    const double unstable[1] = {0.5};
    EXPECT(rsl_local_indicators_matrix(1, unstable, &rep) == RSL_DOMAIN);

    rsl_model* e = nullptr;
    EXPECT(rsl_model_from_json("{\"expr\": {\"states\": [\"x\"], \"rhs\": [\"-k*x\"]}, \"params\": {\"k\": 2},"
                               " \"attractor\": {\"points\": [[0]]}}",
                               &e) == RSL_OK);
    x = 1.5;
    EXPECT(rsl_model_eval(e, 0.0, &x, &dx) == RSL_OK);
    EXPECT(near(dx, -3.0, 1e-15));
    rsl_model_free(e);
    EXPECT(rsl_model_from_json("{\"expr\": {\"states\": [\"x\"], \"rhs\": [\"-k*\"]}, \"attractor\": {\"points\": [[0]]}}",
                               &e) == RSL_CONFIG);
    EXPECT(std::strstr(rsl_last_error(), "config.expr.rhs") != nullptr);

    rsl_report* r = nullptr;
    EXPECT(rsl_run("{\"command\": \"eval\", \"model\": \"allee\", \"indicators\": [\"ev\", \"dt\"]}", &r) == RSL_OK);
    EXPECT(r != nullptr);
    EXPECT(rsl_report_success(r) == 1);
    EXPECT(rsl_report_artifact_count(r) >= 1);
    EXPECT(std::strcmp(rsl_report_artifact_name(r, 0), "main") == 0);
    EXPECT(std::strstr(rsl_report_artifact_data(r, 0), "allee") != nullptr);
    EXPECT(rsl_report_artifact_size(r, 0) == std::strlen(rsl_report_artifact_data(r, 0)));
    EXPECT(rsl_report_artifact_name(r, 99) == nullptr);
    EXPECT(std::strstr(rsl_report_summary(r), "\"config\"") != nullptr);
    rsl_report_free(r);

    r = nullptr;
    EXPECT(rsl_run("{\"command\": \"eval\", \"model\": \"polar_rings\", \"indicators\": [\"ev\"]}", &r) ==
           RSL_INDICATOR_FAILED);
    EXPECT(r != nullptr && rsl_report_success(r) == 0);
    rsl_report_free(r);

    r = nullptr;
    EXPECT(rsl_run("{not json", &r) == RSL_CONFIG);
    EXPECT(r == nullptr);
    EXPECT(std::strstr(rsl_last_error(), "malformed") != nullptr);
    EXPECT(rsl_run("{\"command\": \"eval\", \"model\": \"allee\", \"indicators\": []}", &r) == RSL_CONFIG);

    if (failures) {
        std::fprintf(stderr, "%d C API checks failed\n", failures);
        return 1;
    }
    std::printf("C API checks passed\n");
    return 0;
}
