#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace resilience {

using ScalarFn = std::function<double(double)>;

struct GaussRule {
    std::vector<double> nodes;  // on [-1, 1]
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(std::size_t n);

double gauss_legendre_integrate(const ScalarFn& f, double a, double b, std::size_t n);

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

// Adaptive Gauss-Kronrod 7/15 with interval bisection.
QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b, double abs_tol = 1e-13,
                                    double rel_tol = 1e-12, int max_depth = 50);

struct Extremum {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section refinement of a maximum bracketed in [a, b].
Extremum golden_section_max(const ScalarFn& f, double a, double b, double tol = 1e-12);

// Grid scan with n intervals followed by golden-section refinement of the best cell.
Extremum maximize_on_interval(const ScalarFn& f, double a, double b, std::size_t n = 2000, double tol = 1e-12);

}  // namespace resilience
