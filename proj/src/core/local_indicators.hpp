#pragma once

#include <span>
#include <vector>

#include "linalg.hpp"
#include "vector_field.hpp"

namespace resilience {

struct LinearizedSystem {
    enum class Source { Equilibrium, RawMatrix };

    Matrix a;
    Source source = Source::RawMatrix;
    State equilibrium;

    static LinearizedSystem from_matrix(Matrix a);
    static LinearizedSystem at_equilibrium(const VectorField& field, std::span<const double> x);

    bool asymptotically_stable() const;
    // Throws DomainError unless every eigenvalue has real part below -1e-12.
    void require_stable() const;
};

struct ReturnRate {
    double ev;
    double t_r;
};

struct Amplification {
    double rho_max;
    double t_max;
};

struct Invariability {
    double v;
    double i;
};

enum class InvariabilityNorm { Spectral, Frobenius };

ReturnRate characteristic_return_time(const LinearizedSystem& l);
double reactivity(const LinearizedSystem& l);
std::vector<double> amplification_envelope(const LinearizedSystem& l, std::span<const double> t_grid);
Amplification max_amplification(const LinearizedSystem& l);
Invariability stochastic_invariability(const LinearizedSystem& l, InvariabilityNorm norm = InvariabilityNorm::Spectral);
Invariability deterministic_invariability(const LinearizedSystem& l);

// Worst-case stationary covariance response ||C*(S)|| for a given forcing covariance.
Matrix stationary_covariance(const LinearizedSystem& l, const Matrix& sigma);

struct LocalIndicatorReport {
    double ev = 0.0;
    double t_r = 0.0;
    double r0 = 0.0;
    bool reactive = false;
    double rho_max = 1.0;
    double t_max = 0.0;
    double v_s = 0.0;
    double i_s = 0.0;
    double v_d = 0.0;
    double i_d = 0.0;
};

LocalIndicatorReport local_indicators(const LinearizedSystem& l);

}  // namespace resilience
