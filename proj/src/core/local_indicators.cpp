#include "local_indicators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "errors.hpp"
#include "ode.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace resilience {

namespace {

double fro_response(const Matrix& a, const Matrix& sigma) { return lyapunov_solve(a, sigma).norm(); }

Matrix project_psd_unit(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
    Matrix p = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    const double nrm = p.norm();
    return nrm > 0.0 ? Matrix(p / nrm) : p;
}

std::vector<Eigen::VectorXd> unit_directions(Eigen::Index n) {
    std::vector<Eigen::VectorXd> out;
    if (n == 1) {
        out.push_back(Eigen::VectorXd::Ones(1));
    } else if (n == 2) {
        for (int k = 0; k < 36; ++k) {
            double th = std::numbers::pi * k / 36.0;
            Eigen::VectorXd v(2);
            v << std::cos(th), std::sin(th);
            out.push_back(v);
        }
    } else if (n == 3) {
        const int m = 200;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < m; ++k) {
            double z = 1.0 - (k + 0.5) / m;  // upper hemisphere; ssT is sign invariant
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            Eigen::VectorXd v(3);
            v << r * std::cos(golden * k), r * std::sin(golden * k), z;
            out.push_back(v);
        }
    } else {
        for (std::uint64_t k = 0; k < 256; ++k) {
            Eigen::VectorXd v(n);
            for (Eigen::Index i = 0; i < n; ++i) v(i) = counter_normal(7, k, static_cast<std::uint64_t>(i));
            out.push_back(v.normalized());
        }
    }
    return out;
}

// Projected gradient ascent of ||C*(S)||_F over PSD S with ||S||_F = 1.
double ascend_frobenius(const Matrix& a, Matrix s) {
    double f = fro_response(a, s);
    double eta = 1.0;
    for (int it = 0; it < 500 && eta > 1e-14; ++it) {
        Matrix c = lyapunov_solve(a, s);
        Matrix g = lyapunov_solve(a.transpose(), c);
        Matrix cand = project_psd_unit(s + eta * g / std::max(g.norm(), 1e-300));
        double fc = fro_response(a, cand);
        if (fc > f * (1.0 + 1e-15)) {
            s = cand;
            f = fc;
            eta *= 1.5;
        } else {
            eta *= 0.5;
        }
    }
    return f;
}

double resolvent_norm(const Matrix& a, double w) {
    const Eigen::Index n = a.rows();
    ComplexMatrix m = std::complex<double>(0.0, w) * ComplexMatrix::Identity(n, n) - a.cast<std::complex<double>>();
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const double smin = svd.singularValues()(n - 1);
    return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

LinearizedSystem LinearizedSystem::from_matrix(Matrix a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw DomainError("linearization must be a non-empty square matrix");
    if (!a.allFinite()) throw DomainError("linearization has non-finite entries");
    LinearizedSystem l;
    l.a = std::move(a);
    return l;
}

LinearizedSystem LinearizedSystem::at_equilibrium(const VectorField& field, std::span<const double> x) {
    LinearizedSystem l = from_matrix(field.jacobian(x));
    l.source = Source::Equilibrium;
    l.equilibrium.assign(x.begin(), x.end());
    return l;
}

bool LinearizedSystem::asymptotically_stable() const { return max_real_eigenvalue(a) < -1e-12; }

void LinearizedSystem::require_stable() const {
    if (!asymptotically_stable()) throw DomainError("linearization is not hyperbolic attracting");
}

ReturnRate characteristic_return_time(const LinearizedSystem& l) {
    l.require_stable();
    const double ev = -max_real_eigenvalue(l.a);
    return {ev, 1.0 / ev};
}

double reactivity(const LinearizedSystem& l) {
    Matrix s = 0.5 * (l.a + l.a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

std::vector<double> amplification_envelope(const LinearizedSystem& l, std::span<const double> t_grid) {
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        if (t < 0.0) throw DomainError("envelope times must be nonnegative");
        out.push_back(spectral_norm(propagator(l.a, t)));
    }
    return out;
}

Amplification max_amplification(const LinearizedSystem& l) {
    const ReturnRate rr = characteristic_return_time(l);
    const double t_env = 20.0 * rr.t_r;
    auto rho = [&](double t) { return spectral_norm(propagator(l.a, t)); };
    Extremum best = maximize_on_interval(rho, 0.0, t_env, 2000, 1e-10);
    if (best.value <= 1.0 || best.x <= 0.0) return {1.0, 0.0};
    return {best.value, best.x};
}

Matrix stationary_covariance(const LinearizedSystem& l, const Matrix& sigma) {
    l.require_stable();
    return lyapunov_solve(l.a, sigma);
}

Invariability stochastic_invariability(const LinearizedSystem& l, InvariabilityNorm norm) {
    l.require_stable();
    const Eigen::Index n = l.a.rows();
    double v = 0.0;
    if (norm == InvariabilityNorm::Spectral) {
        // C* is monotone in the Loewner order, so Sigma = I dominates every PSD Sigma with ||Sigma||_2 <= 1.
        v = spectral_norm(lyapunov_solve(l.a, Matrix::Identity(n, n)));
    } else {
        std::vector<std::pair<double, Matrix>> starts;
        for (const auto& s : unit_directions(n)) {
            Matrix sig = s * s.transpose();
            starts.emplace_back(fro_response(l.a, sig), sig);
        }
        std::sort(starts.begin(), starts.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
        if (starts.size() > 3) starts.resize(3);
        starts.emplace_back(0.0, Matrix::Identity(n, n) / std::sqrt(static_cast<double>(n)));
        for (const auto& [f0, s0] : starts) v = std::max({v, f0, ascend_frobenius(l.a, s0)});
    }
    return {v, 1.0 / (2.0 * v)};
}

Invariability deterministic_invariability(const LinearizedSystem& l) {
    const ReturnRate rr = characteristic_return_time(l);
    Eigen::EigenSolver<Matrix> es(l.a, false);
    double w_hi = std::max(100.0 * rr.ev, 10.0 * spectral_norm(l.a));
    std::vector<double> grid{0.0};
    const int m = 4000;
    const double w_lo = std::max(1e-6 * rr.ev, w_hi * 1e-9);
    for (int k = 0; k <= m; ++k) grid.push_back(w_lo * std::pow(w_hi / w_lo, static_cast<double>(k) / m));
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) grid.push_back(std::fabs(es.eigenvalues()(k).imag()));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> vals(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        vals[i] = resolvent_norm(l.a, grid[i]);
        if (vals[i] > vals[best]) best = i;
    }
    double v = vals[best];
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    if (hi > lo) {
        Extremum e = golden_section_max([&](double w) { return resolvent_norm(l.a, w); }, lo, hi, 1e-13 * (1.0 + hi));
        v = std::max(v, e.value);
    }
    return {v, 1.0 / v};
}

LocalIndicatorReport local_indicators(const LinearizedSystem& l) {
    LocalIndicatorReport r;
    const ReturnRate rr = characteristic_return_time(l);
    r.ev = rr.ev;
    r.t_r = rr.t_r;
    r.r0 = reactivity(l);
    r.reactive = r.r0 > 0.0;
    const Amplification amp = max_amplification(l);
    r.rho_max = amp.rho_max;
    r.t_max = amp.t_max;
    const Invariability s = stochastic_invariability(l);
    r.v_s = s.v;
    r.i_s = s.i;
    const Invariability d = deterministic_invariability(l);
    r.v_d = d.v;
    r.i_d = d.i;
    return r;
}

}  // namespace resilience
