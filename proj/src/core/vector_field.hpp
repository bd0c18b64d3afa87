#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expr.hpp"

namespace resilience {

using State = std::vector<double>;

// f(t, x; p) -> dx. Row-major Jacobian out[i*N + j] = d f_i / d x_j.
using RhsFn = std::function<void(double t, std::span<const double> x, std::span<const double> p, std::span<double> dx)>;
using JacFn = std::function<void(double t, std::span<const double> x, std::span<const double> p, std::span<double> jac)>;
using EquilibriaFn = std::function<std::vector<State>(std::span<const double> p)>;
using DomainFn = std::function<void(std::span<const double> p)>;

// Parametric right-hand side. Immutable after construction; copies share the callables.
class VectorField {
public:
    VectorField() = default;
    VectorField(std::string name, std::vector<std::string> state_names, std::vector<std::string> param_names,
                std::vector<double> param_values, RhsFn rhs, JacFn jac = {});

    static VectorField from_expressions(const std::vector<std::string>& state_names,
                                        const std::vector<std::string>& rhs_sources,
                                        const std::map<std::string, double>& params,
                                        const std::vector<std::string>& jacobian_sources = {});

    std::size_t dimension() const noexcept { return state_names_.size(); }
    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& state_names() const noexcept { return state_names_; }
    const std::vector<std::string>& param_names() const noexcept { return param_names_; }
    const std::vector<double>& params() const noexcept { return params_; }

    bool has_param(std::string_view p) const;
    std::size_t param_index(std::string_view p) const;
    double param(std::string_view p) const { return params_[param_index(p)]; }

    // No domain validation; call validate() where admissibility matters.
    VectorField with_param(std::string_view p, double value) const;
    VectorField with_params(const std::map<std::string, double>& values) const;

    // Parameter p follows path(t) during evaluation (nonautonomous forcing).
    VectorField with_param_path(std::string_view p, std::function<double(double)> path) const;
    bool is_autonomous() const noexcept { return !path_; }

    void eval(double t, std::span<const double> x, std::span<double> dx) const;
    State eval(std::span<const double> x, double t = 0.0) const;

    bool has_analytic_jacobian() const noexcept { return static_cast<bool>(jac_); }
    Eigen::MatrixXd jacobian(std::span<const double> x, double t = 0.0) const;
    Eigen::MatrixXd fd_jacobian(std::span<const double> x, double t = 0.0) const;

    void set_equilibria(EquilibriaFn fn) { equilibria_ = std::move(fn); }
    void set_domain(DomainFn fn) { domain_ = std::move(fn); }
    std::vector<State> documented_equilibria() const;
    // True when every equilibrium is documented (registry models).
    bool has_documented_equilibria() const noexcept { return static_cast<bool>(equilibria_); }

    void validate() const;
    bool admissible() const;
    bool admissible_with(std::string_view p, double value) const;

private:
    void effective_params(double t, std::vector<double>& out) const;

    std::string name_;
    std::vector<std::string> state_names_;
    std::vector<std::string> param_names_;
    std::vector<double> params_;
    RhsFn rhs_;
    JacFn jac_;
    EquilibriaFn equilibria_;
    DomainFn domain_;
    std::size_t path_index_ = 0;
    std::function<double(double)> path_;
};

}  // namespace resilience
