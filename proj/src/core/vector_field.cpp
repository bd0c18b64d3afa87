#include "vector_field.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace resilience {

VectorField::VectorField(std::string name, std::vector<std::string> state_names, std::vector<std::string> param_names,
                         std::vector<double> param_values, RhsFn rhs, JacFn jac)
    : name_(std::move(name)),
      state_names_(std::move(state_names)),
      param_names_(std::move(param_names)),
      params_(std::move(param_values)),
      rhs_(std::move(rhs)),
      jac_(std::move(jac)) {
    if (state_names_.empty()) throw DomainError("vector field needs dimension >= 1");
    if (param_names_.size() != params_.size()) throw DomainError("parameter names and values differ in length");
}

VectorField VectorField::from_expressions(const std::vector<std::string>& state_names,
                                          const std::vector<std::string>& rhs_sources,
                                          const std::map<std::string, double>& params,
                                          const std::vector<std::string>& jacobian_sources) {
    const std::size_t n = state_names.size();
    if (n == 0 || rhs_sources.size() != n)
        throw DomainError("expression field needs one right-hand side per state variable");
    std::vector<std::string> pnames;
    std::vector<double> pvalues;
    for (const auto& [k, v] : params) {
        pnames.push_back(k);
        pvalues.push_back(v);
    }
    std::vector<std::string> symbols = state_names;
    symbols.insert(symbols.end(), pnames.begin(), pnames.end());
    symbols.push_back("t");

    auto rhs = std::make_shared<std::vector<Expression>>();
    for (const auto& src : rhs_sources) rhs->push_back(Expression::parse(src, symbols));

    const std::size_t nsym = symbols.size();
    auto fill = [n, nsym](double t, std::span<const double> x, std::span<const double> p, std::vector<double>& buf) {
        buf.resize(nsym);
        std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), buf.begin());
        std::copy(p.begin(), p.end(), buf.begin() + static_cast<std::ptrdiff_t>(n));
        buf[nsym - 1] = t;
    };
    RhsFn f = [rhs, fill](double t, std::span<const double> x, std::span<const double> p, std::span<double> dx) {
        thread_local std::vector<double> buf;
        fill(t, x, p, buf);
        for (std::size_t i = 0; i < rhs->size(); ++i) dx[i] = (*rhs)[i].evaluate(buf);
    };
    JacFn j;
    if (!jacobian_sources.empty()) {
        if (jacobian_sources.size() != n * n) throw DomainError("Jacobian needs N*N expressions");
        auto jac = std::make_shared<std::vector<Expression>>();
        for (const auto& src : jacobian_sources) jac->push_back(Expression::parse(src, symbols));
        j = [jac, fill](double t, std::span<const double> x, std::span<const double> p, std::span<double> out) {
            thread_local std::vector<double> buf;
            fill(t, x, p, buf);
            for (std::size_t i = 0; i < jac->size(); ++i) out[i] = (*jac)[i].evaluate(buf);
        };
    }
    return VectorField("expr", state_names, std::move(pnames), std::move(pvalues), std::move(f), std::move(j));
}

bool VectorField::has_param(std::string_view p) const {
    return std::find(param_names_.begin(), param_names_.end(), p) != param_names_.end();
}

std::size_t VectorField::param_index(std::string_view p) const {
    auto it = std::find(param_names_.begin(), param_names_.end(), p);
    if (it == param_names_.end()) throw DomainError("unknown parameter '" + std::string(p) + "' for model " + name_);
    return static_cast<std::size_t>(it - param_names_.begin());
}

VectorField VectorField::with_param(std::string_view p, double value) const {
    VectorField out = *this;
    out.params_[param_index(p)] = value;
    return out;
}

VectorField VectorField::with_params(const std::map<std::string, double>& values) const {
    VectorField out = *this;
    for (const auto& [k, v] : values) out.params_[param_index(k)] = v;
    return out;
}

VectorField VectorField::with_param_path(std::string_view p, std::function<double(double)> path) const {
    VectorField out = *this;
    out.path_index_ = param_index(p);
    out.path_ = std::move(path);
    return out;
}

void VectorField::effective_params(double t, std::vector<double>& out) const {
    out.assign(params_.begin(), params_.end());
    out[path_index_] = path_(t);
}

void VectorField::eval(double t, std::span<const double> x, std::span<double> dx) const {
    if (!path_) {
        rhs_(t, x, params_, dx);
        return;
    }
    thread_local std::vector<double> p;
    effective_params(t, p);
    rhs_(t, x, p, dx);
}

State VectorField::eval(std::span<const double> x, double t) const {
    State dx(dimension());
    eval(t, x, dx);
    return dx;
}

Eigen::MatrixXd VectorField::jacobian(std::span<const double> x, double t) const {
    if (!jac_) return fd_jacobian(x, t);
    const std::size_t n = dimension();
    std::vector<double> buf(n * n);
    if (path_) {
        std::vector<double> p;
        effective_params(t, p);
        jac_(t, x, p, buf);
    } else {
        jac_(t, x, params_, buf);
    }
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            double v = buf[i * n + k];
            if (!std::isfinite(v)) throw NumericalError("non-finite Jacobian entry");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
        }
    return m;
}

Eigen::MatrixXd VectorField::fd_jacobian(std::span<const double> x, double t) const {
    const std::size_t n = dimension();
    Eigen::MatrixXd m(n, n);
    State xp(x.begin(), x.end()), xm(x.begin(), x.end()), fp(n), fm(n);
    for (std::size_t j = 0; j < n; ++j) {
        double h = std::max(1e-6, 1e-6 * std::fabs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        eval(t, xp, fp);
        eval(t, xm, fm);
        xp[j] = x[j];
        xm[j] = x[j];
        for (std::size_t i = 0; i < n; ++i) {
            double v = (fp[i] - fm[i]) / (2.0 * h);
            if (!std::isfinite(v)) throw NumericalError("non-finite finite-difference Jacobian entry");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return m;
}

std::vector<State> VectorField::documented_equilibria() const {
    if (!equilibria_) return {};
    return equilibria_(params_);
}

void VectorField::validate() const {
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (!std::isfinite(params_[i])) throw DomainError("parameter '" + param_names_[i] + "' is not finite");
    if (domain_) domain_(params_);
}

bool VectorField::admissible() const {
    try {
        validate();
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

bool VectorField::admissible_with(std::string_view p, double value) const {
    return with_param(p, value).admissible();
}

}  // namespace resilience
