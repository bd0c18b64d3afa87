#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <vector>

namespace resilience {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double value;
    double error;
};

Piece gk15(const ScalarFn& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        kron += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    return {kron * h, std::fabs((kron - gauss) * h)};
}

// Global strategy: always bisect the piece with the largest error estimate, so the
// budget is shared across the interval (endpoint singularities converge).
QuadratureResult adapt(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol, int max_depth,
                       const Piece& whole) {
    struct Node {
        double a, b;
        Piece p;
        int depth;
        bool operator<(const Node& o) const { return p.error < o.p.error; }
    };
    std::priority_queue<Node> heap;
    heap.push({a, b, whole, 0});
    double value = whole.value, error = whole.error;
    bool converged = true;
    std::vector<Node> done;
    constexpr std::size_t kMaxPieces = 200000;
    while (!heap.empty() && error > std::max(abs_tol, rel_tol * std::fabs(value))) {
        Node n = heap.top();
        heap.pop();
        const double m = 0.5 * (n.a + n.b);
        if (n.depth >= max_depth || !(m > n.a && m < n.b) || heap.size() + done.size() > kMaxPieces) {
            converged = false;
            done.push_back(n);
            continue;
        }
        const Piece l = gk15(f, n.a, m), r = gk15(f, m, n.b);
        value += l.value + r.value - n.p.value;
        error += l.error + r.error - n.p.error;
        heap.push({n.a, m, l, n.depth + 1});
        heap.push({m, n.b, r, n.depth + 1});
    }
    while (!heap.empty()) {
        done.push_back(heap.top());
        heap.pop();
    }
    // Re-sum in interval order to avoid drift from the running updates.
    std::sort(done.begin(), done.end(), [](const Node& x, const Node& y) { return x.a < y.a; });
    value = 0.0;
    error = 0.0;
    for (const auto& n : done) {
        value += n.p.value;
        error += n.p.error;
    }
    return {value, error, converged && error <= std::max(abs_tol, rel_tol * std::fabs(value))};
}

// Legendre P_n and its derivative at x by the three-term recurrence.
void legendre(std::size_t n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
}

GaussRule build_rule(std::size_t n) {
    GaussRule r;
    r.nodes.assign(n, 0.0);
    r.weights.assign(n, 2.0);
    if (n <= 1) return r;
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre(n, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        legendre(n, x, p, dp);
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double gauss_legendre_integrate(const ScalarFn& f, double a, double b, std::size_t n) {
    const GaussRule& r = gauss_legendre(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
    return s * h;
}

QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol,
                                    int max_depth) {
    if (a == b) return {0.0, 0.0, true};
    if (a > b) {
        QuadratureResult r = integrate_adaptive(f, b, a, abs_tol, rel_tol, max_depth);
        r.value = -r.value;
        return r;
    }
    Piece whole = gk15(f, a, b);
    return adapt(f, a, b, abs_tol, rel_tol, max_depth, whole);
}

Extremum golden_section_max(const ScalarFn& f, double a, double b, double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 300 && (b - a) > tol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? Extremum{x1, f1} : Extremum{x2, f2};
}

Extremum maximize_on_interval(const ScalarFn& f, double a, double b, std::size_t n, double tol) {
    if (n < 2) n = 2;
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    std::vector<double> xs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        xs[i] = i == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
        double v = f(xs[i]);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    const double lo = xs[best == 0 ? 0 : best - 1];
    const double hi = xs[best == n ? n : best + 1];
    Extremum e = golden_section_max(f, lo, hi, tol);
    if (e.value >= best_v) return e;
    return {xs[best], best_v};
}

}  // namespace resilience
