#pragma once

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"

namespace freeconv {
namespace quad {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule of order n, nodes by Newton iteration on P_n.
inline const Rule& gauss_legendre(int n) {
    static thread_local std::vector<Rule> cache(64);
    Rule& r = cache.at(static_cast<std::size_t>(n));
    if (!r.nodes.empty()) return r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence for P_n(x) and P_n'(x).
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[static_cast<std::size_t>(i)] = x;
        r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

inline double norm_of(double v) { return std::abs(v); }
inline double norm_of(const Complex& v) { return std::abs(v); }
inline double norm_of(const CMatrix& v) { return v.norm(); }

template <class F>
auto gl_interval(F&& f, double a, double b, const Rule& rule) {
    // decay to a concrete value type (Eigen expressions must materialize)
    using T = std::decay_t<decltype(f(a))>;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    T acc = (rule.weights[0] * half) * f(mid + half * rule.nodes[0]);
    for (std::size_t i = 1; i < rule.nodes.size(); ++i)
        acc += (rule.weights[i] * half) * f(mid + half * rule.nodes[i]);
    return acc;
}

/// Adaptive Gauss-Legendre by interval bisection: a subinterval is
/// accepted once refining it changes the result by less than its share
/// of the budget. Intervals hitting the depth cap are accepted with
/// their error recorded; the run fails only when the accumulated error
/// estimate exceeds the overall budget or the interval cap is hit.
template <class F>
auto adaptive_gl(F&& f, double a, double b, double rel_tol = 1e-10,
                 int max_depth = 48, std::size_t max_intervals = 500000) {
    const Rule& rule = gauss_legendre(15);
    using T = decltype(gl_interval(f, a, b, rule));

    T whole = gl_interval(f, a, b, rule);
    const double tol_abs = rel_tol * std::max(1.0, norm_of(whole));

    std::size_t used = 0;
    double err_accum = 0.0;
    struct Frame {
        double a, b, tol;
        T estimate;
        int depth;
    };
    std::vector<Frame> stack;
    stack.push_back({a, b, tol_abs, whole, 0});
    bool have_total = false;
    T total = whole;  // overwritten before use

    while (!stack.empty()) {
        Frame fr = std::move(stack.back());
        stack.pop_back();
        if (++used > max_intervals)
            throw NumericError("adaptive_gl: refinement cap exceeded");
        const double mid = 0.5 * (fr.a + fr.b);
        T left = gl_interval(f, fr.a, mid, rule);
        T right = gl_interval(f, mid, fr.b, rule);
        T refined = left;
        refined += right;
        const double err = norm_of(refined - fr.estimate);
        if (err <= fr.tol || fr.depth >= max_depth) {
            err_accum += err;
            if (have_total)
                total += refined;
            else {
                total = refined;
                have_total = true;
            }
        } else {
            stack.push_back({fr.a, mid, 0.5 * fr.tol, std::move(left), fr.depth + 1});
            stack.push_back({mid, fr.b, 0.5 * fr.tol, std::move(right), fr.depth + 1});
        }
    }
    if (err_accum > 64.0 * std::max(tol_abs, rel_tol * norm_of(total)))
        throw NumericError("adaptive_gl: error estimate " + std::to_string(err_accum) +
                           " exceeds the requested tolerance");
    return total;
}

} // namespace quad
} // namespace freeconv
