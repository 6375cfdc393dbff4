#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"
#include "freeconv/quadrature.hpp"
#include "freeconv/rng.hpp"

namespace freeconv {
namespace laws {

enum class LawKind { Semicircle, MarchenkoPastur, Atomic, Quadrature };

/// Spectral distribution of one selfadjoint variable.
struct ScalarLaw {
    LawKind kind = LawKind::Semicircle;
    double mean = 0.0;      // semicircle
    double variance = 1.0;  // semicircle
    double ratio = 0.25;    // Marchenko-Pastur lambda
    double scale = 1.0;     // Marchenko-Pastur scale
    std::vector<double> points;   // atomic nodes / quadrature nodes
    std::vector<double> weights;  // probability weights

    static ScalarLaw semicircle(double mean = 0.0, double variance = 1.0) {
        if (!(variance > 0.0)) throw DomainError("semicircle: variance must be positive");
        ScalarLaw l;
        l.kind = LawKind::Semicircle;
        l.mean = mean;
        l.variance = variance;
        return l;
    }

    static ScalarLaw marchenko_pastur(double ratio, double scale = 1.0) {
        if (!(ratio > 0.0)) throw DomainError("marchenko_pastur: ratio must be positive");
        if (!(scale > 0.0)) throw DomainError("marchenko_pastur: scale must be positive");
        ScalarLaw l;
        l.kind = LawKind::MarchenkoPastur;
        l.ratio = ratio;
        l.scale = scale;
        return l;
    }

    static ScalarLaw atomic(std::vector<double> pts, std::vector<double> wts) {
        ScalarLaw l;
        l.kind = LawKind::Atomic;
        l.points = std::move(pts);
        l.weights = std::move(wts);
        l.check_discrete("atomic");
        return l;
    }

    static ScalarLaw quadrature(std::vector<double> nodes, std::vector<double> wts) {
        ScalarLaw l;
        l.kind = LawKind::Quadrature;
        l.points = std::move(nodes);
        l.weights = std::move(wts);
        l.check_discrete("quadrature");
        return l;
    }

private:
    void check_discrete(const char* what) const {
        if (points.empty() || points.size() != weights.size())
            throw DomainError(std::string(what) + ": nodes/weights size mismatch");
        double sum = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i])) throw DomainError(std::string(what) + ": non-finite node");
            if (weights[i] < 0.0) throw DomainError(std::string(what) + ": negative weight");
            sum += weights[i];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw DomainError(std::string(what) + ": weights must sum to 1");
    }
};

/// Point mass at zero carried by the Marchenko-Pastur law when ratio > 1.
inline double atom_at_zero(const ScalarLaw& law) {
    if (law.kind == LawKind::MarchenkoPastur && law.ratio > 1.0) return 1.0 - 1.0 / law.ratio;
    return 0.0;
}

inline double mean_of(const ScalarLaw& law) {
    switch (law.kind) {
        case LawKind::Semicircle: return law.mean;
        case LawKind::MarchenkoPastur: return law.scale;
        default: {
            double m = 0.0;
            for (std::size_t i = 0; i < law.points.size(); ++i) m += law.weights[i] * law.points[i];
            return m;
        }
    }
}

inline double variance_of(const ScalarLaw& law) {
    switch (law.kind) {
        case LawKind::Semicircle: return law.variance;
        case LawKind::MarchenkoPastur: return law.ratio * law.scale * law.scale;
        default: {
            const double m = mean_of(law);
            double s = 0.0;
            for (std::size_t i = 0; i < law.points.size(); ++i)
                s += law.weights[i] * (law.points[i] - m) * (law.points[i] - m);
            return s;
        }
    }
}

/// Support of the absolutely continuous part (atoms excluded).
inline std::pair<double, double> support(const ScalarLaw& law) {
    switch (law.kind) {
        case LawKind::Semicircle: {
            const double r = 2.0 * std::sqrt(law.variance);
            return {law.mean - r, law.mean + r};
        }
        case LawKind::MarchenkoPastur: {
            const double s = std::sqrt(law.ratio);
            return {law.scale * (1.0 - s) * (1.0 - s), law.scale * (1.0 + s) * (1.0 + s)};
        }
        default: {
            const auto [lo, hi] = std::minmax_element(law.points.begin(), law.points.end());
            return {*lo, *hi};
        }
    }
}

/// Density of the absolutely continuous part at t.
inline double density(const ScalarLaw& law, double t) {
    switch (law.kind) {
        case LawKind::Semicircle: {
            const double d = 4.0 * law.variance - (t - law.mean) * (t - law.mean);
            return d > 0.0 ? std::sqrt(d) / (2.0 * 3.14159265358979323846 * law.variance) : 0.0;
        }
        case LawKind::MarchenkoPastur: {
            const double u = t / law.scale;
            if (u <= 0.0) return 0.0;
            const double d = 4.0 * law.ratio - (u - 1.0 - law.ratio) * (u - 1.0 - law.ratio);
            if (d <= 0.0) return 0.0;
            return std::sqrt(d) / (2.0 * 3.14159265358979323846 * law.ratio * u) / law.scale;
        }
        default:
            return 0.0;  // purely discrete
    }
}

namespace detail {

/// Picks the Herglotz branch between the two quadratic roots: the one
/// with Im < 0, falling back to the decaying (smaller) root when both
/// imaginary parts are rounded to the same sign far from the support.
inline Complex pick_cauchy_root(Complex g1, Complex g2) {
    const bool v1 = g1.imag() < 0.0;
    const bool v2 = g2.imag() < 0.0;
    if (v1 != v2) return v1 ? g1 : g2;
    return std::abs(g1) <= std::abs(g2) ? g1 : g2;
}

/// Cauchy transform of the standard semicircle: root of g^2 - u g + 1 = 0.
inline Complex semicircle_g_std(Complex u) {
    const Complex s = std::sqrt(u * u - 4.0);
    return pick_cauchy_root(0.5 * (u - s), 0.5 * (u + s));
}

} // namespace detail

/// Cauchy transform G(z) = integral of 1/(z - t) dmu(t), Im z > 0.
inline Complex cauchy_scalar(const ScalarLaw& law, Complex z) {
    if (!(z.imag() > 0.0))
        throw DomainError("cauchy_scalar: argument must lie in the open upper half-plane");
    switch (law.kind) {
        case LawKind::Semicircle: {
            const double sv = std::sqrt(law.variance);
            return detail::semicircle_g_std((z - law.mean) / sv) / sv;
        }
        case LawKind::MarchenkoPastur: {
            // lambda u G^2 - (u - 1 + lambda) G + 1 = 0, branch with Im G < 0.
            const double lam = law.ratio;
            const Complex u = z / law.scale;
            const Complex s = std::sqrt((u - (1.0 + lam)) * (u - (1.0 + lam)) - 4.0 * lam);
            const Complex g1 = (u - (1.0 - lam) - s) / (2.0 * lam * u);
            const Complex g2 = (u - (1.0 - lam) + s) / (2.0 * lam * u);
            return detail::pick_cauchy_root(g1, g2) / law.scale;
        }
        default: {
            Complex acc = 0.0;
            for (std::size_t i = 0; i < law.points.size(); ++i)
                acc += law.weights[i] / (z - law.points[i]);
            return acc;
        }
    }
}

/// Operator-valued Cauchy transform of the element a (x) t:
/// G(b) = integral of (b - a t)^{-1} dmu(t); a Hermitian, b in H+.
inline CMatrix ov_cauchy(const ScalarLaw& law, const CMatrix& a, const CMatrix& b,
                         double rel_tol = 1e-10) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw DomainError("ov_cauchy: dimension mismatch");
    if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm()))
        throw DomainError("ov_cauchy: coefficient not Hermitian");
    if (!cmat::uhp_check(b).in_upper)
        throw DomainError("ov_cauchy: argument not in the matrix upper half-plane");

    switch (law.kind) {
        case LawKind::Atomic:
        case LawKind::Quadrature: {
            CMatrix acc = CMatrix::Zero(b.rows(), b.cols());
            for (std::size_t i = 0; i < law.points.size(); ++i)
                acc += law.weights[i] * cmat::inv(b - law.points[i] * a);
            return acc;
        }
        case LawKind::Semicircle: {
            // t = mean + 2 sqrt(v) sin(theta) turns the square-root edge
            // into a smooth cos^2 weight.
            const double sv = std::sqrt(law.variance);
            const double pi = 3.14159265358979323846;
            auto f = [&](double th) -> CMatrix {
                const double t = law.mean + 2.0 * sv * std::sin(th);
                const double w = (2.0 / pi) * std::cos(th) * std::cos(th);
                return w * cmat::inv(b - t * a);
            };
            return quad::adaptive_gl(f, -0.5 * pi, 0.5 * pi, rel_tol);
        }
        case LawKind::MarchenkoPastur: {
            const double lam = law.ratio;
            const double sl = std::sqrt(lam);
            const double pi = 3.14159265358979323846;
            auto f = [&](double th) -> CMatrix {
                const double u = 1.0 + lam + 2.0 * sl * std::sin(th);
                const double t = law.scale * u;
                const double w = (2.0 / pi) * std::cos(th) * std::cos(th) / u;
                return w * cmat::inv(b - t * a);
            };
            CMatrix acc = quad::adaptive_gl(f, -0.5 * pi, 0.5 * pi, rel_tol);
            const double atom = atom_at_zero(law);
            if (atom > 0.0) acc += atom * cmat::inv(b);
            return acc;
        }
    }
    throw DomainError("ov_cauchy: unknown law kind");
}

/// h(b) = G(b)^{-1} - b; maps H+ into the closed upper half-plane.
inline CMatrix h_transform(const ScalarLaw& law, const CMatrix& a, const CMatrix& b,
                           double rel_tol = 1e-10) {
    return cmat::inv(ov_cauchy(law, a, b, rel_tol)) - b;
}

/// Deterministic sampler: output depends only on (law, count, seed).
inline std::vector<double> sample(const ScalarLaw& law, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw DomainError("sample: count must be >= 1");
    std::vector<double> out(count);

    auto discrete_draw = [&](double u) {
        double acc = 0.0;
        for (std::size_t i = 0; i < law.points.size(); ++i) {
            acc += law.weights[i];
            if (u <= acc) return law.points[i];
        }
        return law.points.back();
    };

    switch (law.kind) {
        case LawKind::Atomic:
        case LawKind::Quadrature:
            for (std::size_t k = 0; k < count; ++k)
                out[k] = discrete_draw(rng::uniform(seed, 1, k));
            return out;
        case LawKind::Semicircle: {
            const auto [lo, hi] = support(law);
            const double peak = 1.0 / (3.14159265358979323846 * std::sqrt(law.variance));
            for (std::size_t k = 0; k < count; ++k) {
                for (std::uint64_t attempt = 0;; ++attempt) {
                    const double t =
                        lo + (hi - lo) * rng::uniform(seed, 2, k * 128 + 2 * attempt);
                    const double u = rng::uniform(seed, 2, k * 128 + 2 * attempt + 1);
                    if (u * peak <= density(law, t) || attempt > 60) {
                        out[k] = t;
                        break;
                    }
                }
            }
            return out;
        }
        case LawKind::MarchenkoPastur: {
            const auto [lo, hi] = support(law);
            // Rejection bound from a coarse scan of the density.
            double peak = 0.0;
            for (int i = 0; i <= 4096; ++i) {
                const double t = lo + (hi - lo) * i / 4096.0;
                peak = std::max(peak, density(law, t));
            }
            peak *= 1.05;
            const double atom = atom_at_zero(law);
            for (std::size_t k = 0; k < count; ++k) {
                if (atom > 0.0 && rng::uniform(seed, 3, k) < atom) {
                    out[k] = 0.0;
                    continue;
                }
                for (std::uint64_t attempt = 0;; ++attempt) {
                    const double t =
                        lo + (hi - lo) * rng::uniform(seed, 4, k * 128 + 2 * attempt);
                    const double u = rng::uniform(seed, 4, k * 128 + 2 * attempt + 1);
                    if (u * peak <= density(law, t) || attempt > 60) {
                        out[k] = t;
                        break;
                    }
                }
            }
            return out;
        }
    }
    throw DomainError("sample: unknown law kind");
}

} // namespace laws
} // namespace freeconv
