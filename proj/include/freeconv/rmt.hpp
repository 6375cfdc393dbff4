#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"
#include "freeconv/ncexpr.hpp"
#include "freeconv/recover.hpp"
#include "freeconv/rng.hpp"

namespace freeconv {
namespace rmt {

struct EnsembleSpec {
    enum class Kind { Wigner, Wishart };
    Kind kind = Kind::Wigner;
    int n = 100;                   // matrix size N
    int m = 0;                     // Wishart: X is N x M, ratio = N/M
    std::uint64_t seed = 0;
    bool complex_entries = false;  // Wigner symmetry class option
    double scale = 1.0;            // Wishart scale, matching the law convention
};

/// Deterministic ensemble draw; entries are keyed by
/// (seed, matrix stream, entry index) so the result is reproducible
/// under any evaluation order.
inline CMatrix sample(const EnsembleSpec& spec, std::uint64_t stream = 0) {
    if (spec.n < 2) throw DomainError("rmt::sample: N must be >= 2");
    const int n = spec.n;
    if (spec.kind == EnsembleSpec::Kind::Wigner) {
        CMatrix a(n, n);
        const double off = 1.0 / std::sqrt(static_cast<double>(n));
        for (int i = 0; i < n; ++i) {
            const std::uint64_t row = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n);
            if (spec.complex_entries)
                a(i, i) = off * rng::gaussian(spec.seed, 2 * stream, 2 * (row + static_cast<std::uint64_t>(i)));
            else
                a(i, i) = std::sqrt(2.0) * off *
                          rng::gaussian(spec.seed, 2 * stream, 2 * (row + static_cast<std::uint64_t>(i)));
            for (int j = i + 1; j < n; ++j) {
                const std::uint64_t idx = 2 * (row + static_cast<std::uint64_t>(j));
                if (spec.complex_entries) {
                    const double re = rng::gaussian(spec.seed, 2 * stream, idx);
                    const double im = rng::gaussian(spec.seed, 2 * stream, idx + 1);
                    a(i, j) = Complex(re, im) * (off / std::sqrt(2.0));
                } else {
                    a(i, j) = off * rng::gaussian(spec.seed, 2 * stream, idx);
                }
                a(j, i) = std::conj(a(i, j));
            }
        }
        return a;
    }
    // Wishart: scale * X X^* / M with iid standard entries.
    const int m = spec.m;
    if (m < 1) throw DomainError("rmt::sample: Wishart needs M >= 1");
    CMatrix x(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const std::uint64_t idx =
                2 * (static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(m) +
                     static_cast<std::uint64_t>(j));
            if (spec.complex_entries) {
                const double re = rng::gaussian(spec.seed, 2 * stream + 1, idx);
                const double im = rng::gaussian(spec.seed, 2 * stream + 1, idx + 1);
                x(i, j) = Complex(re, im) / std::sqrt(2.0);
            } else {
                x(i, j) = rng::gaussian(spec.seed, 2 * stream + 1, idx);
            }
        }
    CMatrix y = (spec.scale / static_cast<double>(m)) * (x * x.adjoint());
    return 0.5 * (y + y.adjoint());
}

struct SpectrumResult {
    bool hermitian = false;
    RVector real_eigenvalues;     // Hermitian route, ascending
    CVector complex_eigenvalues;  // general route
};

/// Spectrum of p evaluated on one independent sample tuple.
inline SpectrumResult poly_spectrum(const ncexpr::NcPolynomial& p,
                                    const std::map<std::string, EnsembleSpec>& specs, int n,
                                    std::uint64_t seed, std::uint64_t trial = 0) {
    std::map<std::string, CMatrix> assignment;
    std::uint64_t var_index = 0;
    for (const std::string& name : p.variables()) {
        const auto it = specs.find(name);
        if (it == specs.end())
            throw DomainError("poly_spectrum: no ensemble for variable '" + name + "'");
        EnsembleSpec spec = it->second;
        spec.n = n;
        spec.seed = seed;
        if (spec.kind == EnsembleSpec::Kind::Wishart && spec.m < 1)
            throw DomainError("poly_spectrum: Wishart spec missing M");
        assignment[name] = sample(spec, 1000 * trial + var_index);
        ++var_index;
    }
    const CMatrix value = ncexpr::eval_on_matrices(p, assignment);
    SpectrumResult out;
    if (ncexpr::is_selfadjoint(p)) {
        out.hermitian = true;
        out.real_eigenvalues = cmat::eig_herm_values(0.5 * (value + value.adjoint()));
    } else {
        out.complex_eigenvalues = cmat::eig_general(value);
    }
    return out;
}

/// Kolmogorov-Smirnov distance between samples and a reference CDF.
/// The lower comparison uses the left limit of the reference so that
/// discrete references (e.g. an empirical CDF of the same sample) give
/// exactly zero.
inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_distance: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f_right = cdf(samples[i]);
        const double f_left =
            cdf(std::nextafter(samples[i], -std::numeric_limits<double>::infinity()));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f_right));
        ks = std::max(ks, std::abs(static_cast<double>(i) / n - f_left));
    }
    return ks;
}

/// CDF of a density curve: cumulative trapezoid, normalized to total
/// mass, piecewise linear between grid points.
inline std::function<double(double)> curve_cdf(const recover::DensityCurve& curve) {
    const std::vector<double> grid = curve.grid;
    std::vector<double> cum(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        cum[i] = cum[i - 1] +
                 0.5 * (curve.values[i] + curve.values[i - 1]) * (grid[i] - grid[i - 1]);
    const double total = cum.back();
    if (!(total > 0.0)) throw DomainError("curve_cdf: curve has no mass");
    for (double& c : cum) c /= total;
    return [grid, cum](double t) {
        if (t <= grid.front()) return 0.0;
        if (t >= grid.back()) return 1.0;
        std::size_t lo = 0, hi = grid.size() - 1;
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (grid[mid] <= t)
                lo = mid;
            else
                hi = mid;
        }
        const double u = (t - grid[lo]) / (grid[lo + 1] - grid[lo]);
        return cum[lo] + u * (cum[lo + 1] - cum[lo]);
    };
}

inline double ks_distance(const std::vector<double>& samples,
                          const recover::DensityCurve& curve) {
    return ks_distance(samples, curve_cdf(curve));
}

struct FieldCompare {
    double radial_sup = 0.0;   // sup distance of radial CDFs about the field centroid
    double chi2 = 0.0;         // mass-in-cell statistic over a coarse partition
    int cells = 0;
};

/// Compares complex spectra with an analytic Brown field: radial CDFs
/// about the field's centroid plus a coarse chi-square of cell masses.
inline FieldCompare compare_field(const std::vector<Complex>& samples,
                                  const recover::BrownField& field, int chi_cells = 8) {
    if (samples.empty()) throw DomainError("compare_field: empty sample");
    const recover::FieldStats st = recover::measure_stats(field);

    std::vector<double> radii(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) radii[i] = std::abs(samples[i] - st.centroid);
    std::sort(radii.begin(), radii.end());

    FieldCompare out;
    const double n = static_cast<double>(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double f = st.radial_cdf_at(radii[i]);
        out.radial_sup = std::max(out.radial_sup, std::abs(static_cast<double>(i + 1) / n - f));
        out.radial_sup = std::max(out.radial_sup, std::abs(static_cast<double>(i) / n - f));
    }

    // chi-square over a chi_cells x chi_cells partition of the grid box
    const auto& grid = field.grid;
    const int k = std::max(2, chi_cells);
    std::vector<double> expected(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0.0);
    std::vector<double> observed(expected.size(), 0.0);
    const std::size_t nx = static_cast<std::size_t>(grid.re_points);
    const std::size_t ny = static_cast<std::size_t>(grid.im_points);
    const double hs = grid.re_step(), ht = grid.im_step();
    auto cell_of = [&](double s, double t) -> int {
        int cs = static_cast<int>((s - grid.re_min) / (grid.re_max - grid.re_min) * k);
        int ct = static_cast<int>((t - grid.im_min) / (grid.im_max - grid.im_min) * k);
        cs = std::clamp(cs, 0, k - 1);
        ct = std::clamp(ct, 0, k - 1);
        return ct * k + cs;
    };
    double field_mass = 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double m = field.density[iy * nx + ix] * hs * ht;
            expected[static_cast<std::size_t>(cell_of(grid.re_at(static_cast<int>(ix)),
                                                      grid.im_at(static_cast<int>(iy))))] += m;
            field_mass += m;
        }
    std::size_t inside = 0;
    for (const Complex& z : samples) {
        if (z.real() < grid.re_min || z.real() > grid.re_max || z.imag() < grid.im_min ||
            z.imag() > grid.im_max)
            continue;
        observed[static_cast<std::size_t>(cell_of(z.real(), z.imag()))] += 1.0;
        ++inside;
    }
    out.cells = k * k;
    if (field_mass > 0.0 && inside > 0) {
        double chi2 = 0.0;
        for (std::size_t c = 0; c < expected.size(); ++c) {
            const double e = expected[c] / field_mass;
            const double o = observed[c] / static_cast<double>(inside);
            chi2 += (o - e) * (o - e) / (e + 1e-12);
        }
        out.chi2 = chi2;
    }
    return out;
}

} // namespace rmt
} // namespace freeconv
