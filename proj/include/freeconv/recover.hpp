#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"
#include "freeconv/linpen.hpp"
#include "freeconv/parallel.hpp"
#include "freeconv/subord.hpp"

namespace freeconv {
namespace recover {

inline constexpr double kPi = 3.14159265358979323846;

/// Polynomial extrapolation of (x_i, y_i) to x = 0 (Neville scheme).
inline double neville_at_zero(const std::vector<double>& xs, std::vector<double> ys) {
    const std::size_t n = xs.size();
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = 0; i + j < n; ++i)
            ys[i] = (xs[i + j] * ys[i] - xs[i] * ys[i + 1]) / (xs[i + j] - xs[i]);
    return ys[0];
}

struct DensityCurve {
    std::vector<double> grid;      // ascending
    std::vector<double> values;    // >= 0 after clipping
    std::vector<double> epsilon_used;
    double mass = 0.0;
    struct AtomCandidate {
        double location = 0.0;
        double mass_estimate = 0.0;
    };
    std::vector<AtomCandidate> atom_candidates;
    bool mass_deficit = false;
};

inline double trapezoid_mass(const std::vector<double>& grid, const std::vector<double>& v) {
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        mass += 0.5 * (v[i] + v[i + 1]) * (grid[i + 1] - grid[i]);
    return mass;
}

/// Stieltjes inversion with extrapolation in the regularization:
/// density(t) = extrapolation over the schedule of -Im G(t + i eps)/pi,
/// clipped at zero. A mass deficit beyond 3% triggers the atom report.
inline DensityCurve density_1d(const std::function<Complex(Complex)>& evaluator,
                               const std::vector<double>& grid,
                               std::vector<double> eps_schedule = {0.05, 0.025, 0.0125},
                               int threads = 1) {
    if (grid.size() < 2) throw DomainError("density_1d: grid needs at least two points");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw DomainError("density_1d: grid not ascending");
    if (eps_schedule.empty()) throw DomainError("density_1d: empty epsilon schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > 0.0)) throw DomainError("density_1d: epsilons must be positive");
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
            throw DomainError("density_1d: epsilon schedule must be descending");
    }

    const std::size_t n = grid.size();
    const std::size_t levels = eps_schedule.size();
    std::vector<double> smoothed(n * levels);
    std::vector<std::string> failures(n);

    parallel_for(n, [&](std::size_t i) {
        for (std::size_t k = 0; k < levels; ++k) {
            try {
                const Complex g = evaluator(Complex(grid[i], eps_schedule[k]));
                smoothed[i * levels + k] = -g.imag() / kPi;
            } catch (const std::exception& e) {
                failures[i] = e.what();
                return;
            }
        }
    }, threads);

    for (std::size_t i = 0; i < n; ++i)
        if (!failures[i].empty())
            throw NumericError("density_1d: evaluator failed at t=" +
                               std::to_string(grid[i]) + ": " + failures[i]);

    DensityCurve curve;
    curve.grid = grid;
    curve.epsilon_used = eps_schedule;
    curve.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> ys(smoothed.begin() + static_cast<std::ptrdiff_t>(i * levels),
                               smoothed.begin() + static_cast<std::ptrdiff_t>((i + 1) * levels));
        curve.values[i] = std::max(0.0, neville_at_zero(eps_schedule, std::move(ys)));
    }
    curve.mass = trapezoid_mass(curve.grid, curve.values);

    if (curve.mass < 0.97) {
        curve.mass_deficit = true;
        // Atoms survive as eps * |Im G| spikes at the finest level.
        const double eps = eps_schedule.back();
        const std::size_t fine = levels - 1;
        for (std::size_t i = 0; i < n; ++i) {
            const double est = eps * kPi * smoothed[i * levels + fine];
            const bool left_ok = i == 0 || smoothed[(i - 1) * levels + fine] <=
                                               smoothed[i * levels + fine];
            const bool right_ok = i + 1 == n || smoothed[(i + 1) * levels + fine] <
                                                    smoothed[i * levels + fine];
            if (est > 0.02 && left_ok && right_ok)
                curve.atom_candidates.push_back({grid[i], est});
        }
    }
    return curve;
}

struct BrownGrid {
    double re_min = -2.0, re_max = 2.0;
    int re_points = 101;
    double im_min = -2.0, im_max = 2.0;
    int im_points = 101;

    double re_step() const { return (re_max - re_min) / (re_points - 1); }
    double im_step() const { return (im_max - im_min) / (im_points - 1); }
    double re_at(int ix) const { return re_min + ix * re_step(); }
    double im_at(int iy) const { return im_min + iy * im_step(); }
};

struct BrownField {
    BrownGrid grid;
    std::vector<double> density;   // index iy * re_points + ix
    std::vector<Complex> corner_g; // raw G_{eps}(lambda) before differentiation
    double epsilon = 0.0;
    double fd_step = 0.0;
    double mass = 0.0;
    int failed_nodes = 0;
    bool border_one_sided = true;  // borders use first-order one-sided differences

    double at(int ix, int iy) const {
        return density[static_cast<std::size_t>(iy) *
                           static_cast<std::size_t>(grid.re_points) +
                       static_cast<std::size_t>(ix)];
    }
};

/// Brown density via the regularized transform: evaluates the corner
/// entry g(lambda) of G at Lambda_eps over the grid, then applies the
/// conjugate Wirtinger derivative (1/pi) Re[(d/ds + i d/dt)/2] g by
/// central differences (one-sided at the borders). Nodes where the
/// fixed point fails are flagged and skipped.
inline BrownField brown_field(const linpen::LinearPencil& pen,
                              const std::map<std::string, laws::ScalarLaw>& law_map,
                              const BrownGrid& grid, double eps,
                              const subord::FixedPointOptions& opts = {}, int threads = 1) {
    if (pen.corner != 2) throw DomainError("brown_field: pencil corner must be 2");
    if (!(eps > 0.0)) throw DomainError("brown_field: eps must be positive");
    if (grid.re_points < 2 || grid.im_points < 2)
        throw DomainError("brown_field: grid needs at least 2 points per axis");

    const std::size_t nx = static_cast<std::size_t>(grid.re_points);
    const std::size_t ny = static_cast<std::size_t>(grid.im_points);
    BrownField field;
    field.grid = grid;
    field.epsilon = eps;
    field.fd_step = grid.re_step();
    field.corner_g.assign(nx * ny, Complex(0.0, 0.0));
    std::vector<char> failed(nx * ny, 0);

    // Rows are sequential so each row can warm-start its own evaluator
    // chain; different rows run in parallel.
    parallel_for(ny, [&](std::size_t iy) {
        const double t = grid.im_at(static_cast<int>(iy));
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double s = grid.re_at(static_cast<int>(ix));
            try {
                field.corner_g[iy * nx + ix] = subord::scalar_cauchy_herm(
                    pen, law_map, Complex(s, t), eps, opts);
            } catch (const std::exception&) {
                failed[iy * nx + ix] = 1;
            }
        }
    }, threads);

    for (const char f : failed) field.failed_nodes += f;

    const double hs = grid.re_step();
    const double ht = grid.im_step();
    field.density.assign(nx * ny, 0.0);
    auto g_at = [&](std::size_t ix, std::size_t iy) { return field.corner_g[iy * nx + ix]; };
    auto ok = [&](std::size_t ix, std::size_t iy) { return failed[iy * nx + ix] == 0; };

    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            if (!ok(ix, iy)) continue;
            Complex dgds, dgdt;
            if (ix > 0 && ix + 1 < nx && ok(ix - 1, iy) && ok(ix + 1, iy))
                dgds = (g_at(ix + 1, iy) - g_at(ix - 1, iy)) / (2.0 * hs);
            else if (ix + 1 < nx && ok(ix + 1, iy))
                dgds = (g_at(ix + 1, iy) - g_at(ix, iy)) / hs;
            else if (ix > 0 && ok(ix - 1, iy))
                dgds = (g_at(ix, iy) - g_at(ix - 1, iy)) / hs;
            else
                continue;
            if (iy > 0 && iy + 1 < ny && ok(ix, iy - 1) && ok(ix, iy + 1))
                dgdt = (g_at(ix, iy + 1) - g_at(ix, iy - 1)) / (2.0 * ht);
            else if (iy + 1 < ny && ok(ix, iy + 1))
                dgdt = (g_at(ix, iy + 1) - g_at(ix, iy)) / ht;
            else if (iy > 0 && ok(ix, iy - 1))
                dgdt = (g_at(ix, iy) - g_at(ix, iy - 1)) / ht;
            else
                continue;
            const Complex wirtinger = 0.5 * (dgds + Complex(0.0, 1.0) * dgdt);
            field.density[iy * nx + ix] = std::max(0.0, wirtinger.real() / kPi);
        }

    // 2-D trapezoid mass.
    double mass = 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            double w = 1.0;
            if (ix == 0 || ix + 1 == nx) w *= 0.5;
            if (iy == 0 || iy + 1 == ny) w *= 0.5;
            mass += w * field.density[iy * nx + ix];
        }
    field.mass = mass * hs * ht;
    return field;
}

struct CurveStats {
    double mass = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

inline CurveStats measure_stats(const DensityCurve& curve) {
    if (curve.grid.empty()) throw DomainError("measure_stats: empty grid");
    CurveStats st;
    st.mass = curve.mass;
    std::vector<double> tv(curve.grid.size()), ttv(curve.grid.size());
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        tv[i] = curve.grid[i] * curve.values[i];
        ttv[i] = curve.grid[i] * curve.grid[i] * curve.values[i];
    }
    const double m1 = trapezoid_mass(curve.grid, tv);
    const double m2 = trapezoid_mass(curve.grid, ttv);
    if (st.mass > 0.0) {
        st.mean = m1 / st.mass;
        st.variance = m2 / st.mass - st.mean * st.mean;
    }
    return st;
}

struct FieldStats {
    double mass = 0.0;
    Complex centroid{0.0, 0.0};
    // Sorted (radius about centroid, cumulative mass fraction).
    std::vector<std::pair<double, double>> radial_cdf;

    double radial_cdf_at(double r) const {
        if (radial_cdf.empty() || r < radial_cdf.front().first) return 0.0;
        std::size_t lo = 0, hi = radial_cdf.size();
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (radial_cdf[mid].first <= r)
                lo = mid;
            else
                hi = mid;
        }
        return radial_cdf[lo].second;
    }
};

inline FieldStats measure_stats(const BrownField& field) {
    if (field.density.empty()) throw DomainError("measure_stats: empty grid");
    const std::size_t nx = static_cast<std::size_t>(field.grid.re_points);
    const std::size_t ny = static_cast<std::size_t>(field.grid.im_points);
    const double hs = field.grid.re_step();
    const double ht = field.grid.im_step();
    FieldStats st;
    double sum = 0.0;
    Complex first{0.0, 0.0};
    std::vector<std::pair<double, double>> cells;
    cells.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            double w = 1.0;
            if (ix == 0 || ix + 1 == nx) w *= 0.5;
            if (iy == 0 || iy + 1 == ny) w *= 0.5;
            const double m = w * field.density[iy * nx + ix] * hs * ht;
            sum += m;
            first += m * Complex(field.grid.re_at(static_cast<int>(ix)),
                                 field.grid.im_at(static_cast<int>(iy)));
        }
    st.mass = sum;
    if (sum > 0.0) st.centroid = first / sum;
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            double w = 1.0;
            if (ix == 0 || ix + 1 == nx) w *= 0.5;
            if (iy == 0 || iy + 1 == ny) w *= 0.5;
            const double m = w * field.density[iy * nx + ix] * hs * ht;
            const double r = std::abs(Complex(field.grid.re_at(static_cast<int>(ix)),
                                              field.grid.im_at(static_cast<int>(iy))) -
                                      st.centroid);
            cells.emplace_back(r, m);
        }
    std::sort(cells.begin(), cells.end());
    st.radial_cdf.reserve(cells.size());
    double acc = 0.0;
    for (const auto& [r, m] : cells) {
        acc += m;
        st.radial_cdf.emplace_back(r, sum > 0.0 ? acc / sum : 0.0);
    }
    return st;
}

/// Marginal over Im(lambda): integrates each grid column by trapezoid.
inline std::vector<double> real_axis_marginal(const BrownField& field) {
    const std::size_t nx = static_cast<std::size_t>(field.grid.re_points);
    const std::size_t ny = static_cast<std::size_t>(field.grid.im_points);
    const double ht = field.grid.im_step();
    std::vector<double> marginal(nx, 0.0);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        double acc = 0.0;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double w = (iy == 0 || iy + 1 == ny) ? 0.5 : 1.0;
            acc += w * field.density[iy * nx + ix];
        }
        marginal[ix] = acc * ht;
    }
    return marginal;
}

} // namespace recover
} // namespace freeconv
