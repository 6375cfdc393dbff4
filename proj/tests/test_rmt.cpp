#include <catch2/catch_amalgamated.hpp>

#include "freeconv/rmt.hpp"
#include "helpers.hpp"

using namespace freeconv;
using laws::ScalarLaw;
using rmt::EnsembleSpec;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

recover::DensityCurve curve_of_law(const ScalarLaw& law, double lo, double hi, int n) {
    recover::DensityCurve curve;
    curve.grid = linspace(lo, hi, n);
    for (const double t : curve.grid) curve.values.push_back(laws::density(law, t));
    curve.mass = recover::trapezoid_mass(curve.grid, curve.values);
    return curve;
}

} // namespace

TEST_CASE("ensemble sampling is deterministic and structured") {
    EnsembleSpec wig;
    wig.kind = EnsembleSpec::Kind::Wigner;
    wig.n = 64;
    wig.seed = 9;
    const CMatrix a = rmt::sample(wig);
    const CMatrix b = rmt::sample(wig);
    REQUIRE((a - b).norm() == 0.0);
    REQUIRE((a - a.adjoint()).norm() < 1e-14 * a.norm());
    for (int i = 0; i < wig.n; ++i) REQUIRE(a(i, i).imag() == 0.0);
    const CMatrix c = rmt::sample(wig, /*stream=*/1);
    REQUIRE((a - c).norm() > 1e-6);

    EnsembleSpec wis;
    wis.kind = EnsembleSpec::Kind::Wishart;
    wis.n = 32;
    wis.m = 128;
    wis.seed = 4;
    const CMatrix y = rmt::sample(wis);
    REQUIRE((y - rmt::sample(wis)).norm() == 0.0);
    const auto ev = cmat::eig_herm_values(y);
    REQUIRE(ev(0) >= -1e-10 * y.norm());  // positive semidefinite
}

TEST_CASE("wigner empirical variance matches the semicircle") {
    EnsembleSpec wig;
    wig.kind = EnsembleSpec::Kind::Wigner;
    wig.n = 2000;
    wig.seed = 11;
    const CMatrix a = rmt::sample(wig);
    const double var = (a * a).trace().real() / wig.n;
    REQUIRE(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("wishart support matches the marchenko-pastur edges", "[slow]") {
    EnsembleSpec wis;
    wis.kind = EnsembleSpec::Kind::Wishart;
    wis.n = 3000;
    wis.m = 12000;
    wis.seed = 2;
    const CMatrix y = rmt::sample(wis);
    const auto ev = cmat::eig_herm_values(y);
    REQUIRE(ev(0) >= 0.25 - 0.1);
    REQUIRE(ev(ev.size() - 1) <= 2.25 + 0.1);
}

TEST_CASE("wigner spectrum is close to the semicircle") {
    const auto p = ncexpr::parse("x", {"x"});
    std::map<std::string, EnsembleSpec> specs;
    specs["x"].kind = EnsembleSpec::Kind::Wigner;
    const auto res = rmt::poly_spectrum(p, specs, 1000, 13);
    REQUIRE(res.hermitian);
    std::vector<double> evals(res.real_eigenvalues.data(),
                              res.real_eigenvalues.data() + res.real_eigenvalues.size());
    const auto curve = curve_of_law(ScalarLaw::semicircle(), -2.05, 2.05, 400);
    REQUIRE(rmt::ks_distance(evals, curve) < 0.05);
}

TEST_CASE("hermitian route applies to the quadratic example") {
    const auto p = ncexpr::parse("x*y + y*x + x^2", {"x", "y"});
    std::map<std::string, EnsembleSpec> specs;
    specs["x"].kind = EnsembleSpec::Kind::Wigner;
    specs["y"].kind = EnsembleSpec::Kind::Wishart;
    specs["y"].m = 2000;  // ratio 1/4 at N=500
    const auto res = rmt::poly_spectrum(p, specs, 500, 17);
    REQUIRE(res.hermitian);
    REQUIRE(res.real_eigenvalues.size() == 500);
    // trace identity
    std::map<std::string, CMatrix> assignment;
    EnsembleSpec wig = specs["x"];
    wig.n = 500;
    wig.seed = 17;
    EnsembleSpec wis = specs["y"];
    wis.n = 500;
    wis.seed = 17;
    assignment["x"] = rmt::sample(wig, 0);
    assignment["y"] = rmt::sample(wis, 1);
    const CMatrix pa = ncexpr::eval_on_matrices(p, assignment);
    REQUIRE(std::abs(res.real_eigenvalues.sum() - pa.trace().real()) <=
            1e-8 * std::max(1.0, std::abs(pa.trace().real())));
}

TEST_CASE("non-selfadjoint polynomials produce complex spectra in a disk") {
    const auto p = ncexpr::parse("x + 1i*y", {"x", "y"});
    std::map<std::string, EnsembleSpec> specs;
    specs["x"].kind = EnsembleSpec::Kind::Wigner;
    specs["y"].kind = EnsembleSpec::Kind::Wigner;
    const auto res = rmt::poly_spectrum(p, specs, 300, 23);
    REQUIRE_FALSE(res.hermitian);
    REQUIRE(res.complex_eigenvalues.size() == 300);
    int outside = 0, far = 0;
    for (Eigen::Index i = 0; i < res.complex_eigenvalues.size(); ++i) {
        const double r = std::abs(res.complex_eigenvalues(i));
        if (r > std::sqrt(2.0) + 0.25) ++outside;
        if (r > 0.9) ++far;
    }
    REQUIRE(outside <= 6);             // essentially supported in the disk
    REQUIRE(far >= 100);               // genuinely two-dimensional spread
}

TEST_CASE("ks distance closed cases") {
    const std::vector<double> samples{0.1, 0.4, 0.7, 0.9};
    auto empirical = [&](double t) {
        double c = 0.0;
        for (const double s : samples)
            if (s <= t) c += 1.0;
        return c / static_cast<double>(samples.size());
    };
    REQUIRE(rmt::ks_distance(samples, empirical) == 0.0);

    // disjoint supports
    const auto curve = curve_of_law(ScalarLaw::semicircle(), -2.05, 2.05, 200);
    std::vector<double> shifted{10.0, 11.0, 12.0};
    REQUIRE(rmt::ks_distance(shifted, curve) == Catch::Approx(1.0));
}

TEST_CASE("pooled semicircle samples are ks-close to the analytic curve") {
    std::vector<double> pooled = laws::sample(ScalarLaw::semicircle(), 2000, 77);
    const auto curve = curve_of_law(ScalarLaw::semicircle(), -2.05, 2.05, 600);
    REQUIRE(rmt::ks_distance(pooled, curve) <= 0.05);
}

TEST_CASE("compare_field on a synthetic uniform disk") {
    recover::BrownField field;
    field.grid = {-1.6, 1.6, 81, -1.6, 1.6, 81};
    field.density.resize(81 * 81);
    const double r2 = std::sqrt(2.0);
    for (int iy = 0; iy < 81; ++iy)
        for (int ix = 0; ix < 81; ++ix) {
            const Complex lam(field.grid.re_at(ix), field.grid.im_at(iy));
            field.density[static_cast<std::size_t>(iy) * 81 + ix] =
                std::abs(lam) <= r2 ? 1.0 / (2.0 * recover::kPi) : 0.0;
        }
    // samples drawn uniformly from the same disk by rejection
    std::vector<Complex> pts;
    std::uint64_t k = 0;
    while (pts.size() < 4000) {
        const double x = 2.0 * rng::uniform(5, 0, k) - 1.0;
        const double y = 2.0 * rng::uniform(5, 1, k) - 1.0;
        ++k;
        if (x * x + y * y <= 1.0) pts.emplace_back(r2 * x, r2 * y);
    }
    const auto cmp = rmt::compare_field(pts, field);
    REQUIRE(cmp.radial_sup < 0.05);
    REQUIRE(cmp.cells == 64);
    REQUIRE(cmp.chi2 < 0.05);
}
