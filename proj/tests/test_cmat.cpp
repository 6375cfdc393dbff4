#include <catch2/catch_amalgamated.hpp>

#include "freeconv/cmat.hpp"
#include "helpers.hpp"

using namespace freeconv;

TEST_CASE("inv on closed-form cases") {
    CMatrix d(2, 2);
    d << Complex(0, 2), 0, 0, -1;
    CMatrix want(2, 2);
    want << Complex(0, -0.5), 0, 0, -1;
    REQUIRE((cmat::inv(d) - want).norm() < 1e-15);

    CMatrix swap(2, 2);
    swap << 0, 1, 1, 0;
    REQUIRE((cmat::inv(swap) - swap).norm() < 1e-15);
}

TEST_CASE("inv residual on random well-conditioned matrices") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CMatrix a = testutil::random_hermitian(6, seed) +
                    Complex(0, 1) * CMatrix::Identity(6, 6);
        const CMatrix id = CMatrix::Identity(6, 6);
        const CMatrix r = a * cmat::inv(a) - id;
        REQUIRE(r.norm() <= 1e-10 * 6 * a.norm());
        // involution up to tolerance
        REQUIRE((cmat::inv(cmat::inv(a)) - a).norm() <= 1e-10 * a.norm());
    }
}

TEST_CASE("inv rejects singular input") {
    CMatrix z = CMatrix::Zero(3, 3);
    REQUIRE_THROWS_AS(cmat::inv(z), NumericError);
    CMatrix rank1(2, 2);
    rank1 << 1, 1, 1, 1;
    REQUIRE_THROWS_AS(cmat::inv(rank1), NumericError);
    CMatrix rect(2, 3);
    rect.setZero();
    REQUIRE_THROWS_AS(cmat::inv(rect), DomainError);
}

TEST_CASE("uhp_check margins") {
    const CMatrix b = Complex(0, 0.1) * CMatrix::Identity(3, 3);
    const auto rep = cmat::uhp_check(b);
    REQUIRE(rep.in_upper);
    REQUIRE(rep.min_imag_eig == Catch::Approx(0.1).margin(1e-14));

    // Lambda_eps has imaginary part eps * I
    const Complex lam(0.7, -0.4);
    CMatrix le(2, 2);
    le << Complex(0, 0.05), lam, std::conj(lam), Complex(0, 0.05);
    const auto rep2 = cmat::uhp_check(le);
    REQUIRE(rep2.in_upper);
    REQUIRE(rep2.min_imag_eig == Catch::Approx(0.05).margin(1e-14));

    const CMatrix herm = testutil::random_hermitian(4, 3);
    const auto rep3 = cmat::uhp_check(herm);
    REQUIRE_FALSE(rep3.in_upper);
    REQUIRE(std::abs(rep3.min_imag_eig) < 1e-12 * herm.norm());
}

TEST_CASE("uhp_check margins under reflection and adjoint") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const CMatrix b = testutil::random_uhp(4, seed);
        const auto r1 = cmat::uhp_check(b);
        // -b* has the same imaginary part, so H+ is stable under it
        const auto r2 = cmat::uhp_check(CMatrix(-b.adjoint()));
        REQUIRE(r1.min_imag_eig == Catch::Approx(r2.min_imag_eig).margin(1e-12));
        REQUIRE(r2.in_upper);
        // the adjoint flips the sign: Im(b*) = -Im(b)
        const auto r3 = cmat::uhp_check(CMatrix(b.adjoint()));
        const RVector spectrum = cmat::eig_herm_values(cmat::imag_part(b));
        REQUIRE(r3.min_imag_eig ==
                Catch::Approx(-spectrum(spectrum.size() - 1)).margin(1e-12));
        REQUIRE_FALSE(r3.in_upper);
    }
}

TEST_CASE("H+ is closed under b -> -inv(b)") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const CMatrix b = testutil::random_uhp(4, seed);
        REQUIRE(cmat::uhp_check(b).in_upper);
        const CMatrix nb = -cmat::inv(b);
        REQUIRE(cmat::uhp_check(nb).in_upper);
    }
}

TEST_CASE("eig_herm on closed-form cases") {
    CMatrix swap(2, 2);
    swap << 0, 1, 1, 0;
    const auto [vals, vecs] = cmat::eig_herm(swap);
    REQUIRE(vals(0) == Catch::Approx(-1.0));
    REQUIRE(vals(1) == Catch::Approx(1.0));
    REQUIRE((vecs * vecs.adjoint() - CMatrix::Identity(2, 2)).norm() < 1e-12);

    CMatrix d = CMatrix::Zero(3, 3);
    d(0, 0) = 3;
    d(1, 1) = 1;
    d(2, 2) = 2;
    const auto sorted = cmat::eig_herm(d).values;
    REQUIRE(sorted(0) == Catch::Approx(1.0));
    REQUIRE(sorted(1) == Catch::Approx(2.0));
    REQUIRE(sorted(2) == Catch::Approx(3.0));
}

TEST_CASE("eig_herm satisfies the residual and trace identities") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const CMatrix a = testutil::random_hermitian(8, seed);
        const auto eig = cmat::eig_herm(a);
        const CMatrix lam = eig.values.cast<Complex>().asDiagonal();
        REQUIRE((a * eig.vectors - eig.vectors * lam).norm() <= 1e-10 * 8 * a.norm());
        REQUIRE(std::abs(eig.values.sum() - a.trace().real()) <= 1e-10 * std::max(1.0, a.norm()));
    }
    CMatrix nh(2, 2);
    nh << 0, 1, 0, 0;
    REQUIRE_THROWS_AS(cmat::eig_herm(nh), DomainError);
}

TEST_CASE("eig_general on closed-form cases") {
    CMatrix nilp(2, 2);
    nilp << 0, 1, 0, 0;
    const CVector ev = cmat::eig_general(nilp);
    REQUIRE(std::abs(ev(0)) < 1e-8);
    REQUIRE(std::abs(ev(1)) < 1e-8);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = Complex(1, 1);
    d(1, 1) = 2;
    const CVector ev2 = cmat::eig_general(d);
    const double hit = std::min(std::abs(ev2(0) - Complex(1, 1)), std::abs(ev2(1) - Complex(1, 1)));
    REQUIRE(hit < 1e-12);
}

TEST_CASE("eig_general eigenvalue sum matches the trace") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        CMatrix a(10, 10);
        std::uint64_t k = 0;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                a(i, j) = Complex(rng::gaussian(seed, 80, k), rng::gaussian(seed, 81, k));
                ++k;
            }
        const CVector ev = cmat::eig_general(a);
        REQUIRE(std::abs(ev.sum() - a.trace()) <= 1e-8 * 10 * a.norm());
    }
}
