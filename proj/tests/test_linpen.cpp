#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "freeconv/linpen.hpp"
#include "helpers.hpp"

using namespace freeconv;
using linpen::LinearPencil;

namespace {

// Reference selfadjoint pencil for x*y + y*x + x^2:
//   [[0, x, y + x/2], [x, 0, -1], [y + x/2, -1, 0]]
LinearPencil reference_pencil_sa() {
    LinearPencil pen;
    pen.dim = 3;
    pen.corner = 1;
    pen.vars = {"x", "y"};
    pen.constant = CMatrix::Zero(3, 3);
    pen.constant(1, 2) = -1;
    pen.constant(2, 1) = -1;
    CMatrix cx = CMatrix::Zero(3, 3), cy = CMatrix::Zero(3, 3);
    cx(0, 1) = cx(1, 0) = 1;
    cx(0, 2) = cx(2, 0) = 0.5;
    cy(0, 2) = cy(2, 0) = 1;
    pen.coeffs = {cx, cy};
    return pen;
}

// Reference hermitized 6x6 pencil for p = x*y.
LinearPencil reference_pencil_herm_xy() {
    LinearPencil pen;
    pen.dim = 6;
    pen.corner = 2;
    pen.vars = {"x", "y"};
    CMatrix c = CMatrix::Zero(6, 6);
    c(1, 5) = c(5, 1) = 1;
    c(2, 4) = c(4, 2) = -1;
    c(3, 5) = c(5, 3) = -1;
    CMatrix cx = CMatrix::Zero(6, 6), cy = CMatrix::Zero(6, 6);
    cx(0, 4) = cx(4, 0) = 1;
    cy(2, 3) = cy(3, 2) = 1;
    pen.constant = c;
    pen.coeffs = {cx, cy};
    return pen;
}

} // namespace

TEST_CASE("reference selfadjoint pencil certifies") {
    const auto p = ncexpr::parse("x*y + y*x + x^2", {"x", "y"});
    const auto rep = linpen::verify_pencil(reference_pencil_sa(), p, {.trials = 50, .m = 5});
    INFO("max residual " << rep.max_residual);
    REQUIRE(rep.pass);
}

TEST_CASE("built pencil for the quadratic example certifies tightly") {
    const auto p = ncexpr::parse("x*y + y*x + x^2", {"x", "y"});
    const auto pen = linpen::linearize_sa(p);
    REQUIRE(pen.dim <= 1 + 6);
    const auto rep = linpen::verify_pencil(pen, p, {.trials = 50, .m = 5});
    REQUIRE(rep.max_residual <= 1e-10);
}

TEST_CASE("single letter linearizes to a 1x1 pencil") {
    const auto pen = linpen::linearize_sa(ncexpr::parse("x", {"x"}));
    REQUIRE(pen.dim == 1);
    REQUIRE(pen.coeffs[0](0, 0) == Complex(1, 0));
    const auto rep = linpen::verify_pencil(pen, ncexpr::parse("x", {"x"}), {.trials = 5, .m = 4});
    REQUIRE(rep.pass);
}

TEST_CASE("linearize_sa rejects bad input") {
    REQUIRE_THROWS_AS(linpen::linearize_sa(ncexpr::parse("x*y", {"x", "y"})), DomainError);
    REQUIRE_THROWS_AS(linpen::linearize_sa(ncexpr::parse("x - x", {"x"})), DomainError);
}

TEST_CASE("random selfadjoint polynomials pass the recovery identity") {
    const std::vector<std::string> vars{"x", "y", "z"};
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto p = testutil::random_selfadjoint_poly(vars, seed);
        const auto pen = linpen::linearize_sa(p);
        int letters = 0;
        const auto canon = ncexpr::canonical_selfadjoint(p);
        for (const auto& [w, c] : canon.terms()) letters += static_cast<int>(w.size());
        REQUIRE(pen.dim <= 1 + letters);
        const auto rep =
            linpen::verify_pencil(pen, p, {.trials = 3, .m = 5, .seed = seed, .z = {0.0, 2.0}});
        INFO("seed " << seed << " poly " << ncexpr::print(p) << " residual " << rep.max_residual);
        REQUIRE(rep.max_residual <= 1e-10);
    }
}

TEST_CASE("corrupted pencil fails verification loudly") {
    auto pen = reference_pencil_sa();
    pen.coeffs[0](0, 1) = -1;  // sign flip
    pen.coeffs[0](1, 0) = -1;
    const auto p = ncexpr::parse("x*y + y*x + x^2", {"x", "y"});
    const auto rep = linpen::verify_pencil(pen, p, {.trials = 10, .m = 4});
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.max_residual > 1e-4);
}

TEST_CASE("reference hermitized 6x6 pencil certifies") {
    const auto p = ncexpr::parse("x*y", {"x", "y"});
    const auto rep = linpen::verify_pencil(reference_pencil_herm_xy(), p,
                                           {.trials = 50, .m = 4,
                                            .lambda = {0.2, 0.3}, .epsilon = 1e-2});
    INFO("max residual " << rep.max_residual);
    REQUIRE(rep.pass);
}

TEST_CASE("built hermitized pencils certify") {
    const auto xy = ncexpr::parse("x*y", {"x", "y"});
    const auto pen = linpen::hermitized_linearize(xy);
    REQUIRE(pen.dim <= 2 * (1 + 2));
    REQUIRE(linpen::verify_pencil(pen, xy, {.trials = 30, .m = 4, .lambda = {0.2, 0.3},
                                            .epsilon = 1e-2})
                .max_residual <= 1e-10);

    const auto x = ncexpr::parse("x", {"x"});
    const auto hx = linpen::hermitized_linearize(x);
    REQUIRE(hx.dim == 2);
    REQUIRE(hx.coeffs[0](0, 1) == Complex(1, 0));
    REQUIRE(hx.coeffs[0](1, 0) == Complex(1, 0));

    const auto mixed = ncexpr::parse("x + 1i*y", {"x", "y"});
    const auto hm = linpen::hermitized_linearize(mixed);
    const auto rep = linpen::verify_pencil(hm, mixed, {.trials = 20, .m = 4,
                                                       .lambda = {0.3, 0.1}, .epsilon = 1e-2});
    REQUIRE(rep.max_residual <= 1e-10);
}

TEST_CASE("random polynomials pass the hermitized recovery identity") {
    const std::vector<std::string> vars{"x", "y"};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto p = testutil::random_poly(vars, seed, 4, 3);
        if (p.is_zero()) continue;
        const auto pen = linpen::hermitized_linearize(p);
        int letters = 0;
        const auto canon = ncexpr::canonical_selfadjoint(p);
        for (const auto& [w, c] : canon.terms()) letters += static_cast<int>(w.size());
        REQUIRE(pen.dim <= 2 * (1 + letters));
        const auto rep = linpen::verify_pencil(
            pen, p, {.trials = 3, .m = 4, .seed = seed, .lambda = {0.25, -0.4}, .epsilon = 2e-2});
        INFO("seed " << seed << " poly " << ncexpr::print(p) << " residual " << rep.max_residual);
        REQUIRE(rep.max_residual <= 1e-9);
    }
}

TEST_CASE("descriptor realization of the rational example") {
    // r = (1/2, 0) Q^{-1} (1/2, 0)^T with
    // Q = [[1 - x1/4, -x2/4], [-x2/4, 1 - x1/4]]
    linpen::RealizationSpec spec;
    spec.u = CVector(2);
    spec.u << 0.5, 0.0;
    spec.v = spec.u;
    spec.q_constant = CMatrix::Identity(2, 2);
    spec.vars = {"x1", "x2"};
    CMatrix q1 = CMatrix::Zero(2, 2), q2 = CMatrix::Zero(2, 2);
    q1(0, 0) = q1(1, 1) = -0.25;
    q2(0, 1) = q2(1, 0) = -0.25;
    spec.q_coeffs = {q1, q2};
    const auto pen = linpen::ingest_pencil(spec);
    REQUIRE(pen.dim == 3);
    REQUIRE(pen.corner == 1);
    // displayed bordered form: constant [[0,1/2,0],[1/2,-1,0],[0,0,-1]],
    // x1 coefficient diag(0,1/4,1/4), x2 coefficient antidiag(1/4) in Q
    REQUIRE(pen.constant(0, 1) == Complex(0.5, 0));
    REQUIRE(pen.constant(1, 1) == Complex(-1, 0));
    REQUIRE(pen.coeffs[0](1, 1) == Complex(0.25, 0));
    REQUIRE(pen.coeffs[1](1, 2) == Complex(0.25, 0));

    // certify against direct evaluation of u Q(A)^{-1} v
    const Complex z(0, 3);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const int m = 4;
        const CMatrix a1 = testutil::random_hermitian(m, seed, 70);
        const CMatrix a2 = testutil::random_hermitian(m, seed, 71);
        const CMatrix eye = CMatrix::Identity(m, m);
        CMatrix qa(2 * m, 2 * m);
        qa.block(0, 0, m, m) = eye - 0.25 * a1;
        qa.block(0, m, m, m) = -0.25 * a2;
        qa.block(m, 0, m, m) = -0.25 * a2;
        qa.block(m, m, m, m) = eye - 0.25 * a1;
        const CMatrix qinv = cmat::inv(qa);
        const CMatrix ra = 0.25 * qinv.block(0, 0, m, m);
        const CMatrix want = cmat::inv(z * eye - ra);
        const CMatrix big = linpen::eval_pencil(pen, {{"x1", a1}, {"x2", a2}});
        const CMatrix lam = cmat::kron(linpen::lambda_embed(pen, z), eye);
        const CMatrix got = cmat::inv(lam - big).topLeftCorner(m, m);
        REQUIRE((got - want).norm() < 1e-10);
    }
}

TEST_CASE("scalar descriptor realization certifies against direct evaluation") {
    // r = 1 * (1 - x/4)^{-1} * 1
    linpen::RealizationSpec spec;
    spec.u = CVector(1);
    spec.u << 1.0;
    spec.v = spec.u;
    spec.q_constant = CMatrix::Identity(1, 1);
    spec.vars = {"x"};
    CMatrix q = CMatrix::Zero(1, 1);
    q(0, 0) = -0.25;
    spec.q_coeffs = {q};
    const auto pen = linpen::ingest_pencil(spec);
    REQUIRE(pen.dim == 2);
    const Complex z(0, 3);
    const int m = 3;
    const CMatrix a = testutil::random_hermitian(m, 31);
    const CMatrix eye = CMatrix::Identity(m, m);
    const CMatrix ra = cmat::inv(eye - 0.25 * a);
    const CMatrix want = cmat::inv(z * eye - ra);
    const CMatrix big = linpen::eval_pencil(pen, {{"x", a}});
    const CMatrix got =
        cmat::inv(cmat::kron(linpen::lambda_embed(pen, z), eye) - big).topLeftCorner(m, m);
    REQUIRE((got - want).norm() < 1e-10);
}

TEST_CASE("degenerate realizations are rejected") {
    linpen::RealizationSpec spec;
    spec.u = CVector::Zero(2);
    spec.v = CVector::Zero(2);
    spec.q_constant = CMatrix::Identity(2, 2);
    REQUIRE_THROWS_AS(linpen::ingest_pencil(spec), DomainError);
}

TEST_CASE("non-hermitian realizations take the hermitized route") {
    linpen::RealizationSpec spec;
    spec.u = CVector(2);
    spec.u << 0.0, 0.5;
    spec.v = CVector(2);
    spec.v << 0.5, 0.0;
    spec.q_constant = CMatrix::Identity(2, 2);
    spec.vars = {"x1", "x2"};
    CMatrix q1 = CMatrix::Zero(2, 2), q2 = CMatrix::Zero(2, 2);
    q1(0, 0) = q1(1, 1) = -0.25;
    q2(0, 1) = Complex(0, -1);
    q2(1, 0) = -0.25;
    spec.q_coeffs = {q1, q2};
    const auto pen = linpen::ingest_pencil(spec);
    REQUIRE(pen.corner == 2);
    REQUIRE(pen.dim == 6);
    pen.validate();
}

TEST_CASE("lambda_embed payloads and regularization") {
    const auto pen = linpen::linearize_sa(ncexpr::parse("x*y + y*x + x^2", {"x", "y"}));

    const CMatrix b0 = linpen::lambda_embed(pen, Complex(0, 2), 0.0);
    REQUIRE(b0(0, 0) == Complex(0, 2));
    REQUIRE(b0.norm() == Catch::Approx(2.0));
    REQUIRE_FALSE(cmat::uhp_check(b0).in_upper);  // boundary without delta

    const CMatrix b1 = linpen::lambda_embed(pen, Complex(0, 2), 1e-8);
    REQUIRE(cmat::uhp_check(b1).in_upper);

    const CMatrix br = linpen::lambda_embed(pen, Complex(1.5, 0.0), 0.0);
    REQUIRE_FALSE(cmat::uhp_check(br).in_upper);

    const auto hp = linpen::hermitized_linearize(ncexpr::parse("x*y", {"x", "y"}));
    const CMatrix b2 = linpen::lambda_embed_herm(hp, Complex(1, 0), 0.1, 1e-8);
    REQUIRE(b2(0, 1) == Complex(1, 0));
    REQUIRE(b2(1, 0) == Complex(1, 0));
    REQUIRE(cmat::uhp_check(b2).in_upper);

    REQUIRE_THROWS_AS(linpen::lambda_embed(hp, Complex(0, 2), 0.0), DomainError);
    REQUIRE_THROWS_AS(linpen::lambda_embed_herm(pen, Complex(0, 0), 0.1, 0.0), DomainError);
}

TEST_CASE("pencil serialization round-trips") {
    const auto p = ncexpr::parse("x*y + y*x + x^2", {"x", "y"});
    const auto pen = linpen::linearize_sa(p);
    const std::string text = linpen::write_pencil(pen);
    std::istringstream in(text);
    const auto back = linpen::read_pencil(in);
    REQUIRE(back.dim == pen.dim);
    REQUIRE(back.corner == pen.corner);
    REQUIRE(back.vars == pen.vars);
    REQUIRE((back.constant - pen.constant).norm() == 0.0);
    for (std::size_t j = 0; j < pen.coeffs.size(); ++j)
        REQUIRE((back.coeffs[j] - pen.coeffs[j]).norm() == 0.0);

    std::istringstream bad("pencil 2 1\nconstant\n0,0 0,0\n");
    REQUIRE_THROWS_AS(linpen::read_pencil(bad), ParseError);
    std::istringstream bad2("nope");
    REQUIRE_THROWS_AS(linpen::read_pencil(bad2), ParseError);
}
