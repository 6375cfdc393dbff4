#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/ncexpr.hpp"
#include "freeconv/rng.hpp"

namespace testutil {

using freeconv::CMatrix;
using freeconv::Complex;

inline CMatrix random_hermitian(int m, std::uint64_t seed, std::uint64_t stream = 0) {
    CMatrix a(m, m);
    std::uint64_t k = 0;
    for (int i = 0; i < m; ++i) {
        a(i, i) = freeconv::rng::gaussian(seed, stream, k++);
        for (int j = i + 1; j < m; ++j) {
            const double re = freeconv::rng::gaussian(seed, stream, k++);
            const double im = freeconv::rng::gaussian(seed, stream, k++);
            a(i, j) = Complex(re, im) / std::sqrt(2.0);
            a(j, i) = std::conj(a(i, j));
        }
    }
    return a;
}

/// Matrix with positive-definite imaginary part (random point of H+).
inline CMatrix random_uhp(int m, std::uint64_t seed, std::uint64_t stream = 0) {
    const CMatrix re = random_hermitian(m, seed, 2 * stream);
    CMatrix g(m, m);
    std::uint64_t k = 0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double x = freeconv::rng::gaussian(seed, 2 * stream + 1, k++);
            const double y = freeconv::rng::gaussian(seed, 2 * stream + 1, k++);
            g(i, j) = Complex(x, y);
        }
    const CMatrix pos = g * g.adjoint() + 0.1 * CMatrix::Identity(m, m);
    return re + Complex(0.0, 1.0) * pos;
}

/// Random polynomial with dyadic coefficients (exact under conjugation
/// and printing). Variables drawn from the given list.
inline freeconv::ncexpr::NcPolynomial random_poly(const std::vector<std::string>& vars,
                                                  std::uint64_t seed, int max_terms = 5,
                                                  int max_degree = 4) {
    using freeconv::ncexpr::Letter;
    using freeconv::ncexpr::NcPolynomial;
    using freeconv::ncexpr::Word;
    NcPolynomial p(vars);
    const int terms = 1 + static_cast<int>(freeconv::rng::hash3(seed, 0, 0) %
                                           static_cast<std::uint64_t>(max_terms));
    std::uint64_t ctr = 1;
    for (int t = 0; t < terms; ++t) {
        const int deg = static_cast<int>(freeconv::rng::hash3(seed, 1, ctr++) %
                                         static_cast<std::uint64_t>(max_degree + 1));
        Word w;
        for (int i = 0; i < deg; ++i) {
            const int v = static_cast<int>(freeconv::rng::hash3(seed, 2, ctr++) % vars.size());
            const bool star = (freeconv::rng::hash3(seed, 3, ctr++) % 4) == 0;
            w.push_back(Letter{v, star});
        }
        const double re = static_cast<double>(static_cast<int>(
                              freeconv::rng::hash3(seed, 4, ctr++) % 17) - 8) / 4.0;
        const double im = static_cast<double>(static_cast<int>(
                              freeconv::rng::hash3(seed, 5, ctr++) % 17) - 8) / 4.0;
        if (re == 0.0 && im == 0.0) continue;
        p.add_term(Complex(re, im), std::move(w));
    }
    return p;
}

/// Random selfadjoint polynomial, built as q + q* (plus chance of a
/// real affine part).
inline freeconv::ncexpr::NcPolynomial random_selfadjoint_poly(
    const std::vector<std::string>& vars, std::uint64_t seed, int max_terms = 4,
    int max_degree = 4) {
    using freeconv::ncexpr::NcPolynomial;
    const NcPolynomial q = random_poly(vars, seed, max_terms, max_degree);
    NcPolynomial p = q + freeconv::ncexpr::star(q);
    if (freeconv::rng::hash3(seed, 6, 0) % 2 == 0) {
        NcPolynomial affine(vars);
        affine.add_term(Complex(1.5, 0.0), {});
        affine.add_term(Complex(-0.75, 0.0),
                        {freeconv::ncexpr::Letter{
                            static_cast<int>(freeconv::rng::hash3(seed, 7, 0) % vars.size()),
                            false}});
        p += affine;
    }
    if (freeconv::ncexpr::canonical_selfadjoint(p).is_zero())
        p.add_term(Complex(1.0, 0.0), {freeconv::ncexpr::Letter{0, false}});
    return p;
}

} // namespace testutil
