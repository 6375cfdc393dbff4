#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "freeconv/errors.hpp"

namespace freeconv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

namespace cmat {

inline double frob(const CMatrix& a) { return a.norm(); }

inline bool is_finite(const CMatrix& a) {
    return a.allFinite();
}

inline void require_finite(const CMatrix& a, const char* what) {
    if (!is_finite(a)) throw DomainError(std::string(what) + ": non-finite entries");
}

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

/// Hermitian part (a + a*)/2.
inline CMatrix herm_part(const CMatrix& a) {
    return 0.5 * (a + a.adjoint());
}

/// Anti-Hermitian part mapped to a Hermitian matrix: (a - a*)/(2i).
inline CMatrix imag_part(const CMatrix& a) {
    return (a - a.adjoint()) / Complex(0.0, 2.0);
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// LU inverse with an explicit singularity guard: the smallest pivot is
/// compared against n * eps * ||a||_F.
inline CMatrix inv(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DomainError("inv: matrix not square");
    const Eigen::Index n = a.rows();
    if (n == 0) throw DomainError("inv: empty matrix");
    Eigen::PartialPivLU<CMatrix> lu(a);
    const double scale = frob(a);
    const double floor = static_cast<double>(n) *
                         std::numeric_limits<double>::epsilon() * scale;
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > floor))
        throw NumericError("inv: matrix singular to working precision (pivot " +
                           std::to_string(min_pivot) + ")");
    return lu.solve(identity(n));
}

struct EigHerm {
    RVector values;   // ascending
    CMatrix vectors;  // unitary, columns match values
};

/// Hermitian eigensolver. Input must be Hermitian to ~1e-12 relative.
inline EigHerm eig_herm(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DomainError("eig_herm: matrix not square");
    const double scale = frob(a);
    if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, scale))
        throw DomainError("eig_herm: input not Hermitian");
    // Real symmetric inputs take the (much faster) real path; relevant for
    // the large Monte Carlo spectra.
    if (a.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.real());
        if (es.info() != Eigen::Success) throw NumericError("eig_herm: solver failed");
        return {es.eigenvalues(), es.eigenvectors().cast<Complex>()};
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    if (es.info() != Eigen::Success) throw NumericError("eig_herm: solver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// Eigenvalues only, ascending.
inline RVector eig_herm_values(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DomainError("eig_herm: matrix not square");
    if (a.rows() <= 3) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es3;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es2;
        if (a.rows() == 1) {
            RVector v(1);
            v(0) = a(0, 0).real();
            return v;
        }
        if (a.rows() == 2) {
            es2.computeDirect(a, Eigen::EigenvaluesOnly);
            return es2.eigenvalues();
        }
        es3.computeDirect(a, Eigen::EigenvaluesOnly);
        return es3.eigenvalues();
    }
    if (a.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.real(), Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

struct HalfPlaneReport {
    bool in_upper = false;
    double min_imag_eig = 0.0;  // smallest eigenvalue of (b - b*)/(2i)
};

/// Membership in the matrix upper half-plane { b : (b - b*)/(2i) > 0 },
/// decided through the smallest eigenvalue so callers see the margin.
inline HalfPlaneReport uhp_check(const CMatrix& b) {
    if (b.rows() != b.cols()) throw DomainError("uhp_check: matrix not square");
    const RVector ev = eig_herm_values(imag_part(b));
    HalfPlaneReport r;
    r.min_imag_eig = ev(0);
    r.in_upper = r.min_imag_eig > 0.0;
    return r;
}

/// General complex spectrum (multiset of n eigenvalues).
inline CVector eig_general(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DomainError("eig_general: matrix not square");
    Eigen::ComplexEigenSolver<CMatrix> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericError("eig_general: QR iteration did not converge");
    return es.eigenvalues();
}

} // namespace cmat
} // namespace freeconv
