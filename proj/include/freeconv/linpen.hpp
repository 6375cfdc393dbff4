#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"
#include "freeconv/ncexpr.hpp"
#include "freeconv/rng.hpp"

namespace freeconv {
namespace linpen {

/// Selfadjoint affine pencil c0 (x) 1 + sum_j c_j (x) x_j with a
/// designated recovery corner (r = 1 for resolvents of selfadjoint
/// elements, r = 2 for hermitized problems).
struct LinearPencil {
    int dim = 0;
    int corner = 1;
    CMatrix constant;                // dim x dim, Hermitian
    std::vector<std::string> vars;   // declaration order
    std::vector<CMatrix> coeffs;     // one Hermitian dim x dim matrix per var

    void validate() const {
        if (dim < 1) throw DomainError("pencil: dimension must be >= 1");
        if (corner != 1 && corner != 2) throw DomainError("pencil: corner must be 1 or 2");
        if (corner > dim) throw DomainError("pencil: corner exceeds dimension");
        auto check = [&](const CMatrix& m, const std::string& what) {
            if (m.rows() != dim || m.cols() != dim)
                throw DomainError("pencil: " + what + " has wrong shape");
            cmat::require_finite(m, "pencil");
            if ((m - m.adjoint()).norm() > 1e-12 * std::max(1.0, m.norm()))
                throw DomainError("pencil: " + what + " not Hermitian");
        };
        check(constant, "constant");
        if (vars.size() != coeffs.size())
            throw DomainError("pencil: vars/coeffs size mismatch");
        for (std::size_t j = 0; j < coeffs.size(); ++j) check(coeffs[j], "coefficient of " + vars[j]);
    }
};

namespace detail {

/// Writes val at (i,j) and its conjugate at (j,i).
inline void put(CMatrix& m, Eigen::Index i, Eigen::Index j, Complex val) {
    m(i, j) = val;
    m(j, i) = std::conj(val);
}

struct PencilBuilder {
    int dim;
    CMatrix constant;
    std::vector<CMatrix> coeffs;

    PencilBuilder(int n, std::size_t nvars)
        : dim(n),
          constant(CMatrix::Zero(n, n)),
          coeffs(nvars, CMatrix::Zero(n, n)) {}

    CMatrix& target(int var) {
        return var < 0 ? constant : coeffs[static_cast<std::size_t>(var)];
    }
};

/// Block implementing a palindromic monomial sigma * w1..wq via
/// (M^{-1})_{11} = sigma * (inner palindrome). Antidiagonal holds ones;
/// the shifted antidiagonal holds the chain letters with the (real)
/// sigma attached to the middle cell.
inline void emit_palindrome_block(PencilBuilder& pb, Eigen::Index off, double sigma,
                                  const ncexpr::Word& w) {
    const int k = static_cast<int>(w.size());
    const int q = k - 2;                       // inner palindrome length
    const int r = q / 2;                       // chain length
    const bool mid_is_letter = (q % 2) == 1;
    const int s = 2 * r + 2;                   // block size

    for (int i = 1; i <= s; ++i) put(pb.constant, off + i - 1, off + s - i, 1.0);
    for (int i = 1; i <= r; ++i) {
        // chain letter a_i = w[i] (0-based), cells (i+1, s+1-i)
        put(pb.target(w[static_cast<std::size_t>(i)].var), off + i, off + s - i, -1.0);
    }
    // middle cell (r+2, r+2), diagonal
    if (mid_is_letter)
        put(pb.target(w[static_cast<std::size_t>(r + 1)].var), off + r + 1, off + r + 1, -sigma);
    else
        put(pb.constant, off + r + 1, off + r + 1, -sigma);
}

/// Bidiagonal realization of one monomial c * w (|w| = k >= 2):
/// u Q^{-1} v = -c * w with u = (c*w0, 0, ...), v = (0, ..., w_{k-1}),
/// Q = -I + letters on the superdiagonal. Emits Q into rows [qoff) and
/// its adjoint into [soff), so the block stays Hermitian.
inline void emit_bidiagonal_pair(PencilBuilder& pb, Eigen::Index qoff, Eigen::Index soff,
                                 const ncexpr::Word& w) {
    const int d = static_cast<int>(w.size()) - 1;
    for (int i = 0; i < d; ++i) put(pb.constant, soff + i, qoff + i, -1.0);
    for (int i = 0; i + 1 < d; ++i)
        put(pb.target(w[static_cast<std::size_t>(i + 1)].var), soff + i, qoff + i + 1, 1.0);
}

inline bool is_palindrome(const ncexpr::Word& w) {
    const std::size_t n = w.size();
    for (std::size_t i = 0; i * 2 < n; ++i)
        if (w[i].var != w[n - 1 - i].var) return false;
    return true;
}

inline ncexpr::Word reversed(const ncexpr::Word& w) {
    return ncexpr::Word(w.rbegin(), w.rend());
}

inline double coeff_scale(const ncexpr::NcPolynomial& p) {
    double s = 1.0;
    for (const auto& [w, c] : p.terms()) s = std::max(s, std::abs(c));
    return s;
}

} // namespace detail

/// Selfadjoint linearization: corner r=1 pencil whose top-left m x m
/// block of (Lambda(z) (x) I - pencil(A))^{-1} equals (z I - p(A))^{-1}
/// for every Hermitian assignment A and Im z > 0.
inline LinearPencil linearize_sa(const ncexpr::NcPolynomial& p_in) {
    using ncexpr::Word;
    if (!ncexpr::is_selfadjoint(p_in))
        throw DomainError("linearize_sa: polynomial is not selfadjoint");
    const ncexpr::NcPolynomial p = ncexpr::canonical_selfadjoint(p_in);
    if (p.is_zero()) throw DomainError("linearize_sa: empty polynomial");

    const double scale = detail::coeff_scale(p);

    // Plan blocks in canonical term order so rebuilds are reproducible.
    struct Pal { double sigma; Word w; };
    struct Pair { Complex c; Word w; };
    std::vector<Pal> pals;
    std::vector<Pair> pairs;
    Complex ell_const = 0.0;
    std::vector<Complex> ell_lin(p.variables().size(), 0.0);

    for (const auto& [w, c] : p.terms()) {
        if (w.empty()) {
            ell_const += c;
        } else if (w.size() == 1) {
            ell_lin[static_cast<std::size_t>(w[0].var)] += c;
        } else if (detail::is_palindrome(w)) {
            if (std::abs(c.imag()) > 1e-12 * scale)
                throw DomainError("linearize_sa: palindromic term with non-real coefficient");
            pals.push_back({c.real(), w});
        } else {
            const Word wr = detail::reversed(w);
            if (w < wr) {
                Complex c_eff = c;
                const auto it = p.terms().find(wr);
                if (it != p.terms().end()) c_eff = 0.5 * (c + std::conj(it->second));
                pairs.push_back({c_eff, w});
            }
        }
    }

    int dim = 1;
    for (const auto& b : pals) dim += 2 * ((static_cast<int>(b.w.size()) - 2) / 2) + 2;
    for (const auto& b : pairs) dim += 2 * (static_cast<int>(b.w.size()) - 1);

    detail::PencilBuilder pb(dim, p.variables().size());
    if (std::abs(ell_const.imag()) > 1e-12 * scale)
        throw DomainError("linearize_sa: non-real constant term");
    pb.constant(0, 0) = ell_const.real();
    for (std::size_t j = 0; j < ell_lin.size(); ++j) {
        if (std::abs(ell_lin[j].imag()) > 1e-12 * scale)
            throw DomainError("linearize_sa: non-real linear coefficient");
        pb.coeffs[j](0, 0) = ell_lin[j].real();
    }

    Eigen::Index off = 1;
    for (const auto& b : pals) {
        const int s = 2 * ((static_cast<int>(b.w.size()) - 2) / 2) + 2;
        // recovered term is -U B^{-1} U*, so the block carries -sigma
        detail::emit_palindrome_block(pb, off, -b.sigma, b.w);
        detail::put(pb.target(b.w[0].var), 0, off, 1.0);
        off += s;
    }
    for (const auto& b : pairs) {
        const int d = static_cast<int>(b.w.size()) - 1;
        detail::emit_bidiagonal_pair(pb, off, off + d, b.w);
        // u-row against the Q rows, v*-row against the Q* rows
        detail::put(pb.target(b.w[0].var), 0, off, b.c);
        detail::put(pb.target(b.w.back().var), 0, off + 2 * d - 1, 1.0);
        off += 2 * d;
    }

    LinearPencil pen;
    pen.dim = dim;
    pen.corner = 1;
    pen.constant = std::move(pb.constant);
    pen.vars = p.variables();
    pen.coeffs = std::move(pb.coeffs);
    pen.validate();
    return pen;
}

/// Linearization of the hermitization [[0, p],[p*, 0]]: corner r=2
/// pencil recovering (Lambda_eps (x) I - [[0,p(A)],[p(A)*,0]])^{-1}.
inline LinearPencil hermitized_linearize(const ncexpr::NcPolynomial& p_in) {
    using ncexpr::Word;
    const ncexpr::NcPolynomial p = ncexpr::canonical_selfadjoint(p_in);
    if (p.is_zero()) throw DomainError("hermitized_linearize: empty polynomial");

    std::vector<std::pair<Complex, Word>> monomials;
    Complex aff_const = 0.0;
    std::vector<Complex> aff_lin(p.variables().size(), 0.0);
    for (const auto& [w, c] : p.terms()) {
        if (w.empty())
            aff_const += c;
        else if (w.size() == 1)
            aff_lin[static_cast<std::size_t>(w[0].var)] += c;
        else
            monomials.emplace_back(c, w);
    }

    int dim = 2;
    for (const auto& [c, w] : monomials) dim += 2 * (static_cast<int>(w.size()) - 1);

    detail::PencilBuilder pb(dim, p.variables().size());
    detail::put(pb.constant, 0, 1, aff_const);
    for (std::size_t j = 0; j < aff_lin.size(); ++j)
        if (aff_lin[j] != 0.0) detail::put(pb.coeffs[j], 0, 1, aff_lin[j]);

    Eigen::Index off = 2;
    for (const auto& [c, w] : monomials) {
        const int d = static_cast<int>(w.size()) - 1;
        detail::emit_bidiagonal_pair(pb, off, off + d, w);
        // row 0 carries u against Q rows; row 1 carries v* against Q* rows
        detail::put(pb.target(w[0].var), 0, off, c);
        detail::put(pb.target(w.back().var), 1, off + 2 * d - 1, 1.0);
        off += 2 * d;
    }

    LinearPencil pen;
    pen.dim = dim;
    pen.corner = 2;
    pen.constant = std::move(pb.constant);
    pen.vars = p.variables();
    pen.coeffs = std::move(pb.coeffs);
    pen.validate();
    return pen;
}

/// Descriptor realization r(x) = u Q(x)^{-1} v with Q affine.
struct RealizationSpec {
    CVector u;                          // row entries
    CVector v;                          // column entries
    CMatrix q_constant;                 // d x d
    std::vector<std::string> vars;
    std::vector<CMatrix> q_coeffs;      // d x d per var
};

/// Borders a descriptor realization into a pencil: selfadjoint route
/// (v = u*, Q Hermitian) gives corner r=1; otherwise the realization is
/// hermitized into a corner r=2 pencil.
inline LinearPencil ingest_pencil(const RealizationSpec& spec) {
    const Eigen::Index d = spec.q_constant.rows();
    if (d < 1 || spec.q_constant.cols() != d)
        throw DomainError("ingest_pencil: Q constant must be square and nonempty");
    if (spec.u.size() != d || spec.v.size() != d)
        throw DomainError("ingest_pencil: u/v dimension mismatch");
    if (spec.u.norm() == 0.0 || spec.v.norm() == 0.0)
        throw DomainError("ingest_pencil: zero u or v gives degenerate recovery");
    if (spec.q_coeffs.size() != spec.vars.size())
        throw DomainError("ingest_pencil: vars/coefficients size mismatch");
    for (const CMatrix& qc : spec.q_coeffs)
        if (qc.rows() != d || qc.cols() != d)
            throw DomainError("ingest_pencil: Q coefficient dimension mismatch");

    auto hermitian = [](const CMatrix& m) {
        return (m - m.adjoint()).norm() <= 1e-12 * std::max(1.0, m.norm());
    };
    bool selfadjoint = hermitian(spec.q_constant) &&
                       (spec.v - spec.u.conjugate()).norm() <= 1e-12 * std::max(1.0, spec.u.norm());
    for (const CMatrix& qc : spec.q_coeffs) selfadjoint = selfadjoint && hermitian(qc);

    LinearPencil pen;
    pen.vars = spec.vars;
    if (selfadjoint) {
        const int n = 1 + static_cast<int>(d);
        pen.dim = n;
        pen.corner = 1;
        pen.constant = CMatrix::Zero(n, n);
        for (Eigen::Index j = 0; j < d; ++j) detail::put(pen.constant, 0, 1 + j, spec.u(j));
        pen.constant.block(1, 1, d, d) = -spec.q_constant;
        for (const CMatrix& qc : spec.q_coeffs) {
            CMatrix m = CMatrix::Zero(n, n);
            m.block(1, 1, d, d) = -qc;
            pen.coeffs.push_back(std::move(m));
        }
    } else {
        const int n = 2 + 2 * static_cast<int>(d);
        pen.dim = n;
        pen.corner = 2;
        pen.constant = CMatrix::Zero(n, n);
        for (Eigen::Index j = 0; j < d; ++j) {
            detail::put(pen.constant, 0, 2 + j, -spec.u(j));
            detail::put(pen.constant, 1, 2 + d + j, std::conj(spec.v(j)));
        }
        // B = [[0, Q*],[Q, 0]] so that -U B^{-1} U* = [[0, u Q^{-1} v], ...]
        pen.constant.block(2, 2 + d, d, d) = spec.q_constant.adjoint();
        pen.constant.block(2 + d, 2, d, d) = spec.q_constant;
        for (const CMatrix& qc : spec.q_coeffs) {
            CMatrix m = CMatrix::Zero(n, n);
            m.block(2, 2 + d, d, d) = qc.adjoint();
            m.block(2 + d, 2, d, d) = qc;
            pen.coeffs.push_back(std::move(m));
        }
    }
    pen.validate();
    return pen;
}

inline double default_delta(double payload_scale) {
    return 1e-9 * std::max(1.0, payload_scale);
}

/// z in the corner, i*delta on the remaining diagonal (r=1).
inline CMatrix lambda_embed(const LinearPencil& pen, Complex z, double delta = 0.0) {
    if (pen.corner != 1) throw DomainError("lambda_embed: pencil corner is not 1");
    CMatrix b = Complex(0.0, delta) * CMatrix::Identity(pen.dim, pen.dim);
    b(0, 0) = z;
    return b;
}

/// Lambda_eps(lambda) = [[i eps, lambda],[conj(lambda), i eps]] in the
/// corner, i*delta elsewhere (r=2).
inline CMatrix lambda_embed_herm(const LinearPencil& pen, Complex lambda, double eps,
                                 double delta = 0.0) {
    if (pen.corner != 2) throw DomainError("lambda_embed: pencil corner is not 2");
    CMatrix b = Complex(0.0, delta) * CMatrix::Identity(pen.dim, pen.dim);
    b(0, 0) = Complex(0.0, eps);
    b(1, 1) = Complex(0.0, eps);
    b(0, 1) = lambda;
    b(1, 0) = std::conj(lambda);
    return b;
}

/// pencil(A) = constant (x) I + sum_j coeff_j (x) A_j.
inline CMatrix eval_pencil(const LinearPencil& pen,
                           const std::map<std::string, CMatrix>& assignment) {
    Eigen::Index m = -1;
    for (const auto& [name, a] : assignment) {
        if (a.rows() != a.cols()) throw DomainError("eval_pencil: assignment not square");
        if (m < 0) m = a.rows();
        if (a.rows() != m) throw DomainError("eval_pencil: assignment sizes differ");
    }
    if (m < 0) throw DomainError("eval_pencil: empty assignment");
    CMatrix out = cmat::kron(pen.constant, CMatrix::Identity(m, m));
    for (std::size_t j = 0; j < pen.vars.size(); ++j) {
        const auto it = assignment.find(pen.vars[j]);
        if (it == assignment.end())
            throw DomainError("eval_pencil: no assignment for '" + pen.vars[j] + "'");
        out += cmat::kron(pen.coeffs[j], it->second);
    }
    return out;
}

struct VerifyOptions {
    int trials = 50;
    int m = 5;                      // substitution size
    std::uint64_t seed = 1;
    Complex z{0.0, 2.0};            // r=1 spectral parameter
    Complex lambda{0.2, 0.3};       // r=2 parameter
    double epsilon = 1e-2;          // r=2 regularization
};

struct VerifyReport {
    double max_residual = 0.0;
    bool pass = false;
    int trials = 0;
};

namespace detail {

inline CMatrix random_hermitian(int m, std::uint64_t seed, std::uint64_t stream) {
    CMatrix a(m, m);
    std::uint64_t k = 0;
    for (int i = 0; i < m; ++i) {
        a(i, i) = rng::gaussian(seed, stream, k++);
        for (int j = i + 1; j < m; ++j) {
            const double re = rng::gaussian(seed, stream, k++);
            const double im = rng::gaussian(seed, stream, k++);
            a(i, j) = Complex(re, im) / std::sqrt(2.0);
            a(j, i) = std::conj(a(i, j));
        }
    }
    return a;
}

} // namespace detail

/// Monte Carlo certification of the recovery identity against the
/// matrix-substitution oracle. Reports the worst residual; never throws
/// on failure.
inline VerifyReport verify_pencil(const LinearPencil& pen, const ncexpr::NcPolynomial& p,
                                  const VerifyOptions& opts = {}) {
    VerifyReport rep;
    rep.trials = opts.trials;
    const Eigen::Index m = opts.m;
    const CMatrix eye_m = CMatrix::Identity(m, m);
    for (int trial = 0; trial < opts.trials; ++trial) {
        std::map<std::string, CMatrix> assignment;
        for (std::size_t j = 0; j < pen.vars.size(); ++j)
            assignment[pen.vars[j]] = detail::random_hermitian(
                opts.m, opts.seed, 1000003ULL * static_cast<std::uint64_t>(trial) + j);
        const CMatrix big = eval_pencil(pen, assignment);
        const CMatrix pa = ncexpr::eval_on_matrices(ncexpr::canonical_selfadjoint(p), assignment);
        double residual = 0.0;
        if (pen.corner == 1) {
            const CMatrix lam = cmat::kron(lambda_embed(pen, opts.z), eye_m);
            const CMatrix lhs = cmat::inv(lam - big).topLeftCorner(m, m);
            const CMatrix rhs = cmat::inv(opts.z * eye_m - pa);
            residual = (lhs - rhs).norm();
        } else {
            const CMatrix lam = cmat::kron(lambda_embed_herm(pen, opts.lambda, opts.epsilon), eye_m);
            CMatrix herm = CMatrix::Zero(2 * m, 2 * m);
            herm.block(0, m, m, m) = pa;
            herm.block(m, 0, m, m) = pa.adjoint();
            CMatrix lam_small(2 * m, 2 * m);
            lam_small.setZero();
            lam_small.block(0, 0, m, m) = Complex(0.0, opts.epsilon) * eye_m;
            lam_small.block(m, m, m, m) = Complex(0.0, opts.epsilon) * eye_m;
            lam_small.block(0, m, m, m) = opts.lambda * eye_m;
            lam_small.block(m, 0, m, m) = std::conj(opts.lambda) * eye_m;
            const CMatrix lhs = cmat::inv(lam - big).topLeftCorner(2 * m, 2 * m);
            const CMatrix rhs = cmat::inv(lam_small - herm);
            residual = (lhs - rhs).norm();
        }
        rep.max_residual = std::max(rep.max_residual, residual);
    }
    rep.pass = rep.max_residual <= 1e-8;
    return rep;
}

// ---------------------------------------------------------------------------
// Plain-text serialization: dimension and corner, then the constant and
// per-variable coefficient matrices as rows of "re,im" entries.
// ---------------------------------------------------------------------------

inline std::string write_pencil(const LinearPencil& pen) {
    std::ostringstream os;
    os.precision(17);
    auto matrix = [&](const CMatrix& m) {
        for (int i = 0; i < pen.dim; ++i) {
            for (int j = 0; j < pen.dim; ++j) {
                if (j) os << ' ';
                // + 0.0 normalizes negative zero
                os << (m(i, j).real() + 0.0) << ',' << (m(i, j).imag() + 0.0);
            }
            os << '\n';
        }
    };
    os << "pencil " << pen.dim << ' ' << pen.corner << '\n';
    os << "constant\n";
    matrix(pen.constant);
    for (std::size_t j = 0; j < pen.vars.size(); ++j) {
        os << "var " << pen.vars[j] << '\n';
        matrix(pen.coeffs[j]);
    }
    return os.str();
}

inline LinearPencil read_pencil(std::istream& in) {
    LinearPencil pen;
    std::string tag;
    if (!(in >> tag) || tag != "pencil")
        throw ParseError("pencil file: expected 'pencil <dim> <corner>' header");
    if (!(in >> pen.dim >> pen.corner) || pen.dim < 1)
        throw ParseError("pencil file: bad dimension/corner");
    auto matrix = [&](CMatrix& m) {
        m.resize(pen.dim, pen.dim);
        for (int i = 0; i < pen.dim; ++i)
            for (int j = 0; j < pen.dim; ++j) {
                std::string cell;
                if (!(in >> cell)) throw ParseError("pencil file: truncated matrix");
                const std::size_t comma = cell.find(',');
                if (comma == std::string::npos)
                    throw ParseError("pencil file: entry is not 're,im'");
                try {
                    m(i, j) = Complex(std::stod(cell.substr(0, comma)),
                                      std::stod(cell.substr(comma + 1)));
                } catch (const std::exception&) {
                    throw ParseError("pencil file: malformed number '" + cell + "'");
                }
            }
    };
    if (!(in >> tag) || tag != "constant") throw ParseError("pencil file: expected 'constant'");
    matrix(pen.constant);
    while (in >> tag) {
        if (tag != "var") throw ParseError("pencil file: expected 'var <name>'");
        std::string name;
        if (!(in >> name)) throw ParseError("pencil file: missing variable name");
        pen.vars.push_back(name);
        pen.coeffs.emplace_back();
        matrix(pen.coeffs.back());
    }
    pen.validate();
    return pen;
}

inline LinearPencil read_pencil_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("pencil file: cannot open '" + path + "'");
    return read_pencil(in);
}

} // namespace linpen
} // namespace freeconv
