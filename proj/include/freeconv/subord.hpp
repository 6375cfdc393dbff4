#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"
#include "freeconv/laws.hpp"
#include "freeconv/linpen.hpp"

namespace freeconv {
namespace subord {

struct FixedPointOptions {
    double tol = 1e-11;        // relative Frobenius on the fixed-point residual
    int max_iter = 100000;
    double damping = 0.0;      // w <- (1-damping) f(w) + damping w
    double quad_tol = 1e-10;   // law quadrature tolerance
    bool accelerate = true;    // safeguarded geometric extrapolation
};

/// Operator-valued Cauchy transform evaluator on H+.
using Transform = std::function<CMatrix(const CMatrix&)>;

struct FreeAddResult {
    CMatrix omega;   // subordination point fed to the first transform
    CMatrix g;       // G_{x+y}(b) = G_x(omega)
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

inline void require_uhp(const CMatrix& m, const char* what) {
    const auto rep = cmat::uhp_check(m);
    if (!rep.in_upper)
        throw NumericError(std::string(what) +
                           ": matrix left the upper half-plane (margin " +
                           std::to_string(rep.min_imag_eig) + ")");
}

} // namespace detail

/// Fixed point of f_b(w) = h_y(h_x(w) + b) + b, iterated from w0 = b
/// (or a caller-provided start). Every iterate is checked to stay in
/// H+; the returned omega satisfies ||f_b(omega) - omega||_F <=
/// tol * max(1, ||omega||_F).
inline FreeAddResult free_add(const Transform& gx, const Transform& gy, const CMatrix& b,
                              const FixedPointOptions& opts = {},
                              const CMatrix* initial = nullptr) {
    detail::require_uhp(b, "free_add: argument");

    auto h_of = [](const Transform& g, const CMatrix& w) -> CMatrix {
        return cmat::inv(g(w)) - w;
    };
    auto f = [&](const CMatrix& w) -> CMatrix {
        return h_of(gy, h_of(gx, w) + b) + b;
    };

    CMatrix w = b;
    if (initial != nullptr && initial->rows() == b.rows() &&
        cmat::uhp_check(*initial).in_upper)
        w = *initial;

    double prev_step = -1.0;
    FreeAddResult out;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        CMatrix fw = f(w);
        detail::require_uhp(fw, "free_add: iterate");
        const double step = (fw - w).norm();
        const double scale = std::max(1.0, fw.norm());
        if (step <= opts.tol * scale) {
            out.omega = std::move(fw);
            out.iterations = iter;
            out.residual = step;
            out.g = gx(out.omega);
            return out;
        }
        // Geometric extrapolation: when steps shrink at a steady ratio,
        // jump to the projected limit if that actually helps.
        if (opts.accelerate && prev_step > 0.0 && iter % 8 == 0) {
            const double rho = step / prev_step;
            if (rho > 0.2 && rho < 0.999) {
                CMatrix candidate = fw + (rho / (1.0 - rho)) * (fw - w);
                if (cmat::uhp_check(candidate).in_upper) {
                    CMatrix fc = f(candidate);
                    if (cmat::uhp_check(fc).in_upper &&
                        (fc - candidate).norm() < step) {
                        w = std::move(fc);
                        prev_step = -1.0;
                        continue;
                    }
                }
            }
        }
        prev_step = step;
        if (opts.damping > 0.0)
            w = (1.0 - opts.damping) * fw + opts.damping * w;
        else
            w = std::move(fw);
    }
    const double last = (f(w) - w).norm();
    throw NumericError("free_add: max_iter exceeded, last residual " + std::to_string(last));
}

namespace detail {

struct Summand {
    laws::ScalarLaw law;
    CMatrix coeff;
};

/// Evaluator for the Cauchy transform of summands[i] + ... + summands[k-1],
/// folded two at a time. Each node keeps its last subordination point as
/// the next warm start, which collapses the cost of nested fixed points.
struct TailEvaluator {
    Summand head;
    std::unique_ptr<TailEvaluator> rest;
    std::optional<CMatrix> last_omega;

    CMatrix g(const CMatrix& w, const FixedPointOptions& opts) {
        if (!rest) return laws::ov_cauchy(head.law, head.coeff, w, opts.quad_tol);
        Transform gx = [this, &opts](const CMatrix& u) {
            return laws::ov_cauchy(head.law, head.coeff, u, opts.quad_tol);
        };
        Transform gy = [this, &opts](const CMatrix& u) { return rest->g(u, opts); };
        FreeAddResult r = free_add(gx, gy, w, opts,
                                   last_omega ? &*last_omega : nullptr);
        last_omega = r.omega;
        return r.g;
    }
};

inline std::unique_ptr<TailEvaluator> build_chain(std::vector<Summand> summands) {
    std::unique_ptr<TailEvaluator> chain;
    for (std::size_t i = summands.size(); i-- > 0;) {
        auto node = std::make_unique<TailEvaluator>();
        node->head = std::move(summands[i]);
        node->rest = std::move(chain);
        chain = std::move(node);
    }
    return chain;
}

} // namespace detail

/// G of the pencil's variable part at b - constant, computed by a
/// left fold of two-summand free additive convolutions.
inline CMatrix pencil_cauchy(const linpen::LinearPencil& pen,
                             const std::map<std::string, laws::ScalarLaw>& law_map,
                             const CMatrix& b, const FixedPointOptions& opts = {},
                             const std::vector<int>* fold_order = nullptr) {
    if (b.rows() != pen.dim || b.cols() != pen.dim)
        throw DomainError("pencil_cauchy: argument dimension mismatch");
    detail::require_uhp(b, "pencil_cauchy: argument");
    const CMatrix shifted = b - pen.constant;
    detail::require_uhp(shifted, "pencil_cauchy: argument minus pencil constant");

    std::vector<int> order;
    if (fold_order != nullptr) {
        order = *fold_order;
        if (order.size() != pen.vars.size())
            throw DomainError("pencil_cauchy: fold order has wrong length");
    } else {
        for (std::size_t j = 0; j < pen.vars.size(); ++j) order.push_back(static_cast<int>(j));
    }

    std::vector<detail::Summand> summands;
    for (int j : order) {
        const auto idx = static_cast<std::size_t>(j);
        if (idx >= pen.vars.size()) throw DomainError("pencil_cauchy: fold order out of range");
        if (pen.coeffs[idx].norm() == 0.0) continue;
        const auto it = law_map.find(pen.vars[idx]);
        if (it == law_map.end())
            throw DomainError("pencil_cauchy: no law for variable '" + pen.vars[idx] + "'");
        summands.push_back({it->second, pen.coeffs[idx]});
    }

    if (summands.empty()) return cmat::inv(shifted);
    if (summands.size() == 1)
        return laws::ov_cauchy(summands[0].law, summands[0].coeff, shifted, opts.quad_tol);
    auto chain = detail::build_chain(std::move(summands));
    return chain->g(shifted, opts);
}

/// phi((z - p)^{-1}) as the corner entry of G at the embedded argument
/// (corner r=1 pencils).
inline Complex scalar_cauchy(const linpen::LinearPencil& pen,
                             const std::map<std::string, laws::ScalarLaw>& law_map, Complex z,
                             const FixedPointOptions& opts = {},
                             const std::vector<int>* fold_order = nullptr) {
    if (!(z.imag() > 0.0)) throw DomainError("scalar_cauchy: Im z must be positive");
    const double delta = pen.dim > 1 ? linpen::default_delta(std::abs(z)) : 0.0;
    const CMatrix b = linpen::lambda_embed(pen, z, delta);
    return pencil_cauchy(pen, law_map, b, opts, fold_order)(0, 0);
}

inline Complex scalar_cauchy(const ncexpr::NcPolynomial& p,
                             const std::map<std::string, laws::ScalarLaw>& law_map, Complex z,
                             const FixedPointOptions& opts = {}) {
    return scalar_cauchy(linpen::linearize_sa(p), law_map, z, opts);
}

/// Regularized transform G_{eps,p}(lambda) of the hermitized problem:
/// the (2,1) corner entry of G at Lambda_eps (corner r=2 pencils).
inline Complex scalar_cauchy_herm(const linpen::LinearPencil& pen,
                                  const std::map<std::string, laws::ScalarLaw>& law_map,
                                  Complex lambda, double eps,
                                  const FixedPointOptions& opts = {}) {
    if (!(eps > 0.0)) throw DomainError("scalar_cauchy_herm: eps must be positive");
    const double delta = pen.dim > 2 ? linpen::default_delta(std::max(std::abs(lambda), eps)) : 0.0;
    const CMatrix b = linpen::lambda_embed_herm(pen, lambda, eps, delta);
    return pencil_cauchy(pen, law_map, b, opts)(1, 0);
}

} // namespace subord
} // namespace freeconv
