#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"

namespace freeconv {
namespace ncexpr {

/// One letter of a noncommutative word: a declared variable, possibly
/// adjointed (x' in the input syntax).
struct Letter {
    int var = 0;
    bool star = false;
    friend bool operator==(const Letter&, const Letter&) = default;
    friend auto operator<=>(const Letter&, const Letter&) = default;
};

using Word = std::vector<Letter>;

/// Graded lexicographic order: by length, then letter-wise.
struct WordLess {
    bool operator()(const Word& a, const Word& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

/// Normalized *-polynomial: merged terms keyed by word, zero
/// coefficients dropped, variable order fixed at declaration.
class NcPolynomial {
public:
    NcPolynomial() = default;
    explicit NcPolynomial(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    const std::vector<std::string>& variables() const { return vars_; }
    const std::map<Word, Complex, WordLess>& terms() const { return terms_; }

    int var_index(std::string_view name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return static_cast<int>(i);
        return -1;
    }
    const std::string& var_name(int i) const { return vars_.at(static_cast<std::size_t>(i)); }

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    int degree() const {
        int d = 0;
        for (const auto& [w, c] : terms_) d = std::max<int>(d, static_cast<int>(w.size()));
        return d;
    }

    void add_term(const Complex& coeff, Word word) {
        auto it = terms_.find(word);
        if (it == terms_.end()) {
            if (coeff != 0.0) terms_.emplace(std::move(word), coeff);
            return;
        }
        it->second += coeff;
        if (it->second == 0.0) terms_.erase(it);
    }

    NcPolynomial& operator+=(const NcPolynomial& o) {
        for (const auto& [w, c] : o.terms_) add_term(c, w);
        return *this;
    }
    NcPolynomial& operator-=(const NcPolynomial& o) {
        for (const auto& [w, c] : o.terms_) add_term(-c, w);
        return *this;
    }
    friend NcPolynomial operator+(NcPolynomial a, const NcPolynomial& b) { return a += b; }
    friend NcPolynomial operator-(NcPolynomial a, const NcPolynomial& b) { return a -= b; }

    friend NcPolynomial operator*(const NcPolynomial& a, const NcPolynomial& b) {
        NcPolynomial out(a.vars_);
        for (const auto& [wa, ca] : a.terms_)
            for (const auto& [wb, cb] : b.terms_) {
                Word w = wa;
                w.insert(w.end(), wb.begin(), wb.end());
                out.add_term(ca * cb, std::move(w));
            }
        return out;
    }
    friend NcPolynomial operator*(const Complex& s, NcPolynomial p) {
        NcPolynomial out(p.vars_);
        for (const auto& [w, c] : p.terms_) out.add_term(s * c, w);
        return out;
    }

private:
    std::vector<std::string> vars_;
    std::map<Word, Complex, WordLess> terms_;
};

/// Adjoint: reverses each word, toggles stars, conjugates coefficients.
inline NcPolynomial star(const NcPolynomial& p) {
    NcPolynomial out(p.variables());
    for (const auto& [w, c] : p.terms()) {
        Word rw(w.rbegin(), w.rend());
        for (Letter& l : rw) l.star = !l.star;
        out.add_term(std::conj(c), std::move(rw));
    }
    return out;
}

/// Rewrites x' as x for every letter (declared variables are
/// selfadjoint) and re-merges terms.
inline NcPolynomial canonical_selfadjoint(const NcPolynomial& p) {
    NcPolynomial out(p.variables());
    for (const auto& [w, c] : p.terms()) {
        Word cw = w;
        for (Letter& l : cw) l.star = false;
        out.add_term(c, std::move(cw));
    }
    return out;
}

inline bool approx_equal(const NcPolynomial& a, const NcPolynomial& b, double tol = 1e-12) {
    double scale = 1.0;
    for (const auto& [w, c] : a.terms()) scale = std::max(scale, std::abs(c));
    for (const auto& [w, c] : b.terms()) scale = std::max(scale, std::abs(c));
    NcPolynomial diff = a - b;
    for (const auto& [w, c] : diff.terms())
        if (std::abs(c) > tol * scale) return false;
    return true;
}

/// Checks star(p) == p under the convention x' == x.
inline bool is_selfadjoint(const NcPolynomial& p) {
    const NcPolynomial c = canonical_selfadjoint(p);
    return approx_equal(c, canonical_selfadjoint(star(p)));
}

// ---------------------------------------------------------------------------
// Parser.  Grammar (whitespace insignificant):
//   expr   := ["+"|"-"] term (("+"|"-") term)*
//   term   := factor ("*" factor)*
//   factor := atom ("^" uint)? ("'")?
//   atom   := ident | number | number "i" | "(" expr ")"
// Identifiers: letter then letters/digits/underscore. Numbers accept a
// decimal point and exponent; the i suffix makes an imaginary literal.
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars)
        : text_(text), vars_(vars) {}

    NcPolynomial run() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty input", pos_);
        NcPolynomial p = expr();
        skip_ws();
        if (pos_ < text_.size())
            fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return p;
    }

private:
    std::string_view text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("syntax error at position " + std::to_string(pos_) + ": " + msg, pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NcPolynomial expr() {
        bool negate = false;
        if (eat('-'))
            negate = true;
        else
            eat('+');
        NcPolynomial p = term();
        if (negate) p = Complex(-1.0) * p;
        while (true) {
            if (eat('+'))
                p += term();
            else if (eat('-'))
                p -= term();
            else
                break;
        }
        return p;
    }

    NcPolynomial term() {
        NcPolynomial p = factor();
        while (eat('*')) p = p * factor();
        return p;
    }

    NcPolynomial factor() {
        NcPolynomial p = atom();
        if (eat('^')) {
            skip_ws();
            const std::size_t start = pos_;
            unsigned long k = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                k = k * 10 + static_cast<unsigned long>(text_[pos_] - '0');
                ++pos_;
            }
            if (pos_ == start) fail("expected integer exponent after '^'");
            NcPolynomial pw(vars_);
            pw.add_term(1.0, {});
            for (unsigned long i = 0; i < k; ++i) pw = pw * p;
            p = std::move(pw);
        }
        if (eat('\'')) p = star(p);
        return p;
    }

    NcPolynomial atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NcPolynomial p = expr();
            if (!eat(')')) fail("expected ')'");
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        fail("expected identifier, number or '('");
    }

    NcPolynomial ident() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        int idx = -1;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) idx = static_cast<int>(i);
        if (idx < 0) {
            pos_ = start;
            fail("undeclared identifier '" + name + "'");
        }
        NcPolynomial p(vars_);
        p.add_term(1.0, {Letter{idx, false}});
        return p;
    }

    NcPolynomial number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t q = pos_ + 1;
            if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
            if (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) {
                pos_ = q;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        double value = 0.0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        bool imag = false;
        // 'i' directly after a number is the imaginary suffix, unless it
        // starts a longer identifier.
        if (pos_ < text_.size() && text_[pos_] == 'i') {
            const std::size_t after = pos_ + 1;
            const bool extends = after < text_.size() &&
                                 (std::isalnum(static_cast<unsigned char>(text_[after])) ||
                                  text_[after] == '_');
            if (!extends) {
                imag = true;
                ++pos_;
            }
        }
        NcPolynomial p(vars_);
        p.add_term(imag ? Complex(0.0, value) : Complex(value, 0.0), {});
        return p;
    }
};

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

/// Parses an expression over the declared variables.
inline NcPolynomial parse(std::string_view text, const std::vector<std::string>& declared_vars) {
    return detail::Parser(text, declared_vars).run();
}

/// Canonical text form; parse(print(p)) reproduces p exactly.
inline std::string print(const NcPolynomial& p) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [w, c] : p.terms()) {
        std::string coeff;
        bool negative = false;
        if (c.imag() == 0.0) {
            negative = c.real() < 0.0;
            const double a = std::abs(c.real());
            if (!(a == 1.0 && !w.empty())) coeff = detail::format_double(a);
        } else if (c.real() == 0.0) {
            negative = c.imag() < 0.0;
            coeff = detail::format_double(std::abs(c.imag())) + "i";
        } else {
            std::string im = c.imag() < 0.0
                                 ? " - " + detail::format_double(-c.imag())
                                 : " + " + detail::format_double(c.imag());
            coeff = "(" + detail::format_double(c.real()) + im + "i)";
        }
        if (first) {
            if (negative) out += "-";
            first = false;
        } else {
            out += negative ? " - " : " + ";
        }
        out += coeff;
        if (!w.empty()) {
            if (!coeff.empty()) out += "*";
            bool first_letter = true;
            for (const Letter& l : w) {
                if (!first_letter) out += "*";
                out += p.var_name(l.var);
                if (l.star) out += "'";
                first_letter = false;
            }
        }
    }
    return out;
}

/// Exact noncommutative evaluation; starred letters evaluate to the
/// conjugate transpose of the assigned matrix.
inline CMatrix eval_on_matrices(const NcPolynomial& p,
                                const std::map<std::string, CMatrix>& assignment) {
    Eigen::Index m = -1;
    for (const auto& [name, mat] : assignment) {
        if (mat.rows() != mat.cols())
            throw DomainError("eval_on_matrices: matrix for '" + name + "' not square");
        if (m < 0) m = mat.rows();
        if (mat.rows() != m) throw DomainError("eval_on_matrices: matrix sizes differ");
    }
    std::vector<const CMatrix*> by_var(p.variables().size(), nullptr);
    for (std::size_t i = 0; i < p.variables().size(); ++i) {
        const auto it = assignment.find(p.variables()[i]);
        if (it != assignment.end()) by_var[i] = &it->second;
    }
    for (const auto& [w, c] : p.terms())
        for (const Letter& l : w)
            if (by_var[static_cast<std::size_t>(l.var)] == nullptr)
                throw DomainError("eval_on_matrices: no assignment for '" +
                                  p.var_name(l.var) + "'");
    if (m < 0) throw DomainError("eval_on_matrices: empty assignment, size undetermined");

    CMatrix acc = CMatrix::Zero(m, m);
    for (const auto& [w, c] : p.terms()) {
        CMatrix prod = CMatrix::Identity(m, m);
        for (const Letter& l : w) {
            const CMatrix& a = *by_var[static_cast<std::size_t>(l.var)];
            prod = l.star ? CMatrix(prod * a.adjoint()) : CMatrix(prod * a);
        }
        acc += c * prod;
    }
    return acc;
}

} // namespace ncexpr
} // namespace freeconv
