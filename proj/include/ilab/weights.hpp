#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "common.hpp"
#include "quad.hpp"
#include "svfun.hpp"

namespace ilab {

/// Outcome of an admissibility predicate; witness names the deciding side.
struct Condition {
    std::string name;
    bool holds = false;
    std::string witness;
    double value = kInf;

    explicit operator bool() const { return holds; }
    void require() const {
        if (!holds) throw AdmissibilityError(name, witness);
    }
};

namespace detail {

inline std::string integral_witness(const char* what, bool head_fin, bool tail_fin) {
    std::string w = what;
    w += ": head ";
    w += head_fin ? "finite" : "diverges";
    w += ", tail ";
    w += tail_fin ? "finite" : "diverges";
    return w;
}

/// Integrability of t^{-1} g at both ends, and the total integral if finite.
struct SideFiniteness {
    bool head = false, tail = false;
    double total = kInf;
};

inline SideFiniteness side_finiteness(const SlowVaryingFn& g, bool want_total) {
    SideFiniteness s;
    s.head = g.profile(Side::head).integrable();
    s.tail = g.profile(Side::tail).integrable();
    if (want_total && s.head && s.tail) s.total = integral_dt_over_t(g, 0.0, kInf).value;
    return s;
}

}  // namespace detail

/// int_x^inf t^{-1} b^q < inf for all x and int_0^inf t^{-1} b^q = inf.
inline Condition cond_DT0A(const SlowVaryingFn& b, double q) {
    require_exponent(q);
    if (std::isinf(q)) throw DomainError("DT0A needs a finite exponent");
    auto s = detail::side_finiteness(b.pow(q), false);
    return {"DT0A", s.tail && !s.head, detail::integral_witness("int t^-1 b^q", s.head, s.tail), kInf};
}

/// int_0^inf t^{-1} b^q < inf.
inline Condition cond_DT0A1(const SlowVaryingFn& b, double q) {
    require_exponent(q);
    if (std::isinf(q)) throw DomainError("DT0A1 needs a finite exponent");
    auto s = detail::side_finiteness(b.pow(q), true);
    return {"DT0A1", s.head && s.tail, detail::integral_witness("int t^-1 b^q", s.head, s.tail), s.total};
}

/// int_0^x t^{-1} a^{-q'} < inf for all x and int_0^inf t^{-1} a^{-q'} = inf.
inline Condition cond_aJ(const SlowVaryingFn& a, double qp) {
    require_exponent(qp);
    if (std::isinf(qp)) throw DomainError("condition on a^{-q'} needs q' < inf (q > 1)");
    auto s = detail::side_finiteness(a.pow(-qp), false);
    return {"aJ", s.head && !s.tail, detail::integral_witness("int t^-1 a^-q'", s.head, s.tail), kInf};
}

/// int_0^inf t^{-1} a^{-q'} < inf.
inline Condition cond_akon(const SlowVaryingFn& a, double qp) {
    require_exponent(qp);
    if (std::isinf(qp)) throw DomainError("condition on a^{-q'} needs q' < inf (q > 1)");
    auto s = detail::side_finiteness(a.pow(-qp), true);
    return {"akon", s.head && s.tail, detail::integral_witness("int t^-1 a^-q'", s.head, s.tail), s.total};
}

/// || t^{-theta-1/q} v(t) min(1,t) ||_q < inf (nontriviality of the K-space).
inline Condition cond_304(double theta, double q, const SlowVaryingFn& v) {
    auto r = weighted_Lq_norm(Evaluable::min_one_t(), theta, q, v);
    bool ok = r.divergence_side == Side::none && std::isfinite(r.value);
    std::string w = ok ? "norm of t^(-theta) v min(1,t) finite" : std::string("norm diverges at ") + side_name(r.divergence_side);
    return {"304", ok, w, ok ? r.value : kInf};
}

/// || t^{theta-1/q'} v^{-1}(t) min(1,1/t) ||_{q'} < inf (nontriviality of the J-space).
inline Condition cond_307(double theta, double q, const SlowVaryingFn& v) {
    auto r = weighted_Lq_norm(Evaluable::min_one_inv_t(), -theta, conjugate(q), v.pow(-1.0));
    bool ok = r.divergence_side == Side::none && std::isfinite(r.value);
    std::string w = ok ? "norm of t^theta v^-1 min(1,1/t) finite" : std::string("norm diverges at ") + side_name(r.divergence_side);
    return {"307", ok, w, ok ? r.value : kInf};
}

/// a(x) = b(x)^{-q/q'} int_x^inf t^{-1} b^q(t) dt; for q = 1 the prefactor is 1.
inline SlowVaryingFn a_from_b(const SlowVaryingFn& b, double q) {
    cond_DT0A(b, q).require();
    return make_integral_transform({b.pow(-(q - 1.0)), b.pow(q), Side::tail, 1.0,
                                    "a_from_b(" + b.to_string() + "," + detail::fmt(q) + ")"});
}

/// b(x) = a(x)^{-q'/q} (int_0^x t^{-1} a^{-q'}(t) dt)^{-1}, q in (1, inf].
inline SlowVaryingFn b_from_a(const SlowVaryingFn& a, double q) {
    require_exponent(q);
    if (q == 1.0) throw DomainError("b_from_a needs q > 1");
    const double qp = conjugate(q);
    cond_aJ(a, qp).require();
    const double pre = std::isinf(q) ? 0.0 : -qp / q;
    return make_integral_transform({a.pow(pre), a.pow(-qp), Side::head, -1.0,
                                    "b_from_a(" + a.to_string() + "," + detail::fmt(q) + ")"});
}

/// What b_from_a_deriv requires of a(inf).
enum class LimitAtInfinity { any, zero, positive };

/// Checks that a is strictly decreasing with a(0) = inf and the requested behaviour at inf.
inline Condition cond_decreasing(const SlowVaryingFn& a, LimitAtInfinity lim, const std::string& name) {
    Condition c{name, false, "", kInf};
    if (!a.has_derivative()) {
        c.witness = "no closed-form derivative";
        return c;
    }
    for (int i = -1200; i <= 1200; ++i) {
        const double u = 0.05 * i;
        for (bool right : {false, true}) {
            if (u != 0.0 && !right) continue;
            if (!(a.dlog_u(u, right) < 0.0)) {
                c.witness = "not strictly decreasing near x = " + detail::fmt(std::exp(u));
                return c;
            }
        }
    }
    for (Side s : {Side::head, Side::tail})
        if (!a.dlog_profile(s)) {
            c.witness = std::string("constant near ") + side_name(s) + ", not strictly decreasing";
            return c;
        }
    if (a.profile(Side::head).growth_sign() <= 0) {
        c.witness = "a(0) is finite";
        return c;
    }
    const int g = a.profile(Side::tail).growth_sign();
    if (lim == LimitAtInfinity::zero && g >= 0) {
        c.witness = "a(inf) > 0";
        return c;
    }
    if (lim == LimitAtInfinity::positive && g < 0) {
        c.witness = "a(inf) = 0";
        return c;
    }
    c.holds = true;
    c.witness = "strictly decreasing, a(0) = inf";
    return c;
}

/// b(x) = -x a'(x).
inline SlowVaryingFn b_from_a_deriv(const SlowVaryingFn& a, LimitAtInfinity lim = LimitAtInfinity::any) {
    if (!a.has_derivative())
        throw UnsupportedError("no closed-form derivative for " + a.to_string() + "; apply smooth() first");
    cond_decreasing(a, lim, lim == LimitAtInfinity::positive ? "akon.1" : "a-decreasing").require();
    return SlowVaryingFn::from_table(std::make_shared<const NegXDerivativeTable>(a));
}

/// B = beta on (0,1), b on [1,inf). Requires int_0^inf t^{-1} b^q < inf and
/// int_0 t^{-1} beta^q = inf (the part of the beta condition that affects B).
inline SlowVaryingFn glue_tail(const SlowVaryingFn& b, const SlowVaryingFn& beta, double q) {
    cond_DT0A1(b, q).require();
    if (beta.pow(q).profile(Side::head).integrable())
        throw AdmissibilityError("3141", "int_0 t^-1 beta^q is finite");
    return SlowVaryingFn::glued(beta, b, 1.0, true);
}

/// A = a on (0,1], alpha on (1,inf). Requires int_0^inf t^{-1} a^{-q'} < inf and
/// int^inf t^{-1} alpha^{-q'} = inf.
inline SlowVaryingFn glue_head(const SlowVaryingFn& a, const SlowVaryingFn& alpha, double q) {
    require_exponent(q);
    if (q == 1.0) throw DomainError("glue_head needs q > 1");
    const double qp = conjugate(q);
    cond_akon(a, qp).require();
    if (alpha.pow(-qp).profile(Side::tail).integrable())
        throw AdmissibilityError("alfa", "int^inf t^-1 alpha^-q' is finite");
    return SlowVaryingFn::glued(a, alpha, 1.0, false);
}

/// A = a on (0,1], c alpha on (1,inf) with c = a(1)/alpha(1), so A is continuous.
inline SlowVaryingFn glue_head_ac(const SlowVaryingFn& a, const SlowVaryingFn& alpha) {
    cond_decreasing(a, LimitAtInfinity::positive, "akon.1").require();
    cond_decreasing(alpha, LimitAtInfinity::zero, "alfa.1").require();
    const double c = std::exp(a.log_eval_u(0.0, -1) - alpha.log_eval_u(0.0, 1));
    return SlowVaryingFn::glued(a, alpha, c, false);
}

inline SlowVaryingFn A_from_B(const SlowVaryingFn& B, double q) { return a_from_b(B, q); }
inline SlowVaryingFn B_from_A(const SlowVaryingFn& A, double q) { return b_from_a(A, q); }

enum class TransformKind { a_from_b, b_from_a, b_from_a_deriv, glue_tail, glue_head, glue_head_ac, A_from_B, B_from_A };

struct TransformSpec {
    TransformKind kind = TransformKind::a_from_b;
    double q = 2.0;
    SlowVaryingFn source;
    std::optional<SlowVaryingFn> auxiliary;
};

inline TransformKind parse_transform_kind(const std::string& s) {
    if (s == "a-from-b" || s == "a_from_b") return TransformKind::a_from_b;
    if (s == "b-from-a" || s == "b_from_a") return TransformKind::b_from_a;
    if (s == "b-from-a-deriv" || s == "b_from_a_deriv") return TransformKind::b_from_a_deriv;
    if (s == "glue-tail" || s == "glue_tail") return TransformKind::glue_tail;
    if (s == "glue-head" || s == "glue_head") return TransformKind::glue_head;
    if (s == "glue-head-ac" || s == "glue_head_ac") return TransformKind::glue_head_ac;
    if (s == "A-from-B" || s == "A_from_B") return TransformKind::A_from_B;
    if (s == "B-from-A" || s == "B_from_A") return TransformKind::B_from_A;
    throw ParseError("unknown transform '" + s + "'", 0);
}

inline SlowVaryingFn apply_transform(const TransformSpec& t) {
    auto aux = [&]() -> const SlowVaryingFn& {
        if (!t.auxiliary) throw DomainError("this transform needs an auxiliary weight");
        return *t.auxiliary;
    };
    switch (t.kind) {
        case TransformKind::a_from_b:
        case TransformKind::A_from_B: return a_from_b(t.source, t.q);
        case TransformKind::b_from_a:
        case TransformKind::B_from_A: return b_from_a(t.source, t.q);
        case TransformKind::b_from_a_deriv: return b_from_a_deriv(t.source);
        case TransformKind::glue_tail: return glue_tail(t.source, aux(), t.q);
        case TransformKind::glue_head: return glue_head(t.source, aux(), t.q);
        case TransformKind::glue_head_ac: return glue_head_ac(t.source, aux());
    }
    throw UnsupportedError("unknown transform");
}

/// Max relative deviation of (int_0^x a^{-q'})^{1/q'} (int_x^inf b^q)^{1/q} from (1/(q'-1))^{1/q'},
/// with a = a_from_b(b, q), over the grid nodes.
inline double check_identity_103(const SlowVaryingFn& b, double q, const std::vector<double>& xs) {
    if (!(q > 1.0) || std::isinf(q)) throw DomainError("identity needs 1 < q < inf");
    const double qp = conjugate(q);
    const SlowVaryingFn a = a_from_b(b, q);
    const SlowVaryingFn head = a.pow(-qp), tail = b.pow(q);
    const double target = std::pow(1.0 / (qp - 1.0), 1.0 / qp);
    double worst = 0.0;
    for (double x : xs) {
        double h = integral_dt_over_t(head, 0.0, x, 1e-14).value;
        double t = integral_dt_over_t(tail, x, kInf, 1e-14).value;
        double val = std::pow(h, 1.0 / qp) * std::pow(t, 1.0 / q);
        worst = std::max(worst, std::fabs(val / target - 1.0));
    }
    return worst;
}

inline double check_identity_103(const SlowVaryingFn& b, double q, const LogGrid& grid) {
    return check_identity_103(b, q, grid.nodes());
}

/// Companion identity with b = b_from_a(a, q): constant (1/(q-1))^{1/q}.
inline double check_identity_103_star(const SlowVaryingFn& a, double q, const std::vector<double>& xs) {
    if (!(q > 1.0) || std::isinf(q)) throw DomainError("identity needs 1 < q < inf");
    const double qp = conjugate(q);
    const SlowVaryingFn b = b_from_a(a, q);
    const SlowVaryingFn head = a.pow(-qp), tail = b.pow(q);
    const double target = std::pow(1.0 / (q - 1.0), 1.0 / q);
    double worst = 0.0;
    for (double x : xs) {
        double h = integral_dt_over_t(head, 0.0, x, 1e-14).value;
        double t = integral_dt_over_t(tail, x, kInf, 1e-14).value;
        double val = std::pow(h, 1.0 / qp) * std::pow(t, 1.0 / q);
        worst = std::max(worst, std::fabs(val / target - 1.0));
    }
    return worst;
}

inline double check_identity_103_star(const SlowVaryingFn& a, double q, const LogGrid& grid) {
    return check_identity_103_star(a, q, grid.nodes());
}

/// n points log-uniform in [2^m_lo, 2^m_hi], endpoints included.
inline std::vector<double> log_points(double m_lo, double m_hi, std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t k = 0; k < n; ++k) xs[k] = std::exp2(m_lo + (m_hi - m_lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    return xs;
}

}  // namespace ilab
