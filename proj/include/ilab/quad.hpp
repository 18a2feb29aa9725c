#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"
#include "profile.hpp"
#include "quad_core.hpp"
#include "svfun.hpp"

namespace ilab {

/// Nodes t = 2^{m_lo + k * step}, k = 0..(m_hi - m_lo)/step.
struct LogGrid {
    double m_lo = -20, m_hi = 20, step = 1.0;

    LogGrid() = default;
    LogGrid(double lo, double hi, double st) : m_lo(lo), m_hi(hi), step(st) {
        if (!(lo < hi)) throw DomainError("grid needs m_lo < m_hi");
        if (!(st > 0.0 && st <= 1.0)) throw DomainError("grid step must lie in (0,1]");
        if ((hi - lo) / st > 1e6) throw DomainError("grid has more than 1e6 nodes");
    }

    std::size_t size() const { return static_cast<std::size_t>(std::floor((m_hi - m_lo) / step + 1e-9)) + 1; }
    double exponent(std::size_t k) const { return m_lo + step * static_cast<double>(k); }
    double node(std::size_t k) const { return std::exp2(exponent(k)); }
    std::vector<double> nodes() const {
        std::vector<double> out(size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = node(k);
        return out;
    }
};

/// A nonnegative function of t given in u = log t together with its power-law
/// behaviour phi(t) ~ t^head_exp (t -> 0) and ~ t^tail_exp (t -> inf).
struct Evaluable {
    std::function<double(double)> of_u;
    double head_exp = 0.0, tail_exp = 0.0;
    bool zero = false;
    std::function<double(double)> log_of_u;  // optional log phi, exact where phi under- or overflows

    double log_at(double u) const {
        if (log_of_u) return log_of_u(u);
        double p = of_u(u);
        return p > 0.0 ? std::log(p) : -kInf;
    }

    static Evaluable min_one_t() {
        return {[](double u) { return std::exp(std::min(u, 0.0)); }, 1.0, 0.0, false, [](double u) { return std::min(u, 0.0); }};
    }
    static Evaluable min_one_inv_t() {
        return {[](double u) { return std::exp(-std::max(u, 0.0)); }, 0.0, -1.0, false, [](double u) { return -std::max(u, 0.0); }};
    }
    static Evaluable one() {
        return {[](double) { return 1.0; }, 0.0, 0.0, false};
    }
    static Evaluable zero_fn() { return {[](double) { return 0.0; }, 0.0, 0.0, true}; }
};

inline double range_to_u(double t) { return t == 0.0 ? -kInf : std::isinf(t) ? kInf : std::log(t); }

/// int_lo^hi t^{-1} g(t) dt for a slowly varying g; lo = 0 means 0+.
inline QuadResult integral_dt_over_t(const SlowVaryingFn& g, double lo, double hi, double tol = 1e-9) {
    if (!(lo >= 0.0) || !(hi > lo)) throw DomainError("integration range must satisfy 0 <= lo < hi");
    Profile ph = g.profile(Side::head), pt = g.profile(Side::tail);
    auto f = [&](double u) { return g.eval_u(u); };
    QuadOptions opt;
    opt.abs_tol = tol;
    auto r = integrate_u(f, range_to_u(lo), range_to_u(hi), &ph, &pt, opt);
    if (r.divergence_side == Side::none && !r.converged)
        throw QuadratureError("quadrature tolerance not met (error estimate " + std::to_string(r.abs_err_est) + ")");
    return r;
}

namespace detail {

/// Profile of t^{-theta q} (v phi)^q in s = |u| at one side.
inline Profile lq_profile(double theta, double q, const SlowVaryingFn& v, const Evaluable& phi, Side side) {
    Profile p = v.profile(side).pow(q);
    if (side == Side::tail)
        p.rate += q * (phi.tail_exp - theta);
    else
        p.rate += -q * (phi.head_exp - theta);
    return p;
}

inline double golden_max(const std::function<double(double)>& f, double a, double b, int iters = 60) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    return std::max({f1, f2, f(a), f(b)});
}

/// sup over [lo, hi] (possibly infinite) of exp(h(u)), by a grid scan plus golden section.
inline double sup_log(const std::function<double(double)>& h, double lo, double hi, const Profile* head, const Profile* tail) {
    if (std::isinf(lo) && head && head->growth_sign() > 0) return kInf;
    if (std::isinf(hi) && tail && tail->growth_sign() > 0) return kInf;
    const double a = std::isinf(lo) ? std::min(-80.0, hi - 160.0) : lo;
    const double b = std::isinf(hi) ? std::max(80.0, a + 160.0) : hi;
    double best = -kInf, best_u = a;
    const int n = std::clamp(static_cast<int>(std::ceil((b - a) / 0.05)), 2, 200000);
    for (int i = 0; i <= n; ++i) {
        double u = a + (b - a) * i / n;
        double v = h(u);
        if (v > best) {
            best = v;
            best_u = u;
        }
    }
    double du = (b - a) / n;
    double loc = golden_max(h, std::max(a, best_u - du), std::min(b, best_u + du));
    best = std::max(best, loc);
    // far ends: the profile is eventually monotone, so probing far out catches a supremum at infinity
    for (double s : {1e3, 1e6, 1e12}) {
        if (std::isinf(lo) && a - s < a) best = std::max(best, h(a - s));
        if (std::isinf(hi) && b + s > b) best = std::max(best, h(b + s));
    }
    return std::exp(best);
}

}  // namespace detail

/// || t^{-theta-1/q} v(t) phi(t) ||_{q, (c, d)} with measure dt.
inline QuadResult weighted_Lq_norm(const Evaluable& phi, double theta, double q, const SlowVaryingFn& v, double c = 0.0,
                                   double d = kInf, double tol = 1e-9) {
    require_exponent(q);
    if (!(c >= 0.0) || !(d > c)) throw DomainError("range must satisfy 0 <= c < d");
    if (phi.zero) return {};
    Profile ph = detail::lq_profile(theta, std::isinf(q) ? 1.0 : q, v, phi, Side::head);
    Profile pt = detail::lq_profile(theta, std::isinf(q) ? 1.0 : q, v, phi, Side::tail);
    const double lo = range_to_u(c), hi = range_to_u(d);
    if (std::isinf(q)) {
        auto h = [&](double u) {
            double lp = phi.log_at(u);
            if (std::isinf(lp)) return -kInf;
            return -theta * u + v.log_eval_u(u) + lp;
        };
        return {detail::sup_log(h, lo, hi, &ph, &pt), 0.0, true, Side::none};
    }
    auto f = [&](double u) {
        double lp = phi.log_at(u);
        if (std::isinf(lp)) return 0.0;
        return std::exp(q * (-theta * u + v.log_eval_u(u) + lp));
    };
    QuadOptions opt;
    opt.abs_tol = tol;
    auto r = integrate_u(f, lo, hi, &ph, &pt, opt);
    if (r.divergence_side != Side::none) return r;
    if (!r.converged) throw QuadratureError("quadrature tolerance not met");
    r.abs_err_est = r.value > 0 ? r.abs_err_est / (q * std::pow(r.value, 1.0 - 1.0 / q)) : r.abs_err_est;
    r.value = std::pow(r.value, 1.0 / q);
    return r;
}

/// (int_x^inf t^{-1} v^q dt)^{1/q}.
inline double tail_B(const SlowVaryingFn& v, double q, double x) {
    require_exponent(q);
    auto r = integral_dt_over_t(v.pow(q), x, kInf);
    if (r.divergence_side != Side::none) throw DivergenceError(r.divergence_side, "tail integral of v^q");
    return std::pow(r.value, 1.0 / q);
}

/// (int_0^x t^{-1} v^{-q'} dt)^{1/q'}.
inline double head_A(const SlowVaryingFn& v, double qp, double x) {
    require_exponent(qp);
    auto r = integral_dt_over_t(v.pow(-qp), 0.0, x);
    if (r.divergence_side != Side::none) throw DivergenceError(r.divergence_side, "head integral of v^{-q'}");
    return std::pow(r.value, 1.0 / qp);
}

struct RatioBand {
    double min = kInf, max = 0.0;
};

/// min/max over the grid of || tau^{alpha-1/q} b(tau) ||_{q,(0,t)} / (t^alpha b(t)).
inline RatioBand check_lemma21iii(const SlowVaryingFn& b, double alpha, double q, const LogGrid& grid) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    require_exponent(q);
    RatioBand band;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double u = std::log(grid.node(k));
        const double lb = b.log_eval_u(u);
        double ratio;
        if (std::isinf(q)) {
            auto h = [&](double r) { return alpha * r + b.log_eval_u(u + r) - lb; };
            Profile ph = b.profile(Side::head);
            ph.rate = -alpha;
            ratio = detail::sup_log(h, -kInf, 0.0, &ph, nullptr);
        } else {
            auto f = [&](double r) { return std::exp(q * (alpha * r + b.log_eval_u(u + r) - lb)); };
            Profile ph = b.profile(Side::head).pow(q);
            ph.rate = -alpha * q;
            QuadOptions opt;
            opt.abs_tol = 1e-13;
            auto res = integrate_u(f, -kInf, 0.0, &ph, nullptr, opt);
            ratio = std::pow(res.value, 1.0 / q);
        }
        band.min = std::min(band.min, ratio);
        band.max = std::max(band.max, ratio);
    }
    return band;
}

}  // namespace ilab
