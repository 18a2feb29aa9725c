#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "common.hpp"
#include "profile.hpp"

namespace ilab {

struct QuadOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    int max_intervals = 400;
};

struct QuadResult {
    double value = 0.0;
    double abs_err_est = 0.0;
    bool converged = true;
    Side divergence_side = Side::none;
};

namespace detail {

inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kGkWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkPiece {
    double a, b, value, err;
    bool operator<(const GkPiece& o) const { return err < o.err; }
};

template <class F>
GkPiece gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double resk = fc * kGkWeights[7];
    double resg = fc * kGaussWeights[3];
    double resabs = std::fabs(resk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        double dx = h * kGkNodes[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        resk += kGkWeights[j] * (f1[j] + f2[j]);
        resabs += kGkWeights[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
        if (j % 2 == 1) resg += kGaussWeights[j / 2] * (f1[j] + f2[j]);
    }
    double mean = 0.5 * resk;
    double resasc = kGkWeights[7] * std::fabs(fc - mean);
    for (int j = 0; j < 7; ++j) resasc += kGkWeights[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));
    double err = std::fabs((resk - resg) * h);
    resasc *= std::fabs(h);
    resabs *= std::fabs(h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    err = std::max(err, 50.0 * 2.220446049250313e-16 * resabs);
    double value = resk * h;
    if (!std::isfinite(value)) throw QuadratureError("non-finite integrand value on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
template <class F>
QuadResult gk_adaptive(F&& f, double a, double b, const QuadOptions& opt = {}) {
    if (a == b) return {};
    std::priority_queue<detail::GkPiece> heap;
    auto first = detail::gk15(f, a, b);
    double total = first.value, err = first.err;
    heap.push(first);
    int count = 1;
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::fabs(total))) {
        if (count >= opt.max_intervals) return {total, err, false, Side::none};
        auto worst = heap.top();
        heap.pop();
        double m = 0.5 * (worst.a + worst.b);
        auto l = detail::gk15(f, worst.a, m);
        auto r = detail::gk15(f, m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        ++count;
        if (count % 64 == 0) {
            // re-sum to limit drift of the running totals
            auto copy = heap;
            total = 0.0;
            err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                err += copy.top().err;
                copy.pop();
            }
        }
    }
    return {total, err, true, Side::none};
}

inline constexpr double kSigmaCut = 200.0;

/// int_lo^hi g(u) du where g may extend to +-inf. The profiles describe g near
/// u -> -inf (head) and u -> +inf (tail) in s = |u|; a divergent end is reported
/// through divergence_side without integrating. Pieces with |u| >= 1 are
/// integrated in sigma = log|u| so slowly varying tails stay cheap; beyond
/// |u| = e^kSigmaCut the remainder comes from the profile.
template <class G>
QuadResult integrate_u(G&& g, double lo, double hi, const Profile* head, const Profile* tail,
                       const QuadOptions& opt = {}) {
    if (lo == hi) return {};
    if (lo > hi) {
        auto r = integrate_u(g, hi, lo, head, tail, opt);
        r.value = -r.value;
        return r;
    }
    if (std::isinf(lo)) {
        if (!head) throw UnsupportedError("infinite head range without an asymptotic profile");
        if (!head->integrable()) return {kInf, 0.0, false, Side::head};
    }
    if (std::isinf(hi)) {
        if (!tail) throw UnsupportedError("infinite tail range without an asymptotic profile");
        if (!tail->integrable()) return {kInf, 0.0, false, Side::tail};
    }
    std::vector<double> pts{lo};
    for (double c : {-1.0, 0.0, 1.0})
        if (c > lo && c < hi) pts.push_back(c);
    pts.push_back(hi);
    QuadResult out;
    QuadOptions seg = opt;
    seg.abs_tol = opt.abs_tol / static_cast<double>(pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i], b = pts[i + 1];
        QuadResult r;
        if (a >= 1.0 || b <= -1.0) {
            const double sgn = a >= 1.0 ? 1.0 : -1.0;
            double s_lo = std::fabs(sgn > 0 ? a : b), s_hi = std::fabs(sgn > 0 ? b : a);
            double sig_lo = std::log(s_lo);
            bool infinite = std::isinf(s_hi);
            double sig_hi = infinite ? std::max(kSigmaCut, sig_lo + 1.0) : std::log(s_hi);
            auto h = [&](double sig) {
                double s = std::exp(sig);
                return g(sgn * s) * s;
            };
            r = gk_adaptive(h, sig_lo, sig_hi, seg);
            if (infinite) {
                const Profile& p = sgn > 0 ? *tail : *head;
                double s_cut = std::exp(sig_hi);
                double gv = g(sgn * s_cut);
                double rem = gv * std::exp(p.log_primitive_factor(s_cut));
                if (std::isfinite(rem)) {
                    r.value += rem;
                    r.abs_err_est += std::fabs(rem) * p.primitive_rel_error(s_cut);
                }
            }
        } else {
            r = gk_adaptive(g, a, b, seg);
        }
        out.value += r.value;
        out.abs_err_est += r.abs_err_est;
        out.converged = out.converged && r.converged;
    }
    return out;
}

}  // namespace ilab
