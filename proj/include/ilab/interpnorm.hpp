#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "couples.hpp"
#include "quad.hpp"
#include "solver.hpp"
#include "svfun.hpp"
#include "weights.hpp"

namespace ilab {

enum class NormKind { K, J };
enum class Range { full, unit_head, unit_tail };

inline std::pair<double, double> range_bounds(Range r) {
    switch (r) {
        case Range::unit_head: return {0.0, 1.0};
        case Range::unit_tail: return {1.0, kInf};
        default: return {0.0, kInf};
    }
}

inline Range parse_range(const std::string& s) {
    if (s == "full") return Range::full;
    if (s == "head" || s == "unit_head") return Range::unit_head;
    if (s == "tail" || s == "unit_tail") return Range::unit_tail;
    throw ParseError("unknown range '" + s + "'", 0);
}

inline NormKind parse_norm_kind(const std::string& s) {
    if (s == "K") return NormKind::K;
    if (s == "J") return NormKind::J;
    throw ParseError("unknown norm kind '" + s + "'", 0);
}

struct InterpParams {
    double theta = 0.0;
    double q = 1.0;
    SlowVaryingFn v = SlowVaryingFn::constant(1.0);
    NormKind kind = NormKind::K;
    Range range = Range::full;
};

namespace detail {

inline void check_theta_q(double theta, double q) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
    require_exponent(q);
}

inline constexpr std::array<double, 8> kGlNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                   -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                   0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGlWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                     0.2223810344533745, 0.1012285362903763};

/// int_{u_lo}^{u_hi} exp(q (alpha u + log v(e^u))) du (infinite when divergent).
inline double log_weight_integral(double alpha, double q, const SlowVaryingFn& v, double u_lo, double u_hi,
                                  double tol = 1e-13) {
    if (!(u_hi > u_lo)) return 0.0;
    Profile ph = lq_profile(-alpha, q, v, Evaluable::one(), Side::head);
    Profile pt = lq_profile(-alpha, q, v, Evaluable::one(), Side::tail);
    auto f = [&](double u) { return std::exp(q * (alpha * u + v.log_eval_u(u))); };
    QuadOptions opt;
    opt.abs_tol = tol;
    opt.rel_tol = 1e-12;
    auto r = integrate_u(f, u_lo, u_hi, &ph, &pt, opt);
    if (r.divergence_side != Side::none) return kInf;
    return r.value;
}

/// sup over [u_lo, u_hi] of exp(alpha u + log v(e^u)).
inline double log_weight_sup(double alpha, const SlowVaryingFn& v, double u_lo, double u_hi) {
    if (!(u_hi > u_lo)) return 0.0;
    Profile ph = lq_profile(-alpha, 1.0, v, Evaluable::one(), Side::head);
    Profile pt = lq_profile(-alpha, 1.0, v, Evaluable::one(), Side::tail);
    return sup_log([&](double u) { return alpha * u + v.log_eval_u(u); }, u_lo, u_hi, &ph, &pt);
}

/// Kinks of K(., t) in u = log t when both legs are of weighted-l1 type.
inline std::vector<double> box_kinks(const LegPair& legs) {
    std::vector<double> k;
    auto a = as_box(*legs.leg0), b = as_box(*legs.leg1);
    if (a && b)
        for (std::size_t i = 0; i < a->size(); ++i) k.push_back(std::log((*a)[i] / (*b)[i]));
    return k;
}

/// Sorted cut points of [lo, hi]: the ends, 0, and the given kinks inside.
inline std::vector<double> cut_points(double lo, double hi, const std::vector<double>& kinks) {
    std::vector<double> pts{lo, hi};
    if (lo < 0.0 && 0.0 < hi) pts.push_back(0.0);
    for (double k : kinks)
        if (k > lo && k < hi) pts.push_back(k);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace detail

/// Finitely supported sequence {alpha_m}, m = m_lo .. m_lo + size - 1, with its lambda_{theta,q,w} context.
struct LambdaSeq {
    int m_lo = 0;
    Vec values;
    double theta = 0.0, q = 1.0;
    SlowVaryingFn w = SlowVaryingFn::constant(1.0);
};

/// (sum_m (2^{-m theta} w(2^m) |alpha_m|)^q)^{1/q}, sup for q = inf.
inline double lambda_norm(const LambdaSeq& s) {
    require_exponent(s.q);
    std::vector<double> logs;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        double a = std::fabs(s.values[k]);
        if (a == 0.0) continue;
        const double u = (s.m_lo + static_cast<int>(k)) * kLn2;
        logs.push_back(-s.theta * u + s.w.log_eval_u(u) + std::log(a));
    }
    if (logs.empty()) return 0.0;
    double mx = *std::max_element(logs.begin(), logs.end());
    if (std::isinf(s.q)) return std::exp(mx);
    double sum = 0.0;
    for (double l : logs) sum += std::exp(s.q * (l - mx));
    return std::exp(mx) * std::pow(sum, 1.0 / s.q);
}

/// Interpolation K-norm of a couple evaluated at fixed nodes:
///   (sum_k c_k K(f, t_k)^q + h norm1(f)^q + r norm0(f)^q)^{1/q}   (max of the terms for q = inf),
/// where the head and tail scalars carry the parts of the t-axis on which K(f, t) is exactly
/// t norm1(f) or norm0(f). Built either from Gauss-Legendre panels (continuous norm) or from
/// dyadic points (discrete norm).
class NodeKNorm {
public:
    /// || t^{-theta-1/q} v(t) K(f, t) ||_{q, range}.
    static NodeKNorm continuous(const LegPair& legs, double theta, double q, const SlowVaryingFn& v,
                                Range range = Range::full, double panel = 0.25) {
        detail::check_theta_q(theta, q);
        NodeKNorm k(legs, q);
        auto [c, d] = range_bounds(range);
        const double ra = range_to_u(c), rb = range_to_u(d);
        const double ul = std::log(legs.r_lo), uh = std::log(legs.r_hi);
        const bool inf_q = std::isinf(q);
        // head: K = t norm1
        double hb = std::min(rb, ul);
        if (ra < hb) k.head_ = inf_q ? detail::log_weight_sup(1.0 - theta, v, ra, hb) : detail::log_weight_integral(1.0 - theta, q, v, ra, hb);
        double ta = std::max(ra, uh);
        if (ta < rb) k.tail_ = inf_q ? detail::log_weight_sup(-theta, v, ta, rb) : detail::log_weight_integral(-theta, q, v, ta, rb);
        if (!std::isfinite(k.head_) || !std::isfinite(k.tail_))
            throw AdmissibilityError("304", std::string("K-norm diverges at the ") + (std::isfinite(k.head_) ? "tail" : "head"));
        double ma = std::max(ra, ul), mb = std::min(rb, uh);
        if (ma < mb) {
            auto pts = detail::cut_points(ma, mb, detail::box_kinks(legs));
            for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
                int np = std::max(1, static_cast<int>(std::ceil((pts[s + 1] - pts[s]) / panel)));
                double h = (pts[s + 1] - pts[s]) / np;
                for (int p = 0; p < np; ++p) {
                    double a = pts[s] + p * h;
                    for (std::size_t g = 0; g < 8; ++g) {
                        double u = a + 0.5 * h * (1.0 + detail::kGlNodes[g]);
                        double lw = -theta * u + v.log_eval_u(u);
                        k.t_.push_back(std::exp(u));
                        k.coef_.push_back(inf_q ? std::exp(lw) : 0.5 * h * detail::kGlWeights[g] * std::exp(q * lw));
                    }
                }
            }
        }
        k.finish();
        return k;
    }

    /// lambda_{theta,q,v} norm of {K(f, 2^m)}; truncate > 0 keeps only |m| <= truncate. The head range
    /// keeps m <= -1 and the tail range m >= 0 (the cells [2^m, 2^{m+1}] covering (0,1] and [1,inf)).
    static NodeKNorm discrete(const LegPair& legs, double theta, double q, const SlowVaryingFn& v, int truncate = 0,
                              Range range = Range::full) {
        return discrete_between(legs, theta, q, v, range == Range::unit_tail ? 0 : -kNoBound,
                                range == Range::unit_head ? -1 : kNoBound, truncate);
    }

    static constexpr int kNoBound = std::numeric_limits<int>::max() / 4;

    /// Discrete norm over lim_lo <= m <= lim_hi (+-kNoBound: unbounded on that side).
    static NodeKNorm discrete_between(const LegPair& legs, double theta, double q, const SlowVaryingFn& v, int lim_lo,
                                      int lim_hi, int truncate = 0) {
        detail::check_theta_q(theta, q);
        if (lim_lo > lim_hi) throw DomainError("empty index range");
        NodeKNorm k(legs, q);
        const bool inf_q = std::isinf(q);
        auto term = [&](int m) {
            double lw = -theta * m * kLn2 + v.log_eval_u(m * kLn2);
            return inf_q ? std::exp(lw) : std::exp(q * lw);
        };
        const int big = kNoBound;
        int ml, mh;
        if (truncate > 0) {
            ml = std::max(-truncate, lim_lo);
            mh = std::min(truncate, lim_hi);
        } else {
            ml = std::max(static_cast<int>(std::floor(std::log2(legs.r_lo))) - 1, lim_lo);
            mh = std::min(static_cast<int>(std::ceil(std::log2(legs.r_hi))) + 1, lim_hi);
            const int L = 400;
            auto side_sum = [&](int from, int step, double alpha) {
                double s = 0.0;
                for (int j = 0; j < L; ++j) {
                    int m = from + step * j;
                    double lw = alpha * m * kLn2 + v.log_eval_u(m * kLn2);
                    s = inf_q ? std::max(s, std::exp(lw)) : s + std::exp(q * lw);
                }
                // remainder: sum over m beyond by the midpoint integral
                double edge = (from + step * L - 0.5 * step) * kLn2;
                double lo = step < 0 ? -kInf : edge, hi = step < 0 ? edge : kInf;
                double rem = inf_q ? detail::log_weight_sup(alpha, v, lo, hi) : detail::log_weight_integral(alpha, q, v, lo, hi) / kLn2;
                return inf_q ? std::max(s, rem) : s + rem;
            };
            if (lim_lo == -big) k.head_ = side_sum(std::min(ml, mh + 1) - 1, -1, 1.0 - theta);
            if (lim_hi == big) k.tail_ = side_sum(std::max(mh, ml - 1) + 1, 1, -theta);
            if (!std::isfinite(k.head_) || !std::isfinite(k.tail_))
                throw AdmissibilityError("304", std::string("discrete K-norm diverges at the ") + (std::isfinite(k.head_) ? "tail" : "head"));
        }
        for (int m = ml; m <= mh; ++m) {
            k.t_.push_back(std::exp2(m));
            k.coef_.push_back(term(m));
        }
        k.finish();
        return k;
    }

    double operator()(const Vec& y, Vec* grad = nullptr) const {
        const std::size_t n = y.size();
        Vec g0, g1, gk;
        double n0, n1;
        if (box_) {
            n0 = n1 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                n0 += A_[i] * std::fabs(y[i]);
                n1 += B_[i] * std::fabs(y[i]);
            }
        } else {
            n0 = grad ? norm_eval_grad(*legs_.leg0, y, g0) : norm_eval(*legs_.leg0, y);
            n1 = grad ? norm_eval_grad(*legs_.leg1, y, g1) : norm_eval(*legs_.leg1, y);
        }
        auto kval = [&](std::size_t k, Vec* g) {
            if (!box_) return kfun(*legs_.leg0, *legs_.leg1, t_[k], y, g);
            double s = 0.0;
            if (g) g->assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double d = std::min(A_[i], t_[k] * B_[i]);
                s += d * std::fabs(y[i]);
                if (g) (*g)[i] = y[i] > 0 ? d : y[i] < 0 ? -d : 0.0;
            }
            return s;
        };
        auto sgn = [](double x) { return x > 0 ? 1.0 : x < 0 ? -1.0 : 0.0; };
        if (std::isinf(q_)) {
            double best = head_ * n1;
            int arg = -1;
            if (tail_ * n0 > best) best = tail_ * n0, arg = -2;
            for (std::size_t k = 0; k < t_.size(); ++k) {
                double v = coef_[k] * kval(k, nullptr);
                if (v > best) best = v, arg = static_cast<int>(k);
            }
            if (grad) {
                grad->assign(n, 0.0);
                if (arg >= 0) {
                    kval(static_cast<std::size_t>(arg), &gk);
                    for (std::size_t i = 0; i < n; ++i) (*grad)[i] = coef_[static_cast<std::size_t>(arg)] * gk[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) {
                        double gi = box_ ? (arg == -1 ? B_[i] : A_[i]) * sgn(y[i]) : (arg == -1 ? g1[i] : g0[i]);
                        (*grad)[i] = (arg == -1 ? head_ : tail_) * gi;
                    }
                }
            }
            return best;
        }
        double s = head_ * std::pow(n1, q_) + tail_ * std::pow(n0, q_);
        Vec acc;
        if (grad) {
            acc.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double d0 = box_ ? A_[i] * sgn(y[i]) : g0[i], d1 = box_ ? B_[i] * sgn(y[i]) : g1[i];
                acc[i] = head_ * q_ * std::pow(n1, q_ - 1.0) * d1 + tail_ * q_ * std::pow(n0, q_ - 1.0) * d0;
            }
        }
        for (std::size_t k = 0; k < t_.size(); ++k) {
            double kv = kval(k, grad ? &gk : nullptr);
            s += coef_[k] * std::pow(kv, q_);
            if (grad && kv > 0)
                for (std::size_t i = 0; i < n; ++i) acc[i] += coef_[k] * q_ * std::pow(kv, q_ - 1.0) * gk[i];
        }
        double val = std::pow(s, 1.0 / q_);
        if (grad) {
            grad->assign(n, 0.0);
            if (s > 0)
                for (std::size_t i = 0; i < n; ++i) (*grad)[i] = acc[i] * std::pow(s, 1.0 / q_ - 1.0) / q_;
        }
        return val;
    }

    NormOracle oracle() const {
        return [self = *this](const Vec& y, Vec* g) { return self(y, g); };
    }

    std::size_t nodes() const { return t_.size(); }
    double head_scalar() const { return head_; }
    double tail_scalar() const { return tail_; }

private:
    LegPair legs_;
    double q_;
    Vec t_, coef_;
    double head_ = 0.0, tail_ = 0.0;
    bool box_ = false;
    Vec A_, B_;

    NodeKNorm(LegPair legs, double q) : legs_(std::move(legs)), q_(q) {}

    void finish() {
        auto a = detail::as_box(*legs_.leg0), b = detail::as_box(*legs_.leg1);
        if (a && b) {
            box_ = true;
            A_ = *a;
            B_ = *b;
        }
    }
};

/// || t^{-theta-1/q} v(t) K(f, t) ||_{q, range} by adaptive quadrature.
inline double k_norm(const FiniteCouple& c, const Vec& f, const InterpParams& p, double tol = 1e-11) {
    detail::check_theta_q(p.theta, p.q);
    detail::check_dim(c, f);
    auto [lo, hi] = range_bounds(p.range);
    auto adm = weighted_Lq_norm(Evaluable::min_one_t(), p.theta, p.q, p.v, lo, hi);
    if (adm.divergence_side != Side::none || !std::isfinite(adm.value))
        throw AdmissibilityError("304", std::string("K-norm diverges at the ") + side_name(adm.divergence_side));
    const double n0 = norm0(c, f), n1 = norm1(c, f);
    if (n0 == 0.0) return 0.0;
    LegPair legs = legs_of(c);
    const double ra = range_to_u(lo), rb = range_to_u(hi);
    const double ul = std::log(legs.r_lo), uh = std::log(legs.r_hi);
    const bool inf_q = std::isinf(p.q);
    double head = 0.0, tail = 0.0, mid = 0.0;
    double hb = std::min(rb, ul), ta = std::max(ra, uh);
    if (ra < hb) head = inf_q ? detail::log_weight_sup(1.0 - p.theta, p.v, ra, hb) * n1 : detail::log_weight_integral(1.0 - p.theta, p.q, p.v, ra, hb) * std::pow(n1, p.q);
    if (ta < rb) tail = inf_q ? detail::log_weight_sup(-p.theta, p.v, ta, rb) * n0 : detail::log_weight_integral(-p.theta, p.q, p.v, ta, rb) * std::pow(n0, p.q);
    double ma = std::max(ra, ul), mb = std::min(rb, uh);
    if (ma < mb) {
        auto lk = [&](double u) { return -p.theta * u + p.v.log_eval_u(u) + std::log(k_functional(c, f, std::exp(u))); };
        if (inf_q) {
            mid = detail::sup_log(lk, ma, mb, nullptr, nullptr);
        } else {
            QuadOptions opt;
            opt.abs_tol = tol * std::pow(n0, p.q);
            opt.rel_tol = 1e-12;
            opt.max_intervals = 2000;
            auto pts = detail::cut_points(ma, mb, detail::box_kinks(legs));
            for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
                auto r = gk_adaptive([&](double u) { return std::exp(p.q * lk(u)); }, pts[s], pts[s + 1], opt);
                if (!r.converged) throw QuadratureError("K-norm quadrature tolerance not met");
                mid += r.value;
            }
        }
    }
    if (inf_q) return std::max({head, tail, mid});
    return std::pow(head + mid + tail, 1.0 / p.q);
}

/// lambda_{theta,q,v} norm of {K(f, 2^m)} over the m of p.range.
inline double discrete_k_norm(const FiniteCouple& c, const Vec& f, const InterpParams& p) {
    detail::check_dim(c, f);
    return NodeKNorm::discrete(legs_of(c), p.theta, p.q, p.v, 0, p.range)(f);
}

struct MindConstants {
    double k1 = 1.0, k2 = 1.0, c1 = 0.5, c2 = 2.0;
};

/// Constants of the dyadic comparison c1 b(2^m) <= b(t) <= c2 b(2^m) on [2^m, 2^{m+1}]:
/// k1 = sup 2^m b(2^m) / (t b(t)), k2 = sup 2^m b(t) / (t b(2^m)) over the cells, c1 = 1/(2 k1), c2 = 2 k2.
inline MindConstants mind_constants(const SlowVaryingFn& b, double theta = 0.0) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
    MindConstants mc;
    mc.k1 = mc.k2 = 1.0;
    auto cell = [&](double m) {
        const double u0 = m * kLn2, lb0 = b.log_eval_u(u0);
        for (int j = 0; j <= 64; ++j) {
            double u = u0 + kLn2 * j / 64.0, lb = b.log_eval_u(u);
            mc.k1 = std::max(mc.k1, std::exp((u0 + lb0) - (u + lb)));
            mc.k2 = std::max(mc.k2, std::exp((lb - lb0) - (u - u0)));
        }
    };
    for (int m = -200; m < 200; ++m) cell(m);
    for (double m : {1e3, 1e4, 1e5, 1e6}) {
        cell(m);
        cell(-m);
    }
    mc.c1 = 1.0 / (2.0 * mc.k1);
    mc.c2 = 2.0 * mc.k2;
    return mc;
}

struct SandwichResult {
    double continuous = 0.0, discrete = 0.0, ratio = 1.0, lo = 0.0, hi = 0.0;
    bool inside = true;
};

/// k_norm / discrete_k_norm against [c1 2^{-theta} (ln 2)^{1/q}, 2 c2 (ln 2)^{1/q}].
inline SandwichResult kd_sandwich(const FiniteCouple& c, const Vec& f, const InterpParams& p) {
    SandwichResult r;
    auto mc = mind_constants(p.v, p.theta);
    double l = std::isinf(p.q) ? 1.0 : std::pow(kLn2, 1.0 / p.q);
    r.lo = mc.c1 * std::exp2(-p.theta) * l;
    r.hi = 2.0 * mc.c2 * l;
    r.continuous = k_norm(c, f, p);
    r.discrete = discrete_k_norm(c, f, p);
    if (r.discrete == 0.0 && r.continuous == 0.0)
        r.ratio = 1.0;
    else
        r.ratio = r.continuous / r.discrete;
    r.inside = r.ratio >= r.lo && r.ratio <= r.hi;
    return r;
}

/// Blocks u_m, m = -M..M, of a dyadic J-representation (blocks[m + M]).
struct JRepresentation {
    int M = 0;
    std::vector<Vec> blocks;

    Vec sum() const {
        Vec s(blocks.empty() ? 0 : blocks.front().size(), 0.0);
        for (const auto& b : blocks)
            for (std::size_t i = 0; i < s.size(); ++i) s[i] += b[i];
        return s;
    }
};

struct JNormResult {
    double value = 0.0;       // lambda norm of the best representation found
    double dual_bound = 0.0;  // certified lower bound on the truncated minimum
    double gap = 0.0;         // (value - dual_bound) / value
    double band_lo = 0.0, band_hi = 0.0;  // bracket for the continuous J-norm
    JRepresentation rep;
    std::vector<double> restart_values;
};

namespace detail {

inline double j_block_value(const FiniteCouple& c, const Vec& u, double t, Vec* g) {
    Vec g0, g1;
    double n0 = g ? norm_eval_grad(*c.leg0(), u, g0) : norm_eval(*c.leg0(), u);
    double n1 = g ? norm_eval_grad(*c.leg1(), u, g1) : norm_eval(*c.leg1(), u);
    if (n0 >= t * n1) {
        if (g) *g = g0;
        return n0;
    }
    if (g) {
        *g = g1;
        for (auto& x : *g) x *= t;
    }
    return t * n1;
}

}  // namespace detail

/// lambda_{theta,q,a} norm of {J(u_m, 2^m)} for a representation.
inline double j_representation_norm(const FiniteCouple& c, const JRepresentation& r, double theta, double q,
                                    const SlowVaryingFn& a) {
    LambdaSeq s{-r.M, Vec(r.blocks.size()), theta, q, a};
    for (std::size_t k = 0; k < r.blocks.size(); ++k)
        s.values[k] = detail::j_block_value(c, r.blocks[k], std::exp2(static_cast<double>(static_cast<int>(k) - r.M)), nullptr);
    return lambda_norm(s);
}

/// || t^{-theta-1/q} a(t) J(u(t), t) ||_q for the step representation u(t) = u_m / ln 2 on [2^m, 2^{m+1}).
inline double j_continuous_value(const FiniteCouple& c, const JRepresentation& r, double theta, double q,
                                 const SlowVaryingFn& a) {
    double total = 0.0;
    const bool inf_q = std::isinf(q);
    for (std::size_t k = 0; k < r.blocks.size(); ++k) {
        const Vec& u = r.blocks[k];
        double n0 = norm0(c, u) / kLn2, n1 = norm1(c, u) / kLn2;
        if (n0 == 0.0 && n1 == 0.0) continue;
        const double m = static_cast<double>(static_cast<int>(k) - r.M);
        for (int p = 0; p < 4; ++p) {
            double lo = (m + p / 4.0) * kLn2, h = kLn2 / 4.0;
            for (std::size_t g = 0; g < 8; ++g) {
                double uu = lo + 0.5 * h * (1.0 + detail::kGlNodes[g]);
                double val = std::exp(-theta * uu + a.log_eval_u(uu)) * std::max(n0, std::exp(uu) * n1);
                if (inf_q)
                    total = std::max(total, val);
                else
                    total += 0.5 * h * detail::kGlWeights[g] * std::pow(val, q);
            }
        }
    }
    return inf_q ? total : std::pow(total, 1.0 / q);
}

/// Dual of the discrete J-norm (theta, q, a) on c: the discrete K-norm (theta, q', 1/a(1/t)) on the
/// dual couple, block m pairing with term -m. truncate > 0 restricts the blocks to |m| <= truncate;
/// the head range keeps blocks m <= -1 (cells inside (0,1]), the tail range blocks m >= 0.
inline NodeKNorm dual_of_discrete_j(const FiniteCouple& c, double theta, double q, const SlowVaryingFn& a, int truncate = 0,
                                    Range range = Range::full) {
    const int nb = NodeKNorm::kNoBound;
    return NodeKNorm::discrete_between(dual_legs(c), theta, conjugate(q), a.reflect(), range == Range::unit_head ? 1 : -nb,
                                       range == Range::unit_tail ? 0 : nb, truncate);
}

/// Discrete J-norm over all m in Z, computed exactly as the dual of its dual norm.
inline DualNormResult j_norm_exact(const FiniteCouple& c, const Vec& f, const InterpParams& p, const SolverCfg& cfg = {}) {
    detail::check_theta_q(p.theta, p.q);
    detail::check_dim(c, f);
    cond_307(p.theta, p.q, p.v).require();
    return dual_norm(f, dual_of_discrete_j(c, p.theta, p.q, p.v).oracle(), cfg);
}

/// J-norm by minimizing the lambda norm of {J(u_m, 2^m)} over representations f = sum_{|m|<=M} u_m
/// (projected subgradient on the affine subspace, several starts). The dual bound comes from the
/// truncated dual norm; the band brackets the continuous J-norm.
inline JNormResult j_norm(const FiniteCouple& c, const Vec& f, const InterpParams& p, int M = 20, const SolverCfg& cfg = {}) {
    detail::check_theta_q(p.theta, p.q);
    detail::check_dim(c, f);
    if (M < 4) throw DomainError("truncation radius must be at least 4");
    cond_307(p.theta, p.q, p.v).require();
    const std::size_t n = f.size(), B = static_cast<std::size_t>(2 * M + 1);
    JNormResult res;
    res.rep.M = M;
    res.rep.blocks.assign(B, Vec(n, 0.0));
    auto mc = mind_constants(p.v, p.theta);
    double l = std::isinf(p.q) ? 1.0 : std::pow(kLn2, -1.0 + 1.0 / p.q);
    bool zero = std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; });
    if (zero) return res;
    const double scale = norm0(c, f);
    Vec fs = f;
    for (auto& x : fs) x /= scale;

    auto dual = dual_norm(fs, dual_of_discrete_j(c, p.theta, p.q, p.v, M).oracle(), cfg);
    const double target = dual.value;
    std::vector<double> cm(B), tm(B);
    for (std::size_t k = 0; k < B; ++k) {
        double m = static_cast<double>(static_cast<int>(k) - M);
        tm[k] = std::exp2(m);
        cm[k] = std::exp(-p.theta * m * kLn2 + p.v.log_eval_u(m * kLn2));
    }
    auto objective = [&](const std::vector<Vec>& u, std::vector<Vec>* g) {
        Vec s(B);
        std::vector<Vec> gj(B);
        for (std::size_t k = 0; k < B; ++k) s[k] = cm[k] * detail::j_block_value(c, u[k], tm[k], g ? &gj[k] : nullptr);
        double val;
        if (std::isinf(p.q)) {
            std::size_t arg = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
            val = s[arg];
            if (g) {
                g->assign(B, Vec(n, 0.0));
                for (std::size_t i = 0; i < n; ++i) (*g)[arg][i] = cm[arg] * gj[arg][i];
            }
            return val;
        }
        double sum = 0.0;
        for (double x : s) sum += std::pow(x, p.q);
        val = std::pow(sum, 1.0 / p.q);
        if (g) {
            g->assign(B, Vec(n, 0.0));
            if (val > 0)
                for (std::size_t k = 0; k < B; ++k) {
                    double w = std::pow(s[k] / val, p.q - 1.0) * cm[k];
                    for (std::size_t i = 0; i < n; ++i) (*g)[k][i] = w * gj[k][i];
                }
        }
        return val;
    };
    // starting representations
    std::vector<std::vector<Vec>> starts;
    {
        std::vector<Vec> u(B, Vec(n, 0.0));
        u[static_cast<std::size_t>(M)] = fs;
        starts.push_back(u);
        std::size_t best_k = 0;
        double best = kInf;
        for (std::size_t k = 0; k < B; ++k) {
            double v = cm[k] * detail::j_block_value(c, fs, tm[k], nullptr);
            if (v < best) best = v, best_k = k;
        }
        std::vector<Vec> w(B, Vec(n, 0.0));
        w[best_k] = fs;
        starts.push_back(w);
        // each coordinate placed in its own cheapest block
        std::vector<Vec> z(B, Vec(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            Vec e(n, 0.0);
            e[i] = fs[i];
            std::size_t bk = 0;
            double bv = kInf;
            for (std::size_t k = 0; k < B; ++k) {
                double v = cm[k] * detail::j_block_value(c, e, tm[k], nullptr);
                if (v < bv) bv = v, bk = k;
            }
            z[bk][i] += fs[i];
        }
        starts.push_back(z);
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        for (int r = 3; r < cfg.restarts; ++r) {
            std::vector<Vec> x(B, Vec(n, 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                Vec wts(B);
                double tot = 0.0;
                for (auto& x2 : wts) tot += x2 = std::pow(ud(rng), 4.0);
                for (std::size_t k = 0; k < B; ++k) x[k][i] = fs[i] * wts[k] / tot;
            }
            starts.push_back(x);
        }
    }
    // iterate in z_m = s_m u_m, s_m the cost of block m at f, so that all blocks move at comparable rates
    Vec sc(B);
    double inv2 = 0.0;
    for (std::size_t k = 0; k < B; ++k) {
        sc[k] = cm[k] * detail::j_block_value(c, fs, tm[k], nullptr);
        inv2 += 1.0 / (sc[k] * sc[k]);
    }
    std::vector<Vec> best_u;
    double best_val = kInf;
    std::vector<Vec> g;
    const int iters = std::max(cfg.max_iter, 20000);
    for (auto& u : starts) {
        double run_best = objective(u, nullptr);
        std::vector<Vec> run_u = u;
        for (int it = 0; it < iters; ++it) {
            double v = objective(u, &g);
            if (v < run_best) run_best = v, run_u = u;
            if (v - target <= cfg.rel_tol * v) break;
            // d_m = g_m / s_m projected onto sum_m d_m / s_m = 0
            Vec w(n, 0.0);
            for (std::size_t k = 0; k < B; ++k)
                for (std::size_t i = 0; i < n; ++i) {
                    g[k][i] /= sc[k];
                    w[i] += g[k][i] / sc[k];
                }
            double gg = 0.0;
            for (std::size_t k = 0; k < B; ++k)
                for (std::size_t i = 0; i < n; ++i) {
                    g[k][i] -= w[i] / (inv2 * sc[k]);
                    gg += g[k][i] * g[k][i];
                }
            if (gg <= 1e-300) break;
            double step = (v - target) / gg;
            for (std::size_t k = 0; k < B; ++k)
                for (std::size_t i = 0; i < n; ++i) u[k][i] -= step * g[k][i] / sc[k];
            if (it % 5000 == 4999) u = run_u;
        }
        res.restart_values.push_back(run_best * scale);
        if (run_best < best_val) best_val = run_best, best_u = run_u;
    }
    double lo = *std::min_element(res.restart_values.begin(), res.restart_values.end());
    double hi = *std::max_element(res.restart_values.begin(), res.restart_values.end());
    if (hi > lo * (1.0 + cfg.disagreement))
        throw SolverError("J-norm restarts disagree: " + std::to_string(lo) + " vs " + std::to_string(hi));
    res.value = best_val * scale;
    res.dual_bound = target * scale;
    res.gap = (res.value - res.dual_bound) / res.value;
    for (auto& b : best_u)
        for (auto& x : b) x *= scale;
    res.rep.blocks = best_u;
    res.band_lo = mc.c1 * std::exp2(-p.theta) * l * res.value;
    res.band_hi = 2.0 * mc.c2 * l * res.value;
    return res;
}

struct JdCharaResult {
    bool converges = false;
    bool cond307 = false;
    bool agree = false;
    std::vector<double> partial;  // truncated norms at M, 2M, 4M
};

/// Whether {min(1, 2^m)} lies in lambda_{1-theta, q', a^{-1}}, compared with cond_307(theta, q, a).
inline JdCharaResult check_jdchara(double theta, double q, const SlowVaryingFn& a, int M = 20) {
    detail::check_theta_q(theta, q);
    JdCharaResult r;
    const double qp = conjugate(q);
    SlowVaryingFn ainv = a.pow(-1.0);
    auto decide = [&](Side side) {
        Profile pr = detail::lq_profile(1.0 - theta, std::isinf(qp) ? 1.0 : qp, ainv, Evaluable::min_one_t(), side);
        return std::isinf(qp) ? pr.growth_sign() <= 0 : pr.integrable();
    };
    r.converges = decide(Side::head) && decide(Side::tail);
    for (int k : {M, 2 * M, 4 * M}) {
        LambdaSeq s{-k, Vec(static_cast<std::size_t>(2 * k + 1)), 1.0 - theta, qp, ainv};
        for (int m = -k; m <= k; ++m) s.values[static_cast<std::size_t>(m + k)] = std::min(1.0, std::exp2(m));
        r.partial.push_back(lambda_norm(s));
    }
    r.cond307 = cond_307(theta, q, a).holds;
    r.agree = r.converges == r.cond307;
    return r;
}

}  // namespace ilab
