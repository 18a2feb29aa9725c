#pragma once

#include <algorithm>
#include <charconv>
#include <functional>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "lp.hpp"

namespace ilab {

struct NormExpr;
using NormPtr = std::shared_ptr<const NormExpr>;

/// Polyhedral norm on R^n built from weighted l1 / l-inf norms by max and
/// infimal convolution: infconv(a, b, t)(y) = inf_{y = z + w} a(z) + t b(w).
struct NormExpr {
    enum class Op { wl1, linf, max, infconv };
    Op op = Op::wl1;
    Vec w;
    NormPtr a, b;
    double t = 1.0;

    static NormPtr make_wl1(Vec w) { return std::make_shared<const NormExpr>(NormExpr{Op::wl1, std::move(w), nullptr, nullptr, 1.0}); }
    static NormPtr make_linf(Vec w) { return std::make_shared<const NormExpr>(NormExpr{Op::linf, std::move(w), nullptr, nullptr, 1.0}); }
    static NormPtr make_max(NormPtr a, NormPtr b) { return std::make_shared<const NormExpr>(NormExpr{Op::max, {}, std::move(a), std::move(b), 1.0}); }
    static NormPtr make_infconv(NormPtr a, NormPtr b, double t) {
        return std::make_shared<const NormExpr>(NormExpr{Op::infconv, {}, std::move(a), std::move(b), t});
    }
    std::size_t dim() const { return op == Op::wl1 || op == Op::linf ? w.size() : a->dim(); }
};

namespace detail {

/// Dual unit ball of a K-type norm as a polytope {mu >= 0 : sum_i mu_i / alpha_i <= r}.
struct DualConstraint {
    Vec alpha;
    double r;
};

inline std::optional<Vec> as_box(const NormExpr& e) {
    switch (e.op) {
        case NormExpr::Op::wl1: return e.w;
        case NormExpr::Op::linf:
            if (e.w.size() == 1) return e.w;
            return std::nullopt;
        case NormExpr::Op::max: {
            auto x = as_box(*e.a), y = as_box(*e.b);
            if (!x || !y) return std::nullopt;
            bool xy = true, yx = true;
            for (std::size_t i = 0; i < x->size(); ++i) {
                if ((*x)[i] < (*y)[i]) xy = false;
                if ((*y)[i] < (*x)[i]) yx = false;
            }
            if (xy) return x;
            if (yx) return y;
            return std::nullopt;
        }
        case NormExpr::Op::infconv: {
            auto x = as_box(*e.a), y = as_box(*e.b);
            if (!x || !y) return std::nullopt;
            Vec d(x->size());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::min((*x)[i], e.t * (*y)[i]);
            return d;
        }
    }
    return std::nullopt;
}

inline std::optional<std::vector<DualConstraint>> as_poly(const NormExpr& e) {
    switch (e.op) {
        case NormExpr::Op::linf: return std::vector<DualConstraint>{{e.w, 1.0}};
        case NormExpr::Op::wl1:
            if (e.w.size() == 1) return std::vector<DualConstraint>{{e.w, 1.0}};
            return std::nullopt;
        case NormExpr::Op::max: {
            auto x = as_poly(*e.a), y = as_poly(*e.b);
            if (!x || !y || x->size() != 1 || y->size() != 1) return std::nullopt;
            Vec v(x->front().alpha.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = std::max(x->front().alpha[i] / x->front().r, y->front().alpha[i] / y->front().r);
            return std::vector<DualConstraint>{{v, 1.0}};
        }
        case NormExpr::Op::infconv: {
            auto x = as_poly(*e.a), y = as_poly(*e.b);
            if (!x || !y) return std::nullopt;
            for (auto c : *y) {
                c.r *= e.t;
                x->push_back(c);
            }
            return x;
        }
    }
    return std::nullopt;
}

/// Solves the s x s system in place (row-major); false if singular.
inline bool solve_small(std::vector<double>& A, std::vector<double>& b, std::size_t s) {
    for (std::size_t c = 0; c < s; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < s; ++r)
            if (std::fabs(A[r * s + c]) > std::fabs(A[p * s + c])) p = r;
        if (std::fabs(A[p * s + c]) < 1e-13) return false;
        if (p != c) {
            for (std::size_t j = 0; j < s; ++j) std::swap(A[p * s + j], A[c * s + j]);
            std::swap(b[p], b[c]);
        }
        for (std::size_t r = 0; r < s; ++r) {
            if (r == c) continue;
            double f = A[r * s + c] / A[c * s + c];
            if (f == 0.0) continue;
            for (std::size_t j = c; j < s; ++j) A[r * s + j] -= f * A[c * s + j];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = 0; c < s; ++c) b[c] /= A[c * s + c];
    return true;
}

/// Visits all k-subsets of {0..n-1}.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

/// max <mu, |f|> over the dual polytope, by vertex enumeration; writes the maximizer.
inline double poly_max(const std::vector<DualConstraint>& cons, const Vec& af, Vec* mu_out) {
    const std::size_t n = af.size(), K = cons.size();
    double best = 0.0;
    Vec best_mu(n, 0.0);
    Vec mu(n);
    for (std::size_t s = 1; s <= std::min(n, K); ++s) {
        for_each_subset(n, s, [&](const std::vector<std::size_t>& supp) {
            double upper = 0.0;
            for (auto i : supp) upper += af[i];
            if (upper == 0.0) return;
            for_each_subset(K, s, [&](const std::vector<std::size_t>& tight) {
                std::vector<double> A(s * s), b(s);
                for (std::size_t r = 0; r < s; ++r) {
                    for (std::size_t c = 0; c < s; ++c) A[r * s + c] = 1.0 / cons[tight[r]].alpha[supp[c]];
                    b[r] = cons[tight[r]].r;
                }
                if (!solve_small(A, b, s)) return;
                for (std::size_t c = 0; c < s; ++c)
                    if (b[c] < -1e-14) return;
                std::fill(mu.begin(), mu.end(), 0.0);
                for (std::size_t c = 0; c < s; ++c) mu[supp[c]] = std::max(b[c], 0.0);
                for (const auto& con : cons) {
                    double lhs = 0.0;
                    for (auto i : supp) lhs += mu[i] / con.alpha[i];
                    if (lhs > con.r * (1.0 + 1e-12)) return;
                }
                double val = 0.0;
                for (auto i : supp) val += mu[i] * af[i];
                if (val > best) {
                    best = val;
                    best_mu = mu;
                }
            });
        });
    }
    if (mu_out) *mu_out = best_mu;
    return best;
}

}  // namespace detail

double norm_eval(const NormExpr& e, const Vec& y);

/// Adds constraints forcing scale * ||y||_e <= s.
inline void add_norm_le(LinearProgram& lp, const NormExpr& e, const std::vector<Affine>& y, const Affine& s, double scale) {
    switch (e.op) {
        case NormExpr::Op::wl1: {
            Affine sum;
            for (std::size_t i = 0; i < y.size(); ++i) {
                int a = lp.add_var();
                lp.add_row(Affine::var(a) - y[i], Relation::ge);
                lp.add_row(Affine::var(a) + y[i], Relation::ge);
                sum += Affine::var(a, scale * e.w[i]);
            }
            lp.add_row(sum - s, Relation::le);
            break;
        }
        case NormExpr::Op::linf:
            for (std::size_t i = 0; i < y.size(); ++i) {
                lp.add_row(y[i] * (scale * e.w[i]) - s, Relation::le);
                lp.add_row(y[i] * (-scale * e.w[i]) - s, Relation::le);
            }
            break;
        case NormExpr::Op::max:
            add_norm_le(lp, *e.a, y, s, scale);
            add_norm_le(lp, *e.b, y, s, scale);
            break;
        case NormExpr::Op::infconv: {
            std::vector<Affine> z(y.size()), rest(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                z[i] = lp.add_free_var();
                rest[i] = y[i] - z[i];
            }
            int sa = lp.add_var(), sb = lp.add_var();
            add_norm_le(lp, *e.a, z, Affine::var(sa), 1.0);
            add_norm_le(lp, *e.b, rest, Affine::var(sb), 1.0);
            lp.add_row((Affine::var(sa) + Affine::var(sb, e.t)) * scale - s, Relation::le);
            break;
        }
    }
}

/// Norm value by linear programming (used where no closed form applies).
inline double norm_eval_lp(const NormExpr& e, const Vec& y) {
    LinearProgram lp;
    lp.set_refine(true);
    int s = lp.add_var(1.0);
    std::vector<Affine> ys(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ys[i] = Affine::value(y[i]);
    add_norm_le(lp, e, ys, Affine::var(s), 1.0);
    auto r = lp.solve();
    if (r.status != LinearProgram::Result::Status::optimal) throw SolverError("LP for a polyhedral norm did not reach an optimum");
    return r.value;
}

inline NormPtr dual_norm_expr(const NormPtr& e);

/// K-functional of the couple (a, b) at t: the norm infconv(a, b, t). Closed form for
/// weighted-l1 type legs, vertex enumeration for weighted-l-inf type legs, LP otherwise.
/// If grad is given, a subgradient in y is written (on the LP path from the dual problem).
inline double kfun(const NormExpr& a, const NormExpr& b, double t, const Vec& y, Vec* grad = nullptr) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("K-functional needs a finite t > 0");
    auto ba = detail::as_box(a), bb = detail::as_box(b);
    if (ba && bb) {
        double s = 0.0;
        if (grad) grad->assign(y.size(), 0.0);
        for (std::size_t i = 0; i < y.size(); ++i) {
            double d = std::min((*ba)[i], t * (*bb)[i]);
            s += d * std::fabs(y[i]);
            if (grad) (*grad)[i] = y[i] > 0 ? d : y[i] < 0 ? -d : 0.0;
        }
        return s;
    }
    auto pa = detail::as_poly(a), pb = detail::as_poly(b);
    if (pa && pb) {
        for (auto c : *pb) {
            c.r *= t;
            pa->push_back(c);
        }
        Vec af(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) af[i] = std::fabs(y[i]);
        Vec mu;
        double v = detail::poly_max(*pa, af, grad ? &mu : nullptr);
        if (grad) {
            grad->assign(y.size(), 0.0);
            for (std::size_t i = 0; i < y.size(); ++i) (*grad)[i] = y[i] > 0 ? mu[i] : y[i] < 0 ? -mu[i] : 0.0;
        }
        return v;
    }
    if (grad) {
        // the maximizer of <h, y> over the dual unit ball {||h||_a' <= 1, ||h||_b' <= t} is a subgradient
        auto pa_ = std::shared_ptr<const NormExpr>(&a, [](const NormExpr*) {});
        auto pb_ = std::shared_ptr<const NormExpr>(&b, [](const NormExpr*) {});
        LinearProgram lp;
        lp.set_refine(true);
        std::vector<Affine> h(y.size());
        std::vector<int> hv(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            hv[i] = lp.add_var(-std::fabs(y[i]));
            h[i] = Affine::var(hv[i], y[i] >= 0 ? 1.0 : -1.0);
        }
        add_norm_le(lp, *dual_norm_expr(pa_), h, Affine::value(1.0), 1.0);
        add_norm_le(lp, *dual_norm_expr(pb_), h, Affine::value(t), 1.0);
        auto r = lp.solve();
        if (r.status != LinearProgram::Result::Status::optimal) throw SolverError("LP for a K-functional subgradient failed");
        grad->assign(y.size(), 0.0);
        for (std::size_t i = 0; i < y.size(); ++i) (*grad)[i] = (y[i] >= 0 ? 1.0 : -1.0) * r.x[static_cast<std::size_t>(hv[i])];
        return -r.value;
    }
    NormExpr e{NormExpr::Op::infconv, {}, nullptr, nullptr, t};
    e.a = std::shared_ptr<const NormExpr>(&a, [](const NormExpr*) {});
    e.b = std::shared_ptr<const NormExpr>(&b, [](const NormExpr*) {});
    return norm_eval_lp(e, y);
}

inline double norm_eval(const NormExpr& e, const Vec& y) {
    switch (e.op) {
        case NormExpr::Op::wl1: {
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) s += e.w[i] * std::fabs(y[i]);
            return s;
        }
        case NormExpr::Op::linf: {
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) s = std::max(s, e.w[i] * std::fabs(y[i]));
            return s;
        }
        case NormExpr::Op::max: return std::max(norm_eval(*e.a, y), norm_eval(*e.b, y));
        case NormExpr::Op::infconv: return kfun(*e.a, *e.b, e.t, y);
    }
    return 0.0;
}

/// Norm value with a subgradient.
inline double norm_eval_grad(const NormExpr& e, const Vec& y, Vec& g) {
    switch (e.op) {
        case NormExpr::Op::wl1: {
            g.assign(y.size(), 0.0);
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                s += e.w[i] * std::fabs(y[i]);
                g[i] = y[i] > 0 ? e.w[i] : y[i] < 0 ? -e.w[i] : 0.0;
            }
            return s;
        }
        case NormExpr::Op::linf: {
            g.assign(y.size(), 0.0);
            double s = 0.0;
            std::size_t arg = 0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                double v = e.w[i] * std::fabs(y[i]);
                if (v > s) {
                    s = v;
                    arg = i;
                }
            }
            if (s > 0) g[arg] = y[arg] > 0 ? e.w[arg] : -e.w[arg];
            return s;
        }
        case NormExpr::Op::max: {
            Vec gb;
            double va = norm_eval_grad(*e.a, y, g), vb = norm_eval_grad(*e.b, y, gb);
            if (vb > va) {
                g = std::move(gb);
                return vb;
            }
            return va;
        }
        case NormExpr::Op::infconv: return kfun(*e.a, *e.b, e.t, y, &g);
    }
    return 0.0;
}

/// c * norm.
inline NormPtr scale_norm(const NormPtr& e, double c) {
    switch (e->op) {
        case NormExpr::Op::wl1:
        case NormExpr::Op::linf: {
            Vec w = e->w;
            for (auto& x : w) x *= c;
            return e->op == NormExpr::Op::wl1 ? NormExpr::make_wl1(std::move(w)) : NormExpr::make_linf(std::move(w));
        }
        case NormExpr::Op::max: return NormExpr::make_max(scale_norm(e->a, c), scale_norm(e->b, c));
        case NormExpr::Op::infconv: return NormExpr::make_infconv(scale_norm(e->a, c), scale_norm(e->b, c), e->t);
    }
    return e;
}

/// Dual norm under the pairing <g, f> = sum g_i f_i.
inline NormPtr dual_norm_expr(const NormPtr& e) {
    switch (e->op) {
        case NormExpr::Op::wl1:
        case NormExpr::Op::linf: {
            Vec w(e->w.size());
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / e->w[i];
            return e->op == NormExpr::Op::wl1 ? NormExpr::make_linf(std::move(w)) : NormExpr::make_wl1(std::move(w));
        }
        case NormExpr::Op::max: return NormExpr::make_infconv(dual_norm_expr(e->a), dual_norm_expr(e->b), 1.0);
        case NormExpr::Op::infconv: return NormExpr::make_max(dual_norm_expr(e->a), scale_norm(dual_norm_expr(e->b), 1.0 / e->t));
    }
    return e;
}

/// Finite-dimensional compatible couple (X0, X1) on R^n.
class FiniteCouple {
public:
    enum class Kind { weighted_l1, weighted_linf, sum, intersection, swapped };

    static FiniteCouple weighted_l1(Vec w0, Vec w1) { return leaf(Kind::weighted_l1, std::move(w0), std::move(w1)); }
    static FiniteCouple weighted_linf(Vec v0, Vec v1) { return leaf(Kind::weighted_linf, std::move(v0), std::move(v1)); }

    /// (X0, X0 + X1) with the second norm K(., 1).
    static FiniteCouple sum(const FiniteCouple& base) {
        return node(Kind::sum, base, base.leg0_, NormExpr::make_infconv(base.leg0_, base.leg1_, 1.0));
    }
    /// (X0, X0 cap X1) with the second norm J(., 1).
    static FiniteCouple intersection(const FiniteCouple& base) {
        return node(Kind::intersection, base, base.leg0_, NormExpr::make_max(base.leg0_, base.leg1_));
    }
    /// (X1, X0).
    static FiniteCouple swapped(const FiniteCouple& base) { return node(Kind::swapped, base, base.leg1_, base.leg0_); }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return leg0_->dim(); }
    const NormPtr& leg0() const { return leg0_; }
    const NormPtr& leg1() const { return leg1_; }
    const FiniteCouple& base() const {
        if (!base_) throw UnsupportedError("couple has no base");
        return *base_;
    }
    const Vec& w0() const { return w0_; }
    const Vec& w1() const { return w1_; }

    /// Bounds [lo, hi] on norm0 / norm1: K(f, t) = t norm1(f) for t <= lo and = norm0(f) for t >= hi.
    std::pair<double, double> embedding_range() const { return {r_lo_, r_hi_}; }

    std::string to_string() const {
        auto vec = [](const Vec& v) {
            std::string s = "[";
            for (std::size_t i = 0; i < v.size(); ++i) {
                char buf[64];
                auto r = std::to_chars(buf, buf + sizeof buf, v[i]);
                if (i) s += ",";
                s.append(buf, r.ptr);
            }
            return s + "]";
        };
        switch (kind_) {
            case Kind::weighted_l1: return "wl1:" + vec(w0_) + ":" + vec(w1_);
            case Kind::weighted_linf: return "wlinf:" + vec(w0_) + ":" + vec(w1_);
            case Kind::sum: return "sum(" + base_->to_string() + ")";
            case Kind::intersection: return "cap(" + base_->to_string() + ")";
            case Kind::swapped: return "swap(" + base_->to_string() + ")";
        }
        return "";
    }

private:
    Kind kind_ = Kind::weighted_l1;
    Vec w0_, w1_;
    std::shared_ptr<const FiniteCouple> base_;
    NormPtr leg0_, leg1_;
    double r_lo_ = 1.0, r_hi_ = 1.0;

    static FiniteCouple leaf(Kind k, Vec w0, Vec w1) {
        if (w0.empty() || w0.size() != w1.size()) throw DimensionError("couple weights must be nonempty and of equal length");
        for (double x : w0)
            if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("couple weights must be positive and finite");
        for (double x : w1)
            if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("couple weights must be positive and finite");
        FiniteCouple c;
        c.kind_ = k;
        c.w0_ = std::move(w0);
        c.w1_ = std::move(w1);
        if (k == Kind::weighted_l1) {
            c.leg0_ = NormExpr::make_wl1(c.w0_);
            c.leg1_ = NormExpr::make_wl1(c.w1_);
        } else {
            c.leg0_ = NormExpr::make_linf(c.w0_);
            c.leg1_ = NormExpr::make_linf(c.w1_);
        }
        c.r_lo_ = kInf;
        c.r_hi_ = 0.0;
        for (std::size_t i = 0; i < c.w0_.size(); ++i) {
            c.r_lo_ = std::min(c.r_lo_, c.w0_[i] / c.w1_[i]);
            c.r_hi_ = std::max(c.r_hi_, c.w0_[i] / c.w1_[i]);
        }
        return c;
    }

    static FiniteCouple node(Kind k, const FiniteCouple& base, NormPtr l0, NormPtr l1) {
        FiniteCouple c;
        c.kind_ = k;
        c.base_ = std::make_shared<const FiniteCouple>(base);
        c.leg0_ = std::move(l0);
        c.leg1_ = std::move(l1);
        switch (k) {
            case Kind::sum: c.r_lo_ = 1.0, c.r_hi_ = std::max(1.0, base.r_hi_); break;
            case Kind::intersection: c.r_lo_ = std::min(1.0, base.r_lo_), c.r_hi_ = 1.0; break;
            default: c.r_lo_ = 1.0 / base.r_hi_, c.r_hi_ = 1.0 / base.r_lo_; break;
        }
        return c;
    }
};

namespace detail {
inline void check_dim(const FiniteCouple& c, const Vec& f) {
    if (f.size() != c.dim())
        throw DimensionError("vector of length " + std::to_string(f.size()) + " for a couple of dimension " + std::to_string(c.dim()));
    for (double x : f)
        if (!std::isfinite(x)) throw DomainError("vector entries must be finite");
}
}  // namespace detail

inline double norm0(const FiniteCouple& c, const Vec& f) {
    detail::check_dim(c, f);
    return norm_eval(*c.leg0(), f);
}
inline double norm1(const FiniteCouple& c, const Vec& f) {
    detail::check_dim(c, f);
    return norm_eval(*c.leg1(), f);
}

inline double k_functional(const FiniteCouple& c, const Vec& f, double t) {
    detail::check_dim(c, f);
    return kfun(*c.leg0(), *c.leg1(), t, f);
}

/// K(f, t) and a subgradient in f.
inline double k_functional_grad(const FiniteCouple& c, const Vec& f, double t, Vec& grad) {
    detail::check_dim(c, f);
    return kfun(*c.leg0(), *c.leg1(), t, f, &grad);
}

/// K(f, t) by linear programming over the splits f = f0 + f1, whatever the kind.
inline double k_functional_lp(const FiniteCouple& c, const Vec& f, double t) {
    detail::check_dim(c, f);
    return norm_eval_lp(*NormExpr::make_infconv(c.leg0(), c.leg1(), t), f);
}

inline double j_functional(const FiniteCouple& c, const Vec& f, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("J-functional needs a finite t > 0");
    return std::max(norm0(c, f), t * norm1(c, f));
}

/// Weighted l1 <-> weighted l-inf with reciprocal weights.
inline FiniteCouple dual_couple(const FiniteCouple& c) {
    auto inv = [](const Vec& w) {
        Vec r(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) r[i] = 1.0 / w[i];
        return r;
    };
    if (c.kind() == FiniteCouple::Kind::weighted_l1) return FiniteCouple::weighted_linf(inv(c.w0()), inv(c.w1()));
    if (c.kind() == FiniteCouple::Kind::weighted_linf) return FiniteCouple::weighted_l1(inv(c.w0()), inv(c.w1()));
    throw UnsupportedError("dual couple is only provided for weighted l1 / l-inf couples");
}

/// Two leg norms with bounds [r_lo, r_hi] on leg0 / leg1 (see FiniteCouple::embedding_range).
struct LegPair {
    NormPtr leg0, leg1;
    double r_lo = 1.0, r_hi = 1.0;
};

inline LegPair legs_of(const FiniteCouple& c) {
    auto [lo, hi] = c.embedding_range();
    return {c.leg0(), c.leg1(), lo, hi};
}

/// Legs of the dual couple (X0', X1') for any kind.
inline LegPair dual_legs(const FiniteCouple& c) {
    auto [lo, hi] = c.embedding_range();
    return {dual_norm_expr(c.leg0()), dual_norm_expr(c.leg1()), 1.0 / hi, 1.0 / lo};
}

/// Oracle: minimize ||f0||_0 + t ||f - f0||_1 over f0_i = lam_i f_i, lam in [0,1]^n
/// (all leg norms are lattice norms). The objective is convex in lam, so each coordinate
/// is minimized in turn (nested) by a grid scan followed by golden-section refinement.
inline double brute_force_k(const FiniteCouple& c, const Vec& f, double t, int density = 12) {
    detail::check_dim(c, f);
    const std::size_t n = f.size();
    if (n > 3) throw DimensionError("brute-force oracle supports n <= 3");
    if (density < 2) throw DomainError("grid density must be at least 2");
    Vec lam(n, 0.0), f0(n), f1(n);
    auto value = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            f0[i] = lam[i] * f[i];
            f1[i] = f[i] - f0[i];
        }
        return norm_eval(*c.leg0(), f0) + t * norm_eval(*c.leg1(), f1);
    };
    std::function<double(std::size_t)> inner = [&](std::size_t i) -> double {
        if (i == n) return value();
        auto at = [&](double x) {
            lam[i] = x;
            return inner(i + 1);
        };
        double best = kInf, arg = 0.0;
        for (int k = 0; k <= density; ++k) {
            double x = static_cast<double>(k) / density, v = at(x);
            if (v < best) {
                best = v;
                arg = x;
            }
        }
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = std::max(0.0, arg - 1.0 / density), hi = std::min(1.0, arg + 1.0 / density);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double v1 = at(x1), v2 = at(x2);
        while (hi - lo > 1e-10) {
            if (v1 <= v2) {
                hi = x2;
                x2 = x1;
                v2 = v1;
                x1 = hi - g * (hi - lo);
                v1 = at(x1);
            } else {
                lo = x1;
                x1 = x2;
                v1 = v2;
                x2 = lo + g * (hi - lo);
                v2 = at(x2);
            }
        }
        return std::min({best, v1, v2});
    };
    return inner(0);
}

/// Dual norm by LP: sup over f != 0 of <g, f> / ||f||_e. Since every norm here is a
/// lattice norm, f can be restricted to the sign pattern of g.
inline double sup_ratio(const NormExpr& e, const Vec& g) {
    LinearProgram lp;
    std::vector<Affine> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        int y = lp.add_var(-std::fabs(g[i]));
        f[i] = Affine::var(y, g[i] >= 0 ? 1.0 : -1.0);
    }
    add_norm_le(lp, e, f, Affine::value(1.0), 1.0);
    auto r = lp.solve();
    if (r.status != LinearProgram::Result::Status::optimal) throw SolverError("duality LP did not reach an optimum");
    return -r.value;
}

/// sup over f != 0 of <g, f> / J(f, s; c).
inline double sup_ratio_over_j(const FiniteCouple& c, const Vec& g, double s) {
    detail::check_dim(c, g);
    return sup_ratio(*NormExpr::make_max(c.leg0(), scale_norm(c.leg1(), s)), g);
}

/// sup over f != 0 of <g, f> / K(f, s; c).
inline double sup_ratio_over_k(const FiniteCouple& c, const Vec& g, double s) {
    detail::check_dim(c, g);
    return sup_ratio(*NormExpr::make_infconv(c.leg0(), c.leg1(), s), g);
}

// ---------------------------------------------------------------------------
// Couple mini-language.

namespace detail {

class CoupleParser {
public:
    explicit CoupleParser(std::string_view s) : s_(s) {}
    FiniteCouple parse() {
        auto c = couple();
        skip();
        if (p_ != s_.size()) fail("unexpected trailing input");
        return c;
    }

private:
    std::string_view s_;
    std::size_t p_ = 0;

    [[noreturn]] void fail(const std::string& m) const { throw ParseError("couple spec: " + m, p_); }
    void skip() {
        while (p_ < s_.size() && s_[p_] == ' ') ++p_;
    }
    void expect(char c) {
        skip();
        if (p_ >= s_.size() || s_[p_] != c) fail(std::string("expected '") + c + "'");
        ++p_;
    }
    std::string ident() {
        skip();
        std::size_t b = p_;
        while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])))) ++p_;
        return std::string(s_.substr(b, p_ - b));
    }
    Vec vec() {
        expect('[');
        Vec v;
        while (true) {
            skip();
            double x = 0.0;
            if (p_ < s_.size() && s_[p_] == '+') ++p_;
            auto r = std::from_chars(s_.data() + p_, s_.data() + s_.size(), x);
            if (r.ec != std::errc()) fail("expected a number");
            p_ = static_cast<std::size_t>(r.ptr - s_.data());
            v.push_back(x);
            skip();
            if (p_ < s_.size() && s_[p_] == ',') {
                ++p_;
                continue;
            }
            break;
        }
        expect(']');
        return v;
    }
    FiniteCouple couple() {
        std::size_t start = p_;
        std::string id = ident();
        try {
            if (id == "wl1" || id == "wlinf") {
                expect(':');
                Vec a = vec();
                expect(':');
                Vec b = vec();
                return id == "wl1" ? FiniteCouple::weighted_l1(a, b) : FiniteCouple::weighted_linf(a, b);
            }
            if (id == "sum" || id == "cap" || id == "swap") {
                expect('(');
                FiniteCouple c = couple();
                expect(')');
                if (id == "sum") return FiniteCouple::sum(c);
                if (id == "cap") return FiniteCouple::intersection(c);
                return FiniteCouple::swapped(c);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(std::string("couple spec: ") + e.what(), start);
        }
        p_ = start;
        fail(id.empty() ? "expected a couple" : "unknown couple '" + id + "'");
    }
};

}  // namespace detail

/// Parse e.g. "sum(wl1:[1,2]:[3,1])".
inline FiniteCouple parse_couple(std::string_view s) { return detail::CoupleParser(s).parse(); }

/// Comma-separated vector, e.g. "1,-2.5,3".
inline Vec parse_vec(std::string_view s) {
    Vec v;
    std::size_t p = 0;
    while (p <= s.size()) {
        while (p < s.size() && s[p] == ' ') ++p;
        double x = 0.0;
        if (p < s.size() && s[p] == '+') ++p;
        auto r = std::from_chars(s.data() + p, s.data() + s.size(), x);
        if (r.ec != std::errc()) throw ParseError("vector: expected a number", p);
        p = static_cast<std::size_t>(r.ptr - s.data());
        v.push_back(x);
        while (p < s.size() && s[p] == ' ') ++p;
        if (p == s.size()) break;
        if (s[p] != ',') throw ParseError("vector: expected ','", p);
        ++p;
    }
    return v;
}

}  // namespace ilab
