#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "common.hpp"
#include "profile.hpp"
#include "quad_core.hpp"

namespace ilab {

class SlowVaryingFn;

/// (1 + |log t|)^beta0 on t < 1 and (1 + log t)^beta_inf on t >= 1.
struct BrokenLogPow {
    double beta0 = 0.0, beta_inf = 0.0;
};

/// ell_level(|log t|)^beta, with ell_1 = 1 + |log t| and ell_k = 1 + log ell_{k-1}.
struct IterLogPow {
    int level = 1;
    double beta = 0.0;
};

/// exp(coef * |log t|^kappa), 0 < kappa < 1.
struct ExpLogPow {
    double kappa = 0.5, coef = 0.0;
};

struct ConstFactor {
    double c = 1.0;
};

/// left on (0,1), c * right on (1,inf); right_at_one decides which branch owns t = 1.
struct Glued {
    std::shared_ptr<const SlowVaryingFn> left, right;
    double c = 1.0;
    bool right_at_one = false;
};

/// A function computed numerically (integral transforms and derivatives).
class TransformTable {
public:
    virtual ~TransformTable() = default;
    virtual double log_value(double u, int side_at_zero) const = 0;
    virtual double dlog(double u, bool right) const = 0;
    virtual bool has_derivative() const = 0;
    virtual Profile profile(Side side) const = 0;
    virtual std::optional<Profile> dlog_profile(Side side) const = 0;
    virtual std::optional<double> log_limit(Side side) const = 0;
    virtual std::string describe() const = 0;
};

/// table(+-u)^power; flipped evaluates at -u.
struct TransformFactor {
    std::shared_ptr<const TransformTable> table;
    double power = 1.0;
    bool flipped = false;
};

using Atom = std::variant<BrokenLogPow, IterLogPow, ExpLogPow, ConstFactor, Glued, TransformFactor>;

namespace detail {

inline std::string fmt(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline Side opposite(Side s) { return s == Side::head ? Side::tail : s == Side::tail ? Side::head : s; }

inline bool positive_side(double u, int side_at_zero, bool right_default) {
    if (u != 0.0) return u > 0.0;
    if (side_at_zero != 0) return side_at_zero > 0;
    return right_default;
}

}  // namespace detail

/// Positive slowly varying function on (0, inf), stored as a product of atoms.
/// All evaluation is done in u = log t.
class SlowVaryingFn {
public:
    SlowVaryingFn() = default;

    static SlowVaryingFn broken_log_pow(double beta0, double beta_inf) {
        check_finite(beta0, "beta0");
        check_finite(beta_inf, "beta_inf");
        return from_atom(BrokenLogPow{beta0 + 0.0, beta_inf + 0.0});
    }
    static SlowVaryingFn iter_log_pow(int level, double beta) {
        if (level < 1) throw DomainError("iterated log level must be >= 1");
        check_finite(beta, "beta");
        return from_atom(IterLogPow{level, beta});
    }
    static SlowVaryingFn exp_log_pow(double kappa, double coef) {
        if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("exp-log exponent kappa must lie in (0,1), not slowly varying otherwise");
        check_finite(coef, "coef");
        return from_atom(ExpLogPow{kappa, coef});
    }
    static SlowVaryingFn constant(double c) {
        if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("constant factor must be positive and finite");
        return from_atom(ConstFactor{c});
    }
    static SlowVaryingFn glued(const SlowVaryingFn& left, const SlowVaryingFn& right, double c = 1.0,
                               bool right_at_one = false) {
        if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("gluing constant must be positive and finite");
        return from_atom(Glued{std::make_shared<const SlowVaryingFn>(left), std::make_shared<const SlowVaryingFn>(right), c,
                               right_at_one});
    }
    static SlowVaryingFn from_table(std::shared_ptr<const TransformTable> t) {
        return from_atom(TransformFactor{std::move(t), 1.0, false});
    }

    const std::vector<Atom>& atoms() const { return atoms_; }

    double eval(double t) const {
        if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("argument must be a finite positive number, got " + detail::fmt(t));
        return eval_u(std::log(t));
    }

    double eval_u(double u, int side_at_zero = 0) const {
        double v = 1.0;
        for (const auto& a : atoms_) v *= atom_value(a, u, side_at_zero);
        if (v == 0.0 || !std::isfinite(v)) return std::exp(log_eval_u(u, side_at_zero));
        return v;
    }

    double log_eval_u(double u, int side_at_zero = 0) const {
        double s = 0.0;
        for (const auto& a : atoms_) s += atom_log(a, u, side_at_zero);
        return s;
    }

    /// d log v / d u, one-sided at u = 0 according to `right`.
    double dlog_u(double u, bool right = true) const {
        double s = 0.0;
        for (const auto& a : atoms_) s += atom_dlog(a, u, right);
        return s;
    }

    bool has_derivative() const {
        for (const auto& a : atoms_) {
            if (auto* g = std::get_if<Glued>(&a)) {
                if (!g->left->has_derivative() || !g->right->has_derivative()) return false;
            } else if (auto* t = std::get_if<TransformFactor>(&a)) {
                if (!t->table->has_derivative()) return false;
            }
        }
        return true;
    }

    Profile profile(Side side) const {
        Profile p;
        for (const auto& a : atoms_) p *= atom_profile(a, side);
        return p;
    }

    /// Asymptotic shape of |d log v / d u| at a side; nullopt if it vanishes identically there.
    std::optional<Profile> dlog_profile(Side side) const {
        std::optional<Profile> best;
        for (const auto& a : atoms_) best = dominant(best, atom_dlog_profile(a, side));
        return best;
    }

    /// log of lim v at a side; requires a constant profile there.
    double log_limit(Side side) const {
        Profile p = profile(side);
        if (!p.is_constant()) {
            int g = p.growth_sign();
            if (g > 0) return kInf;
            if (g < 0) return -kInf;
        }
        double s = 0.0;
        bool analytic = true;
        for (const auto& a : atoms_) {
            if (!atom_profile(a, side).is_constant()) {
                analytic = false;
                break;
            }
            auto l = atom_log_limit(a, side);
            if (!l) {
                analytic = false;
                break;
            }
            s += *l;
        }
        if (analytic) return s;
        return log_eval_u(side == Side::tail ? 1e12 : -1e12);
    }

    double limit(Side side) const { return std::exp(log_limit(side)); }

    SlowVaryingFn pow(double r) const {
        check_finite(r, "power");
        SlowVaryingFn out;
        if (r == 0.0) return out;
        for (const auto& a : atoms_) out.atoms_.push_back(atom_pow(a, r));
        out.normalize();
        return out;
    }

    /// x -> 1 / v(1/x).
    SlowVaryingFn reflect() const {
        SlowVaryingFn out;
        for (const auto& a : atoms_) out = out * atom_reflect(a);
        return out;
    }

    /// x -> v(1/x).
    SlowVaryingFn flip() const { return reflect().pow(-1.0); }

    friend SlowVaryingFn operator*(const SlowVaryingFn& a, const SlowVaryingFn& b) {
        SlowVaryingFn out = a;
        out.atoms_.insert(out.atoms_.end(), b.atoms_.begin(), b.atoms_.end());
        out.normalize();
        return out;
    }

    std::string to_string() const {
        if (atoms_.empty()) return "const:1";
        std::string s;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (i) s += "*";
            s += atom_string(atoms_[i]);
        }
        return s;
    }

private:
    std::vector<Atom> atoms_;

    static void check_finite(double x, const char* what) {
        if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
    }

    static SlowVaryingFn from_atom(Atom a) {
        SlowVaryingFn f;
        f.atoms_.push_back(std::move(a));
        f.normalize();
        return f;
    }

    static double atom_value(const Atom& a, double u, int sz) {
        if (auto* b = std::get_if<BrokenLogPow>(&a))
            return u < 0 ? std::pow(1.0 - u, b->beta0) : std::pow(1.0 + u, b->beta_inf);
        if (auto* l = std::get_if<IterLogPow>(&a)) return std::pow(ell(l->level, std::fabs(u)), l->beta);
        if (auto* e = std::get_if<ExpLogPow>(&a)) return std::exp(e->coef * std::pow(std::fabs(u), e->kappa));
        if (auto* c = std::get_if<ConstFactor>(&a)) return c->c;
        if (auto* g = std::get_if<Glued>(&a)) {
            if (detail::positive_side(u, sz, g->right_at_one)) return g->c * g->right->eval_u(u, sz);
            return g->left->eval_u(u, sz);
        }
        return std::exp(atom_log(a, u, sz));
    }

    static double atom_log(const Atom& a, double u, int sz) {
        if (auto* b = std::get_if<BrokenLogPow>(&a))
            return u < 0 ? b->beta0 * std::log1p(-u) : b->beta_inf * std::log1p(u);
        if (auto* l = std::get_if<IterLogPow>(&a)) return l->beta * std::log(ell(l->level, std::fabs(u)));
        if (auto* e = std::get_if<ExpLogPow>(&a)) return e->coef * std::pow(std::fabs(u), e->kappa);
        if (auto* c = std::get_if<ConstFactor>(&a)) return std::log(c->c);
        if (auto* g = std::get_if<Glued>(&a)) {
            if (detail::positive_side(u, sz, g->right_at_one)) return std::log(g->c) + g->right->log_eval_u(u, sz);
            return g->left->log_eval_u(u, sz);
        }
        const auto& t = std::get<TransformFactor>(a);
        return t.power * t.table->log_value(t.flipped ? -u : u, t.flipped ? -sz : sz);
    }

    static double atom_dlog(const Atom& a, double u, bool right) {
        const bool pos = u > 0.0 || (u == 0.0 && right);
        const double sgn = pos ? 1.0 : -1.0;
        if (auto* b = std::get_if<BrokenLogPow>(&a)) return pos ? b->beta_inf / (1.0 + u) : -b->beta0 / (1.0 - u);
        if (auto* l = std::get_if<IterLogPow>(&a)) {
            double s = std::fabs(u), lv = 1.0 + s, d = sgn;
            for (int j = 1; j < l->level; ++j) {
                d /= lv;
                lv = 1.0 + std::log(lv);
            }
            return l->beta * d / lv;
        }
        if (auto* e = std::get_if<ExpLogPow>(&a)) return sgn * e->coef * e->kappa * std::pow(std::fabs(u), e->kappa - 1.0);
        if (std::holds_alternative<ConstFactor>(a)) return 0.0;
        if (auto* g = std::get_if<Glued>(&a)) return pos ? g->right->dlog_u(u, right) : g->left->dlog_u(u, right);
        const auto& t = std::get<TransformFactor>(a);
        if (t.flipped) return -t.power * t.table->dlog(-u, !right);
        return t.power * t.table->dlog(u, right);
    }

    static Profile atom_profile(const Atom& a, Side side) {
        Profile p;
        if (auto* b = std::get_if<BrokenLogPow>(&a)) {
            return Profile::level_power(1, side == Side::head ? b->beta0 : b->beta_inf);
        }
        if (auto* l = std::get_if<IterLogPow>(&a)) return Profile::level_power(l->level, l->beta);
        if (auto* e = std::get_if<ExpLogPow>(&a)) {
            p.exps.push_back({e->kappa, e->coef});
            p.normalize();
            return p;
        }
        if (std::holds_alternative<ConstFactor>(a)) return p;
        if (auto* g = std::get_if<Glued>(&a)) return side == Side::head ? g->left->profile(side) : g->right->profile(side);
        const auto& t = std::get<TransformFactor>(a);
        return t.table->profile(t.flipped ? detail::opposite(side) : side).pow(t.power);
    }

    static std::optional<Profile> atom_dlog_profile(const Atom& a, Side side) {
        if (auto* b = std::get_if<BrokenLogPow>(&a)) {
            double beta = side == Side::head ? b->beta0 : b->beta_inf;
            if (beta == 0.0) return std::nullopt;
            return Profile::level_power(1, -1.0);
        }
        if (auto* l = std::get_if<IterLogPow>(&a)) {
            Profile p;
            p.powers.assign(static_cast<std::size_t>(l->level), -1.0);
            return p;
        }
        if (auto* e = std::get_if<ExpLogPow>(&a)) return Profile::level_power(1, e->kappa - 1.0);
        if (std::holds_alternative<ConstFactor>(a)) return std::nullopt;
        if (auto* g = std::get_if<Glued>(&a))
            return side == Side::head ? g->left->dlog_profile(side) : g->right->dlog_profile(side);
        const auto& t = std::get<TransformFactor>(a);
        return t.table->dlog_profile(t.flipped ? detail::opposite(side) : side);
    }

    static std::optional<double> atom_log_limit(const Atom& a, Side side) {
        if (std::holds_alternative<BrokenLogPow>(a) || std::holds_alternative<IterLogPow>(a) ||
            std::holds_alternative<ExpLogPow>(a))
            return 0.0;
        if (auto* c = std::get_if<ConstFactor>(&a)) return std::log(c->c);
        if (auto* g = std::get_if<Glued>(&a))
            return side == Side::head ? g->left->log_limit(side) : std::log(g->c) + g->right->log_limit(side);
        const auto& t = std::get<TransformFactor>(a);
        auto l = t.table->log_limit(t.flipped ? detail::opposite(side) : side);
        if (!l) return std::nullopt;
        return t.power * *l;
    }

    static Atom atom_pow(const Atom& a, double r) {
        if (auto* b = std::get_if<BrokenLogPow>(&a)) return BrokenLogPow{b->beta0 * r + 0.0, b->beta_inf * r + 0.0};
        if (auto* l = std::get_if<IterLogPow>(&a)) return IterLogPow{l->level, l->beta * r};
        if (auto* e = std::get_if<ExpLogPow>(&a)) return ExpLogPow{e->kappa, e->coef * r};
        if (auto* c = std::get_if<ConstFactor>(&a)) return ConstFactor{std::pow(c->c, r)};
        if (auto* g = std::get_if<Glued>(&a))
            return Glued{std::make_shared<const SlowVaryingFn>(g->left->pow(r)),
                         std::make_shared<const SlowVaryingFn>(g->right->pow(r)), std::pow(g->c, r), g->right_at_one};
        auto t = std::get<TransformFactor>(a);
        t.power *= r;
        return t;
    }

    static SlowVaryingFn atom_reflect(const Atom& a) {
        if (auto* b = std::get_if<BrokenLogPow>(&a)) return from_atom(BrokenLogPow{-b->beta_inf + 0.0, -b->beta0 + 0.0});
        if (auto* l = std::get_if<IterLogPow>(&a)) return from_atom(IterLogPow{l->level, -l->beta});
        if (auto* e = std::get_if<ExpLogPow>(&a)) return from_atom(ExpLogPow{e->kappa, -e->coef});
        if (auto* c = std::get_if<ConstFactor>(&a)) return from_atom(ConstFactor{1.0 / c->c});
        if (auto* g = std::get_if<Glued>(&a)) {
            SlowVaryingFn left = SlowVaryingFn::constant(1.0 / g->c) * g->right->reflect();
            return from_atom(Glued{std::make_shared<const SlowVaryingFn>(left),
                                   std::make_shared<const SlowVaryingFn>(g->left->reflect()), 1.0, !g->right_at_one});
        }
        auto t = std::get<TransformFactor>(a);
        t.power = -t.power;
        t.flipped = !t.flipped;
        return from_atom(t);
    }

    static std::string atom_string(const Atom& a) {
        using detail::fmt;
        if (auto* b = std::get_if<BrokenLogPow>(&a)) return "brokenlog:" + fmt(b->beta0) + ":" + fmt(b->beta_inf);
        if (auto* l = std::get_if<IterLogPow>(&a)) return "iterlog:" + std::to_string(l->level) + ":" + fmt(l->beta);
        if (auto* e = std::get_if<ExpLogPow>(&a)) return "explog:" + fmt(e->kappa) + ":" + fmt(e->coef);
        if (auto* c = std::get_if<ConstFactor>(&a)) return "const:" + fmt(c->c);
        if (auto* g = std::get_if<Glued>(&a))
            return "glue(" + g->left->to_string() + "|" + g->right->to_string() + "|" + fmt(g->c) + ")";
        const auto& t = std::get<TransformFactor>(a);
        std::string s = t.table->describe();
        if (t.flipped) s = "flip(" + s + ")";
        if (t.power != 1.0) s = "pow(" + s + "," + fmt(t.power) + ")";
        return s;
    }

    static bool is_identity(const Atom& a) {
        if (auto* b = std::get_if<BrokenLogPow>(&a)) return b->beta0 == 0.0 && b->beta_inf == 0.0;
        if (auto* l = std::get_if<IterLogPow>(&a)) return l->beta == 0.0;
        if (auto* e = std::get_if<ExpLogPow>(&a)) return e->coef == 0.0;
        if (auto* c = std::get_if<ConstFactor>(&a)) return c->c == 1.0;
        if (auto* t = std::get_if<TransformFactor>(&a)) return t->power == 0.0;
        return false;
    }

    /// Merge like atoms and drop identities; keeps a deterministic order.
    static bool try_merge(Atom& into, const Atom& a) {
        if (into.index() != a.index()) return false;
        if (auto* b = std::get_if<BrokenLogPow>(&into)) {
            auto& o = std::get<BrokenLogPow>(a);
            b->beta0 += o.beta0;
            b->beta_inf += o.beta_inf;
            return true;
        }
        if (auto* l = std::get_if<IterLogPow>(&into)) {
            auto& o = std::get<IterLogPow>(a);
            if (o.level != l->level) return false;
            l->beta += o.beta;
            return true;
        }
        if (auto* e = std::get_if<ExpLogPow>(&into)) {
            auto& o = std::get<ExpLogPow>(a);
            if (o.kappa != e->kappa) return false;
            e->coef += o.coef;
            return true;
        }
        if (auto* c = std::get_if<ConstFactor>(&into)) {
            c->c *= std::get<ConstFactor>(a).c;
            return true;
        }
        if (auto* g = std::get_if<Glued>(&into)) {
            auto& o = std::get<Glued>(a);
            if (o.right_at_one != g->right_at_one) return false;
            g->left = std::make_shared<const SlowVaryingFn>(*g->left * *o.left);
            g->right = std::make_shared<const SlowVaryingFn>(*g->right * *o.right);
            g->c *= o.c;
            return true;
        }
        auto* t = std::get_if<TransformFactor>(&into);
        auto& o = std::get<TransformFactor>(a);
        if (o.table != t->table || o.flipped != t->flipped) return false;
        t->power += o.power;
        return true;
    }

    void normalize() {
        std::vector<Atom> out;
        for (const auto& a : atoms_) {
            bool merged = false;
            for (auto& b : out)
                if (try_merge(b, a)) {
                    merged = true;
                    break;
                }
            if (!merged) out.push_back(a);
        }
        std::erase_if(out, is_identity);
        std::stable_sort(out.begin(), out.end(), [](const Atom& x, const Atom& y) {
            if (x.index() != y.index()) return x.index() < y.index();
            if (auto* l = std::get_if<IterLogPow>(&x)) return l->level < std::get<IterLogPow>(y).level;
            if (auto* e = std::get_if<ExpLogPow>(&x)) return e->kappa < std::get<ExpLogPow>(y).kappa;
            return false;
        });
        atoms_ = std::move(out);
    }
};

inline SlowVaryingFn reflect(const SlowVaryingFn& v) { return v.reflect(); }
inline SlowVaryingFn pow(const SlowVaryingFn& v, double r) { return v.pow(r); }
inline SlowVaryingFn mul(const SlowVaryingFn& a, const SlowVaryingFn& b) { return a * b; }
inline double eval(const SlowVaryingFn& v, double t) { return v.eval(t); }

/// v'(x). At the breakpoint x = 1 both one-sided derivatives must agree.
inline double derivative(const SlowVaryingFn& v, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("argument must be a finite positive number");
    if (!v.has_derivative()) throw UnsupportedError("derivative not available for " + v.to_string());
    double u = std::log(x);
    if (u != 0.0) return v.eval_u(u) * v.dlog_u(u, true) / x;
    double l = v.eval_u(0.0, -1) * v.dlog_u(0.0, false);
    double r = v.eval_u(0.0, +1) * v.dlog_u(0.0, true);
    if (l == r || std::fabs(l - r) <= 1e-14 * std::max(std::fabs(l), std::fabs(r))) return r;
    throw BreakpointError(l, r);
}

// ---------------------------------------------------------------------------
// Integral transforms: value(u) = pre(u) * I(u)^expo with
// I(u) = int_{-inf}^u w (head) or int_u^inf w (tail).

struct IntegralSpec {
    SlowVaryingFn pre;
    SlowVaryingFn w;
    Side side = Side::tail;
    double expo = 1.0;
    std::string name;
};

class IntegralTable final : public TransformTable {
public:
    static constexpr int kNodes = 481;
    static constexpr double kLog2Lo = -60.0, kLog2Step = 0.25;

    explicit IntegralTable(IntegralSpec spec) : s_(std::move(spec)) {
        gh_ = s_.w.profile(Side::head);
        gt_ = s_.w.profile(Side::tail);
        const Profile& own = s_.side == Side::head ? gh_ : gt_;
        if (!own.integrable())
            throw DivergenceError(s_.side, "integral defining " + s_.name);
        nodes_.resize(kNodes);
        for (int i = 0; i < kNodes; ++i) nodes_[i] = node_u(i);
        if (s_.side == Side::head) {
            nodes_[0] = direct(nodes_[0]);
            for (int i = 1; i < kNodes; ++i) nodes_[i] = nodes_[i - 1] + piece(node_u(i - 1), node_u(i));
        } else {
            nodes_[kNodes - 1] = direct(nodes_[kNodes - 1]);
            for (int i = kNodes - 2; i >= 0; --i) nodes_[i] = nodes_[i + 1] + piece(node_u(i), node_u(i + 1));
        }
    }

    static double node_u(int i) { return kLn2 * (kLog2Lo + kLog2Step * i); }

    double g(double u) const { return s_.w.eval_u(u); }

    /// I(u) from the nearest node on the accumulating side plus a local completion.
    double integral(double u) const {
        const double lo = node_u(0), hi = node_u(kNodes - 1);
        const double pos = (u / kLn2 - kLog2Lo) / kLog2Step;
        if (s_.side == Side::head) {
            if (u < lo) return direct(u);
            if (u >= hi) return nodes_[kNodes - 1] + piece(hi, u);
            int j = std::clamp(static_cast<int>(std::floor(pos)), 0, kNodes - 1);
            while (j > 0 && node_u(j) > u) --j;
            double nu = node_u(j);
            return u == nu ? nodes_[j] : nodes_[j] + piece(nu, u);
        }
        if (u > hi) return direct(u);
        if (u <= lo) return nodes_[0] + piece(u, lo);
        int j = std::clamp(static_cast<int>(std::ceil(pos)), 0, kNodes - 1);
        while (j < kNodes - 1 && node_u(j) < u) ++j;
        double nu = node_u(j);
        return u == nu ? nodes_[j] : nodes_[j] + piece(u, nu);
    }

    /// log I(u); where I underflows (integrated side) or overflows (divergent side), log g(u) plus
    /// the profile factor.
    double log_integral(double u) const {
        const bool own = (s_.side == Side::head) == (u < 0);
        const Profile& p = u < 0 ? gh_ : gt_;
        const bool asymptotic = own || !p.integrable();
        double I = 0.0;
        try {
            I = integral(u);
        } catch (const QuadratureError&) {
            if (!asymptotic || std::fabs(u) < 1e3) throw;
            I = kInf;
        }
        if (I > 1e-280 && I < 1e280) return std::log(I);
        if (!asymptotic) return std::log(I);
        return s_.w.log_eval_u(u) + p.log_primitive_factor(std::fabs(u));
    }

    double log_value(double u, int sz) const override {
        return s_.pre.log_eval_u(u, sz) + s_.expo * log_integral(u);
    }

    double dlog(double u, bool right) const override {
        double gi = std::exp(s_.w.log_eval_u(u) - log_integral(u));
        return s_.pre.dlog_u(u, right) + s_.expo * (s_.side == Side::head ? gi : -gi);
    }

    bool has_derivative() const override { return s_.pre.has_derivative(); }

    Profile integral_profile(Side side) const {
        const Profile& gp = side == Side::head ? gh_ : gt_;
        if (side == s_.side) return gp.primitive();
        return gp.integrable() ? Profile{} : gp.primitive();
    }

    Profile profile(Side side) const override {
        return s_.pre.profile(side) * integral_profile(side).pow(s_.expo);
    }

    std::optional<Profile> dlog_profile(Side side) const override {
        std::optional<Profile> best = s_.pre.dlog_profile(side);
        const Profile& gp = side == Side::head ? gh_ : gt_;
        return dominant(best, gp * integral_profile(side).pow(-1.0));
    }

    std::optional<double> log_limit(Side side) const override {
        if (side == s_.side) return std::nullopt;
        if (!(side == Side::head ? gh_ : gt_).integrable()) return std::nullopt;
        if (!s_.pre.profile(side).is_constant()) return std::nullopt;
        double total = s_.side == Side::head ? integral(0.0) + tail_total() : integral(0.0) + head_total();
        return s_.pre.log_limit(side) + s_.expo * std::log(total);
    }

    std::string describe() const override { return s_.name; }

    const IntegralSpec& spec() const { return s_; }

private:
    IntegralSpec s_;
    Profile gh_, gt_;
    std::vector<double> nodes_;

    double piece(double a, double b) const {
        auto f = [this](double u) { return g(u); };
        if (std::fabs(b - a) < 1.0 && std::fabs(a) < 1e3 && std::fabs(b) < 1e3) {
            auto r = gk_adaptive(f, a, b);
            return r.value;
        }
        return integrate_u(f, a, b, &gh_, &gt_).value;
    }

    double direct(double u) const {
        auto f = [this](double x) { return g(x); };
        QuadResult r = s_.side == Side::head ? integrate_u(f, -kInf, u, &gh_, &gt_) : integrate_u(f, u, kInf, &gh_, &gt_);
        if (r.divergence_side != Side::none) throw DivergenceError(r.divergence_side, "integral defining " + s_.name);
        return r.value;
    }

    double tail_total() const {
        auto f = [this](double x) { return g(x); };
        return integrate_u(f, 0.0, kInf, &gh_, &gt_).value;
    }
    double head_total() const {
        auto f = [this](double x) { return g(x); };
        return integrate_u(f, -kInf, 0.0, &gh_, &gt_).value;
    }
};

inline SlowVaryingFn make_integral_transform(IntegralSpec spec) {
    return SlowVaryingFn::from_table(std::make_shared<const IntegralTable>(std::move(spec)));
}

/// x -> -x a'(x) computed from the closed-form derivative of a.
class NegXDerivativeTable final : public TransformTable {
public:
    explicit NegXDerivativeTable(SlowVaryingFn a) : a_(std::move(a)) {}

    double log_value(double u, int sz) const override {
        bool right = sz == 0 ? true : sz > 0;
        return a_.log_eval_u(u, right ? 1 : -1) + std::log(-a_.dlog_u(u, right));
    }
    double dlog(double, bool) const override { throw UnsupportedError("second derivative not available"); }
    bool has_derivative() const override { return false; }
    Profile profile(Side side) const override {
        auto d = a_.dlog_profile(side);
        if (!d) throw UnsupportedError("derivative vanishes near " + std::string(side_name(side)));
        return a_.profile(side) * *d;
    }
    std::optional<Profile> dlog_profile(Side) const override { return std::nullopt; }
    std::optional<double> log_limit(Side) const override { return std::nullopt; }
    std::string describe() const override { return "negxderiv(" + a_.to_string() + ")"; }

private:
    SlowVaryingFn a_;
};

/// x -> (int_0^x t^{-1} v(t) dt)^{-1}.
inline SlowVaryingFn recip_head_integral(const SlowVaryingFn& v) {
    return make_integral_transform({SlowVaryingFn(), v, Side::head, -1.0, "recipint(" + v.to_string() + ")"});
}

/// x -> x^{-1} int_0^x v(s) ds = int_0^inf e^{-r} v(x e^{-r}) dr.
class SmoothTable final : public TransformTable {
public:
    explicit SmoothTable(SlowVaryingFn v) : v_(std::move(v)) {}

    double log_value(double u, int) const override {
        const double lv = v_.log_eval_u(u);
        auto f = [&](double r) { return std::exp(-r + v_.log_eval_u(u - r) - lv); };
        Profile tail = v_.profile(Side::head);
        tail.rate = -1.0;
        auto r = integrate_u(f, 0.0, kInf, nullptr, &tail);
        return lv + std::log(r.value);
    }
    double dlog(double u, bool) const override { return std::exp(v_.log_eval_u(u) - log_value(u, 0)) - 1.0; }
    bool has_derivative() const override { return true; }
    Profile profile(Side side) const override { return v_.profile(side); }
    std::optional<Profile> dlog_profile(Side side) const override { return v_.dlog_profile(side); }
    std::optional<double> log_limit(Side side) const override {
        if (!v_.profile(side).is_constant()) return std::nullopt;
        return v_.log_limit(side);
    }
    std::string describe() const override { return "smooth(" + v_.to_string() + ")"; }

private:
    SlowVaryingFn v_;
};

/// x -> x^{-1} int_0^x v(s) ds, equivalent to v for slowly varying v.
inline SlowVaryingFn smooth(const SlowVaryingFn& v) { return SlowVaryingFn::from_table(std::make_shared<const SmoothTable>(v)); }

struct SvCheck {
    bool ok = true;
    double max_deviation = 0.0;  // |v(lambda x)/v(x) - 1| at the farthest probe
};

/// Numerical check that v(lambda x)/v(x) -> 1 as x -> 0 and x -> inf.
inline SvCheck verify_sv(const SlowVaryingFn& v, const std::vector<double>& lambdas = {0.5, 2.0, 10.0}) {
    SvCheck out;
    for (Side side : {Side::head, Side::tail})
        if (v.profile(side).rate != 0.0) out.ok = false;
    for (double lam : lambdas) {
        if (!(lam > 0.0)) throw DomainError("scaling factor must be positive");
        double prev = kInf;
        for (double s : {1e2, 1e4, 1e6}) {
            double worst = 0.0;
            for (double sgn : {-1.0, 1.0}) {
                double u = sgn * s;
                double d = std::fabs(std::expm1(v.log_eval_u(u + std::log(lam)) - v.log_eval_u(u)));
                worst = std::max(worst, d);
            }
            if (worst > prev * 1.5 + 1e-12) out.ok = false;
            prev = worst;
        }
        out.max_deviation = std::max(out.max_deviation, prev);
    }
    if (out.max_deviation > 1e-2) out.ok = false;
    return out;
}

// ---------------------------------------------------------------------------
// Weight mini-language.

namespace detail {

class WeightParser {
public:
    explicit WeightParser(std::string_view s) : s_(s) {}

    SlowVaryingFn parse() {
        auto v = product();
        skip();
        if (p_ != s_.size()) fail("unexpected trailing input");
        return v;
    }

private:
    std::string_view s_;
    std::size_t p_ = 0;

    [[noreturn]] void fail(const std::string& m) const { throw ParseError("weight spec: " + m, p_); }

    void skip() {
        while (p_ < s_.size() && s_[p_] == ' ') ++p_;
    }
    bool eat(char c) {
        skip();
        if (p_ < s_.size() && s_[p_] == c) {
            ++p_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    std::string ident() {
        skip();
        std::size_t b = p_;
        while (p_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[p_]))) ++p_;
        return std::string(s_.substr(b, p_ - b));
    }
    double number() {
        skip();
        std::size_t b = p_;
        if (p_ < s_.size() && s_[p_] == '+') ++p_;
        double x = 0.0;
        auto r = std::from_chars(s_.data() + p_, s_.data() + s_.size(), x);
        if (r.ec != std::errc()) {
            p_ = b;
            fail("expected a number");
        }
        p_ = static_cast<std::size_t>(r.ptr - s_.data());
        return x;
    }
    double sign() {
        skip();
        if (p_ < s_.size() && (s_[p_] == '+' || s_[p_] == '-')) {
            bool neg = s_[p_] == '-';
            std::size_t save = p_;
            ++p_;
            if (p_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[p_])) || s_[p_] == '.')) {
                p_ = save;
                return number();
            }
            return neg ? -1.0 : 1.0;
        }
        return number();
    }

    SlowVaryingFn product() {
        SlowVaryingFn v = factor();
        while (eat('*')) v = v * factor();
        return v;
    }

    SlowVaryingFn factor() {
        std::size_t start = p_;
        std::string id = ident();
        try {
            if (id == "brokenlog") {
                expect(':');
                double b0 = number();
                expect(':');
                return SlowVaryingFn::broken_log_pow(b0, number());
            }
            if (id == "iterlog") {
                expect(':');
                double lv = number();
                if (lv != std::floor(lv)) fail("iterated log level must be an integer");
                expect(':');
                return SlowVaryingFn::iter_log_pow(static_cast<int>(lv), number());
            }
            if (id == "explog") {
                expect(':');
                double k = number();
                expect(':');
                return SlowVaryingFn::exp_log_pow(k, sign());
            }
            if (id == "const") {
                expect(':');
                return SlowVaryingFn::constant(number());
            }
            if (id == "glue") {
                expect('(');
                SlowVaryingFn l = product();
                expect('|');
                SlowVaryingFn r = product();
                double c = 1.0;
                if (eat('|')) {
                    skip();
                    if (s_.substr(p_, 2) == "ac") {
                        p_ += 2;
                        c = std::exp(l.log_eval_u(0.0, -1) - r.log_eval_u(0.0, 1));
                    } else {
                        c = number();
                    }
                }
                expect(')');
                return SlowVaryingFn::glued(l, r, c, false);
            }
            if (id == "recipint") {
                expect('(');
                SlowVaryingFn v = product();
                expect(')');
                return recip_head_integral(v);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(std::string("weight spec: ") + e.what(), start);
        }
        p_ = start;
        fail(id.empty() ? "expected an atom" : "unknown atom '" + id + "'");
    }
};

}  // namespace detail

/// Parse the weight mini-language, e.g. "brokenlog:0:-1*iterlog:2:1".
inline SlowVaryingFn parse_weight(std::string_view s) { return detail::WeightParser(s).parse(); }

}  // namespace ilab
