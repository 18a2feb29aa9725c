#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "interpnorm.hpp"

namespace ilab {

// ---------------------------------------------------------------------------------------------
// Space norms used by the theorem harness. Each evaluation reports solver diagnostics.

struct NormEval {
    double value = 0.0;
    double disagreement = 0.0;  // relative spread of solver restarts
    int solver_calls = 0;
};

using SpaceNorm = std::function<NormEval(const Vec&)>;

struct SpaceSide {
    std::string name;
    SpaceNorm norm;
};

namespace detail {

inline double restart_spread(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    return lo > 0 ? hi / lo - 1.0 : 0.0;
}

inline NormOracle expr_oracle(const NormPtr& e) {
    return [e](const Vec& y, Vec* g) { return g ? norm_eval_grad(*e, y, *g) : norm_eval(*e, y); };
}

inline NormOracle max_oracle(NormOracle a, NormOracle b) {
    return [a = std::move(a), b = std::move(b)](const Vec& y, Vec* g) {
        Vec ga, gb;
        double va = a(y, g ? &ga : nullptr), vb = b(y, g ? &gb : nullptr);
        if (g) *g = va >= vb ? ga : gb;
        return std::max(va, vb);
    };
}

inline SpaceNorm plain(NormOracle n) {
    return [n = std::move(n)](const Vec& x) { return NormEval{n(x, nullptr), 0.0, 0}; };
}

inline SpaceNorm dual_of(NormOracle n, SolverCfg cfg) {
    return [n = std::move(n), cfg](const Vec& g) {
        auto r = dual_norm(g, n, cfg);
        return NormEval{r.value, restart_spread(r.restart_values), 1};
    };
}

}  // namespace detail

/// || t^{-theta-1/q} v(t) K(f, t) ||_{q, range} at fixed Gauss-Legendre nodes.
inline NormOracle k_space_oracle(const FiniteCouple& c, double theta, double q, const SlowVaryingFn& v,
                                 Range range = Range::full) {
    return NodeKNorm::continuous(legs_of(c), theta, q, v, range).oracle();
}

inline SpaceNorm k_space(const FiniteCouple& c, double theta, double q, const SlowVaryingFn& v, Range range = Range::full) {
    return detail::plain(k_space_oracle(c, theta, q, v, range));
}

/// Norm of the dual of the K-space, by the dual-norm solver.
inline SpaceNorm k_space_dual(const FiniteCouple& c, double theta, double q, const SlowVaryingFn& v, const SolverCfg& cfg) {
    return detail::dual_of(k_space_oracle(c, theta, q, v), cfg);
}

/// Discrete J-norm (dyadic blocks, equivalent to the J-space norm), evaluated as the dual of its
/// dual norm.
inline SpaceNorm j_space(const FiniteCouple& c, double theta, double q, const SlowVaryingFn& a, const SolverCfg& cfg,
                         Range range = Range::full) {
    if (range == Range::full) cond_307(theta, q, a).require();
    return detail::dual_of(dual_of_discrete_j(c, theta, q, a, 0, range).oracle(), cfg);
}

/// Norm of the dual of the (discrete) J-space: an explicit discrete K-norm on the dual legs.
inline NormOracle j_space_dual_oracle(const FiniteCouple& c, double theta, double q, const SlowVaryingFn& a) {
    cond_307(theta, q, a).require();
    return dual_of_discrete_j(c, theta, q, a).oracle();
}

inline SpaceNorm j_space_dual(const FiniteCouple& c, double theta, double q, const SlowVaryingFn& a) {
    return detail::plain(j_space_dual_oracle(c, theta, q, a));
}

inline SpaceNorm leg0_norm(const FiniteCouple& c) { return detail::plain(detail::expr_oracle(c.leg0())); }

inline SpaceNorm max_norm(SpaceNorm a, SpaceNorm b) {
    return [a = std::move(a), b = std::move(b)](const Vec& x) {
        auto ra = a(x), rb = b(x);
        return NormEval{std::max(ra.value, rb.value), std::max(ra.disagreement, rb.disagreement),
                        ra.solver_calls + rb.solver_calls};
    };
}

/// inf over x = xa + xb of Na(xa) + Nb(xb) for lattice norms: xa = (1 - lam) x, xb = lam x with
/// lam in [0,1]^n, minimized by the level method on the box.
inline double sum_space_norm(const Vec& x, const NormOracle& na, const NormOracle& nb, const SolverCfg& cfg,
                             double* disagreement = nullptr) {
    const std::size_t n = x.size();
    if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) return 0.0;
    Vec xa(n), xb(n), ga, gb;
    auto F = [&](const Vec& lam, Vec& grad) {
        for (std::size_t i = 0; i < n; ++i) {
            xa[i] = (1.0 - lam[i]) * x[i];
            xb[i] = lam[i] * x[i];
        }
        double v = na(xa, &ga) + nb(xb, &gb);
        for (std::size_t i = 0; i < n; ++i) grad[i] = x[i] * (gb[i] - ga[i]);
        return v;
    };
    SolverCfg c = cfg;
    auto r = minimize_on_box(F, n, c);
    if (disagreement) *disagreement = r.value > 0 ? (r.value - r.lower) / r.value : 0.0;
    return r.value;
}

inline SpaceNorm sum_norm(NormOracle na, NormOracle nb, SolverCfg cfg) {
    return [na = std::move(na), nb = std::move(nb), cfg](const Vec& x) {
        NormEval e;
        e.value = sum_space_norm(x, na, nb, cfg, &e.disagreement);
        e.solver_calls = 1;
        return e;
    };
}

// ---------------------------------------------------------------------------------------------
// Theorem harness

enum class TheoremId { DT0S, DTJ1, DTJ11, DT0S1, DTJ111, DTJ111_1, ET1, ET1_1, EQ1, KS, JS11, E1, E2 };

inline const std::vector<std::pair<TheoremId, std::string>>& theorem_ids() {
    static const std::vector<std::pair<TheoremId, std::string>> ids{
        {TheoremId::DT0S, "DT0S"},   {TheoremId::DTJ1, "DTJ1"},         {TheoremId::DTJ11, "DTJ11"},
        {TheoremId::DT0S1, "DT0S1"}, {TheoremId::DTJ111, "DTJ111"},     {TheoremId::DTJ111_1, "DTJ111_1"},
        {TheoremId::ET1, "ET1"},     {TheoremId::ET1_1, "ET1_1"},       {TheoremId::EQ1, "EQ1"},
        {TheoremId::KS, "KS"},       {TheoremId::JS11, "JS11"},         {TheoremId::E1, "E1"},
        {TheoremId::E2, "E2"}};
    return ids;
}

inline std::string to_string(TheoremId id) {
    for (const auto& [k, s] : theorem_ids())
        if (k == id) return s;
    return "?";
}

inline TheoremId parse_theorem_id(const std::string& s) {
    std::string t = s;
    std::replace(t.begin(), t.end(), '.', '_');
    for (const auto& [k, name] : theorem_ids())
        if (name == t) return k;
    throw ParseError("unknown theorem id '" + s + "'", 0);
}

/// Theorems whose samples are functionals on the base couple (dual statements).
inline bool is_dual_statement(TheoremId id) {
    switch (id) {
        case TheoremId::ET1:
        case TheoremId::ET1_1:
        case TheoremId::EQ1:
        case TheoremId::KS:
        case TheoremId::JS11: return false;
        default: return true;
    }
}

inline bool is_embedding(TheoremId id) { return id == TheoremId::E1 || id == TheoremId::E2; }

struct VerifyCfg {
    int samples = 100;
    std::uint64_t seed = 7;
    double spread_bound = 10.0;       // max_ratio / min_ratio allowed for an equivalence
    double embedding_bound = 10.0;    // uniform constant allowed for an embedding
    double scale = 1.0;               // samples are multiplied by this (homogeneity checks)
    double theta = 0.0;               // theta of the embedding statements
    std::optional<SlowVaryingFn> aux; // beta or alpha of the glued weights
    SolverCfg solver;
    int threads = 0;                  // 0: ILAB_THREADS or the hardware count
};

struct EquivalenceReport {
    std::string theorem_id, couple, weight;
    double q = 1.0;
    int sample_count = 0;
    std::uint64_t seed = 0;
    std::string status;  // PASS, FAIL or SKIP
    std::string reason;  // failed condition for SKIP, violated bound for FAIL
    bool one_sided = false;
    std::vector<std::string> sides;            // sides[0] is the reference space
    std::vector<std::vector<double>> ratios;   // ratios[k][s]: reference / sides[k+1] (embedding: target / source)
    double min_ratio = 0.0, max_ratio = 0.0;   // over all sides and samples
    double spread = 1.0;                       // largest per-side max/min
    std::vector<std::string> notes;            // derived weights, skipped identities, consistency checks
    // diagnostics
    double max_restart_disagreement = 0.0;
    long solver_calls = 0;
    std::size_t grid_nodes = 0;
    double panel = 0.25;
};

namespace detail {

/// Unit sup-norm direction rounded to 32 significant bits, so that every positive multiple of a
/// sample reaches the solvers as the same vector.
inline Vec canonical_direction(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    Vec out(v.size(), 0.0);
    if (m == 0.0) return out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        int e;
        double fr = std::frexp(v[i] / m, &e);
        out[i] = std::ldexp(std::nearbyint(std::ldexp(fr, 32)), e - 32);
    }
    return out;
}

inline int thread_count(int requested) {
    int n = requested;
    if (n <= 0) {
        n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        if (const char* env = std::getenv("ILAB_THREADS")) {
            int e = std::atoi(env);
            if (e > 0) n = std::min(n, e);
        }
    }
    return std::max(1, n);
}

/// Runs body(i) for i in [0, count) on up to `threads` workers; rethrows the first failure by index.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(count));
    auto run = [&](int i) {
        try {
            body(i);
        } catch (...) {
            errs[static_cast<std::size_t>(i)] = std::current_exception();
        }
    };
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) run(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int i = next++; i < count; i = next++) run(i);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

inline bool in_range(double q, double lo, bool lo_open, double hi, bool hi_open) {
    if (lo_open ? !(q > lo) : !(q >= lo)) return false;
    if (hi_open ? !(q < hi) : !(q <= hi)) return false;
    return true;
}

struct Statement {
    std::vector<SpaceSide> sides;
    std::vector<std::string> notes;
    std::size_t grid_nodes = 0;
};

struct SkipStatement {
    std::string reason;
};

inline Condition renamed(Condition c, const std::string& name) {
    c.name = name;
    return c;
}

inline void require_q(double q, double lo, bool lo_open, double hi, bool hi_open, const std::string& text) {
    if (!in_range(q, lo, lo_open, hi, hi_open)) throw SkipStatement{"q range: theorem needs " + text};
}

inline void require(const Condition& c) {
    if (!c.holds) throw SkipStatement{c.name + ": " + c.witness};
}

inline FiniteCouple dual_base(const FiniteCouple& c) {
    if (c.kind() != FiniteCouple::Kind::weighted_l1 && c.kind() != FiniteCouple::Kind::weighted_linf)
        throw UnsupportedError("duality statements need a weighted-l1 or weighted-linf base couple");
    return dual_couple(c);
}

inline Statement build_statement(TheoremId id, const FiniteCouple& c, const SlowVaryingFn& w, double q, const VerifyCfg& cfg) {
    Statement st;
    const SolverCfg& sc = cfg.solver;
    const double qp = conjugate(q);
    auto note_weight = [&](const std::string& name, const SlowVaryingFn& f) { st.notes.push_back(name + " = " + f.to_string()); };
    auto beta = [&] { return cfg.aux ? *cfg.aux : SlowVaryingFn::broken_log_pow(0.0, -2.0); };
    auto alpha = [&] { return cfg.aux ? *cfg.aux : SlowVaryingFn::broken_log_pow(2.0, 0.0); };
    auto alpha_ac = [&] { return cfg.aux ? *cfg.aux : SlowVaryingFn::broken_log_pow(1.0, -1.0); };
    auto add = [&](std::string name, SpaceNorm n) { st.sides.push_back({std::move(name), std::move(n)}); };
    switch (id) {
        case TheoremId::DT0S: {
            require_q(q, 1.0, false, kInf, true, "1 <= q < inf");
            require(cond_DT0A(w, q));
            auto a = a_from_b(w, q);
            note_weight("a", a);
            auto cd = dual_base(c);
            add("dual of K(X0,X1;0,q,b)", k_space_dual(c, 0.0, q, w, sc));
            add("J(X0',X1';0,q',b~)", j_space(cd, 0.0, qp, w.reflect(), sc));
            add("K(X0',X1';0,q',a~)", k_space(cd, 0.0, qp, a.reflect()));
            break;
        }
        case TheoremId::DTJ1: {
            require_q(q, 1.0, true, kInf, true, "1 < q < inf");
            require(cond_aJ(w, qp));
            auto b = b_from_a(w, q);
            note_weight("b", b);
            auto cd = dual_base(c);
            add("dual of J(X0,X1;0,q,a)", j_space_dual(c, 0.0, q, w));
            add("K(X0',X1';0,q',a~)", k_space(cd, 0.0, qp, w.reflect()));
            add("J(X0',X1';0,q',b~)", j_space(cd, 0.0, qp, b.reflect(), sc));
            break;
        }
        case TheoremId::DTJ11: {
            require_q(q, 1.0, false, 1.0, false, "q = 1");
            require(cond_decreasing(w, LimitAtInfinity::zero, "a*1"));
            auto b = b_from_a_deriv(w, LimitAtInfinity::zero);
            note_weight("b", b);
            auto cd = dual_base(c);
            add("dual of J(X0,X1;0,1,a)", j_space_dual(c, 0.0, 1.0, w));
            add("K(X0',X1';0,inf,a~)", k_space(cd, 0.0, kInf, w.reflect()));
            add("J(X0',X1';0,inf,b~)", j_space(cd, 0.0, kInf, b.reflect(), sc));
            break;
        }
        case TheoremId::DT0S1: {
            require_q(q, 1.0, false, kInf, true, "1 <= q < inf");
            require(cond_DT0A1(w, q));
            auto B = glue_tail(w, beta(), q);
            auto A = A_from_B(B, q);
            note_weight("B", B);
            note_weight("A", A);
            auto cd = dual_base(c);
            auto cap = FiniteCouple::intersection(cd);
            add("dual of K(X0,X1;0,q,b)", k_space_dual(c, 0.0, q, w, sc));
            add("J(X0',X1';0,q',b~)", j_space(cd, 0.0, qp, w.reflect(), sc));
            add("J(X0',X0'^X1';0,q',B~)", j_space(cap, 0.0, qp, B.reflect(), sc));
            add("K(X0',X0'^X1';0,q',A~)", k_space(cap, 0.0, qp, A.reflect()));
            add("X0' ^ J(X0',X1';0,q',B~)", max_norm(leg0_norm(cd), j_space(cd, 0.0, qp, B.reflect(), sc)));
            add("X0' ^ K(X0',X1';0,q',A~)", max_norm(leg0_norm(cd), k_space(cd, 0.0, qp, A.reflect())));
            break;
        }
        case TheoremId::DTJ111:
        case TheoremId::DTJ111_1: {
            const bool one = id == TheoremId::DTJ111_1;
            SlowVaryingFn A, B;
            double qq = q, qqp = qp;
            if (one) {
                require_q(q, 1.0, false, 1.0, false, "q = 1");
                require(cond_decreasing(w, LimitAtInfinity::positive, "akon.1"));
                A = glue_head_ac(w, alpha_ac());
                B = b_from_a_deriv(A, LimitAtInfinity::zero);
            } else {
                require_q(q, 1.0, true, kInf, true, "1 < q < inf");
                require(cond_akon(w, qp));
                A = glue_head(w, alpha(), q);
                B = B_from_A(A, q);
            }
            note_weight("A", A);
            note_weight("B", B);
            auto cd = dual_base(c);
            auto sum = FiniteCouple::sum(cd);
            const std::string qs = one ? "inf" : "q'";
            add("dual of J(X0,X1;0," + std::string(one ? "1" : "q") + ",a)", j_space_dual(c, 0.0, qq, w));
            add("K(X0',X1';0," + qs + ",a~)", k_space(cd, 0.0, qqp, w.reflect()));
            add("K(X0',X0'+X1';0," + qs + ",A~)", k_space(sum, 0.0, qqp, A.reflect()));
            add("J(X0',X0'+X1';0," + qs + ",B~)", j_space(sum, 0.0, qqp, B.reflect(), sc));
            add("X0' + K(X0',X1';0," + qs + ",A~)",
                sum_norm(expr_oracle(cd.leg0()), k_space_oracle(cd, 0.0, qqp, A.reflect()), sc));
            // (X0' + Y)' = X0 ^ Y' with Y the J-space; its dual norm is explicit
            add("X0' + J(X0',X1';0," + qs + ",B~)",
                dual_of(max_oracle(expr_oracle(dual_norm_expr(cd.leg0())), j_space_dual_oracle(cd, 0.0, qqp, B.reflect())), sc));
            if (one) {
                // the restricted identity holds under sup_{(1,e)} B~ < inf
                double sup = log_weight_sup(0.0, B.reflect(), 0.0, 1.0);
                if (std::isfinite(sup))
                    add("J(X0',X0'+X1';0,inf,B~;(1,inf))", j_space(sum, 0.0, kInf, B.reflect(), sc, Range::unit_tail));
                else
                    st.notes.push_back("skipped restricted J identity on (1,inf): sup of B~ over (1,e) is infinite");
            }
            break;
        }
        case TheoremId::ET1: {
            require_q(q, 1.0, false, kInf, true, "1 <= q < inf");
            require(renamed(cond_DT0A(w.flip(), q), "prop_B"));
            auto A = a_from_b(w.flip(), q).flip();
            note_weight("A", A);
            add("K(X0,X1;1,q,B)", k_space(c, 1.0, q, w));
            add("J(X0,X1;1,q,A)", j_space(c, 1.0, q, A, sc));
            break;
        }
        case TheoremId::ET1_1: {
            require_q(q, 1.0, true, kInf, false, "1 < q <= inf");
            require(renamed(cond_aJ(w.flip(), qp), "c1.1"));
            auto B = b_from_a(w.flip(), q).flip();
            note_weight("B", B);
            add("J(X0,X1;1,q,A)", j_space(c, 1.0, q, w, sc));
            add("K(X0,X1;1,q,B)", k_space(c, 1.0, q, B));
            break;
        }
        case TheoremId::EQ1: {
            require_q(q, 1.0, false, kInf, true, "1 <= q < inf");
            require(cond_DT0A(w, q));
            auto a = a_from_b(w, q);
            note_weight("a", a);
            add("K(X0,X1;0,q,b)", k_space(c, 0.0, q, w));
            add("J(X0,X1;0,q,a)", j_space(c, 0.0, q, a, sc));
            break;
        }
        case TheoremId::KS: {
            require_q(q, 1.0, false, kInf, true, "1 <= q < inf");
            require(cond_DT0A1(w, q));
            auto B = glue_tail(w, beta(), q);
            auto A = A_from_B(B, q);
            note_weight("B", B);
            note_weight("A", A);
            auto sum = FiniteCouple::sum(c);
            add("K(X0,X1;0,q,b)", k_space(c, 0.0, q, w));
            add("K(X0,X0+X1;0,q,B)", k_space(sum, 0.0, q, B));
            add("J(X0,X0+X1;0,q,A)", j_space(sum, 0.0, q, A, sc));
            add("X0 + K(X0,X1;0,q,B)", sum_norm(expr_oracle(c.leg0()), k_space_oracle(c, 0.0, q, B), sc));
            add("X0 + J(X0,X1;0,q,A)",
                dual_of(max_oracle(expr_oracle(dual_norm_expr(c.leg0())), j_space_dual_oracle(c, 0.0, q, A)), sc));
            break;
        }
        case TheoremId::JS11: {
            require_q(q, 1.0, true, kInf, false, "1 < q <= inf");
            require(cond_akon(w, qp));
            auto A = glue_head(w, alpha(), q);
            auto B = B_from_A(A, q);
            note_weight("A", A);
            note_weight("B", B);
            auto cap = FiniteCouple::intersection(c);
            add("J(X0,X1;0,q,a)", j_space(c, 0.0, q, w, sc));
            add("J(X0,X0^X1;0,q,A)", j_space(cap, 0.0, q, A, sc));
            add("K(X0,X0^X1;0,q,B)", k_space(cap, 0.0, q, B));
            add("X0 ^ J(X0,X1;0,q,A)", max_norm(leg0_norm(c), j_space(c, 0.0, q, A, sc)));
            add("X0 ^ K(X0,X1;0,q,B)", max_norm(leg0_norm(c), k_space(c, 0.0, q, B)));
            break;
        }
        case TheoremId::E1: {
            require_q(q, 1.0, false, kInf, true, "1 <= q < inf");
            const double th = cfg.theta;
            require(renamed(cond_307(th, q, w), "DC1"));
            auto cd = dual_base(c);
            add("dual of J(X0,X1;theta,q,a)", j_space_dual(c, th, q, w));
            add("K(X1',X0';1-theta,q',1/a)", k_space(FiniteCouple::swapped(cd), 1.0 - th, qp, w.pow(-1.0)));
            break;
        }
        case TheoremId::E2: {
            require_q(q, 1.0, false, kInf, true, "1 <= q < inf");
            const double th = cfg.theta;
            require(renamed(cond_304(th, q, w), "DC2"));
            auto cd = dual_base(c);
            add("J(X0',X1';1-theta,q',1/b)", j_space(cd, 1.0 - th, qp, w.pow(-1.0), sc));
            add("dual of K(X1,X0;theta,q,b)", k_space_dual(FiniteCouple::swapped(c), th, q, w, sc));
            break;
        }
    }
    return st;
}

}  // namespace detail

/// Draws cfg.samples heavy-tailed (Cauchy) vectors of dimension n from cfg.seed.
inline std::vector<Vec> theorem_samples(std::size_t n, const VerifyCfg& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::cauchy_distribution<double> cd(0.0, 1.0);
    std::vector<Vec> out(static_cast<std::size_t>(std::max(0, cfg.samples)), Vec(n));
    for (auto& v : out) {
        for (auto& x : v) x = cd(rng);
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
        for (auto& x : v) x *= cfg.scale;
    }
    return out;
}

/// Certifies a norm equivalence (or a one-sided embedding) on random samples: every side is
/// compared with the reference side; PASS iff each side's ratio spread max/min stays within
/// cfg.spread_bound (embeddings: the ratio target/source stays below cfg.embedding_bound).
inline EquivalenceReport verify_theorem(TheoremId id, const FiniteCouple& c, const SlowVaryingFn& w, double q,
                                        const VerifyCfg& cfg = {}) {
    require_exponent(q);
    if (c.dim() > 6) throw DimensionError("theorem harness supports dimension <= 6");
    if (cfg.samples < 1) throw DomainError("need at least one sample");
    EquivalenceReport rep;
    rep.theorem_id = to_string(id);
    rep.couple = c.to_string();
    rep.weight = w.to_string();
    rep.q = q;
    rep.seed = cfg.seed;
    rep.one_sided = is_embedding(id);
    detail::Statement st;
    try {
        st = detail::build_statement(id, c, w, q, cfg);
    } catch (const detail::SkipStatement& s) {
        rep.status = "SKIP";
        rep.reason = s.reason;
        return rep;
    } catch (const AdmissibilityError& e) {
        rep.status = "SKIP";
        rep.reason = e.what();
        return rep;
    }
    rep.notes = st.notes;
    for (const auto& s : st.sides) rep.sides.push_back(s.name);
    const std::size_t S = st.sides.size();
    auto samples = theorem_samples(c.dim(), cfg);
    rep.sample_count = static_cast<int>(samples.size());
    std::vector<std::vector<NormEval>> evals(samples.size(), std::vector<NormEval>(S));
    detail::parallel_for(static_cast<int>(samples.size()), detail::thread_count(cfg.threads), [&](int i) {
        Vec x = detail::canonical_direction(samples[static_cast<std::size_t>(i)]);
        for (std::size_t k = 0; k < S; ++k) evals[static_cast<std::size_t>(i)][k] = st.sides[k].norm(x);
    });
    rep.ratios.assign(S - 1, Vec(samples.size()));
    rep.min_ratio = kInf;
    rep.max_ratio = 0.0;
    bool finite = true;
    for (std::size_t k = 1; k < S; ++k) {
        double lo = kInf, hi = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double ref = evals[i][0].value, other = evals[i][k].value;
            double r = rep.one_sided ? other / ref : ref / other;
            rep.ratios[k - 1][i] = r;
            finite = finite && std::isfinite(r) && r > 0;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        rep.min_ratio = std::min(rep.min_ratio, lo);
        rep.max_ratio = std::max(rep.max_ratio, hi);
        rep.spread = std::max(rep.spread, hi / lo);
    }
    for (const auto& row : evals)
        for (const auto& e : row) {
            rep.max_restart_disagreement = std::max(rep.max_restart_disagreement, e.disagreement);
            rep.solver_calls += e.solver_calls;
        }
    if (!finite) {
        rep.status = "FAIL";
        rep.reason = "non-finite or non-positive ratio";
    } else if (rep.one_sided) {
        bool ok = rep.max_ratio <= cfg.embedding_bound;
        rep.status = ok ? "PASS" : "FAIL";
        if (!ok) rep.reason = "embedding constant exceeds " + detail::fmt(cfg.embedding_bound);
    } else {
        bool ok = rep.spread <= cfg.spread_bound;
        rep.status = ok ? "PASS" : "FAIL";
        if (!ok) rep.reason = "ratio spread exceeds " + detail::fmt(cfg.spread_bound);
    }
    return rep;
}

inline EquivalenceReport verify_theorem(const std::string& id, const FiniteCouple& c, const SlowVaryingFn& w, double q,
                                        const VerifyCfg& cfg = {}) {
    return verify_theorem(parse_theorem_id(id), c, w, q, cfg);
}

/// For q = 1 and a weighted-l1 couple the (0,1,b;K) norm is the weighted l1 norm with
/// c_i = ||K(e_i, .)||, so its dual norm is max |g_i| / c_i. Returns the coefficients.
inline Vec k_norm_l1_coefficients(const FiniteCouple& c, const SlowVaryingFn& b) {
    if (c.kind() != FiniteCouple::Kind::weighted_l1) throw UnsupportedError("coefficients need a weighted-l1 couple");
    Vec out(c.dim());
    for (std::size_t i = 0; i < c.dim(); ++i) {
        Vec e(c.dim(), 0.0);
        e[i] = 1.0;
        out[i] = k_norm(c, e, InterpParams{0.0, 1.0, b});
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Sequence-space and functional duality checks

struct DualityCheckReport {
    double max_rel_error = 0.0;   // attained value vs closed form
    double max_violation = 0.0;   // random test vectors exceeding the closed form (relative)
    int samples = 0;
};

/// Dual of lambda_{theta,q,w} under sum_m 2^{-m} alpha_m beta_m against lambda_{1-theta,q',1/w}
/// on sequences supported in [-M, M]. For each random alpha the Hoelder-attaining beta is built
/// explicitly (for q = 1 the best unit vector by enumeration) and random beta must not exceed it.
inline DualityCheckReport lambda_duality_check(double theta, double q, const SlowVaryingFn& w, int M, int samples,
                                               std::uint64_t seed = 7) {
    require_exponent(q);
    if (std::isinf(q)) throw DomainError("lambda duality check needs q < inf");
    if (M < 0 || samples < 1) throw DomainError("need M >= 0 and at least one sample");
    const double qp = conjugate(q);
    const std::size_t L = static_cast<std::size_t>(2 * M + 1);
    std::mt19937_64 rng(seed);
    std::cauchy_distribution<double> cd;
    DualityCheckReport rep;
    rep.samples = samples;
    SlowVaryingFn winv = w.pow(-1.0);
    auto pairing = [&](const Vec& a, const Vec& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < L; ++k) s += std::exp2(-static_cast<double>(static_cast<int>(k) - M)) * a[k] * b[k];
        return s;
    };
    for (int s = 0; s < samples; ++s) {
        Vec alpha(L);
        for (auto& x : alpha) x = cd(rng);
        const double target = lambda_norm({-M, alpha, 1.0 - theta, qp, winv});
        // y_m = 2^{-m(1-theta)} w(2^m)^{-1} alpha_m; beta_m = x_m / (2^{-m theta} w(2^m))
        Vec y(L), beta(L, 0.0);
        for (std::size_t k = 0; k < L; ++k) {
            const double m = static_cast<double>(static_cast<int>(k) - M);
            y[k] = std::exp(-(1.0 - theta) * m * kLn2 - w.log_eval_u(m * kLn2)) * alpha[k];
        }
        if (q == 1.0) {
            std::size_t arg = 0;
            double best = -1.0;
            for (std::size_t k = 0; k < L; ++k) {
                Vec e(L, 0.0);
                e[k] = 1.0;
                double r = std::fabs(pairing(alpha, e)) / lambda_norm({-M, e, theta, q, w});
                if (r > best) best = r, arg = k;
            }
            beta[arg] = alpha[arg] >= 0 ? 1.0 : -1.0;
        } else {
            for (std::size_t k = 0; k < L; ++k) {
                const double m = static_cast<double>(static_cast<int>(k) - M);
                double x = (y[k] >= 0 ? 1.0 : -1.0) * std::pow(std::fabs(y[k]), qp - 1.0);
                beta[k] = x / std::exp(-theta * m * kLn2 + w.log_eval_u(m * kLn2));
            }
        }
        double attained = pairing(alpha, beta) / lambda_norm({-M, beta, theta, q, w});
        rep.max_rel_error = std::max(rep.max_rel_error, std::fabs(attained - target) / target);
        for (int r = 0; r < 8; ++r) {
            Vec b(L);
            for (auto& x : b) x = cd(rng);
            double v = std::fabs(pairing(alpha, b)) / lambda_norm({-M, b, theta, q, w});
            rep.max_violation = std::max(rep.max_violation, v / target - 1.0);
        }
    }
    return rep;
}

struct FunctionalDualityReport {
    double max_rel_error = 0.0;
    std::vector<double> ts;
    std::vector<double> errors;  // worst relative error per t
};

namespace detail {

template <class Sup, class Exact>
FunctionalDualityReport functional_duality(const FiniteCouple& c, const std::vector<double>& ts, int samples,
                                           std::uint64_t seed, Sup sup, Exact exact) {
    if (c.kind() != FiniteCouple::Kind::weighted_l1 && c.kind() != FiniteCouple::Kind::weighted_linf)
        throw UnsupportedError("functional duality check needs a weighted-l1 or weighted-linf couple");
    auto d = dual_couple(c);
    std::mt19937_64 rng(seed);
    std::cauchy_distribution<double> cd;
    FunctionalDualityReport rep;
    for (double t : ts) {
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
            Vec g(c.dim());
            for (auto& x : g) x = cd(rng);
            double e = exact(d, g, t), v = sup(c, g, 1.0 / t);
            worst = std::max(worst, e == 0.0 ? std::fabs(v) : std::fabs(v - e) / e);
        }
        rep.ts.push_back(t);
        rep.errors.push_back(worst);
        rep.max_rel_error = std::max(rep.max_rel_error, worst);
    }
    return rep;
}

}  // namespace detail

/// sup over f of <g, f> / J(f, 1/t; c) by LP against K(g, t) on the dual couple.
inline FunctionalDualityReport dual_k_via_j_check(const FiniteCouple& c, const std::vector<double>& ts, int samples,
                                                  std::uint64_t seed = 7) {
    return detail::functional_duality(
        c, ts, samples, seed, [](const FiniteCouple& cc, const Vec& g, double s) { return sup_ratio_over_j(cc, g, s); },
        [](const FiniteCouple& d, const Vec& g, double t) { return k_functional(d, g, t); });
}

/// sup over f of <g, f> / K(f, 1/t; c) by LP against J(g, t) on the dual couple.
inline FunctionalDualityReport dual_j_via_k_check(const FiniteCouple& c, const std::vector<double>& ts, int samples,
                                                  std::uint64_t seed = 7) {
    return detail::functional_duality(
        c, ts, samples, seed, [](const FiniteCouple& cc, const Vec& g, double s) { return sup_ratio_over_k(cc, g, s); },
        [](const FiniteCouple& d, const Vec& g, double t) { return j_functional(d, g, t); });
}

/// 2^m for m = lo..hi.
inline std::vector<double> dyadic_grid(int lo, int hi) {
    std::vector<double> out;
    for (int m = lo; m <= hi; ++m) out.push_back(std::exp2(m));
    return out;
}

}  // namespace ilab
