#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "common.hpp"
#include "lp.hpp"

namespace ilab {

/// Value of a norm at y; writes a subgradient if grad is non-null.
using NormOracle = std::function<double(const Vec& y, Vec* grad)>;

struct SolverCfg {
    int max_iter = 3000;
    int restarts = 3;
    double rel_tol = 1e-7;
    double disagreement = 0.01;
    std::uint64_t seed = 12345;
};

struct SimplexMinResult {
    double value = kInf;  // best N found (upper bound on the minimum)
    double lower = 0.0;   // certified lower bound on the minimum
    Vec y;
    int iterations = 0;
};

/// Feasible set of the level method: the standard simplex or the unit box.
enum class LevelSet { simplex, box };

namespace detail {

/// Euclidean projection onto {x >= 0, sum x = 1}.
inline void project_simplex(Vec& x) {
    Vec s = x;
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        cum += s[k];
        double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (s[k] - t > 0) tau = t;
    }
    for (auto& v : x) v = std::max(v - tau, 0.0);
    double sum = std::accumulate(x.begin(), x.end(), 0.0);
    if (sum > 0)
        for (auto& v : x) v /= sum;
}

/// Affine minorant F(x) >= c + <g, x>.
struct Cut {
    Vec g;
    double c = 0.0;
};

/// Minimum over the set of the single cut.
inline double cut_min(const Cut& k, LevelSet set) {
    if (set == LevelSet::simplex) return k.c + *std::min_element(k.g.begin(), k.g.end());
    double v = k.c;
    for (double x : k.g) v += std::min(x, 0.0);
    return v;
}

inline void project(Vec& x, LevelSet set) {
    if (set == LevelSet::simplex) {
        project_simplex(x);
        return;
    }
    for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
}

struct ModelMin {
    double value = -kInf;
    Vec x;
};

/// min of max_k (c_k + <g_k, x>) over the set intersected with [lo, hi], by LP. The cut constants are
/// perturbed at the 1e-13 level to keep the tableau away from degenerate cycling.
inline std::optional<ModelMin> cut_model_min(const std::vector<Cut>& cuts, LevelSet set, const Vec& lo, const Vec& hi) {
    if (cuts.empty()) return std::nullopt;
    const std::size_t n = lo.size();
    LinearProgram lp;
    Affine z = lp.add_free_var();
    for (const auto& [j, c] : z.terms) lp.set_cost(j, c);
    Affine sum;
    double lo_sum = 0.0;
    std::vector<int> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = lp.add_var();
        sum += Affine::var(ys[i]);
        lo_sum += lo[i];
        lp.add_row(Affine::var(ys[i]) - Affine::value(hi[i] - lo[i]), Relation::le);
    }
    if (set == LevelSet::simplex) lp.add_row(sum - Affine::value(1.0 - lo_sum), Relation::eq);
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        double c = cuts[k].c;
        for (std::size_t i = 0; i < n; ++i) c += cuts[k].g[i] * lo[i];
        c += 1e-13 * static_cast<double>(k + 1) * (1.0 + std::fabs(c));
        Affine row = Affine::value(c) - z;
        for (std::size_t i = 0; i < n; ++i) row += Affine::var(ys[i], cuts[k].g[i]);
        lp.add_row(row, Relation::le);
    }
    LinearProgram::Result r;
    try {
        r = lp.solve();
    } catch (const SolverError&) {
        return std::nullopt;
    }
    if (r.status != LinearProgram::Result::Status::optimal) return std::nullopt;
    ModelMin out;
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = lo[i] + r.x[static_cast<std::size_t>(ys[i])];
    project(out.x, set);
    // true model value at the returned point, without the perturbation
    out.value = -kInf;
    for (const auto& k : cuts) {
        double v = k.c;
        for (std::size_t i = 0; i < n; ++i) v += k.g[i] * out.x[i];
        out.value = std::max(out.value, v);
    }
    return out;
}

struct LevelResult {
    double value = kInf, lower = -kInf;
    Vec x;
    int iterations = 0;
};

/// Trust-region cutting-plane (bundle) method for a convex F on the simplex or the unit box. F(x, g)
/// returns the value and writes a subgradient. The initial points are evaluated first; the cut
/// model over the whole set gives the certified lower bound.
template <class F>
LevelResult level_method(F&& fun, LevelSet set, const std::vector<Vec>& initial, Vec x, const SolverCfg& cfg) {
    const std::size_t k = x.size();
    LevelResult res;
    std::vector<Cut> cuts;
    Cut best_cut;
    Vec gx(k);
    auto visit = [&](const Vec& p) {
        double v = fun(p, gx);
        Cut c{gx, v};
        for (std::size_t j = 0; j < k; ++j) c.c -= gx[j] * p[j];
        res.lower = std::max(res.lower, cut_min(c, set));
        if (v < res.value) {
            res.value = v;
            res.x = p;
            best_cut = c;
        }
        cuts.push_back(std::move(c));
        if (cuts.size() > 60) {
            cuts.erase(cuts.begin(), cuts.begin() + 10);
            cuts.push_back(best_cut);
        }
        return v;
    };
    for (const auto& p : initial) visit(p);
    project(x, set);
    visit(x);
    const Vec zero(k, 0.0), one(k, 1.0);
    double radius = 0.5;
    auto gap_ok = [&] { return res.value - res.lower <= cfg.rel_tol * std::fabs(res.value); };
    for (int it = 0; it < cfg.max_iter && !gap_ok(); ++it) {
        res.iterations = it + 1;
        if (auto g = cut_model_min(cuts, set, zero, one)) res.lower = std::max(res.lower, std::min(g->value, res.value));
        if (gap_ok()) break;
        Vec lo(k), hi(k);
        for (std::size_t j = 0; j < k; ++j) {
            lo[j] = std::max(0.0, res.x[j] - radius);
            hi[j] = std::min(1.0, res.x[j] + radius);
        }
        auto m = cut_model_min(cuts, set, lo, hi);
        if (!m) break;
        const double center = res.value, pred = center - m->value;
        if (pred <= 0.0) {
            radius = std::min(1.0, 2.0 * radius);
            if (radius >= 1.0) break;
            continue;
        }
        double v = visit(m->x);
        double ratio = (center - v) / pred;
        if (ratio > 0.75)
            radius = std::min(1.0, 2.0 * radius);
        else if (ratio < 0.0)
            radius = std::max(1e-9, 0.5 * radius);
    }
    res.lower = std::min(res.lower, res.value);
    return res;
}

}  // namespace detail

/// Minimizes a positively homogeneous convex N over {y >= 0, <a, y> = 1} (a >= 0; coordinates
/// with a_i = 0 stay at 0), working in x = a y on the standard simplex. Every subgradient g of N
/// satisfies N(y) >= <g, y>, which gives the lower bound.
inline SimplexMinResult minimize_on_simplex(const NormOracle& N, const Vec& a, const Vec& start, const SolverCfg& cfg) {
    const std::size_t n = a.size();
    std::vector<std::size_t> supp;
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] > 0) supp.push_back(i);
    if (supp.empty()) throw DomainError("simplex minimization needs a nonzero functional");
    const std::size_t k = supp.size();
    auto to_y = [&](const Vec& x) {
        Vec y(n, 0.0);
        for (std::size_t j = 0; j < k; ++j) y[supp[j]] = x[j] / a[supp[j]];
        return y;
    };
    Vec g;
    auto fun = [&](const Vec& x, Vec& gx) {
        double v = N(to_y(x), &g);
        for (std::size_t j = 0; j < k; ++j) gx[j] = g[supp[j]] / a[supp[j]];
        return v;
    };
    Vec x(k);
    double xs = 0.0;
    for (std::size_t j = 0; j < k; ++j) xs += x[j] = std::max(start[supp[j]] * a[supp[j]], 0.0);
    if (!(xs > 0))
        std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(k));
    else
        for (auto& v : x) v /= xs;
    std::vector<Vec> vertices;
    for (std::size_t j = 0; j < k; ++j) {
        vertices.emplace_back(k, 0.0);
        vertices.back()[j] = 1.0;
    }
    SolverCfg c = cfg;
    if (k == 1) c.max_iter = 0;
    auto r = detail::level_method(fun, LevelSet::simplex, vertices, x, c);
    SimplexMinResult res;
    res.value = r.value;
    res.lower = k == 1 ? r.value : std::max(r.lower, 0.0);
    res.y = to_y(r.x);
    res.iterations = r.iterations;
    return res;
}

/// Minimizes a convex F over the box [0,1]^n from several starts; returns the best run.
/// Throws SolverError when the runs disagree by more than cfg.disagreement.
inline detail::LevelResult minimize_on_box(const std::function<double(const Vec&, Vec&)>& F, std::size_t n,
                                           const SolverCfg& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<Vec> corners{Vec(n, 0.0), Vec(n, 1.0)};
    detail::LevelResult best;
    std::vector<double> vals;
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        Vec x(n, 0.5);
        if (r > 0)
            for (auto& v : x) v = ud(rng);
        auto res = detail::level_method(F, LevelSet::box, corners, x, cfg);
        vals.push_back(res.value);
        if (res.value < best.value) best = res;
        else best.lower = std::max(best.lower, res.lower);
    }
    double lo = *std::min_element(vals.begin(), vals.end()), hi = *std::max_element(vals.begin(), vals.end());
    if (hi > lo * (1.0 + cfg.disagreement) + 1e-300)
        throw SolverError("box minimization restarts disagree: " + std::to_string(lo) + " vs " + std::to_string(hi));
    return best;
}

struct DualNormResult {
    double value = 0.0;  // attained ratio <g, f*> / N(f*)
    double upper = 0.0;  // certified upper bound on the supremum
    Vec maximizer;       // f* with N(f*) = 1
    std::vector<double> restart_values;
};

/// sup over f != 0 of <g, f> / N(f) for a lattice norm N, as 1 / min{N(f) : <|g|, f> = 1, f >= 0}
/// with the sign of f aligned to g. Independent restarts must agree within cfg.disagreement.
inline DualNormResult dual_norm(const Vec& g, const NormOracle& N, const SolverCfg& cfg = {}) {
    const std::size_t n = g.size();
    DualNormResult out;
    Vec a(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::fabs(g[i]);
        if (!std::isfinite(g[i])) throw DomainError("functional entries must be finite");
        any = any || a[i] > 0;
    }
    if (!any) {
        out.maximizer.assign(n, 0.0);
        return out;
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ud(0.05, 1.0);
    SimplexMinResult best;
    double best_lower = 0.0;
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        Vec start(n, 1.0);
        if (r == 1)
            for (std::size_t i = 0; i < n; ++i) start[i] = a[i];
        if (r >= 2)
            for (auto& s : start) s = ud(rng);
        auto res = minimize_on_simplex(N, a, start, cfg);
        out.restart_values.push_back(1.0 / res.value);
        best_lower = std::max(best_lower, res.lower);
        if (res.value < best.value) best = res;
    }
    double lo = *std::min_element(out.restart_values.begin(), out.restart_values.end());
    double hi = *std::max_element(out.restart_values.begin(), out.restart_values.end());
    if (hi > lo * (1.0 + cfg.disagreement))
        throw SolverError("dual norm restarts disagree: " + std::to_string(lo) + " vs " + std::to_string(hi));
    out.value = 1.0 / best.value;
    out.upper = best_lower > 0 ? 1.0 / best_lower : kInf;
    out.maximizer = best.y;
    for (std::size_t i = 0; i < n; ++i)
        if (g[i] < 0) out.maximizer[i] = -out.maximizer[i];
    double nv = N(best.y, nullptr);
    if (nv > 0)
        for (auto& v : out.maximizer) v /= nv;
    return out;
}

}  // namespace ilab
