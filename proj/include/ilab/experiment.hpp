#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dualcheck.hpp"

namespace ilab {

/// One summary line: STATUS ID min max.
struct CheckLine {
    std::string status, id;
    double lo = 0.0, hi = 0.0;
};

/// 17 significant digits, as in the CSV files.
inline std::string fmt17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string summary_line(const CheckLine& c) { return c.status + " " + c.id + " " + fmt17(c.lo) + " " + fmt17(c.hi); }

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + quote(r[i]);
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

    static std::string quote(const std::string& cell) {
        if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
        std::string q = "\"";
        for (char ch : cell) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct JobResult {
    std::string csv;                                        // main CSV (may be empty)
    std::vector<std::pair<std::string, std::string>> files; // extra CSVs: relative path, content
    std::vector<CheckLine> lines;
    std::vector<std::string> notes;
};

/// Exit code of a set of summary lines: 0 iff every non-SKIP line passed.
inline int exit_code(const std::vector<CheckLine>& lines) {
    for (const auto& l : lines)
        if (l.status == "FAIL") return 1;
    return 0;
}

using Params = std::map<std::string, std::string>;

namespace detail {

inline const std::string* find_param(const Params& p, const std::string& k) {
    auto it = p.find(k);
    return it == p.end() || it->second.empty() ? nullptr : &it->second;
}

inline std::string need(const Params& p, const std::string& k) {
    if (auto* v = find_param(p, k)) return *v;
    throw ParseError("missing parameter '" + k + "'", 0);
}

inline double to_double(const std::string& s, const std::string& what) {
    if (s == "inf" || s == "Inf" || s == "infinity") return kInf;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError("bad number '" + s + "' for " + what, 0);
    }
    if (used != s.size()) throw ParseError("bad number '" + s + "' for " + what, used);
    return v;
}

inline double num(const Params& p, const std::string& k, std::optional<double> dflt = std::nullopt) {
    if (auto* v = find_param(p, k)) return to_double(*v, k);
    if (dflt) return *dflt;
    throw ParseError("missing parameter '" + k + "'", 0);
}

inline long integer(const Params& p, const std::string& k, long dflt) {
    if (auto* v = find_param(p, k)) {
        double d = to_double(*v, k);
        if (d != std::floor(d)) throw ParseError("parameter '" + k + "' must be an integer", 0);
        return static_cast<long>(d);
    }
    return dflt;
}

/// "lo:hi:step" in u = log x.
inline std::vector<double> parse_grid(const std::string& s) {
    auto a = s.find(':'), b = s.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) throw ParseError("grid must be lo:hi:step", 0);
    double lo = to_double(s.substr(0, a), "grid"), hi = to_double(s.substr(a + 1, b - a - 1), "grid"),
           st = to_double(s.substr(b + 1), "grid");
    if (!(st > 0) || !(hi >= lo)) throw ParseError("grid needs lo <= hi and step > 0", b);
    std::vector<double> us;
    const long n = static_cast<long>(std::floor((hi - lo) / st + 1e-9));
    for (long k = 0; k <= n; ++k) us.push_back(lo + st * static_cast<double>(k));
    return us;
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(item, "list"));
    if (out.empty()) throw ParseError("empty list", 0);
    return out;
}

inline InterpParams interp_params(const Params& p) {
    InterpParams ip;
    ip.theta = num(p, "theta", 0.0);
    ip.q = num(p, "q", 1.0);
    ip.v = parse_weight(need(p, "weight"));
    ip.kind = parse_norm_kind(find_param(p, "kind") ? *find_param(p, "kind") : "K");
    ip.range = parse_range(find_param(p, "range") ? *find_param(p, "range") : "full");
    return ip;
}

inline SolverCfg solver_cfg(const Params& p) {
    SolverCfg c;
    c.max_iter = static_cast<int>(integer(p, "max_iter", c.max_iter));
    c.restarts = static_cast<int>(integer(p, "restarts", c.restarts));
    c.rel_tol = num(p, "rel_tol", c.rel_tol);
    c.seed = static_cast<std::uint64_t>(integer(p, "solver_seed", static_cast<long>(c.seed)));
    return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Jobs

inline JobResult job_transform(const Params& p) {
    TransformSpec t;
    const std::string op = detail::need(p, "op");
    t.kind = parse_transform_kind(op);
    t.q = detail::num(p, "q", 2.0);
    t.source = parse_weight(detail::need(p, "weight"));
    if (auto* a = detail::find_param(p, "aux")) t.auxiliary = parse_weight(*a);
    auto out = apply_transform(t);
    auto us = detail::parse_grid(detail::find_param(p, "grid") ? *detail::find_param(p, "grid") : "-20:20:0.5");
    Csv csv({"x", "source", "result"});
    double lo = kInf, hi = -kInf;
    for (double u : us) {
        double r = out.eval_u(u);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        csv.row({fmt17(std::exp(u)), fmt17(t.source.eval_u(u)), fmt17(r)});
    }
    JobResult res;
    res.csv = csv.str();
    res.lines.push_back({"PASS", "transform:" + op, lo, hi});
    res.notes.push_back("result = " + out.to_string());
    return res;
}

inline JobResult job_identity103(const Params& p) {
    auto b = parse_weight(detail::need(p, "weight"));
    const double q = detail::num(p, "q", 2.0), tol = detail::num(p, "tol", 1e-6);
    auto xs = log_points(detail::num(p, "m_lo", -30.0), detail::num(p, "m_hi", 30.0), static_cast<std::size_t>(detail::integer(p, "points", 50)));
    Csv csv({"x", "deviation"});
    double lo = kInf, hi = 0.0;
    for (double x : xs) {
        double d = check_identity_103(b, q, std::vector<double>{x});
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        csv.row({fmt17(x), fmt17(d)});
    }
    JobResult res;
    res.csv = csv.str();
    res.lines.push_back({hi < tol ? "PASS" : "FAIL", "identity103", lo, hi});
    res.notes.push_back("max_dev " + fmt17(hi) + (hi < tol ? " PASS" : " FAIL"));
    return res;
}

inline JobResult job_kfunctional(const Params& p) {
    auto c = parse_couple(detail::need(p, "couple"));
    Vec f = parse_vec(detail::need(p, "f"));
    std::vector<double> ts = detail::find_param(p, "grid") ? std::vector<double>{} : detail::parse_list(detail::need(p, "t"));
    if (ts.empty())
        for (double u : detail::parse_grid(*detail::find_param(p, "grid"))) ts.push_back(std::exp(u));
    Csv csv({"t", "K", "J"});
    double lo = kInf, hi = -kInf;
    for (double t : ts) {
        double k = k_functional(c, f, t), j = j_functional(c, f, t);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
        csv.row({fmt17(t), fmt17(k), fmt17(j)});
    }
    JobResult res;
    res.csv = csv.str();
    res.lines.push_back({"PASS", "k-functional", lo, hi});
    return res;
}

inline JobResult job_norm(const Params& p) {
    auto c = parse_couple(detail::need(p, "couple"));
    Vec f = parse_vec(detail::need(p, "f"));
    auto ip = detail::interp_params(p);
    double value = 0.0, upper = 0.0;
    if (ip.kind == NormKind::K) {
        value = upper = k_norm(c, f, ip);
    } else {
        if (ip.range != Range::full) throw UnsupportedError("J-norms are evaluated on the full range");
        auto r = j_norm_exact(c, f, ip, detail::solver_cfg(p));
        value = r.value;
        upper = r.upper;
    }
    Csv csv({"kind", "theta", "q", "weight", "value", "bound"});
    csv.row({ip.kind == NormKind::K ? "K" : "J", fmt17(ip.theta), fmt17(ip.q), ip.v.to_string(), fmt17(value), fmt17(upper)});
    JobResult res;
    res.csv = csv.str();
    res.lines.push_back({"PASS", "norm", value, upper});
    return res;
}

/// Dual norm of the K- or J-space norm at a functional g.
inline JobResult job_dual(const Params& p) {
    auto c = parse_couple(detail::need(p, "couple"));
    Vec g = parse_vec(detail::need(p, "g"));
    auto ip = detail::interp_params(p);
    detail::check_dim(c, g);
    double value = 0.0, upper = 0.0;
    if (ip.kind == NormKind::K) {
        auto r = dual_norm(g, k_space_oracle(c, ip.theta, ip.q, ip.v, ip.range), detail::solver_cfg(p));
        value = r.value;
        upper = r.upper;
    } else {
        value = upper = j_space_dual_oracle(c, ip.theta, ip.q, ip.v)(g, nullptr);
    }
    Csv csv({"kind", "theta", "q", "weight", "dual_norm", "upper_bound"});
    csv.row({ip.kind == NormKind::K ? "K" : "J", fmt17(ip.theta), fmt17(ip.q), ip.v.to_string(), fmt17(value), fmt17(upper)});
    JobResult res;
    res.csv = csv.str();
    res.lines.push_back({"PASS", "dual", value, upper});
    return res;
}

inline std::string report_csv(const EquivalenceReport& r) {
    Csv csv({"sample", "side", "ratio"});
    for (std::size_t k = 0; k < r.ratios.size(); ++k)
        for (std::size_t s = 0; s < r.ratios[k].size(); ++s) csv.row({std::to_string(s), r.sides[k + 1], fmt17(r.ratios[k][s])});
    return csv.str();
}

inline std::vector<std::string> report_notes(const EquivalenceReport& r) {
    std::vector<std::string> out;
    if (!r.reason.empty()) out.push_back(r.theorem_id + ": " + r.reason);
    if (!r.sides.empty()) out.push_back("reference side: " + r.sides[0]);
    for (const auto& n : r.notes) out.push_back(n);
    if (r.status != "SKIP")
        out.push_back("spread " + fmt17(r.spread) + ", solver calls " + std::to_string(r.solver_calls) + ", max restart disagreement " +
                      fmt17(r.max_restart_disagreement));
    return out;
}

inline VerifyCfg verify_cfg(const Params& p) {
    VerifyCfg v;
    v.samples = static_cast<int>(detail::integer(p, "samples", v.samples));
    v.seed = static_cast<std::uint64_t>(detail::integer(p, "seed", static_cast<long>(v.seed)));
    v.spread_bound = detail::num(p, "bound", v.spread_bound);
    v.embedding_bound = detail::num(p, "bound", v.embedding_bound);
    v.scale = detail::num(p, "scale", v.scale);
    v.theta = detail::num(p, "theta", v.theta);
    if (auto* a = detail::find_param(p, "aux")) v.aux = parse_weight(*a);
    v.solver = detail::solver_cfg(p);
    v.threads = static_cast<int>(detail::integer(p, "threads", 0));
    return v;
}

inline JobResult job_theorem(const Params& p) {
    auto id = parse_theorem_id(detail::need(p, "id"));
    auto c = parse_couple(detail::need(p, "couple"));
    auto w = parse_weight(detail::need(p, "weight"));
    auto r = verify_theorem(id, c, w, detail::num(p, "q"), verify_cfg(p));
    JobResult res;
    res.csv = report_csv(r);
    res.lines.push_back({r.status, r.theorem_id, r.status == "SKIP" ? 0.0 : r.min_ratio, r.status == "SKIP" ? 0.0 : r.max_ratio});
    res.notes = report_notes(r);
    return res;
}

// ---------------------------------------------------------------------------------------------
// Suites

namespace detail {

inline CheckLine close_check(const std::string& id, double got, double want, double tol) {
    bool ok = std::isfinite(got) && std::fabs(got - want) <= tol * std::max(1.0, std::fabs(want));
    return {ok ? "PASS" : "FAIL", id, got, want};
}

/// Checks the value of a lazily built quantity; library errors become a FAIL line.
inline void golden(std::vector<CheckLine>& out, const std::string& id, const std::function<double()>& f, double want, double tol = 1e-12) {
    try {
        out.push_back(close_check("golden:" + id, f(), want, tol));
    } catch (const std::exception&) {
        out.push_back({"FAIL", "golden:" + id, std::numeric_limits<double>::quiet_NaN(), want});
    }
}

/// Property line: PASS when the worst deviation stays below tol.
inline CheckLine bound_check(const std::string& id, double lo, double hi, double tol) {
    return {std::isfinite(hi) && hi <= tol ? "PASS" : "FAIL", "prop:" + id, lo, hi};
}

inline Vec cauchy_vec(std::mt19937_64& rng, std::size_t n) {
    std::cauchy_distribution<double> cd;
    Vec f(n);
    for (auto& x : f) x = cd(rng);
    return f;
}

inline FiniteCouple random_couple(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> ud(-3.0, 3.0);
    Vec w0(n), w1(n);
    for (auto& x : w0) x = std::exp(ud(rng));
    for (auto& x : w1) x = std::exp(ud(rng));
    return (rng() & 1) ? FiniteCouple::weighted_l1(w0, w1) : FiniteCouple::weighted_linf(w0, w1);
}

}  // namespace detail

/// Closed-form values the library must reproduce.
inline std::vector<CheckLine> golden_suite() {
    using detail::golden;
    std::vector<CheckLine> out;
    const double e = std::exp(1.0);
    auto w = [](const char* s) { return parse_weight(s); };
    golden(out, "brokenlog_0_-1_at_e", [&] { return w("brokenlog:0:-1").eval(e); }, 0.5);
    golden(out, "brokenlog_0_-1_at_half", [&] { return w("brokenlog:0:-1").eval(0.5); }, 1.0);
    golden(out, "explog_at_e4", [&] { return w("explog:0.5:-1").eval(std::exp(4.0)); }, std::exp(-2.0));
    golden(out, "pow_brokenlog_at_e", [&] { return w("brokenlog:1:-1").pow(2.0).eval(e); }, 0.25);
    golden(out, "product_of_constants", [&] { return (w("const:2") * w("const:3")).eval(7.0); }, 6.0);
    golden(out, "reflect_at_inv_e", [&] { return w("brokenlog:0:-2").reflect().eval(1.0 / e); }, 4.0);
    golden(out, "reflect_constant", [&] { return w("const:4").reflect().eval(3.0); }, 0.25);
    golden(out, "smooth_constant", [&] { return smooth(w("const:1")).eval(3.7); }, 1.0);
    golden(out, "derivative_glued_at_half", [&] { return derivative(w("glue(brokenlog:1:0|brokenlog:0:-1|ac)"), 0.5); }, -2.0);
    golden(out, "derivative_glued_at_e", [&] { return derivative(w("glue(brokenlog:1:0|brokenlog:0:-1|ac)"), e); }, -0.25 / e);
    golden(out, "integral_tail", [&] { return integral_dt_over_t(w("brokenlog:0:-2"), 1.0, kInf).value; }, 1.0, 1e-9);
    golden(out, "integral_head", [&] { return integral_dt_over_t(w("brokenlog:-2:0"), 0.0, 1.0).value; }, 1.0, 1e-9);
    golden(out, "weighted_norm_q1", [&] { return weighted_Lq_norm(Evaluable::min_one_t(), 0.0, 1.0, w("brokenlog:0:-2")).value; }, 2.0, 1e-9);
    golden(out, "weighted_norm_sup", [&] { return weighted_Lq_norm(Evaluable::min_one_t(), 0.0, kInf, w("const:1")).value; }, 1.0, 1e-9);
    golden(out, "tail_B_at_one", [&] { return tail_B(w("brokenlog:0:-2"), 1.0, 1.0); }, 1.0, 1e-9);
    golden(out, "head_A_at_one", [&] { return head_A(w("brokenlog:1:0"), 2.0, 1.0); }, 1.0, 1e-9);
    golden(out, "a_from_b_q2_at_inv_e", [&] { return a_from_b(w("brokenlog:0:-1"), 2.0).eval(1.0 / e); }, 2.0, 1e-9);
    golden(out, "a_from_b_q2_at_e", [&] { return a_from_b(w("brokenlog:0:-1"), 2.0).eval(e); }, 1.0, 1e-9);
    golden(out, "a_from_b_q1_at_e", [&] { return a_from_b(w("brokenlog:0:-2"), 1.0).eval(e); }, 0.5, 1e-9);
    golden(out, "a_from_b_q1_at_inv_e", [&] { return a_from_b(w("brokenlog:0:-2"), 1.0).eval(1.0 / e); }, 2.0, 1e-9);
    golden(out, "b_from_a_deriv_at_half", [&] { return b_from_a_deriv(w("glue(brokenlog:1:0|brokenlog:0:-1|ac)")).eval(0.5); }, 1.0);
    golden(out, "b_from_a_deriv_at_e", [&] { return b_from_a_deriv(w("glue(brokenlog:1:0|brokenlog:0:-1|ac)")).eval(e); }, 0.25);
    golden(out, "A_from_glued_B_at_inv_e",
           [&] { return A_from_B(glue_tail(w("brokenlog:-2:-2"), w("const:1"), 1.0), 1.0).eval(1.0 / e); }, 2.0, 1e-9);
    golden(out, "cond_304_value", [&] { return cond_304(0.0, 1.0, w("brokenlog:0:-2")).value; }, 2.0, 1e-9);
    golden(out, "identity103_deviation", [&] { return check_identity_103(w("brokenlog:0:-1"), 2.0, log_points(-30, 30, 50)); }, 0.0, 1e-6);
    const auto c = FiniteCouple::weighted_l1({1, 2}, {3, 1});
    golden(out, "K_functional", [&] { return k_functional(c, {1, -1}, 0.5); }, 1.5);
    golden(out, "J_functional", [&] { return j_functional(c, {1, 0}, 2.0); }, 6.0);
    golden(out, "K_large_t_is_leg0", [&] { return k_functional(c, {1, -1}, std::exp2(40)); }, 3.0);
    golden(out, "dual_couple_leg0", [&] { return norm_eval(*dual_couple(c).leg0(), {3, 4}); }, 3.0);
    golden(out, "dual_couple_leg1", [&] { return norm_eval(*dual_couple(c).leg1(), {3, 4}); }, 4.0);
    golden(out, "lambda_norm_sup", [&] {
        LambdaSeq a{-10, Vec(21), 0.0, kInf, SlowVaryingFn::constant(1.0)};
        for (int m = -10; m <= 10; ++m) a.values[static_cast<std::size_t>(m + 10)] = std::min(1.0, std::exp2(m));
        return lambda_norm(a);
    }, 1.0);
    golden(out, "lambda_norm_single", [&] { return lambda_norm(LambdaSeq{3, {5.0}, 0.0, 1.0, SlowVaryingFn::constant(1.0)}); }, 5.0);
    golden(out, "lambda_norm_geometric", [&] { return lambda_norm(LambdaSeq{0, {1, 1, 1, 1}, 1.0, 1.0, SlowVaryingFn::constant(1.0)}); }, 1.875);
    golden(out, "k_norm_scalar", [&] {
        return k_norm(FiniteCouple::weighted_l1({1.0}, {1.0}), {1.0}, InterpParams{0.0, 1.0, w("brokenlog:0:-2")});
    }, 2.0, 1e-9);
    golden(out, "mind_constants_c1", [&] { return mind_constants(w("const:1")).c1; }, 0.5);
    golden(out, "mind_constants_c2", [&] { return mind_constants(w("const:1")).c2; }, 2.0);
    golden(out, "dual_norm_scalar", [&] {
        return dual_norm({3.0}, k_space_oracle(FiniteCouple::weighted_l1({1.0}, {1.0}), 0.0, 1.0, w("brokenlog:0:-2"))).value;
    }, 1.5, 1e-9);
    golden(out, "skip_on_failed_condition", [&] {
        VerifyCfg vc;
        vc.samples = 3;
        return verify_theorem(TheoremId::DT0S, c, w("const:1"), 1.0, vc).status == "SKIP" ? 1.0 : 0.0;
    }, 1.0);
    return out;
}

/// Seeded invariant batteries. Each line reports the range of the measured deviation.
inline std::vector<CheckLine> properties_suite(std::uint64_t seed) {
    using detail::bound_check;
    std::vector<CheckLine> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lt(-6.0, 6.0);
    auto run = [&](const std::string& id, double tol, const std::function<std::pair<double, double>()>& f) {
        try {
            auto [lo, hi] = f();
            out.push_back(bound_check(id, lo, hi, tol));
        } catch (const std::exception&) {
            out.push_back({"FAIL", "prop:" + id, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()});
        }
    };
    auto track = [](double& lo, double& hi, double d) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    };

    run("k_functional_vs_brute_force", 1e-6, [&] {
        double lo = kInf, hi = 0.0;
        for (int k = 0; k < 60; ++k) {
            auto c = detail::random_couple(rng, 1 + k % 3);
            Vec f = detail::cauchy_vec(rng, c.dim());
            double t = std::exp(lt(rng)), exact = k_functional(c, f, t);
            track(lo, hi, std::fabs(brute_force_k(c, f, t) - exact) / (1 + exact));
        }
        return std::pair{lo, hi};
    });
    run("k_functional_symmetry_monotonicity_kj", 1e-12, [&] {
        double lo = kInf, hi = 0.0;
        for (int k = 0; k < 20; ++k) {
            auto c = detail::random_couple(rng, 3);
            auto sw = FiniteCouple::swapped(c);
            Vec f = detail::cauchy_vec(rng, 3);
            double prev = 0.0, prev_ratio = kInf;
            for (int m = -12; m <= 12; ++m) {
                double t = std::exp2(m), kv = k_functional(c, f, t);
                track(lo, hi, std::fabs(kv - t * k_functional(sw, f, 1.0 / t)) / kv);
                track(lo, hi, std::max(0.0, prev / kv - 1.0));
                track(lo, hi, std::max(0.0, (kv / t) / prev_ratio - 1.0));
                prev = kv;
                prev_ratio = kv / t;
                for (int j = -12; j <= 12; j += 4) {
                    double sv = std::exp2(j);
                    track(lo, hi, std::max(0.0, kv / (std::min(1.0, t / sv) * j_functional(c, f, sv)) - 1.0));
                }
            }
        }
        return std::pair{lo, hi};
    });
    run("transform_round_trip", 1e-6, [&] {
        double lo = kInf, hi = 0.0;
        auto b = parse_weight("brokenlog:0.5:-1*iterlog:2:0.5");
        for (double q : {1.5, 2.0, 3.0}) {
            auto bb = b_from_a(a_from_b(b, q), q);
            const double factor = conjugate(q) - 1.0;
            for (int m = -30; m <= 30; m += 3) track(lo, hi, std::fabs(bb.eval(std::exp2(m)) / (factor * b.eval(std::exp2(m))) - 1.0));
        }
        return std::pair{lo, hi};
    });
    run("identity103", 1e-6, [&] {
        double lo = kInf, hi = 0.0;
        auto xs = log_points(-30, 30, 50);
        for (auto [w, q] : {std::pair{"brokenlog:0:-1", 2.0}, std::pair{"brokenlog:0.5:-1*iterlog:2:0.5", 1.5}, std::pair{"brokenlog:1:-2", 3.0}})
            track(lo, hi, check_identity_103(parse_weight(w), q, xs));
        return std::pair{lo, hi};
    });
    run("discretization_sandwich", 0.0, [&] {
        double lo = kInf, hi = 0.0;
        for (int k = 0; k < 20; ++k) {
            auto c = detail::random_couple(rng, 3);
            InterpParams ip{0.0, k % 2 ? 2.0 : 1.0, parse_weight("brokenlog:0:-2"), NormKind::K, Range::full};
            auto r = kd_sandwich(c, detail::cauchy_vec(rng, 3), ip);
            track(lo, hi, r.inside ? 0.0 : 1.0);
        }
        return std::pair{lo, hi};
    });
    run("swap_flip_invariance", 1e-9, [&] {
        double lo = kInf, hi = 0.0;
        for (auto [theta, q, w] : {std::tuple{0.0, 1.0, "brokenlog:0:-2"}, std::tuple{0.5, 2.0, "const:1"}, std::tuple{1.0, 2.0, "brokenlog:-2:0"}}) {
            auto v = parse_weight(w);
            for (int k = 0; k < 5; ++k) {
                auto c = detail::random_couple(rng, 3);
                Vec f = detail::cauchy_vec(rng, 3);
                double a = k_norm(c, f, InterpParams{theta, q, v});
                double b = k_norm(FiniteCouple::swapped(c), f, InterpParams{1.0 - theta, q, v.flip()});
                track(lo, hi, std::fabs(a - b) / a);
            }
        }
        return std::pair{lo, hi};
    });
    run("lambda_duality", 1e-10, [&] {
        double lo = kInf, hi = 0.0;
        for (auto [theta, q, w] : {std::tuple{0.0, 2.0, "const:1"}, std::tuple{0.0, 1.0, "brokenlog:0:-2"}, std::tuple{1.0, 2.0, "brokenlog:1:-1"}}) {
            auto r = lambda_duality_check(theta, q, parse_weight(w), 8, 20, rng());
            track(lo, hi, std::max(r.max_rel_error, r.max_violation));
        }
        return std::pair{lo, hi};
    });
    run("functional_duality", 1e-6, [&] {
        double lo = kInf, hi = 0.0;
        auto ts = dyadic_grid(-8, 8);
        for (int k = 0; k < 3; ++k) {
            auto c = detail::random_couple(rng, 1 + k);
            track(lo, hi, dual_k_via_j_check(c, ts, 5, rng()).max_rel_error);
            track(lo, hi, dual_j_via_k_check(c, ts, 5, rng()).max_rel_error);
        }
        return std::pair{lo, hi};
    });
    run("ratio_scale_invariance", 1e-12, [&] {
        VerifyCfg a;
        a.samples = 8;
        a.seed = rng();
        VerifyCfg b = a;
        b.scale = 10.0;
        auto c = FiniteCouple::weighted_l1({1, 2}, {1, 0.25});
        auto ra = verify_theorem(TheoremId::DT0S, c, parse_weight("brokenlog:0:-2"), 1.5, a);
        auto rb = verify_theorem(TheoremId::DT0S, c, parse_weight("brokenlog:0:-2"), 1.5, b);
        if (ra.status != "PASS" || rb.status != "PASS") return std::pair{kInf, kInf};
        double lo = kInf, hi = 0.0;
        for (std::size_t k = 0; k < ra.ratios.size(); ++k)
            for (std::size_t s = 0; s < ra.ratios[k].size(); ++s) track(lo, hi, std::fabs(ra.ratios[k][s] / rb.ratios[k][s] - 1.0));
        return std::pair{lo, hi};
    });
    return out;
}

/// One entry of the theorem matrix.
struct MatrixEntry {
    TheoremId id;
    std::vector<std::string> weights;
};

inline std::vector<MatrixEntry> theorem_matrix() {
    const std::vector<std::string> dt0s{"brokenlog:0:-2", "brokenlog:1:-2", "brokenlog:0:-3"};
    const std::vector<std::string> dt0s1{"brokenlog:-2:-2", "brokenlog:-3:-2", "brokenlog:-2:-3"};
    const std::vector<std::string> dtj111{"brokenlog:1:1", "brokenlog:2:2", "brokenlog:1:2"};
    return {
        {TheoremId::DT0S, dt0s},
        {TheoremId::DTJ1, {"brokenlog:1:0", "brokenlog:2:0", "brokenlog:1:0.2"}},
        {TheoremId::DTJ11, {"glue(brokenlog:1:0|brokenlog:0:-1|ac)", "brokenlog:1:-1", "brokenlog:2:-1"}},
        {TheoremId::DT0S1, dt0s1},
        {TheoremId::DTJ111, dtj111},
        {TheoremId::DTJ111_1, {"recipint(brokenlog:-2:-2)", "recipint(brokenlog:-3:-2)", "recipint(brokenlog:-2:-3)"}},
        {TheoremId::ET1, {"brokenlog:-2:0", "brokenlog:-2:1", "brokenlog:-3:0"}},
        {TheoremId::ET1_1, {"brokenlog:0:1", "brokenlog:0:2", "brokenlog:0.2:1"}},
        {TheoremId::EQ1, dt0s},
        {TheoremId::KS, dt0s1},
        {TheoremId::JS11, dtj111},
        {TheoremId::E1, {"brokenlog:1:0", "brokenlog:2:0", "brokenlog:1:-1"}},
        {TheoremId::E2, dt0s},
    };
}

inline FiniteCouple matrix_couple(std::size_t n) {
    Vec w0{1, 2, 0.5, 3}, w1{1, 0.25, 4, 0.5};
    w0.resize(n);
    w1.resize(n);
    return FiniteCouple::weighted_l1(w0, w1);
}

/// The theorem matrix: n in {1,2,4}, q in {1,1.5,2}, three weights per theorem. Every report
/// becomes one CSV in res.files plus a row of summary.csv.
inline JobResult theorems_suite(const VerifyCfg& cfg) {
    JobResult res;
    Csv summary({"id", "n", "q", "weight", "status", "min_ratio", "max_ratio", "spread", "reason"});
    for (const auto& entry : theorem_matrix())
        for (std::size_t n : {1u, 2u, 4u})
            for (double q : {1.0, 1.5, 2.0})
                for (std::size_t k = 0; k < entry.weights.size(); ++k) {
                    const auto& w = entry.weights[k];
                    auto r = verify_theorem(entry.id, matrix_couple(n), parse_weight(w), q, cfg);
                    std::string tag = r.theorem_id + "_n" + std::to_string(n) + "_q" + fmt17(q) + "_w" + std::to_string(k);
                    res.files.emplace_back(tag + ".csv", report_csv(r));
                    summary.row({r.theorem_id, std::to_string(n), fmt17(q), w, r.status, fmt17(r.min_ratio), fmt17(r.max_ratio),
                                 fmt17(r.spread), r.reason});
                    bool skip = r.status == "SKIP";
                    res.lines.push_back({r.status, r.theorem_id + "/n" + std::to_string(n) + "/q" + fmt17(q) + "/" + w, skip ? 0.0 : r.min_ratio,
                                         skip ? 0.0 : r.max_ratio});
                }
    res.files.emplace_back("summary.csv", summary.str());
    return res;
}

inline JobResult run_suite(const Params& p) {
    const std::string name = detail::need(p, "name");
    const auto seed = static_cast<std::uint64_t>(detail::integer(p, "seed", 7));
    if (name == "golden") return JobResult{"", {}, golden_suite(), {}};
    if (name == "properties") return JobResult{"", {}, properties_suite(seed), {}};
    if (name == "theorems") {
        Params q = p;
        q["seed"] = std::to_string(seed);
        return theorems_suite(verify_cfg(q));
    }
    throw ParseError("unknown suite '" + name + "'", 0);
}

// ---------------------------------------------------------------------------------------------
// Config files and dispatch

struct JobSpec {
    std::string name;
    std::string kind;
    Params params;
    int line = 0;
};

/// INI-style config: "[job name]" opens a job, "key = value" lines fill it, '#' and ';' start comments.
inline std::vector<JobSpec> parse_config(std::istream& in) {
    std::vector<JobSpec> jobs;
    std::string raw;
    int line = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    auto fail = [&](const std::string& msg) { throw ParseError("config line " + std::to_string(line) + ": " + msg, static_cast<std::size_t>(line)); };
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw.substr(0, raw.find_first_of("#;")));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail("unterminated section header");
            std::string head = trim(s.substr(1, s.size() - 2));
            if (head.rfind("job", 0) != 0) fail("expected [job <name>]");
            jobs.push_back({trim(head.substr(3)), "", {}, line});
            if (jobs.back().name.empty()) jobs.back().name = "job" + std::to_string(jobs.size());
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        if (jobs.empty()) fail("key outside a [job] section");
        std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (jobs.back().params.count(key)) fail("duplicate key '" + key + "'");
        if (key == "kind")
            jobs.back().kind = value;
        jobs.back().params[key] = value;
    }
    for (const auto& j : jobs)
        if (j.kind.empty()) throw ParseError("config line " + std::to_string(j.line) + ": job '" + j.name + "' has no kind", static_cast<std::size_t>(j.line));
    return jobs;
}

inline std::vector<std::string> job_kinds() { return {"transform", "identity103", "k-functional", "norm", "dual", "theorem", "suite"}; }

inline JobResult run_job(const std::string& kind, const Params& p) {
    if (kind == "transform") return job_transform(p);
    if (kind == "identity103") return job_identity103(p);
    if (kind == "k-functional") return job_kfunctional(p);
    if (kind == "norm") return job_norm(p);
    if (kind == "dual") return job_dual(p);
    if (kind == "theorem") return job_theorem(p);
    if (kind == "suite") return run_suite(p);
    throw ParseError("unknown job kind '" + kind + "'", 0);
}

/// Exit status for an exception escaping a job: numerical failures 1, bad input 2.
inline int error_exit_code(const std::exception& e) {
    if (dynamic_cast<const QuadratureError*>(&e) || dynamic_cast<const SolverError*>(&e)) return 1;
    if (dynamic_cast<const Error*>(&e)) return 2;
    return 1;
}

/// Writes the CSV (to csv_path, or out when empty), extra files under out_dir, summary lines to
/// out and notes to err. Returns the exit code of the summary lines.
inline int emit(const JobResult& r, const std::string& csv_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DomainError("cannot write " + path.string());
        f << text;
    };
    if (!r.csv.empty()) {
        if (csv_path.empty())
            out << r.csv;
        else
            write(csv_path, r.csv);
    }
    for (const auto& [name, text] : r.files) write(std::filesystem::path(out_dir.empty() ? "." : out_dir) / name, text);
    for (const auto& n : r.notes) err << "# " << n << '\n';
    for (const auto& l : r.lines) out << summary_line(l) << '\n';
    return exit_code(r.lines);
}

/// Runs every job of a config. Keys "output" and "out_dir" choose where a job's files go.
inline int run_config(std::istream& in, std::ostream& out, std::ostream& err) {
    std::vector<JobSpec> jobs;
    try {
        jobs = parse_config(in);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    int code = 0;
    for (const auto& j : jobs) {
        auto get = [&](const char* k) { auto it = j.params.find(k); return it == j.params.end() ? std::string() : it->second; };
        try {
            code = std::max(code, emit(run_job(j.kind, j.params), get("output"), get("out_dir"), out, err));
        } catch (const std::exception& e) {
            err << "error in job '" << j.name << "': " << e.what() << '\n';
            out << "FAIL " << j.name << " nan nan\n";
            code = std::max(code, error_exit_code(e));
        }
    }
    return code;
}

}  // namespace ilab
