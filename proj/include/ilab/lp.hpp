#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "common.hpp"

namespace ilab {

/// Linear combination of LP variables plus a constant.
struct Affine {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    static Affine var(int j, double c = 1.0) { return {{{j, c}}, 0.0}; }
    static Affine value(double c) { return {{}, c}; }

    Affine& operator+=(const Affine& o) {
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        constant += o.constant;
        return *this;
    }
    Affine operator*(double s) const {
        Affine r = *this;
        for (auto& t : r.terms) t.second *= s;
        r.constant *= s;
        return r;
    }
    friend Affine operator+(Affine a, const Affine& b) { return a += b; }
    friend Affine operator-(Affine a, const Affine& b) { return a += b * -1.0; }
};

enum class Relation { le, ge, eq };

/// minimize cost . x subject to rows, x >= 0.
class LinearProgram {
public:
    int add_var(double cost = 0.0) {
        cost_.push_back(cost);
        return static_cast<int>(cost_.size()) - 1;
    }
    /// Free variable as the difference of two nonnegative ones.
    Affine add_free_var() {
        int p = add_var(), m = add_var();
        return Affine{{{p, 1.0}, {m, -1.0}}, 0.0};
    }
    void set_cost(int j, double c) { cost_.at(static_cast<std::size_t>(j)) = c; }
    /// expr (rel) 0
    void add_row(const Affine& expr, Relation rel) { rows_.push_back({expr, rel}); }
    std::size_t num_vars() const { return cost_.size(); }
    /// Recompute the optimal vertex from the original rows in long double (small LPs only).
    void set_refine(bool on) { refine_ = on; }

    struct Result {
        enum class Status { optimal, infeasible, unbounded } status = Status::optimal;
        double value = 0.0;
        Vec x;
    };

    Result solve() const;

private:
    struct Row {
        Affine expr;
        Relation rel;
    };
    std::vector<double> cost_;
    std::vector<Row> rows_;
    bool refine_ = false;
};

namespace detail {

/// Dense simplex tableau with Bland's anti-cycling rule.
class Tableau {
public:
    Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), a_((m + 1) * (n + 1), 0.0), basis_(m, 0) {}

    double& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
    double& rhs(std::size_t i) { return at(i, n_); }
    double& obj(std::size_t j) { return at(m_, j); }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t r, std::size_t c) {
        double p = at(r, c);
        for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            double f = at(i, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
        }
        basis_[r] = c;
    }

    /// Returns false if unbounded. Columns with allowed[j] == false never enter.
    bool optimize(const std::vector<bool>& allowed) {
        const double eps = 1e-11;
        for (int iter = 0; iter < 50000; ++iter) {
            std::size_t enter = n_;
            for (std::size_t j = 0; j < n_; ++j)
                if (allowed[j] && obj(j) < -eps) {
                    enter = j;
                    break;
                }
            if (enter == n_) return true;
            std::size_t leave = m_;
            double best = kInf;
            for (std::size_t i = 0; i < m_; ++i) {
                double a = at(i, enter);
                if (a > eps) {
                    double ratio = rhs(i) / a;
                    if (ratio < best - 1e-14 || (std::fabs(ratio - best) <= 1e-14 && basis_[i] < basis_[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
        throw SolverError("simplex iteration limit reached");
    }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

private:
    std::size_t m_, n_;
    std::vector<double> a_;
    std::vector<std::size_t> basis_;
};

/// Solves B x = rhs for the basis columns of the original tableau, in long double.
inline bool solve_basis(Tableau t, const std::vector<std::size_t>& basis, std::vector<long double>& x) {
    const std::size_t m = t.rows();
    std::vector<long double> A(m * m);
    x.assign(m, 0.0L);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < m; ++c) A[i * m + c] = t.at(i, basis[c]);
        x[i] = t.rhs(i);
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < m; ++r)
            if (std::fabs(A[r * m + c]) > std::fabs(A[p * m + c])) p = r;
        if (A[p * m + c] == 0.0L) return false;
        if (p != c) {
            for (std::size_t j = 0; j < m; ++j) std::swap(A[p * m + j], A[c * m + j]);
            std::swap(x[p], x[c]);
        }
        for (std::size_t r = c + 1; r < m; ++r) {
            long double f = A[r * m + c] / A[c * m + c];
            if (f == 0.0L) continue;
            for (std::size_t j = c; j < m; ++j) A[r * m + j] -= f * A[c * m + j];
            x[r] -= f * x[c];
        }
    }
    for (std::size_t c = m; c-- > 0;) {
        long double s = x[c];
        for (std::size_t j = c + 1; j < m; ++j) s -= A[c * m + j] * x[j];
        x[c] = s / A[c * m + c];
    }
    return true;
}

}  // namespace detail

inline LinearProgram::Result LinearProgram::solve() const {
    const std::size_t nv = cost_.size(), m = rows_.size();
    std::size_t nslack = 0;
    for (const auto& r : rows_)
        if (r.rel != Relation::eq) ++nslack;
    const std::size_t n = nv + nslack + m;  // structural, slack, artificial
    detail::Tableau tab(m, n);
    std::size_t slack = nv;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = rows_[i];
        for (auto [j, c] : r.expr.terms) tab.at(i, static_cast<std::size_t>(j)) += c;
        double b = -r.expr.constant;
        if (r.rel == Relation::le) tab.at(i, slack++) = 1.0;
        if (r.rel == Relation::ge) tab.at(i, slack++) = -1.0;
        if (b < 0) {
            for (std::size_t j = 0; j < nv + nslack; ++j) tab.at(i, j) = -tab.at(i, j);
            b = -b;
        }
        tab.rhs(i) = b;
        tab.at(i, nv + nslack + i) = 1.0;
        tab.basis()[i] = nv + nslack + i;
    }
    // phase 1: minimize the sum of artificials
    for (std::size_t j = 0; j <= n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (j < nv + nslack || j == n) s += tab.at(i, j);
        tab.obj(j) = j < nv + nslack || j == n ? -s : 0.0;
    }
    const detail::Tableau original = tab;
    std::vector<bool> allowed(n, true);
    tab.optimize(allowed);
    Result res;
    if (-tab.obj(n) > 1e-9 * (1.0 + m)) {
        res.status = Result::Status::infeasible;
        return res;
    }
    for (std::size_t j = nv + nslack; j < n; ++j) allowed[j] = false;
    // drive artificials out of the basis where possible
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basis()[i] < nv + nslack) continue;
        for (std::size_t j = 0; j < nv + nslack; ++j)
            if (std::fabs(tab.at(i, j)) > 1e-9) {
                tab.pivot(i, j);
                break;
            }
    }
    // phase 2 objective in terms of the current basis
    for (std::size_t j = 0; j <= n; ++j) tab.obj(j) = j < nv ? cost_[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t b = tab.basis()[i];
        double c = tab.obj(b);
        if (c == 0.0) continue;
        for (std::size_t j = 0; j <= n; ++j) tab.obj(j) -= c * tab.at(i, j);
    }
    if (!tab.optimize(allowed)) {
        res.status = Result::Status::unbounded;
        return res;
    }
    res.x.assign(nv, 0.0);
    std::vector<long double> xb;
    if (refine_ && detail::solve_basis(original, tab.basis(), xb)) {
        for (std::size_t i = 0; i < m; ++i)
            if (tab.basis()[i] < nv) res.x[tab.basis()[i]] = static_cast<double>(std::max(xb[i], 0.0L));
    } else {
        for (std::size_t i = 0; i < m; ++i)
            if (tab.basis()[i] < nv) res.x[tab.basis()[i]] = tab.rhs(i);
    }
    res.value = 0.0;
    for (std::size_t j = 0; j < nv; ++j) res.value += cost_[j] * res.x[j];
    return res;
}

}  // namespace ilab
