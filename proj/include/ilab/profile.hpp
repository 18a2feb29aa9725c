#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "common.hpp"

namespace ilab {

/// Iterated logarithm levels in s >= 0: ell_1 = 1 + s, ell_j = 1 + log ell_{j-1}.
inline double ell(int level, double s) {
    double v = 1.0 + s;
    for (int j = 1; j < level; ++j) v = 1.0 + std::log(v);
    return v;
}

/// Asymptotic shape of a positive function at one end of (0, inf), written in
/// s = |log t| -> inf as
///   exp(rate * s + sum_k coef_k * s^kappa_k) * prod_j ell_j(s)^power_j.
/// Used to decide convergence of integrals dt/t and to estimate their tails.
struct Profile {
    double rate = 0.0;
    std::vector<std::pair<double, double>> exps;  // (kappa, coef), kappa in (0,1)
    std::vector<double> powers;                   // power of ell_1, ell_2, ...

    static Profile level_power(int level, double p) {
        Profile r;
        r.powers.assign(static_cast<std::size_t>(level), 0.0);
        r.powers.back() = p;
        r.normalize();
        return r;
    }

    void normalize() {
        std::sort(exps.begin(), exps.end());
        std::vector<std::pair<double, double>> merged;
        for (auto& e : exps) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(e);
        }
        exps.clear();
        for (auto& e : merged)
            if (e.second != 0.0) exps.push_back(e);
        while (!powers.empty() && powers.back() == 0.0) powers.pop_back();
    }

    Profile& operator*=(const Profile& o) {
        rate += o.rate;
        exps.insert(exps.end(), o.exps.begin(), o.exps.end());
        if (powers.size() < o.powers.size()) powers.resize(o.powers.size(), 0.0);
        for (std::size_t j = 0; j < o.powers.size(); ++j) powers[j] += o.powers[j];
        normalize();
        return *this;
    }

    friend Profile operator*(Profile a, const Profile& b) { return a *= b; }

    Profile pow(double r) const {
        Profile p = *this;
        p.rate *= r;
        for (auto& e : p.exps) e.second *= r;
        for (auto& x : p.powers) x *= r;
        if (r == 0.0) p = Profile{};
        p.normalize();
        return p;
    }

    double power(std::size_t level) const { return level - 1 < powers.size() ? powers[level - 1] : 0.0; }

    bool is_constant() const { return rate == 0.0 && exps.empty() && powers.empty(); }

    /// +1 grows to inf, -1 decays to 0, 0 tends to a positive constant.
    int growth_sign() const {
        if (rate != 0.0) return rate > 0 ? 1 : -1;
        if (!exps.empty()) return exps.back().second > 0 ? 1 : -1;
        for (double p : powers)
            if (p != 0.0) return p > 0 ? 1 : -1;
        return 0;
    }

    /// Whether int^inf P(s) ds is finite.
    bool integrable() const {
        if (rate != 0.0) return rate < 0;
        if (!exps.empty()) return exps.back().second < 0;
        for (double p : powers)
            if (p != -1.0) return p < -1.0;
        return false;
    }

    /// Level k of the first power different from -1 (1-based); powers.size()+1 if none.
    std::size_t critical_level() const {
        for (std::size_t j = 0; j < powers.size(); ++j)
            if (powers[j] != -1.0) return j + 1;
        return powers.size() + 1;
    }

    /// Shape of s -> int^s P (divergent case) or int_s^inf P (convergent case).
    Profile primitive() const {
        Profile r = *this;
        if (rate != 0.0) return r;
        if (!exps.empty()) {
            if (r.powers.empty()) r.powers.push_back(0.0);
            r.powers[0] += 1.0 - exps.back().first;
            r.normalize();
            return r;
        }
        std::size_t k = critical_level();
        if (r.powers.size() < k) r.powers.resize(k, 0.0);
        for (std::size_t j = 0; j < k; ++j) r.powers[j] += 1.0;
        r.normalize();
        return r;
    }

    /// log of the factor F(s) with int_s^inf P ~ P(s) F(s) (or int^s P ~ P(s) F(s)).
    double log_primitive_factor(double s) const {
        if (rate != 0.0) return -std::log(std::fabs(rate));
        if (!exps.empty()) {
            auto [kappa, coef] = exps.back();
            return (1.0 - kappa) * std::log(1.0 + s) - std::log(std::fabs(coef) * kappa);
        }
        std::size_t k = critical_level();
        double lf = 0.0;
        for (std::size_t j = 1; j <= k; ++j) lf += std::log(ell(static_cast<int>(j), s));
        return lf - std::log(std::fabs(power(k) + 1.0));
    }

    /// Relative size of the next-order correction of the primitive estimate.
    double primitive_rel_error(double s) const {
        if (rate != 0.0) return 0.0;
        if (!exps.empty()) return 1.0 / std::pow(1.0 + s, exps.back().first);
        return 1.0 / ell(static_cast<int>(critical_level()), s);
    }

    double log_value(double s) const {
        double v = rate * s;
        for (auto& e : exps) v += e.second * std::pow(s, e.first);
        for (std::size_t j = 0; j < powers.size(); ++j)
            if (powers[j] != 0.0) v += powers[j] * std::log(ell(static_cast<int>(j + 1), s));
        return v;
    }
};

/// Sign of lim log(a/b).
inline int compare_growth(const Profile& a, const Profile& b) { return (a * b.pow(-1.0)).growth_sign(); }

/// Asymptotically dominant of two optional profiles (nullopt means identically zero).
inline std::optional<Profile> dominant(const std::optional<Profile>& a, const std::optional<Profile>& b) {
    if (!a) return b;
    if (!b) return a;
    return compare_growth(*a, *b) >= 0 ? a : b;
}

}  // namespace ilab
