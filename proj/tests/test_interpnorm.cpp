#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ilab/interpnorm.hpp"

using namespace ilab;

namespace {

Vec cauchy_vec(std::mt19937_64& rng, std::size_t n) {
    std::cauchy_distribution<double> cd;
    Vec v(n);
    for (auto& x : v) x = cd(rng);
    return v;
}

InterpParams kp(double theta, double q, const std::string& v, Range r = Range::full) {
    return {theta, q, parse_weight(v), NormKind::K, r};
}

// lambda_{theta,q,v} norm of {K(f, 2^m)} by plain summation over |m| <= R.
double plain_discrete(const FiniteCouple& c, const Vec& f, double theta, double q, const SlowVaryingFn& v, int R) {
    LambdaSeq s{-R, Vec(static_cast<std::size_t>(2 * R + 1)), theta, q, v};
    for (int m = -R; m <= R; ++m) s.values[static_cast<std::size_t>(m + R)] = k_functional(c, f, std::exp2(m));
    return lambda_norm(s);
}

}  // namespace

TEST(InterpNorm, LambdaNormExamples) {
    LambdaSeq a{-10, Vec(21), 0.0, kInf, SlowVaryingFn::constant(1.0)};
    for (int m = -10; m <= 10; ++m) a.values[static_cast<std::size_t>(m + 10)] = std::min(1.0, std::exp2(m));
    EXPECT_DOUBLE_EQ(lambda_norm(a), 1.0);
    LambdaSeq b{3, {5.0}, 0.0, 1.0, SlowVaryingFn::constant(1.0)};
    EXPECT_DOUBLE_EQ(lambda_norm(b), 5.0);
    LambdaSeq c{0, {1, 1, 1, 1}, 1.0, 1.0, SlowVaryingFn::constant(1.0)};
    EXPECT_DOUBLE_EQ(lambda_norm(c), 1.875);
    LambdaSeq d{-2, {0, 0, 0}, 0.5, 2.0, SlowVaryingFn::constant(1.0)};
    EXPECT_EQ(lambda_norm(d), 0.0);
}

TEST(InterpNorm, KNormExamples) {
    auto c = FiniteCouple::weighted_l1({1}, {1});
    auto p = kp(0.0, 1.0, "brokenlog:0:-2");
    EXPECT_NEAR(k_norm(c, {1.0}, p), 2.0, 1e-9);
    EXPECT_EQ(k_norm(c, {0.0}, p), 0.0);
    auto c3 = FiniteCouple::weighted_l1({1, 2, 0.5}, {1, 0.25, 4});
    Vec f{0.3, -1.2, 2.0}, f2{0.6, -2.4, 4.0};
    auto p2 = kp(0.0, 2.0, "brokenlog:0:-1");
    EXPECT_NEAR(k_norm(c3, f2, p2), 2.0 * k_norm(c3, f, p2), 1e-10);
    EXPECT_THROW(k_norm(c, {1.0}, kp(0.0, 1.0, "const:1")), AdmissibilityError);
    EXPECT_THROW(k_norm(c, {1.0}, kp(1.5, 1.0, "const:1")), DomainError);
}

TEST(InterpNorm, RangeSplitting) {
    auto c = FiniteCouple::weighted_l1({1, 2, 0.5}, {1, 0.25, 4});
    Vec f{0.3, -1.2, 2.0};
    for (double q : {1.0, 2.0, 1.5}) {
        auto full = k_norm(c, f, kp(0.0, q, "brokenlog:0:-2"));
        auto head = k_norm(c, f, kp(0.0, q, "brokenlog:0:-2", Range::unit_head));
        auto tail = k_norm(c, f, kp(0.0, q, "brokenlog:0:-2", Range::unit_tail));
        EXPECT_NEAR(std::pow(full, q), std::pow(head, q) + std::pow(tail, q), 1e-9 * std::pow(full, q)) << q;
    }
}

TEST(InterpNorm, NodeEvaluatorMatchesAdaptive) {
    std::mt19937_64 rng(4);
    auto l1 = FiniteCouple::weighted_l1({1, 2, 0.5}, {1, 0.25, 4});
    auto li = FiniteCouple::weighted_linf({1, 0.5, 2}, {3, 1, 0.2});
    for (const auto& c : {l1, li, FiniteCouple::sum(l1), FiniteCouple::intersection(li)}) {
        for (double theta : {0.0, 1.0}) {
            auto p = kp(theta, 2.0, theta == 0.0 ? "brokenlog:0:-1" : "brokenlog:-1:0");
            auto ev = NodeKNorm::continuous(legs_of(c), p.theta, p.q, p.v);
            bool smooth = c.kind() != FiniteCouple::Kind::weighted_linf && c.kind() != FiniteCouple::Kind::intersection;
            for (int k = 0; k < 5; ++k) {
                Vec f = cauchy_vec(rng, 3);
                double exact = k_norm(c, f, p);
                EXPECT_NEAR(ev(f), exact, (smooth ? 1e-9 : 2e-3) * exact) << c.to_string() << " " << theta;
            }
        }
    }
}

TEST(InterpNorm, DiscreteAgainstPlainSum) {
    auto c = FiniteCouple::weighted_l1({1, 2, 0.5}, {1, 0.25, 4});
    Vec f{0.3, -1.2, 2.0};
    auto v = parse_weight("brokenlog:1:-4");
    double d = discrete_k_norm(c, f, kp(0.0, 1.0, "brokenlog:1:-4"));
    EXPECT_NEAR(d, plain_discrete(c, f, 0.0, 1.0, v, 1000), 1e-8 * d);
    auto w = parse_weight("brokenlog:-4:1");
    double d1 = discrete_k_norm(c, f, kp(1.0, 2.0, "brokenlog:-4:1"));
    EXPECT_NEAR(d1, plain_discrete(c, f, 1.0, 2.0, w, 1000), 1e-8 * d1);
    double dh = discrete_k_norm(c, f, kp(0.0, 1.0, "brokenlog:1:-4", Range::unit_head));
    double dt = discrete_k_norm(c, f, kp(0.0, 1.0, "brokenlog:1:-4", Range::unit_tail));
    EXPECT_NEAR(dh + dt, d, 1e-12 * d);
    auto li = FiniteCouple::weighted_linf({1, 0.5, 2}, {3, 1, 0.2});
    double d2 = discrete_k_norm(li, f, kp(0.0, kInf, "brokenlog:0:-1"));
    EXPECT_NEAR(d2, plain_discrete(li, f, 0.0, kInf, parse_weight("brokenlog:0:-1"), 200), 1e-12 * d2);
}

TEST(InterpNorm, MindConstants) {
    auto mc = mind_constants(SlowVaryingFn::constant(1.0));
    EXPECT_EQ(mc.k1, 1.0);
    EXPECT_EQ(mc.k2, 1.0);
    EXPECT_EQ(mc.c1, 0.5);
    EXPECT_EQ(mc.c2, 2.0);
    auto b = parse_weight("brokenlog:0:-1");
    auto m1 = mind_constants(b), m2 = mind_constants(b * SlowVaryingFn::constant(7.5));
    EXPECT_TRUE(std::isfinite(m1.k1) && std::isfinite(m1.k2));
    EXPECT_GE(m1.k2, 1.0);
    EXPECT_NEAR(m1.k1, m2.k1, 1e-12);
    EXPECT_NEAR(m1.k2, m2.k2, 1e-12);
}

TEST(InterpNorm, SandwichBand) {
    auto c = FiniteCouple::weighted_l1({1, 2}, {3, 1});
    // a constant weight is admissible only on the half-line where t^{-theta} K(f, t) decays
    for (double theta : {0.0, 1.0})
        for (double q : {1.0, 2.0}) {
            InterpParams p{theta, q, SlowVaryingFn::constant(1.0), NormKind::K, theta == 0.0 ? Range::unit_head : Range::unit_tail};
            auto r = kd_sandwich(c, {1.0, -0.5}, p);
            EXPECT_TRUE(r.inside) << r.ratio;
            double l = std::pow(std::log(2.0), 1.0 / q);
            EXPECT_DOUBLE_EQ(r.lo, std::exp2(-theta - 1.0) * l);
            EXPECT_DOUBLE_EQ(r.hi, 4.0 * l);
            p.range = Range::full;
            EXPECT_THROW(kd_sandwich(c, {1.0, -0.5}, p), AdmissibilityError);
        }
    auto z = kd_sandwich(c, {0.0, 0.0}, kp(0.0, 2.0, "brokenlog:0:-1"));
    EXPECT_EQ(z.ratio, 1.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> lw(-2.0, 2.0);
    for (int k = 0; k < 40; ++k) {
        Vec w0(3), w1(3);
        for (auto& x : w0) x = std::exp(lw(rng));
        for (auto& x : w1) x = std::exp(lw(rng));
        auto cc = FiniteCouple::weighted_l1(w0, w1);
        double theta = k % 2 ? 1.0 : 0.0;
        auto r = kd_sandwich(cc, cauchy_vec(rng, 3), kp(theta, 2.0, theta == 0.0 ? "brokenlog:0:-1" : "brokenlog:-1:0"));
        EXPECT_TRUE(r.inside) << r.ratio << " [" << r.lo << ", " << r.hi << "]";
    }
}

TEST(InterpNorm, JNormScalarOracle) {
    auto c = FiniteCouple::weighted_l1({1}, {1});
    auto a = parse_weight("glue(brokenlog:1:0|brokenlog:0:-1|ac)");
    for (double q : {1.0, 2.0}) {
        InterpParams p{0.0, q, a, NormKind::J};
        auto r = j_norm(c, {1.0}, p, 12);
        // n = 1: minimize ||(d_m lambda_m)||_q over lambda >= 0, sum lambda = 1, d_m = a(2^m) max(1, 2^m)
        double best = kInf, s = 0.0;
        for (int m = -12; m <= 12; ++m) {
            double d = a.eval(std::exp2(m)) * std::max(1.0, std::exp2(m));
            best = std::min(best, d);
            s += std::pow(d, -conjugate(q));
        }
        double oracle = q == 1.0 ? best : std::pow(s, -1.0 / conjugate(q));
        EXPECT_NEAR(r.value, oracle, 0.01 * oracle) << q;
        EXPECT_LE(r.dual_bound, r.value * (1 + 1e-12));
        EXPECT_NEAR(r.dual_bound, oracle, 1e-6 * oracle);
    }
}

TEST(InterpNorm, JNormProperties) {
    auto c = FiniteCouple::weighted_l1({1, 2, 0.5}, {1, 0.25, 4});
    auto a = a_from_b(parse_weight("brokenlog:0:-1"), 2.0);
    InterpParams p{0.0, 2.0, a, NormKind::J};
    Vec f{0.3, -1.2, 2.0};
    auto r = j_norm(c, f, p);
    double single = std::max(norm0(c, f), norm1(c, f)) * a.eval(1.0);
    EXPECT_LE(r.value, single * (1 + 1e-12));
    EXPECT_LE(r.dual_bound, r.value * (1 + 1e-12));
    EXPECT_LT(r.gap, 0.01);
    Vec s = r.rep.sum();
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s[i], f[i], 1e-12);
    double cont = j_continuous_value(c, r.rep, p.theta, p.q, a);
    EXPECT_GE(cont, r.band_lo);
    EXPECT_LE(cont, r.band_hi);
    EXPECT_NEAR(j_representation_norm(c, r.rep, p.theta, p.q, a), r.value, 1e-12 * r.value);
    auto ex = j_norm_exact(c, f, p);
    EXPECT_LE(ex.value, r.value * (1 + 1e-9));
    EXPECT_EQ(j_norm(c, {0, 0, 0}, p).value, 0.0);
    EXPECT_THROW(j_norm(c, f, InterpParams{0.0, 2.0, SlowVaryingFn::constant(1.0), NormKind::J}), AdmissibilityError);
}

TEST(InterpNorm, JNormDualCouple) {
    auto c = FiniteCouple::weighted_linf({1, 0.5, 2}, {3, 1, 0.2});
    auto a = parse_weight("brokenlog:1:-1");
    InterpParams p{0.0, 1.5, a, NormKind::J};
    auto r = j_norm(c, {1.0, -0.4, 0.7}, p);
    EXPECT_LT(r.gap, 0.01);
}

TEST(InterpNorm, JdChara) {
    auto a = a_from_b(parse_weight("brokenlog:0:-1"), 2.0);
    auto r1 = check_jdchara(0.0, 2.0, a);
    EXPECT_TRUE(r1.converges);
    EXPECT_TRUE(r1.cond307);
    auto r2 = check_jdchara(0.0, 1.0, SlowVaryingFn::constant(1.0));
    EXPECT_TRUE(r2.converges);
    EXPECT_TRUE(r2.agree);
    EXPECT_DOUBLE_EQ(r2.partial.back(), 1.0);
    auto r3 = check_jdchara(1.0, kInf, SlowVaryingFn::constant(1.0));
    EXPECT_FALSE(r3.converges);
    EXPECT_FALSE(r3.cond307);
    EXPECT_TRUE(r3.agree);
    EXPECT_GT(r3.partial[2], r3.partial[1]);
}
