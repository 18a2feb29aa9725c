#include <gtest/gtest.h>

#include <cmath>

#include "ilab/svfun.hpp"

using namespace ilab;

TEST(SvFun, AtomValues) {
    auto b = SlowVaryingFn::broken_log_pow(0.0, -1.0);
    EXPECT_DOUBLE_EQ(b.eval(std::exp(1.0)), 0.5);
    EXPECT_DOUBLE_EQ(b.eval(std::exp(-1.0)), 1.0);
    EXPECT_DOUBLE_EQ(b.eval(1.0), 1.0);
    auto l = SlowVaryingFn::iter_log_pow(2, 1.0);
    EXPECT_NEAR(l.eval(std::exp(std::exp(1.0) - 1.0)), 2.0, 1e-14);
    EXPECT_NEAR(l.eval(std::exp(-(std::exp(1.0) - 1.0))), 2.0, 1e-14);
    auto e = SlowVaryingFn::exp_log_pow(0.5, 1.0);
    EXPECT_NEAR(e.eval(std::exp(4.0)), std::exp(2.0), 1e-12);
    EXPECT_NEAR(e.eval(std::exp(-4.0)), std::exp(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(SlowVaryingFn::constant(3.0).eval(7.0), 3.0);
}

TEST(SvFun, DomainErrors) {
    auto b = SlowVaryingFn::broken_log_pow(0.0, -1.0);
    EXPECT_THROW(b.eval(0.0), DomainError);
    EXPECT_THROW(b.eval(-1.0), DomainError);
    EXPECT_THROW(b.eval(NAN), DomainError);
    EXPECT_THROW(SlowVaryingFn::exp_log_pow(1.0, 1.0), DomainError);
    EXPECT_THROW(SlowVaryingFn::constant(0.0), DomainError);
    EXPECT_THROW(SlowVaryingFn::iter_log_pow(0, 1.0), DomainError);
}

TEST(SvFun, LogSpaceAvoidsOverflow) {
    auto b = SlowVaryingFn::broken_log_pow(400.0, 400.0);
    double lv = b.log_eval_u(std::log(1e300));
    EXPECT_NEAR(lv, 400.0 * std::log1p(std::log(1e300)), 1e-9);
    EXPECT_TRUE(std::isinf(b.eval(1e300)));
}

TEST(SvFun, ReflectClosedForms) {
    auto r = reflect(SlowVaryingFn::broken_log_pow(0.0, -2.0));
    ASSERT_EQ(r.atoms().size(), 1u);
    auto& a = std::get<BrokenLogPow>(r.atoms()[0]);
    EXPECT_EQ(a.beta0, 2.0);
    EXPECT_EQ(a.beta_inf, 0.0);
    EXPECT_EQ(r.to_string(), "brokenlog:2:0");
}

TEST(SvFun, ReflectIsInvolutionAndMatchesDefinition) {
    auto v = parse_weight("brokenlog:1.5:-0.5*iterlog:2:0.7*explog:0.5:-1*const:2");
    auto g = parse_weight("glue(brokenlog:1:0|brokenlog:0:-2|3)");
    for (const auto& f : {v, g}) {
        auto r = reflect(f);
        auto rr = reflect(r);
        for (double x : {1e-9, 0.01, 0.3, 2.0, 50.0, 1e7}) {
            EXPECT_NEAR(r.eval(x), 1.0 / f.eval(1.0 / x), 1e-12 * r.eval(x)) << x;
            EXPECT_NEAR(rr.eval(x), f.eval(x), 1e-12 * f.eval(x)) << x;
        }
    }
}

TEST(SvFun, PowAndMul) {
    auto v = SlowVaryingFn::broken_log_pow(1.0, 2.0);
    EXPECT_TRUE(pow(v, 0.0).atoms().empty());
    EXPECT_DOUBLE_EQ(pow(v, 0.0).eval(5.0), 1.0);
    auto c = mul(SlowVaryingFn::constant(2.0), SlowVaryingFn::constant(3.0));
    ASSERT_EQ(c.atoms().size(), 1u);
    EXPECT_DOUBLE_EQ(std::get<ConstFactor>(c.atoms()[0]).c, 6.0);
    auto p = mul(v, pow(v, -1.0));
    EXPECT_TRUE(p.atoms().empty());
    auto w = mul(v, SlowVaryingFn::iter_log_pow(2, 1.0));
    EXPECT_NEAR(w.eval(20.0), v.eval(20.0) * ell(2, std::log(20.0)), 1e-13);
}

TEST(SvFun, GluedBranches) {
    auto g = SlowVaryingFn::glued(SlowVaryingFn::broken_log_pow(1.0, 0.0), SlowVaryingFn::broken_log_pow(0.0, -1.0), 2.0);
    EXPECT_DOUBLE_EQ(g.eval(std::exp(-2.0)), 3.0);
    EXPECT_DOUBLE_EQ(g.eval(std::exp(1.0)), 1.0);
    EXPECT_DOUBLE_EQ(g.eval(1.0), 1.0);  // left branch owns t = 1
    auto h = SlowVaryingFn::glued(SlowVaryingFn::constant(1.0), SlowVaryingFn::constant(1.0), 2.0, true);
    EXPECT_DOUBLE_EQ(h.eval(1.0), 2.0);
}

TEST(SvFun, Derivative) {
    auto b = SlowVaryingFn::broken_log_pow(0.0, -1.0);
    double x = std::exp(1.0);
    EXPECT_NEAR(derivative(b, x), -0.25 / x, 1e-15);
    EXPECT_THROW(derivative(b, 1.0), BreakpointError);
    auto c = SlowVaryingFn::broken_log_pow(1.0, -1.0);
    EXPECT_NEAR(derivative(c, 1.0), -1.0, 1e-15);
    // central difference oracle away from the breakpoint
    auto v = parse_weight("brokenlog:1:-2*iterlog:2:0.5*explog:0.5:1");
    for (double t : {0.05, 0.7, 3.0, 40.0}) {
        double h = 1e-6 * t;
        double fd = (v.eval(t + h) - v.eval(t - h)) / (2 * h);
        EXPECT_NEAR(derivative(v, t), fd, 1e-6 * std::fabs(fd) + 1e-9) << t;
    }
}

TEST(SvFun, Profiles) {
    auto v = parse_weight("brokenlog:-2:-1*iterlog:2:-2");
    EXPECT_TRUE(v.profile(Side::head).integrable());
    EXPECT_TRUE(v.profile(Side::tail).integrable());
    auto w = parse_weight("brokenlog:0:-1");
    EXPECT_FALSE(w.profile(Side::tail).integrable());
    EXPECT_FALSE(w.profile(Side::head).integrable());
    EXPECT_EQ(w.profile(Side::tail).growth_sign(), -1);
    EXPECT_EQ(w.profile(Side::head).growth_sign(), 0);
}

TEST(SvFun, Parser) {
    auto v = parse_weight("brokenlog:0:-1*iterlog:2:1");
    EXPECT_EQ(v.to_string(), "brokenlog:0:-1*iterlog:2:1");
    EXPECT_EQ(parse_weight("explog:0.5:-").to_string(), "explog:0.5:-1");
    try {
        parse_weight("brokenlog:0:-1*foo:1");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 15u);
    }
    EXPECT_THROW(parse_weight("brokenlog:0"), ParseError);
    EXPECT_THROW(parse_weight("explog:1.5:1"), ParseError);
    EXPECT_THROW(parse_weight("const:1)"), ParseError);
    auto g = parse_weight("glue(brokenlog:1:0|brokenlog:0:-1|ac)");
    EXPECT_DOUBLE_EQ(g.eval(std::exp(1.0)), 0.5);
    auto h = parse_weight("glue(const:2|const:1|ac)");
    EXPECT_DOUBLE_EQ(h.eval(5.0), 2.0);
}

TEST(SvFun, SmoothOfConstantIsConstant) {
    auto s = smooth(SlowVaryingFn::constant(1.0));
    for (double x : {1e-30, 1e-5, 0.5, 1.0, 3.0, 1e8, 1e25}) EXPECT_NEAR(s.eval(x), 1.0, 1e-10) << x;
}

TEST(SvFun, SmoothIsEquivalent) {
    auto v = SlowVaryingFn::broken_log_pow(1.0, -1.0);
    auto s = smooth(v);
    // v-bar(x) = x^{-1} int_0^x v: for x <= 1, (1 - u) + 1 exactly.
    for (double x : {1e-6, 0.01, 0.5}) EXPECT_NEAR(s.eval(x), 2.0 - std::log(x), 1e-9);
    for (double x : {1e-12, 1e-3, 10.0, 1e12, 1e100}) {
        double r = s.eval(x) / v.eval(x);
        EXPECT_GT(r, 0.3);
        EXPECT_LT(r, 3.0);
    }
    EXPECT_TRUE(verify_sv(s).ok);
}

TEST(SvFun, RecipHeadIntegral) {
    auto a = parse_weight("recipint(brokenlog:-2:-2)");
    EXPECT_NEAR(a.eval(std::exp(-3.0)), 4.0, 1e-11);
    EXPECT_NEAR(a.eval(std::exp(3.0)), 4.0 / 7.0, 1e-11);
    EXPECT_NEAR(a.eval(std::exp(-100.0)), 101.0, 1e-8);
    EXPECT_NEAR(a.limit(Side::tail), 0.5, 1e-12);
    EXPECT_NEAR(derivative(a, std::exp(-1.0)), -1.0 / std::exp(-1.0), 1e-10);
    EXPECT_EQ(a.profile(Side::head).growth_sign(), 1);
    EXPECT_EQ(a.profile(Side::tail).growth_sign(), 0);
}

TEST(SvFun, VerifySv) {
    EXPECT_TRUE(verify_sv(parse_weight("brokenlog:3:-2*explog:0.5:1")).ok);
    EXPECT_THROW(verify_sv(parse_weight("const:1"), {0.0}), DomainError);
}
