#include <gtest/gtest.h>

#include <cmath>

#include "kcmc/slice.hpp"
#include "oracles.hpp"

using namespace kcmc;

namespace {

const double kC0 = 3.0 * std::sqrt(3.0) / 4.0;

double max_abs_T(const Hypersurface& s) {
    double m = 0.0;
    for (const auto& pt : s.samples) m = std::max(m, std::abs(pt.T));
    return m;
}

}  // namespace

TEST(BranchRoots, MaximalEnvelope) {
    const BranchRoots b = branch_roots({1.0, 0.0, 1.0});
    ASSERT_TRUE(b.r_plus && b.r_minus);
    EXPECT_NEAR(*b.r_plus, 1.0, 1e-10);
    const double ref = oracle::envelope_root(0.0, 1.0, 1.5, 2.0);
    EXPECT_NEAR(*b.r_minus, ref, 1e-8);
    EXPECT_NEAR(*b.r_minus, 1.8392867552, 1e-9);
}

TEST(BranchRoots, AtTheMaximum) {
    const BranchRoots b = branch_roots({1.0, 0.0, envelope_max(0.0, 1.0).C});
    ASSERT_TRUE(b.r_plus && b.r_minus);
    EXPECT_NEAR(*b.r_plus, 1.5, 1e-8);
    EXPECT_NEAR(*b.r_minus, 1.5, 1e-8);
    EXPECT_NEAR(envelope_max(0.0, 1.0).C, kC0, 1e-12);
}

TEST(BranchRoots, ThroughBifurcationSphere) {
    const BranchRoots b = branch_roots({1.0, 0.0, 0.0});
    EXPECT_FALSE(b.r_plus);
    ASSERT_TRUE(b.r_minus);
    EXPECT_EQ(*b.r_minus, 2.0);
    const BranchRoots d = branch_roots({1.0, -0.5, 4.0});
    ASSERT_TRUE(d.r_minus);
    EXPECT_EQ(*d.r_minus, 2.0);
}

TEST(BranchRoots, OutOfRange) {
    try {
        branch_roots({1.0, 0.0, 5.0});
        FAIL() << "expected NoSliceError";
    } catch (const NoSliceError& e) {
        EXPECT_NE(std::string(e.what()).find("1.299038"), std::string::npos) << e.what();
    }
    EXPECT_THROW(branch_roots({1.0, 0.0, -0.5}), NoSliceError);
    EXPECT_THROW(branch_roots({1.0, 0.3, 1.0}), DomainError);
    // minus branch floor -8M^3H
    const BranchRoots b = branch_roots({1.0, -1.0, 6.0});
    EXPECT_TRUE(b.r_plus);
    EXPECT_FALSE(b.r_minus);
}

TEST(BranchRoots, AgainstOracleOverGrid) {
    for (double H : {0.0, -0.3, -1.0}) {
        const EnvelopeMax m = envelope_max(H, 1.0);
        for (double frac : {0.05, 0.4, 0.9, 0.999}) {
            const double c = std::max(0.0, -8.0 * H) * (1 - frac) + m.C * frac;
            const BranchRoots b = branch_roots({1.0, H, c});
            ASSERT_TRUE(b.r_minus);
            EXPECT_NEAR(*b.r_minus, oracle::envelope_root(H, c, m.R, 2.0), 1e-9);
            if (b.r_plus) { EXPECT_NEAR(*b.r_plus, oracle::envelope_root(H, c, 0.0, m.R), 1e-9); }
        }
    }
}

TEST(Intercept, Values) {
    EXPECT_EQ(t_intercept({1.0, 0.0, 0.0}, Branch::Minus), 0.0);
    const double r = oracle::envelope_root(0.0, 1.0, 1.5, 2.0);
    EXPECT_NEAR(t_intercept({1.0, 0.0, 1.0}, Branch::Minus), oracle::lower_intercept(r), 1e-10);
    EXPECT_NEAR(t_intercept({1.0, 0.0, 1.0}, Branch::Minus), -0.6349270895, 1e-9);
    EXPECT_NEAR(t_intercept({1.0, 0.0, 1.0}, Branch::Plus), -std::exp(0.25), 1e-10);
    EXPECT_NEAR(t_intercept({1.0, 0.0, 1.0}, Branch::Plus), -1.28403, 1e-4);
    const double cyl = t_intercept({1.0, 0.0, envelope_max(0.0, 1.0).C}, Branch::Minus);
    EXPECT_NEAR(cyl, -std::sqrt(0.5) * std::exp(0.375), 1e-10);
    EXPECT_NEAR(cyl, -1.02886, 1e-4);
    EXPECT_NEAR(t_intercept({1.0, 0.0, envelope_max(0.0, 1.0).C}, Branch::Plus), cyl, 1e-10);
    EXPECT_EQ(t_intercept({1.0, 0.0, -1.0}, Branch::Minus, Family::Upper),
              -t_intercept({1.0, 0.0, 1.0}, Branch::Minus));
    EXPECT_THROW(t_intercept({1.0, 0.0, 1.0}, Branch::Minus, Family::Upper), NoSliceError);
}

TEST(Intercept, DecreasingAlongMinusBranch) {
    for (double H : {0.0, -0.5, -1.0}) {
        const EnvelopeMax m = envelope_max(H, 1.0);
        const double lo = std::max(0.0, -8.0 * H);
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 1; i < 40; ++i) {
            const double c = lo + (m.C - lo) * i / 40.0;
            const double t = t_intercept({1.0, H, c}, Branch::Minus);
            EXPECT_LT(t, prev) << "H=" << H << " c=" << c;
            prev = t;
        }
    }
}

TEST(FirstIntegral, MaximalSliceHasZeroSlope) {
    for (double r : {2.5, 3.0, 7.0}) {
        EXPECT_EQ(fprime_first_integral(r, {1.0, 0.0, 0.0}, +1), 0.0);
    }
    // t = const is not spacelike inside the horizon
    EXPECT_THROW(fprime_first_integral(1.0, {1.0, 0.0, 0.0}, +1), NotSpacelikeError);
    EXPECT_THROW(fprime_first_integral(2.0, {1.0, 0.0, 0.0}, +1), DomainError);
    EXPECT_THROW(fprime_first_integral(1.2, {1.0, -0.5, 2.0}, +1), NotSpacelikeError);
}

TEST(FirstIntegral, SolvesSchwarzschildEquation) {
    struct Case {
        SliceParams p;
        double r;
    };
    for (const Case& k : {Case{{1.0, -0.5, 2.0}, 1.0}, Case{{1.0, 0.0, 1.0}, 1.9}, Case{{1.0, 0.0, 1.0}, 3.0},
                          Case{{1.0, -1.0, 6.0}, 0.9}, Case{{1.0, -1.0, 6.0}, 4.0}}) {
        for (int s : {+1, -1}) {
            const double d = 1e-5;
            const double fp = fprime_first_integral(k.r, k.p, s);
            const double fpp = (fprime_first_integral(k.r + d, k.p, s) - fprime_first_integral(k.r - d, k.p, s)) / (2 * d);
            EXPECT_LT(std::abs(cmc_residual_schwarzschild(fp, fpp, k.r, k.p.H, k.p.M, -s)), 1e-6)
                << "H=" << k.p.H << " c=" << k.p.c << " r=" << k.r << " s=" << s;
        }
    }
}

TEST(FirstIntegral, InverseSquareRootBlowUp) {
    const SliceParams p{1.0, 0.0, 1.0};
    const double r0 = 1.0;  // r~+ for (0, 1)
    const double d1 = 1e-6;
    const double d2 = 1e-8;
    // the plus slice lives on r < r~+
    const double f1 = std::abs(fprime_first_integral(r0 - d1, p, 1));
    const double f2 = std::abs(fprime_first_integral(r0 - d2, p, 1));
    const double slope = std::log(f2 / f1) / std::log(d2 / d1);
    EXPECT_NEAR(slope, -0.5, 0.05);
    EXPECT_GT(f2 * std::sqrt(d2), 0.0);
}

TEST(IvpSlice, Maximal) {
    const Hypersurface s = build_slice_ivp({1.0, 0.0, 0.0}, Branch::Minus, 3.0);
    EXPECT_EQ(s.kind, SliceKind::Maximal);
    EXPECT_EQ(max_abs_T(s), 0.0);
    EXPECT_EQ(s.samples.front().X, -3.0);
    EXPECT_EQ(s.samples.back().X, 3.0);
    EXPECT_EQ(s.samples.size(), 2 * 801u - 1);
}

TEST(IvpSlice, CrossingSlice) {
    const Hypersurface s = build_slice_ivp({1.0, 0.0, 1.0}, Branch::Minus, 3.0);
    EXPECT_EQ(s.kind, SliceKind::CrossingMinus);
    EXPECT_EQ(s.family, Family::Lower);
    EXPECT_NEAR(slice_T_at(s, 0.0), -0.6349270895, 1e-9);
    EXPECT_EQ(s.samples[s.samples.size() / 2].region, Region::IIprime);
    EXPECT_EQ(s.samples.back().region, Region::I);
    EXPECT_EQ(s.samples.front().region, Region::Iprime);
    EXPECT_EQ(s.samples.back().X, 3.0);
    const SliceResidual r = slice_cmc_residual(s);
    EXPECT_LT(r.max_abs, 1e-6);
    EXPECT_GT(r.evaluated, 1000u);
    EXPECT_GT(slice_spacelike_margin(s), 0.0);
}

TEST(IvpSlice, InteriorPlusStopsBeforeSingularity) {
    const Hypersurface s = build_slice_ivp({1.0, 0.0, 1.0}, Branch::Plus, 3.0);
    EXPECT_EQ(s.kind, SliceKind::InteriorPlus);
    EXPECT_LT(s.max_abs_X(), 3.0);
    for (const auto& pt : s.samples) {
        EXPECT_GE(pt.r, 0.05 * (1 - 1e-6));
        EXPECT_EQ(pt.region, Region::IIprime);
    }
}

TEST(IvpSlice, ResidualConvergesNearSingularEnd) {
    // The difference jets need a fine grid where the slice steepens near r = 0.
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {801u, 3201u, 12801u}) {
        SliceOptions o;
        o.samples_per_side = n;
        const double r = slice_cmc_residual(build_slice_ivp({1.0, 0.0, 1.0}, Branch::Plus, 3.0, o)).max_abs;
        EXPECT_LT(r, prev / 10.0);
        prev = r;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(IvpSlice, Cylinder) {
    const EnvelopeMax m = envelope_max(0.0, 1.0);
    const Hypersurface s = build_slice_ivp({1.0, 0.0, m.C}, Branch::Minus, 3.0);
    EXPECT_EQ(s.kind, SliceKind::Cylinder);
    const double sq = 0.5 * std::exp(0.75);
    for (double X : {-2.5, -0.7, 0.0, 0.33, 1.0, 2.9}) {
        EXPECT_NEAR(slice_T_at(s, X), -std::sqrt(X * X + sq), 1e-8) << X;
    }
    for (const auto& pt : s.samples) EXPECT_NEAR(pt.r, 1.5, 1e-8);
}

TEST(IvpSlice, UpperFamilyIsReflection) {
    const Hypersurface lower = build_slice_ivp({1.0, -1.0, 6.0}, Branch::Plus, 3.0);
    const Hypersurface upper = build_slice_ivp({1.0, 1.0, -6.0}, Branch::Plus, 3.0, {}, Family::Upper);
    EXPECT_EQ(upper.family, Family::Upper);
    ASSERT_EQ(lower.samples.size(), upper.samples.size());
    for (std::size_t i = 0; i < lower.samples.size(); ++i) {
        EXPECT_EQ(upper.samples[i].X, lower.samples[i].X);
        EXPECT_EQ(upper.samples[i].T, -lower.samples[i].T);
        EXPECT_EQ(upper.samples[i].region, mirror(lower.samples[i].region));
    }
}

TEST(IvpSlice, GradedGrid) {
    SliceOptions o;
    o.grading = kAutoGrading;
    o.samples_per_side = 3201;
    const Hypersurface s = build_slice_ivp({1.0, -20.0, 150.0}, Branch::Plus, 3.0, o);
    EXPECT_GT(s.grading, 0.0);
    const std::size_t n = s.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(s.samples[i].X, -s.samples[n - 1 - i].X);
        if (i > 0) { EXPECT_LT(s.samples[i - 1].X, s.samples[i].X); }
    }
    const SliceResidual r = slice_cmc_residual(s);
    EXPECT_LT(r.max_normalized, 1e-6);
    // near the axis the grid is finer than uniform
    EXPECT_LT(s.samples[n / 2 + 1].X, s.max_abs_X() / 3200.0);
}

TEST(IvpSlice, SliceTAtAxisAndInterpolation) {
    const Hypersurface s = build_slice_ivp({1.0, -0.5, 4.2}, Branch::Minus, 3.0);
    EXPECT_EQ(slice_T_at(s, 0.0), s.t_intercept);
    const Hypersurface m = build_slice_ivp({1.0, 0.0, 0.0}, Branch::Minus, 3.0);
    EXPECT_EQ(slice_T_at(m, 0.7), 0.0);
    EXPECT_THROW(slice_T_at(s, 3.5), DomainError);
}

TEST(Quadrature, MaximalExactly) {
    const std::vector<double> grid = {0.5, 1.0, 3.0};
    const Hypersurface s = build_slice_quadrature({1.0, 0.0, 0.0}, Branch::Minus, grid);
    EXPECT_EQ(s.kind, SliceKind::Maximal);
    EXPECT_EQ(max_abs_T(s), 0.0);
}

TEST(Quadrature, AgreesWithIvp) {
    struct Case {
        SliceParams p;
        Branch b;
    };
    for (const Case& k : {Case{{1.0, 0.0, 1.0}, Branch::Minus}, Case{{1.0, 0.0, 1.0}, Branch::Plus},
                          Case{{1.0, -1.0, 6.0}, Branch::Plus}, Case{{1.0, -0.5, 4.2}, Branch::Minus}}) {
        const Hypersurface ivp = build_slice_ivp(k.p, k.b, 3.0);
        const Hypersurface quad = build_slice_quadrature(k.p, k.b, default_quadrature_grid(k.p, k.b), {}, 3.0);
        EXPECT_EQ(quad.generator, SliceGenerator::Quadrature);
        double worst = 0.0;
        for (const auto& pt : quad.samples) {
            if (std::abs(pt.X) > ivp.max_abs_X()) continue;
            worst = std::max(worst, std::abs(pt.T - slice_T_at(ivp, pt.X)));
        }
        EXPECT_LT(worst, 1e-5) << "H=" << k.p.H << " c=" << k.p.c;
    }
}

TEST(Reflect, FlipsAndIsInvolution) {
    const Hypersurface s = build_slice_ivp({1.0, 0.0, 1.0}, Branch::Minus, 3.0);
    const Hypersurface r = reflect_slice(s);
    EXPECT_EQ(r.family, Family::Upper);
    EXPECT_EQ(r.params.H, -s.params.H);
    EXPECT_EQ(r.params.c, -s.params.c);
    EXPECT_EQ(r.t_intercept, -s.t_intercept);
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        EXPECT_EQ(r.samples[i].T, -s.samples[i].T);
        EXPECT_EQ(r.samples[i].r, s.samples[i].r);
        EXPECT_EQ(r.samples[i].region, mirror(s.samples[i].region));
    }
    const Hypersurface rr = reflect_slice(r);
    for (std::size_t i = 0; i < s.samples.size(); ++i) EXPECT_EQ(rr.samples[i].T, s.samples[i].T);
    EXPECT_EQ(rr.family, s.family);
}

TEST(Names, RoundTrip) {
    for (SliceKind k : {SliceKind::InteriorPlus, SliceKind::CrossingMinus, SliceKind::Cylinder, SliceKind::Maximal}) {
        EXPECT_EQ(slice_kind_from_string(to_string(k)), k);
    }
    EXPECT_EQ(default_family({1.0, -1.0, 2.0}), Family::Lower);
    EXPECT_EQ(default_family({1.0, 0.0, 0.0}), Family::Lower);
    EXPECT_EQ(default_family({1.0, 1.0, -2.0}), Family::Upper);
}
