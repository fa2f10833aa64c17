#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kcmc/foliation.hpp"
#include "oracles.hpp"

using namespace kcmc;

namespace {

const FoliationCurve kDefault{};

FoliationCurve shifted(double A) {
    FoliationCurve fc;
    fc.A = A;
    return fc;
}

}  // namespace

TEST(Curve, Values) {
    EXPECT_EQ(gamma_y(2.0, kDefault), 0.0);
    EXPECT_EQ(gamma_y(2.0, shifted(0.5)), 0.5);
    EXPECT_EQ(gamma_y(2.0, shifted(-1.25)), -1.25);
    EXPECT_NEAR(gamma_y(1.0, kDefault), 3.8125, 1e-14);
    EXPECT_NEAR(gamma_y(1e-3, kDefault), 3000.0, 0.1);
    EXPECT_GT(gamma_y(2e-3, kDefault), 1e3);
    EXPECT_THROW(gamma_y(2.5, kDefault), DomainError);
    EXPECT_THROW(gamma_y(0.0, kDefault), DomainError);
}

TEST(Curve, GrowsWithoutBoundTowardZero) {
    double prev = 0.0;
    for (int k = 1; k <= 4; ++k) {
        const double r = 2.0 * std::pow(10.0, -k);
        const double y = gamma_y(r, kDefault);
        EXPECT_GT(y, prev);
        // rate r^{-(p-1)}: each decade multiplies y by about 10
        if (k > 2) { EXPECT_NEAR(y / prev, 10.0, 0.5); }
        prev = y;
    }
}

TEST(Curve, DerivativeMatchesDifferences) {
    for (const FoliationCurve& fc : {kDefault, shifted(0.5), FoliationCurve{1.0, 3.0, 40.0, 0.0}}) {
        for (double r = 0.05; r < 1.99; r += 0.0731) {
            const double d = 1e-6 * r;
            const double fd = (gamma_y(r + d, fc) - gamma_y(r - d, fc)) / (2 * d);
            EXPECT_NEAR(gamma_y_derivative(r, fc), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "r=" << r;
        }
    }
    EXPECT_LT(gamma_y_derivative(2.0 - 1e-10, kDefault), -1e4);
}

TEST(Curve, SlopeCoreMaximum) {
    const double rs = (3.0 - std::sqrt(3.0)) / 2.0;
    EXPECT_NEAR(slope_core_argmax(1.0), rs, 1e-15);
    EXPECT_NEAR(envelope_slope_core(rs, 1.0), std::sqrt(6.0 * std::sqrt(3.0) - 9.0), 1e-14);
    EXPECT_NEAR(slope_core_max(1.0), 1.17996, 1e-5);
    const double grid = oracle::grid_argmax([](double r) { return envelope_slope_core(r, 1.0); }, 1e-6, 1.4, 140000);
    EXPECT_NEAR(grid, rs, 2e-5);
}

TEST(Curve, DefaultAmplitude) {
    // bracket B(r) = 3 r^2 / ((p+2)(2M)^{p+2}) + (p-1) / ((p+2) r^p), minimised on (0, 2M]
    auto B = [](double r) { return 3.0 * r * r / (4.0 * 16.0) + 1.0 / (4.0 * r * r); };
    const double rmin = oracle::grid_argmax([&](double r) { return -B(r); }, 0.01, 2.0, 400000);
    const double expected = 1.05 * std::sqrt(6.0 * std::sqrt(3.0) - 9.0) / B(rmin);
    EXPECT_NEAR(default_amplitude(2.0, 1.0, 1.05), expected, 1e-6);
    EXPECT_NEAR(default_amplitude(2.0, 1.0, 1.05), 5.7225003245, 1e-9);
    EXPECT_TRUE(certify({1.0, 2.0, default_amplitude(2.0), 0.0}).ok());
    EXPECT_THROW(default_amplitude(2.0, 1.0, 1.0), DomainError);
}

TEST(Curve, Certificate) {
    const CurveCertificate c = certify(kDefault);
    EXPECT_TRUE(c.ok());
    EXPECT_LT(c.max_derivative, -2.0);
    EXPECT_EQ(c.y_at_2M, 0.0);
    EXPECT_GT(c.y_near_zero, 1e3);
    EXPECT_TRUE(c.blows_up);
    EXPECT_NEAR(c.blow_up_r, 2e-3, 1e-15);
    const CurveCertificate weak = certify({1.0, 2.0, 1.0, 0.0});
    EXPECT_FALSE(weak.decreasing);
    EXPECT_THROW(shifted_curve_pair({1.0, 2.0, 1.0, 0.0}), InvalidCurveError);
    EXPECT_THROW((FoliationCurve{1.0, 1.0, 12.0, 0.0}.validate()), DomainError);
}

TEST(Curve, UniqueIntersection) {
    for (int i = 0; i <= 20; ++i) {
        const double H = -5.0 + 5.0 * i / 20.0;
        EXPECT_EQ(intersection_sign_changes(kDefault, H), 1) << "H=" << H;
    }
}

TEST(Params, Anchors) {
    const LeafParams z = params_from_c(0.0, kDefault);
    EXPECT_EQ(z.r, 2.0);
    EXPECT_EQ(z.H, 0.0);
    EXPECT_EQ(z.branch, LeafBranch::Maximal);

    const LeafParams a = params_from_c(3.8125, kDefault);
    EXPECT_NEAR(a.r, 1.0, 1e-12);
    EXPECT_NEAR(a.H, -2.8125, 1e-11);
    EXPECT_EQ(a.family, Family::Lower);
    EXPECT_EQ(a.branch, LeafBranch::Plus);

    const LeafParams b = params_from_c(-3.8125, kDefault);
    EXPECT_NEAR(b.r, 1.0, 1e-12);
    EXPECT_NEAR(b.H, 2.8125, 1e-11);
    EXPECT_EQ(b.family, Family::Upper);
    EXPECT_EQ(b.branch, LeafBranch::Plus);
}

TEST(Params, EnvelopeConsistencyAndMonotoneH) {
    const auto grid = default_c_grid();
    ASSERT_EQ(grid.size(), 41u);
    double prev = std::numeric_limits<double>::infinity();
    for (double c : grid) {
        const LeafParams lp = params_from_c(c, kDefault);
        EXPECT_LT(lp.H, prev) << "c=" << c;
        prev = lp.H;
        if (lp.family == Family::Lower) {
            EXPECT_NEAR(envelope_plus(lp.H, lp.r, 1.0), c, 1e-12 * std::max(1.0, std::abs(c)));
        } else {
            EXPECT_NEAR(envelope_plus(-lp.H, lp.r, 1.0), -c, 1e-12 * std::max(1.0, std::abs(c)));
        }
    }
}

TEST(Params, ShiftedFamilyJoinsAtA) {
    const FoliationCurve fc = shifted(0.5);
    const LeafParams at = params_from_c(0.5, fc);
    EXPECT_EQ(at.r, 2.0);
    EXPECT_EQ(at.H, -0.5 / 8.0);
    const LeafParams below = params_from_c(0.5 - 1e-4, fc);
    const LeafParams above = params_from_c(0.5 + 1e-4, fc);
    EXPECT_EQ(below.family, Family::Upper);
    EXPECT_GT(below.H, at.H);
    EXPECT_LT(above.H, at.H);
    EXPECT_NEAR(below.H, at.H, 2e-5);
    EXPECT_NEAR(above.H, at.H, 2e-5);
}

TEST(ShiftedPair, ReducesAtZero) {
    const ShiftedCurvePair pair = shifted_curve_pair(kDefault);
    EXPECT_EQ(pair.lower.A, 0.0);
    EXPECT_EQ(pair.mirrored.A, 0.0);
    const ShiftedCurvePair s = shifted_curve_pair(shifted(0.5));
    EXPECT_EQ(s.mirrored.A, -0.5);
    for (double r : {0.2, 1.0, 1.9}) EXPECT_EQ(gamma_y(r, s.lower), gamma_y(r, shifted(0.5)));
}

TEST(Leaf, InterceptFormula) {
    for (double c : default_c_grid()) {
        const Hypersurface s = leaf(c, kDefault, 3.0);
        const LeafParams lp = params_from_c(c, kDefault);
        const double expected = (lp.family == Family::Lower ? 1.0 : -1.0) * oracle::lower_intercept(lp.r);
        EXPECT_NEAR(slice_T_at(s, 0.0), expected, 1e-8) << "c=" << c;
    }
}

TEST(Leaf, Maximal) {
    const Hypersurface s = leaf(0.0, kDefault, 3.0);
    EXPECT_EQ(s.kind, SliceKind::Maximal);
    for (const auto& pt : s.samples) EXPECT_EQ(pt.T, 0.0);
}

TEST(Alpha, Intersection) {
    const AlphaIntersection ai = alpha_curve_intersection(kDefault);
    EXPECT_NEAR(ai.C, 1.898464233209, 1e-10);
    EXPECT_NEAR(ai.R, 1.742092657337, 1e-10);
    EXPECT_NEAR(ai.H, -0.138213870714, 1e-10);
    EXPECT_NEAR(gamma_y(ai.R, kDefault), envelope_plus(ai.H, ai.R, 1.0), 1e-12);
    EXPECT_NEAR(envelope_max(ai.H, 1.0).R, ai.R, 1e-9);
    EXPECT_NEAR(envelope_max(ai.H, 1.0).C, ai.C, 1e-11);
}

TEST(Alpha, CylinderLeaf) {
    const AlphaIntersection ai = alpha_curve_intersection(kDefault);
    const LeafParams lp = params_from_c(ai.C, kDefault);
    EXPECT_EQ(lp.branch, LeafBranch::Cylinder);
    const Hypersurface s = leaf(ai.C, kDefault, 3.0);
    const double sR = (ai.R - 2.0) * std::exp(ai.R / 2.0);
    for (const auto& pt : s.samples) EXPECT_NEAR(pt.X * pt.X - pt.T * pt.T, sR, 1e-5);
}

TEST(MoFamily, CommonPointAndOverlap) {
    const std::vector<double> Hs = {1.0, 0.5, 0.0, -0.5, -1.0};
    const auto fam = mo_linear_family(Hs, 1.0, 3.0);
    ASSERT_EQ(fam.size(), 5u);
    EXPECT_EQ(fam[2].kind, SliceKind::Maximal);
    EXPECT_EQ(fam[3].params.c, 4.0);
    EXPECT_NEAR(envelope_plus(-0.5, 2.0, 1.0), 4.0, 0.0);
    for (const auto& s : fam) EXPECT_LT(std::abs(slice_T_at(s, 0.0)), 1e-8);
    EXPECT_FALSE(verify_disjointness(std::span<const Hypersurface>(fam), default_X_grid()).pass);
}

TEST(Disjointness, DefaultFamily) {
    const auto grid = default_c_grid();
    const DisjointnessResult d = verify_disjointness(kDefault, grid, default_X_grid(), 3.0);
    EXPECT_TRUE(d.pass);
    EXPECT_GT(d.min_margin, 0.0);
    EXPECT_GT(d.comparisons, 400u);
}

TEST(Disjointness, Vacuous) {
    const std::vector<double> one = {1.0};
    EXPECT_TRUE(verify_disjointness(kDefault, one, default_X_grid(), 3.0).pass);
}

TEST(Disjointness, ShiftedFamily) {
    const auto grid = default_c_grid();
    EXPECT_TRUE(verify_disjointness(shifted(0.5), grid, default_X_grid(), 3.0).pass);
}

TEST(Reflection, ClosureOnlyWithoutShift) {
    std::vector<double> cs;
    for (double c : default_c_grid()) if (c > 0) cs.push_back(c);
    EXPECT_LT(reflection_closure(kDefault, cs, 3.0).max_deviation, 1e-8);
    EXPECT_GT(reflection_closure(shifted(0.5), cs, 3.0).max_deviation, 1e-3);
}

TEST(Locate, MaximalLeaf) {
    for (double X : {-2.0, 0.0, 0.4, 1.2}) {
        const LocateResult r = locate(0.0, X, kDefault);
        EXPECT_NEAR(r.c, 0.0, 1e-9) << X;
        EXPECT_EQ(r.params.branch, LeafBranch::Maximal);
    }
}

TEST(Locate, RoundTrip) {
    const Hypersurface s = leaf(3.8125, kDefault, 3.0);
    for (std::size_t i : {s.samples.size() / 2, s.samples.size() * 3 / 5, s.samples.size() * 9 / 10}) {
        const LocateResult r = locate(s.samples[i].T, s.samples[i].X, kDefault, 1e-12);
        EXPECT_NEAR(r.c, 3.8125, 1e-6);
        EXPECT_LT(std::abs(r.residual_T), 1e-8);
    }
}

TEST(Locate, CylinderPoint) {
    const AlphaIntersection ai = alpha_curve_intersection(kDefault);
    const double s = (ai.R - 2.0) * std::exp(ai.R / 2.0);
    for (double X : {0.0, 0.7, -2.0}) {
        const LocateResult r = locate(-std::sqrt(X * X - s), X, kDefault, 1e-12);
        EXPECT_NEAR(r.c, ai.C, 1e-6);
    }
}

TEST(Locate, UpperHalfAndShift) {
    const LocateResult up = locate(0.8, 0.3, kDefault);
    EXPECT_LT(up.c, 0.0);
    const LocateResult down = locate(-0.8, 0.3, kDefault);
    EXPECT_NEAR(up.c, -down.c, 1e-8);
    const LocateResult sh = locate(0.8, 0.3, shifted(0.5));
    EXPECT_LT(std::abs(sh.residual_T), 1e-8);
}

TEST(Locate, Errors) {
    EXPECT_THROW(locate(2.0, 0.0, kDefault), BeyondSingularityError);
    EXPECT_THROW(locate(std::nan(""), 0.0, kDefault), DomainError);
}

TEST(Grids, Defaults) {
    const auto c = default_c_grid();
    ASSERT_EQ(c.size(), 41u);
    EXPECT_EQ(c.front(), -100.0);
    EXPECT_EQ(c.back(), 100.0);
    EXPECT_EQ(c[20], 0.0);
    const auto X = default_X_grid();
    ASSERT_EQ(X.size(), 21u);
    EXPECT_EQ(X.front(), 0.0);
    EXPECT_EQ(X.back(), 3.0);
}
