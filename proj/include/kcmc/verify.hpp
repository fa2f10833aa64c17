#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kcmc/foliation.hpp"
#include "kcmc/report.hpp"
#include "kcmc/slice.hpp"

namespace kcmc {

struct VerifyContext {
    FoliationCurve curve;
    std::vector<double> c_grid = default_c_grid();
    std::vector<double> X_grid = default_X_grid();
    double X_max = 3.0;
    SliceOptions slice;
    // Residual checks difference the IVP output; steep leaves need the
    // denser, axis-graded grid to resolve their curvature radius.
    std::size_t residual_samples_per_side = 12801;
    std::size_t coverage_points = 50;
    std::uint64_t seed = 20240601;

    const std::vector<Hypersurface>& leaves() {
        if (!leaves_) leaves_ = build_leaves(c_grid, curve, X_max, slice);
        return *leaves_;
    }

private:
    std::optional<std::vector<Hypersurface>> leaves_;
};

inline const std::array<const char*, 8> kSuiteNames = {
    "residual", "spacelike", "symmetry", "disjoint", "coverage", "crosscheck", "prop1", "mo-family"};

namespace detail {

inline std::string where(std::initializer_list<std::pair<const char*, double>> items) {
    std::ostringstream os;
    os.precision(10);
    bool first = true;
    for (const auto& [key, value] : items) {
        if (!first) os << ", ";
        os << key << '=' << value;
        first = false;
    }
    return os.str();
}

inline std::string compact(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline VerificationReport verify_residual(VerifyContext& ctx) {
    VerificationReport rep;
    const double tol = ctx.slice.tol.resid;
    SliceOptions fine = ctx.slice;
    fine.samples_per_side = ctx.residual_samples_per_side;
    fine.grading = kAutoGrading;

    double worst = 0.0;
    double worst_abs = 0.0;
    double worst_c = 0.0;
    double worst_X = 0.0;
    for (double c : ctx.c_grid) {
        const SliceResidual r = slice_cmc_residual(leaf(c, ctx.curve, ctx.X_max, fine));
        worst_abs = std::max(worst_abs, r.max_abs);
        if (r.max_normalized >= worst) {
            worst = r.max_normalized;
            worst_c = c;
            worst_X = r.worst_X;
        }
    }
    rep.add("residual.leaves", worst < tol, worst, detail::where({{"c", worst_c}, {"X", worst_X}}), tol,
            "max |residual| / max(1, largest term) over all leaves; max absolute residual " +
                std::to_string(worst_abs));

    const AlphaIntersection ai = alpha_curve_intersection(ctx.curve, ctx.slice.tol.root);
    const SliceResidual rc = slice_cmc_residual(leaf(ai.C, ctx.curve, ctx.X_max, fine));
    rep.add("residual.cylinder-leaf", rc.max_normalized < tol, rc.max_normalized,
            detail::where({{"c", ai.C}, {"X", rc.worst_X}}), tol);

    double max_maximal = 0.0;
    for (double X : ctx.X_grid) {
        max_maximal = std::max(max_maximal, std::abs(cmc_residual_kruskal(0.0, 0.0, 0.0, X, 0.0, ctx.curve.M)));
    }
    rep.add("residual.maximal-slice", max_maximal < 1e-12, max_maximal, "T = 0", 1e-12);
    return rep;
}

inline VerificationReport verify_spacelike(VerifyContext& ctx) {
    VerificationReport rep;
    double worst = std::numeric_limits<double>::infinity();
    double worst_c = 0.0;
    for (const auto& s : ctx.leaves()) {
        const double m = slice_spacelike_margin(s);
        if (m < worst) {
            worst = m;
            worst_c = s.params.c;
        }
    }
    rep.add("spacelike.margin", worst > 0, worst, detail::where({{"c", worst_c}}), 0.0,
            "min over leaves and samples of 1 - (dT/dX)^2");
    return rep;
}

inline VerificationReport verify_symmetry(VerifyContext& ctx) {
    VerificationReport rep;
    const double tol_coord = ctx.slice.tol.coord;
    const double M = ctx.curve.M;
    double axis_dev = 0.0;
    double axis_c = 0.0;
    double rel_dev = 0.0;
    double rel_c = 0.0;
    bool involution = true;
    for (const auto& s : ctx.leaves()) {
        const std::size_t n = s.samples.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = s.samples[i];
            const auto& b = s.samples[n - 1 - i];
            const double d = std::max(std::abs(a.T - b.T), std::abs(a.X + b.X));
            if (d > axis_dev) {
                axis_dev = d;
                axis_c = s.params.c;
            }
            const double lhs = (a.r - 2.0 * M) * std::exp(a.r / (2.0 * M));
            const double rhs = (a.X - a.T) * (a.X + a.T);
            const double e = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
            if (e > rel_dev) {
                rel_dev = e;
                rel_c = s.params.c;
            }
        }
        const Hypersurface twice = reflect_slice(reflect_slice(s));
        for (std::size_t i = 0; i < n && involution; ++i) {
            involution = twice.samples[i].T == s.samples[i].T && twice.samples[i].X == s.samples[i].X &&
                         twice.samples[i].region == s.samples[i].region;
        }
        involution = involution && twice.params.H == s.params.H && twice.params.c == s.params.c;
    }
    rep.add("symmetry.T-axis", axis_dev <= tol_coord, axis_dev, detail::where({{"c", axis_c}}), tol_coord,
            "max |T(-X) - T(X)| over leaf samples");
    rep.add("symmetry.kruskal-relation", rel_dev <= tol_coord, rel_dev, detail::where({{"c", rel_c}}),
            tol_coord, "(r - 2M) e^{r/2M} = X^2 - T^2 at every sample");
    rep.add("symmetry.reflect-involution", involution, involution ? 0.0 : 1.0, "", 0.0,
            "reflect(reflect(s)) reproduces s bit for bit");

    std::vector<double> positive;
    for (double c : ctx.c_grid) {
        if (c > 0) positive.push_back(c);
    }
    const ReflectionResult rr = reflection_closure(ctx.curve, positive, ctx.X_max, ctx.slice);
    const double tol_refl = 1e-8;
    if (ctx.curve.A == 0.0) {
        rep.add("symmetry.reflection-closure", rr.max_deviation < tol_refl, rr.max_deviation,
                detail::where({{"c", rr.worst_c}, {"X", rr.worst_X}}), tol_refl,
                "leaf(-c) against reflect(leaf(c))");
    } else {
        rep.add("symmetry.reflection-broken", rr.max_deviation > tol_refl, rr.max_deviation,
                detail::where({{"c", rr.worst_c}, {"X", rr.worst_X}}), tol_refl,
                "A != 0: the family is expected not to be X-axis symmetric");
    }
    return rep;
}

inline VerificationReport verify_disjoint(VerifyContext& ctx) {
    VerificationReport rep;
    const auto& leaves = ctx.leaves();
    const DisjointnessResult d = verify_disjointness(std::span<const Hypersurface>(leaves), ctx.X_grid);
    rep.add("disjoint.adjacent-leaves", d.pass, d.min_margin,
            detail::where({{"c1", d.worst_c_upper}, {"c2", d.worst_c_lower}, {"X", d.worst_X}}), 0.0,
            "min over adjacent pairs of T_{c1}(X) - T_{c2}(X); " + std::to_string(d.comparisons) +
                " comparisons");

    bool h_ok = true;
    bool t_ok = true;
    double worst_h = std::numeric_limits<double>::infinity();
    double worst_h_c = 0.0;
    for (std::size_t i = 1; i < leaves.size(); ++i) {
        const double gap = leaves[i - 1].params.H - leaves[i].params.H;
        if (gap < worst_h) {
            worst_h = gap;
            worst_h_c = leaves[i].params.c;
        }
        h_ok = h_ok && gap > 0;
        t_ok = t_ok && leaves[i].t_intercept < leaves[i - 1].t_intercept;
    }
    if (leaves.size() < 2) worst_h = 0.0;
    rep.add("disjoint.H-decreasing", h_ok, worst_h, detail::where({{"c", worst_h_c}}), 0.0,
            "H(c) strictly decreasing over ascending c");
    rep.add("disjoint.intercepts-decreasing", t_ok, t_ok ? 0.0 : 1.0, "", 0.0,
            "T-intercepts strictly decreasing over ascending c");
    return rep;
}

/// Points with |T|, |X| <= 3M strictly inside the singularities and at
/// r >= 0.1 M, drawn from a seeded generator.
inline std::vector<std::pair<double, double>> coverage_points(double M, std::size_t count,
                                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0 * M, 3.0 * M);
    std::vector<std::pair<double, double>> out;
    while (out.size() < count) {
        const double T = u(rng);
        const double X = u(rng);
        const double s = (X - T) * (X + T);
        if (!(s > -2.0 * M)) continue;
        if (detail::areal_radius_from_interval(s, M) < 0.1 * M) continue;
        out.emplace_back(T, X);
    }
    return out;
}

inline VerificationReport verify_coverage(VerifyContext& ctx) {
    VerificationReport rep;
    const double M = ctx.curve.M;
    FoliationOptions fo;
    fo.slice = ctx.slice;
    fo.X_max = ctx.X_max;
    const double tol_T = 1e-6;

    double worst = 0.0;
    double wT = 0.0;
    double wX = 0.0;
    std::string failure;
    for (const auto& [T, X] : coverage_points(M, ctx.coverage_points, ctx.seed)) {
        try {
            const LocateResult r = locate(T, X, ctx.curve, 1e-10, fo);
            if (!(std::abs(r.residual_T) <= worst)) {
                worst = std::abs(r.residual_T);
                wT = T;
                wX = X;
            }
        } catch (const Error& e) {
            worst = std::numeric_limits<double>::infinity();
            wT = T;
            wX = X;
            failure = e.what();
        }
    }
    rep.add("coverage.random-points", worst < tol_T, worst, detail::where({{"T", wT}, {"X", wX}}), tol_T,
            failure.empty() ? std::to_string(ctx.coverage_points) + " points, |T_leaf(X') - T'|" : failure);

    const double c_star = ctx.curve.A + 3.8125 * M * M;
    const Hypersurface ls = leaf(c_star, ctx.curve, ctx.X_max, ctx.slice);
    const SlicePoint pt = ls.samples[ls.samples.size() * 3 / 4];
    const LocateResult back = locate(pt.T, pt.X, ctx.curve, 1e-12, fo);
    const double dc = std::abs(back.c - c_star);
    rep.add("coverage.round-trip", dc < 1e-6 * std::max(1.0, std::abs(c_star)), dc,
            detail::where({{"c*", c_star}, {"T", pt.T}, {"X", pt.X}}), 1e-6, "|locate(leaf point) - c*|");

    const AlphaIntersection ai = alpha_curve_intersection(ctx.curve, ctx.slice.tol.root);
    const double s = (ai.R - 2.0 * M) * std::exp(ai.R / (2.0 * M));
    const double Xc = 0.5 * M;
    const double Tc = -std::sqrt(Xc * Xc - s);
    const LocateResult cyl = locate(Tc, Xc, ctx.curve, 1e-12, fo);
    const double dcyl = std::abs(cyl.c - ai.C);
    rep.add("coverage.cylinder-point", dcyl < 1e-6, dcyl, detail::where({{"T", Tc}, {"X", Xc}}), 1e-6,
            "point on the hyperbola r = R locates the alpha-intersection leaf");
    return rep;
}

struct CrosscheckCase {
    double H;
    double c;
    Branch branch;
};

inline const std::array<CrosscheckCase, 3> kCrosscheckCases = {
    CrosscheckCase{0.0, 1.0, Branch::Minus}, CrosscheckCase{0.0, 1.0, Branch::Plus},
    CrosscheckCase{-1.0, 6.0, Branch::Plus}};

/// sup |T_quadrature - T_ivp| over quadrature samples inside the IVP range.
inline double two_path_deviation(const SliceParams& p, Branch branch, double X_max,
                                 const SliceOptions& options, double* worst_X = nullptr) {
    const Hypersurface ivp = build_slice_ivp(p, branch, X_max, options);
    const std::vector<double> grid = default_quadrature_grid(p, branch, 400, 6.0, options);
    const Hypersurface quad = build_slice_quadrature(p, branch, grid, options, X_max);
    double worst = 0.0;
    for (const auto& pt : quad.samples) {
        if (std::abs(pt.X) > ivp.max_abs_X()) continue;
        const double d = std::abs(pt.T - slice_T_at(ivp, pt.X));
        if (d > worst) {
            worst = d;
            if (worst_X) *worst_X = pt.X;
        }
    }
    return worst;
}

inline VerificationReport verify_crosscheck(VerifyContext& ctx) {
    VerificationReport rep;
    const double tol = 1e-5;
    for (const auto& cc : kCrosscheckCases) {
        const SliceParams p{ctx.curve.M, cc.H * (1.0 / ctx.curve.M), cc.c * ctx.curve.M * ctx.curve.M};
        double wx = 0.0;
        const double d = two_path_deviation(p, cc.branch, ctx.X_max, ctx.slice, &wx);
        rep.add("crosscheck.H=" + detail::compact(cc.H) + ",c=" + detail::compact(cc.c) + "," +
                    std::string(to_string(cc.branch)),
                d < tol, d, detail::where({{"X", wx}}), tol, "sup |T_quadrature - T_ivp|");
    }
    return rep;
}

inline VerificationReport verify_prop1(VerifyContext& ctx) {
    VerificationReport rep;
    const FoliationCurve& fc = ctx.curve;
    const double M = fc.M;
    const double twoM = 2.0 * M;
    const CurveCertificate cert = certify(fc);
    rep.add("prop1.boundary-value", cert.y_at_2M == fc.A, std::abs(cert.y_at_2M - fc.A), "r=2M", 0.0,
            "y(2M) = A exactly");
    rep.add("prop1.decreasing", cert.decreasing, cert.max_derivative,
            detail::where({{"r", cert.argmax_r}}), 0.0, "max y'(r) on 10^4 interior radii");
    rep.add("prop1.blow-up", cert.blows_up, cert.blow_up_r, "first r = 2M 10^-k with y > 10^3 M^2",
            1e3 * M * M, "y(2M 10^-k) increasing in k until it exceeds 10^3 M^2; y(2M 10^-3) = " +
                             detail::compact(cert.y_near_zero));

    const double H_top = std::min(0.0, -fc.A / (8.0 * M * M * M));
    int worst_changes = 1;
    double worst_H = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double H = -5.0 / M + (H_top + 5.0 / M) * i / 20.0;
        const int n = intersection_sign_changes(fc, H);
        if (n != 1) {
            worst_changes = n;
            worst_H = H;
        }
    }
    rep.add("prop1.unique-intersection", worst_changes == 1, worst_changes,
            worst_changes == 1 ? std::string() : detail::where({{"H", worst_H}}),
            1.0, "sign changes of y - k~_H on (0, 2M] for 21 H in [-5/M, " + detail::compact(H_top) + "]");

    int alpha_changes = 0;
    bool prev_pos = true;
    for (int i = 1; i < 10000; ++i) {
        const double r = twoM * i / 10000.0;
        const bool pos = alpha_gap(r, fc) > 0;
        if (i > 1 && pos != prev_pos) ++alpha_changes;
        prev_pos = pos;
    }
    const AlphaIntersection ai = alpha_curve_intersection(fc, ctx.slice.tol.root);
    const double fwd = std::abs(gamma_y(ai.R, fc) - envelope_plus(ai.H, ai.R, M));
    const double fwd_tol = 1e-9 * std::max(1.0, std::abs(ai.C));
    rep.add("prop1.alpha-intersection", alpha_changes == 1 && fwd < fwd_tol, fwd,
            detail::where({{"R", ai.R}, {"C", ai.C}, {"sign_changes", static_cast<double>(alpha_changes)}}),
            fwd_tol, "y(R) = k~(H^(R), R) with one crossing on the grid");
    return rep;
}

inline VerificationReport verify_mo_family(VerifyContext& ctx) {
    VerificationReport rep;
    const double M = ctx.curve.M;
    const std::vector<double> Hs = {1.0 / M, 0.5 / M, 0.0, -0.5 / M, -1.0 / M};  // ascending c
    const std::vector<Hypersurface> family = mo_linear_family(Hs, M, ctx.X_max, ctx.slice);
    double worst = 0.0;
    double worst_H = 0.0;
    for (const auto& s : family) {
        const double t0 = std::abs(slice_T_at(s, 0.0));
        if (t0 >= worst) {
            worst = t0;
            worst_H = s.params.H;
        }
    }
    rep.add("mo-family.common-point", worst < 1e-8, worst, detail::where({{"H", worst_H}}), 1e-8,
            "every c = -8M^3H slice passes through the bifurcation sphere");
    const DisjointnessResult d = verify_disjointness(std::span<const Hypersurface>(family), ctx.X_grid);
    rep.add("mo-family.not-disjoint", !d.pass, d.min_margin,
            detail::where({{"c1", d.worst_c_upper}, {"c2", d.worst_c_lower}, {"X", d.worst_X}}), 0.0,
            "expected: the linear family fails pairwise disjointness");
    return rep;
}

/// Runs one named suite, or every suite for "all".
inline VerificationReport run_verify_suite(const std::string& suite, VerifyContext& ctx) {
    if (suite == "all") {
        VerificationReport rep;
        for (const char* name : kSuiteNames) rep.append(run_verify_suite(name, ctx));
        return rep;
    }
    if (suite == "residual") return verify_residual(ctx);
    if (suite == "spacelike") return verify_spacelike(ctx);
    if (suite == "symmetry") return verify_symmetry(ctx);
    if (suite == "disjoint") return verify_disjoint(ctx);
    if (suite == "coverage") return verify_coverage(ctx);
    if (suite == "crosscheck") return verify_crosscheck(ctx);
    if (suite == "prop1") return verify_prop1(ctx);
    if (suite == "mo-family") return verify_mo_family(ctx);
    throw DomainError("unknown suite '" + suite + "'");
}

}  // namespace kcmc
