#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/geometry.hpp"
#include "kcmc/numerics.hpp"
#include "kcmc/slice.hpp"

namespace kcmc {

class InvalidCurveError : public DomainError {
public:
    using DomainError::DomainError;
};

// y(r) = A (r/2M)^3 + r^{3/2} (2M - r)^{1/2} + C/(p+2) r^{1-p} (1 - (r/2M)^{p+2})
struct FoliationCurve {
    double M = 1.0;
    double p = 2.0;
    double C = 12.0;
    double A = 0.0;

    void validate() const {
        if (!(M > 0) || !std::isfinite(M)) throw DomainError("FoliationCurve: M must be positive");
        if (!(p > 1) || !std::isfinite(p)) throw DomainError("FoliationCurve: p must exceed 1");
        if (!(C > 0) || !std::isfinite(C)) throw DomainError("FoliationCurve: C must be positive");
        if (!std::isfinite(A)) throw DomainError("FoliationCurve: A must be finite");
    }

    FoliationCurve mirrored() const { return {M, p, C, -A}; }
};

enum class LeafBranch { Plus, Minus, Cylinder, Maximal };

inline std::string_view to_string(LeafBranch b) {
    switch (b) {
        case LeafBranch::Plus: return "plus";
        case LeafBranch::Minus: return "minus";
        case LeafBranch::Cylinder: return "cylinder";
        case LeafBranch::Maximal: return "maximal";
    }
    return "?";
}

inline LeafBranch leaf_branch_from_string(std::string_view text) {
    if (text == "plus") return LeafBranch::Plus;
    if (text == "minus") return LeafBranch::Minus;
    if (text == "cylinder") return LeafBranch::Cylinder;
    if (text == "maximal") return LeafBranch::Maximal;
    throw DomainError("unknown leaf branch '" + std::string(text) + "'");
}

struct LeafParams {
    double c = 0.0;
    double r = 0.0;  // axis radius y^{-1}(c) of the generating curve
    double H = 0.0;
    LeafBranch branch = LeafBranch::Maximal;
    Family family = Family::Lower;
};

// ---------------------------------------------------------------------------
// The curve y(r)
// ---------------------------------------------------------------------------

namespace detail {

inline void require_curve_domain(double r, double M, const char* who, bool closed_right) {
    const bool ok = closed_right ? (r > 0 && r <= 2.0 * M) : (r > 0 && r < 2.0 * M);
    if (!ok) {
        throw DomainError(std::string(who) + ": r = " + std::to_string(r) + " outside " +
                          (closed_right ? "(0, 2M]" : "(0, 2M)"));
    }
}

}  // namespace detail

inline double gamma_y(double r, const FoliationCurve& fc) {
    detail::require_curve_domain(r, fc.M, "gamma_y", true);
    const double M = fc.M;
    const double x = r / (2.0 * M);
    return fc.A * x * x * x + detail::envelope_core(r, M) +
           fc.C / (fc.p + 2.0) * std::pow(r, 1.0 - fc.p) * (1.0 - std::pow(x, fc.p + 2.0));
}

inline double gamma_y_derivative(double r, const FoliationCurve& fc) {
    detail::require_curve_domain(r, fc.M, "gamma_y_derivative", false);
    const double M = fc.M;
    const double p = fc.p;
    const double twoM = 2.0 * M;
    const double bracket = 3.0 * r * r / ((p + 2.0) * std::pow(twoM, p + 2.0)) +
                           (p - 1.0) / ((p + 2.0) * std::pow(r, p));
    return envelope_slope_core(r, M) - fc.C * bracket + 3.0 * fc.A * r * r / (twoM * twoM * twoM);
}

/// Mean curvature carried by the curve point at r: (r^{3/2}(2M-r)^{1/2} - y(r)) / r^3.
inline double curve_curvature(double r, const FoliationCurve& fc) {
    detail::require_curve_domain(r, fc.M, "curve_curvature", true);
    const double twoM = 2.0 * fc.M;
    return -fc.A / (twoM * twoM * twoM) -
           fc.C / (fc.p + 2.0) * (std::pow(r, -(fc.p + 2.0)) - std::pow(twoM, -(fc.p + 2.0)));
}

// Location and value of the maximum of g(r) = r^{1/2}(3M - 2r)/(2M - r)^{1/2}.
inline double slope_core_argmax(double M) { return (3.0 - std::numbers::sqrt3) * M / 2.0; }
inline double slope_core_max(double M) { return std::sqrt(6.0 * std::numbers::sqrt3 - 9.0) * M; }

/// Smallest C making y' < 0 on (0, 2M) for A = 0, times `margin`.
inline double default_amplitude(double p, double M = 1.0, double margin = 1.05) {
    if (!(p > 1)) throw DomainError("default_amplitude: p must exceed 1");
    if (!(M > 0)) throw DomainError("default_amplitude: M must be positive");
    if (!(margin > 1)) throw DomainError("default_amplitude: margin must exceed 1");
    const double twoM = 2.0 * M;
    // The C-bracket 3r^2/((p+2)(2M)^{p+2}) + (p-1)/((p+2) r^p) is convex in r
    // with its minimum at 2M (p(p-1)/6)^{1/(p+2)}, clipped to 2M.
    const double r_min = std::min(twoM, twoM * std::pow(p * (p - 1.0) / 6.0, 1.0 / (p + 2.0)));
    const double bracket = 3.0 * r_min * r_min / ((p + 2.0) * std::pow(twoM, p + 2.0)) +
                           (p - 1.0) / ((p + 2.0) * std::pow(r_min, p));
    return margin * slope_core_max(M) / bracket;
}

struct CurveCertificate {
    bool decreasing = false;
    double max_derivative = 0.0;  // largest y' over the grid
    double argmax_r = 0.0;
    double y_at_2M = 0.0;
    double y_near_zero = 0.0;  // y(2M * 1e-3)
    // y grows at r = 2M 10^-k, k = 1, 2, ..., and first exceeds 1e3 M^2 at
    // blow_up_r (k <= 12).
    bool blows_up = false;
    double blow_up_r = 0.0;
    bool ok() const { return decreasing && blows_up; }
};

/// Grid certificate for a curve: y' < 0 at `grid_points` interior radii,
/// y(2M) = A, and y increasing without bound toward r = 0.
inline CurveCertificate certify(const FoliationCurve& fc, std::size_t grid_points = 10000) {
    fc.validate();
    CurveCertificate cert;
    const double twoM = 2.0 * fc.M;
    cert.max_derivative = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= grid_points; ++i) {
        const double r = twoM * static_cast<double>(i) / static_cast<double>(grid_points + 1);
        const double d = gamma_y_derivative(r, fc);
        if (d > cert.max_derivative) {
            cert.max_derivative = d;
            cert.argmax_r = r;
        }
    }
    cert.decreasing = cert.max_derivative < 0;
    cert.y_at_2M = gamma_y(twoM, fc);
    cert.y_near_zero = gamma_y(twoM * 1e-3, fc);
    double prev = gamma_y(twoM * 0.1, fc);
    for (int k = 2; k <= 12; ++k) {
        const double r = twoM * std::pow(10.0, -k);
        const double y = gamma_y(r, fc);
        if (!(y > prev)) break;
        prev = y;
        if (y > 1e3 * fc.M * fc.M) {
            cert.blows_up = true;
            cert.blow_up_r = r;
            break;
        }
    }
    return cert;
}

/// Number of sign changes of y(r) - k~_H(r) over `grid_points` radii in
/// (0, 2M]; zero counts with the non-positive side.
inline int intersection_sign_changes(const FoliationCurve& fc, double H,
                                     std::size_t grid_points = 10000) {
    const double twoM = 2.0 * fc.M;
    int changes = 0;
    bool prev_positive = true;
    for (std::size_t i = 1; i <= grid_points; ++i) {
        const double r = twoM * static_cast<double>(i) / static_cast<double>(grid_points);
        const bool positive = gamma_y(r, fc) - envelope_plus(H, r, fc.M) > 0;
        if (i > 1 && positive != prev_positive) ++changes;
        prev_positive = positive;
    }
    return changes;
}

// ---------------------------------------------------------------------------
// c -> (r, H)
// ---------------------------------------------------------------------------

namespace detail {

// r in (0, 2M] with y(r) = c, for c >= y(2M) = A.
inline double invert_curve(double c, const FoliationCurve& fc, double tol) {
    const double twoM = 2.0 * fc.M;
    if (c == fc.A) return twoM;
    if (!(c > fc.A)) throw DomainError("invert_curve: c below y(2M)");
    double lo = fc.M;
    while (gamma_y(lo, fc) <= c) {
        lo *= 0.5;
        if (lo < 1e-300) throw DomainError("invert_curve: c too large to invert");
    }
    return find_root_bracketed([&](double r) { return gamma_y(r, fc) - c; }, lo, twoM, tol, 0.0);
}

inline LeafBranch lower_branch(double H, double r, double M, double tol) {
    const double twoM = 2.0 * M;
    if (r >= twoM) return H == 0.0 ? LeafBranch::Maximal : LeafBranch::Minus;
    const EnvelopeMax top = envelope_max_any(H, M, tol);
    if (std::abs(r - top.R) <= tol * M) return LeafBranch::Cylinder;
    return r < top.R ? LeafBranch::Plus : LeafBranch::Minus;
}

}  // namespace detail

/// Leaf parameters for parameter value c. c >= A selects the lower family
/// on y_A; c < A the upper family on W_A(r) = -y_{-A}(r).
inline LeafParams params_from_c(double c, const FoliationCurve& fc, double tol = 1e-12) {
    fc.validate();
    if (!std::isfinite(c)) throw DomainError("params_from_c: c must be finite");
    LeafParams lp;
    lp.c = c + 0.0;  // no -0
    if (c >= fc.A) {
        lp.family = Family::Lower;
        lp.r = detail::invert_curve(c, fc, tol);
        lp.H = (detail::envelope_core(lp.r, fc.M) - c) / (lp.r * lp.r * lp.r);
        if (lp.r == 2.0 * fc.M) lp.H = -fc.A / (8.0 * fc.M * fc.M * fc.M) + 0.0;
        lp.branch = detail::lower_branch(lp.H, lp.r, fc.M, tol);
        return lp;
    }
    const FoliationCurve mirror_curve = fc.mirrored();
    lp.family = Family::Upper;
    lp.r = detail::invert_curve(-c, mirror_curve, tol);
    const double H_mirror = (detail::envelope_core(lp.r, fc.M) + c) / (lp.r * lp.r * lp.r);
    lp.H = -H_mirror;
    lp.branch = detail::lower_branch(H_mirror, lp.r, fc.M, tol);
    return lp;
}

inline double leaf_t_intercept(const LeafParams& lp, double M) {
    return intercept_from_axis_radius(lp.r, M, lp.family);
}

struct FoliationOptions {
    SliceOptions slice;
    double X_max = 3.0;
    double c_cap = 1e6;  // locate bracket limit, units of M^2
};

/// The leaf through parameter value c, built by the IVP from its T-axis point.
inline Hypersurface leaf(double c, const FoliationCurve& fc, double X_max,
                         const SliceOptions& options = {}) {
    const LeafParams lp = params_from_c(c, fc, options.tol.root);
    const SliceParams sp{fc.M, lp.H, c};
    if (lp.branch == LeafBranch::Maximal) {
        return build_slice_ivp_from_axis(sp, 2.0 * fc.M, 0.0, SliceKind::Maximal, Family::Lower,
                                         X_max, options);
    }
    SliceKind kind = SliceKind::CrossingMinus;
    if (lp.branch == LeafBranch::Plus) kind = SliceKind::InteriorPlus;
    if (lp.branch == LeafBranch::Cylinder) kind = SliceKind::Cylinder;
    return build_slice_ivp_from_axis(sp, lp.r, leaf_t_intercept(lp, fc.M), kind, lp.family, X_max,
                                     options);
}

inline std::vector<Hypersurface> build_leaves(std::span<const double> c_values,
                                              const FoliationCurve& fc, double X_max,
                                              const SliceOptions& options = {}) {
    std::vector<Hypersurface> out;
    out.reserve(c_values.size());
    for (double c : c_values) out.push_back(leaf(c, fc, X_max, options));
    return out;
}

// ---------------------------------------------------------------------------
// The alpha curve and the cylinder leaf
// ---------------------------------------------------------------------------

struct AlphaIntersection {
    double C;  // parameter value
    double R;  // radius
    double H;  // mean curvature of the cylinder leaf
};

/// Crossing of y with the locus of envelope maxima: the r where the curve's
/// mean curvature equals the one whose k~_H peaks at r.
inline AlphaIntersection alpha_curve_intersection(const FoliationCurve& fc, double tol = 1e-12) {
    fc.validate();
    const double M = fc.M;
    // (stationary_curvature - curve_curvature) * sqrt(2M - r): finite at 2M.
    auto phi = [&](double r) {
        return (3.0 * M - 2.0 * r) / (3.0 * r * std::sqrt(r)) -
               curve_curvature(r, fc) * std::sqrt(2.0 * M - r);
    };
    double lo = 1.5 * M;
    while (phi(lo) <= 0) {
        lo *= 0.5;
        if (lo < 1e-300) throw BracketError("alpha_curve_intersection: no crossing found");
    }
    const double R = find_root_bracketed(phi, lo, 2.0 * M, tol, 0.0);
    return {gamma_y(R, fc), R, stationary_curvature(R, M)};
}

/// Sign of y(r) - k~(H^(r), r) at r, where H^(r) is the curvature whose
/// envelope peaks at r.
inline double alpha_gap(double r, const FoliationCurve& fc) {
    return gamma_y(r, fc) - envelope_plus(stationary_curvature(r, fc.M), r, fc.M);
}

// ---------------------------------------------------------------------------
// Malec--O Murchadha family
// ---------------------------------------------------------------------------

/// Slices with c = -8 M^3 H; each passes through the bifurcation sphere.
inline std::vector<Hypersurface> mo_linear_family(std::span<const double> H_values, double M,
                                                  double X_max, const SliceOptions& options = {}) {
    std::vector<Hypersurface> out;
    for (double H : H_values) {
        const SliceParams p{M, H, -8.0 * M * M * M * H};
        if (H == 0.0) {
            out.push_back(build_slice_ivp_from_axis(p, 2.0 * M, 0.0, SliceKind::Maximal,
                                                    Family::Lower, X_max, options));
        } else {
            const Family fam = default_family(p);
            out.push_back(build_slice_ivp_from_axis(p, 2.0 * M, 0.0, SliceKind::CrossingMinus, fam,
                                                    X_max, options));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shifted (A != 0) curve pair
// ---------------------------------------------------------------------------

struct ShiftedCurvePair {
    FoliationCurve lower;     // y_A, used for c >= A
    FoliationCurve mirrored;  // y_{-A}; the upper curve is W_A(r) = -y_{-A}(r)

    double lower_value(double r) const { return gamma_y(r, lower); }
    double upper_value(double r) const { return -gamma_y(r, mirrored); }
};

inline ShiftedCurvePair shifted_curve_pair(const FoliationCurve& fc) {
    fc.validate();
    ShiftedCurvePair pair{fc, fc.mirrored()};
    for (const auto* curve : {&pair.lower, &pair.mirrored}) {
        const CurveCertificate cert = certify(*curve);
        if (!cert.ok()) {
            throw InvalidCurveError("shifted_curve_pair: y' < 0 certificate fails for A = " +
                                    std::to_string(curve->A) + " (max y' = " +
                                    std::to_string(cert.max_derivative) + " at r = " +
                                    std::to_string(cert.argmax_r) + ")");
        }
    }
    return pair;
}

// ---------------------------------------------------------------------------
// Verification procedures
// ---------------------------------------------------------------------------

struct DisjointnessResult {
    bool pass = true;
    double min_margin = std::numeric_limits<double>::infinity();
    double worst_c_lower = 0.0;  // the larger c of the worst pair (lower leaf)
    double worst_c_upper = 0.0;
    double worst_X = 0.0;
    std::size_t comparisons = 0;
};

/// For leaves sorted by ascending c, checks T_{c2}(X) < T_{c1}(X) for every
/// adjacent pair c1 < c2 at each station both leaves reach.
inline DisjointnessResult verify_disjointness(std::span<const Hypersurface> leaves,
                                              std::span<const double> X_grid) {
    DisjointnessResult out;
    for (std::size_t i = 1; i < leaves.size(); ++i) {
        const Hypersurface& a = leaves[i - 1];
        const Hypersurface& b = leaves[i];
        if (!(a.params.c < b.params.c)) {
            throw DomainError("verify_disjointness: leaves must be sorted by ascending c");
        }
        for (double X : X_grid) {
            const double ax = std::abs(X);
            if (ax > a.max_abs_X() || ax > b.max_abs_X()) continue;
            const double margin = slice_T_at(a, X) - slice_T_at(b, X);
            ++out.comparisons;
            if (margin < out.min_margin) {
                out.min_margin = margin;
                out.worst_c_lower = b.params.c;
                out.worst_c_upper = a.params.c;
                out.worst_X = X;
            }
        }
    }
    out.pass = !(out.min_margin <= 0);
    return out;
}

inline DisjointnessResult verify_disjointness(const FoliationCurve& fc,
                                              std::span<const double> c_grid,
                                              std::span<const double> X_grid, double X_max,
                                              const SliceOptions& options = {}) {
    if (!std::is_sorted(c_grid.begin(), c_grid.end())) {
        throw DomainError("verify_disjointness: c_grid must be sorted ascending");
    }
    const std::vector<Hypersurface> leaves = build_leaves(c_grid, fc, X_max, options);
    return verify_disjointness(std::span<const Hypersurface>(leaves), X_grid);
}

/// Largest |T| deviation between leaf(-c) and the reflection of leaf(c),
/// over c in `c_values` (c > 0) and the samples both reach.
struct ReflectionResult {
    double max_deviation = 0.0;
    double worst_c = 0.0;
    double worst_X = 0.0;
};

inline ReflectionResult reflection_closure(const FoliationCurve& fc,
                                           std::span<const double> c_values, double X_max,
                                           const SliceOptions& options = {}) {
    ReflectionResult out;
    for (double c : c_values) {
        const Hypersurface mirrored = reflect_slice(leaf(c, fc, X_max, options));
        const Hypersurface direct = leaf(-c, fc, X_max, options);
        const double reach = std::min(mirrored.max_abs_X(), direct.max_abs_X());
        for (const auto& pt : mirrored.samples) {
            if (std::abs(pt.X) > reach) continue;
            const double dev = std::abs(slice_T_at(direct, pt.X) - pt.T);
            if (dev > out.max_deviation) {
                out.max_deviation = dev;
                out.worst_c = c;
                out.worst_X = pt.X;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// locate
// ---------------------------------------------------------------------------

struct LocateResult {
    double c = 0.0;
    LeafParams params;
    double residual_T = 0.0;  // slice_T_at(leaf(c), X') - T'
    int evaluations = 0;
};

namespace detail {

// T of leaf(c) at |X| >= 0, or -inf / +inf when the lower / upper leaf ends
// at the singularity before reaching X.
inline double leaf_T_at_station(double c, double X, const FoliationCurve& fc,
                                const SliceOptions& options) {
    const LeafParams lp = params_from_c(c, fc, options.tol.root);
    if (lp.branch == LeafBranch::Maximal) return 0.0;
    const double T0 = leaf_t_intercept(lp, fc.M);
    if (X == 0.0) return T0;
    const double M = fc.M;
    const double r_stop = std::min(options.r_min_stop * M, 0.5 * lp.r);
    const KruskalCmcRhs rhs{lp.H, M};
    const double eps_space = options.spacelike_margin;
    auto stop = [&](double x, const State<2>& y) -> std::optional<std::string> {
        const double r = areal_radius_from_interval((x - y[0]) * (x + y[0]), M);
        if (!(r >= r_stop)) return std::string("singularity");
        if (!(1.0 - y[1] * y[1] >= eps_space)) return std::string("spacelike");
        return std::nullopt;
    };
    IvpOptions ivp;
    ivp.tol = options.tol.ode;
    ivp.output_points = {X};
    const double beyond = lp.family == Family::Lower ? -std::numeric_limits<double>::infinity()
                                                     : std::numeric_limits<double>::infinity();
    try {
        const Trajectory<2> traj = solve_ivp<2>(rhs, 0.0, State<2>{T0, 0.0}, X, ivp, stop);
        if (traj.stop == IvpStop::Predicate) return beyond;
        return traj.y.back()[0];
    } catch (const IvpError&) {
        return beyond;
    }
}

}  // namespace detail

/// Parameter value c' of the leaf through (T', X').
///
/// Brackets c by doubling from [-1, 1] M^2 (capped at c_cap M^2), then
/// bisects on the map c -> T_c(X'), which is decreasing in c, switching to
/// Illinois steps once both ends are finite.
inline LocateResult locate(double T, double X, const FoliationCurve& fc, double tol = 1e-10,
                           const FoliationOptions& options = {}) {
    fc.validate();
    const double M = fc.M;
    if (!std::isfinite(T) || !std::isfinite(X)) throw DomainError("locate: non-finite point");
    if ((X - T) * (X + T) <= -2.0 * M) {
        throw BeyondSingularityError("locate: point lies on or beyond the r = 0 singularity");
    }
    const double ax = std::abs(X);
    LocateResult out;
    auto g = [&](double c) {
        ++out.evaluations;
        return detail::leaf_T_at_station(c, ax, fc, options.slice) - T;
    };

    const double M2 = M * M;
    const double cap = options.c_cap * M2;
    double lo = -M2;
    double hi = M2;
    double g_lo = g(lo);
    double g_hi = g(hi);
    while (g_hi > 0) {
        if (hi >= cap) {
            throw BracketError("locate: bracket expansion reached c = " + std::to_string(hi) +
                               " without straddling T' (tried c in [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "])");
        }
        lo = hi;
        g_lo = g_hi;
        hi = std::min(2.0 * hi, cap);
        g_hi = g(hi);
    }
    while (g_lo < 0) {
        if (lo <= -cap) {
            throw BracketError("locate: bracket expansion reached c = " + std::to_string(lo) +
                               " without straddling T' (tried c in [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "])");
        }
        hi = lo;
        g_hi = g_lo;
        lo = std::max(2.0 * lo, -cap);
        g_lo = g(lo);
    }

    double c = g_lo == 0 ? lo : hi;
    if (g_lo != 0 && g_hi != 0) {
        int last = 0;  // +1: lo moved last, -1: hi moved last
        for (int it = 0; it < 400; ++it) {
            double mid = 0.5 * (lo + hi);
            if (std::isfinite(g_lo) && std::isfinite(g_hi)) {
                const double secant = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
                if (secant > lo && secant < hi) mid = secant;
            }
            if (!(mid > lo && mid < hi)) {
                c = std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
                break;
            }
            const double g_mid = g(mid);
            c = mid;
            if (std::abs(g_mid) <= tol) break;
            if (g_mid > 0) {
                lo = mid;
                g_lo = g_mid;
                if (last == 1) g_hi *= 0.5;
                last = 1;
            } else {
                hi = mid;
                g_hi = g_mid;
                if (last == -1) g_lo *= 0.5;
                last = -1;
            }
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c))) {
                break;
            }
        }
    }
    out.c = c + 0.0;
    out.params = params_from_c(c, fc, options.slice.tol.root);
    const Hypersurface s = leaf(c, fc, std::max(options.X_max, ax), options.slice);
    out.residual_T = ax <= s.max_abs_X() ? slice_T_at(s, X) - T
                                         : std::numeric_limits<double>::infinity();
    return out;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// 2 * per_side + 1 values: +/- log-spaced magnitudes in [lo, hi] M^2 and 0.
inline std::vector<double> default_c_grid(double M = 1.0, std::size_t per_side = 20,
                                          double lo = 1e-2, double hi = 1e2) {
    std::vector<double> mags;
    for (std::size_t i = 0; i < per_side; ++i) {
        const double s = per_side == 1 ? 0.0
                                       : static_cast<double>(i) / static_cast<double>(per_side - 1);
        mags.push_back(lo * std::pow(hi / lo, s) * M * M);
    }
    std::vector<double> out;
    for (auto it = mags.rbegin(); it != mags.rend(); ++it) out.push_back(-*it);
    out.push_back(0.0);
    for (double m : mags) out.push_back(m);
    return out;
}

inline std::vector<double> default_X_grid(double M = 1.0, std::size_t count = 21, double X_hi = 3.0) {
    return detail::linspace(0.0, X_hi * M, count);
}

}  // namespace kcmc
