#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kcmc/errors.hpp"
#include "kcmc/geometry.hpp"
#include "kcmc/numerics.hpp"
#include "kcmc/tolerances.hpp"

namespace kcmc {

enum class SliceKind { InteriorPlus, CrossingMinus, Cylinder, Maximal };
enum class SliceGenerator { Quadrature, IVP };
enum class Branch { Plus, Minus };

// Lower: T-intercept <= 0, parameterised by k~. Upper: the time-reflected
// family, parameterised by k(H, r) = -k~(-H, r).
enum class Family { Lower, Upper };

inline std::string_view to_string(SliceKind kind) {
    switch (kind) {
        case SliceKind::InteriorPlus: return "interior-plus";
        case SliceKind::CrossingMinus: return "crossing-minus";
        case SliceKind::Cylinder: return "cylinder";
        case SliceKind::Maximal: return "maximal";
    }
    return "?";
}

inline SliceKind slice_kind_from_string(std::string_view text) {
    if (text == "interior-plus") return SliceKind::InteriorPlus;
    if (text == "crossing-minus") return SliceKind::CrossingMinus;
    if (text == "cylinder") return SliceKind::Cylinder;
    if (text == "maximal") return SliceKind::Maximal;
    throw DomainError("unknown slice kind '" + std::string(text) + "'");
}

inline std::string_view to_string(SliceGenerator g) {
    return g == SliceGenerator::IVP ? "ivp" : "quadrature";
}

inline std::string_view to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

inline std::string_view to_string(Family f) { return f == Family::Lower ? "lower" : "upper"; }

inline Family default_family(const SliceParams& p) {
    return (p.H < 0.0 || (p.H == 0.0 && p.c >= 0.0)) ? Family::Lower : Family::Upper;
}

struct SlicePoint {
    double X = 0.0;
    double T = 0.0;
    double r = 0.0;
    Region region = Region::Bifurcation;
};

// A sampled slice, ordered by X and symmetric about X = 0.
struct Hypersurface {
    SliceParams params;
    SliceKind kind = SliceKind::Maximal;
    Family family = Family::Lower;
    double t_intercept = 0.0;
    std::vector<SlicePoint> samples;
    // dT/dX at each sample when the generator provides it; otherwise empty.
    std::vector<double> slopes;
    SliceGenerator generator = SliceGenerator::IVP;
    // IVP grids: X_j = X_end sinh(g s_j) / sinh(g) for uniform s_j in [-1, 1];
    // g = 0 is uniform in X.
    double grading = 0.0;

    double max_abs_X() const { return samples.empty() ? 0.0 : samples.back().X; }
};

// Propagation failure while building a slice.
class SliceError : public Error {
public:
    SliceError(const std::string& what, double x_reached) : Error(what), x_reached_(x_reached) {}
    double x_reached() const noexcept { return x_reached_; }

private:
    double x_reached_;
};

struct SliceOptions {
    std::size_t samples_per_side = 801;
    double r_min_stop = 0.05;        // units of M
    double spacelike_margin = 1e-10;  // stop when 1 - F'^2 drops below
    double horizon_collar = 1e-3;    // units of M, quadrature path only
    // Sample clustering toward X = 0 for IVP output (see Hypersurface::grading).
    // Negative selects ln(X_end |F''(0)|) when that exceeds 0.
    double grading = 0.0;
    Tolerances tol;
};

inline constexpr double kAutoGrading = -1.0;

// ---------------------------------------------------------------------------
// Branch roots and T-intercepts
// ---------------------------------------------------------------------------

struct BranchRoots {
    std::optional<double> r_plus;   // on the increasing part of k~_H
    std::optional<double> r_minus;  // on the decreasing part of k~_H
};

namespace detail {

inline BranchRoots branch_roots_any(double H, double c, double M, double tol) {
    const EnvelopeMax top = envelope_max_any(H, M, tol);
    const double floor_minus = -8.0 * M * M * M * H;  // k~_H(2M)
    BranchRoots roots;
    if (c > top.C) return roots;
    if (c == top.C) {
        roots.r_plus = top.R;
        roots.r_minus = top.R;
        return roots;
    }
    auto k = [&](double r) { return -H * r * r * r + envelope_core(r, M) - c; };
    if (c > 0.0) {
        roots.r_plus = find_root_bracketed(k, 0.0, top.R, tol, 0.0);
    }
    if (c == floor_minus) {
        roots.r_minus = 2.0 * M;
    } else if (c > floor_minus) {
        roots.r_minus = find_root_bracketed(k, top.R, 2.0 * M, tol, 0.0);
    }
    return roots;
}

}  // namespace detail

/// Radii where k~_H(r) = c on the increasing and decreasing parts of k~_H
/// (H <= 0). r_plus exists for c in (0, C_H]; r_minus for c in
/// [-8 M^3 H, C_H], with the lower end giving r_minus = 2M (the slice
/// through the bifurcation sphere).
inline BranchRoots branch_roots(const SliceParams& p, double tol = 1e-12) {
    p.validate();
    if (p.H > 0) throw DomainError("branch_roots: requires H <= 0");
    BranchRoots roots = detail::branch_roots_any(p.H, p.c, p.M, tol);
    if (!roots.r_plus && !roots.r_minus) {
        const EnvelopeMax top = envelope_max(p.H, p.M, tol);
        throw NoSliceError("no TSS-CMC slice for H = " + std::to_string(p.H) + ", c = " +
                           std::to_string(p.c) + ": c lies outside the plus range (0, C_H] and "
                           "the minus range [-8M^3H, C_H] = [" +
                           std::to_string(-8.0 * p.M * p.M * p.M * p.H) + ", " +
                           std::to_string(top.C) + "]");
    }
    return roots;
}

/// Areal radius where the slice meets the T-axis.
inline double axis_radius(const SliceParams& p, Branch branch, Family family,
                          double tol = 1e-12) {
    p.validate();
    const double Hk = family == Family::Lower ? p.H : -p.H;
    const double ck = family == Family::Lower ? p.c : -p.c;
    const BranchRoots roots = detail::branch_roots_any(Hk, ck, p.M, tol);
    const auto& root = branch == Branch::Plus ? roots.r_plus : roots.r_minus;
    if (!root) {
        throw NoSliceError("no " + std::string(to_string(branch)) + "-branch slice for H = " +
                           std::to_string(p.H) + ", c = " + std::to_string(p.c) + " (" +
                           std::string(to_string(family)) + " family)");
    }
    return *root;
}

inline double intercept_from_axis_radius(double r_axis, double M, Family family) {
    const double magnitude = std::sqrt(2.0 * M - r_axis) * std::exp(r_axis / (4.0 * M));
    return family == Family::Lower ? -magnitude : magnitude;
}

/// T value where the slice crosses X = 0: -sqrt(2M - r~) e^{r~/4M} for the
/// lower family, the negative of that for the upper family.
inline double t_intercept(const SliceParams& p, Branch branch,
                          std::optional<Family> family = std::nullopt, double tol = 1e-12) {
    const Family fam = family.value_or(default_family(p));
    return intercept_from_axis_radius(axis_radius(p, branch, fam, tol), p.M, fam);
}

// ---------------------------------------------------------------------------
// Schwarzschild-coordinate first integral
// ---------------------------------------------------------------------------

/// Slope f'(r) = sign * w / (h sqrt(h + w^2)), w = H r + c / r^2.
///
/// In the interior this equals the l-form l / (h sqrt(l^2 - 1)). The matching
/// sign of the CMC equation is -sign.
inline double fprime_first_integral(double r, const SliceParams& p, int piece_sign) {
    if (!(r > 0)) throw DomainError("fprime_first_integral: r must be positive");
    if (r == 2.0 * p.M) throw DomainError("fprime_first_integral: r = 2M is a coordinate singularity");
    const double h = lapse_h(r, p.M);
    const double w = p.H * r + p.c / (r * r);
    const double q = h + w * w;
    if (!(q > 0)) throw NotSpacelikeError("fprime_first_integral: h + w^2 <= 0 (outside the slice)");
    return (piece_sign >= 0 ? 1.0 : -1.0) * w / (h * std::sqrt(q));
}

// ---------------------------------------------------------------------------
// Slice construction: IVP (canonical)
// ---------------------------------------------------------------------------

namespace detail {

inline double graded_map(double s, double g) {
    return g == 0.0 ? s : std::sinh(g * s) / std::sinh(g);
}

inline double graded_map_derivative(double s, double g) {
    return g == 0.0 ? 1.0 : g * std::cosh(g * s) / std::sinh(g);
}

inline std::vector<double> graded_points(double X_end, std::size_t n, double g) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = X_end * graded_map(static_cast<double>(j) / static_cast<double>(n - 1), g);
    }
    out.front() = 0.0;
    out.back() = X_end;
    return out;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out.back() = b;
    return out;
}

// Kruskal-form CMC equation solved for F''. NaN signals a point outside the
// slice's domain (past the singularity or not spacelike).
struct KruskalCmcRhs {
    double H;
    double M;

    State<2> operator()(double X, const State<2>& y) const {
        const double F = y[0];
        const double Fp = y[1];
        const double margin = 1.0 - Fp * Fp;
        const double r = areal_radius_from_interval((X - F) * (X + F), M);
        if (!(margin > 0) || !(r > 0)) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return {nan, nan};
        }
        const double geometric =
            std::exp(-r / (2.0 * M)) * (6.0 * M / (r * r) - 1.0 / r) * (-F + Fp * X) * margin;
        const double curvature =
            12.0 * H * M * std::exp(-r / (4.0 * M)) / std::sqrt(r) * margin * std::sqrt(margin);
        return {Fp, -geometric + curvature};
    }
};

struct AxisData {
    double r_axis;
    double T0;
    SliceKind kind;
};

inline AxisData axis_data(const SliceParams& p, Branch branch, Family family, double tol) {
    if (p.H == 0.0 && p.c == 0.0) return {2.0 * p.M, 0.0, SliceKind::Maximal};
    const double Hk = family == Family::Lower ? p.H : -p.H;
    const double ck = family == Family::Lower ? p.c : -p.c;
    const BranchRoots roots = branch_roots_any(Hk, ck, p.M, tol);
    const auto& root = branch == Branch::Plus ? roots.r_plus : roots.r_minus;
    if (!root) {
        throw NoSliceError("no " + std::string(to_string(branch)) + "-branch slice for H = " +
                           std::to_string(p.H) + ", c = " + std::to_string(p.c) + " (" +
                           std::string(to_string(family)) + " family)");
    }
    SliceKind kind = branch == Branch::Plus ? SliceKind::InteriorPlus : SliceKind::CrossingMinus;
    if (roots.r_plus && roots.r_minus && *roots.r_plus == *roots.r_minus) kind = SliceKind::Cylinder;
    return {*root, intercept_from_axis_radius(*root, p.M, family), kind};
}

}  // namespace detail

/// Integrates a slice through (0, T0) with F'(0) = 0.
///
/// The symmetric result carries 2 * samples_per_side - 1 samples uniform in
/// X. Integration ends early, with the grid rebuilt on the reached range,
/// when r drops below min(r_min_stop * M, r~ / 2) or the spacelike margin
/// 1 - F'^2 falls below options.spacelike_margin.
inline Hypersurface build_slice_ivp_from_axis(const SliceParams& p, double r_axis, double T0,
                                              SliceKind kind, Family family, double X_max,
                                              const SliceOptions& options = {}) {
    if (!(X_max > 0)) throw DomainError("build_slice_ivp: X_max must be positive");
    if (options.samples_per_side < 2) throw DomainError("build_slice_ivp: need >= 2 samples per side");

    const double M = p.M;
    const double r_stop = std::min(options.r_min_stop * M, 0.5 * r_axis);
    const detail::KruskalCmcRhs rhs{p.H, M};
    const double eps_space = options.spacelike_margin;
    auto stop = [&](double X, const State<2>& y) -> std::optional<std::string> {
        const double r = detail::areal_radius_from_interval((X - y[0]) * (X + y[0]), M);
        if (!(r >= r_stop)) return std::string("r below stop radius (approaching r = 0)");
        if (!(1.0 - y[1] * y[1] >= eps_space)) return std::string("spacelike margin exhausted");
        return std::nullopt;
    };

    const State<2> y0{T0, 0.0};
    const std::size_t n_side = options.samples_per_side;
    auto grading_for = [&](double X_end) {
        if (options.grading >= 0.0) return options.grading;
        const double steepness = X_end * std::abs(rhs(0.0, y0)[1]);
        return steepness > 1.0 ? std::log(steepness) : 0.0;
    };
    IvpOptions ivp;
    ivp.tol = options.tol.ode;
    double grading = grading_for(X_max);
    ivp.output_points = detail::graded_points(X_max, n_side, grading);
    Trajectory<2> traj;
    try {
        traj = solve_ivp<2>(rhs, 0.0, y0, X_max, ivp, stop);
        if (traj.stop == IvpStop::Predicate) {
            const double X_end = traj.stop_x * (1.0 - 1e-9);
            if (!(X_end > 0)) {
                throw SliceError("build_slice_ivp: slice terminates at the T-axis (" +
                                     traj.stop_reason + ")",
                                 0.0);
            }
            grading = grading_for(X_end);
            ivp.output_points = detail::graded_points(X_end, n_side, grading);
            traj = solve_ivp<2>(rhs, 0.0, y0, X_end, ivp);
        }
    } catch (const IvpError& e) {
        throw SliceError(std::string("build_slice_ivp: propagation failed for H = ") +
                             std::to_string(p.H) + ", c = " + std::to_string(p.c) + ": " + e.what(),
                         e.x_reached());
    }
    if (traj.x.size() != options.samples_per_side) {
        throw SliceError("build_slice_ivp: incomplete sample grid", traj.stop_x);
    }

    Hypersurface s;
    s.params = p;
    s.kind = kind;
    s.family = family;
    s.t_intercept = T0;
    s.generator = SliceGenerator::IVP;
    s.grading = grading;
    const std::size_t n = traj.x.size();
    s.samples.reserve(2 * n - 1);
    s.slopes.reserve(2 * n - 1);
    for (std::size_t k = 0; k < 2 * n - 1; ++k) {
        const bool negative = k < n - 1;
        const std::size_t i = negative ? n - 1 - k : k - (n - 1);
        const double X = negative ? -traj.x[i] : traj.x[i];
        const double T = traj.y[i][0];
        s.samples.push_back({X, T, areal_radius_from_kruskal(T, X, M), classify_region(T, X, M)});
        s.slopes.push_back(negative ? -traj.y[i][1] : traj.y[i][1]);
    }
    return s;
}

/// Canonical slice generator: the Kruskal-form CMC equation as an
/// initial-value problem from the T-axis, valid across the horizons.
inline Hypersurface build_slice_ivp(const SliceParams& p, Branch branch, double X_max,
                                    const SliceOptions& options = {},
                                    std::optional<Family> family = std::nullopt) {
    p.validate();
    const Family fam = family.value_or(default_family(p));
    const detail::AxisData axis = detail::axis_data(p, branch, fam, options.tol.root);
    return build_slice_ivp_from_axis(p, axis.r_axis, axis.T0, axis.kind, fam, X_max, options);
}

// ---------------------------------------------------------------------------
// Sample access and symmetry
// ---------------------------------------------------------------------------

/// T on the slice at X by cubic Lagrange interpolation through the four
/// nearest samples.
inline double slice_T_at(const Hypersurface& s, double X) {
    const auto& pts = s.samples;
    if (pts.empty()) throw DomainError("slice_T_at: empty slice");
    if (pts.size() == 1) {
        if (X == pts[0].X) return pts[0].T;
        throw DomainError("slice_T_at: X outside the sampled range");
    }
    if (X < pts.front().X || X > pts.back().X) {
        throw DomainError("slice_T_at: X = " + std::to_string(X) + " outside the sampled range");
    }
    auto it = std::lower_bound(pts.begin(), pts.end(), X,
                               [](const SlicePoint& pt, double x) { return pt.X < x; });
    std::size_t hi = static_cast<std::size_t>(it - pts.begin());
    if (hi < pts.size() && pts[hi].X == X) return pts[hi].T;
    if (hi == 0) hi = 1;
    const std::size_t n = pts.size();
    const std::size_t count = std::min<std::size_t>(4, n);
    std::size_t first = hi >= 2 ? hi - 2 : 0;
    if (first + count > n) first = n - count;
    double value = 0.0;
    for (std::size_t j = first; j < first + count; ++j) {
        double w = 1.0;
        for (std::size_t m = first; m < first + count; ++m) {
            if (m != j) w *= (X - pts[m].X) / (pts[j].X - pts[m].X);
        }
        value += w * pts[j].T;
    }
    return value;
}

/// Time reflection T -> -T; maps (M, H, c) to (M, -H, -c).
inline Hypersurface reflect_slice(const Hypersurface& s) {
    Hypersurface out = s;
    out.params.H = -s.params.H;
    out.params.c = -s.params.c;
    out.family = s.family == Family::Lower ? Family::Upper : Family::Lower;
    out.t_intercept = -s.t_intercept;
    for (auto& pt : out.samples) {
        pt.T = -pt.T;
        pt.region = mirror(pt.region);
    }
    for (auto& slope : out.slopes) slope = -slope;
    return out;
}

// ---------------------------------------------------------------------------
// Slice construction: Schwarzschild quadrature (validation path)
// ---------------------------------------------------------------------------

namespace detail {

inline Hypersurface mirrored_from_positive(const SliceParams& p, SliceKind kind, Family family,
                                           double T0, std::vector<SlicePoint> positive) {
    std::sort(positive.begin(), positive.end(),
              [](const SlicePoint& a, const SlicePoint& b) { return a.X < b.X; });
    Hypersurface s;
    s.params = p;
    s.kind = kind;
    s.family = family;
    s.t_intercept = T0;
    s.generator = SliceGenerator::Quadrature;
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
        if (it->X > 0) s.samples.push_back({-it->X, it->T, it->r, it->region});
    }
    for (const auto& pt : positive) s.samples.push_back(pt);
    return s;
}

// Lower-family quadrature. X >= 0 piece: t(r) <= 0 in the past interior.
inline Hypersurface quadrature_lower(const SliceParams& p, Branch branch,
                                     std::span<const double> r_grid, const SliceOptions& options) {
    const double M = p.M;
    const double tol_q = options.tol.quad;
    const AxisData axis = axis_data(p, branch, Family::Lower, options.tol.root);
    if (axis.kind == SliceKind::Cylinder) {
        throw DomainError("build_slice_quadrature: the cylinder r = R_H is not a graph t = f(r)");
    }
    const double r_axis = axis.r_axis;
    if (branch == Branch::Minus && r_axis >= 2.0 * M) {
        throw DomainError("build_slice_quadrature: slice through the bifurcation sphere; use the IVP path");
    }

    // q = h + w^2 = (c - k~(r)) (c - k(r)) / r^4. Inside the horizon
    // c - k~(r) is taken as k~(r~) - k~(r) with the (r~ - r) factor pulled
    // out, which keeps q accurate next to the turning point.
    auto q_of = [&](double r) {
        const double w = p.H * r + p.c / (r * r);
        if (r >= 2.0 * M) return 1.0 - 2.0 * M / r + w * w;
        const double a = r_axis;
        const double s2 = a * a + a * r + r * r;
        const double poly = 2.0 * M * s2 - (a * a * a + a * a * r + a * r * r + r * r * r);
        const double ca = envelope_core(a, M);
        const double cr = envelope_core(r, M);
        const double delta = (a - r) * (-p.H * s2 + (ca + cr > 0 ? poly / (ca + cr) : 0.0));
        const double r2 = r * r;
        return delta * (delta + 2.0 * cr) / (r2 * r2);
    };
    auto abs_fprime = [&](double r) {
        const double h = 1.0 - 2.0 * M / r;
        const double w = p.H * r + p.c / (r * r);
        const double q = q_of(r);
        return q > 0 ? std::abs(w / (h * std::sqrt(q))) : 0.0;
    };

    std::vector<SlicePoint> positive;
    positive.push_back({0.0, axis.T0, r_axis, classify_region(axis.T0, 0.0, M)});

    if (branch == Branch::Plus) {
        std::vector<double> radii(r_grid.begin(), r_grid.end());
        std::sort(radii.begin(), radii.end(), std::greater<>());
        double prev = r_axis;
        double acc = 0.0;
        for (double r : radii) {
            if (!(r > 0 && r <= r_axis)) {
                throw DomainError("build_slice_quadrature: plus-branch grid must lie in (0, r~]");
            }
            if (r == r_axis) continue;
            const SingularEnd end = prev == r_axis ? SingularEnd::Upper : SingularEnd::None;
            acc += integrate_endpoint_singular(abs_fprime, r, prev, end, tol_q);
            prev = r;
            const auto [T, X] = kruskal_from_schwarzschild(-acc, r, Region::IIprime, M);
            positive.push_back({X, T, r, classify_region(T, X, M)});
        }
        return mirrored_from_positive(p, axis.kind, Family::Lower, axis.T0, std::move(positive));
    }

    // Minus branch: interior piece in II', then the exterior piece in I joined
    // through the regular combination t_reg = t - 2M ln|r - 2M|.
    const double collar = options.horizon_collar * M;
    const double r_in = 2.0 * M - collar;
    const double r_out = 2.0 * M + collar;
    std::vector<double> radii(r_grid.begin(), r_grid.end());
    std::sort(radii.begin(), radii.end());

    auto treg_prime = [&](double r) {
        const double h = 1.0 - 2.0 * M / r;
        const double w = p.H * r + p.c / (r * r);
        const double q = q_of(r);
        if (!(q > 0)) return 0.0;
        const double sq = std::sqrt(q);
        if (w > 0) return 1.0 - 1.0 / ((w + sq) * sq);
        return w / (h * sq) - 2.0 * M / (r - 2.0 * M);
    };

    double prev = r_axis;
    double acc = 0.0;  // integral of |f'| from r~ inside the interior
    bool have_treg = false;
    double treg = 0.0;
    double treg_at = 0.0;

    auto interior_t = [&](double r) {
        const SingularEnd end = prev == r_axis ? SingularEnd::Lower : SingularEnd::None;
        acc += integrate_endpoint_singular(abs_fprime, prev, r, end, tol_q);
        prev = r;
        return -acc;
    };
    auto ensure_treg = [&]() {
        if (have_treg) return;
        if (r_axis < r_in) {
            const double t_in = prev < r_in ? interior_t(r_in) : -acc;
            treg = t_in - 2.0 * M * std::log(2.0 * M - r_in);
            treg_at = r_in;
        } else {
            treg = -2.0 * M * std::log(2.0 * M - r_axis);
            treg_at = r_axis;
        }
        const SingularEnd end = treg_at == r_axis ? SingularEnd::Lower : SingularEnd::None;
        treg += integrate_endpoint_singular(treg_prime, treg_at, r_out, end, tol_q);
        treg_at = r_out;
        have_treg = true;
    };

    for (double r : radii) {
        if (!(r >= r_axis)) {
            throw DomainError("build_slice_quadrature: minus-branch grid must lie in [r~, inf)");
        }
        if (r == r_axis || std::abs(r - 2.0 * M) < collar) continue;
        if (r < 2.0 * M) {
            const double t = interior_t(r);
            const auto [T, X] = kruskal_from_schwarzschild(t, r, Region::IIprime, M);
            positive.push_back({X, T, r, classify_region(T, X, M)});
        } else {
            ensure_treg();
            treg += integrate_endpoint_singular(treg_prime, treg_at, r, SingularEnd::None, tol_q);
            treg_at = r;
            const double t = treg + 2.0 * M * std::log(r - 2.0 * M);
            const auto [T, X] = kruskal_from_schwarzschild(t, r, Region::I, M);
            positive.push_back({X, T, r, classify_region(T, X, M)});
        }
    }
    return mirrored_from_positive(p, axis.kind, Family::Lower, axis.T0, std::move(positive));
}

}  // namespace detail

/// Radii for the quadrature path: squared spacing toward the T-axis so the
/// samples are roughly uniform in X near r~.
inline std::vector<double> default_quadrature_grid(const SliceParams& p, Branch branch,
                                                   std::size_t count = 400,
                                                   double r_exterior_max = 4.0,
                                                   const SliceOptions& options = {}) {
    const Family fam = default_family(p);
    const double M = p.M;
    const double r_axis = axis_radius(p, branch, fam, options.tol.root);
    std::vector<double> grid;
    if (branch == Branch::Plus) {
        const double r_stop = std::min(options.r_min_stop * M, 0.5 * r_axis);
        for (std::size_t i = 1; i <= count; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(count);
            grid.push_back(r_axis - (r_axis - r_stop) * s * s);
        }
        return grid;
    }
    const double collar = options.horizon_collar * M;
    if (r_axis < 2.0 * M - collar) {
        for (std::size_t i = 1; i <= count; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(count);
            grid.push_back(r_axis + (2.0 * M - collar - r_axis) * s * s);
        }
    }
    const double r0 = 2.0 * M + collar;
    const double r1 = r_exterior_max * M;
    for (std::size_t i = 0; i <= count; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(count);
        grid.push_back(r0 + (r1 - r0) * s * s);
    }
    return grid;
}

/// Slice t = f(r) from the first integral with f(r~) = 0, mapped to Kruskal
/// coordinates. Validation oracle for the IVP path away from the horizons;
/// samples inside the horizon collar are not emitted.
inline Hypersurface build_slice_quadrature(const SliceParams& p, Branch branch,
                                           std::span<const double> r_grid,
                                           const SliceOptions& options = {}, double X_max = 3.0) {
    p.validate();
    if (p.H == 0.0 && p.c == 0.0) {
        std::vector<SlicePoint> positive;
        for (double X : detail::linspace(0.0, X_max, options.samples_per_side)) {
            positive.push_back({X, 0.0, areal_radius_from_kruskal(0.0, X, p.M),
                                classify_region(0.0, X, p.M)});
        }
        return detail::mirrored_from_positive(p, SliceKind::Maximal, Family::Lower, 0.0,
                                              std::move(positive));
    }
    if (default_family(p) == Family::Upper) {
        const SliceParams mirrored{p.M, -p.H, -p.c};
        return reflect_slice(detail::quadrature_lower(mirrored, branch, r_grid, options));
    }
    return detail::quadrature_lower(p, branch, r_grid, options);
}

// ---------------------------------------------------------------------------
// Slice diagnostics
// ---------------------------------------------------------------------------

struct SliceResidual {
    double max_abs = 0.0;         // largest |residual|
    double max_normalized = 0.0;  // largest |residual| / max(1, largest term)
    double worst_X = 0.0;
    std::size_t evaluated = 0;
};

/// Kruskal-form CMC residual at interior samples. F' comes from the stored
/// slopes when present; F'' (and F' otherwise) from fourth-order central
/// differences in the grid parameter of IVP grids (uniform or graded), or
/// three-point differences on other non-uniform samples (skipping points
/// next to sampling gaps).
inline SliceResidual slice_cmc_residual(const Hypersurface& s) {
    SliceResidual out;
    const auto& pts = s.samples;
    const std::size_t n = pts.size();
    if (n < 5) return out;
    const bool have_slopes = s.slopes.size() == n;

    bool parametric = s.grading > 0.0 && n % 2 == 1;
    if (!parametric) {
        const double h0 = pts[1].X - pts[0].X;
        parametric = h0 > 0;
        for (std::size_t i = 1; i + 1 < n && parametric; ++i) {
            parametric = std::abs((pts[i + 1].X - pts[i].X) - h0) <= 1e-9 * h0;
        }
    }

    auto consider = [&](std::size_t i, double Fp, double Fpp) {
        if (!(1.0 - Fp * Fp > 0)) {
            out.max_abs = out.max_normalized = std::numeric_limits<double>::infinity();
            out.worst_X = pts[i].X;
            return;
        }
        const Residual res =
            cmc_residual_kruskal_terms(pts[i].T, Fp, Fpp, pts[i].X, s.params.H, s.params.M);
        ++out.evaluated;
        out.max_abs = std::max(out.max_abs, std::abs(res.value));
        if (std::abs(res.normalized()) > out.max_normalized) {
            out.max_normalized = std::abs(res.normalized());
            out.worst_X = pts[i].X;
        }
    };

    if (parametric) {
        // X = X_end phi(sigma), sigma uniform on [-1, 1].
        const double g = s.grading > 0.0 && n % 2 == 1 ? s.grading : 0.0;
        const double X_end = pts[n - 1].X;
        const double half = 0.5 * static_cast<double>(n - 1);
        const double hs = 1.0 / half;
        for (std::size_t i = 2; i + 2 < n; ++i) {
            const double sigma = (static_cast<double>(i) - half) / half;
            const double Xs = X_end * detail::graded_map_derivative(sigma, g);
            const double Xss = g == 0.0 ? 0.0 : X_end * g * g * std::sinh(g * sigma) / std::sinh(g);
            auto d1 = [&](auto v) {
                return (-v(i + 2) + 8.0 * v(i + 1) - 8.0 * v(i - 1) + v(i - 2)) / (12.0 * hs);
            };
            auto d2 = [&](auto v) {
                return (-v(i + 2) + 16.0 * v(i + 1) - 30.0 * v(i) + 16.0 * v(i - 1) - v(i - 2)) /
                       (12.0 * hs * hs);
            };
            double Fp;
            double Fpp;
            if (have_slopes) {
                Fp = s.slopes[i];
                Fpp = d1([&](std::size_t k) { return s.slopes[k]; }) / Xs;
            } else {
                auto T = [&](std::size_t k) { return pts[k].T; };
                Fp = d1(T) / Xs;
                Fpp = (d2(T) - Fp * Xss) / (Xs * Xs);
            }
            consider(i, Fp, Fpp);
        }
        return out;
    }

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = pts[i].X - pts[i - 1].X;
        const double hr = pts[i + 1].X - pts[i].X;
        if (!(hl > 0 && hr > 0) || hl > 4.0 * hr || hr > 4.0 * hl) continue;
        auto d1 = [&](auto value) {
            return (value(i + 1) * hl * hl - value(i - 1) * hr * hr +
                    value(i) * (hr * hr - hl * hl)) / (hl * hr * (hl + hr));
        };
        auto d2 = [&](auto value) {
            return 2.0 * (value(i + 1) * hl + value(i - 1) * hr - value(i) * (hl + hr)) /
                   (hl * hr * (hl + hr));
        };
        auto T = [&](std::size_t k) { return pts[k].T; };
        if (have_slopes) {
            auto S = [&](std::size_t k) { return s.slopes[k]; };
            consider(i, s.slopes[i], d1(S));
        } else {
            consider(i, d1(T), d2(T));
        }
    }
    return out;
}

// Smallest 1 - (dT/dX)^2. Uses the stored slopes when present: near-null
// leaves sampled densely lose the margin to roundoff in T differences.
// Slices without slopes fall back to consecutive-sample secants.
inline double slice_spacelike_margin(const Hypersurface& s) {
    double margin = 1.0;
    for (std::size_t i = 1; i < s.samples.size(); ++i) {
        const double dX = s.samples[i].X - s.samples[i - 1].X;
        if (!(dX > 0)) return -1.0;
        if (!s.slopes.empty()) continue;
        const double slope = (s.samples[i].T - s.samples[i - 1].T) / dX;
        margin = std::min(margin, 1.0 - slope * slope);
    }
    for (double slope : s.slopes) margin = std::min(margin, 1.0 - slope * slope);
    return margin;
}

}  // namespace kcmc
