#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "kcmc/errors.hpp"
#include "kcmc/numerics.hpp"

namespace kcmc {

// The triple identifying one T-axisymmetric CMC slice.
struct SliceParams {
    double M = 1.0;
    double H = 0.0;  // mean curvature, 1/length
    double c = 0.0;  // slice parameter, length^2

    void validate() const {
        if (!(M > 0) || !std::isfinite(M)) throw DomainError("SliceParams: M must be positive");
        if (!std::isfinite(H) || !std::isfinite(c)) {
            throw DomainError("SliceParams: H and c must be finite");
        }
    }
};

enum class Region { I, II, Iprime, IIprime, HorizonFuture, HorizonPast, Bifurcation };

inline std::string_view to_string(Region region) {
    switch (region) {
        case Region::I: return "I";
        case Region::II: return "II";
        case Region::Iprime: return "I'";
        case Region::IIprime: return "II'";
        case Region::HorizonFuture: return "horizon+";
        case Region::HorizonPast: return "horizon-";
        case Region::Bifurcation: return "bifurcation";
    }
    return "?";
}

inline Region region_from_string(std::string_view text) {
    if (text == "I") return Region::I;
    if (text == "II") return Region::II;
    if (text == "I'") return Region::Iprime;
    if (text == "II'") return Region::IIprime;
    if (text == "horizon+") return Region::HorizonFuture;
    if (text == "horizon-") return Region::HorizonPast;
    if (text == "bifurcation") return Region::Bifurcation;
    throw DomainError("unknown region tag '" + std::string(text) + "'");
}

// Time reflection T -> -T.
inline Region mirror(Region region) {
    switch (region) {
        case Region::II: return Region::IIprime;
        case Region::IIprime: return Region::II;
        case Region::HorizonFuture: return Region::HorizonPast;
        case Region::HorizonPast: return Region::HorizonFuture;
        default: return region;
    }
}

// ---------------------------------------------------------------------------
// Metric factor and envelope functions
// ---------------------------------------------------------------------------

inline double lapse_h(double r, double M) {
    if (!(r > 0)) throw DomainError("lapse_h: r must be positive");
    return 1.0 - 2.0 * M / r;
}

inline double radial_potential_l(double r, const SliceParams& p) {
    if (!(r > 0 && r < 2.0 * p.M)) {
        throw DomainError("radial_potential_l: r must lie in (0, 2M)");
    }
    return (p.H * r + p.c / (r * r)) / std::sqrt(-lapse_h(r, p.M));
}

namespace detail {

inline void require_envelope_domain(double r, double M, const char* who) {
    if (!(r >= 0.0 && r <= 2.0 * M)) {
        throw DomainError(std::string(who) + ": r must lie in [0, 2M]");
    }
}

// r^{3/2} (2M - r)^{1/2}
inline double envelope_core(double r, double M) { return r * std::sqrt(r * (2.0 * M - r)); }

}  // namespace detail

/// k~(H, r) = -H r^3 + r^{3/2} (2M - r)^{1/2}; c > k~(H, r) is the interior
/// domain condition of the slice (H, c).
inline double envelope_plus(double H, double r, double M) {
    detail::require_envelope_domain(r, M, "envelope_plus");
    return -H * r * r * r + detail::envelope_core(r, M);
}

/// k(H, r) = -H r^3 - r^{3/2} (2M - r)^{1/2}, the envelope of the future family.
inline double envelope_minus(double H, double r, double M) {
    detail::require_envelope_domain(r, M, "envelope_minus");
    return -H * r * r * r - detail::envelope_core(r, M);
}

// g(r) = r^{1/2} (3M - 2r) / (2M - r)^{1/2}, the H-independent part of dk~/dr.
inline double envelope_slope_core(double r, double M) {
    return std::sqrt(r) * (3.0 * M - 2.0 * r) / std::sqrt(2.0 * M - r);
}

inline double envelope_plus_dr(double H, double r, double M) {
    return -3.0 * H * r * r + envelope_slope_core(r, M);
}

/// H whose envelope k~_H is stationary at r: dk~/dr(H, r) = 0.
inline double stationary_curvature(double r, double M) {
    return (3.0 * M - 2.0 * r) / (3.0 * r * std::sqrt(r) * std::sqrt(2.0 * M - r));
}

struct EnvelopeMax {
    double R;  // location of the maximum
    double C;  // maximum value
};

namespace detail {

// Maximum of k~_H on [0, 2M] for any sign of H. The maximiser solves
// stationary_curvature(r) = H, which is strictly decreasing in r.
inline EnvelopeMax envelope_max_any(double H, double M, double tol) {
    auto f = [&](double r) {
        // dk~/dr scaled by sqrt(2M - r): same sign, finite at r = 2M.
        return -3.0 * H * r * r * std::sqrt(2.0 * M - r) + std::sqrt(r) * (3.0 * M - 2.0 * r);
    };
    double lo;
    double hi;
    if (H <= 0.0) {
        lo = 1.5 * M;
        hi = 2.0 * M;
    } else {
        lo = 0.0;
        hi = 1.5 * M;
    }
    const double R = find_root_bracketed(f, lo, hi, tol, 0.0);
    return {R, -H * R * R * R + envelope_core(R, M)};
}

}  // namespace detail

/// Location and value of the maximum of k~_H over [0, 2M], for H <= 0.
inline EnvelopeMax envelope_max(double H, double M, double tol = 1e-12) {
    if (H > 0) throw DomainError("envelope_max: requires H <= 0");
    return detail::envelope_max_any(H, M, tol);
}

// ---------------------------------------------------------------------------
// Kruskal coordinates
// ---------------------------------------------------------------------------

namespace detail {

// Principal branch of Lambert W. `branch_offset` must equal e*z + 1, passed
// separately so callers near the branch point can supply it without
// cancellation.
inline double lambert_w0(double z, double branch_offset) {
    if (branch_offset <= 0.0) return -1.0;
    double w;
    if (branch_offset < 0.3) {
        const double p = std::sqrt(2.0 * branch_offset);
        w = -1.0 + p * (1.0 + p * (-1.0 / 3 + p * (11.0 / 72 + p * (-43.0 / 540 +
                                                                   p * (769.0 / 17280)))));
        if (p < 1e-4) return w;
    } else if (z < 3.0) {
        w = std::log1p(z) * (1.0 - std::log1p(std::log1p(z)) / (2.0 + std::log1p(z)));
    } else {
        const double l1 = std::log(z);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    for (int it = 0; it < 30; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        const double step = f / denom;
        w -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) {
            break;
        }
    }
    return w;
}

// r solving (r - 2M) e^{r/2M} = s, with s >= -2M. NaN outside the domain.
inline double areal_radius_from_interval(double s, double M) {
    if (!(s >= -2.0 * M)) return std::numeric_limits<double>::quiet_NaN();
    const double z = s / (2.0 * M * std::numbers::e);
    const double offset = (s + 2.0 * M) / (2.0 * M);
    const double w = lambert_w0(z, offset);
    double r = 2.0 * M * (1.0 + w);
    if (r < 0.0) r = 0.0;
    // Newton polish in r; phi'(r) = (r / 2M) e^{r/2M} vanishes only at r = 0.
    for (int it = 0; it < 2 && r > 1e-6 * M; ++it) {
        const double ex = std::exp(r / (2.0 * M));
        const double phi = (r - 2.0 * M) * ex - s;
        const double dphi = r / (2.0 * M) * ex;
        const double next = r - phi / dphi;
        if (!(next > 0)) break;
        r = next;
    }
    return r;
}

}  // namespace detail

/// Areal radius r >= 0 at a Kruskal point, from (r - 2M) e^{r/2M} = X^2 - T^2.
inline double areal_radius_from_kruskal(double T, double X, double M) {
    const double s = (X - T) * (X + T);
    if (s < -2.0 * M) {
        throw BeyondSingularityError("areal_radius_from_kruskal: X^2 - T^2 < -2M");
    }
    return detail::areal_radius_from_interval(s, M);
}

/// Region of a Kruskal point by exact sign tests.
inline Region classify_region(double T, double X, double M) {
    if ((X - T) * (X + T) < -2.0 * M) {
        throw BeyondSingularityError("classify_region: point lies beyond r = 0");
    }
    const double aT = std::abs(T);
    const double aX = std::abs(X);
    if (X > aT) return Region::I;
    if (X < -aT) return Region::Iprime;
    if (T > aX) return Region::II;
    if (T < -aX) return Region::IIprime;
    if (T == 0.0 && X == 0.0) return Region::Bifurcation;
    return T > 0 ? Region::HorizonFuture : Region::HorizonPast;
}

struct KruskalPoint {
    double T = 0.0;
    double X = 0.0;
    double r = 0.0;
    Region region = Region::Bifurcation;
};

inline KruskalPoint make_kruskal_point(double T, double X, double M) {
    return {T, X, areal_radius_from_kruskal(T, X, M), classify_region(T, X, M)};
}

/// Explicit (t, r) -> (T, X) map for each open quadrant.
inline std::pair<double, double> kruskal_from_schwarzschild(double t, double r, Region region,
                                                            double M) {
    const double a = t / (4.0 * M);
    switch (region) {
        case Region::I:
        case Region::Iprime: {
            if (!(r > 2.0 * M)) throw DomainError("kruskal_from_schwarzschild: exterior needs r > 2M");
            const double amp = std::sqrt(r - 2.0 * M) * std::exp(r / (4.0 * M));
            const double sgn = region == Region::I ? 1.0 : -1.0;
            return {sgn * amp * std::sinh(a), sgn * amp * std::cosh(a)};
        }
        case Region::II:
        case Region::IIprime: {
            if (!(r > 0 && r < 2.0 * M)) {
                throw DomainError("kruskal_from_schwarzschild: interior needs 0 < r < 2M");
            }
            const double amp = std::sqrt(2.0 * M - r) * std::exp(r / (4.0 * M));
            const double sgn = region == Region::II ? 1.0 : -1.0;
            return {sgn * amp * std::cosh(a), sgn * amp * std::sinh(a)};
        }
        default:
            throw DomainError("kruskal_from_schwarzschild: region must be an open quadrant");
    }
}

// ---------------------------------------------------------------------------
// CMC equation residuals
// ---------------------------------------------------------------------------

// Residual together with the magnitude of its largest term, for mixed
// absolute/relative acceptance.
struct Residual {
    double value;
    double scale;

    double normalized() const { return value / std::max(1.0, scale); }
};

/// Kruskal-form CMC equation for a graph T = F(X):
///   F'' + e^{-r/2M} (6M/r^2 - 1/r)(-F + F'X)(1 - F'^2)
///       - 12 H M e^{-r/4M} r^{-1/2} (1 - F'^2)^{3/2}
/// H follows the sign convention of the k~ family (slices in the past
/// quadrant carry H <= 0).
inline Residual cmc_residual_kruskal_terms(double F, double Fp, double Fpp, double X, double H,
                                           double M) {
    const double margin = 1.0 - Fp * Fp;
    if (!(margin > 0)) throw NotSpacelikeError("cmc_residual_kruskal: 1 - F'^2 <= 0");
    const double r = areal_radius_from_kruskal(F, X, M);
    if (!(r > 0)) throw DomainError("cmc_residual_kruskal: r must be positive");
    const double geometric =
        std::exp(-r / (2.0 * M)) * (6.0 * M / (r * r) - 1.0 / r) * (-F + Fp * X) * margin;
    const double curvature =
        -12.0 * H * M * std::exp(-r / (4.0 * M)) / std::sqrt(r) * margin * std::sqrt(margin);
    const double value = Fpp + geometric + curvature;
    const double scale = std::max({std::abs(Fpp), std::abs(geometric), std::abs(curvature)});
    return {value, scale};
}

inline double cmc_residual_kruskal(double F, double Fp, double Fpp, double X, double H, double M) {
    return cmc_residual_kruskal_terms(F, Fp, Fpp, X, H, M).value;
}

/// Schwarzschild-coordinate CMC equation for t = f(r):
///   f'' + ((1/h - f'^2 h)(2h/r + h'/2) + h'/h) f' + sign * 3H (1/h - f'^2 h)^{3/2}
inline double cmc_residual_schwarzschild(double fp, double fpp, double r, double H, double M,
                                         int sign) {
    if (!(r > 0) || r == 2.0 * M) {
        throw DomainError("cmc_residual_schwarzschild: needs r > 0 and r != 2M");
    }
    const double h = lapse_h(r, M);
    const double hp = 2.0 * M / (r * r);
    const double A = 1.0 / h - fp * fp * h;
    if (!(A > 0)) throw NotSpacelikeError("cmc_residual_schwarzschild: 1/h - f'^2 h <= 0");
    return fpp + (A * (2.0 * h / r + 0.5 * hp) + hp / h) * fp +
           (sign >= 0 ? 3.0 : -3.0) * H * A * std::sqrt(A);
}

}  // namespace kcmc
