#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "kcmc/errors.hpp"

namespace kcmc {

// ---------------------------------------------------------------------------
// Bracketed root finding
// ---------------------------------------------------------------------------

/// Root of a continuous scalar function on [lo, hi] with f(lo)*f(hi) <= 0.
///
/// Alternates a false-position step with a plain bisection step, so the
/// bracket at least halves every two iterations. Terminates when the bracket
/// width drops below tol * max(scale_floor, |x|) or no representable point
/// is left inside it. The result never leaves the initial bracket and is a
/// deterministic function of the inputs.
template <class F>
double find_root_bracketed(F&& f, double lo, double hi, double tol = 1e-12,
                           double scale_floor = 1.0) {
    if (!(lo <= hi)) std::swap(lo, hi);
    double a = lo;
    double b = hi;
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::isnan(fa) || std::isnan(fb) || (fa > 0) == (fb > 0)) {
        throw BracketError("find_root_bracketed: no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    }

    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (a + b);
        if (b - a <= tol * std::max(scale_floor, std::abs(mid))) break;

        double x = mid;
        if (iter % 2 == 0 && std::isfinite(fa) && std::isfinite(fb)) {
            const double xs = b - fb * (b - a) / (fb - fa);
            if (xs > a && xs < b) x = xs;
        }
        if (x <= a || x >= b) {
            x = mid;
            if (x <= a || x >= b) break;  // adjacent doubles
        }
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (std::isnan(fx)) {
            throw BracketError("find_root_bracketed: function returned NaN at x = " +
                               std::to_string(x));
        }
        if ((fx > 0) == (fa > 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    return std::abs(fa) <= std::abs(fb) ? a : b;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

enum class SingularEnd { None, Lower, Upper };

namespace detail {

struct QuadSegment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const QuadSegment& other) const { return error < other.error; }
};

// 7-point Gauss / 15-point Kronrod pair.
template <class F>
QuadSegment gauss_kronrod_15(F& f, double a, double b) {
    static constexpr std::array<double, 8> xgk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wgk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * wgk[7];
    double gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += wgk[j] * sum;
        if (j % 2 == 1) gauss += wg[j / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

template <class F>
double adaptive_gauss_kronrod(F& f, double a, double b, double tol, int max_segments) {
    std::priority_queue<QuadSegment> heap;
    QuadSegment first = gauss_kronrod_15(f, a, b);
    double total = first.value;
    double total_err = first.error;
    heap.push(first);
    int segments = 1;
    while (total_err > tol) {
        if (segments >= max_segments) {
            throw AccuracyError("quadrature did not converge within the subdivision limit", total,
                                total_err);
        }
        QuadSegment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw AccuracyError("quadrature segment cannot be subdivided further", total,
                                total_err);
        }
        QuadSegment left = gauss_kronrod_15(f, worst.a, mid);
        QuadSegment right = gauss_kronrod_15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++segments;
        if (!std::isfinite(total)) {
            throw AccuracyError("quadrature produced a non-finite value", total, total_err);
        }
    }
    // Re-sum to shed accumulated cancellation from the incremental updates.
    double sum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        heap.pop();
    }
    return sum;
}

}  // namespace detail

/// Integral of f over [a, b] with an optional inverse-square-root singularity
/// at one endpoint.
///
/// The singular end is removed with the substitution |x - end| = u^2, which
/// turns an integrand behaving like |x - end|^(-1/2) into a bounded one; the
/// result is then computed with adaptive Gauss-Kronrod to absolute error tol.
/// Throws AccuracyError (carrying the best estimate) when the subdivision
/// limit is hit.
template <class F>
double integrate_endpoint_singular(F&& f, double a, double b, SingularEnd singular_end,
                                   double tol = 1e-9, int max_segments = 4000) {
    if (a == b) return 0.0;
    if (!(a < b)) {
        throw DomainError("integrate_endpoint_singular: requires a < b");
    }
    switch (singular_end) {
        case SingularEnd::None: {
            return detail::adaptive_gauss_kronrod(f, a, b, tol, max_segments);
        }
        case SingularEnd::Lower: {
            auto g = [&](double u) { return 2.0 * u * f(a + u * u); };
            return detail::adaptive_gauss_kronrod(g, 0.0, std::sqrt(b - a), tol, max_segments);
        }
        case SingularEnd::Upper: {
            auto g = [&](double u) { return 2.0 * u * f(b - u * u); };
            return detail::adaptive_gauss_kronrod(g, 0.0, std::sqrt(b - a), tol, max_segments);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Initial-value problems
// ---------------------------------------------------------------------------

template <std::size_t N>
using State = std::array<double, N>;

enum class IvpStop { ReachedEnd, Predicate };

template <std::size_t N>
struct Trajectory {
    std::vector<double> x;
    std::vector<State<N>> y;
    std::vector<State<N>> dy;  // rhs evaluated at each sample
    IvpStop stop = IvpStop::ReachedEnd;
    std::string stop_reason;
    // Last point where the stop predicate did not fire (located to ~1e-12
    // of the step). Equal to the final sample when no stop happened.
    double stop_x = 0.0;
    State<N> stop_y{};
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
};

class IvpError : public Error {
public:
    IvpError(const std::string& what, double x_reached) : Error(what), x_reached_(x_reached) {}
    double x_reached() const noexcept { return x_reached_; }

private:
    double x_reached_;
};

template <std::size_t N>
class IvpStepUnderflow : public IvpError {
public:
    IvpStepUnderflow(const std::string& what, Trajectory<N> partial)
        : IvpError(what, partial.x.empty() ? 0.0 : partial.x.back()),
          partial_(std::move(partial)) {}
    const Trajectory<N>& partial() const noexcept { return partial_; }

private:
    Trajectory<N> partial_;
};

struct IvpOptions {
    double tol = 1e-9;
    // Zero selects |x_end - x0| / 200.
    double max_step = 0.0;
    // When non-empty, steps land exactly on these abscissae (sorted in the
    // direction of integration) and only they are recorded.
    std::vector<double> output_points;
    std::size_t max_steps = 5'000'000;
};

struct NoStop {
    template <class Y>
    std::optional<std::string> operator()(double, const Y&) const {
        return std::nullopt;
    }
};

namespace detail {

template <std::size_t N>
struct DopriStep {
    State<N> y_new;
    State<N> k7;
    double err_norm;
};

// Dormand-Prince 5(4) step with local extrapolation; k1 is the FSAL stage.
template <std::size_t N, class Rhs>
DopriStep<N> dopri_step(Rhs& rhs, double x, const State<N>& y, const State<N>& k1, double h,
                        double tol) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    State<N> tmp{};
    auto stage = [&](auto&& combine) {
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
    };
    stage([&](std::size_t i) { return a21 * k1[i]; });
    const State<N> k2 = rhs(x + c2 * h, tmp);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    const State<N> k3 = rhs(x + c3 * h, tmp);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    const State<N> k4 = rhs(x + c4 * h, tmp);
    stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    const State<N> k5 = rhs(x + c5 * h, tmp);
    stage([&](std::size_t i) {
        return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
    });
    const State<N> k6 = rhs(x + h, tmp);

    DopriStep<N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out.y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    out.k7 = rhs(x + h, out.y_new);

    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                e7 * out.k7[i]);
        const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(out.y_new[i]));
        acc += (err / scale) * (err / scale);
    }
    out.err_norm = std::sqrt(acc / static_cast<double>(N));
    bool finite = std::isfinite(out.err_norm);
    for (std::size_t i = 0; i < N; ++i) finite = finite && std::isfinite(out.y_new[i]);
    if (!finite) out.err_norm = std::numeric_limits<double>::infinity();
    return out;
}

template <std::size_t N>
double rms_scaled(const State<N>& v, const State<N>& y, double tol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double s = tol + tol * std::abs(y[i]);
        acc += (v[i] / s) * (v[i] / s);
    }
    return std::sqrt(acc / static_cast<double>(N));
}

}  // namespace detail

/// Adaptive explicit Runge-Kutta (Dormand-Prince 5(4)) integration of
/// y' = rhs(x, y) from x0 toward x_end.
///
/// Steps are capped at |x_end - x0| / 200 unless options.max_step says
/// otherwise. A rhs that returns non-finite values makes the step fail and
/// shrink, so rhs may signal "outside the domain" with NaN. The optional stop
/// predicate is evaluated at every accepted point; when it fires, the
/// boundary is located by bisecting the last step and integration ends with
/// IvpStop::Predicate.
template <std::size_t N, class Rhs, class Stop = NoStop>
Trajectory<N> solve_ivp(Rhs&& rhs, double x0, const State<N>& y0, double x_end,
                        const IvpOptions& options = {}, Stop&& stop = Stop{}) {
    Trajectory<N> traj;
    const double span = x_end - x0;
    const double dir = span >= 0 ? 1.0 : -1.0;
    const double tol = options.tol;
    const double max_step =
        options.max_step > 0 ? options.max_step : std::max(std::abs(span) / 200.0, 1e-300);
    const bool sampled = !options.output_points.empty();
    std::size_t next_out = 0;

    double x = x0;
    State<N> y = y0;
    State<N> k1 = rhs(x, y);
    traj.stop_x = x;
    traj.stop_y = y;

    auto record = [&](double xr, const State<N>& yr, const State<N>& dyr) {
        traj.x.push_back(xr);
        traj.y.push_back(yr);
        traj.dy.push_back(dyr);
    };
    if (!sampled) {
        record(x, y, k1);
    } else {
        while (next_out < options.output_points.size() &&
               dir * (options.output_points[next_out] - x) <= 0) {
            if (options.output_points[next_out] == x) record(x, y, k1);
            ++next_out;
        }
    }
    if (auto reason = stop(x, y)) {
        traj.stop = IvpStop::Predicate;
        traj.stop_reason = *reason;
        return traj;
    }
    if (span == 0.0) return traj;

    // Initial step (Hairer, Norsett & Wanner, Solving ODEs I, II.4).
    double h;
    {
        const double d0 = detail::rms_scaled<N>(y, y, tol);
        const double d1 = detail::rms_scaled<N>(k1, y, tol);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, max_step);
        State<N> y1{};
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k1[i];
        const State<N> f1 = rhs(x + dir * h0, y1);
        State<N> df{};
        for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - k1[i];
        const double d2 = detail::rms_scaled<N>(df, y, tol) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = (std::isfinite(dmax) && dmax > 1e-15) ? std::pow(0.01 / dmax, 0.2)
                                                                 : std::max(1e-6, h0 * 1e-3);
        h = std::min({100.0 * h0, h1, max_step});
        if (!(h > 0) || !std::isfinite(h)) h = std::min(1e-6, max_step);
    }

    double h_free = h;
    bool last_rejected = false;
    while (dir * (x_end - x) > 0) {
        if (traj.steps_accepted + traj.steps_rejected >= options.max_steps) {
            throw IvpStepUnderflow<N>("solve_ivp: step budget exhausted", std::move(traj));
        }
        double target = x_end;
        if (sampled && next_out < options.output_points.size()) {
            target = options.output_points[next_out];
        }
        bool lands = false;
        h = std::min(h_free, max_step);
        if (dir * (target - x) <= h * (1.0 + 1e-12)) {
            h = std::abs(target - x);
            lands = true;
        }
        const double min_step = 1e-14 * std::max(1.0, std::abs(x));
        if (h < min_step && !lands) {
            throw IvpStepUnderflow<N>(
                "solve_ivp: step size underflow at x = " + std::to_string(x) +
                    " (stiff problem or singularity)",
                std::move(traj));
        }

        const auto step = detail::dopri_step<N>(rhs, x, y, k1, dir * h, tol);
        if (step.err_norm > 1.0) {
            ++traj.steps_rejected;
            const double factor = std::isfinite(step.err_norm)
                                      ? std::max(0.2, 0.9 * std::pow(step.err_norm, -0.2))
                                      : 0.25;
            h_free = h * factor;
            last_rejected = true;
            continue;
        }

        const double x_new = lands ? target : x + dir * h;
        if (auto reason = stop(x_new, step.y_new)) {
            // Locate the boundary: largest sub-step whose end point is still admissible.
            double good = 0.0;
            double bad = h;
            State<N> y_good = y;
            for (int it = 0; it < 60 && bad - good > 1e-13 * std::max(1.0, std::abs(x)); ++it) {
                const double trial = 0.5 * (good + bad);
                const auto sub = detail::dopri_step<N>(rhs, x, y, k1, dir * trial, tol);
                if (std::isfinite(sub.err_norm) && !stop(x + dir * trial, sub.y_new)) {
                    good = trial;
                    y_good = sub.y_new;
                } else {
                    bad = trial;
                }
            }
            traj.stop = IvpStop::Predicate;
            traj.stop_reason = *reason;
            traj.stop_x = x + dir * good;
            traj.stop_y = y_good;
            if (!sampled && good > 0) record(traj.stop_x, y_good, rhs(traj.stop_x, y_good));
            return traj;
        }

        ++traj.steps_accepted;
        x = x_new;
        y = step.y_new;
        k1 = step.k7;
        traj.stop_x = x;
        traj.stop_y = y;
        if (!sampled) {
            record(x, y, k1);
        } else if (lands && next_out < options.output_points.size() &&
                   options.output_points[next_out] == x) {
            record(x, y, k1);
            ++next_out;
        }

        double factor = step.err_norm > 0 ? 0.9 * std::pow(step.err_norm, -0.2) : 5.0;
        factor = std::clamp(factor, 0.2, 5.0);
        if (last_rejected) factor = std::min(factor, 1.0);
        last_rejected = false;
        if (lands && h < h_free) {
            // Shortened to hit a target: keep the controller's step unless it should shrink.
            if (factor < 1.0) h_free = std::min(h_free, h * factor);
        } else {
            h_free = h * factor;
        }
    }
    return traj;
}

}  // namespace kcmc
