#pragma once

// Evaluation of g_k, h_k and truncated series on and near the unit circle,
// plus the boundary checks built on them: the sign of Re g_k, the outer
// log-integral identity for h_k, and the Smirnov metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <span>
#include <vector>

#include "quadrature.hpp"
#include "scalar.hpp"
#include "series.hpp"
#include "summation.hpp"

namespace hardy {

namespace detail {

template <class R>
R wrap_angle(const R& theta) {
    using std::floor;
    const R two_pi = R(2) * pi<R>();
    R t = theta - two_pi * R(floor(theta / two_pi));
    if (t >= two_pi) t -= two_pi;
    return t;
}

template <class R>
R circle_gap(const R& phi) {
    // distance of phi in [0, 2 pi) from 0 on the circle
    const R two_pi = R(2) * pi<R>();
    return phi < two_pi - phi ? phi : two_pi - phi;
}

template <class R>
R singular_tolerance() {
    return R(64) * machine_epsilon<R>();
}

}  // namespace detail

/// g_k(e^{i theta}) = Log(1 - w^k) - Log(1 - w) - log k with principal logs.
///
/// For phi in (0, 2 pi), Log(1 - e^{i phi}) = log(2 sin(phi/2)) + i (phi - pi)/2,
/// so the real part is log(sin(k theta/2) / (k sin(theta/2))) and the imaginary
/// part is ((k theta mod 2 pi) - theta)/2. At theta = 0 the value is the limit 0;
/// at a nontrivial k-th root of unity the real part is -infinity.
template <class R>
complex_of_t<R> eval_gk_boundary(unsigned k, const R& theta) {
    detail::require_k(k);
    using C = complex_of_t<R>;
    using std::log;
    using std::sin;
    if constexpr (std::is_same_v<R, double>) {
        // k * theta is exact in the 64-bit significand for k < 2^11, which keeps
        // the relative accuracy next to the roots of unity
        if (k < 2048) {
            const long double two_pi = 2 * std::numbers::pi_v<long double>;
            long double t1 = std::fmod(static_cast<long double>(theta), two_pi);
            if (t1 < 0) t1 += two_pi;
            const long double tol = 64 * std::numeric_limits<double>::epsilon();
            if (std::min(t1, two_pi - t1) <= tol) return {0.0, 0.0};
            long double tk = std::fmod(t1 * k, two_pi);
            if (std::min(tk, two_pi - tk) <= tol * k) {
                return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN()};
            }
            long double ratio = std::sin(tk / 2) / (k * std::sin(t1 / 2));
            return {static_cast<double>(std::log(ratio)), static_cast<double>((tk - t1) / 2)};
        }
    }
    const R tol = detail::singular_tolerance<R>();
    const R t1 = detail::wrap_angle(theta);
    if (detail::circle_gap(t1) <= tol) return make_complex<C>(R(0), R(0));
    const R tk = detail::wrap_angle(R(t1 * R(k)));
    if (detail::circle_gap(tk) <= tol * R(k)) {
        return make_complex<C>(-std::numeric_limits<R>::infinity(), std::numeric_limits<R>::quiet_NaN());
    }
    R ratio = R(sin(tk / 2)) / (R(k) * R(sin(t1 / 2)));
    return make_complex<C>(R(log(ratio)), (tk - t1) / 2);
}

/// h_k(e^{i theta}) = g_k / (1 - e^{i theta}), with the removable value -(k-1)/2 at theta = 0.
template <class R>
complex_of_t<R> eval_hk_boundary(unsigned k, const R& theta) {
    detail::require_k(k);
    using C = complex_of_t<R>;
    using std::cos;
    using std::sin;
    const R t1 = detail::wrap_angle(theta);
    if (detail::circle_gap(t1) <= detail::singular_tolerance<R>()) {
        return make_complex<C>(-R(k - 1) / 2, R(0));
    }
    C g = eval_gk_boundary<R>(k, t1);
    if (!std::isfinite(static_cast<double>(real_part(g)))) return g;
    C one_minus_w = make_complex<C>(R(1) - R(cos(t1)), -R(sin(t1)));
    return C(g / one_minus_w);
}

template <class C>
struct SeriesValue {
    C value{};
    double truncation_bound = 0.0;  ///< bound on the discarded tail at this point
};

/// Horner evaluation of sum_{n<=N} f^(n) (r e^{i theta})^n.
template <class T, class R>
SeriesValue<complex_of_t<R>> eval_series(const TruncatedSeries<T>& f, const R& r, const R& theta) {
    using C = complex_of_t<R>;
    if (r < R(0) || r >= R(1)) throw std::domain_error("eval_series needs 0 <= r < 1");
    SeriesValue<C> out;
    using std::cos;
    using std::pow;
    using std::sin;
    const R t = detail::wrap_angle(theta);
    const R s = R(sin(t));
    const bool on_axis = (t == R(0)) || (t == pi<R>());
    if (on_axis && !is_complex_v<T>) {
        const R w = t == R(0) ? r : -r;
        R acc(0);
        for (std::size_t n = f.coeffs.size(); n-- > 0;) acc = acc * w + R(real_part(f.coeffs[n]));
        out.value = make_complex<C>(acc, R(0));
    } else {
        const C w = on_axis ? make_complex<C>(t == R(0) ? r : -r, R(0)) : make_complex<C>(R(r * R(cos(t))), R(r * s));
        C acc = make_complex<C>(R(0), R(0));
        for (std::size_t n = f.coeffs.size(); n-- > 0;) acc = C(acc * w) + convert<C>(f.coeffs[n]);
        out.value = acc;
    }
    if (f.tail.coeff_sup > 0.0) {
        double rd = static_cast<double>(r);
        out.truncation_bound =
            f.tail.coeff_sup * std::pow(rd, static_cast<double>(f.order() + 1)) / (1.0 - rd);
    }
    return out;
}

/// Radii r_j = 1 - 2^{-j}, j = j_min..j_max, for radial limits. Radii whose
/// truncation bound exceeds clip_tol * max(1, |value|) are skipped.
struct RadialSchedule {
    int j_min = 4;
    int j_max = 20;
    int extrapolation_order = 3;  ///< Richardson levels applied to the last radii
    double clip_tol = 1e-13;
};

template <class C>
struct RadialLimit {
    C value{};
    double error_estimate = 0.0;  ///< change between the last two extrapolants
    double last_increment = 0.0;  ///< |f(r_J) - f(r_{J-1})|
    bool converged = false;
    int radii_used = 0;
    int last_j = 0;
    std::vector<C> samples;
};

/// f*(zeta) = lim_{r -> 1-} f(r zeta), extrapolated with a Richardson table in
/// s = 1 - r along the geometric schedule. Non-convergence is flagged when the
/// raw increments stop shrinking.
template <class T, class R>
RadialLimit<complex_of_t<R>> radial_limit(const TruncatedSeries<T>& f, const RotationParameter<R>& zeta,
                                          const RadialSchedule& schedule = {}) {
    using C = complex_of_t<R>;
    RadialLimit<C> out;
    std::vector<R> s_values;
    for (int j = schedule.j_min; j <= schedule.j_max; ++j) {
        R s = R(1) / R(std::uint64_t(1) << j);
        auto v = eval_series(f, R(R(1) - s), zeta.angle());
        double scale = std::max(1.0, static_cast<double>(magnitude(v.value)));
        if (f.tail.known() && v.truncation_bound > schedule.clip_tol * scale) break;
        out.samples.push_back(v.value);
        s_values.push_back(s);
        out.last_j = j;
    }
    out.radii_used = static_cast<int>(out.samples.size());
    const std::size_t n = out.samples.size();
    if (n == 0) return out;
    if (n == 1) {
        out.value = out.samples[0];
        out.error_estimate = kInfinity;
        return out;
    }
    // Neville table on the last (order + 1) samples, extrapolating to s = 0.
    const std::size_t levels = std::min<std::size_t>(n, static_cast<std::size_t>(schedule.extrapolation_order) + 1);
    auto extrapolate = [&](std::size_t end) {
        std::size_t start = end - levels;
        std::vector<C> p(out.samples.begin() + start, out.samples.begin() + end);
        for (std::size_t m = 1; m < levels; ++m) {
            for (std::size_t i = 0; i + m < levels; ++i) {
                const R& si = s_values[start + i];
                const R& sim = s_values[start + i + m];
                // value at s = 0 of the line through (si, p[i+1]) and (sim, p[i]) in Neville form
                p[i] = C(C(p[i + 1] * si - p[i] * sim) / (si - sim));
            }
        }
        return p[0];
    };
    out.value = extrapolate(n);
    out.error_estimate = n > levels ? static_cast<double>(magnitude(C(out.value - extrapolate(n - 1)))) : kInfinity;
    std::vector<double> inc;
    for (std::size_t i = 1; i < n; ++i) inc.push_back(static_cast<double>(magnitude(C(out.samples[i] - out.samples[i - 1]))));
    out.last_increment = inc.back();
    const double floor_tol = 1e3 * static_cast<double>(machine_epsilon<R>()) *
                             std::max(1.0, static_cast<double>(magnitude(out.value)));
    bool shrinking = true;
    const std::size_t look = std::min<std::size_t>(inc.size(), 4);
    for (std::size_t i = inc.size() - look + 1; i < inc.size(); ++i) {
        if (inc[i] <= floor_tol) continue;
        if (inc[i] > 0.75 * inc[i - 1]) shrinking = false;
    }
    out.converged = shrinking && inc.size() >= 2;
    return out;
}

// ---------------------------------------------------------------------------
// sign of Re g_k on the circle

struct NonpositivityReport {
    double max_re_g = -kInfinity;          ///< should be <= slack
    double min_re_rotated_h = kInfinity;   ///< min Re[(w - 1) h_k(w)], should be >= -slack
    double max_identity_gap = 0.0;         ///< max |Re[(w - 1) h_k(w)] + Re g_k(w)|
    std::size_t nodes_checked = 0;
    std::size_t singular_nodes = 0;
};

template <class R>
NonpositivityReport check_nonpositive_real(unsigned k, const BoundaryGrid& grid) {
    using C = complex_of_t<R>;
    using std::cos;
    using std::sin;
    NonpositivityReport rep;
    for (double th : grid.nodes) {
        const R theta(th);
        C g = eval_gk_boundary<R>(k, theta);
        double re_g = static_cast<double>(real_part(g));
        if (!std::isfinite(re_g)) {
            ++rep.singular_nodes;
            continue;
        }
        C h = eval_hk_boundary<R>(k, theta);
        C w_minus_1 = make_complex<C>(R(cos(theta)) - R(1), R(sin(theta)));
        double v = static_cast<double>(real_part(C(w_minus_1 * h)));
        rep.max_re_g = std::max(rep.max_re_g, re_g);
        rep.min_re_rotated_h = std::min(rep.min_re_rotated_h, v);
        rep.max_identity_gap = std::max(rep.max_identity_gap, std::abs(v + re_g));
        ++rep.nodes_checked;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// outer log-integral identity

struct OuterDefect {
    double integral = 0.0;  ///< quadrature of log|h_k| dm
    double expected = 0.0;  ///< log |h_k(0)| = log(log k)
    double defect = 0.0;    ///< integral - expected
    std::size_t nodes = 0;
    bool stable = true;     ///< refinement agreed within tolerance
    double refinement_change = 0.0;
};

/// Grid for the log|h_k| integral: graded toward the nontrivial k-th roots of unity.
inline BoundaryGrid outer_grid(unsigned k, const BoundaryGrid::GradedOptions& opt = {}) {
    return BoundaryGrid::graded(root_of_unity_angles(k), opt);
}

/// integral of log|h_k| dm minus log(log k) on the given grid.
template <class R>
OuterDefect outer_defect(unsigned k, const BoundaryGrid& grid) {
    detail::require_k(k);
    using std::abs;
    using std::log;
    Accumulator<R> acc;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const R theta(grid.nodes[i]);
        auto h = eval_hk_boundary<R>(k, theta);
        R lh = R(log(magnitude(h)));
        acc.add(R(grid.weights[i]) * lh);
    }
    OuterDefect out;
    out.integral = static_cast<double>(acc.value());
    out.expected = std::log(std::log(static_cast<double>(k)));
    out.defect = out.integral - out.expected;
    out.nodes = grid.size();
    return out;
}

/// outer_defect with refinement: subdivides the graded panels until two
/// successive grids agree within tol (or max_levels is reached, which sets stable = false).
template <class R>
OuterDefect outer_defect_adaptive(unsigned k, double tol = 1e-9, BoundaryGrid::GradedOptions opt = {},
                                  int max_levels = 4) {
    OuterDefect prev = outer_defect<R>(k, outer_grid(k, opt));
    for (int level = 0; level < max_levels; ++level) {
        opt.subdivide *= 2;
        OuterDefect next = outer_defect<R>(k, outer_grid(k, opt));
        next.refinement_change = std::abs(next.integral - prev.integral);
        if (next.refinement_change <= tol) {
            next.stable = true;
            return next;
        }
        prev = next;
    }
    prev.stable = false;
    return prev;
}

// ---------------------------------------------------------------------------
// Smirnov metric

/// d(f, g) = integral of log(1 + |f - g|) dm from boundary samples at the grid nodes.
template <class C>
real_of_t<C> smirnov_distance(std::span<const C> f_values, std::span<const C> g_values, const BoundaryGrid& grid) {
    using R = real_of_t<C>;
    if (f_values.size() != grid.size() || g_values.size() != grid.size()) {
        throw std::invalid_argument("smirnov_distance: samples must match the grid nodes");
    }
    using std::log1p;
    Accumulator<R> acc;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        R d = magnitude(C(f_values[i] - g_values[i]));
        acc.add(R(grid.weights[i]) * R(log1p(d)));
    }
    return acc.value();
}

}  // namespace hardy
