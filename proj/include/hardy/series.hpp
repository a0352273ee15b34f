#pragma once

// Truncated Maclaurin series and the coefficient generators for
//
//     g_k(z) = log((1 + z + ... + z^{k-1}) / k),     h_k(z) = g_k(z) / (1 - z).
//
// Closed forms follow from 1 + ... + z^{k-1} = (1 - z^k)/(1 - z):
//
//     g_k^(0) = -log k,   g_k^(n) = 1/n  (k does not divide n),   (1-k)/n  (k | n)
//     h_k^(n) = H_n - H_{floor(n/k)} - log k
//
// Both are cross-checked against formal_log_series in the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalar.hpp"
#include "summation.hpp"

namespace hardy {

/// Decay constant c in |h_k^(n)| <= c k / n, valid for every n >= k.
///
/// With m = floor(n/k) >= 1 and e_x = H_x - log x - gamma, which satisfies
/// 1/(2x) - 1/(12x^2) <= e_x <= 1/(2x),
///
///     h_k^(n) = log(n / (k m)) + e_n - e_m  lies in  [-1/(2m), 7/(12m)],
///
/// and n < k(m+1) <= 2km gives 1/m < 2k/n. Hence c = 7/6.
inline constexpr double kHkDecayConstant = 7.0 / 6.0;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Rigorous information about the coefficients past the truncation order N.
struct TailModel {
    double coeff_sup = 0.0;  ///< sup_{n>N} |f^(n)|
    double norm_sq = 0.0;    ///< sum_{n>N} |f^(n)|^2

    static TailModel exact() { return {0.0, 0.0}; }
    static TailModel unknown() { return {kInfinity, kInfinity}; }
    bool known() const { return std::isfinite(coeff_sup) && std::isfinite(norm_sq); }
};

template <class T>
struct TruncatedSeries {
    std::vector<T> coeffs;  ///< indices 0..N
    std::string label = "custom";
    TailModel tail = TailModel::exact();

    std::size_t order() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
    const T& operator[](std::size_t n) const { return coeffs[n]; }
    static constexpr int precision_bits() {
        if constexpr (is_floating_v<T>) {
            return precision_bits_v<T>;
        } else {
            return 0;  // exact
        }
    }
};

template <class T>
TruncatedSeries<T> monomial_series(std::size_t m, std::size_t N, T c = T(1)) {
    TruncatedSeries<T> s;
    s.coeffs.assign(N + 1, T(0));
    if (m <= N) s.coeffs[m] = c;
    s.label = m == 0 ? "one" : "z^" + std::to_string(m);
    s.tail = m <= N ? TailModel::exact() : TailModel{static_cast<double>(magnitude(c)), static_cast<double>(abs_sq(c))};
    return s;
}

namespace detail {

template <class T>
T ratio(long p, long q) {
    if constexpr (std::is_same_v<T, LogLinear>) {
        return LogLinear(Rational(p, q));
    } else if constexpr (std::is_same_v<T, Rational>) {
        return Rational(p, q);
    } else {
        return T(p) / T(q);
    }
}

template <class T>
T log_of(unsigned k) {
    if constexpr (std::is_same_v<T, LogLinear>) {
        return LogLinear(Rational(0), Rational(1));
    } else {
        using std::log;
        return T(log(T(k)));
    }
}

/// Harmonic-table element type feeding the h_k closed form.
template <class T>
struct harmonic_type {
    using type = T;
};
template <>
struct harmonic_type<LogLinear> {
    using type = Rational;
};

inline void require_k(unsigned k) {
    if (k < 2) throw std::invalid_argument("family index k must be >= 2, got " + std::to_string(k));
}

}  // namespace detail

/// H_0 = 0, H_n = 1 + 1/2 + ... + 1/n, accumulated with compensation.
template <class T>
std::vector<T> harmonic_numbers(std::size_t N) {
    std::vector<T> h(N + 1);
    h[0] = T(0);
    if constexpr (is_floating_v<T>) {
        NeumaierSum<T> acc;
        for (std::size_t m = 1; m <= N; ++m) {
            acc.add(T(1) / T(m));
            h[m] = acc.value();
        }
    } else {
        for (std::size_t m = 1; m <= N; ++m) h[m] = h[m - 1] + detail::ratio<T>(1, static_cast<long>(m));
    }
    return h;
}

inline TailModel gk_tail(unsigned k, std::size_t N) {
    // |g_k^(n)| <= (k-1)/n for n >= 1
    double a = static_cast<double>(k - 1);
    double sq = N == 0 ? a * a * 1.6449340668482264 : a * a / static_cast<double>(N);
    return {a / static_cast<double>(N + 1), sq};
}

inline TailModel hk_tail(unsigned k, std::size_t N) {
    double c = kHkDecayConstant * k;
    if (N >= k) return {c / static_cast<double>(N + 1), c * c / static_cast<double>(N)};
    // indices N < n < k: |H_n - log k| <= max(1, log k)
    double early = std::max({1.0, std::log(static_cast<double>(k)), kHkDecayConstant});
    double gap = static_cast<double>(k - 1 - N);
    return {early, gap * early * early + c * c / static_cast<double>(k - 1)};
}

template <class T>
TruncatedSeries<T> gk_coefficients(unsigned k, std::size_t N) {
    detail::require_k(k);
    TruncatedSeries<T> s;
    s.coeffs.resize(N + 1);
    s.coeffs[0] = T(0) - detail::log_of<T>(k);
    for (std::size_t n = 1; n <= N; ++n) {
        long num = (n % k == 0) ? 1 - static_cast<long>(k) : 1;
        s.coeffs[n] = detail::ratio<T>(num, static_cast<long>(n));
    }
    s.label = "g_" + std::to_string(k);
    s.tail = gk_tail(k, N);
    return s;
}

/// h_k coefficients from a precomputed harmonic table (size >= N+1).
template <class T, class H>
TruncatedSeries<T> hk_coefficients(unsigned k, std::size_t N, std::span<const H> harmonic) {
    detail::require_k(k);
    if (harmonic.size() < N + 1) throw std::invalid_argument("harmonic table shorter than N+1");
    TruncatedSeries<T> s;
    s.coeffs.resize(N + 1);
    if constexpr (std::is_same_v<T, LogLinear>) {
        for (std::size_t n = 0; n <= N; ++n) s.coeffs[n] = LogLinear(harmonic[n] - harmonic[n / k], Rational(-1));
    } else {
        const T logk = detail::log_of<T>(k);
        for (std::size_t n = 0; n <= N; ++n) s.coeffs[n] = T(harmonic[n]) - T(harmonic[n / k]) - logk;
    }
    s.label = "h_" + std::to_string(k);
    s.tail = hk_tail(k, N);
    return s;
}

template <class T>
TruncatedSeries<T> hk_coefficients(unsigned k, std::size_t N) {
    using H = typename detail::harmonic_type<T>::type;
    auto harmonic = harmonic_numbers<H>(N);
    return hk_coefficients<T, H>(k, N, std::span<const H>(harmonic));
}

/// Maclaurin series of log P by the recurrence n l_n p_0 = n p_n - sum_{m=1}^{n-1} m l_m p_{n-m}.
/// The constant term takes the principal logarithm, so real P needs P(0) > 0
/// (and exact P needs P(0) = 1).
template <class T>
TruncatedSeries<T> formal_log_series(const TruncatedSeries<T>& P, std::size_t N) {
    if (P.coeffs.empty() || P.coeffs[0] == T(0)) {
        throw std::domain_error("formal_log_series: P(0) = 0 is a branch point of the logarithm");
    }
    if constexpr (!is_complex_v<T>) {
        if (P.coeffs[0] < 0) throw std::domain_error("formal_log_series: real series needs P(0) > 0");
    }
    const std::size_t deg = P.order();
    auto p = [&](std::size_t i) -> const T& {
        static const T zero(0);
        return i <= deg ? P.coeffs[i] : zero;
    };
    TruncatedSeries<T> L;
    L.coeffs.assign(N + 1, T(0));
    if constexpr (is_floating_v<T>) {
        using std::log;
        L.coeffs[0] = T(log(P.coeffs[0]));
    } else {
        if (P.coeffs[0] != T(1)) throw std::domain_error("formal_log_series: exact mode needs P(0) = 1");
        L.coeffs[0] = T(0);
    }
    const T p0 = P.coeffs[0];
    for (std::size_t n = 1; n <= N; ++n) {
        Accumulator<T> acc;
        std::size_t lo = n > deg ? n - deg : 1;
        for (std::size_t m = lo; m < n; ++m) acc.add(T(m) * L.coeffs[m] * p(n - m));
        L.coeffs[n] = (T(n) * p(n) - acc.value()) / (T(n) * p0);
    }
    L.label = "log(" + P.label + ")";
    L.tail = TailModel::unknown();
    return L;
}

/// (1 - z) f, truncated at the order of f.
template <class T>
TruncatedSeries<T> mul_by_one_minus_z(const TruncatedSeries<T>& f) {
    TruncatedSeries<T> out;
    out.coeffs.resize(f.coeffs.size());
    if (!f.coeffs.empty()) out.coeffs[0] = f.coeffs[0];
    for (std::size_t n = 1; n < f.coeffs.size(); ++n) out.coeffs[n] = f.coeffs[n] - f.coeffs[n - 1];
    out.label = "(1-z)*" + f.label;
    if constexpr (is_floating_v<T>) {
        double last = f.coeffs.empty() ? 0.0 : static_cast<double>(magnitude(f.coeffs.back()));
        double t = std::sqrt(f.tail.norm_sq);
        double t2 = std::sqrt(f.tail.norm_sq + last * last);
        out.tail = {std::max(f.tail.coeff_sup + last, 2 * f.tail.coeff_sup), (t + t2) * (t + t2)};
    } else {
        out.tail = TailModel::unknown();
    }
    return out;
}

/// f / (1 - z): cumulative sums of the coefficients.
template <class T>
TruncatedSeries<T> div_by_one_minus_z(const TruncatedSeries<T>& f) {
    TruncatedSeries<T> out;
    out.coeffs = prefix_sums<T>(std::span<const T>(f.coeffs));
    out.label = f.label + "/(1-z)";
    out.tail = TailModel::unknown();
    return out;
}

// ---------------------------------------------------------------------------
// rotation

/// A point zeta on the unit circle, stored by its angle in [0, 2 pi).
template <class R>
class RotationParameter {
public:
    using Complex = complex_of_t<R>;

    /// Quarter turns (0, 1/4, 1/2, 3/4) give exact values.
    static RotationParameter from_turns(double turns) {
        double t = turns - std::floor(turns);
        RotationParameter z;
        z.angle_ = R(2) * pi<R>() * R(t);
        double q = t * 4.0;
        if (q == std::floor(q)) z.quarter_ = static_cast<int>(q) % 4;
        z.turns_ = t;
        return z;
    }

    static RotationParameter from_angle(const R& theta) {
        using std::floor;
        const R two_pi = R(2) * pi<R>();
        RotationParameter z;
        z.angle_ = theta - two_pi * R(floor(theta / two_pi));
        z.turns_ = static_cast<double>(z.angle_ / two_pi);
        if (z.angle_ == R(0)) z.quarter_ = 0;
        return z;
    }

    /// Rejects points off the circle by more than tol.
    static RotationParameter from_complex(const Complex& zeta, const R& tol = R(64) * machine_epsilon<R>()) {
        using std::abs;
        using std::atan2;
        R mod = magnitude(zeta);
        if (abs(mod - R(1)) > tol) {
            throw std::domain_error("rotation parameter is not unimodular: |zeta| = " + to_decimal(mod, 20));
        }
        return from_angle(R(atan2(imag_part(zeta), real_part(zeta))));
    }

    const R& angle() const { return angle_; }
    double turns() const { return turns_; }
    std::optional<int> quarter_turns() const { return quarter_; }

    Complex value() const {
        if (quarter_) {
            static constexpr int re[4] = {1, 0, -1, 0};
            static constexpr int im[4] = {0, 1, 0, -1};
            return make_complex<Complex>(R(re[*quarter_]), R(im[*quarter_]));
        }
        using std::cos;
        using std::sin;
        return make_complex<Complex>(R(cos(angle_)), R(sin(angle_)));
    }
    Complex conj_value() const { return conjugate(value()); }

    /// conj(zeta)^n for n = 0..N. Powers are re-anchored on the exact
    /// polar value every 256 steps to bound the drift of repeated products.
    std::vector<Complex> conj_powers(std::size_t N) const {
        std::vector<Complex> out(N + 1);
        const Complex step = conj_value();
        out[0] = make_complex<Complex>(R(1), R(0));
        for (std::size_t n = 1; n <= N; ++n) {
            if (n % 256 == 0 && !quarter_) {
                using std::cos;
                using std::sin;
                R phi = -angle_ * R(n);
                out[n] = make_complex<Complex>(R(cos(phi)), R(sin(phi)));
            } else {
                out[n] = out[n - 1] * step;
            }
        }
        return out;
    }

private:
    R angle_{0};
    double turns_ = 0.0;
    std::optional<int> quarter_;
};

/// (U f)(z) = f(conj(zeta) z): coefficient n is multiplied by conj(zeta)^n.
template <class T, class R>
auto rotate(const TruncatedSeries<T>& f, const RotationParameter<R>& zeta) {
    using C = complex_of_t<R>;
    TruncatedSeries<C> out;
    auto powers = zeta.conj_powers(f.order());
    out.coeffs.resize(f.coeffs.size());
    for (std::size_t n = 0; n < f.coeffs.size(); ++n) out.coeffs[n] = powers[n] * convert<C>(f.coeffs[n]);
    out.label = "U(" + f.label + ")";
    out.tail = f.tail;
    return out;
}

/// Exact rotation with zeta kept symbolic: coefficient n becomes f^(n) zeta^{-n}.
template <class T>
TruncatedSeries<ZetaMonomial<T>> rotate(const TruncatedSeries<T>& f, SymbolicZeta) {
    TruncatedSeries<ZetaMonomial<T>> out;
    out.coeffs.resize(f.coeffs.size());
    for (std::size_t n = 0; n < f.coeffs.size(); ++n) out.coeffs[n] = {f.coeffs[n], -static_cast<long>(n)};
    out.label = "U(" + f.label + ")";
    out.tail = f.tail;
    return out;
}

namespace detail {

template <class Z, class T>
auto times_zeta(const Z& zeta, const T& x) {
    if constexpr (std::is_same_v<Z, SymbolicZeta>) {
        return hardy::times_zeta(zeta, x);
    } else {
        return zeta * x;
    }
}

}  // namespace detail

/// (zeta - z) f, truncated at the order of f: coefficient n is zeta f^(n) - f^(n-1).
template <class T, class Z>
auto mul_by_zeta_minus_z(const TruncatedSeries<T>& f, const Z& zeta) {
    using Out = decltype(detail::times_zeta(zeta, f.coeffs[0]));
    TruncatedSeries<Out> out;
    out.coeffs.reserve(f.coeffs.size());
    for (std::size_t n = 0; n < f.coeffs.size(); ++n) {
        Out v = detail::times_zeta(zeta, f.coeffs[n]);
        if (n > 0) v = v - Out(f.coeffs[n - 1]);
        out.coeffs.push_back(v);
    }
    out.label = "(zeta-z)*" + f.label;
    if constexpr (is_floating_v<T>) {
        double last = f.coeffs.empty() ? 0.0 : static_cast<double>(magnitude(f.coeffs.back()));
        double t = std::sqrt(f.tail.norm_sq);
        double t2 = std::sqrt(f.tail.norm_sq + last * last);
        out.tail = {std::max(f.tail.coeff_sup + last, 2 * f.tail.coeff_sup), (t + t2) * (t + t2)};
    } else {
        out.tail = TailModel::unknown();
    }
    return out;
}

// ---------------------------------------------------------------------------
// deflation f = a + (z - zeta) g

template <class T>
struct DeflationResult {
    TruncatedSeries<T> quotient;
    double residual = 0.0;  ///< max |g^(n)| over the last 1% of indices
    double f_norm = 0.0;
    bool converged = true;  ///< residual <= threshold * ||f||
};

inline constexpr double kDeflationThreshold = 1e-6;

namespace detail {

template <class X, class Z>
X divide_by_zeta(const X& x, const Z& zeta) {
    if constexpr (is_complex_v<Z>) {
        return x * conjugate(zeta);  // |zeta| = 1
    } else {
        return x / zeta;
    }
}

}  // namespace detail

/// Solves f - a = (z - zeta) g up to order N by the forward recurrence
/// g^(0) = (a - f^(0))/zeta, g^(n) = (g^(n-1) - f^(n))/zeta.
template <class T, class A, class Z>
auto deflate_at(const TruncatedSeries<T>& f, const A& a, const Z& zeta, double threshold = kDeflationThreshold) {
    using Out = decltype(detail::divide_by_zeta(a - f.coeffs[0], zeta));
    DeflationResult<Out> res;
    auto& g = res.quotient.coeffs;
    g.reserve(f.coeffs.size());
    Out prev = detail::divide_by_zeta(Out(a - f.coeffs[0]), zeta);
    g.push_back(prev);
    for (std::size_t n = 1; n < f.coeffs.size(); ++n) {
        prev = detail::divide_by_zeta(Out(prev - Out(f.coeffs[n])), zeta);
        g.push_back(prev);
    }
    res.quotient.label = "deflate(" + f.label + ")";
    res.quotient.tail = TailModel::unknown();
    if constexpr (is_floating_v<Out>) {
        std::size_t len = g.size();
        std::size_t window = std::max<std::size_t>(1, len / 100);
        double r = 0.0;
        for (std::size_t n = len - window; n < len; ++n) r = std::max(r, static_cast<double>(magnitude(g[n])));
        Accumulator<real_of_t<T>> fn;
        for (const auto& c : f.coeffs) fn.add(abs_sq(c));
        using std::sqrt;
        res.residual = r;
        res.f_norm = static_cast<double>(sqrt(fn.value()));
        res.converged = r <= threshold * res.f_norm;
    }
    return res;
}

// ---------------------------------------------------------------------------
// inner product

template <class T>
struct InnerProductResult {
    T value{};
    double tail_bound = 0.0;  ///< bound on |sum_{n>N} f^(n) conj(g^(n))|
    std::size_t truncation_order = 0;
};

/// <f, g> = sum_n f^(n) conj(g^(n)) over the common range, ascending and
/// compensated. The tail bound is Cauchy-Schwarz on the tail models, which
/// for h_j, h_k gives (7/6)^2 j k / N.
template <class T>
InnerProductResult<T> inner_product(const TruncatedSeries<T>& f, const TruncatedSeries<T>& g) {
    InnerProductResult<T> res;
    const std::size_t len = std::min(f.coeffs.size(), g.coeffs.size());
    Accumulator<T> acc;
    for (std::size_t n = 0; n < len; ++n) acc.add(f.coeffs[n] * conjugate(g.coeffs[n]));
    res.value = acc.value();
    res.truncation_order = len == 0 ? 0 : len - 1;
    if constexpr (is_floating_v<T>) {
        auto excess = [len](const TruncatedSeries<T>& s) {
            double e = s.tail.norm_sq;
            for (std::size_t n = len; n < s.coeffs.size(); ++n) e += static_cast<double>(abs_sq(s.coeffs[n]));
            return e;
        };
        double tf = excess(f);
        double tg = excess(g);
        res.tail_bound = (tf == 0.0 || tg == 0.0) ? 0.0 : std::sqrt(tf) * std::sqrt(tg);
    } else {
        res.tail_bound = (f.tail.norm_sq == 0.0 || g.tail.norm_sq == 0.0) ? 0.0 : kInfinity;
    }
    return res;
}

template <class T>
real_of_t<T> norm_sq(const TruncatedSeries<T>& f) {
    Accumulator<real_of_t<T>> acc;
    for (const auto& c : f.coeffs) acc.add(abs_sq(c));
    return acc.value();
}

}  // namespace hardy
