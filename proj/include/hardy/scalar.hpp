#pragma once

// Scalar types used across the library: fixed-precision binary floats,
// their complex counterparts, and the exact types used for identity checks.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <boost/math/constants/constants.hpp>

namespace hardy {

namespace mp = boost::multiprecision;

template <unsigned Bits>
using Float = mp::number<mp::cpp_bin_float<Bits, mp::digit_base_2>, mp::et_off>;

template <unsigned Bits>
using ComplexFloat =
    mp::number<mp::complex_adaptor<mp::cpp_bin_float<Bits, mp::digit_base_2>>, mp::et_off>;

using Real128 = Float<128>;
using Real256 = Float<256>;
using Complex128 = ComplexFloat<128>;
using Complex256 = ComplexFloat<256>;

using Rational = mp::mpq_rational;

// ---------------------------------------------------------------------------
// traits

template <class T>
struct complex_of;

template <>
struct complex_of<double> {
    using type = std::complex<double>;
};

template <unsigned Bits>
struct complex_of<Float<Bits>> {
    using type = ComplexFloat<Bits>;
};

template <class R>
using complex_of_t = typename complex_of<R>::type;

template <class T>
struct is_complex : std::false_type {};

template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <unsigned Bits>
struct is_complex<ComplexFloat<Bits>> : std::true_type {};

template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <class T>
struct real_of {
    using type = T;
};

template <class T>
struct real_of<std::complex<T>> {
    using type = T;
};

template <unsigned Bits>
struct real_of<ComplexFloat<Bits>> {
    using type = Float<Bits>;
};

template <class T>
using real_of_t = typename real_of<T>::type;

template <class T>
inline constexpr bool is_floating_v =
    std::numeric_limits<real_of_t<T>>::is_specialized && !std::numeric_limits<real_of_t<T>>::is_exact;

/// Binary digits of the significand; the working precision recorded in outputs.
template <class T>
inline constexpr int precision_bits_v = std::numeric_limits<real_of_t<T>>::digits;

template <class R>
R machine_epsilon() {
    return std::numeric_limits<R>::epsilon();
}

template <class R>
R pi() {
    if constexpr (std::is_same_v<R, double>) {
        return 3.14159265358979323846;
    } else {
        return boost::math::constants::pi<R>();
    }
}

template <class T>
auto conjugate(const T& x) {
    if constexpr (is_complex_v<T>) {
        using std::conj;
        return T(conj(x));
    } else {
        return x;
    }
}

template <class T>
real_of_t<T> real_part(const T& x) {
    if constexpr (is_complex_v<T>) {
        using std::real;
        return real(x);
    } else {
        return x;
    }
}

template <class T>
real_of_t<T> imag_part(const T& x) {
    if constexpr (is_complex_v<T>) {
        using std::imag;
        return imag(x);
    } else {
        return real_of_t<T>(0);
    }
}

template <class T>
real_of_t<T> abs_sq(const T& x) {
    if constexpr (is_complex_v<T>) {
        auto re = real_part(x);
        auto im = imag_part(x);
        return re * re + im * im;
    } else {
        return x * x;
    }
}

template <class T>
real_of_t<T> magnitude(const T& x) {
    using std::abs;
    return real_of_t<T>(abs(x));
}

template <class C, class R>
C make_complex(const R& re, const R& im) {
    if constexpr (std::is_same_v<C, std::complex<double>>) {
        return C(static_cast<double>(re), static_cast<double>(im));
    } else {
        return C(re, im);
    }
}

template <class To, class From>
To convert(const From& x) {
    if constexpr (std::is_same_v<To, From>) {
        return x;
    } else if constexpr (is_complex_v<To>) {
        using RT = real_of_t<To>;
        return make_complex<To>(RT(real_part(x)), RT(imag_part(x)));
    } else {
        return static_cast<To>(x);
    }
}

/// Decimal string carrying every significant digit of the binary value.
template <class R>
std::string to_decimal(const R& x, int digits = std::numeric_limits<R>::max_digits10) {
    if constexpr (std::is_same_v<R, double>) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
        return buf;
    } else {
        return x.str(digits, std::ios::scientific);
    }
}

/// Digits printed for a value at the given working precision.
inline int decimal_digits_for_bits(int bits) {
    return static_cast<int>(std::floor(bits * 0.30102999566398120)) + 1;
}

// ---------------------------------------------------------------------------
// exact types

/// An element q + l*log(k) of Q + Q*log(k) for one fixed k.
struct LogLinear {
    Rational rational{0};
    Rational log_multiple{0};

    LogLinear() = default;
    LogLinear(Rational q, Rational l = Rational(0)) : rational(std::move(q)), log_multiple(std::move(l)) {}
    LogLinear(int q) : rational(q) {}

    bool is_zero() const { return rational == 0 && log_multiple == 0; }

    friend LogLinear operator+(const LogLinear& a, const LogLinear& b) {
        return {a.rational + b.rational, a.log_multiple + b.log_multiple};
    }
    friend LogLinear operator-(const LogLinear& a, const LogLinear& b) {
        return {a.rational - b.rational, a.log_multiple - b.log_multiple};
    }
    friend LogLinear operator-(const LogLinear& a) { return {-a.rational, -a.log_multiple}; }
    friend LogLinear operator*(const Rational& s, const LogLinear& a) {
        return {s * a.rational, s * a.log_multiple};
    }
    LogLinear& operator+=(const LogLinear& b) { return *this = *this + b; }
    LogLinear& operator-=(const LogLinear& b) { return *this = *this - b; }
    friend bool operator==(const LogLinear& a, const LogLinear& b) {
        return a.rational == b.rational && a.log_multiple == b.log_multiple;
    }

    template <class R>
    R evaluate(unsigned k) const {
        using std::log;
        return R(rational) + R(log_multiple) * R(log(R(k)));
    }
};

/// Tag standing for a symbolic unimodular zeta (zeta * conj(zeta) = 1).
struct SymbolicZeta {};

/// c * zeta^power with zeta symbolic and unimodular. Sums are only defined
/// between equal powers (or against zero), which is all the rotation
/// identities need; anything else throws.
template <class T>
struct ZetaMonomial {
    T coeff{};
    long power = 0;

    static bool is_zero(const T& v) {
        if constexpr (requires { v.is_zero(); }) {
            return v.is_zero();
        } else {
            return v == T(0);
        }
    }

    friend ZetaMonomial operator-(const ZetaMonomial& a, const ZetaMonomial& b) {
        if (is_zero(b.coeff)) return a;
        if (is_zero(a.coeff)) return {T(0) - b.coeff, b.power};
        if (a.power != b.power) throw std::domain_error("ZetaMonomial: mixed powers of zeta");
        return {a.coeff - b.coeff, a.power};
    }
    friend ZetaMonomial operator+(const ZetaMonomial& a, const ZetaMonomial& b) {
        if (is_zero(b.coeff)) return a;
        if (is_zero(a.coeff)) return b;
        if (a.power != b.power) throw std::domain_error("ZetaMonomial: mixed powers of zeta");
        return {a.coeff + b.coeff, a.power};
    }
    friend bool operator==(const ZetaMonomial& a, const ZetaMonomial& b) {
        if (is_zero(a.coeff) && is_zero(b.coeff)) return true;
        return a.power == b.power && a.coeff == b.coeff;
    }
};

template <class T>
ZetaMonomial<T> times_zeta(SymbolicZeta, const ZetaMonomial<T>& m) {
    return {m.coeff, m.power + 1};
}

/// Exact complex numbers over an exact field (Gaussian rationals for T = Rational).
template <class T>
struct Gaussian {
    T re{0};
    T im{0};

    friend Gaussian operator+(const Gaussian& a, const Gaussian& b) { return {a.re + b.re, a.im + b.im}; }
    friend Gaussian operator-(const Gaussian& a, const Gaussian& b) { return {a.re - b.re, a.im - b.im}; }
    friend Gaussian operator*(const Gaussian& a, const Gaussian& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Gaussian operator/(const Gaussian& a, const Gaussian& b) {
        T den = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
    }
    friend bool operator==(const Gaussian& a, const Gaussian& b) { return a.re == b.re && a.im == b.im; }
    Gaussian& operator+=(const Gaussian& b) { return *this = *this + b; }
};

/// Rational point on the unit circle from the parameter t: ((1-t^2) + 2ti)/(1+t^2).
inline Gaussian<Rational> rational_unimodular(const Rational& t) {
    Rational den = 1 + t * t;
    return {(1 - t * t) / den, 2 * t / den};
}

template <class T>
Gaussian<T> conjugate(const Gaussian<T>& z) {
    return {z.re, -z.im};
}

}  // namespace hardy
