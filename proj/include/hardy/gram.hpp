#pragma once

// Gram matrices of the approximating families and the target side of the
// least-squares problem (cross vectors and target norms).
//
// Families, for k = 2..K and truncation order N:
//   h            h_k
//   g            g_k = (1 - z) h_k
//   rotated-h    h_k(conj(zeta) z)
//   deflated-h   (zeta - z) h_k
//
// Entries of the structured route are assembled from prefix tables of the
// harmonic numbers in O(N / max(j, k)) per entry; the direct route sums
// coefficient products and is kept as an independent check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "scalar.hpp"
#include "series.hpp"
#include "summation.hpp"

namespace hardy {

enum class BasisFamily { h, g, rotated_h, deflated_h };

inline std::string to_string(BasisFamily f) {
    switch (f) {
        case BasisFamily::h: return "h";
        case BasisFamily::g: return "g";
        case BasisFamily::rotated_h: return "rotated-h";
        case BasisFamily::deflated_h: return "deflated-h";
    }
    return "?";
}

inline BasisFamily parse_family(const std::string& s) {
    if (s == "h") return BasisFamily::h;
    if (s == "g") return BasisFamily::g;
    if (s == "rotated-h") return BasisFamily::rotated_h;
    if (s == "deflated-h") return BasisFamily::deflated_h;
    throw std::invalid_argument("unknown basis family '" + s + "' (expected h, g, rotated-h, deflated-h)");
}

struct BasisSpec {
    BasisFamily family = BasisFamily::h;
    unsigned K = 2;           ///< basis is k = 2..K
    std::size_t N = 0;        ///< truncation order
    double zeta_turns = 0.0;  ///< rotation/deflation point, rotated-h and deflated-h only

    std::size_t dimension() const { return K - 1; }
    bool uses_zeta() const { return family == BasisFamily::rotated_h || family == BasisFamily::deflated_h; }

    static std::size_t default_N(unsigned K) {
        return std::max<std::size_t>(100000, 100 * static_cast<std::size_t>(K) * K);
    }

    void validate() const {
        if (K < 2) throw std::invalid_argument("basis needs K >= 2");
        if (N < K) throw std::invalid_argument("truncation order N must be >= K");
    }
};

inline bool operator==(const BasisSpec& a, const BasisSpec& b) {
    return a.family == b.family && a.K == b.K && a.N == b.N && (!a.uses_zeta() || a.zeta_turns == b.zeta_turns);
}

/// Prefix tables over n = 0..N used by the structured Gram route and the
/// coefficient generators.
template <class R>
struct HarmonicTables {
    std::vector<R> H;    ///< H_n
    std::vector<R> PH;   ///< sum_{m<=n} H_m
    std::vector<R> PH2;  ///< sum_{m<=n} H_m^2
    std::vector<R> PHn;  ///< sum_{1<=m<=n} H_m / m

    explicit HarmonicTables(std::size_t N) : H(harmonic_numbers<R>(N)) {
        PH.resize(N + 1);
        PH2.resize(N + 1);
        PHn.resize(N + 1);
        NeumaierSum<R> a, b, c;
        for (std::size_t n = 0; n <= N; ++n) {
            a.add(H[n]);
            b.add(H[n] * H[n]);
            if (n > 0) c.add(H[n] / R(n));
            PH[n] = a.value();
            PH2[n] = b.value();
            PHn[n] = c.value();
        }
    }
    std::size_t order() const { return H.size() - 1; }
};

template <class R>
struct GramSystem {
    using Complex = complex_of_t<R>;

    BasisSpec spec;
    std::vector<Complex> matrix;      ///< row-major, dimension() x dimension(), Hermitian
    std::vector<double> tail_matrix;  ///< entrywise bound on the discarded sum over n > N
    double assembly_error = 0.0;      ///< entrywise rounding estimate of the assembly
    bool real_valued = true;
    int precision_bits = precision_bits_v<R>;

    std::size_t dimension() const { return spec.dimension(); }
    const Complex& operator()(std::size_t i, std::size_t j) const { return matrix[i * dimension() + j]; }
    Complex& at(std::size_t i, std::size_t j) { return matrix[i * dimension() + j]; }
    double tail(std::size_t i, std::size_t j) const { return tail_matrix[i * dimension() + j]; }

    /// Leading block for the basis k = 2..K.
    GramSystem leading(unsigned K) const {
        if (K < 2 || K > spec.K) throw std::invalid_argument("leading block out of range");
        GramSystem out;
        out.spec = spec;
        out.spec.K = K;
        out.assembly_error = assembly_error;
        out.real_valued = real_valued;
        out.precision_bits = precision_bits;
        const std::size_t m = K - 1, d = dimension();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                out.matrix.push_back(matrix[i * d + j]);
                out.tail_matrix.push_back(tail_matrix[i * d + j]);
            }
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// basis elements

/// Rigorous tail model of the k-th basis element.
inline TailModel basis_tail(const BasisSpec& spec, unsigned k) {
    switch (spec.family) {
        case BasisFamily::h:
        case BasisFamily::rotated_h: return hk_tail(k, spec.N);
        case BasisFamily::g: return gk_tail(k, spec.N);
        case BasisFamily::deflated_h: {
            if (spec.zeta_turns == 0.0) return gk_tail(k, spec.N);
            // (zeta - z) h_k: the tail is zeta (h tail past N) minus (h tail past N - 1)
            TailModel a = hk_tail(k, spec.N), b = hk_tail(k, spec.N - 1);
            double s = std::sqrt(a.norm_sq) + std::sqrt(b.norm_sq);
            return {a.coeff_sup + b.coeff_sup, s * s};
        }
    }
    return TailModel::unknown();
}

template <class R>
R hk_value(unsigned k, std::size_t n, const HarmonicTables<R>& t, const R& logk) {
    return t.H[n] - t.H[n / k] - logk;
}

/// Coefficients 0..N of the k-th basis element.
template <class R>
TruncatedSeries<complex_of_t<R>> basis_series(const BasisSpec& spec, unsigned k, const HarmonicTables<R>& t) {
    using C = complex_of_t<R>;
    detail::require_k(k);
    const std::size_t N = spec.N;
    TruncatedSeries<C> s;
    s.coeffs.resize(N + 1);
    using std::log;
    const R logk = R(log(R(k)));
    switch (spec.family) {
        case BasisFamily::h:
            for (std::size_t n = 0; n <= N; ++n) s.coeffs[n] = make_complex<C>(hk_value(k, n, t, logk), R(0));
            break;
        case BasisFamily::g: {
            auto g = gk_coefficients<R>(k, N);
            for (std::size_t n = 0; n <= N; ++n) s.coeffs[n] = make_complex<C>(g.coeffs[n], R(0));
            break;
        }
        case BasisFamily::rotated_h: {
            auto pw = RotationParameter<R>::from_turns(spec.zeta_turns).conj_powers(N);
            for (std::size_t n = 0; n <= N; ++n) s.coeffs[n] = C(pw[n] * hk_value(k, n, t, logk));
            break;
        }
        case BasisFamily::deflated_h: {
            const C z = RotationParameter<R>::from_turns(spec.zeta_turns).value();
            R prev(0);
            for (std::size_t n = 0; n <= N; ++n) {
                R cur = hk_value(k, n, t, logk);
                s.coeffs[n] = C(C(z * cur) - make_complex<C>(prev, R(0)));
                prev = cur;
            }
            break;
        }
    }
    s.label = to_string(spec.family) + "_" + std::to_string(k);
    s.tail = basis_tail(spec, k);
    return s;
}

// ---------------------------------------------------------------------------
// Gram assembly

namespace detail {

/// Runs body(i) for i in [0, n) on a fixed partition of threads; each index
/// is handled by exactly one thread, so results do not depend on scheduling.
template <class F>
void parallel_rows(std::size_t n, unsigned threads, F&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned long long lcm_u(unsigned long long a, unsigned long long b) {
    unsigned long long x = a, y = b;
    while (y) {
        unsigned long long r = x % y;
        x = y;
        y = r;
    }
    return a / x * b;
}

template <class R>
double assembly_error_estimate(std::size_t N) {
    double n = static_cast<double>(N + 1);
    double l = std::log(n) + 1.0;
    return 16.0 * static_cast<double>(machine_epsilon<R>()) * n * n * l * l;
}

/// Structured h Gram over a shared table; entry (j, k) with 2 <= j, k <= K.
template <class R>
class HGramKernel {
public:
    HGramKernel(const HarmonicTables<R>& t, unsigned K) : t_(t), N_(t.order()), A_(K + 1), B_(K + 1), L_(K + 1) {
        using std::log;
        for (unsigned k = 2; k <= K; ++k) {
            L_[k] = R(log(R(k)));
            R a(0), b(0);
            for (std::size_t q = 0; q * k <= N_; ++q) {
                std::size_t lo = q * k, hi = std::min(lo + k - 1, N_);
                a += t_.H[q] * (t_.PH[hi] - ph_before(lo));
                b += t_.H[q] * R(hi - lo + 1);
            }
            A_[k] = a;
            B_[k] = b;
        }
    }

    R entry(unsigned j, unsigned k) const {
        if (j > k) std::swap(j, k);
        const R& phN = t_.PH[N_];
        return t_.PH2[N_] - A_[j] - A_[k] + cross(j, k) - L_[k] * (phN - B_[j]) - L_[j] * (phN - B_[k]) +
               R(N_ + 1) * L_[j] * L_[k];
    }

    const R& log_k(unsigned k) const { return L_[k]; }

private:
    R ph_before(std::size_t n) const { return n == 0 ? R(0) : t_.PH[n - 1]; }

    /// sum_{n=0}^{m} H_{floor(n/j)}
    R block_prefix(unsigned j, std::size_t m) const {
        std::size_t Q = m / j;
        return R(j) * ph_before(Q) + R(m - Q * j + 1) * t_.H[Q];
    }

    /// sum_n H_{floor(n/j)} H_{floor(n/k)} with j <= k
    R cross(unsigned j, unsigned k) const {
        R sum(0), prev(0);
        for (std::size_t q = 0; q * k <= N_; ++q) {
            std::size_t hi = std::min(q * k + k - 1, N_);
            R cur = block_prefix(j, hi);
            sum += t_.H[q] * (cur - prev);
            prev = cur;
        }
        return sum;
    }

    const HarmonicTables<R>& t_;
    std::size_t N_;
    std::vector<R> A_, B_, L_;
};

}  // namespace detail

/// Structured assembly (the default route).
template <class R>
GramSystem<R> build_gram(const BasisSpec& spec, const HarmonicTables<R>& tables,
                         unsigned threads = std::max(1u, std::thread::hardware_concurrency())) {
    using C = complex_of_t<R>;
    spec.validate();
    if (tables.order() != spec.N) throw std::invalid_argument("harmonic tables built for a different N");
    GramSystem<R> G;
    G.spec = spec;
    const std::size_t d = spec.dimension();
    const std::size_t N = spec.N;
    G.matrix.assign(d * d, make_complex<C>(R(0), R(0)));
    G.tail_matrix.assign(d * d, 0.0);
    G.assembly_error = detail::assembly_error_estimate<R>(N);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t l = 0; l < d; ++l) {
            G.tail_matrix[i * d + l] = std::sqrt(basis_tail(spec, unsigned(i + 2)).norm_sq) *
                                       std::sqrt(basis_tail(spec, unsigned(l + 2)).norm_sq);
        }
    }

    if (spec.family == BasisFamily::g) {
        // sum_{n<=M} 1/n^2 prefix
        std::vector<R> S2(N + 1);
        NeumaierSum<R> acc;
        S2[0] = R(0);
        for (std::size_t n = 1; n <= N; ++n) {
            acc.add(R(1) / (R(n) * R(n)));
            S2[n] = acc.value();
        }
        using std::log;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t l = i; l < d; ++l) {
                const unsigned j = unsigned(i + 2), k = unsigned(l + 2);
                const unsigned long long m = detail::lcm_u(j, k);
                R v = R(log(R(j))) * R(log(R(k))) + S2[N] - S2[N / j] / R(j) - S2[N / k] / R(k);
                if (m <= N) v += R(j) * R(k) * S2[N / m] / (R(m) * R(m));
                G.at(i, l) = G.at(l, i) = make_complex<C>(v, R(0));
            }
        }
        return G;
    }

    detail::HGramKernel<R> kern(tables, spec.K);
    std::vector<R> hg(d * d);
    detail::parallel_rows(d, threads, [&](std::size_t i) {
        for (std::size_t l = i; l < d; ++l) hg[i * d + l] = kern.entry(unsigned(i + 2), unsigned(l + 2));
    });
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t l = 0; l < i; ++l) hg[i * d + l] = hg[l * d + i];

    if (spec.family == BasisFamily::h || spec.family == BasisFamily::rotated_h) {
        // rotation is unitary on coefficients, so both families share the Gram
        for (std::size_t e = 0; e < d * d; ++e) G.matrix[e] = make_complex<C>(hg[e], R(0));
        return G;
    }

    // deflated-h: D_jk = 2 G_jk - h_j(N) h_k(N) - zeta X_jk - conj(zeta) X_kj,
    // X_jk = sum_{n=1}^{N} h_j(n) h_k(n-1) = G_jk - L_j L_k - Y_jk,
    // Y_jk = sum_{n=1}^{N} h_j(n) g_k(n) = S_j - sum_{m <= N/k} h_j(k m) / m,
    // S_j = sum_{n=1}^{N} h_j(n) / n.
    const auto& t = tables;
    std::vector<R> S(d), hN(d);
    for (std::size_t i = 0; i < d; ++i) {
        const unsigned j = unsigned(i + 2);
        R tj(0);
        for (std::size_t q = 1; q * j <= N; ++q) {
            std::size_t lo = q * j, hi = std::min(lo + j - 1, N);
            tj += t.H[q] * (t.H[hi] - t.H[lo - 1]);
        }
        S[i] = t.PHn[N] - tj - kern.log_k(j) * t.H[N];
        hN[i] = hk_value(j, N, t, kern.log_k(j));
    }
    std::vector<R> X(d * d);
    detail::parallel_rows(d, threads, [&](std::size_t i) {
        const unsigned j = unsigned(i + 2);
        for (std::size_t l = 0; l < d; ++l) {
            const unsigned k = unsigned(l + 2);
            R y(0);
            for (std::size_t m = 1; m * k <= N; ++m) y += hk_value(j, m * k, t, kern.log_k(j)) / R(m);
            X[i * d + l] = hg[i * d + l] - kern.log_k(j) * kern.log_k(k) - (S[i] - y);
        }
    });
    const C z = RotationParameter<R>::from_turns(spec.zeta_turns).value();
    G.real_valued = imag_part(z) == R(0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t l = 0; l < d; ++l) {
            C v = make_complex<C>(R(2) * hg[i * d + l] - hN[i] * hN[l], R(0));
            v = C(v - C(z * X[i * d + l]) - C(conjugate(z) * X[l * d + i]));
            G.at(i, l) = v;
        }
    }
    return G;
}

template <class R>
GramSystem<R> build_gram(const BasisSpec& spec) {
    HarmonicTables<R> tables(spec.N);
    return build_gram(spec, tables);
}

/// Direct assembly from coefficient products, O(K^2 N).
template <class R>
GramSystem<R> build_gram_direct(const BasisSpec& spec, const HarmonicTables<R>& tables) {
    using C = complex_of_t<R>;
    spec.validate();
    GramSystem<R> G;
    G.spec = spec;
    const std::size_t d = spec.dimension();
    std::vector<TruncatedSeries<C>> basis;
    for (unsigned k = 2; k <= spec.K; ++k) basis.push_back(basis_series(spec, k, tables));
    G.matrix.assign(d * d, make_complex<C>(R(0), R(0)));
    G.tail_matrix.assign(d * d, 0.0);
    G.assembly_error = detail::assembly_error_estimate<R>(spec.N);
    G.real_valued = spec.family != BasisFamily::deflated_h ||
                    RotationParameter<R>::from_turns(spec.zeta_turns).quarter_turns().value_or(1) % 2 == 0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t l = i; l < d; ++l) {
            auto ip = inner_product(basis[i], basis[l]);
            G.at(i, l) = ip.value;
            G.at(l, i) = conjugate(ip.value);
            G.tail_matrix[i * d + l] = G.tail_matrix[l * d + i] = ip.tail_bound;
        }
    }
    return G;
}

// ---------------------------------------------------------------------------
// targets

enum class TargetKind { one, monomial, subexp, member, custom };

struct TargetSpec {
    TargetKind kind = TargetKind::one;
    std::size_t m = 0;                         ///< monomial degree
    double c = 1.0;                            ///< subexp rate: coefficients exp(-c sqrt(n))
    BasisFamily member_family = BasisFamily::h;  ///< member: h_j or g_j
    unsigned j = 2;
    std::function<double(std::size_t)> rule;   ///< custom real coefficient rule
    TailModel custom_tail = TailModel::unknown();
    std::string custom_label = "custom";

    std::string label() const {
        switch (kind) {
            case TargetKind::one: return "one";
            case TargetKind::monomial: return "z^" + std::to_string(m);
            case TargetKind::subexp: return "subexp(" + to_decimal(c, 6) + ")";
            case TargetKind::member: return to_string(member_family) + std::to_string(j);
            case TargetKind::custom: return custom_label;
        }
        return "?";
    }
};

/// Parses "one", "z^m" / "monomial:m", "subexp:c", "h<j>", "g<j>".
inline TargetSpec parse_target(const std::string& s) {
    TargetSpec t;
    auto number_after = [&](std::size_t pos) { return s.substr(pos); };
    if (s == "one" || s == "1") {
        t.kind = TargetKind::one;
    } else if (s.rfind("z^", 0) == 0 || s.rfind("monomial:", 0) == 0) {
        t.kind = TargetKind::monomial;
        t.m = std::stoul(number_after(s[0] == 'z' ? 2 : 9));
    } else if (s == "z") {
        t.kind = TargetKind::monomial;
        t.m = 1;
    } else if (s.rfind("subexp:", 0) == 0) {
        t.kind = TargetKind::subexp;
        t.c = std::stod(number_after(7));
        if (!(t.c > 0)) throw std::invalid_argument("subexp rate must be positive");
    } else if (s.size() >= 2 && (s[0] == 'h' || s[0] == 'g') &&
               s.find_first_not_of("0123456789", 1) == std::string::npos) {
        t.kind = TargetKind::member;
        t.member_family = s[0] == 'h' ? BasisFamily::h : BasisFamily::g;
        t.j = static_cast<unsigned>(std::stoul(s.substr(1)));
        detail::require_k(t.j);
    } else {
        throw std::invalid_argument("unknown target '" + s + "'");
    }
    return t;
}

template <class R>
TruncatedSeries<complex_of_t<R>> target_series(const TargetSpec& target, std::size_t N,
                                               const HarmonicTables<R>& tables) {
    using C = complex_of_t<R>;
    TruncatedSeries<C> s;
    s.coeffs.assign(N + 1, make_complex<C>(R(0), R(0)));
    s.label = target.label();
    s.tail = TailModel::exact();
    using std::exp;
    using std::sqrt;
    switch (target.kind) {
        case TargetKind::one: s.coeffs[0] = make_complex<C>(R(1), R(0)); break;
        case TargetKind::monomial:
            if (target.m <= N) s.coeffs[target.m] = make_complex<C>(R(1), R(0));
            else s.tail = {1.0, 1.0};
            break;
        case TargetKind::subexp: {
            const R c(target.c);
            for (std::size_t n = 0; n <= N; ++n) s.coeffs[n] = make_complex<C>(R(exp(-c * R(sqrt(R(n))))), R(0));
            // sum_{n>N} e^{-2c sqrt n} <= integral_N^inf e^{-2c sqrt x} dx = e^{-2c sqrt N}(sqrt N / c + 1/(2c^2))
            double sn = std::sqrt(static_cast<double>(N));
            double cc = target.c;
            s.tail = {std::exp(-cc * std::sqrt(double(N + 1))), std::exp(-2 * cc * sn) * (sn / cc + 0.5 / (cc * cc))};
            break;
        }
        case TargetKind::member: {
            BasisSpec b{target.member_family, target.j, N, 0.0};
            s = basis_series(b, target.j, tables);
            s.label = target.label();
            break;
        }
        case TargetKind::custom:
            if (!target.rule) throw std::invalid_argument("custom target without a coefficient rule");
            for (std::size_t n = 0; n <= N; ++n) s.coeffs[n] = make_complex<C>(R(target.rule(n)), R(0));
            s.tail = target.custom_tail;
            break;
    }
    return s;
}

template <class R>
struct CrossVector {
    std::vector<complex_of_t<R>> values;  ///< c_k = <target, basis_k>, k = 2..K
    std::vector<double> tail_bounds;
    R target_norm_sq{0};
    double target_tail_norm_sq = 0.0;
};

/// c_k = <target, basis_k> over the truncation of the basis spec.
template <class R>
CrossVector<R> cross_vector(const TargetSpec& target, const BasisSpec& spec, const HarmonicTables<R>& tables) {
    using C = complex_of_t<R>;
    spec.validate();
    CrossVector<R> out;
    auto f = target_series<R>(target, spec.N, tables);
    out.target_norm_sq = norm_sq(f);
    out.target_tail_norm_sq = f.tail.norm_sq;
    const bool sparse = target.kind == TargetKind::one || (target.kind == TargetKind::monomial && target.m <= spec.N);
    for (unsigned k = 2; k <= spec.K; ++k) {
        TailModel bt = basis_tail(spec, k);
        out.tail_bounds.push_back(f.tail.norm_sq == 0.0 ? 0.0 : std::sqrt(f.tail.norm_sq) * std::sqrt(bt.norm_sq));
        if (sparse) {
            // one coefficient of the basis element suffices
            const std::size_t m = target.kind == TargetKind::one ? 0 : target.m;
            using std::log;
            const R logk = R(log(R(k)));
            C b;
            switch (spec.family) {
                case BasisFamily::h: b = make_complex<C>(hk_value(k, m, tables, logk), R(0)); break;
                case BasisFamily::g: {
                    R v = m == 0 ? R(-logk) : R(m % k == 0 ? 1 - long(k) : 1) / R(m);
                    b = make_complex<C>(v, R(0));
                    break;
                }
                case BasisFamily::rotated_h: {
                    auto zeta = RotationParameter<R>::from_turns(spec.zeta_turns);
                    using std::cos;
                    using std::sin;
                    R phi = -zeta.angle() * R(m);
                    C p = m == 0 ? make_complex<C>(R(1), R(0))
                                 : (zeta.quarter_turns() ? zeta.conj_powers(m)[m]
                                                         : make_complex<C>(R(cos(phi)), R(sin(phi))));
                    b = C(p * hk_value(k, m, tables, logk));
                    break;
                }
                case BasisFamily::deflated_h: {
                    C z = RotationParameter<R>::from_turns(spec.zeta_turns).value();
                    R prev = m == 0 ? R(0) : hk_value(k, m - 1, tables, logk);
                    b = C(C(z * hk_value(k, m, tables, logk)) - make_complex<C>(prev, R(0)));
                    break;
                }
            }
            out.values.push_back(conjugate(b));
        } else {
            auto bk = basis_series(spec, k, tables);
            Accumulator<C> acc;
            for (std::size_t n = 0; n <= spec.N; ++n) acc.add(C(f.coeffs[n] * conjugate(bk.coeffs[n])));
            out.values.push_back(acc.value());
        }
    }
    return out;
}

}  // namespace hardy
