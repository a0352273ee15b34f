#pragma once

// Verification suites shared by the command line tool: structural identities
// of the series, the sign conditions on the circle, the outer log-integral
// identity and the two-method Dirichlet comparison.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "dirichlet.hpp"
#include "quadrature.hpp"
#include "series.hpp"

namespace hardy {

struct CheckResult {
    std::string suite;
    std::string check;
    unsigned k = 0;  ///< 0 when the check is not indexed by k
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
    int precision_bits = 0;  ///< precision of the arithmetic behind max_violation
};

/// Turns in [0, 1) from a fixed-seed generator; bit-identical on every platform.
inline std::vector<double> random_turns(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(static_cast<double>(rng() >> 11) * 0x1.0p-53);
    return out;
}

inline constexpr std::uint64_t kZetaSeed = 0x5eed2026;

template <class C>
double max_coeff_gap(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
    double m = 0.0;
    const std::size_t n = std::min(a.coeffs.size(), b.coeffs.size());
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, static_cast<double>(magnitude(C(a.coeffs[i] - b.coeffs[i]))));
    return m;
}

/// Closed forms against the formal logarithm, (1 - z) h_k = g_k and the
/// rotation identity (zeta - z) h_k(conj(zeta) z) = zeta g_k(conj(zeta) z).
template <class R>
std::vector<CheckResult> verify_identities(const std::vector<unsigned>& ks, std::size_t N, double tol,
                                           std::size_t zeta_count = 100) {
    using C = complex_of_t<R>;
    std::vector<CheckResult> out;
    const auto harmonic = harmonic_numbers<Rational>(N);
    const auto turns = random_turns(zeta_count, kZetaSeed);
    for (unsigned k : ks) {
        // closed form vs formal_log_series((1 + ... + z^{k-1})/k)
        TruncatedSeries<R> P;
        P.coeffs.assign(k, R(1) / R(k));
        auto L = formal_log_series(P, N);
        auto g = gk_coefficients<R>(k, N);
        out.push_back({"identities", "gk_closed_form_vs_formal_log", k, max_coeff_gap(L, g), tol, false, ""});

        // exact: (1 - z) h_k = g_k and h_k = g_k / (1 - z) in Q + Q log k
        auto hx = hk_coefficients<LogLinear, Rational>(k, N, std::span<const Rational>(harmonic));
        auto gx = gk_coefficients<LogLinear>(k, N);
        bool eq1 = mul_by_one_minus_z(hx).coeffs == gx.coeffs;
        bool eq2 = div_by_one_minus_z(gx).coeffs == hx.coeffs;
        out.push_back({"identities", "one_minus_z_times_h_equals_g_exact", k, eq1 ? 0.0 : 1.0, 0.0, false, "exact"});
        out.push_back({"identities", "h_equals_cumsum_g_exact", k, eq2 ? 0.0 : 1.0, 0.0, false, "exact"});

        // exact with symbolic zeta: both sides are c * zeta^p coefficientwise
        SymbolicZeta zs;
        auto lhs_s = mul_by_zeta_minus_z(rotate(hx, zs), zs);
        auto rg = rotate(gx, zs);
        bool eq3 = lhs_s.coeffs.size() == rg.coeffs.size();
        for (std::size_t n = 0; eq3 && n < rg.coeffs.size(); ++n) eq3 = lhs_s.coeffs[n] == times_zeta(zs, rg.coeffs[n]);
        out.push_back({"identities", "rotation_identity_exact", k, eq3 ? 0.0 : 1.0, 0.0, false, "symbolic zeta"});

        // floating point, random zeta
        auto h = hk_coefficients<R>(k, N);
        double worst = 0.0;
        for (double t : turns) {
            auto zeta = RotationParameter<R>::from_turns(t);
            const C z = zeta.value();
            auto lhs = mul_by_zeta_minus_z(rotate(h, zeta), z);
            auto rgz = rotate(g, zeta);
            for (auto& c : rgz.coeffs) c = C(z * c);
            worst = std::max(worst, max_coeff_gap(lhs, rgz));
        }
        out.push_back({"identities", "rotation_identity_float", k, worst, tol, false,
                       std::to_string(turns.size()) + " random zeta"});
    }
    for (auto& c : out) {
        c.pass = c.max_violation <= c.tolerance;
        c.precision_bits = precision_bits_v<R>;
    }
    return out;
}

/// Re g_k <= slack and Re[(w - 1) h_k(w)] >= -slack on M equispaced nodes.
template <class R>
std::vector<CheckResult> verify_boundary(const std::vector<unsigned>& ks, std::size_t M, double tol) {
    std::vector<CheckResult> out;
    auto grid = BoundaryGrid::uniform(M);
    for (unsigned k : ks) {
        auto rep = check_nonpositive_real<R>(k, grid);
        std::string nodes = std::to_string(rep.nodes_checked) + " nodes, " + std::to_string(rep.singular_nodes) + " singular";
        out.push_back({"boundary", "max_re_g", k, std::max(0.0, rep.max_re_g), tol, false, nodes});
        out.push_back({"boundary", "min_re_w_minus_1_h", k, std::max(0.0, -rep.min_re_rotated_h), tol, false, nodes});
        out.push_back({"boundary", "identity_gap", k, rep.max_identity_gap, tol, false, nodes});
    }
    for (auto& c : out) {
        c.pass = c.max_violation <= c.tolerance;
        c.precision_bits = precision_bits_v<R>;
    }
    return out;
}

template <class R>
std::vector<CheckResult> verify_outer(const std::vector<unsigned>& ks, double tol) {
    std::vector<CheckResult> out;
    for (unsigned k : ks) {
        auto d = outer_defect_adaptive<R>(k, tol * 1e-3);
        CheckResult c{"outer", "outer_log_integral_defect", k, std::abs(d.defect), tol, false,
                      "integral=" + to_decimal(d.integral, 12) + " nodes=" + std::to_string(d.nodes)};
        c.pass = d.stable && c.max_violation <= tol;
        if (!d.stable) c.detail += " refinement did not stabilize";
        c.precision_bits = precision_bits_v<R>;
        out.push_back(c);
    }
    return out;
}

/// Decomposition vs area on {z, z^2, z + z^3, h_2, h_3} at zeta = 1 (the
/// polynomials also at a generic zeta), and the divergence flag for h_2 at -1.
template <class R>
std::vector<CheckResult> verify_dirichlet(double tol, std::size_t N = std::size_t(1) << 20) {
    std::vector<CheckResult> out;
    auto poly = [](std::vector<int> c) {
        TruncatedSeries<R> s;
        for (int v : c) s.coeffs.push_back(R(v));
        return s;
    };
    struct Case {
        std::string name;
        TruncatedSeries<R> f;
        double turns;
    };
    std::vector<Case> cases{{"z", poly({0, 1}), 0.0},          {"z", poly({0, 1}), 0.3},
                            {"z^2", poly({0, 0, 1}), 0.0},     {"z^2", poly({0, 0, 1}), 0.3},
                            {"z+z^3", poly({0, 1, 0, 1}), 0.0}, {"z+z^3", poly({0, 1, 0, 1}), 0.3},
                            {"h2", hk_coefficients<R>(2, N), 0.0}, {"h3", hk_coefficients<R>(3, N), 0.0}};
    for (const auto& cs : cases) {
        auto rep = local_dirichlet(cs.f, RotationParameter<R>::from_turns(cs.turns));
        CheckResult c{"dirichlet", "two_method_agreement " + cs.name + " zeta_turns=" + to_decimal(cs.turns, 3), 0,
                      rep.agreement, tol, false,
                      "decomposition=" + to_decimal(rep.value_decomposition, 10) + " area=" + to_decimal(rep.value_area, 10)};
        c.pass = !rep.diverged && rep.agreement <= tol;
        c.precision_bits = 53;  // the area quadrature runs in double
        out.push_back(c);
    }
    auto rep = local_dirichlet(hk_coefficients<R>(2, N), RotationParameter<R>::from_turns(0.5));
    out.push_back({"dirichlet", "divergence_flag h2 zeta_turns=0.5", 0, rep.diverged ? 0.0 : 1.0, 0.0, rep.diverged,
                   "radial_converged=" + std::string(rep.radial_converged ? "true" : "false") +
                       " deflation_residual=" + to_decimal(rep.deflation_residual, 6), 53});
    return out;
}

}  // namespace hardy
