#pragma once

// Best approximation in a Hilbert space from a Gram system:
//
//     d^2 = ||f||^2 - c^H G^{-1} c
//
// solved by a bordered Cholesky factorization (one row per added basis
// element), with an eigen-decomposition fallback when G is too ill
// conditioned for the working precision.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gram.hpp"
#include "scalar.hpp"

namespace hardy {

struct SolverConfig {
    /// Relative eigenvalue cutoff lambda / lambda_max below which directions are
    /// dropped by the spectral solver. Negative means 2^{-precision_bits/2}.
    double spectral_cutoff = -1.0;
    bool force_spectral = false;
    double accuracy = 1e-6;  ///< distance accuracy used for the recommended precision

    double cutoff_for(int bits) const { return spectral_cutoff >= 0 ? spectral_cutoff : std::ldexp(1.0, -bits / 2); }

    std::string describe(int bits) const {
        return std::string(force_spectral ? "spectral" : "cholesky, spectral fallback") +
               " cutoff=" + to_decimal(cutoff_for(bits), 6);
    }
};

struct ConditionReport {
    double cond = 1.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int recommended_bits = 64;
    double tail_norm = 0.0;          ///< Frobenius norm of the tail matrix (bounds its spectral norm)
    bool tail_may_flip_definiteness = false;  ///< tail_norm >= lambda_min (Weyl)
};

namespace detail {

template <class R>
std::vector<double> eigenvalues_double(const GramSystem<R>& G) {
    const std::size_t d = G.dimension();
    if (G.real_valued) {
        Eigen::MatrixXd A(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) A(i, j) = static_cast<double>(real_part(G(i, j)));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
        return {es.eigenvalues().data(), es.eigenvalues().data() + d};
    }
    Eigen::MatrixXcd A(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            A(i, j) = {static_cast<double>(real_part(G(i, j))), static_cast<double>(imag_part(G(i, j)))};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + d};
}

/// Real symmetric matrix at working precision: G itself when real, otherwise
/// the embedding [[A, -B], [B, A]] of G = A + iB (each eigenvalue doubled).
template <class R>
Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic> real_form(const GramSystem<R>& G) {
    const Eigen::Index d = static_cast<Eigen::Index>(G.dimension());
    if (G.real_valued) {
        Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic> A(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) A(i, j) = real_part(G(i, j));
        return A;
    }
    Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic> A(2 * d, 2 * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            R a = real_part(G(i, j)), b = imag_part(G(i, j));
            A(i, j) = a;
            A(i + d, j + d) = a;
            A(i, j + d) = -b;
            A(i + d, j) = b;
        }
    }
    return A;
}

}  // namespace detail

template <class R>
ConditionReport condition_diagnostics(const GramSystem<R>& G, double accuracy = 1e-6) {
    ConditionReport rep;
    const std::size_t d = G.dimension();
    std::vector<double> ev = detail::eigenvalues_double(G);
    rep.lambda_min = ev.front();
    rep.lambda_max = ev.back();
    if (d > 1 && rep.lambda_min < 1e-13 * rep.lambda_max) {
        // double cannot resolve the bottom of the spectrum; redo at working precision
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic>> es(detail::real_form(G),
                                                                                            Eigen::EigenvaluesOnly);
        rep.lambda_min = static_cast<double>(es.eigenvalues()(0));
        rep.lambda_max = static_cast<double>(es.eigenvalues()(es.eigenvalues().size() - 1));
    }
    rep.cond = d == 1 ? 1.0 : (rep.lambda_min > 0 ? rep.lambda_max / rep.lambda_min : kInfinity);
    double fro = 0.0;
    for (double t : G.tail_matrix) fro += t * t;
    rep.tail_norm = std::sqrt(fro);
    rep.tail_may_flip_definiteness = rep.tail_norm >= rep.lambda_min;
    // digits lost to conditioning and assembly, plus the requested accuracy and a guard
    double n = static_cast<double>(G.spec.N + 1);
    double bits = std::log2(std::max(rep.cond, 1.0)) + std::log2(1.0 / accuracy) + std::log2(n * std::pow(std::log(n) + 1, 2)) + 16;
    if (!std::isfinite(bits)) bits = 1e9;
    rep.recommended_bits = std::max(64, static_cast<int>(std::ceil(bits / 64.0)) * 64);
    return rep;
}

/// Lower-triangular Hermitian factor G = L L^H grown one row at a time.
template <class C>
class IncrementalCholesky {
public:
    using R = real_of_t<C>;

    /// Appends row m of G (entries G(m, 0..m)). Returns false, leaving the
    /// factor unchanged, when the new pivot is not positive.
    bool append(const std::vector<C>& row) {
        const std::size_t m = rows_.size();
        std::vector<C> l(m + 1);
        for (std::size_t j = 0; j < m; ++j) {
            Accumulator<C> acc;
            for (std::size_t p = 0; p < j; ++p) acc.add(C(l[p] * conjugate(rows_[j][p])));
            l[j] = C(C(row[j] - acc.value()) / rows_[j][j]);
        }
        Accumulator<R> acc;
        for (std::size_t p = 0; p < m; ++p) acc.add(abs_sq(l[p]));
        R pivot_sq = real_part(row[m]) - acc.value();
        if (!(pivot_sq > R(0))) return false;
        using std::sqrt;
        l[m] = make_complex<C>(R(sqrt(pivot_sq)), R(0));
        rows_.push_back(std::move(l));
        return true;
    }

    std::size_t size() const { return rows_.size(); }
    const C& operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }

    /// Entry m of L^{-1} c given the earlier entries.
    C forward_step(const std::vector<C>& y, const C& c_m) const {
        const std::size_t m = y.size();
        Accumulator<C> acc;
        for (std::size_t p = 0; p < m; ++p) acc.add(C(rows_[m][p] * y[p]));
        return C(C(c_m - acc.value()) / rows_[m][m]);
    }

    /// Solves L^H x = y for the leading size() rows.
    std::vector<C> back_substitute(const std::vector<C>& y) const {
        const std::size_t n = rows_.size();
        std::vector<C> x(n);
        for (std::size_t i = n; i-- > 0;) {
            Accumulator<C> acc;
            for (std::size_t p = i + 1; p < n; ++p) acc.add(C(conjugate(rows_[p][i]) * x[p]));
            x[i] = C(C(y[i] - acc.value()) / rows_[i][i]);
        }
        return x;
    }

private:
    std::vector<std::vector<C>> rows_;
};

template <class R>
struct DistanceEntry {
    unsigned K = 2;
    R d2{0};
    R d{0};
    R d2_low{0}, d2_high{0};  ///< interval from rounding and (spectral) dropped directions
    R d_low{0}, d_high{0};
    double cond = 1.0;
    double lambda_min = 0.0;
    double truncation_sensitivity = 0.0;  ///< first-order effect of the Gram/cross tail bounds on d^2
    std::string method = "cholesky";
    std::size_t dropped = 0;
    bool clamped = false;  ///< a small negative d^2 was clamped to 0
    std::vector<complex_of_t<R>> solution;  ///< coefficients of the best approximation in the basis
};

template <class R>
struct DistanceProfile {
    TargetSpec target;
    BasisSpec basis;
    std::vector<DistanceEntry<R>> entries;
    std::string solver_config;
    std::optional<unsigned> frontier;  ///< first K at which precision was exhausted
    std::string frontier_reason;
};

namespace detail {

template <class R>
void finish_interval(DistanceEntry<R>& e, const R& err_low, const R& err_high) {
    using std::sqrt;
    if (e.d2 < R(0)) {
        e.clamped = true;
        e.d2 = R(0);
    }
    e.d = R(sqrt(e.d2));
    e.d2_low = std::max(R(0), R(e.d2 - err_low));
    e.d2_high = e.d2 + err_high;
    e.d_low = R(sqrt(e.d2_low));
    e.d_high = R(sqrt(e.d2_high));
}

template <class R>
double sum_abs(const std::vector<complex_of_t<R>>& x) {
    double s = 0.0;
    for (const auto& v : x) s += static_cast<double>(magnitude(v));
    return s;
}

/// Rounding radius for d^2 from the solution x = G^{-1} c:
/// |delta d^2| <= 2 |x|_1 |delta c| + |x|_1^2 |delta G| + K eps ||f||^2.
template <class R>
R rounding_radius(const GramSystem<R>& G, double x1, const R& target_norm_sq, std::size_t m) {
    const double eps = static_cast<double>(machine_epsilon<R>());
    double gmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) gmax = std::max(gmax, static_cast<double>(real_part(G(i, i))));
    const double kf = static_cast<double>(m + 2);
    double dG = G.assembly_error + 4.0 * kf * eps * gmax;
    double dc = G.assembly_error + kf * eps * std::sqrt(gmax * static_cast<double>(target_norm_sq));
    double fn = static_cast<double>(target_norm_sq);
    return R(2.0 * x1 * dc + x1 * x1 * dG + 4.0 * kf * eps * fn);
}

template <class R>
double tail_sensitivity(const GramSystem<R>& G, const std::vector<complex_of_t<R>>& x,
                        const std::vector<double>& cross_tail, std::size_t m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double xi = static_cast<double>(magnitude(x[i]));
        s += 2.0 * xi * cross_tail[i];
        for (std::size_t j = 0; j < m; ++j) s += xi * G.tail(i, j) * static_cast<double>(magnitude(x[j]));
    }
    return s;
}

}  // namespace detail

/// Spectral solve of the leading m x m block with relative cutoff.
template <class R>
DistanceEntry<R> solve_spectral(const GramSystem<R>& G, const CrossVector<R>& c, std::size_t m, double cutoff) {
    using C = complex_of_t<R>;
    GramSystem<R> B = G.leading(unsigned(m + 1));
    auto A = detail::real_form(B);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic>> es(A);
    const auto& lam = es.eigenvalues();
    const auto& U = es.eigenvectors();
    const Eigen::Index n = A.rows();
    Eigen::Matrix<R, Eigen::Dynamic, 1> cv(n);
    // right-hand side conj(c): the normal equations read G^T x = c
    for (std::size_t i = 0; i < m; ++i) {
        cv(Eigen::Index(i)) = real_part(c.values[i]);
        if (!B.real_valued) cv(Eigen::Index(i + m)) = -imag_part(c.values[i]);
    }
    const R lmax = lam(n - 1);
    const R thresh = lmax * R(cutoff);
    DistanceEntry<R> e;
    e.K = unsigned(m + 1);
    e.method = "spectral";
    R kept(0), dropped_sum(0);
    bool dropped_nonpositive = false;
    Eigen::Matrix<R, Eigen::Dynamic, 1> xr = Eigen::Matrix<R, Eigen::Dynamic, 1>::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        R p = U.col(i).dot(cv);
        if (lam(i) > thresh) {
            kept += p * p / lam(i);
            xr += U.col(i) * R(p / lam(i));
        } else {
            ++e.dropped;
            if (lam(i) > R(0)) dropped_sum += p * p / lam(i);
            else dropped_nonpositive = dropped_nonpositive || p != R(0);
        }
    }
    if (!B.real_valued) e.dropped /= 2;
    e.d2 = c.target_norm_sq - kept;
    e.cond = lam(0) > R(0) ? static_cast<double>(lmax / lam(0)) : kInfinity;
    e.lambda_min = static_cast<double>(lam(0));
    std::vector<C> x(m);
    for (std::size_t i = 0; i < m; ++i)
        x[i] = make_complex<C>(xr(Eigen::Index(i)), B.real_valued ? R(0) : R(-xr(Eigen::Index(i + m))));
    R rad = detail::rounding_radius(B, detail::sum_abs<R>(x), c.target_norm_sq, m);
    // dropped directions can only lower the distance
    R low = dropped_nonpositive ? R(e.d2 + rad) : R(dropped_sum + rad);
    detail::finish_interval(e, low, rad);
    e.truncation_sensitivity = detail::tail_sensitivity(B, x, c.tail_bounds, m);
    e.solution = std::move(x);
    return e;
}

/// Nested distances d_K for the requested K (increasing, within the Gram's range).
template <class R>
DistanceProfile<R> distance_profile(const GramSystem<R>& G, const CrossVector<R>& c, const TargetSpec& target,
                                    std::vector<unsigned> K_values, const SolverConfig& cfg = {}) {
    using C = complex_of_t<R>;
    std::sort(K_values.begin(), K_values.end());
    K_values.erase(std::unique(K_values.begin(), K_values.end()), K_values.end());
    DistanceProfile<R> prof;
    prof.target = target;
    prof.basis = G.spec;
    prof.solver_config = cfg.describe(G.precision_bits);
    if (K_values.empty()) return prof;
    if (K_values.front() < 2 || K_values.back() > G.spec.K) throw std::invalid_argument("K values outside the Gram range");
    const double cutoff = cfg.cutoff_for(G.precision_bits);

    IncrementalCholesky<C> chol;
    std::vector<C> y;
    R d2 = c.target_norm_sq;
    bool spectral_mode = cfg.force_spectral;
    std::size_t next = 0;
    for (unsigned K = 2; K <= K_values.back(); ++K) {
        const std::size_t m = K - 1;
        if (!spectral_mode) {
            std::vector<C> row(m);
            for (std::size_t j = 0; j < m; ++j) row[j] = G(m - 1, j);
            if (!chol.append(row)) {
                spectral_mode = true;
            } else {
                // with G(i, j) = <b_i, b_j> and c_k = <f, b_k> the minimizer solves G conj(x) = conj(c)
                C ym = chol.forward_step(y, conjugate(c.values[m - 1]));
                y.push_back(ym);
                d2 -= abs_sq(ym);
            }
        }
        if (K != K_values[next]) continue;
        ++next;
        GramSystem<R> B = G.leading(K);
        ConditionReport cr = condition_diagnostics(B, cfg.accuracy);
        if (!spectral_mode && cr.lambda_min > 0 && 1.0 / cr.cond < cutoff) spectral_mode = true;
        DistanceEntry<R> e;
        if (spectral_mode) {
            if (!(cr.lambda_min > 0)) {
                prof.frontier = K;
                prof.frontier_reason = "Gram block not positive definite at " + std::to_string(G.precision_bits) +
                                       " bits (lambda_min = " + to_decimal(cr.lambda_min, 6) + ")";
                break;
            }
            e = solve_spectral(G, c, m, cutoff);
        } else {
            e.K = K;
            e.d2 = d2;
            std::vector<C> x = chol.back_substitute(y);
            for (auto& v : x) v = conjugate(v);
            R rad = detail::rounding_radius(B, detail::sum_abs<R>(x), c.target_norm_sq, m);
            detail::finish_interval(e, rad, rad);
            e.truncation_sensitivity = detail::tail_sensitivity(B, x, c.tail_bounds, m);
            e.solution = std::move(x);
        }
        e.cond = cr.cond;
        e.lambda_min = cr.lambda_min;
        prof.entries.push_back(e);
    }
    return prof;
}

/// Single solve on the full Gram.
template <class R>
DistanceEntry<R> solve_distance(const GramSystem<R>& G, const CrossVector<R>& c, const SolverConfig& cfg = {}) {
    auto prof = distance_profile(G, c, TargetSpec{}, {G.spec.K}, cfg);
    if (prof.frontier) throw std::domain_error("precision exhausted: " + prof.frontier_reason);
    return prof.entries.back();
}

}  // namespace hardy
