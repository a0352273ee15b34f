#pragma once

// Local Dirichlet integral D_zeta(f) computed two independent ways:
//
//   decomposition:  f = a + (z - zeta) g,  D = ||g||^2,  a = radial limit of f at zeta
//   area:           D = (1/pi) integral over the disk of |f'|^2 (1 - |z|^2) / |z - zeta|^2 dA

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "boundary.hpp"
#include "quadrature.hpp"
#include "scalar.hpp"
#include "series.hpp"

namespace hardy {

struct AreaQuadrature {
    int order = 10;               ///< Gauss-Legendre points per radial panel
    double s_min = 1e-4;          ///< smallest resolved distance 1 - r from the circle
    double refine_factor = 0.25;  ///< s_min multiplier for the refined pass
    double bandwidth = 40.0;      ///< r^n is dropped once n (1 - r) exceeds this
    double growth_tol = 1e-3;     ///< relative growth under refinement that counts as divergence
};

struct AreaEstimate {
    double value = 0.0;
    double tail_correction = 0.0;  ///< contribution of 1 - s_min < r < 1
    double last_ring = 0.0;        ///< Poisson-weighted mean of |f'|^2 on the innermost resolved circle
    std::size_t radii = 0;
    std::size_t max_angular_nodes = 0;
};

namespace detail {

class FftwBuffer {
public:
    explicit FftwBuffer(std::size_t n)
        : n_(n), data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data_) throw std::bad_alloc();
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftwBuffer() {
        fftw_destroy_plan(plan_);
        fftw_free(data_);
    }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    std::size_t size() const { return n_; }
    fftw_complex* data() { return data_; }
    void execute() { fftw_execute(plan_); }

private:
    std::size_t n_;
    fftw_complex* data_;
    fftw_plan plan_;
};

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 64;
    while (p < n) p <<= 1;
    return p;
}

/// (1/2 pi) integral of |f'(r e^{i theta})|^2 P_r(theta - phi) d theta, trapezoid in theta.
inline double ring_mean(const std::vector<std::complex<double>>& coeffs, double r, double phi,
                        const AreaQuadrature& q, std::size_t& nodes_used) {
    const double s = 1.0 - r;
    const std::size_t N = coeffs.empty() ? 0 : coeffs.size() - 1;
    const std::size_t deg = std::min<std::size_t>(N, static_cast<std::size_t>(std::ceil(q.bandwidth / s)) + 1);
    const std::size_t M = next_pow2(2 * deg + static_cast<std::size_t>(std::ceil(q.bandwidth / s)) + 64);
    nodes_used = M;
    FftwBuffer buf(M);
    auto* d = buf.data();
    std::fill(reinterpret_cast<double*>(d), reinterpret_cast<double*>(d) + 2 * M, 0.0);
    // f'(z) = sum_{n>=1} n f_n z^{n-1}; power index n-1 lands in bin n-1 (no folding since M > deg)
    double rp = 1.0;
    for (std::size_t n = 1; n <= deg; ++n) {
        std::complex<double> b = static_cast<double>(n) * coeffs[n] * rp;
        d[n - 1][0] = b.real();
        d[n - 1][1] = b.imag();
        rp *= r;
    }
    buf.execute();
    const double one_minus_r2 = s * (1.0 + r);
    double sum = 0.0, comp = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
        double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(M);
        double half = std::sin(0.5 * (theta - phi));
        double den = s * s + 4.0 * r * half * half;
        double term = (d[j][0] * d[j][0] + d[j][1] * d[j][1]) * one_minus_r2 / den;
        double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    return (sum + comp) / static_cast<double>(M);
}

}  // namespace detail

/// Area route for D_zeta(f): Gauss-Legendre panels in s = 1 - r, geometric
/// toward the circle down to s_min, FFT trapezoid in angle, and the strip
/// s < s_min filled with the innermost ring value.
inline AreaEstimate dirichlet_area(const std::vector<std::complex<double>>& coeffs, double phi,
                                   const AreaQuadrature& q) {
    AreaEstimate est;
    const auto& rule = gauss_legendre(q.order);
    std::vector<std::pair<double, double>> panels{{0.5, 1.0}};
    for (double hi = 0.5; hi > q.s_min * (1 + 1e-12);) {
        double lo = std::max(hi * 0.5, q.s_min);
        panels.emplace_back(lo, hi);
        hi = lo;
    }
    double sum = 0.0;
    for (auto [lo, hi] : panels) {
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            double s = mid + half * rule.nodes[i];
            std::size_t m = 0;
            double ring = detail::ring_mean(coeffs, 1.0 - s, phi, q, m);
            sum += half * rule.weights[i] * 2.0 * (1.0 - s) * ring;
            est.max_angular_nodes = std::max(est.max_angular_nodes, m);
            ++est.radii;
        }
    }
    std::size_t m = 0;
    est.last_ring = detail::ring_mean(coeffs, 1.0 - q.s_min, phi, q, m);
    est.tail_correction = est.last_ring * (2.0 * q.s_min - q.s_min * q.s_min);
    est.value = sum + est.tail_correction;
    return est;
}

template <class C>
struct DirichletReport {
    double zeta_turns = 0.0;
    C boundary_value{};
    double value_decomposition = 0.0;
    double value_area = 0.0;
    double agreement = 0.0;  ///< |v1 - v2| / max(v1, v2, eps)

    bool radial_converged = false;
    double radial_error = 0.0;
    double deflation_residual = 0.0;
    bool deflation_converged = false;
    double area_coarse = 0.0;
    double area_growth = 0.0;  ///< relative change of the area value under refinement
    bool diverged = false;     ///< f is not in the local Dirichlet space at zeta (numerically)
};

/// Both Dirichlet computations and their agreement. The decomposition runs in
/// the series' working precision; the area quadrature runs in double.
template <class T, class R>
DirichletReport<complex_of_t<R>> local_dirichlet(const TruncatedSeries<T>& f, const RotationParameter<R>& zeta,
                                                 const AreaQuadrature& quad = {},
                                                 const RadialSchedule& schedule = {},
                                                 double deflation_threshold = kDeflationThreshold) {
    using C = complex_of_t<R>;
    DirichletReport<C> rep;
    rep.zeta_turns = zeta.turns();

    auto lim = radial_limit(f, zeta, schedule);
    rep.boundary_value = lim.value;
    rep.radial_converged = lim.converged;
    rep.radial_error = lim.error_estimate;

    const C z = zeta.value();
    auto defl = deflate_at(rotate(f, RotationParameter<R>::from_turns(0)), lim.value, z, deflation_threshold);
    rep.deflation_residual = defl.residual;
    rep.deflation_converged = defl.converged;
    rep.value_decomposition = static_cast<double>(norm_sq(defl.quotient));

    std::vector<std::complex<double>> cd(f.coeffs.size());
    for (std::size_t n = 0; n < f.coeffs.size(); ++n) {
        cd[n] = {static_cast<double>(real_part(f.coeffs[n])), static_cast<double>(imag_part(f.coeffs[n]))};
    }
    const double phi = static_cast<double>(zeta.angle());
    AreaEstimate coarse = dirichlet_area(cd, phi, quad);
    AreaQuadrature fine_q = quad;
    fine_q.s_min = quad.s_min * quad.refine_factor;
    AreaEstimate fine = dirichlet_area(cd, phi, fine_q);
    rep.area_coarse = coarse.value;
    rep.value_area = fine.value;
    const double tiny = 1e-300;
    rep.area_growth = std::abs(fine.value - coarse.value) / std::max({std::abs(fine.value), std::abs(coarse.value), tiny});

    const double v1 = rep.value_decomposition, v2 = rep.value_area;
    rep.agreement = std::abs(v1 - v2) / std::max({v1, v2, std::numeric_limits<double>::epsilon()});
    rep.diverged = !rep.radial_converged || !rep.deflation_converged || rep.area_growth > quad.growth_tol;
    return rep;
}

}  // namespace hardy
