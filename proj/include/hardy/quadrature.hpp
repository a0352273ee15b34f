#pragma once

// Gauss-Legendre panels and graded quadrature grids on the unit circle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace hardy {

struct QuadratureRule {
    std::vector<double> nodes;    ///< on [-1, 1]
    std::vector<double> weights;  ///< summing to 2
};

namespace detail {

template <unsigned Points>
QuadratureRule expand_gauss() {
    using G = boost::math::quadrature::gauss<double, Points>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    QuadratureRule r;
    // Boost stores the nonnegative half; the zero node appears once for odd orders.
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(-x[i]);
        r.weights.push_back(w[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.nodes.push_back(x[i]);
        r.weights.push_back(w[i]);
    }
    return r;
}

}  // namespace detail

/// Gauss-Legendre rule of one of the orders Boost tabulates.
inline const QuadratureRule& gauss_legendre(int order) {
    static const QuadratureRule r7 = detail::expand_gauss<7>();
    static const QuadratureRule r10 = detail::expand_gauss<10>();
    static const QuadratureRule r15 = detail::expand_gauss<15>();
    static const QuadratureRule r20 = detail::expand_gauss<20>();
    static const QuadratureRule r30 = detail::expand_gauss<30>();
    switch (order) {
        case 7: return r7;
        case 10: return r10;
        case 15: return r15;
        case 20: return r20;
        case 30: return r30;
        default: throw std::invalid_argument("unsupported Gauss-Legendre order " + std::to_string(order));
    }
}

/// Appends the mapped rule on [a, b] (weights scaled to the interval length).
inline void append_panel(const QuadratureRule& rule, double a, double b, std::vector<double>& nodes,
                         std::vector<double>& weights) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        nodes.push_back(mid + half * rule.nodes[i]);
        weights.push_back(half * rule.weights[i]);
    }
}

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Distance on the circle between two angles.
inline double circular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

/// Quadrature nodes on the unit circle for the normalized measure m.
///
/// Invariants: weights >= 0, sum(weights) = 1, and no node lies strictly
/// inside exclusion_radius of a declared singular angle.
struct BoundaryGrid {
    std::vector<double> nodes;  ///< angles in [0, 2 pi)
    std::vector<double> weights;
    double exclusion_radius = 0.0;
    std::vector<double> singular_angles;

    std::size_t size() const { return nodes.size(); }

    /// M equispaced nodes 2 pi i / M; nodes near singular angles are dropped
    /// and the remaining weights renormalized.
    static BoundaryGrid uniform(std::size_t M, std::vector<double> singular = {}, double exclusion = 0.0) {
        if (M == 0) throw std::invalid_argument("uniform grid needs at least one node");
        BoundaryGrid g;
        g.exclusion_radius = exclusion;
        g.singular_angles = std::move(singular);
        for (std::size_t i = 0; i < M; ++i) {
            double th = kTwoPi * static_cast<double>(i) / static_cast<double>(M);
            if (g.too_close(th)) continue;
            g.nodes.push_back(th);
        }
        if (g.nodes.empty()) throw std::invalid_argument("exclusion removed every node");
        g.weights.assign(g.nodes.size(), 1.0 / static_cast<double>(g.nodes.size()));
        return g;
    }

    struct GradedOptions {
        int order = 20;                  ///< Gauss-Legendre points per panel
        double exclusion_radius = 1e-12;
        double ratio = 0.5;              ///< geometric grading factor toward singular angles
        int smooth_panels = 4;           ///< panels on the middle half of each arc
        int subdivide = 1;               ///< every panel is split into this many
    };

    /// Composite Gauss-Legendre on the arcs between singular angles, with a
    /// geometric mesh toward each singular endpoint down to the exclusion
    /// radius. The excluded hole of width r next to a singular angle is
    /// carried by one extra node at distance 1.5 r (constant extrapolation of the
    /// integrand), so the weights still sum to one.
    static BoundaryGrid graded(std::vector<double> singular, const GradedOptions& opt) {
        BoundaryGrid g;
        g.exclusion_radius = opt.exclusion_radius;
        for (double& s : singular) s = std::fmod(std::fmod(s, kTwoPi) + kTwoPi, kTwoPi);
        std::sort(singular.begin(), singular.end());
        g.singular_angles = singular;
        const auto& rule = gauss_legendre(opt.order);
        const int sub = std::max(1, opt.subdivide);
        std::vector<double> nodes, weights;
        auto panel = [&](double a, double b) {
            for (int s = 0; s < sub; ++s) {
                double lo = a + (b - a) * s / sub;
                double hi = a + (b - a) * (s + 1) / sub;
                append_panel(rule, lo, hi, nodes, weights);
            }
        };
        if (singular.empty()) {
            for (int p = 0; p < 4 * opt.smooth_panels; ++p) {
                panel(kTwoPi * p / (4 * opt.smooth_panels), kTwoPi * (p + 1) / (4 * opt.smooth_panels));
            }
        } else {
            const double eps = opt.exclusion_radius;
            for (std::size_t i = 0; i < singular.size(); ++i) {
                double a = singular[i];
                double b = (i + 1 < singular.size()) ? singular[i + 1] : singular[0] + kTwoPi;
                double len = b - a;
                double zone = 0.25 * len;
                if (zone <= eps) throw std::invalid_argument("singular angles closer than the exclusion radius");
                for (int p = 0; p < opt.smooth_panels; ++p) {
                    panel(a + zone + 2 * zone * p / opt.smooth_panels, a + zone + 2 * zone * (p + 1) / opt.smooth_panels);
                }
                // graded layers [eps, zone] measured from each endpoint
                std::vector<double> cuts{zone};
                while (cuts.back() * opt.ratio > eps) cuts.push_back(cuts.back() * opt.ratio);
                cuts.push_back(eps);
                for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                    panel(a + cuts[c + 1], a + cuts[c]);
                    panel(b - cuts[c], b - cuts[c + 1]);
                }
                nodes.push_back(a + 1.5 * eps);
                weights.push_back(eps);
                nodes.push_back(b - 1.5 * eps);
                weights.push_back(eps);
            }
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            g.nodes.push_back(std::fmod(nodes[i] + kTwoPi, kTwoPi));
            g.weights.push_back(weights[i] / kTwoPi);
        }
        return g;
    }

    bool too_close(double theta) const {
        for (double s : singular_angles) {
            if (circular_distance(theta, s) < exclusion_radius) return true;
        }
        return false;
    }

    /// Checks the documented invariants; returns an empty string when they hold.
    std::string violation() const {
        if (nodes.size() != weights.size()) return "node/weight size mismatch";
        double total = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (weights[i] < 0.0) return "negative weight";
            if (too_close(nodes[i])) return "node inside exclusion radius";
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-12) return "weights do not sum to 1";
        return {};
    }
};

/// Singular angles 2 pi j / k, j = 1..k-1 (zeros of 1 + z + ... + z^{k-1}).
inline std::vector<double> root_of_unity_angles(unsigned k) {
    std::vector<double> out;
    for (unsigned j = 1; j < k; ++j) out.push_back(kTwoPi * j / k);
    return out;
}

}  // namespace hardy
