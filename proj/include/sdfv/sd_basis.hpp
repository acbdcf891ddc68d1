#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sdfv/common.hpp"

namespace sdfv {

/// Interior solution points on [0,1]: X_s = (1 - cos((2s-1)pi/(2n)))/2.
inline std::vector<double> gauss_solution_points(int n) {
    if (n < 1) throw std::invalid_argument("gauss_solution_points: n must be >= 1");
    std::vector<double> x(n);
    for (int s = 1; s <= n; ++s) x[s - 1] = 0.5 * (1.0 - std::cos((2.0 * s - 1.0) / (2.0 * n) * M_PI));
    return x;
}

/// Shifted Legendre polynomial P_s on [0,1] via the three-term recurrence,
/// with P_{-1}=0, P_0=1. Returns value and derivative.
inline void shifted_legendre(int s, double xi, double& p, double& dp) {
    double p0 = 1.0, dp0 = 0.0;   // P_0
    double pm = 0.0, dpm = 0.0;   // P_{-1}
    for (int k = 1; k <= s; ++k) {
        double a = (2.0 * k - 1.0) / k;
        double b = (k - 1.0) / static_cast<double>(k);
        double t = 2.0 * xi - 1.0;
        double p1 = a * t * p0 - b * pm;
        double dp1 = a * (2.0 * p0 + t * dp0) - b * dpm;
        pm = p0;
        dpm = dp0;
        p0 = p1;
        dp0 = dp1;
    }
    p = p0;
    dp = dp0;
}

/// Flux points on [0,1]: the n-1 roots of the shifted Legendre polynomial
/// P_{n-1} plus the two end points.
inline std::vector<double> legendre_gauss_flux_points(int n) {
    if (n < 2) throw std::invalid_argument("legendre_gauss_flux_points: n must be >= 2");
    std::vector<double> x(n + 1);
    x[0] = 0.0;
    x[n] = 1.0;
    int m = n - 1;  // polynomial degree whose roots we need
    for (int i = 0; i < m; ++i) {
        // Chebyshev initial guess mapped to [0,1], then Newton.
        double xi = 0.5 * (1.0 - std::cos((2.0 * i + 1.0) / (2.0 * m) * M_PI));
        double p, dp;
        bool done = false;
        for (int it = 0; it < 100; ++it) {
            shifted_legendre(m, xi, p, dp);
            double d = p / dp;
            xi -= d;
            if (std::abs(d) < 1e-16) {
                done = true;
                break;
            }
        }
        shifted_legendre(m, xi, p, dp);
        if (!done && std::abs(p) > 1e-13)
            throw std::runtime_error("legendre_gauss_flux_points: root finding failed");
        x[1 + i] = xi;
    }
    for (int i = 0; i <= n - 1; ++i)
        if (!(x[i] < x[i + 1])) throw std::runtime_error("legendre_gauss_flux_points: points not increasing");
    return x;
}

/// Barycentric weights for Lagrange interpolation on the given nodes.
inline std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
    int n = static_cast<int>(nodes.size());
    std::vector<double> w(n, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i) w[i] /= (nodes[i] - nodes[j]);
    return w;
}

/// Values of all Lagrange basis polynomials of `nodes` at point x.
inline std::vector<double> lagrange_values(const std::vector<double>& nodes,
                                           const std::vector<double>& bw, double x) {
    int n = static_cast<int>(nodes.size());
    std::vector<double> l(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (x == nodes[i]) {
            l[i] = 1.0;
            return l;
        }
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        l[i] = bw[i] / (x - nodes[i]);
        s += l[i];
    }
    for (int i = 0; i < n; ++i) l[i] /= s;
    return l;
}

/// Derivatives of all Lagrange basis polynomials at point x
/// (differentiation matrix row, O(n^2) product form).
inline std::vector<double> lagrange_derivatives(const std::vector<double>& nodes, double x) {
    int n = static_cast<int>(nodes.size());
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            double prod = 1.0 / (nodes[i] - nodes[k]);
            for (int j = 0; j < n; ++j) {
                if (j == i || j == k) continue;
                prod *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
            sum += prod;
        }
        d[i] = sum;
    }
    return d;
}

/// Row-major matrix mapping nodal values on `nodes` to values at `pts`.
inline std::vector<double> interp_matrix(const std::vector<double>& nodes,
                                         const std::vector<double>& pts) {
    auto bw = barycentric_weights(nodes);
    int n = static_cast<int>(nodes.size()), m = static_cast<int>(pts.size());
    std::vector<double> a(m * n);
    for (int r = 0; r < m; ++r) {
        auto l = lagrange_values(nodes, bw, pts[r]);
        for (int c = 0; c < n; ++c) a[r * n + c] = l[c];
    }
    return a;
}

/// Row-major matrix mapping nodal values on `nodes` to derivatives at `pts`.
inline std::vector<double> deriv_matrix(const std::vector<double>& nodes,
                                        const std::vector<double>& pts) {
    int n = static_cast<int>(nodes.size()), m = static_cast<int>(pts.size());
    std::vector<double> a(m * n);
    for (int r = 0; r < m; ++r) {
        auto d = lagrange_derivatives(nodes, pts[r]);
        for (int c = 0; c < n; ++c) a[r * n + c] = d[c];
    }
    return a;
}

/// Quadrature weights of the interpolatory rule on arbitrary nodes
/// (w_i = integral of the i-th Lagrange basis over [0,1]).
inline std::vector<double> nodal_quadrature_weights(const std::vector<double>& nodes) {
    int n = static_cast<int>(nodes.size());
    auto gl = gauss_legendre(n + 2);
    auto bw = barycentric_weights(nodes);
    std::vector<double> w(n, 0.0);
    for (size_t g = 0; g < gl.x.size(); ++g) {
        auto l = lagrange_values(nodes, bw, gl.x[g]);
        for (int i = 0; i < n; ++i) w[i] += gl.w[g] * l[i];
    }
    return w;
}

constexpr int kSub = 5;  // FV subcells per direction inside an element

inline std::vector<double> subcell_centers() {
    std::vector<double> c(kSub);
    for (int i = 0; i < kSub; ++i) c[i] = (2.0 * i + 1.0) / (2.0 * kSub);
    return c;
}

inline std::vector<double> subcell_edges() {
    std::vector<double> e(kSub + 1);
    for (int i = 0; i <= kSub; ++i) e[i] = static_cast<double>(i) / kSub;
    return e;
}

/// One-dimensional operators of the spectral-difference element plus the
/// transfer operators tied to the embedded-FV subcell layout.
struct SDBasis {
    int n = 5;
    std::vector<double> sol_pts;     // n solution abscissae
    std::vector<double> flux_pts;    // n+1 flux abscissae (with end points)
    std::vector<double> sol_w;       // interpolatory quadrature weights at sol_pts
    std::vector<double> sol_to_flux; // (n+1) x n
    std::vector<double> flux_deriv;  // n x (n+1): d/dxi of flux poly at sol_pts
    std::vector<double> sol_bw;      // barycentric weights of sol_pts

    // Subcell transfer operators (5 centers per direction).
    std::vector<double> sol_to_sub;  // kSub x n: values at subcell centers
    std::vector<double> sub_to_sol;  // n x kSub: inverse transfer (n == kSub)

    std::array<std::vector<double>, 2> sol_at_face;  // basis values at 0 and 1

    explicit SDBasis(int order = 5) : n(order) {
        sol_pts = gauss_solution_points(n);
        flux_pts = legendre_gauss_flux_points(n);
        sol_w = nodal_quadrature_weights(sol_pts);
        sol_to_flux = interp_matrix(sol_pts, flux_pts);
        flux_deriv = deriv_matrix(flux_pts, sol_pts);
        sol_bw = barycentric_weights(sol_pts);
        sol_to_sub = interp_matrix(sol_pts, subcell_centers());
        if (n == kSub) sub_to_sol = invert_dense(sol_to_sub, n);
        sol_at_face[0] = sol_basis_at(0.0);
        sol_at_face[1] = sol_basis_at(1.0);
    }

    /// Lagrange basis values of the solution points at an arbitrary point.
    std::vector<double> sol_basis_at(double x) const { return lagrange_values(sol_pts, sol_bw, x); }
};

}  // namespace sdfv
