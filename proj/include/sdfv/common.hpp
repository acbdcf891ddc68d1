#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sdfv {

using Vec3 = std::array<double, 3>;
using Vec5 = std::array<double, 5>;

constexpr int kNVars = 5;

inline Vec5 operator+(const Vec5& a, const Vec5& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4]};
}
inline Vec5 operator-(const Vec5& a, const Vec5& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3], a[4] - b[4]};
}
inline Vec5 operator*(double s, const Vec5& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3], s * a[4]};
}
inline Vec5& operator+=(Vec5& a, const Vec5& b) {
    for (int i = 0; i < 5; ++i) a[i] += b[i];
    return a;
}

inline double dot3(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

/// Raised when a state fails physical validity (rho or p at/below floor).
class InvalidStateError : public std::runtime_error {
public:
    explicit InvalidStateError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when the time integration must abort (NaN, stage failure, ...).
class SolverAbort : public std::runtime_error {
public:
    explicit SolverAbort(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Gauss-Legendre nodes and weights on [0,1], exact through degree 2n-1.
struct Quadrature {
    std::vector<double> x;
    std::vector<double> w;
};

inline Quadrature gauss_legendre(int n) {
    Quadrature q;
    q.x.resize(n);
    q.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n over [-1,1] from a Chebyshev initial guess.
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (t * p0 - p1) / (t * t - 1.0);
            double dt = p0 / pp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        q.x[n - 1 - i] = 0.5 * (1.0 + t);
        q.w[n - 1 - i] = 1.0 / ((1.0 - t * t) * pp * pp);
    }
    return q;
}

/// Solve A x = b in place for a small dense system (partial pivoting).
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int imax = k;
        double amax = std::abs(a[k * n + k]);
        for (int i = k + 1; i < n; ++i) {
            if (std::abs(a[i * n + k]) > amax) {
                amax = std::abs(a[i * n + k]);
                imax = i;
            }
        }
        if (amax == 0.0) throw std::runtime_error("solve_dense: singular matrix");
        if (imax != k) {
            for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[imax * n + j]);
            std::swap(b[k], b[imax]);
        }
        for (int i = k + 1; i < n; ++i) {
            double f = a[i * n + k] / a[k * n + k];
            a[i * n + k] = 0.0;
            for (int j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
            b[i] -= f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * b[j];
        b[i] = s / a[i * n + i];
    }
    return b;
}

/// Invert a small dense matrix (row-major n x n).
inline std::vector<double> invert_dense(const std::vector<double>& a, int n) {
    std::vector<double> inv(n * n);
    for (int c = 0; c < n; ++c) {
        std::vector<double> e(n, 0.0);
        e[c] = 1.0;
        auto col = solve_dense(a, e, n);
        for (int r = 0; r < n; ++r) inv[r * n + c] = col[r];
    }
    return inv;
}

/// Static-partition parallel loop. Writes of distinct iterations must be
/// disjoint; results are bitwise independent of the worker count. The first
/// exception thrown by any worker is rethrown after the join.
inline void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (workers <= 1 || n < 2 * workers) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    int chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        int lo = w * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, w, &body, &errors] {
            try {
                for (int i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace sdfv
