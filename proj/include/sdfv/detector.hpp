#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdfv/common.hpp"
#include "sdfv/mesh.hpp"
#include "sdfv/sd_basis.hpp"

namespace sdfv {

struct DetectorConfig {
    double epsilon_s = 0.01;
    bool on_density = true;
    bool on_pressure = true;
    double hysteresis_factor = 0.5;  // FV reverts when sensor < factor * epsilon_s ...
    int hysteresis_steps = 10;       // ... for this many consecutive checks

    int n_fields() const { return (on_density ? 1 : 0) + (on_pressure ? 1 : 0); }
};

/// Normalized second difference of element means; 0 on linear data,
/// guarded against vanishing denominators.
inline double jameson_sensor(double phi_m1, double phi_0, double phi_p1) {
    double den = phi_p1 + 2.0 * phi_0 + phi_m1;
    if (std::abs(den) < 1e-12 * std::max(1.0, std::abs(phi_0))) return 0.0;
    return std::abs((phi_p1 - 2.0 * phi_0 + phi_m1) / den);
}

struct MarkResult {
    std::vector<std::uint8_t> flagged;   // after one-layer dilation
    std::vector<double> max_sensor;      // pre-dilation, max over fields/directions
};

/// Flag elements whose sensor exceeds epsilon_s on any monitored field in any
/// mesh direction, then dilate by one element layer. `mean` returns the
/// monitored field mean of an element; `ghost_mean` supplies the boundary
/// ghost value when the direction-neighbor is outside the domain.
inline MarkResult mark_elements(const MeshTopology& topo, int n_fields,
                                const std::function<double(int, int)>& mean,
                                const std::function<double(int, int, int, int)>& ghost_mean,
                                double epsilon_s) {
    int ne = topo.n_elements();
    MarkResult res;
    res.flagged.assign(ne, 0);
    res.max_sensor.assign(ne, 0.0);
    std::vector<std::uint8_t> raw(ne, 0);

    for (int i = 0; i < topo.nx; ++i)
        for (int j = 0; j < topo.ny; ++j)
            for (int k = 0; k < topo.nz; ++k) {
                int e = topo.index(i, j, k);
                double smax = 0.0;
                for (int d = 0; d < 3; ++d) {
                    if (topo.count(d) == 1 && !topo.periodic[d]) continue;
                    int c[3] = {i, j, k};
                    for (int f = 0; f < n_fields; ++f) {
                        auto side_mean = [&](int side) {
                            int cc[3] = {c[0], c[1], c[2]};
                            cc[d] += side;
                            int count = topo.count(d);
                            if (cc[d] < 0 || cc[d] >= count) {
                                if (topo.periodic[d])
                                    cc[d] = (cc[d] + count) % count;
                                else
                                    return ghost_mean(e, d, side, f);
                            }
                            return mean(topo.index(cc[0], cc[1], cc[2]), f);
                        };
                        double s = jameson_sensor(side_mean(-1), mean(e, f), side_mean(+1));
                        smax = std::max(smax, s);
                    }
                }
                res.max_sensor[e] = smax;
                raw[e] = smax > epsilon_s ? 1 : 0;
            }

    // Dilate by one layer in each direction.
    for (int i = 0; i < topo.nx; ++i)
        for (int j = 0; j < topo.ny; ++j)
            for (int k = 0; k < topo.nz; ++k) {
                int e = topo.index(i, j, k);
                if (raw[e]) {
                    res.flagged[e] = 1;
                    continue;
                }
                for (int d = 0; d < 3 && !res.flagged[e]; ++d) {
                    for (int side = -1; side <= 1; side += 2) {
                        int c[3] = {i, j, k};
                        c[d] += side;
                        int count = topo.count(d);
                        if (c[d] < 0 || c[d] >= count) {
                            if (!topo.periodic[d]) continue;
                            c[d] = (c[d] + count) % count;
                        }
                        if (raw[topo.index(c[0], c[1], c[2])]) {
                            res.flagged[e] = 1;
                            break;
                        }
                    }
                }
            }
    return res;
}

/// Apply a 1D operator (r x c) along all three axes of c^3 nodal Vec5 data.
inline void tensor3_apply(const std::vector<double>& m, int r, int c, const double* in,
                          double* out) {
    std::vector<double> t1(r * c * c * 5), t2(r * r * c * 5);
    for (int a = 0; a < r; ++a)
        for (int j = 0; j < c; ++j)
            for (int k = 0; k < c; ++k)
                for (int v = 0; v < 5; ++v) {
                    double acc = 0.0;
                    for (int i = 0; i < c; ++i) acc += m[a * c + i] * in[((i * c + j) * c + k) * 5 + v];
                    t1[((a * c + j) * c + k) * 5 + v] = acc;
                }
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int k = 0; k < c; ++k)
                for (int v = 0; v < 5; ++v) {
                    double acc = 0.0;
                    for (int j = 0; j < c; ++j) acc += m[b * c + j] * t1[((a * c + j) * c + k) * 5 + v];
                    t2[((a * r + b) * c + k) * 5 + v] = acc;
                }
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int cc = 0; cc < r; ++cc)
                for (int v = 0; v < 5; ++v) {
                    double acc = 0.0;
                    for (int k = 0; k < c; ++k) acc += m[cc * c + k] * t2[((a * r + b) * c + k) * 5 + v];
                    out[((a * r + b) * r + cc) * 5 + v] = acc;
                }
}

/// SD -> FV solution transfer: evaluate the solution polynomial at the 125
/// subcell centers and reapply the cached subcell Jacobian factors.
inline void embed_fv(const double* qt_sd, const ElementMetrics& met, const SDBasis& basis,
                     double* qt_fv) {
    const int n = basis.n;
    std::vector<double> q(n * n * n * 5);
    for (int p = 0; p < n * n * n; ++p)
        for (int v = 0; v < 5; ++v) q[p * 5 + v] = qt_sd[p * 5 + v] * met.sol_inv_jac[p];
    std::vector<double> qs(kSub * kSub * kSub * 5);
    tensor3_apply(basis.sol_to_sub, kSub, n, q.data(), qs.data());
    for (int p = 0; p < kSub * kSub * kSub; ++p)
        for (int v = 0; v < 5; ++v) qt_fv[p * 5 + v] = qs[p * 5 + v] * met.sub_jc[p];
}

/// FV -> SD solution transfer: fit the degree-(n-1) tensor polynomial
/// through the subcell values and sample it at the solution points.
inline void retract_to_sd(const double* qt_fv, const ElementMetrics& met, const SDBasis& basis,
                          double* qt_sd) {
    const int n = basis.n;
    std::vector<double> q(kSub * kSub * kSub * 5);
    for (int p = 0; p < kSub * kSub * kSub; ++p)
        for (int v = 0; v < 5; ++v) q[p * 5 + v] = qt_fv[p * 5 + v] * met.sub_inv_jc[p];
    std::vector<double> qs(n * n * n * 5);
    tensor3_apply(basis.sub_to_sol, n, kSub, q.data(), qs.data());
    for (int p = 0; p < n * n * n; ++p)
        for (int v = 0; v < 5; ++v) qt_sd[p * 5 + v] = qs[p * 5 + v] * met.sol_jac[p];
}

}  // namespace sdfv
