#pragma once

#include <cmath>
#include <string>

#include "sdfv/common.hpp"

namespace sdfv {

// Conservative variable ordering within a Vec5.
enum ConsIndex { kRho = 0, kMomX = 1, kMomY = 2, kMomZ = 3, kEner = 4 };

struct GasModel {
    double gamma = 1.4;   // ratio of specific heats, > 1
    double R = 287.0;     // specific gas constant [J/(kg K)]
};

struct PrimitiveState {
    double rho = 0.0;
    double u = 0.0, v = 0.0, w = 0.0;
    double p = 0.0;
};

// States with rho or p at/below this floor are rejected, not clipped.
constexpr double kStateFloor = 1e-12;

inline Vec5 prim_to_cons(const PrimitiveState& s, const GasModel& gas) {
    if (!(s.rho > kStateFloor))
        throw InvalidStateError("prim_to_cons: nonpositive density " + std::to_string(s.rho));
    if (!(s.p > kStateFloor))
        throw InvalidStateError("prim_to_cons: nonpositive pressure " + std::to_string(s.p));
    double ke = 0.5 * s.rho * (s.u * s.u + s.v * s.v + s.w * s.w);
    return {s.rho, s.rho * s.u, s.rho * s.v, s.rho * s.w, s.p / (gas.gamma - 1.0) + ke};
}

inline PrimitiveState cons_to_prim(const Vec5& q, const GasModel& gas) {
    if (!(q[kRho] > kStateFloor))
        throw InvalidStateError("cons_to_prim: nonpositive density " + std::to_string(q[kRho]));
    PrimitiveState s;
    s.rho = q[kRho];
    double ir = 1.0 / q[kRho];
    s.u = q[kMomX] * ir;
    s.v = q[kMomY] * ir;
    s.w = q[kMomZ] * ir;
    s.p = (gas.gamma - 1.0) * (q[kEner] - 0.5 * (q[kMomX] * s.u + q[kMomY] * s.v + q[kMomZ] * s.w));
    if (!(s.p > kStateFloor))
        throw InvalidStateError("cons_to_prim: nonpositive pressure " + std::to_string(s.p));
    return s;
}

inline bool state_valid(const Vec5& q, const GasModel& gas) {
    if (!(q[kRho] > kStateFloor) || !std::isfinite(q[kRho])) return false;
    double ir = 1.0 / q[kRho];
    double p = (gas.gamma - 1.0) *
               (q[kEner] - 0.5 * ir * (q[kMomX] * q[kMomX] + q[kMomY] * q[kMomY] + q[kMomZ] * q[kMomZ]));
    return p > kStateFloor && std::isfinite(p) && std::isfinite(q[kEner]);
}

inline double sound_speed(const PrimitiveState& s, const GasModel& gas) {
    return std::sqrt(gas.gamma * s.p / s.rho);
}

inline double temperature(const PrimitiveState& s, const GasModel& gas) {
    return s.p / (s.rho * gas.R);
}

/// Inviscid flux vector along one coordinate axis (0=x, 1=y, 2=z).
inline Vec5 physical_flux(const Vec5& q, int axis, const GasModel& gas) {
    PrimitiveState s = cons_to_prim(q, gas);
    double un = (axis == 0) ? s.u : (axis == 1) ? s.v : s.w;
    Vec5 f = {q[kRho] * un, q[kMomX] * un, q[kMomY] * un, q[kMomZ] * un, (q[kEner] + s.p) * un};
    f[1 + axis] += s.p;
    return f;
}

/// Flux projected on an arbitrary direction n (not necessarily unit).
inline Vec5 flux_normal(const Vec5& q, const Vec3& n, const GasModel& gas) {
    PrimitiveState s = cons_to_prim(q, gas);
    double un = s.u * n[0] + s.v * n[1] + s.w * n[2];
    return {q[kRho] * un,
            q[kMomX] * un + s.p * n[0],
            q[kMomY] * un + s.p * n[1],
            q[kMomZ] * un + s.p * n[2],
            (q[kEner] + s.p) * un};
}

/// Same as flux_normal but avoids the validity throw (for precomputed prims).
inline Vec5 flux_normal_prim(const Vec5& q, const PrimitiveState& s, const Vec3& n) {
    double un = s.u * n[0] + s.v * n[1] + s.w * n[2];
    return {q[kRho] * un,
            q[kMomX] * un + s.p * n[0],
            q[kMomY] * un + s.p * n[1],
            q[kMomZ] * un + s.p * n[2],
            (q[kEner] + s.p) * un};
}

/// Density-square-root weighted interface state; the flux Jacobian at this
/// state linearizes the jump between qL and qR exactly.
struct RoeAverage {
    double rho = 0.0;
    double u = 0.0, v = 0.0, w = 0.0;
    double H = 0.0;  // total enthalpy
};

inline RoeAverage roe_average(const Vec5& qL, const Vec5& qR, const GasModel& gas) {
    PrimitiveState l = cons_to_prim(qL, gas);
    PrimitiveState r = cons_to_prim(qR, gas);
    double sl = std::sqrt(l.rho), sr = std::sqrt(r.rho);
    double inv = 1.0 / (sl + sr);
    RoeAverage a;
    a.rho = sl * sr;
    a.u = (sl * l.u + sr * r.u) * inv;
    a.v = (sl * l.v + sr * r.v) * inv;
    a.w = (sl * l.w + sr * r.w) * inv;
    double HL = (qL[kEner] + l.p) / l.rho;
    double HR = (qR[kEner] + r.p) / r.rho;
    a.H = (sl * HL + sr * HR) * inv;
    return a;
}

/// Left/right eigenvectors and wave speeds of the flux Jacobian in a given
/// direction. Rows of `left` and columns of `right` are biorthonormal:
/// left * right = identity.
struct Eigensystem {
    double left[5][5];
    double right[5][5];
    double speeds[5];

    Vec5 to_characteristic(const Vec5& q) const {
        Vec5 c;
        for (int m = 0; m < 5; ++m)
            c[m] = left[m][0] * q[0] + left[m][1] * q[1] + left[m][2] * q[2] + left[m][3] * q[3] +
                   left[m][4] * q[4];
        return c;
    }
    Vec5 from_characteristic(const Vec5& c) const {
        Vec5 q = {0, 0, 0, 0, 0};
        for (int m = 0; m < 5; ++m)
            for (int r = 0; r < 5; ++r) q[r] += c[m] * right[r][m];
        return q;
    }
};

/// Eigensystem at a Roe-averaged state for direction `dir` (normalized
/// internally). Waves ordered (un-c, un, un, un, un+c) with the two shear
/// waves carried by tangent vectors completing an orthonormal triad.
inline Eigensystem eigensystem_at(const RoeAverage& avg, const Vec3& dir, const GasModel& gas) {
    double len = norm3(dir);
    if (!(len > 1e-14)) throw InvalidStateError("eigensystem_at: degenerate direction vector");
    Vec3 n = {dir[0] / len, dir[1] / len, dir[2] / len};

    // Orthonormal tangents: start from the axis least aligned with n.
    int kmin = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(n[k]) < std::abs(n[kmin])) kmin = k;
    Vec3 e = {0, 0, 0};
    e[kmin] = 1.0;
    Vec3 t1 = cross3(n, e);
    double it1 = 1.0 / norm3(t1);
    t1 = {t1[0] * it1, t1[1] * it1, t1[2] * it1};
    Vec3 t2 = cross3(n, t1);

    double g1 = gas.gamma - 1.0;
    double V2 = avg.u * avg.u + avg.v * avg.v + avg.w * avg.w;
    double c2 = g1 * (avg.H - 0.5 * V2);
    if (!(c2 > 0.0)) throw InvalidStateError("eigensystem_at: nonpositive sound speed squared");
    double c = std::sqrt(c2);
    double un = avg.u * n[0] + avg.v * n[1] + avg.w * n[2];
    double ut1 = avg.u * t1[0] + avg.v * t1[1] + avg.w * t1[2];
    double ut2 = avg.u * t2[0] + avg.v * t2[1] + avg.w * t2[2];

    Eigensystem es;
    es.speeds[0] = un - c;
    es.speeds[1] = es.speeds[2] = es.speeds[3] = un;
    es.speeds[4] = un + c;

    const double vel[3] = {avg.u, avg.v, avg.w};

    // Right eigenvectors (columns).
    for (int r = 0; r < 5; ++r)
        for (int m = 0; m < 5; ++m) es.right[r][m] = 0.0;
    es.right[0][0] = 1.0;
    for (int k = 0; k < 3; ++k) es.right[1 + k][0] = vel[k] - c * n[k];
    es.right[4][0] = avg.H - c * un;
    es.right[0][1] = 1.0;
    for (int k = 0; k < 3; ++k) es.right[1 + k][1] = vel[k];
    es.right[4][1] = 0.5 * V2;
    for (int k = 0; k < 3; ++k) es.right[1 + k][2] = t1[k];
    es.right[4][2] = ut1;
    for (int k = 0; k < 3; ++k) es.right[1 + k][3] = t2[k];
    es.right[4][3] = ut2;
    es.right[0][4] = 1.0;
    for (int k = 0; k < 3; ++k) es.right[1 + k][4] = vel[k] + c * n[k];
    es.right[4][4] = avg.H + c * un;

    // Left eigenvectors (rows), scaled so left * right = I.
    double i2c2 = 1.0 / (2.0 * c2);
    es.left[0][0] = (g1 * 0.5 * V2 + c * un) * i2c2;
    for (int k = 0; k < 3; ++k) es.left[0][1 + k] = (-g1 * vel[k] - c * n[k]) * i2c2;
    es.left[0][4] = g1 * i2c2;
    es.left[1][0] = 1.0 - g1 * 0.5 * V2 / c2;
    for (int k = 0; k < 3; ++k) es.left[1][1 + k] = g1 * vel[k] / c2;
    es.left[1][4] = -g1 / c2;
    es.left[2][0] = -ut1;
    for (int k = 0; k < 3; ++k) es.left[2][1 + k] = t1[k];
    es.left[2][4] = 0.0;
    es.left[3][0] = -ut2;
    for (int k = 0; k < 3; ++k) es.left[3][1 + k] = t2[k];
    es.left[3][4] = 0.0;
    es.left[4][0] = (g1 * 0.5 * V2 - c * un) * i2c2;
    for (int k = 0; k < 3; ++k) es.left[4][1 + k] = (-g1 * vel[k] + c * n[k]) * i2c2;
    es.left[4][4] = g1 * i2c2;

    return es;
}

/// Conservative state reconstructed from a Roe average (used by the Roe
/// property oracle: the Jacobian at this state linearizes the jump).
inline Vec5 roe_state_to_cons(const RoeAverage& a, const GasModel& gas) {
    double V2 = a.u * a.u + a.v * a.v + a.w * a.w;
    double p_over_rho = (gas.gamma - 1.0) / gas.gamma * (a.H - 0.5 * V2);
    double E = a.H - p_over_rho;
    return {a.rho, a.rho * a.u, a.rho * a.v, a.rho * a.w, a.rho * E};
}

}  // namespace sdfv
