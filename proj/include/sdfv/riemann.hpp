#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "sdfv/common.hpp"
#include "sdfv/euler.hpp"

namespace sdfv {

/// Geometry/thermodynamics context of one interface quadrature point.
/// States handed to the solvers are physical-space states; `area_scale`
/// multiplies the returned per-unit-area flux.
struct FaceContext {
    Vec3 normal = {1, 0, 0};  // unit normal, oriented left -> right
    double area_scale = 1.0;
    GasModel gas;
};

struct AusmParams {
    double Kp = 0.25;     // pressure-diffusion coefficient
    double Ku = 0.75;     // velocity-diffusion coefficient
    double sigma = 1.0;
    double beta = 1.0 / 8.0;
    double Minf = 0.1;    // low-Mach reference Mach number
};

inline Vec5 rusanov(const Vec5& qL, const Vec5& qR, const FaceContext& ctx) {
    PrimitiveState l = cons_to_prim(qL, ctx.gas);
    PrimitiveState r = cons_to_prim(qR, ctx.gas);
    const Vec3& n = ctx.normal;
    double unL = l.u * n[0] + l.v * n[1] + l.w * n[2];
    double unR = r.u * n[0] + r.v * n[1] + r.w * n[2];
    double s = std::max(std::abs(unL) + sound_speed(l, ctx.gas),
                        std::abs(unR) + sound_speed(r, ctx.gas));
    Vec5 fl = flux_normal_prim(qL, l, n);
    Vec5 fr = flux_normal_prim(qR, r, n);
    Vec5 f;
    for (int m = 0; m < 5; ++m) f[m] = ctx.area_scale * (0.5 * (fl[m] + fr[m]) - 0.5 * s * (qR[m] - qL[m]));
    return f;
}

namespace ausm_detail {
inline double mach2_plus(double M) { return 0.25 * (M + 1.0) * (M + 1.0); }
inline double mach2_minus(double M) { return -0.25 * (M - 1.0) * (M - 1.0); }
inline double mach4_plus(double M, double beta) {
    if (std::abs(M) >= 1.0) return 0.5 * (M + std::abs(M));
    return mach2_plus(M) * (1.0 - 16.0 * beta * mach2_minus(M));
}
inline double mach4_minus(double M, double beta) {
    if (std::abs(M) >= 1.0) return 0.5 * (M - std::abs(M));
    return mach2_minus(M) * (1.0 + 16.0 * beta * mach2_plus(M));
}
inline double p5_plus(double M, double alpha) {
    if (std::abs(M) >= 1.0) return 0.5 * (M + std::abs(M)) / M;
    return mach2_plus(M) * ((2.0 - M) - 16.0 * alpha * M * mach2_minus(M));
}
inline double p5_minus(double M, double alpha) {
    if (std::abs(M) >= 1.0) return 0.5 * (M - std::abs(M)) / M;
    return mach2_minus(M) * ((-2.0 - M) + 16.0 * alpha * M * mach2_plus(M));
}
}  // namespace ausm_detail

/// AUSM+-up mass/pressure flux splitting (Liou 2006 construction).
inline Vec5 ausm_plus_up(const Vec5& qL, const Vec5& qR, const FaceContext& ctx,
                         const AusmParams& par = {}) {
    using namespace ausm_detail;
    const GasModel& gas = ctx.gas;
    PrimitiveState l = cons_to_prim(qL, gas);
    PrimitiveState r = cons_to_prim(qR, gas);
    const Vec3& n = ctx.normal;
    double unL = l.u * n[0] + l.v * n[1] + l.w * n[2];
    double unR = r.u * n[0] + r.v * n[1] + r.w * n[2];
    double HL = (qL[kEner] + l.p) / l.rho;
    double HR = (qR[kEner] + r.p) / r.rho;

    // Interface speed of sound from the critical speeds.
    double g = gas.gamma;
    double acL = std::sqrt(2.0 * (g - 1.0) / (g + 1.0) * HL);
    double acR = std::sqrt(2.0 * (g - 1.0) / (g + 1.0) * HR);
    double ahL = acL * acL / std::max(acL, unL);
    double ahR = acR * acR / std::max(acR, -unR);
    double a = std::min(ahL, ahR);

    double ML = unL / a, MR = unR / a;
    double Mbar2 = 0.5 * (ML * ML + MR * MR);
    double Mo2 = std::min(1.0, std::max(Mbar2, par.Minf * par.Minf));
    double Mo = std::sqrt(Mo2);
    double fa = Mo * (2.0 - Mo);
    double alpha = 3.0 / 16.0 * (-4.0 + 5.0 * fa * fa);

    double rho_half = 0.5 * (l.rho + r.rho);
    double Mp = -par.Kp / fa * std::max(1.0 - par.sigma * Mbar2, 0.0) * (r.p - l.p) / (rho_half * a * a);
    double Mhalf = mach4_plus(ML, par.beta) + mach4_minus(MR, par.beta) + Mp;
    double mdot = a * Mhalf * (Mhalf > 0.0 ? l.rho : r.rho);

    double pu = -par.Ku * p5_plus(ML, alpha) * p5_minus(MR, alpha) * (l.rho + r.rho) * fa * a *
                (unR - unL);
    double phalf = p5_plus(ML, alpha) * l.p + p5_minus(MR, alpha) * r.p + pu;

    const PrimitiveState& up = (mdot > 0.0) ? l : r;
    double Hup = (mdot > 0.0) ? HL : HR;
    Vec5 f = {mdot, mdot * up.u + phalf * n[0], mdot * up.v + phalf * n[1],
              mdot * up.w + phalf * n[2], mdot * Hup};
    for (int m = 0; m < 5; ++m) f[m] *= ctx.area_scale;
    return f;
}

enum class SolverKind { kRusanov, kAusmPlusUp };

inline SolverKind solver_from_name(const std::string& name) {
    if (name == "rusanov") return SolverKind::kRusanov;
    if (name == "ausm") return SolverKind::kAusmPlusUp;
    throw ConfigError("unknown Riemann solver '" + name + "' (expected rusanov|ausm)");
}

inline std::string solver_name(SolverKind k) {
    return k == SolverKind::kRusanov ? "rusanov" : "ausm";
}

struct RiemannSolver {
    SolverKind kind = SolverKind::kAusmPlusUp;
    AusmParams ausm;

    Vec5 operator()(const Vec5& qL, const Vec5& qR, const FaceContext& ctx) const {
        return kind == SolverKind::kRusanov ? rusanov(qL, qR, ctx) : ausm_plus_up(qL, qR, ctx, ausm);
    }
};

}  // namespace sdfv
