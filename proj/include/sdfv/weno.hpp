#pragma once

#include <algorithm>
#include <cmath>

#include "sdfv/common.hpp"
#include "sdfv/euler.hpp"

namespace sdfv {

struct WENOConfig {
    double epsilon = 1e-6;                       // smoothness regularization
    int power = 2;                               // exponent p
    std::array<double, 3> ideal = {0.1, 0.6, 0.3};
    bool tvd_enabled = false;
    double tvd_alpha = 2.0;
};

struct WenoResult {
    double value = 0.0;
    std::array<double, 3> weights = {0, 0, 0};
};

/// Left state at the i+1/2 face from the 5-point stencil (i-2 .. i+2).
/// The right state of a face is obtained by feeding the mirrored stencil.
inline WenoResult weno5_face_state(const double s[5], const WENOConfig& cfg) {
    const double &qm2 = s[0], &qm1 = s[1], &q0 = s[2], &qp1 = s[3], &qp2 = s[4];

    double c1 = (1.0 / 3.0) * qm2 - (7.0 / 6.0) * qm1 + (11.0 / 6.0) * q0;
    double c2 = -(1.0 / 6.0) * qm1 + (5.0 / 6.0) * q0 + (1.0 / 3.0) * qp1;
    double c3 = (1.0 / 3.0) * q0 + (5.0 / 6.0) * qp1 - (1.0 / 6.0) * qp2;

    double d1a = qm2 - 4.0 * qm1 + 3.0 * q0;
    double d1b = qm2 - 2.0 * qm1 + q0;
    double is1 = 0.25 * d1a * d1a + (13.0 / 12.0) * d1b * d1b;
    double d2a = qp1 - qm1;
    double d2b = qm1 - 2.0 * q0 + qp1;
    double is2 = 0.25 * d2a * d2a + (13.0 / 12.0) * d2b * d2b;
    double d3a = -3.0 * q0 + 4.0 * qp1 - qp2;
    double d3b = q0 - 2.0 * qp1 + qp2;
    double is3 = 0.25 * d3a * d3a + (13.0 / 12.0) * d3b * d3b;

    auto raise = [&cfg](double is) {
        double b = is + cfg.epsilon;
        double r = b;
        for (int k = 1; k < cfg.power; ++k) r *= b;
        return r;
    };
    double a1 = cfg.ideal[0] / raise(is1);
    double a2 = cfg.ideal[1] / raise(is2);
    double a3 = cfg.ideal[2] / raise(is3);
    double inv = 1.0 / (a1 + a2 + a3);

    WenoResult out;
    out.weights = {a1 * inv, a2 * inv, a3 * inv};
    out.value = out.weights[0] * c1 + out.weights[1] * c2 + out.weights[2] * c3;
    return out;
}

/// Slope-limited face value: phi = max[0, min(alpha, alpha*r, 2(qhat-q0)/dq)],
/// face = q0 + 0.5*(q0 - qm1)*phi. Collapses to q0 at local extrema.
inline double tvd_limit(double qm1, double q0, double qp1, double qhat, double alpha) {
    double dq = q0 - qm1;
    if (std::abs(dq) < 1e-12 * std::max(1.0, std::abs(q0))) return q0;
    double r = (qp1 - q0) / dq;
    double t = 2.0 * (qhat - q0) / dq;
    double phi = std::max(0.0, std::min({alpha, alpha * r, t}));
    return q0 + 0.5 * dq * phi;
}

/// One-sided characteristic WENO state at a face. `cells` are ordered with
/// the owner cell fourth: for the left state of face (i | i+1) pass
/// (i-2, i-1, i, i+1, i+2); for the right state pass the mirrored sequence
/// (i+3, i+2, i+1, i, i-1). The shared face eigensystem projects the stencil.
inline Vec5 char_face_state(const Eigensystem& es, const Vec5 cells[5], const WENOConfig& cfg) {
    Vec5 w[5];
    for (int c = 0; c < 5; ++c) w[c] = es.to_characteristic(cells[c]);
    Vec5 ch;
    for (int m = 0; m < 5; ++m) {
        double s[5] = {w[0][m], w[1][m], w[2][m], w[3][m], w[4][m]};
        ch[m] = weno5_face_state(s, cfg).value;
    }
    return es.from_characteristic(ch);
}

/// Characteristic WENO reconstruction of both one-sided states at the face
/// between window[2] and window[3]; window spans cells i-2 .. i+3.
/// The eigensystem is evaluated at the Roe average of the two adjacent cells
/// in the given direction. TVD limiting (when enabled) acts per conservative
/// component on the back-transformed values.
inline void characteristic_reconstruct(const Vec5 window[6], const Vec3& dir, const GasModel& gas,
                                       const WENOConfig& cfg, Vec5& qL, Vec5& qR) {
    for (int c = 0; c < 6; ++c)
        for (int m = 0; m < 5; ++m)
            if (!std::isfinite(window[c][m]))
                throw InvalidStateError("characteristic_reconstruct: non-finite stencil value");

    RoeAverage avg = roe_average(window[2], window[3], gas);
    Eigensystem es = eigensystem_at(avg, dir, gas);

    Vec5 cl[5] = {window[0], window[1], window[2], window[3], window[4]};
    Vec5 cr[5] = {window[5], window[4], window[3], window[2], window[1]};
    qL = char_face_state(es, cl, cfg);
    qR = char_face_state(es, cr, cfg);

    if (cfg.tvd_enabled) {
        for (int m = 0; m < 5; ++m) {
            qL[m] = tvd_limit(window[1][m], window[2][m], window[3][m], qL[m], cfg.tvd_alpha);
            qR[m] = tvd_limit(window[4][m], window[3][m], window[2][m], qR[m], cfg.tvd_alpha);
        }
    }
}

}  // namespace sdfv
