#pragma once

#include <cmath>
#include <stdexcept>

#include "sdfv/euler.hpp"

namespace sdfv {

/// Classical exact Riemann solver for the 1D Euler equations (ideal gas):
/// star-state pressure by Newton iteration, self-similar sampling in x/t.
class ExactRiemann {
public:
    ExactRiemann(const PrimitiveState& left, const PrimitiveState& right, double gamma,
                 double tol = 1e-12)
        : l_(left), r_(right), g_(gamma) {
        cl_ = std::sqrt(g_ * l_.p / l_.rho);
        cr_ = std::sqrt(g_ * r_.p / r_.rho);
        double du = r_.u - l_.u;
        if (2.0 * (cl_ + cr_) / (g_ - 1.0) <= du)
            throw std::runtime_error("ExactRiemann: vacuum-generating data");

        // Two-rarefaction initial guess.
        double z = (g_ - 1.0) / (2.0 * g_);
        double p0 = std::pow((cl_ + cr_ - 0.5 * (g_ - 1.0) * du) /
                                 (cl_ / std::pow(l_.p, z) + cr_ / std::pow(r_.p, z)),
                             1.0 / z);
        p0 = std::max(p0, 1e-10 * (l_.p + r_.p));
        double p = p0;
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            double fl, dfl, fr, dfr;
            side_fn(p, l_, cl_, fl, dfl);
            side_fn(p, r_, cr_, fr, dfr);
            double f = fl + fr + du;
            double dp = f / (dfl + dfr);
            p -= dp;
            if (p <= 0.0) p = 1e-12 * (l_.p + r_.p);
            if (std::abs(dp) < tol * p) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("ExactRiemann: Newton iteration did not converge");
        pstar_ = p;
        double fl, dfl, fr, dfr;
        side_fn(pstar_, l_, cl_, fl, dfl);
        side_fn(pstar_, r_, cr_, fr, dfr);
        ustar_ = 0.5 * (l_.u + r_.u) + 0.5 * (fr - fl);

        // Star densities and wave speeds.
        double gp1 = g_ + 1.0, gm1 = g_ - 1.0;
        if (pstar_ > l_.p) {
            rho_star_l_ = l_.rho * ((pstar_ / l_.p + gm1 / gp1) / (gm1 / gp1 * pstar_ / l_.p + 1.0));
            s_left_ = l_.u - cl_ * std::sqrt(gp1 / (2.0 * g_) * pstar_ / l_.p + gm1 / (2.0 * g_));
            left_is_shock_ = true;
        } else {
            rho_star_l_ = l_.rho * std::pow(pstar_ / l_.p, 1.0 / g_);
            left_is_shock_ = false;
        }
        if (pstar_ > r_.p) {
            rho_star_r_ = r_.rho * ((pstar_ / r_.p + gm1 / gp1) / (gm1 / gp1 * pstar_ / r_.p + 1.0));
            s_right_ = r_.u + cr_ * std::sqrt(gp1 / (2.0 * g_) * pstar_ / r_.p + gm1 / (2.0 * g_));
            right_is_shock_ = true;
        } else {
            rho_star_r_ = r_.rho * std::pow(pstar_ / r_.p, 1.0 / g_);
            right_is_shock_ = false;
        }
    }

    double pstar() const { return pstar_; }
    double ustar() const { return ustar_; }
    double rho_star_left() const { return rho_star_l_; }
    double rho_star_right() const { return rho_star_r_; }
    bool left_is_shock() const { return left_is_shock_; }
    bool right_is_shock() const { return right_is_shock_; }
    /// Right shock speed (valid when right_is_shock()).
    double right_shock_speed() const { return s_right_; }
    double left_shock_speed() const { return s_left_; }
    double contact_speed() const { return ustar_; }

    /// Self-similar solution at xi = x/t.
    PrimitiveState sample(double xi) const {
        double gm1 = g_ - 1.0, gp1 = g_ + 1.0;
        PrimitiveState s;
        s.v = 0.0;
        s.w = 0.0;
        if (xi <= ustar_) {
            // left side of the contact
            if (left_is_shock_) {
                if (xi <= s_left_) return l_;
                s.rho = rho_star_l_;
                s.u = ustar_;
                s.p = pstar_;
                return s;
            }
            double head = l_.u - cl_;
            double cstar = cl_ * std::pow(pstar_ / l_.p, gm1 / (2.0 * g_));
            double tail = ustar_ - cstar;
            if (xi <= head) return l_;
            if (xi >= tail) {
                s.rho = rho_star_l_;
                s.u = ustar_;
                s.p = pstar_;
                return s;
            }
            double c = (2.0 / gp1) * (cl_ + 0.5 * gm1 * (l_.u - xi));
            s.u = (2.0 / gp1) * (cl_ + 0.5 * gm1 * l_.u + xi);
            s.rho = l_.rho * std::pow(c / cl_, 2.0 / gm1);
            s.p = l_.p * std::pow(c / cl_, 2.0 * g_ / gm1);
            return s;
        }
        if (right_is_shock_) {
            if (xi >= s_right_) return r_;
            s.rho = rho_star_r_;
            s.u = ustar_;
            s.p = pstar_;
            return s;
        }
        double head = r_.u + cr_;
        double cstar = cr_ * std::pow(pstar_ / r_.p, gm1 / (2.0 * g_));
        double tail = ustar_ + cstar;
        if (xi >= head) return r_;
        if (xi <= tail) {
            s.rho = rho_star_r_;
            s.u = ustar_;
            s.p = pstar_;
            return s;
        }
        double c = (2.0 / gp1) * (cr_ - 0.5 * gm1 * (r_.u - xi));
        s.u = (2.0 / gp1) * (-cr_ + 0.5 * gm1 * r_.u + xi);
        s.rho = r_.rho * std::pow(c / cr_, 2.0 / gm1);
        s.p = r_.p * std::pow(c / cr_, 2.0 * g_ / gm1);
        return s;
    }

private:
    static void side_fn_impl(double p, const PrimitiveState& s, double c, double g, double& f,
                             double& df) {
        if (p > s.p) {
            double A = 2.0 / ((g + 1.0) * s.rho);
            double B = (g - 1.0) / (g + 1.0) * s.p;
            double root = std::sqrt(A / (p + B));
            f = (p - s.p) * root;
            df = root * (1.0 - 0.5 * (p - s.p) / (p + B));
        } else {
            double z = (g - 1.0) / (2.0 * g);
            f = 2.0 * c / (g - 1.0) * (std::pow(p / s.p, z) - 1.0);
            df = std::pow(p / s.p, -((g + 1.0) / (2.0 * g))) / (s.rho * c);
        }
    }
    void side_fn(double p, const PrimitiveState& s, double c, double& f, double& df) const {
        side_fn_impl(p, s, c, g_, f, df);
    }

    PrimitiveState l_, r_;
    double g_;
    double cl_, cr_;
    double pstar_ = 0.0, ustar_ = 0.0;
    double rho_star_l_ = 0.0, rho_star_r_ = 0.0;
    double s_left_ = 0.0, s_right_ = 0.0;
    bool left_is_shock_ = false, right_is_shock_ = false;
};

/// Stationary normal-shock jump (upstream Mach M in the shock frame).
inline PrimitiveState normal_shock_downstream(const PrimitiveState& pre, double M,
                                              const GasModel& gas) {
    double g = gas.gamma;
    PrimitiveState post;
    post.rho = pre.rho * ((g + 1.0) * M * M) / ((g - 1.0) * M * M + 2.0);
    post.p = pre.p * (2.0 * g * M * M - (g - 1.0)) / (g + 1.0);
    post.u = pre.u * pre.rho / post.rho;  // mass conservation in the shock frame
    post.v = pre.v;
    post.w = pre.w;
    return post;
}

}  // namespace sdfv
