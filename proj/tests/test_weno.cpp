#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sdfv/weno.hpp"

using namespace sdfv;

namespace {
// Direct transcription of the 5th-order reconstruction formulas, kept
// independent of the implementation under test.
double weno_oracle(const double q[5], double eps, int p, double& w1o, double& w2o, double& w3o) {
    double c1 = q[0] / 3.0 - 7.0 * q[1] / 6.0 + 11.0 * q[2] / 6.0;
    double c2 = -q[1] / 6.0 + 5.0 * q[2] / 6.0 + q[3] / 3.0;
    double c3 = q[2] / 3.0 + 5.0 * q[3] / 6.0 - q[4] / 6.0;
    double is1 = 0.25 * std::pow(q[0] - 4 * q[1] + 3 * q[2], 2) +
                 13.0 / 12.0 * std::pow(q[0] - 2 * q[1] + q[2], 2);
    double is2 = 0.25 * std::pow(q[3] - q[1], 2) + 13.0 / 12.0 * std::pow(q[1] - 2 * q[2] + q[3], 2);
    double is3 = 0.25 * std::pow(-3 * q[2] + 4 * q[3] - q[4], 2) +
                 13.0 / 12.0 * std::pow(q[2] - 2 * q[3] + q[4], 2);
    double a1 = 0.1 / std::pow(is1 + eps, p);
    double a2 = 0.6 / std::pow(is2 + eps, p);
    double a3 = 0.3 / std::pow(is3 + eps, p);
    double asum = a1 + a2 + a3;
    w1o = a1 / asum;
    w2o = a2 / asum;
    w3o = a3 / asum;
    return w1o * c1 + w2o * c2 + w3o * c3;
}
}  // namespace

TEST_CASE("weno5 face state basics", "[weno]") {
    WENOConfig cfg;
    SECTION("constant stencil returns the constant with ideal weights") {
        double s[5] = {3.7, 3.7, 3.7, 3.7, 3.7};
        WenoResult r = weno5_face_state(s, cfg);
        CHECK(r.value == Catch::Approx(3.7).epsilon(1e-15));
        CHECK(r.weights[0] == Catch::Approx(0.1).epsilon(1e-14));
        CHECK(r.weights[1] == Catch::Approx(0.6).epsilon(1e-14));
        CHECK(r.weights[2] == Catch::Approx(0.3).epsilon(1e-14));
    }
    SECTION("linear stencil: every candidate gives the midpoint value") {
        double s[5] = {0, 1, 2, 3, 4};
        WenoResult r = weno5_face_state(s, cfg);
        CHECK(r.value == Catch::Approx(2.5).epsilon(1e-13));
    }
    SECTION("step stencil matches the transcription oracle and stays bounded") {
        double s[5] = {0, 0, 0, 1, 1};
        double w1, w2, w3;
        double expect = weno_oracle(s, cfg.epsilon, cfg.power, w1, w2, w3);
        WenoResult r = weno5_face_state(s, cfg);
        CHECK(r.value == Catch::Approx(expect).epsilon(1e-13));
        CHECK(r.weights[0] == Catch::Approx(w1).epsilon(1e-12));
        CHECK(r.weights[1] == Catch::Approx(w2).epsilon(1e-12));
        CHECK(r.weights[2] == Catch::Approx(w3).epsilon(1e-12));
        CHECK(r.value > -0.05);
        CHECK(r.value < 1.05);
    }
    SECTION("random stencils agree with the oracle") {
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> v(-4.0, 4.0);
        for (int i = 0; i < 500; ++i) {
            double s[5];
            for (double& x : s) x = v(rng);
            double w1, w2, w3;
            double expect = weno_oracle(s, cfg.epsilon, cfg.power, w1, w2, w3);
            WenoResult r = weno5_face_state(s, cfg);
            CHECK(r.value == Catch::Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("weno weight properties", "[weno]") {
    WENOConfig cfg;
    std::mt19937 rng(512);
    std::uniform_real_distribution<double> v(-10.0, 10.0);
    SECTION("weights lie in [0,1] and sum to 1") {
        for (int i = 0; i < 1000; ++i) {
            double s[5];
            for (double& x : s) x = v(rng);
            WenoResult r = weno5_face_state(s, cfg);
            double sum = 0.0;
            for (double w : r.weights) {
                CHECK(w >= 0.0);
                CHECK(w <= 1.0);
                sum += w;
            }
            CHECK(sum == Catch::Approx(1.0).margin(1e-14));
        }
    }
    SECTION("weights approach the ideal weights on smooth data as h -> 0") {
        auto f = [](double x) { return std::sin(2.0 * x) + 0.3 * x * x; };
        auto deviation = [&](double h) {
            double s[5];
            for (int i = 0; i < 5; ++i) s[i] = f(0.7 + (i - 2) * h);
            WenoResult r = weno5_face_state(s, cfg);
            return std::abs(r.weights[0] - 0.1) + std::abs(r.weights[1] - 0.6) +
                   std::abs(r.weights[2] - 0.3);
        };
        double coarse = deviation(0.1), fine = deviation(0.0125);
        CHECK(fine < 1e-3);
        CHECK(fine < 0.05 * coarse);
    }
    SECTION("ENO bound on monotone data") {
        for (int i = 0; i < 500; ++i) {
            double s[5];
            s[0] = v(rng);
            std::uniform_real_distribution<double> inc(0.0, 3.0);
            for (int k = 1; k < 5; ++k) s[k] = s[k - 1] + inc(rng);
            WenoResult r = weno5_face_state(s, cfg);
            double lo = s[0], hi = s[4];
            double pad = 0.1 * (hi - lo) + 1e-12;
            CHECK(r.value >= lo - pad);
            CHECK(r.value <= hi + pad);
        }
    }
}

TEST_CASE("tvd limiter", "[weno]") {
    SECTION("local extremum clamps to the cell value") {
        CHECK(tvd_limit(0.0, 1.0, 0.0, 1.3, 2.0) == Catch::Approx(1.0));
        CHECK(tvd_limit(2.0, -1.0, 2.0, -1.4, 2.0) == Catch::Approx(-1.0));
    }
    SECTION("linear data passes through") {
        CHECK(tvd_limit(0.0, 1.0, 2.0, 1.5, 2.0) == Catch::Approx(1.5));
    }
    SECTION("steep face value is clipped at phi = alpha") {
        // phi = min(2, 2*(3-1)/1, 2*(2.4-1)/1) = min(2, 4, 2.8) = 2
        CHECK(tvd_limit(0.0, 1.0, 3.0, 2.4, 2.0) == Catch::Approx(2.0));
    }
    SECTION("flat data guard") {
        CHECK(tvd_limit(1.0, 1.0, 5.0, 3.0, 2.0) == Catch::Approx(1.0));
    }
    SECTION("limited offset is bounded by alpha times the upwind slope") {
        std::mt19937 rng(77);
        std::uniform_real_distribution<double> v(-5.0, 5.0);
        for (int i = 0; i < 2000; ++i) {
            double qm1 = v(rng), q0 = v(rng), qp1 = v(rng), qhat = v(rng);
            double lim = tvd_limit(qm1, q0, qp1, qhat, 2.0);
            double dq = q0 - qm1;
            CHECK((lim - q0) * (dq >= 0 ? 1.0 : -1.0) >= -1e-12);     // phi >= 0
            CHECK(std::abs(lim - q0) <= std::abs(dq) + 1e-12);        // phi <= 2
        }
    }
}

TEST_CASE("characteristic reconstruction", "[weno]") {
    GasModel gas{1.4, 1.0};
    WENOConfig cfg;
    Vec3 dir = {1, 0, 0};
    SECTION("uniform window returns the state from both sides") {
        Vec5 q = prim_to_cons({1.3, 0.4, -0.2, 0.1, 2.0}, gas);
        Vec5 window[6] = {q, q, q, q, q, q};
        Vec5 qL, qR;
        characteristic_reconstruct(window, dir, gas, cfg, qL, qR);
        for (int c = 0; c < 5; ++c) {
            CHECK(qL[c] == Catch::Approx(q[c]).margin(1e-13 * (1.0 + std::abs(q[c]))));
            CHECK(qR[c] == Catch::Approx(q[c]).margin(1e-13 * (1.0 + std::abs(q[c]))));
        }
    }
    SECTION("initial jump with constant data per side reproduces the two states") {
        Vec5 ql = prim_to_cons({11.79, 0, 0, 0, 10.0}, gas);
        Vec5 qr = prim_to_cons({1.179, 0, 0, 0, 1.0}, gas);
        Vec5 window[6] = {ql, ql, ql, qr, qr, qr};
        Vec5 qL, qR;
        characteristic_reconstruct(window, dir, gas, cfg, qL, qR);
        for (int c = 0; c < 5; ++c) {
            CHECK(qL[c] == Catch::Approx(ql[c]).margin(1e-11 * (1.0 + std::abs(ql[c]))));
            CHECK(qR[c] == Catch::Approx(qr[c]).margin(1e-11 * (1.0 + std::abs(qr[c]))));
        }
    }
    SECTION("non-finite stencil values are rejected") {
        Vec5 q = prim_to_cons({1, 0, 0, 0, 1}, gas);
        Vec5 window[6] = {q, q, q, q, q, q};
        window[3][0] = std::numeric_limits<double>::quiet_NaN();
        Vec5 qL, qR;
        CHECK_THROWS_AS(characteristic_reconstruct(window, dir, gas, cfg, qL, qR),
                        InvalidStateError);
    }
    SECTION("cell-average data: face values converge at the design order 5") {
        // The reconstruction coefficients are the cell-average form; feeding
        // exact cell averages must reproduce face point values at 5th order.
        auto rho = [](double x) { return 1.0 + 0.2 * std::sin(2.0 * M_PI * x); };
        auto rho_avg = [](double xl, double xr) {
            return 1.0 + 0.2 * (std::cos(2.0 * M_PI * xl) - std::cos(2.0 * M_PI * xr)) /
                             (2.0 * M_PI * (xr - xl));
        };
        std::vector<double> errs;
        for (double h : {0.02, 0.01, 0.005, 0.0025}) {
            double xf = 0.37;
            double s[5];
            for (int k = 0; k < 5; ++k) {
                double xl = xf + (k - 3) * h, xr = xl + h;
                s[k] = rho_avg(xl, xr);
            }
            errs.push_back(std::abs(weno5_face_state(s, cfg).value - rho(xf)));
        }
        for (size_t i = 1; i < errs.size(); ++i)
            if (errs[i] > 1e-13) CHECK(std::log2(errs[i - 1] / errs[i]) > 4.2);
    }
    SECTION("point-value data: face values converge (2nd-order pointwise)") {
        // With subcell point values the pointwise face accuracy is 2nd order;
        // the design order re-emerges in the conservative flux differences
        // (checked at the residual level in the solver tests).
        auto rho = [](double x) { return 1.0 + 0.2 * std::sin(2.0 * M_PI * x); };
        std::vector<double> errs;
        for (double h : {0.02, 0.01, 0.005, 0.0025}) {
            double xf = 0.37;
            Vec5 window[6];
            for (int k = 0; k < 6; ++k) {
                double xc = xf + (k - 2.5) * h;  // cell centers; face between k=2,3
                window[k] = prim_to_cons({rho(xc), 0.3, 0.0, 0.0, 1.0}, gas);
            }
            Vec5 qL, qR;
            characteristic_reconstruct(window, dir, gas, cfg, qL, qR);
            errs.push_back(std::abs(qL[0] - rho(xf)));
        }
        for (size_t i = 1; i < errs.size(); ++i)
            CHECK(std::log2(errs[i - 1] / errs[i]) > 1.8);
    }
}
