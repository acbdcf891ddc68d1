#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sdfv/exact_riemann.hpp"
#include "sdfv/riemann.hpp"

using namespace sdfv;

namespace {
std::mt19937 rng(31415);

PrimitiveState random_prim() {
    std::uniform_real_distribution<double> rho(0.2, 8.0), vel(-2.5, 2.5), p(0.2, 15.0);
    return {rho(rng), vel(rng), vel(rng), vel(rng), p(rng)};
}

Vec3 random_unit() {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vec3 n;
    do {
        n = {d(rng), d(rng), d(rng)};
    } while (norm3(n) < 1e-2);
    double inv = 1.0 / norm3(n);
    return {n[0] * inv, n[1] * inv, n[2] * inv};
}

// Independent transcription of the Rusanov formula.
Vec5 rusanov_oracle(const Vec5& qL, const Vec5& qR, const Vec3& n, const GasModel& gas) {
    PrimitiveState l = cons_to_prim(qL, gas), r = cons_to_prim(qR, gas);
    double unl = l.u * n[0] + l.v * n[1] + l.w * n[2];
    double unr = r.u * n[0] + r.v * n[1] + r.w * n[2];
    double cl = std::sqrt(gas.gamma * l.p / l.rho), cr = std::sqrt(gas.gamma * r.p / r.rho);
    double smax = std::max(std::abs(unl) + cl, std::abs(unr) + cr);
    Vec5 fl = flux_normal(qL, n, gas), fr = flux_normal(qR, n, gas);
    Vec5 out;
    for (int c = 0; c < 5; ++c) out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * smax * (qR[c] - qL[c]);
    return out;
}

Vec5 rotate_state(const Vec5& q, const double R[3][3]) {
    Vec5 out = q;
    for (int r = 0; r < 3; ++r)
        out[1 + r] = R[r][0] * q[1] + R[r][1] * q[2] + R[r][2] * q[3];
    return out;
}
}  // namespace

TEST_CASE("rusanov flux", "[riemann]") {
    GasModel gas{1.4, 1.0};
    FaceContext ctx;
    ctx.gas = gas;
    SECTION("consistency: equal states give the physical normal flux") {
        for (int i = 0; i < 300; ++i) {
            Vec5 q = prim_to_cons(random_prim(), gas);
            ctx.normal = random_unit();
            Vec5 f = rusanov(q, q, ctx);
            Vec5 fn = flux_normal(q, ctx.normal, gas);
            for (int c = 0; c < 5; ++c)
                CHECK(f[c] == Catch::Approx(fn[c]).margin(1e-13 * (1.0 + std::abs(fn[c]))));
        }
    }
    SECTION("resting pressure jump: mass flux is the dissipation term") {
        ctx.normal = {1, 0, 0};
        Vec5 qL = prim_to_cons({1.0, 0, 0, 0, 2.0}, gas);
        Vec5 qR = prim_to_cons({1.0, 0, 0, 0, 1.0}, gas);
        double smax = std::max(std::sqrt(1.4 * 2.0), std::sqrt(1.4));
        Vec5 f = rusanov(qL, qR, ctx);
        CHECK(f[0] == Catch::Approx(-0.5 * smax * (qR[0] - qL[0])).margin(1e-14));
    }
    SECTION("Sod states match an independent transcription") {
        GasModel air{1.4, 288.18};
        ctx.gas = air;
        ctx.normal = {1, 0, 0};
        Vec5 qL = prim_to_cons({11.79, 0, 0, 0, 1013250.0}, air);
        Vec5 qR = prim_to_cons({1.179, 0, 0, 0, 101325.0}, air);
        Vec5 f = rusanov(qL, qR, ctx);
        Vec5 o = rusanov_oracle(qL, qR, ctx.normal, air);
        for (int c = 0; c < 5; ++c)
            CHECK(f[c] == Catch::Approx(o[c]).epsilon(1e-13));
    }
}

TEST_CASE("AUSM+-up flux", "[riemann]") {
    GasModel gas{1.4, 1.0};
    FaceContext ctx;
    ctx.gas = gas;
    AusmParams par;
    SECTION("consistency") {
        for (int i = 0; i < 300; ++i) {
            Vec5 q = prim_to_cons(random_prim(), gas);
            ctx.normal = random_unit();
            Vec5 f = ausm_plus_up(q, q, ctx, par);
            Vec5 fn = flux_normal(q, ctx.normal, gas);
            for (int c = 0; c < 5; ++c)
                CHECK(f[c] == Catch::Approx(fn[c]).margin(1e-12 * (1.0 + std::abs(fn[c]))));
        }
    }
    SECTION("supersonic upwinding: flux equals the left flux") {
        ctx.normal = {1, 0, 0};
        Vec5 qL = prim_to_cons({1.0, 2.0 * std::sqrt(1.4), 0.1, -0.2, 1.0}, gas);
        std::uniform_real_distribution<double> pert(-0.05, 0.05);
        for (int i = 0; i < 100; ++i) {
            PrimitiveState r{1.0 + pert(rng), 2.0 * std::sqrt(1.4) * (1.0 + pert(rng)), pert(rng),
                             pert(rng), 1.0 + pert(rng)};
            Vec5 qR = prim_to_cons(r, gas);
            Vec5 f = ausm_plus_up(qL, qR, ctx, par);
            Vec5 fn = flux_normal(qL, ctx.normal, gas);
            for (int c = 0; c < 5; ++c)
                CHECK(f[c] == Catch::Approx(fn[c]).margin(1e-12 * (1.0 + std::abs(fn[c]))));
        }
    }
    SECTION("stationary contact is preserved") {
        ctx.normal = {1, 0, 0};
        Vec5 qL = prim_to_cons({4.0, 0, 0, 0, 1.7}, gas);
        Vec5 qR = prim_to_cons({1.0, 0, 0, 0, 1.7}, gas);
        Vec5 f = ausm_plus_up(qL, qR, ctx, par);
        CHECK(f[0] == Catch::Approx(0.0).margin(1e-14));
        CHECK(f[1] == Catch::Approx(1.7).epsilon(1e-13));
        CHECK(f[2] == Catch::Approx(0.0).margin(1e-14));
        CHECK(f[4] == Catch::Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("flux properties shared by both solvers", "[riemann]") {
    GasModel gas{1.4, 1.0};
    for (SolverKind kind : {SolverKind::kRusanov, SolverKind::kAusmPlusUp}) {
        RiemannSolver solver;
        solver.kind = kind;
        SECTION("conservation antisymmetry: " + solver_name(kind)) {
            for (int i = 0; i < 200; ++i) {
                Vec5 qL = prim_to_cons(random_prim(), gas);
                Vec5 qR = prim_to_cons(random_prim(), gas);
                FaceContext fwd, bwd;
                fwd.gas = bwd.gas = gas;
                fwd.normal = random_unit();
                bwd.normal = {-fwd.normal[0], -fwd.normal[1], -fwd.normal[2]};
                Vec5 f = solver(qL, qR, fwd);
                Vec5 b = solver(qR, qL, bwd);
                for (int c = 0; c < 5; ++c)
                    CHECK(f[c] == Catch::Approx(-b[c]).margin(1e-12 * (1.0 + std::abs(f[c]))));
            }
        }
        SECTION("rotational invariance: " + solver_name(kind)) {
            // rotate by 90 degrees around z: (x,y,z) -> (-y,x,z)
            const double R[3][3] = {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}};
            for (int i = 0; i < 200; ++i) {
                Vec5 qL = prim_to_cons(random_prim(), gas);
                Vec5 qR = prim_to_cons(random_prim(), gas);
                Vec3 n = random_unit();
                FaceContext c1, c2;
                c1.gas = c2.gas = gas;
                c1.normal = n;
                c2.normal = {R[0][0] * n[0] + R[0][1] * n[1] + R[0][2] * n[2],
                             R[1][0] * n[0] + R[1][1] * n[1] + R[1][2] * n[2],
                             R[2][0] * n[0] + R[2][1] * n[1] + R[2][2] * n[2]};
                Vec5 f1 = rotate_state(solver(qL, qR, c1), R);
                Vec5 f2 = solver(rotate_state(qL, R), rotate_state(qR, R), c2);
                for (int c = 0; c < 5; ++c)
                    CHECK(f2[c] == Catch::Approx(f1[c]).margin(1e-12 * (1.0 + std::abs(f1[c]))));
            }
        }
    }
}

TEST_CASE("exact Riemann solver star state and waves", "[riemann][oracle]") {
    // the Sod configuration of this artifact: 10:1 density and pressure
    GasModel gas{1.4, 288.18};
    const double rho0 = 1.179, p0 = 101325.0;
    PrimitiveState l{10 * rho0, 0, 0, 0, 10 * p0};
    PrimitiveState r{rho0, 0, 0, 0, p0};
    ExactRiemann ex(l, r, gas.gamma);

    SECTION("star state satisfies the residual equation") {
        // f_L(p*) + f_R(p*) + du = 0 evaluated independently
        auto fk = [&](double p, const PrimitiveState& s) {
            double c = std::sqrt(gas.gamma * s.p / s.rho);
            if (p > s.p) {
                double A = 2.0 / ((gas.gamma + 1.0) * s.rho);
                double B = (gas.gamma - 1.0) / (gas.gamma + 1.0) * s.p;
                return (p - s.p) * std::sqrt(A / (p + B));
            }
            double z = (gas.gamma - 1.0) / (2.0 * gas.gamma);
            return 2.0 * c / (gas.gamma - 1.0) * (std::pow(p / s.p, z) - 1.0);
        };
        double res = fk(ex.pstar(), l) + fk(ex.pstar(), r) + (r.u - l.u);
        CHECK(std::abs(res) < 1e-9);
        CHECK(ex.pstar() > p0);
        CHECK(ex.pstar() < 10 * p0);
        CHECK(ex.right_is_shock());
        CHECK_FALSE(ex.left_is_shock());
    }
    SECTION("right shock satisfies Rankine-Hugoniot") {
        double s = ex.right_shock_speed();
        PrimitiveState post{ex.rho_star_right(), ex.ustar(), 0, 0, ex.pstar()};
        // mass and momentum jump conditions in the shock frame
        double m1 = r.rho * (r.u - s);
        double m2 = post.rho * (post.u - s);
        CHECK(m1 == Catch::Approx(m2).epsilon(1e-9));
        CHECK(r.p + m1 * (r.u - s) == Catch::Approx(post.p + m2 * (post.u - s)).epsilon(1e-9));
    }
    SECTION("sampling hits the initial states far away and the star in between") {
        CHECK(ex.sample(-1e9).rho == Catch::Approx(l.rho));
        CHECK(ex.sample(1e9).rho == Catch::Approx(r.rho));
        PrimitiveState star = ex.sample(ex.ustar() + 1.0);
        CHECK(star.p == Catch::Approx(ex.pstar()).epsilon(1e-12));
        // shock position = speed * time
        double t = 6e-4;
        double xs = 0.5 + ex.right_shock_speed() * t;
        PrimitiveState before = ex.sample((xs - 1e-6 - 0.5) / t);
        PrimitiveState after = ex.sample((xs + 1e-6 - 0.5) / t);
        CHECK(before.rho == Catch::Approx(ex.rho_star_right()).epsilon(1e-10));
        CHECK(after.rho == Catch::Approx(r.rho).epsilon(1e-12));
        // keeps the shock inside the unit tube at the chosen final time
        CHECK(xs < 1.0);
        CHECK(xs > 0.8);
    }
    SECTION("isentropic relation across the left rarefaction") {
        double lhs = ex.pstar() / std::pow(ex.rho_star_left(), gas.gamma);
        double rhs = l.p / std::pow(l.rho, gas.gamma);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("normal shock relations at Mach 1.1", "[riemann][oracle]") {
    GasModel gas{1.4, 1.0};
    PrimitiveState left{1.0, 1.1 * std::sqrt(1.4), 0, 0, 1.0};
    PrimitiveState right = normal_shock_downstream(left, 1.1, gas);
    CHECK(right.p == Catch::Approx(1.245).epsilon(1e-12));
    CHECK(right.rho == Catch::Approx(2.904 / 2.484).epsilon(1e-12));
    // stationary shock: mass flux continuous
    CHECK(left.rho * left.u == Catch::Approx(right.rho * right.u).epsilon(1e-12));
    // momentum flux continuous
    CHECK(left.rho * left.u * left.u + left.p ==
          Catch::Approx(right.rho * right.u * right.u + right.p).epsilon(1e-12));
}
