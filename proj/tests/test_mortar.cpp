#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sdfv/mortar.hpp"

using namespace sdfv;

namespace {
const SDBasis& basis5() {
    static SDBasis b(5);
    return b;
}

std::mt19937 rng(2718);

std::vector<Vec5> random_face_data(int m) {
    std::uniform_real_distribution<double> v(-2.0, 2.0);
    std::vector<Vec5> d(m * m);
    for (auto& q : d)
        for (int c = 0; c < 5; ++c) q[c] = v(rng);
    return d;
}

// Exact integral of the nodal polynomial over the unit face.
Vec5 face_integral(const std::vector<double>& nodes, const std::vector<Vec5>& data) {
    auto w = nodal_quadrature_weights(nodes);
    int m = static_cast<int>(nodes.size());
    Vec5 acc = {0, 0, 0, 0, 0};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int c = 0; c < 5; ++c) acc[c] += w[i] * w[j] * data[i * m + j][c];
    return acc;
}

// Adaptive Simpson quadrature for the exactness oracle.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps,
                        int depth = 0) {
    double c = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fc = f(c);
    double s = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    double c1 = 0.5 * (a + c), c2 = 0.5 * (c + b);
    double s1 = (c - a) / 6.0 * (fa + 4.0 * f(c1) + fc);
    double s2 = (b - c) / 6.0 * (fc + 4.0 * f(c2) + fb);
    if (depth > 24 || std::abs(s1 + s2 - s) < 15.0 * eps) return s1 + s2 + (s1 + s2 - s) / 15.0;
    return adaptive_simpson(f, a, c, 0.5 * eps, depth + 1) +
           adaptive_simpson(f, c, b, 0.5 * eps, depth + 1);
}
}  // namespace

TEST_CASE("mortar operator between equal-degree spaces", "[mortar]") {
    FaceSpace sd = FaceSpace::sd_face(basis5());
    FaceSpace fv = FaceSpace::fv_face();
    MortarOperator op = build_mortar_operator(sd, fv);
    REQUIRE(op.J == 5);

    SECTION("mortar nodes are the Gauss abscissae") {
        auto g = gauss_solution_points(5);
        for (int i = 0; i < 5; ++i) CHECK(op.mortar_nodes[i] == Catch::Approx(g[i]).margin(1e-15));
    }
    SECTION("forward projection of a degree-4 polynomial is exact re-interpolation") {
        // sample a random tensor degree-4 polynomial on the FV nodes
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        double cx[5], cy[5];
        for (auto& v : cx) v = coef(rng);
        for (auto& v : cy) v = coef(rng);
        auto p1 = [](const double* c, double x) {
            return c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])));
        };
        std::vector<Vec5> data(25);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                for (int c = 0; c < 5; ++c)
                    data[i * 5 + j][c] = p1(cx, fv.nodes[i]) * p1(cy, fv.nodes[j]) * (c + 1);
        auto proj = project_to_mortar(op, MortarSide::kB, data);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                for (int c = 0; c < 5; ++c) {
                    double expect = p1(cx, op.mortar_nodes[i]) * p1(cy, op.mortar_nodes[j]) * (c + 1);
                    CHECK(proj[i * 5 + j][c] == Catch::Approx(expect).margin(1e-12));
                }
    }
    SECTION("constants project to constants in both directions") {
        std::vector<Vec5> data(25, Vec5{1.5, -0.5, 2.0, 0.0, 3.0});
        auto fwd = project_to_mortar(op, MortarSide::kA, data);
        for (const auto& q : fwd)
            for (int c = 0; c < 5; ++c) CHECK(q[c] == Catch::Approx(data[0][c]).margin(1e-13));
        auto bwd = project_from_mortar(op, MortarSide::kB, fwd);
        for (const auto& q : bwd)
            for (int c = 0; c < 5; ++c) CHECK(q[c] == Catch::Approx(data[0][c]).margin(1e-13));
    }
    SECTION("forward-then-backward round trip is the identity (equal degrees)") {
        for (int trial = 0; trial < 50; ++trial) {
            auto data = random_face_data(5);
            auto fwd = project_to_mortar(op, MortarSide::kB, data);
            auto back = project_from_mortar(op, MortarSide::kB, fwd);
            for (int i = 0; i < 25; ++i)
                for (int c = 0; c < 5; ++c)
                    CHECK(back[i][c] == Catch::Approx(data[i][c]).margin(1e-12));
        }
    }
    SECTION("face integral is preserved in both directions (1000 random inputs)") {
        for (int trial = 0; trial < 1000; ++trial) {
            MortarSide side = trial % 2 ? MortarSide::kA : MortarSide::kB;
            const auto& nodes = (side == MortarSide::kA) ? sd.nodes : fv.nodes;
            auto data = random_face_data(5);
            auto fwd = project_to_mortar(op, side, data);
            Vec5 i0 = face_integral(nodes, data);
            Vec5 i1 = face_integral(op.mortar_nodes, fwd);
            for (int c = 0; c < 5; ++c) CHECK(i1[c] == Catch::Approx(i0[c]).margin(1e-13));
            auto bwd = project_from_mortar(op, side, fwd);
            Vec5 i2 = face_integral(nodes, bwd);
            for (int c = 0; c < 5; ++c) CHECK(i2[c] == Catch::Approx(i1[c]).margin(1e-13));
        }
    }
    SECTION("least-squares orthogonality of the forward projection residual") {
        // <u - Pu, v> = 0 for mortar-space test functions v
        auto data = random_face_data(5);
        auto proj = project_to_mortar(op, MortarSide::kB, data);
        const auto& q = gauss_legendre(8);
        auto bf = barycentric_weights(fv.nodes);
        auto bm = barycentric_weights(op.mortar_nodes);
        std::uniform_int_distribution<int> pick(0, 4);
        for (int trial = 0; trial < 20; ++trial) {
            int vi = pick(rng), vj = pick(rng);
            double acc = 0.0;
            for (size_t gi = 0; gi < q.x.size(); ++gi)
                for (size_t gj = 0; gj < q.x.size(); ++gj) {
                    auto lf_i = lagrange_values(fv.nodes, bf, q.x[gi]);
                    auto lf_j = lagrange_values(fv.nodes, bf, q.x[gj]);
                    auto lm_i = lagrange_values(op.mortar_nodes, bm, q.x[gi]);
                    auto lm_j = lagrange_values(op.mortar_nodes, bm, q.x[gj]);
                    double u = 0.0, pu = 0.0;
                    for (int i = 0; i < 5; ++i)
                        for (int j = 0; j < 5; ++j) {
                            u += data[i * 5 + j][0] * lf_i[i] * lf_j[j];
                            pu += proj[i * 5 + j][0] * lm_i[i] * lm_j[j];
                        }
                    acc += q.w[gi] * q.w[gj] * (u - pu) * lm_i[vi] * lm_j[vj];
                }
            CHECK(acc == Catch::Approx(0.0).margin(1e-12));
        }
    }
    SECTION("projection residual diagnostic is ~0 for equal-degree spaces") {
        auto data = random_face_data(5);
        CHECK(projection_residual(op, MortarSide::kB, data) < 1e-12);
    }
    SECTION("dimension mismatches are rejected") {
        std::vector<Vec5> bad(16);
        CHECK_THROWS(project_to_mortar(op, MortarSide::kA, bad));
        CHECK_THROWS(project_from_mortar(op, MortarSide::kA, bad));
    }
}

TEST_CASE("projection quadrature integrates basis products exactly", "[mortar]") {
    FaceSpace sd = FaceSpace::sd_face(basis5());
    FaceSpace fv = FaceSpace::fv_face();
    auto bw_sd = barycentric_weights(sd.nodes);
    auto bw_fv = barycentric_weights(fv.nodes);
    const auto& q = mortar_detail::rule();
    std::uniform_int_distribution<int> pick(0, 4);
    for (int trial = 0; trial < 25; ++trial) {
        int i = pick(rng), m = pick(rng);
        auto f = [&](double x) {
            return lagrange_values(sd.nodes, bw_sd, x)[i] * lagrange_values(fv.nodes, bw_fv, x)[m];
        };
        double by_rule = 0.0;
        for (size_t g = 0; g < q.x.size(); ++g) by_rule += q.w[g] * f(q.x[g]);
        double by_adaptive = adaptive_simpson(f, 0.0, 1.0, 1e-15);
        CHECK(by_rule == Catch::Approx(by_adaptive).margin(1e-13));
    }
}

TEST_CASE("unequal-degree mortar still preserves constants and integrals", "[mortar]") {
    // exercise the general J = max path with a 3-node space against the FV space
    FaceSpace coarse{gauss_solution_points(3)};
    FaceSpace fv = FaceSpace::fv_face();
    MortarOperator op = build_mortar_operator(coarse, fv);
    REQUIRE(op.J == 5);
    std::vector<Vec5> data(9, Vec5{2.0, 1.0, -1.0, 0.5, 4.0});
    auto fwd = project_to_mortar(op, MortarSide::kA, data);
    for (const auto& v : fwd)
        for (int c = 0; c < 5; ++c) CHECK(v[c] == Catch::Approx(data[0][c]).margin(1e-13));
    auto rnd = random_face_data(3);
    auto f2 = project_to_mortar(op, MortarSide::kA, rnd);
    Vec5 i0 = face_integral(coarse.nodes, rnd);
    Vec5 i1 = face_integral(op.mortar_nodes, f2);
    for (int c = 0; c < 5; ++c) CHECK(i1[c] == Catch::Approx(i0[c]).margin(1e-13));
}

TEST_CASE("mixed-face flux conserves the face integral", "[mortar]") {
    GasModel gas{1.4, 1.0};
    FaceSpace sd = FaceSpace::sd_face(basis5());
    FaceSpace fv = FaceSpace::fv_face();
    MortarOperator op = build_mortar_operator(sd, fv);
    RiemannSolver solver;
    MortarFaceGeometry geo;
    geo.normal.assign(25, Vec3{1, 0, 0});
    geo.area_scale.assign(25, 0.37);

    SECTION("identical uniform states give the uniform physical flux on both sides") {
        Vec5 q = prim_to_cons({1.2, 0.5, -0.1, 0.2, 2.3}, gas);
        std::vector<Vec5> tr(25, q);
        std::vector<Vec5> fa, fb;
        mixed_face_flux(op, tr, tr, true, geo, solver, gas, fa, fb);
        Vec5 fn = flux_normal(q, {1, 0, 0}, gas);
        for (int i = 0; i < 25; ++i)
            for (int c = 0; c < 5; ++c) {
                CHECK(fa[i][c] == Catch::Approx(0.37 * fn[c]).margin(1e-12));
                CHECK(fb[i][c] == Catch::Approx(0.37 * fn[c]).margin(1e-12));
            }
    }
    SECTION("face-integral equality on 1000 random smooth traces") {
        std::uniform_real_distribution<double> amp(-0.05, 0.05);
        GasModel g = gas;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<Vec5> ta(25), tb(25);
            double a1 = amp(rng), a2 = amp(rng);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) {
                    double xs = sd.nodes[i], ys = sd.nodes[j];
                    double xf = fv.nodes[i], yf = fv.nodes[j];
                    ta[i * 5 + j] = prim_to_cons(
                        {1.0 + a1 * std::sin(3 * xs + ys), 0.4 + a2 * xs, a1 * ys, 0.0,
                         1.0 + a2 * std::cos(xs)},
                        g);
                    tb[i * 5 + j] = prim_to_cons(
                        {1.0 + a2 * std::cos(2 * xf - yf), 0.4 - a1 * yf, a2 * xf, 0.0,
                         1.0 + a1 * std::sin(yf)},
                        g);
                }
            std::vector<Vec5> fa, fb;
            mixed_face_flux(op, ta, tb, true, geo, solver, g, fa, fb);
            Vec5 ia = face_integral(sd.nodes, fa);
            Vec5 ib = face_integral(fv.nodes, fb);
            for (int c = 0; c < 5; ++c)
                CHECK(ia[c] == Catch::Approx(ib[c]).margin(1e-12 * (1.0 + std::abs(ia[c]))));
        }
    }
}

TEST_CASE("SD ghost subcell interpolation", "[mortar]") {
    const SDBasis& basis = basis5();
    SECTION("constant field gives constant ghosts") {
        std::vector<double> qt(125 * 5), inv(125, 1.0);
        for (int p = 0; p < 125; ++p)
            for (int c = 0; c < 5; ++c) qt[p * 5 + c] = (c + 1) * 1.1;
        auto gh = sd_ghost_subcell_values(qt.data(), inv.data(), basis, 0, true);
        for (const auto& g : gh)
            for (int c = 0; c < 5; ++c) CHECK(g[c] == Catch::Approx((c + 1) * 1.1).margin(1e-13));
    }
    SECTION("degree-4 tensor field is transferred exactly") {
        std::mt19937 lrng(4);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        double cx[5], cy[5], cz[5];
        for (auto& v : cx) v = coef(lrng);
        for (auto& v : cy) v = coef(lrng);
        for (auto& v : cz) v = coef(lrng);
        auto p1 = [](const double* c, double x) {
            return c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])));
        };
        std::vector<double> qt(125 * 5), inv(125, 1.0);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                for (int k = 0; k < 5; ++k) {
                    double v = p1(cx, basis.sol_pts[i]) * p1(cy, basis.sol_pts[j]) *
                               p1(cz, basis.sol_pts[k]);
                    for (int c = 0; c < 5; ++c) qt[((i * 5 + j) * 5 + k) * 5 + c] = v * (c + 1);
                }
        auto centers = subcell_centers();
        for (int dir = 0; dir < 3; ++dir)
            for (bool high : {false, true}) {
                auto gh = sd_ghost_subcell_values(qt.data(), inv.data(), basis, dir, high);
                for (int l = 0; l < 2; ++l)
                    for (int a = 0; a < 5; ++a)
                        for (int b = 0; b < 5; ++b) {
                            double depth = high ? centers[4 - l] : centers[l];
                            double x, y, z;
                            if (dir == 0) {
                                x = depth;
                                y = centers[a];
                                z = centers[b];
                            } else if (dir == 1) {
                                x = centers[a];
                                y = depth;
                                z = centers[b];
                            } else {
                                x = centers[a];
                                y = centers[b];
                                z = depth;
                            }
                            double expect = p1(cx, x) * p1(cy, y) * p1(cz, z);
                            const Vec5& g = gh[(l * 5 + a) * 5 + b];
                            for (int c = 0; c < 5; ++c)
                                CHECK(g[c] == Catch::Approx(expect * (c + 1)).margin(1e-12));
                        }
            }
    }
    SECTION("sine field ghosts converge at 5th order") {
        std::vector<double> errs;
        for (double h : {0.2, 0.1, 0.05}) {
            std::vector<double> qt(125 * 5), inv(125, 1.0);
            auto f = [&](double x) { return 1.0 + 0.3 * std::sin(2.0 * M_PI * x); };
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j)
                    for (int k = 0; k < 5; ++k) {
                        double v = f(basis.sol_pts[i] * h);
                        for (int c = 0; c < 5; ++c) qt[((i * 5 + j) * 5 + k) * 5 + c] = v;
                    }
            auto gh = sd_ghost_subcell_values(qt.data(), inv.data(), basis, 0, true);
            auto centers = subcell_centers();
            double err = 0.0;
            for (int l = 0; l < 2; ++l) {
                double expect = f(centers[4 - l] * h);
                err = std::max(err, std::abs(gh[l * 25][0] - expect));
            }
            errs.push_back(err);
        }
        CHECK(std::log2(errs[0] / errs[1]) > 4.3);
        CHECK(std::log2(errs[1] / errs[2]) > 4.3);
    }
}
