#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "sdfv/exact_riemann.hpp"
#include "sdfv/solver.hpp"

namespace sdfv {

constexpr double kAtm = 101325.0;  // 1 atm in Pa

/// Everything needed to set up and run one benchmark configuration.
struct CaseDefinition {
    std::string name;
    GasModel gas;

    enum class MeshKind { kCartesian, kCylinder } mesh_kind = MeshKind::kCartesian;
    DomainBounds bounds;
    int nx = 1, ny = 1, nz = 1;
    std::array<bool, 3> periodic = {true, true, true};
    std::array<bool, 3> invariant = {false, false, true};
    double cyl_r0 = 1.0, cyl_a = 3.0, cyl_b = 6.0;

    RunMode mode = RunMode::kHybridDynamic;
    SolverKind solver = SolverKind::kAusmPlusUp;
    double ausm_minf = 0.1;
    bool tvd = false;
    double weno_epsilon = 1e-6;
    DetectorConfig detector;

    double dt = 0.0;   // fixed time step; 0 selects CFL stepping
    double cfl = 0.0;
    double final_time = 0.0;
    bool steady = false;
    double steady_tol = 1e-8;
    long max_steps = 1000000000L;

    std::function<Vec5(const Vec3&)> initial;
    std::function<Vec5(const Vec3&, double)> exact;  // optional
    std::array<BoundaryCondition, 6> bc;
    std::function<bool(int, const Vec3&)> static_fv;  // optional pinned-FV region
    bool static_wall_ring = false;  // pin the radial ring of elements on the body
    std::function<void(CaseDefinition&, int)> apply_mesh;  // sweep resizing

    bool has_exact() const { return static_cast<bool>(exact); }
};

inline Mesh build_case_mesh(const CaseDefinition& c, const SDBasis& basis) {
    if (c.mesh_kind == CaseDefinition::MeshKind::kCylinder)
        return build_cylinder_mesh(c.cyl_r0, c.cyl_a, c.cyl_b, c.nx, c.ny, basis);
    Mesh m = build_cartesian_mesh(c.bounds, c.nx, c.ny, c.nz, basis, c.periodic);
    return m;
}

inline std::unique_ptr<HybridSolver> make_solver(const CaseDefinition& c, int workers = 1) {
    SDBasis basis(kSub);
    Mesh mesh = build_case_mesh(c, basis);
    mesh.topo.invariant_dir = c.invariant;
    SchemeConfig scheme;
    scheme.mode = c.mode;
    scheme.solver.kind = c.solver;
    scheme.solver.ausm.Minf = c.ausm_minf;
    scheme.weno.tvd_enabled = c.tvd;
    scheme.weno.epsilon = c.weno_epsilon;
    scheme.detector = c.detector;
    auto solver = std::make_unique<HybridSolver>(std::move(mesh), c.gas, c.bc, scheme, workers);
    if (c.static_fv) solver->pin_static_fv(c.static_fv);
    if (c.static_wall_ring) {
        const MeshTopology& t = solver->mesh().topo;
        solver->pin_static_fv(
            [&t](int e, const Vec3&) { return e / (t.ny * t.nz) == 0; });
    }
    solver->set_initial(c.initial);
    return solver;
}

// ---- error norms ---------------------------------------------------------

struct ErrorNorms {
    double l1 = 0.0, l2 = 0.0, linf = 0.0;
};

/// Volume-weighted error norms of one conservative component against an
/// exact solution at time t. Weights are Gauss x |J| at SD solution points
/// and subcell volumes at FV cells, normalized by total measure.
inline ErrorNorms error_norms(const HybridSolver& solver,
                              const std::function<Vec5(const Vec3&, double)>& exact, double t,
                              int comp = kRho) {
    long double wsum = 0.0, l1 = 0.0, l2 = 0.0;
    double linf = 0.0;
    solver.for_each_dof([&](int, int, const Vec3& pos, double w, const Vec5& q) {
        double e = std::abs(q[comp] - exact(pos, t)[comp]);
        wsum += w;
        l1 += static_cast<long double>(w) * e;
        l2 += static_cast<long double>(w) * e * e;
        linf = std::max(linf, e);
    });
    ErrorNorms n;
    n.l1 = static_cast<double>(l1 / wsum);
    n.l2 = std::sqrt(static_cast<double>(l2 / wsum));
    n.linf = linf;
    return n;
}

inline double observed_order(double e_coarse, double e_fine) {
    return std::log2(e_coarse / e_fine);
}

// ---- case factories ------------------------------------------------------

/// Translating density sine wave (1D, dimensional air).
inline CaseDefinition case_sine() {
    CaseDefinition c;
    c.name = "sine";
    c.gas = {1.4, 288.18};
    const double rho0 = 1.179, p0 = kAtm, u0 = 100.0;
    c.bounds = {{0, 0, 0}, {1, 1, 1}};
    c.nx = 20;
    c.ny = c.nz = 1;
    c.periodic = {true, true, true};
    c.invariant = {false, true, true};
    c.mode = RunMode::kAllSD;
    c.dt = 5e-7;
    c.final_time = 2.0 * (1.0 / u0);  // two translation periods
    double c0 = std::sqrt(c.gas.gamma * p0 / rho0);
    c.ausm_minf = u0 / c0;
    c.detector.epsilon_s = 0.01;
    GasModel gas = c.gas;
    c.initial = [gas, rho0, p0, u0](const Vec3& x) {
        PrimitiveState s;
        s.rho = rho0 * (1.0 + 0.2 * std::sin(2.0 * M_PI * x[0]));
        s.u = u0;
        s.p = p0;
        return prim_to_cons(s, gas);
    };
    c.exact = [gas, rho0, p0, u0](const Vec3& x, double t) {
        PrimitiveState s;
        s.rho = rho0 * (1.0 + 0.2 * std::sin(2.0 * M_PI * (x[0] - u0 * t)));
        s.u = u0;
        s.p = p0;
        return prim_to_cons(s, gas);
    };
    for (auto& b : c.bc) b = BoundaryCondition::periodic();
    c.static_fv = [](int, const Vec3& ctr) { return ctr[0] > 0.5; };
    c.apply_mesh = [](CaseDefinition& cc, int m) { cc.nx = m; };
    return c;
}

/// Translating isentropic vortex (2D, nondimensional).
inline CaseDefinition case_vortex() {
    CaseDefinition c;
    c.name = "vortex";
    c.gas = {1.4, 1.0};
    c.bounds = {{0, 0, 0}, {10, 10, 1}};
    c.nx = c.ny = 20;
    c.nz = 1;
    c.periodic = {true, true, true};
    c.invariant = {false, false, true};
    c.mode = RunMode::kAllSD;
    c.dt = 2e-3;
    c.final_time = 20.0;  // two translation periods at u = 1
    c.ausm_minf = 1.0 / std::sqrt(1.4);
    c.detector.epsilon_s = 0.01;
    GasModel gas = c.gas;
    auto profile = [gas](double x, double y) {
        const double eps = 5.0, g = gas.gamma;
        double dx = x - 5.0, dy = y - 5.0;
        double r2 = dx * dx + dy * dy;
        double e1 = std::exp(0.5 * (1.0 - r2));
        double du = eps / (2.0 * M_PI) * e1 * (-dy);
        double dv = eps / (2.0 * M_PI) * e1 * dx;
        double dT = -(g - 1.0) * eps * eps / (8.0 * g * M_PI * M_PI) * std::exp(1.0 - r2);
        double T = 1.0 + dT;
        PrimitiveState s;
        s.rho = std::pow(T, 1.0 / (g - 1.0));
        s.p = s.rho * T;
        s.u = 1.0 + du;
        s.v = dv;
        return prim_to_cons(s, gas);
    };
    c.initial = [profile](const Vec3& x) { return profile(x[0], x[1]); };
    c.exact = [profile](const Vec3& x, double t) {
        double xr = std::fmod(x[0] - t, 10.0);
        if (xr < 0.0) xr += 10.0;
        return profile(xr, x[1]);
    };
    for (auto& b : c.bc) b = BoundaryCondition::periodic();
    c.static_fv = [](int, const Vec3& ctr) { return ctr[0] > 5.0; };
    c.apply_mesh = [](CaseDefinition& cc, int m) { cc.nx = cc.ny = m; };
    return c;
}

/// Sod shock tube (1D, dimensional air, 10:1 jumps).
inline CaseDefinition case_sod() {
    CaseDefinition c;
    c.name = "sod";
    c.gas = {1.4, 288.18};
    const double rho0 = 1.179, p0 = kAtm;
    c.bounds = {{0, 0, 0}, {1, 1, 1}};
    c.nx = 160;
    c.ny = c.nz = 1;
    c.periodic = {false, true, true};
    c.invariant = {false, true, true};
    c.mode = RunMode::kHybridDynamic;
    c.dt = 1e-6;
    c.final_time = 6e-4;
    c.detector.epsilon_s = 0.01;
    c.detector.on_density = true;
    c.detector.on_pressure = true;
    GasModel gas = c.gas;
    PrimitiveState left{10.0 * rho0, 0, 0, 0, 10.0 * p0};
    PrimitiveState right{rho0, 0, 0, 0, p0};
    c.initial = [gas, left, right](const Vec3& x) {
        return prim_to_cons(x[0] < 0.5 ? left : right, gas);
    };
    auto exact = std::make_shared<ExactRiemann>(left, right, gas.gamma);
    c.exact = [gas, exact, left, right](const Vec3& x, double t) {
        if (t <= 0.0) return prim_to_cons(x[0] < 0.5 ? left : right, gas);
        return prim_to_cons(exact->sample((x[0] - 0.5) / t), gas);
    };
    c.bc[kXMin] = BoundaryCondition::zero_gradient();
    c.bc[kXMax] = BoundaryCondition::zero_gradient();
    c.bc[kYMin] = c.bc[kYMax] = c.bc[kZMin] = c.bc[kZMax] = BoundaryCondition::periodic();
    c.apply_mesh = [](CaseDefinition& cc, int m) { cc.nx = m; };
    return c;
}

/// Shu-Osher shock / entropy-wave interaction (1D, nondimensional).
inline CaseDefinition case_shu_osher() {
    CaseDefinition c;
    c.name = "shu-osher";
    c.gas = {1.4, 1.0};
    c.bounds = {{-5, 0, 0}, {5, 1, 1}};
    c.nx = 160;
    c.ny = c.nz = 1;
    c.periodic = {false, true, true};
    c.invariant = {false, true, true};
    c.mode = RunMode::kHybridDynamic;
    c.dt = 1e-4;
    c.final_time = 1.8;
    c.detector.epsilon_s = 0.02;
    GasModel gas = c.gas;
    PrimitiveState left{3.857143, 2.269369, 0, 0, 10.33333};
    c.initial = [gas, left](const Vec3& x) {
        if (x[0] < -4.0) return prim_to_cons(left, gas);
        PrimitiveState s;
        s.rho = 1.0 + 0.2 * std::sin(5.0 * x[0]);
        s.p = 1.0;
        return prim_to_cons(s, gas);
    };
    c.bc[kXMin] = BoundaryCondition::dirichlet(prim_to_cons(left, gas));
    c.bc[kXMax] = BoundaryCondition::zero_gradient();
    c.bc[kYMin] = c.bc[kYMax] = c.bc[kZMin] = c.bc[kZMax] = BoundaryCondition::periodic();
    c.apply_mesh = [](CaseDefinition& cc, int m) { cc.nx = m; };
    return c;
}

/// Weak shock / vortex interaction (2D, stationary Mach 1.1 shock).
inline CaseDefinition case_shock_vortex() {
    CaseDefinition c;
    c.name = "shock-vortex";
    c.gas = {1.4, 1.0};
    c.bounds = {{0, 0, 0}, {2, 1, 1}};
    c.nx = 80;
    c.ny = 40;
    c.nz = 1;
    c.periodic = {false, false, true};
    c.invariant = {false, false, true};
    c.mode = RunMode::kHybridDynamic;
    c.dt = 1e-4;
    c.final_time = 0.8;
    c.detector.epsilon_s = 0.01;
    c.detector.on_density = false;
    c.detector.on_pressure = true;
    c.ausm_minf = 1.0;
    GasModel gas = c.gas;
    const double g = gas.gamma, M = 1.1;
    PrimitiveState left{1.0, M * std::sqrt(g), 0, 0, 1.0};
    PrimitiveState right = normal_shock_downstream(left, M, gas);
    const double eps = 0.3, rc = 0.05, alpha = 0.24, xc = 0.25, yc = 0.5;
    c.initial = [=](const Vec3& x) {
        if (x[0] >= 0.5) return prim_to_cons(right, gas);
        double dx = x[0] - xc, dy = x[1] - yc;
        double r = std::sqrt(dx * dx + dy * dy);
        double tau = r / rc;
        double ex = std::exp(alpha * (1.0 - tau * tau));
        double du = 0.0, dv = 0.0;
        if (r > 1e-14) {
            double sin_t = dy / r, cos_t = dx / r;
            du = eps * tau * ex * sin_t;
            dv = -eps * tau * ex * cos_t;
        }
        double dT = -(g - 1.0) * eps * eps * ex * ex / (4.0 * alpha * g);
        double T = 1.0 + dT;  // left-state temperature is 1
        PrimitiveState s;
        s.rho = std::pow(T, 1.0 / (g - 1.0));
        s.p = s.rho * T;
        s.u = left.u + du;
        s.v = dv;
        return prim_to_cons(s, gas);
    };
    c.bc[kXMin] = BoundaryCondition::dirichlet(prim_to_cons(left, gas));
    c.bc[kXMax] = BoundaryCondition::zero_gradient();
    c.bc[kYMin] = BoundaryCondition::reflective_wall();
    c.bc[kYMax] = BoundaryCondition::reflective_wall();
    c.bc[kZMin] = c.bc[kZMax] = BoundaryCondition::periodic();
    c.apply_mesh = [](CaseDefinition& cc, int m) {
        cc.nx = m;
        cc.ny = m / 2;
    };
    return c;
}

/// Double Mach reflection of a Mach 10 shock (2D).
inline CaseDefinition case_dmr() {
    CaseDefinition c;
    c.name = "dmr";
    c.gas = {1.4, 1.0};
    c.bounds = {{0, 0, 0}, {4, 1, 1}};
    c.nx = 80;
    c.ny = 20;
    c.nz = 1;
    c.periodic = {false, false, true};
    c.invariant = {false, false, true};
    c.mode = RunMode::kHybridDynamic;
    c.dt = 1e-5;
    c.final_time = 0.2;
    c.tvd = true;
    c.detector.epsilon_s = 0.02;
    c.detector.on_density = false;
    c.detector.on_pressure = true;
    c.ausm_minf = 1.0;
    GasModel gas = c.gas;
    const double g = gas.gamma, M = 10.0, x0 = 1.0 / 6.0;
    // Rankine-Hugoniot post-shock state for the 60-degree incident shock
    // into (rho, p) = (1.4, 1) at rest; the normal velocity jump is
    // 2 (M^2-1) / ((g+1) M) with unit upstream sound speed.
    const double un = 2.0 * (M * M - 1.0) / ((g + 1.0) * M);  // 8.25
    const double sin60 = std::sqrt(3.0) / 2.0, cos60 = 0.5;
    PrimitiveState pre{1.4, 0, 0, 0, 1.0};
    PrimitiveState post{8.0, un * sin60, -un * cos60, 0, 116.5};
    Vec5 qpre = prim_to_cons(pre, gas);
    Vec5 qpost = prim_to_cons(post, gas);
    c.initial = [gas, pre, post, x0](const Vec3& x) {
        bool behind = x[0] < x0 + x[1] / std::sqrt(3.0);
        return prim_to_cons(behind ? post : pre, gas);
    };
    c.bc[kXMin] = BoundaryCondition::dirichlet(qpost);
    c.bc[kXMax] = BoundaryCondition::zero_gradient();
    // bottom: post-shock state ahead of x0, reflective wall beyond
    c.bc[kYMin] = BoundaryCondition::dirichlet_fn(
        [qpost, x0](const Vec5& interior, const Vec3& pos, double, const Vec3& n_out) {
            if (pos[0] < x0) return qpost;
            double mn = interior[kMomX] * n_out[0] + interior[kMomY] * n_out[1] +
                        interior[kMomZ] * n_out[2];
            Vec5 gst = interior;
            gst[kMomX] -= 2.0 * mn * n_out[0];
            gst[kMomY] -= 2.0 * mn * n_out[1];
            gst[kMomZ] -= 2.0 * mn * n_out[2];
            return gst;
        });
    // top: exact motion of the incident shock
    c.bc[kYMax] = BoundaryCondition::dirichlet_fn(
        [qpre, qpost, x0](const Vec5&, const Vec3& pos, double t, const Vec3&) {
            double s = x0 + (1.0 + 20.0 * t) / std::sqrt(3.0);
            return pos[0] < s ? qpost : qpre;
        });
    c.bc[kZMin] = c.bc[kZMax] = BoundaryCondition::periodic();
    c.apply_mesh = [](CaseDefinition& cc, int m) {
        cc.nx = m;
        cc.ny = m / 4;
    };
    return c;
}

/// Mach 2 inviscid flow past a circular cylinder (curvilinear mesh).
inline CaseDefinition case_cylinder() {
    CaseDefinition c;
    c.name = "cylinder";
    c.gas = {1.4, 288.18};
    c.mesh_kind = CaseDefinition::MeshKind::kCylinder;
    c.cyl_r0 = 1.0;
    c.cyl_a = 3.0;
    c.cyl_b = 6.0;
    c.nx = 40;  // radial
    c.ny = 30;  // angular
    c.nz = 1;
    c.periodic = {false, false, true};
    c.invariant = {false, false, true};
    c.mode = RunMode::kHybridDynamic;
    c.cfl = 0.3;
    c.steady = true;
    c.steady_tol = 1e-8;
    c.max_steps = 200000;
    c.tvd = true;
    c.detector.epsilon_s = 0.05;
    c.detector.on_density = false;
    c.detector.on_pressure = true;
    c.ausm_minf = 1.0;
    GasModel gas = c.gas;
    PrimitiveState inflow{1.179, 693.31, 0, 0, kAtm};
    Vec5 qin = prim_to_cons(inflow, gas);
    c.initial = [gas, inflow](const Vec3&) { return prim_to_cons(inflow, gas); };
    c.bc[kXMin] = BoundaryCondition::reflective_wall();  // cylinder surface
    c.bc[kXMax] = BoundaryCondition::dirichlet(qin);     // outer ellipse (supersonic inflow)
    c.bc[kYMin] = BoundaryCondition::zero_gradient();    // downstream exits
    c.bc[kYMax] = BoundaryCondition::zero_gradient();
    c.bc[kZMin] = c.bc[kZMax] = BoundaryCondition::periodic();
    // FV elements statically embedded on the cylinder wall ring.
    c.static_wall_ring = true;
    c.apply_mesh = [](CaseDefinition& cc, int m) {
        cc.nx = m;
        cc.ny = (3 * m) / 4;
    };
    return c;
}

inline CaseDefinition make_case(const std::string& name) {
    if (name == "sine") return case_sine();
    if (name == "vortex") return case_vortex();
    if (name == "sod") return case_sod();
    if (name == "shu-osher") return case_shu_osher();
    if (name == "shock-vortex") return case_shock_vortex();
    if (name == "dmr") return case_dmr();
    if (name == "cylinder") return case_cylinder();
    throw ConfigError("unknown case '" + name + "'");
}

inline const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names = {"sine",         "vortex", "sod",     "shu-osher",
                                                   "shock-vortex", "dmr",    "cylinder"};
    return names;
}

}  // namespace sdfv
