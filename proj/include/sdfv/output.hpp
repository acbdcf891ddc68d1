#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdfv/config.hpp"
#include "sdfv/solver.hpp"

namespace sdfv {

// All data files carry 17 significant digits (full double round trip).
constexpr const char* kNumFmt = "%.17g";

struct DofSample {
    Vec3 pos;
    PrimitiveState prim;
    double sensor;
    int elem;
};

inline std::vector<DofSample> collect_dofs(const HybridSolver& solver) {
    std::vector<DofSample> rows;
    rows.reserve(static_cast<size_t>(solver.mesh().n_elements()) * kNodes);
    const auto& sensor = solver.last_sensor();
    solver.for_each_dof([&](int e, int, const Vec3& pos, double, const Vec5& q) {
        DofSample d;
        d.pos = pos;
        d.prim = cons_to_prim(q, solver.gas());
        d.sensor = sensor.empty() ? 0.0 : sensor[e];
        d.elem = e;
        rows.push_back(d);
    });
    return rows;
}

/// 1D profile: every solution DOF as (x, rho, u, p), sorted by x.
inline void write_profile_csv(const HybridSolver& solver, const std::string& path) {
    auto rows = collect_dofs(solver);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const DofSample& a, const DofSample& b) { return a.pos[0] < b.pos[0]; });
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_profile_csv: cannot open " + path);
    std::fprintf(f, "x,rho,u,p\n");
    for (const auto& r : rows) {
        std::fprintf(f, kNumFmt, r.pos[0]);
        std::fprintf(f, ",");
        std::fprintf(f, kNumFmt, r.prim.rho);
        std::fprintf(f, ",");
        std::fprintf(f, kNumFmt, r.prim.u);
        std::fprintf(f, ",");
        std::fprintf(f, kNumFmt, r.prim.p);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

/// Legacy VTK point cloud: coordinates of every solution DOF with
/// rho, u, v, p and the element sensor as point data.
inline void write_field_vtk(const HybridSolver& solver, const std::string& path) {
    auto rows = collect_dofs(solver);
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_field_vtk: cannot open " + path);
    std::fprintf(f, "# vtk DataFile Version 3.0\nsolution point data\nASCII\n");
    std::fprintf(f, "DATASET POLYDATA\nPOINTS %zu double\n", rows.size());
    for (const auto& r : rows) {
        std::fprintf(f, kNumFmt, r.pos[0]);
        std::fprintf(f, " ");
        std::fprintf(f, kNumFmt, r.pos[1]);
        std::fprintf(f, " ");
        std::fprintf(f, kNumFmt, r.pos[2]);
        std::fprintf(f, "\n");
    }
    std::fprintf(f, "POINT_DATA %zu\n", rows.size());
    auto scalar = [&](const char* name, auto get) {
        std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
        for (const auto& r : rows) {
            std::fprintf(f, kNumFmt, get(r));
            std::fprintf(f, "\n");
        }
    };
    scalar("rho", [](const DofSample& r) { return r.prim.rho; });
    scalar("u", [](const DofSample& r) { return r.prim.u; });
    scalar("v", [](const DofSample& r) { return r.prim.v; });
    scalar("p", [](const DofSample& r) { return r.prim.p; });
    scalar("sensor", [](const DofSample& r) { return r.sensor; });
    std::fclose(f);
}

/// Per-element detector map: indices, FV flag, max sensor value.
inline void write_sensor_csv(const HybridSolver& solver, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_sensor_csv: cannot open " + path);
    std::fprintf(f, "i,j,k,fv,sensor\n");
    const auto& topo = solver.mesh().topo;
    const auto& sensor = solver.last_sensor();
    for (int i = 0; i < topo.nx; ++i)
        for (int j = 0; j < topo.ny; ++j)
            for (int k = 0; k < topo.nz; ++k) {
                int e = topo.index(i, j, k);
                std::fprintf(f, "%d,%d,%d,%d,", i, j, k,
                             solver.kind(e) == ElemKind::kFV ? 1 : 0);
                std::fprintf(f, kNumFmt, sensor.empty() ? 0.0 : sensor[e]);
                std::fprintf(f, "\n");
            }
    std::fclose(f);
}

constexpr const char* kVersion = "0.1.0";

/// Everything needed to reproduce the run bit-for-bit.
inline nlohmann::json make_manifest(const RunConfig& cfg, const CaseDefinition& c) {
    nlohmann::json m;
    m["version"] = kVersion;
    m["config"] = serialize_config(cfg);
    m["case"] = c.name;
    m["mesh"] = {{"nx", c.nx}, {"ny", c.ny}, {"nz", c.nz}};
    m["mode"] = mode_name(c.mode);
    m["riemann_solver"] = solver_name(c.solver);
    m["gas"] = {{"gamma", c.gas.gamma}, {"R", c.gas.R}};
    m["time"] = {{"dt", c.dt}, {"cfl", c.cfl}, {"final_time", c.final_time},
                 {"steady", c.steady}, {"steady_tol", c.steady_tol}, {"max_steps", c.max_steps}};
    WENOConfig w;
    m["weno"] = {{"epsilon", c.weno_epsilon},
                 {"power", w.power},
                 {"ideal_weights", {w.ideal[0], w.ideal[1], w.ideal[2]}},
                 {"tvd_enabled", c.tvd},
                 {"tvd_alpha", w.tvd_alpha}};
    AusmParams a;
    m["ausm"] = {{"Kp", a.Kp}, {"Ku", a.Ku}, {"sigma", a.sigma}, {"beta", a.beta},
                 {"Minf", c.ausm_minf}};
    RKScheme rk;
    m["rk"] = {{"stages", rk.stages},
               {"A", {rk.A[0], rk.A[1], rk.A[2]}},
               {"B", {rk.B[0], rk.B[1], rk.B[2]}}};
    m["detector"] = {{"epsilon_s", c.detector.epsilon_s},
                     {"on_density", c.detector.on_density},
                     {"on_pressure", c.detector.on_pressure},
                     {"hysteresis_factor", c.detector.hysteresis_factor},
                     {"hysteresis_steps", c.detector.hysteresis_steps}};
    m["mortar_quadrature"] = MortarOperator{}.quadrature_rule;
    return m;
}

struct NormRow {
    std::string label;  // mesh label, e.g. "40x1x1"
    int resolution = 0;  // refinement parameter for order computation
    ErrorNorms norms;
};

/// Text table in the benchmark layout: mesh, L1, order, L2, order, Linf, order.
/// Orders are computed for grid-doubling rows and omitted (with a note)
/// otherwise.
inline std::string convergence_table(const std::vector<NormRow>& rows) {
    std::ostringstream o;
    o << "Mesh            L1 error      Order   L2 error      Order   Linf error    Order\n";
    bool nondoubling = false;
    for (size_t i = 0; i < rows.size(); ++i) {
        char buf[256];
        std::string o1 = "-", o2 = "-", o3 = "-";
        if (i > 0) {
            if (rows[i].resolution == 2 * rows[i - 1].resolution) {
                auto fmt = [](double v) {
                    char b[32];
                    std::snprintf(b, sizeof b, "%.2f", v);
                    return std::string(b);
                };
                o1 = fmt(observed_order(rows[i - 1].norms.l1, rows[i].norms.l1));
                o2 = fmt(observed_order(rows[i - 1].norms.l2, rows[i].norms.l2));
                o3 = fmt(observed_order(rows[i - 1].norms.linf, rows[i].norms.linf));
            } else {
                nondoubling = true;
            }
        }
        std::snprintf(buf, sizeof buf, "%-15s %-13.4e %-7s %-13.4e %-7s %-13.4e %-7s\n",
                      rows[i].label.c_str(), rows[i].norms.l1, o1.c_str(), rows[i].norms.l2,
                      o2.c_str(), rows[i].norms.linf, o3.c_str());
        o << buf;
    }
    if (nondoubling) o << "# orders omitted between non-doubling mesh pairs\n";
    return o.str();
}

// ---- case execution -------------------------------------------------------

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 config error, 2 solver abort
    RunStatus status;
    std::string out_dir;
    ErrorNorms norms;   // valid when the case has an exact solution
    bool has_norms = false;
};

/// Execute one configured run and write every artifact into cfg.output_dir.
inline RunResult run_case(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    RunResult result;
    CaseDefinition c = resolve_case(cfg);
    fs::create_directories(cfg.output_dir);
    result.out_dir = cfg.output_dir;
    auto out = [&](const std::string& name) { return cfg.output_dir + "/" + name; };

    auto wall0 = std::chrono::steady_clock::now();
    nlohmann::json manifest = make_manifest(cfg, c);

    auto solver = make_solver(c, cfg.workers);

    std::FILE* log = std::fopen(out("progress.log").c_str(), "w");
    if (!log) throw std::runtime_error("run_case: cannot open progress log");
    std::fprintf(log, "# step time dt residual_norm fv_fraction\n");

    auto log_step = [&](const HybridSolver& s, long step) {
        bool due = cfg.cadence > 0 && step % cfg.cadence == 0;
        if (due || step == 1) {
            const auto& h = s;
            std::fprintf(log, "%ld ", step);
            std::fprintf(log, kNumFmt, h.time());
            std::fprintf(log, " ");
            std::fprintf(log, kNumFmt, 0.0);
            std::fprintf(log, " ");
            std::fprintf(log, kNumFmt, 0.0);
            std::fprintf(log, " ");
            std::fprintf(log, kNumFmt, h.fv_fraction());
            std::fprintf(log, "\n");
            std::fflush(log);
        }
        if (due && cfg.write_sensor && s.scheme().mode == RunMode::kHybridDynamic)
            write_sensor_csv(s, out("sensor_step" + std::to_string(step) + ".csv"));
    };

    StopCondition stop;
    if (c.steady)
        stop = StopCondition::steady(c.steady_tol, c.max_steps);
    else
        stop = StopCondition::final_time_of(c.final_time, c.max_steps);
    HybridSolver::TimeControl tc{c.dt, c.cfl};

    RunStatus status = solver->run_until(stop, tc, log_step);
    result.status = status;

    // rewrite the progress log from the recorded history (accurate columns)
    std::fclose(log);
    log = std::fopen(out("progress.log").c_str(), "w");
    std::fprintf(log, "# step time dt residual_norm fv_fraction\n");
    for (const auto& r : status.history) {
        if (cfg.cadence > 0 ? (r.step % cfg.cadence == 0 || r.step == status.history.back().step)
                            : (r.step == status.history.back().step)) {
            std::fprintf(log, "%ld ", r.step);
            std::fprintf(log, kNumFmt, r.time);
            std::fprintf(log, " ");
            std::fprintf(log, kNumFmt, r.dt);
            std::fprintf(log, " ");
            std::fprintf(log, kNumFmt, r.residual_norm);
            std::fprintf(log, " ");
            std::fprintf(log, kNumFmt, r.fv_fraction);
            std::fprintf(log, "\n");
        }
    }
    std::fclose(log);

    if (!status.ok) {
        // failure artifact: last-good snapshot plus diagnostics
        nlohmann::json fail;
        fail["error"] = status.message;
        fail["steps_completed"] = status.steps;
        fail["time"] = solver->time();
        std::ofstream(out("failure.json")) << fail.dump(2) << "\n";
        write_profile_csv(*solver, out("failure_profile.csv"));
        manifest["status"] = "aborted";
    } else {
        manifest["status"] = status.message.empty() ? "completed" : status.message;
    }

    if (cfg.write_profile) write_profile_csv(*solver, out("profile_final.csv"));
    if (cfg.write_field && solver->mesh().topo.nz == 1)
        write_field_vtk(*solver, out("field_final.vtk"));
    if (cfg.write_sensor && (c.mode == RunMode::kHybridDynamic || c.mode == RunMode::kHybridStatic))
        write_sensor_csv(*solver, out("sensor_final.csv"));

    if (status.ok && c.has_exact()) {
        result.norms = error_norms(*solver, c.exact, solver->time());
        result.has_norms = true;
        nlohmann::json nj;
        nj["case"] = c.name;
        nj["mesh"] = {{"nx", c.nx}, {"ny", c.ny}, {"nz", c.nz}};
        nj["resolution"] = c.nx;
        nj["field"] = "density";
        nj["L1"] = result.norms.l1;
        nj["L2"] = result.norms.l2;
        nj["Linf"] = result.norms.linf;
        std::ofstream(out("norms.json")) << nj.dump(2) << "\n";
        std::ofstream tab(out("error_table.txt"));
        NormRow row{std::to_string(c.nx) + "x" + std::to_string(c.ny) + "x" + std::to_string(c.nz),
                    c.nx, result.norms};
        tab << convergence_table({row});
    }

    auto wall1 = std::chrono::steady_clock::now();
    manifest["wall_time_seconds"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(wall1 - wall0).count() / 1000.0;
    manifest["steps"] = status.steps;
    std::ofstream(out("manifest.json")) << manifest.dump(2) << "\n";

    result.exit_code = status.ok ? 0 : 2;
    return result;
}

/// The self-generated fine-grid reference profile (density at the subcell
/// points of an all-FV run). Regeneration is deterministic; the cached file
/// is reused when present.
inline std::vector<std::pair<double, double>> shu_osher_reference(const std::string& path,
                                                                  int workers = 1) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) {
        CaseDefinition c = make_case("shu-osher");
        c.apply_mesh(c, 600);  // 600 elements = 3000 FV cells across [-5, 5]
        c.mode = RunMode::kAllFV;
        c.dt = 0.0;
        c.cfl = 0.3;
        auto solver = make_solver(c, workers);
        RunStatus st = solver->run_until(StopCondition::final_time_of(c.final_time),
                                         {c.dt, c.cfl});
        if (!st.ok) throw SolverAbort("reference generation failed: " + st.message);
        if (!path.empty() && path.find('/') != std::string::npos)
            fs::create_directories(fs::path(path).parent_path());
        write_profile_csv(*solver, path);
    }
    std::ifstream f(path);
    if (!f) throw std::runtime_error("shu_osher_reference: cannot open " + path);
    std::string line;
    std::getline(f, line);  // header
    std::vector<std::pair<double, double>> rows;
    while (std::getline(f, line)) {
        double x, rho;
        if (std::sscanf(line.c_str(), "%lf,%lf", &x, &rho) == 2) rows.push_back({x, rho});
    }
    return rows;
}

/// Run a mesh sweep of one case and write the combined convergence table.
inline std::vector<NormRow> run_sweep(const RunConfig& base, const std::vector<int>& meshes) {
    std::vector<NormRow> rows;
    for (int m : meshes) {
        RunConfig cfg = base;
        cfg.nx = m;
        cfg.ny.reset();
        cfg.nz.reset();
        cfg.output_dir = base.output_dir + "/m" + std::to_string(m);
        RunResult r = run_case(cfg);
        if (r.exit_code != 0) throw SolverAbort("sweep member failed: " + r.status.message);
        if (!r.has_norms) throw ConfigError("sweep requires a case with an exact solution");
        CaseDefinition c = resolve_case(cfg);
        rows.push_back({std::to_string(c.nx) + "x" + std::to_string(c.ny) + "x" +
                            std::to_string(c.nz),
                        m, r.norms});
    }
    std::ofstream(base.output_dir + "/convergence_table.txt") << convergence_table(rows);
    return rows;
}

}  // namespace sdfv
