#pragma once

#include <algorithm>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "sdfv/common.hpp"
#include "sdfv/detector.hpp"
#include "sdfv/euler.hpp"
#include "sdfv/mesh.hpp"
#include "sdfv/mortar.hpp"
#include "sdfv/riemann.hpp"
#include "sdfv/sd_basis.hpp"
#include "sdfv/weno.hpp"

namespace sdfv {

enum class ElemKind : std::uint8_t { kSD = 0, kFV = 1 };

enum class BCKind { kPeriodic, kDirichlet, kDirichletFn, kZeroGradient, kReflectiveWall };

struct BoundaryCondition {
    BCKind kind = BCKind::kPeriodic;
    Vec5 fixed = {0, 0, 0, 0, 0};
    // ghost builder for time/position dependent conditions:
    // (interior state, position, time, outward unit normal) -> ghost state
    std::function<Vec5(const Vec5&, const Vec3&, double, const Vec3&)> fn;

    static BoundaryCondition periodic() { return {}; }
    static BoundaryCondition dirichlet(const Vec5& q) {
        BoundaryCondition b;
        b.kind = BCKind::kDirichlet;
        b.fixed = q;
        return b;
    }
    static BoundaryCondition dirichlet_fn(
        std::function<Vec5(const Vec5&, const Vec3&, double, const Vec3&)> f) {
        BoundaryCondition b;
        b.kind = BCKind::kDirichletFn;
        b.fn = std::move(f);
        return b;
    }
    static BoundaryCondition zero_gradient() {
        BoundaryCondition b;
        b.kind = BCKind::kZeroGradient;
        return b;
    }
    static BoundaryCondition reflective_wall() {
        BoundaryCondition b;
        b.kind = BCKind::kReflectiveWall;
        return b;
    }

    Vec5 ghost(const Vec5& interior, const Vec3& pos, double t, const Vec3& n_out) const {
        switch (kind) {
            case BCKind::kDirichlet:
                return fixed;
            case BCKind::kDirichletFn:
                return fn(interior, pos, t, n_out);
            case BCKind::kZeroGradient:
                return interior;
            case BCKind::kReflectiveWall: {
                double mn = interior[kMomX] * n_out[0] + interior[kMomY] * n_out[1] +
                            interior[kMomZ] * n_out[2];
                Vec5 g = interior;
                g[kMomX] -= 2.0 * mn * n_out[0];
                g[kMomY] -= 2.0 * mn * n_out[1];
                g[kMomZ] -= 2.0 * mn * n_out[2];
                return g;
            }
            case BCKind::kPeriodic:
                break;
        }
        throw std::logic_error("BoundaryCondition::ghost called for a periodic face");
    }
};

enum class RunMode { kAllSD, kAllFV, kHybridStatic, kHybridDynamic };

inline RunMode mode_from_name(const std::string& s) {
    if (s == "all-sd") return RunMode::kAllSD;
    if (s == "all-fv") return RunMode::kAllFV;
    if (s == "hybrid-static") return RunMode::kHybridStatic;
    if (s == "hybrid-dynamic") return RunMode::kHybridDynamic;
    throw ConfigError("unknown mode '" + s + "'");
}

inline std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::kAllSD: return "all-sd";
        case RunMode::kAllFV: return "all-fv";
        case RunMode::kHybridStatic: return "hybrid-static";
        case RunMode::kHybridDynamic: return "hybrid-dynamic";
    }
    return "?";
}

struct SchemeConfig {
    RunMode mode = RunMode::kHybridDynamic;
    RiemannSolver solver;
    WENOConfig weno;
    DetectorConfig detector;
};

/// Low-storage three-stage third-order Runge-Kutta coefficients
/// (Williamson 2N form; A_1 = 0).
struct RKScheme {
    int stages = 3;
    std::array<double, 3> A = {0.0, -5.0 / 9.0, -153.0 / 128.0};
    std::array<double, 3> B = {1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0};
    std::array<double, 3> C = {0.0, 1.0 / 3.0, 3.0 / 4.0};  // stage times
};

/// One low-storage RK step of du/dt = L(u, t) on a flat state vector;
/// `reg` is the single extra register (zero-initialized by the caller).
template <typename ResidualFn>
inline void low_storage_rk3_step(std::vector<double>& u, std::vector<double>& reg, double t,
                                 double dt, const ResidualFn& L) {
    const RKScheme rk;
    std::vector<double> res(u.size());
    for (int s = 0; s < rk.stages; ++s) {
        L(u, t + rk.C[s] * dt, res);
        for (size_t i = 0; i < u.size(); ++i) {
            reg[i] = rk.A[s] * reg[i] + dt * res[i];
            u[i] += rk.B[s] * reg[i];
        }
    }
}

struct StepRecord {
    long step;
    double time;
    double dt;
    double residual_norm;  // density-residual L2, normalized by the first step
    double fv_fraction;
};

struct StopCondition {
    enum class Kind { kFinalTime, kStepCount, kSteady } kind = Kind::kFinalTime;
    double final_time = 0.0;
    long max_steps = 1000000000L;
    double steady_tol = 1e-8;

    static StopCondition final_time_of(double t, long cap = 1000000000L) {
        StopCondition s;
        s.kind = Kind::kFinalTime;
        s.final_time = t;
        s.max_steps = cap;
        return s;
    }
    static StopCondition steps(long n) {
        StopCondition s;
        s.kind = Kind::kStepCount;
        s.max_steps = n;
        return s;
    }
    static StopCondition steady(double tol, long cap) {
        StopCondition s;
        s.kind = Kind::kSteady;
        s.steady_tol = tol;
        s.max_steps = cap;
        return s;
    }
};

struct RunStatus {
    bool ok = true;
    bool steady_reached = false;
    std::string message;
    long steps = 0;
    std::vector<StepRecord> history;
};

constexpr int kNodes = 125;       // per-element solution DOF (n^3 = kSub^3)
constexpr int kFacePts = 25;      // nodal points per element face
constexpr int kComp = 5;

class HybridSolver {
public:
    HybridSolver(Mesh mesh, GasModel gas, std::array<BoundaryCondition, 6> bc, SchemeConfig scheme,
                 int workers = 1)
        : mesh_(std::move(mesh)),
          basis_(kSub),
          gas_(gas),
          bc_(std::move(bc)),
          scheme_(scheme),
          workers_(std::max(1, workers)) {
        const int ne = mesh_.n_elements();
        kind_.assign(ne, ElemKind::kSD);
        static_fv_.assign(ne, 0);
        steady_count_.assign(ne, 0);
        sensor_.assign(ne, 0.0);
        flagged_.assign(ne, 0);
        qt_.assign(static_cast<size_t>(ne) * kNodes * kComp, 0.0);
        res_.assign(qt_.size(), 0.0);
        dreg_.assign(qt_.size(), 0.0);
        snapshot_ = qt_;
        trace_.assign(static_cast<size_t>(ne) * 6 * kFacePts * kComp, 0.0);
        ghost_.assign(static_cast<size_t>(ne) * 6 * 2 * kFacePts * kComp, 0.0);
        fflux_.assign(mesh_.faces.size() * 2ul * kFacePts * kComp, 0.0);
        mortar_op_ = build_mortar_operator(FaceSpace::sd_face(basis_), FaceSpace::fv_face());
        for (int d = 0; d < 3; ++d) {
            if (mesh_.topo.invariant_dir[d] &&
                !(mesh_.topo.count(d) == 1 && mesh_.topo.periodic[d]))
                throw std::logic_error("invariant_dir requires a single periodic element layer");
        }
        apply_mode_kinds();
    }

    const Mesh& mesh() const { return mesh_; }
    const SDBasis& basis() const { return basis_; }
    const GasModel& gas() const { return gas_; }
    const SchemeConfig& scheme() const { return scheme_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }
    long step_count() const { return step_; }
    ElemKind kind(int e) const { return kind_[e]; }
    const std::vector<double>& state() const { return qt_; }
    std::vector<double>& state() { return qt_; }
    const std::vector<double>& last_sensor() const { return sensor_; }
    const std::vector<std::uint8_t>& last_flags() const { return flagged_; }
    const std::vector<std::uint8_t>& static_fv() const { return static_fv_; }

    /// Mark elements permanently FV (hybrid-static region, wall rings).
    void pin_static_fv(const std::function<bool(int, const Vec3&)>& pred) {
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            Vec3 c = mesh_.elems[e].geom.map(0.5, 0.5, 0.5);
            if (pred(e, c)) static_fv_[e] = 1;
        }
        apply_mode_kinds();
    }

    /// Physical position of one DOF (SD solution point or FV subcell center).
    Vec3 dof_coord(int e, int p) const {
        Vec3 r = (kind_[e] == ElemKind::kSD) ? sol_ref_coord(basis_, p) : sub_ref_coord(p);
        return mesh_.elems[e].geom.map(r[0], r[1], r[2]);
    }

    void set_initial(const std::function<Vec5(const Vec3&)>& ic) {
        const int ne = mesh_.n_elements();
        parallel_for(ne, workers_, [&](int e) {
            const auto& met = *mesh_.elems[e].metrics;
            double* qt = elem_qt(qt_.data(), e);
            bool sd = kind_[e] == ElemKind::kSD;
            for (int p = 0; p < kNodes; ++p) {
                Vec5 q = ic(dof_coord(e, p));
                double jac = sd ? met.sol_jac[p] : met.sub_jc[p];
                for (int c = 0; c < kComp; ++c) qt[p * kComp + c] = q[c] * jac;
            }
        });
        time_ = 0.0;
        step_ = 0;
        res_norm_ref_ = -1.0;
        std::fill(steady_count_.begin(), steady_count_.end(), 0);
    }

    /// Recoverable physical state of one DOF.
    Vec5 dof_state(int e, int p) const {
        const auto& met = *mesh_.elems[e].metrics;
        const double* qt = elem_qt(qt_.data(), e);
        double s = (kind_[e] == ElemKind::kSD) ? met.sol_inv_jac[p] : met.sub_inv_jc[p];
        Vec5 q;
        for (int c = 0; c < kComp; ++c) q[c] = qt[p * kComp + c] * s;
        return q;
    }

    /// Enumerate DOF in fixed element/point order:
    /// fn(elem, point, position, volume weight, physical state).
    void for_each_dof(const std::function<void(int, int, const Vec3&, double, const Vec5&)>& fn) const {
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const auto& met = *mesh_.elems[e].metrics;
            for (int p = 0; p < kNodes; ++p) {
                double w = (kind_[e] == ElemKind::kSD) ? met.sol_wjac[p] : met.sub_vol[p];
                fn(e, p, dof_coord(e, p), w, dof_state(e, p));
            }
        }
    }

    /// Transformed-content totals per component (fixed-order long double sum).
    Vec5 totals() const {
        long double acc[5] = {0, 0, 0, 0, 0};
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const auto& met = *mesh_.elems[e].metrics;
            const double* qt = elem_qt(qt_.data(), e);
            if (kind_[e] == ElemKind::kSD) {
                for (int p = 0; p < kNodes; ++p) {
                    long double w = static_cast<long double>(met.sol_wjac[p]) * met.sol_inv_jac[p];
                    for (int c = 0; c < kComp; ++c) acc[c] += w * qt[p * kComp + c];
                }
            } else {
                const long double w = 1.0L / kNodes;
                for (int p = 0; p < kNodes; ++p)
                    for (int c = 0; c < kComp; ++c) acc[c] += w * qt[p * kComp + c];
            }
        }
        Vec5 out;
        for (int c = 0; c < kComp; ++c) out[c] = static_cast<double>(acc[c]);
        return out;
    }

    double fv_fraction() const {
        int nfv = 0;
        for (auto k : kind_) nfv += (k == ElemKind::kFV);
        return static_cast<double>(nfv) / static_cast<double>(kind_.size());
    }

    /// Time step from the CFL number, based on the FV-subcell grid size.
    double compute_dt(double cfl) const {
        double dt = 1e300;
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const auto& met = *mesh_.elems[e].metrics;
            double smax = 0.0;
            for (int p = 0; p < kNodes; ++p) {
                PrimitiveState s = cons_to_prim(dof_state(e, p), gas_);
                double v = std::sqrt(s.u * s.u + s.v * s.v + s.w * s.w) + sound_speed(s, gas_);
                smax = std::max(smax, v);
            }
            for (int d = 0; d < 3; ++d) {
                if (mesh_.topo.invariant_dir[d]) continue;
                double h = met.min_spacing[d] / kSub;
                dt = std::min(dt, h / smax);
            }
        }
        return cfl * dt;
    }

    /// Evaluate L(qt) into res (the right-hand side dQt/dt).
    void compute_residual(const std::vector<double>& qt, double t, std::vector<double>& res) {
        phase_traces(qt, t);
        phase_face_fluxes(qt, t);
        phase_assemble(qt, res);
    }

    /// One low-storage RK step; adaptation (dynamic mode) runs first.
    void ssp_rk3_step(double dt) {
        if (scheme_.mode == RunMode::kHybridDynamic) adapt();
        const RKScheme rk;
        for (int s = 0; s < rk.stages; ++s) {
            compute_residual(qt_, time_ + rk.C[s] * dt, res_);
            const double a = rk.A[s], b = rk.B[s];
            parallel_for(mesh_.n_elements(), workers_, [&](int e) {
                double* d = elem_qt(dreg_.data(), e);
                double* q = elem_qt(qt_.data(), e);
                const double* r = elem_qt(res_.data(), e);
                for (int i = 0; i < kNodes * kComp; ++i) {
                    d[i] = a * d[i] + dt * r[i];
                    q[i] += b * d[i];
                }
            });
            check_valid(s);
        }
        time_ += dt;
        ++step_;
    }

    struct TimeControl {
        double fixed_dt = 0.0;  // > 0: constant step
        double cfl = 0.0;       // used when fixed_dt == 0
    };

    RunStatus run_until(const StopCondition& stop, const TimeControl& tc,
                        const std::function<void(const HybridSolver&, long)>& on_step = nullptr) {
        RunStatus status;
        const double t_end = stop.final_time;
        std::vector<double> window;
        while (true) {
            if (stop.kind == StopCondition::Kind::kFinalTime && time_ >= t_end * (1.0 - 1e-14)) break;
            if (status.steps >= stop.max_steps) break;
            double dt = tc.fixed_dt > 0.0 ? tc.fixed_dt : compute_dt(tc.cfl);
            if (stop.kind == StopCondition::Kind::kFinalTime) dt = std::min(dt, t_end - time_);
            snapshot_ = qt_;
            try {
                ssp_rk3_step(dt);
            } catch (const SolverAbort& e) {
                qt_.swap(snapshot_);  // keep the last good state
                status.ok = false;
                status.message = e.what();
                return status;
            }
            ++status.steps;
            StepRecord rec;
            rec.step = step_;
            rec.time = time_;
            rec.dt = dt;
            rec.residual_norm = residual_norm();
            rec.fv_fraction = fv_fraction();
            status.history.push_back(rec);
            if (on_step) on_step(*this, step_);
            if (stop.kind == StopCondition::Kind::kSteady) {
                window.push_back(rec.residual_norm);
                if (rec.residual_norm < stop.steady_tol) {
                    status.steady_reached = true;
                    status.message = "steady: residual below tolerance";
                    break;
                }
                // Stagnation: windowed mean stopped moving.
                const size_t w = 2000;
                if (window.size() >= 3 * w && status.steps > 6000) {
                    double m1 = 0, m2 = 0;
                    for (size_t i = window.size() - w; i < window.size(); ++i) m1 += window[i];
                    for (size_t i = window.size() - 2 * w; i < window.size() - w; ++i) m2 += window[i];
                    m1 /= w;
                    m2 /= w;
                    if (std::abs(m1 - m2) < 1e-3 * std::max(m1, m2)) {
                        status.steady_reached = true;
                        status.message = "steady: residual stagnated";
                        break;
                    }
                }
            }
        }
        return status;
    }

    /// Density-residual L2 norm of the last stage, normalized by the value
    /// recorded on the first call after set_initial.
    double residual_norm() {
        long double acc = 0.0;
        const int ne = mesh_.n_elements();
        for (int e = 0; e < ne; ++e) {
            const double* r = elem_qt(res_.data(), e);
            for (int p = 0; p < kNodes; ++p) acc += static_cast<long double>(r[p * kComp]) * r[p * kComp];
        }
        double norm = std::sqrt(static_cast<double>(acc) / (static_cast<double>(ne) * kNodes));
        if (res_norm_ref_ < 0.0 && norm > 0.0) res_norm_ref_ = norm;
        return res_norm_ref_ > 0.0 ? norm / res_norm_ref_ : norm;
    }

    /// Detector pass + element kind transitions (hybrid-dynamic).
    void adapt() {
        const int ne = mesh_.n_elements();
        compute_means();
        int nf = scheme_.detector.n_fields();
        auto mean = [&](int e, int f) { return mean_field_[f][e]; };
        auto ghost_mean = [&](int e, int d, int side, int f) {
            return boundary_ghost_mean(e, d, side, f);
        };
        MarkResult mr =
            mark_elements(mesh_.topo, nf, mean, ghost_mean, scheme_.detector.epsilon_s);
        sensor_ = mr.max_sensor;
        flagged_ = mr.flagged;

        std::vector<int> to_embed, to_retract;
        for (int e = 0; e < ne; ++e) {
            bool fv = kind_[e] == ElemKind::kFV;
            if (!fv && (mr.flagged[e] || static_fv_[e])) to_embed.push_back(e);
            if (fv && !static_fv_[e]) {
                if (sensor_[e] < scheme_.detector.hysteresis_factor * scheme_.detector.epsilon_s)
                    ++steady_count_[e];
                else
                    steady_count_[e] = 0;
                if (!mr.flagged[e] && steady_count_[e] >= scheme_.detector.hysteresis_steps) {
                    to_retract.push_back(e);
                    steady_count_[e] = 0;
                }
            }
        }
        parallel_for(static_cast<int>(to_embed.size()), workers_, [&](int i) {
            int e = to_embed[i];
            std::array<double, kNodes * kComp> tmp;
            embed_fv(elem_qt(qt_.data(), e), *mesh_.elems[e].metrics, basis_, tmp.data());
            std::memcpy(elem_qt(qt_.data(), e), tmp.data(), sizeof(tmp));
        });
        parallel_for(static_cast<int>(to_retract.size()), workers_, [&](int i) {
            int e = to_retract[i];
            std::array<double, kNodes * kComp> tmp;
            retract_to_sd(elem_qt(qt_.data(), e), *mesh_.elems[e].metrics, basis_, tmp.data());
            std::memcpy(elem_qt(qt_.data(), e), tmp.data(), sizeof(tmp));
        });
        for (int e : to_embed) kind_[e] = ElemKind::kFV;
        for (int e : to_retract) kind_[e] = ElemKind::kSD;
    }

private:
    static double* elem_qt(double* base, int e) { return base + static_cast<size_t>(e) * kNodes * kComp; }
    static const double* elem_qt(const double* base, int e) {
        return base + static_cast<size_t>(e) * kNodes * kComp;
    }

    double* trace_ptr(int e, int face) {
        return trace_.data() + ((static_cast<size_t>(e) * 6 + face) * kFacePts) * kComp;
    }
    double* ghost_ptr(int e, int face) {
        return ghost_.data() + ((static_cast<size_t>(e) * 6 + face) * 2 * kFacePts) * kComp;
    }
    double* fflux_ptr(size_t face, int slot) {
        return fflux_.data() + (face * 2 + slot) * kFacePts * kComp;
    }

    static int node_index(int d, int i, int a, int b) {
        if (d == 0) return (i * kSub + a) * kSub + b;
        if (d == 1) return (a * kSub + i) * kSub + b;
        return (a * kSub + b) * kSub + i;
    }

    void apply_mode_kinds() {
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            switch (scheme_.mode) {
                case RunMode::kAllSD: kind_[e] = ElemKind::kSD; break;
                case RunMode::kAllFV: kind_[e] = ElemKind::kFV; break;
                case RunMode::kHybridStatic:
                case RunMode::kHybridDynamic:
                    kind_[e] = static_fv_[e] ? ElemKind::kFV : ElemKind::kSD;
                    break;
            }
        }
    }

    // ---- residual pipeline ---------------------------------------------

    void phase_traces(const std::vector<double>& qt, double t) {
        parallel_for(mesh_.n_elements(), workers_, [&](int e) {
            if (kind_[e] == ElemKind::kSD)
                sd_element_traces(qt, e);
            else
                fv_element_traces(qt, e, t);
        });
    }

    void sd_element_traces(const std::vector<double>& qt, int e) {
        const auto& met = *mesh_.elems[e].metrics;
        const double* q = elem_qt(qt.data(), e);
        for (int d = 0; d < 3; ++d) {
            if (mesh_.topo.invariant_dir[d]) continue;
            for (int side = 0; side < 2; ++side) {
                const auto& ef = basis_.sol_at_face[side];
                double* tr = trace_ptr(e, 2 * d + side);
                for (int a = 0; a < kSub; ++a)
                    for (int b = 0; b < kSub; ++b) {
                        double acc[kComp] = {0, 0, 0, 0, 0};
                        for (int i = 0; i < kSub; ++i) {
                            int node = node_index(d, i, a, b);
                            double w = ef[i] * met.sol_inv_jac[node];
                            const double* qp = q + node * kComp;
                            for (int c = 0; c < kComp; ++c) acc[c] += w * qp[c];
                        }
                        double* out = tr + (a * kSub + b) * kComp;
                        for (int c = 0; c < kComp; ++c) out[c] = acc[c];
                    }
            }
        }
    }

    // Physical cell states of one FV line including two ghost layers:
    // line[0..8] maps to depth indices -2..6.
    void fv_gather_line(const std::vector<double>& qt, int e, int d, int a, int b,
                        Vec5 line[9]) const {
        const auto& met = *mesh_.elems[e].metrics;
        const double* q = elem_qt(qt.data(), e);
        for (int i = 0; i < kSub; ++i) {
            int node = node_index(d, i, a, b);
            double s = met.sub_inv_jc[node];
            for (int c = 0; c < kComp; ++c) line[2 + i][c] = q[node * kComp + c] * s;
        }
        const double* gl = ghost_.data() + ((static_cast<size_t>(e) * 6 + 2 * d) * 2 * kFacePts) * kComp;
        const double* gh =
            ghost_.data() + ((static_cast<size_t>(e) * 6 + 2 * d + 1) * 2 * kFacePts) * kComp;
        int fp = (a * kSub + b) * kComp;
        for (int c = 0; c < kComp; ++c) {
            line[1][c] = gl[fp + c];                          // layer 0, adjacent
            line[0][c] = gl[kFacePts * kComp + fp + c];       // layer 1
            line[7][c] = gh[fp + c];
            line[8][c] = gh[kFacePts * kComp + fp + c];
        }
    }

    void fv_element_traces(const std::vector<double>& qt, int e, double t) {
        const auto& met = *mesh_.elems[e].metrics;
        // ghost layers first
        for (int d = 0; d < 3; ++d) {
            if (mesh_.topo.invariant_dir[d]) continue;
            for (int side = 0; side < 2; ++side) {
                int face = 2 * d + side;
                double* gp = ghost_ptr(e, face);
                int nb = mesh_.neighbor(e, d, side == 0 ? -1 : +1);
                if (nb >= 0 && kind_[nb] == ElemKind::kSD) {
                    auto gh = sd_ghost_subcell_values(elem_qt(qt.data(), nb),
                                                      mesh_.elems[nb].metrics->sol_inv_jac.data(),
                                                      basis_, d, /*high_side=*/side == 0);
                    std::memcpy(gp, gh.data()->data(), sizeof(double) * 2 * kFacePts * kComp);
                } else if (nb >= 0) {
                    const auto& nmet = *mesh_.elems[nb].metrics;
                    const double* nq = elem_qt(qt.data(), nb);
                    for (int l = 0; l < 2; ++l) {
                        int depth = (side == 0) ? (kSub - 1 - l) : l;
                        for (int a = 0; a < kSub; ++a)
                            for (int b = 0; b < kSub; ++b) {
                                int node = node_index(d, depth, a, b);
                                double s = nmet.sub_inv_jc[node];
                                double* out = gp + ((l * kSub + a) * kSub + b) * kComp;
                                for (int c = 0; c < kComp; ++c) out[c] = nq[node * kComp + c] * s;
                            }
                    }
                } else {
                    fill_bc_ghosts(qt, e, d, side, t, gp);
                }
            }
        }
        // one-sided boundary-face states
        Vec5 line[9];
        for (int d = 0; d < 3; ++d) {
            if (mesh_.topo.invariant_dir[d]) continue;
            double* tr_lo = trace_ptr(e, 2 * d);
            double* tr_hi = trace_ptr(e, 2 * d + 1);
            for (int a = 0; a < kSub; ++a)
                for (int b = 0; b < kSub; ++b) {
                    fv_gather_line(qt, e, d, a, b, line);
                    // low face (between ghost cell -1 and cell 0): right state
                    {
                        const Vec3& row = met.sub_face_row[d][flux_idx(kSub, 0, a, b)];
                        Eigensystem es = eigensystem_at(roe_average(
                            prim_guard(line[1]), prim_guard(line[2]), gas_), row, gas_);
                        Vec5 cells[5] = {line[4], line[3], line[2], line[1], line[0]};
                        Vec5 qR = char_face_state(es, cells, scheme_.weno);
                        if (scheme_.weno.tvd_enabled)
                            for (int m = 0; m < kComp; ++m)
                                qR[m] = tvd_limit(line[3][m], line[2][m], line[1][m], qR[m],
                                                  scheme_.weno.tvd_alpha);
                        double* out = tr_lo + (a * kSub + b) * kComp;
                        for (int c = 0; c < kComp; ++c) out[c] = qR[c];
                    }
                    // high face (between cell 4 and ghost cell 5): left state
                    {
                        const Vec3& row = met.sub_face_row[d][flux_idx(kSub, kSub, a, b)];
                        Eigensystem es = eigensystem_at(roe_average(
                            prim_guard(line[6]), prim_guard(line[7]), gas_), row, gas_);
                        Vec5 cells[5] = {line[4], line[5], line[6], line[7], line[8]};
                        Vec5 qL = char_face_state(es, cells, scheme_.weno);
                        if (scheme_.weno.tvd_enabled)
                            for (int m = 0; m < kComp; ++m)
                                qL[m] = tvd_limit(line[5][m], line[6][m], line[7][m], qL[m],
                                                  scheme_.weno.tvd_alpha);
                        double* out = tr_hi + (a * kSub + b) * kComp;
                        for (int c = 0; c < kComp; ++c) out[c] = qL[c];
                    }
                }
        }
    }

    // States at/below the floor abort the run with a diagnostic.
    const Vec5& prim_guard(const Vec5& q) const {
        if (!state_valid(q, gas_)) throw SolverAbort("invalid state in reconstruction stencil");
        return q;
    }

    void fill_bc_ghosts(const std::vector<double>& qt, int e, int d, int side, double t,
                        double* gp) {
        const auto& met = *mesh_.elems[e].metrics;
        const double* q = elem_qt(qt.data(), e);
        int face = 2 * d + side;
        const BoundaryCondition& bc = bc_[face];
        for (int l = 0; l < 2; ++l)
            for (int a = 0; a < kSub; ++a)
                for (int b = 0; b < kSub; ++b) {
                    // mirror source cell for reflective / interior reference
                    int depth = (side == 0) ? l : (kSub - 1 - l);
                    int node = node_index(d, depth, a, b);
                    Vec5 interior;
                    double s = met.sub_inv_jc[node];
                    for (int c = 0; c < kComp; ++c) interior[c] = q[node * kComp + c] * s;
                    Vec5 g;
                    switch (bc.kind) {
                        case BCKind::kZeroGradient: {
                            int n0 = node_index(d, (side == 0) ? 0 : kSub - 1, a, b);
                            double s0 = met.sub_inv_jc[n0];
                            for (int c = 0; c < kComp; ++c) g[c] = q[n0 * kComp + c] * s0;
                            break;
                        }
                        case BCKind::kReflectiveWall: {
                            const Vec3& row =
                                met.sub_face_row[d][flux_idx(kSub, side == 0 ? 0 : kSub, a, b)];
                            double inv = 1.0 / norm3(row);
                            Vec3 n = {row[0] * inv, row[1] * inv, row[2] * inv};
                            g = bc.ghost(interior, {0, 0, 0}, t, n);
                            break;
                        }
                        default: {
                            Vec3 pos = {0, 0, 0};
                            if (bc.kind == BCKind::kDirichletFn) {
                                Vec3 r = ghost_ref_coord(face, l, a, b);
                                pos = mesh_.elems[e].geom.map(r[0], r[1], r[2]);
                            }
                            Vec3 n = outward_normal_fv(met, d, side, a, b);
                            g = bc.ghost(interior, pos, t, n);
                            break;
                        }
                    }
                    double* out = gp + ((l * kSub + a) * kSub + b) * kComp;
                    for (int c = 0; c < kComp; ++c) out[c] = g[c];
                }
    }

    Vec3 outward_normal_fv(const ElementMetrics& met, int d, int side, int a, int b) const {
        const Vec3& row = met.sub_face_row[d][flux_idx(kSub, side == 0 ? 0 : kSub, a, b)];
        double sgn = (side == 0) ? -1.0 : 1.0;
        double inv = sgn / norm3(row);
        return {row[0] * inv, row[1] * inv, row[2] * inv};
    }

    void phase_face_fluxes(const std::vector<double>& qt, double t) {
        parallel_for(static_cast<int>(mesh_.faces.size()), workers_, [&](int fi) {
            const MeshFace& face = mesh_.faces[fi];
            if (mesh_.topo.invariant_dir[face.dir]) return;
            if (face.domain_face >= 0)
                boundary_face_flux(qt, fi, t);
            else
                interior_face_flux(qt, fi, t);
        });
    }

    void interior_face_flux(const std::vector<double>&, size_t fi, double) {
        const MeshFace& face = mesh_.faces[fi];
        const int d = face.dir;
        ElemKind kL = kind_[face.left], kR = kind_[face.right];
        if (kL == kR) {
            const auto& met = *mesh_.elems[face.left].metrics;
            const auto& rows = (kL == ElemKind::kSD) ? met.flux_row[d] : met.sub_face_row[d];
            const double* trL = trace_ptr(face.left, 2 * d + 1);
            const double* trR = trace_ptr(face.right, 2 * d);
            double* out = fflux_ptr(fi, 0);
            FaceContext ctx;
            ctx.gas = gas_;
            for (int a = 0; a < kSub; ++a)
                for (int b = 0; b < kSub; ++b) {
                    const Vec3& row = rows[flux_idx(kSub, kSub, a, b)];
                    double A = norm3(row);
                    double inv = 1.0 / A;
                    ctx.normal = {row[0] * inv, row[1] * inv, row[2] * inv};
                    ctx.area_scale = A;
                    int off = (a * kSub + b) * kComp;
                    Vec5 qL, qR;
                    for (int c = 0; c < kComp; ++c) {
                        qL[c] = trL[off + c];
                        qR[c] = trR[off + c];
                    }
                    Vec5 f = scheme_.solver(prim_guard(qL), prim_guard(qR), ctx);
                    for (int c = 0; c < kComp; ++c) out[off + c] = f[c];
                }
        } else {
            // mixed SD|FV interface via the mortar
            bool sd_left = (kL == ElemKind::kSD);
            int sd_elem = sd_left ? face.left : face.right;
            int fv_elem = sd_left ? face.right : face.left;
            const auto& smet = *mesh_.elems[sd_elem].metrics;
            int lattice = sd_left ? kSub : 0;
            MortarFaceGeometry geo;
            geo.normal.resize(kFacePts);
            geo.area_scale.resize(kFacePts);
            for (int a = 0; a < kSub; ++a)
                for (int b = 0; b < kSub; ++b) {
                    const Vec3& row = smet.flux_row[d][flux_idx(kSub, lattice, a, b)];
                    double A = norm3(row);
                    double inv = 1.0 / A;
                    geo.normal[a * kSub + b] = {row[0] * inv, row[1] * inv, row[2] * inv};
                    geo.area_scale[a * kSub + b] = A;
                }
            std::vector<Vec5> tr_sd(kFacePts), tr_fv(kFacePts);
            const double* ts = trace_ptr(sd_elem, 2 * d + (sd_left ? 1 : 0));
            const double* tf = trace_ptr(fv_elem, 2 * d + (sd_left ? 0 : 1));
            for (int i = 0; i < kFacePts; ++i)
                for (int c = 0; c < kComp; ++c) {
                    tr_sd[i][c] = ts[i * kComp + c];
                    tr_fv[i][c] = tf[i * kComp + c];
                }
            std::vector<Vec5> f_sd, f_fv;
            mixed_face_flux(mortar_op_, tr_sd, tr_fv, /*a_is_left=*/sd_left, geo, scheme_.solver,
                            gas_, f_sd, f_fv);
            double* slot_l = fflux_ptr(fi, 0);
            double* slot_r = fflux_ptr(fi, 1);
            const std::vector<Vec5>& fl = sd_left ? f_sd : f_fv;
            const std::vector<Vec5>& fr = sd_left ? f_fv : f_sd;
            for (int i = 0; i < kFacePts; ++i)
                for (int c = 0; c < kComp; ++c) {
                    slot_l[i * kComp + c] = fl[i][c];
                    slot_r[i * kComp + c] = fr[i][c];
                }
        }
    }

    void boundary_face_flux(const std::vector<double>&, size_t fi, double t) {
        const MeshFace& face = mesh_.faces[fi];
        const int d = face.dir;
        bool high = (face.right < 0);  // boundary on the high side of the interior element
        int e = high ? face.left : face.right;
        const auto& met = *mesh_.elems[e].metrics;
        const BoundaryCondition& bc = bc_[face.domain_face];
        bool is_sd = kind_[e] == ElemKind::kSD;
        const auto& rows = is_sd ? met.flux_row[d] : met.sub_face_row[d];
        const double* tr = trace_ptr(e, 2 * d + (high ? 1 : 0));
        double* out = fflux_ptr(fi, 0);
        FaceContext ctx;
        ctx.gas = gas_;
        int lattice = high ? kSub : 0;
        double along = high ? 1.0 : 0.0;
        for (int a = 0; a < kSub; ++a)
            for (int b = 0; b < kSub; ++b) {
                const Vec3& row = rows[flux_idx(kSub, lattice, a, b)];
                double A = norm3(row);
                double inv = 1.0 / A;
                ctx.normal = {row[0] * inv, row[1] * inv, row[2] * inv};
                ctx.area_scale = A;
                double sgn = high ? 1.0 : -1.0;
                Vec3 n_out = {ctx.normal[0] * sgn, ctx.normal[1] * sgn, ctx.normal[2] * sgn};
                int off = (a * kSub + b) * kComp;
                Vec5 q_in;
                for (int c = 0; c < kComp; ++c) q_in[c] = tr[off + c];
                Vec3 pos = {0, 0, 0};
                if (bc.kind == BCKind::kDirichletFn) {
                    Vec3 r = is_sd ? flux_ref_coord(basis_, d, along, a, b)
                                   : sub_face_ref_coord(d, lattice, a, b);
                    pos = mesh_.elems[e].geom.map(r[0], r[1], r[2]);
                }
                Vec5 g = bc.ghost(q_in, pos, t, n_out);
                Vec5 f = high ? scheme_.solver(prim_guard(q_in), prim_guard(g), ctx)
                              : scheme_.solver(prim_guard(g), prim_guard(q_in), ctx);
                for (int c = 0; c < kComp; ++c) out[off + c] = f[c];
            }
    }

    const double* face_flux_for(int e, int fi) {
        const MeshFace& face = mesh_.faces[fi];
        if (face.left >= 0 && face.right >= 0 && kind_[face.left] != kind_[face.right])
            return fflux_ptr(fi, face.left == e ? 0 : 1);
        return fflux_ptr(fi, 0);
    }

    void phase_assemble(const std::vector<double>& qt, std::vector<double>& res) {
        parallel_for(mesh_.n_elements(), workers_, [&](int e) {
            double* r = elem_qt(res.data(), e);
            std::memset(r, 0, sizeof(double) * kNodes * kComp);
            if (kind_[e] == ElemKind::kSD)
                sd_assemble(qt, e, r);
            else
                fv_assemble(qt, e, r);
        });
    }

    void sd_assemble(const std::vector<double>& qt, int e, double* r) {
        const auto& met = *mesh_.elems[e].metrics;
        const double* q = elem_qt(qt.data(), e);
        const int n = kSub;
        const auto& s2f = basis_.sol_to_flux;   // (n+1) x n
        const auto& fd = basis_.flux_deriv;     // n x (n+1)
        for (int d = 0; d < 3; ++d) {
            if (mesh_.topo.invariant_dir[d]) continue;
            const double* flo = face_flux_for(e, mesh_.elem_face[e][2 * d]);
            const double* fhi = face_flux_for(e, mesh_.elem_face[e][2 * d + 1]);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    Vec5 ql[5];
                    for (int i = 0; i < n; ++i) {
                        int node = node_index(d, i, a, b);
                        double s = met.sol_inv_jac[node];
                        for (int c = 0; c < kComp; ++c) ql[i][c] = q[node * kComp + c] * s;
                    }
                    Vec5 ftp[6];
                    int off = (a * n + b) * kComp;
                    for (int c = 0; c < kComp; ++c) {
                        ftp[0][c] = flo[off + c];
                        ftp[n][c] = fhi[off + c];
                    }
                    for (int f = 1; f < n; ++f) {
                        Vec5 qv = {0, 0, 0, 0, 0};
                        const double* w = &s2f[f * n];
                        for (int i = 0; i < n; ++i)
                            for (int c = 0; c < kComp; ++c) qv[c] += w[i] * ql[i][c];
                        if (!state_valid(qv, gas_))
                            throw SolverAbort("invalid interpolated state at a flux point");
                        PrimitiveState ps = cons_to_prim(qv, gas_);
                        ftp[f] = flux_normal_prim(qv, ps, met.flux_row[d][flux_idx(n, f, a, b)]);
                    }
                    for (int i = 0; i < n; ++i) {
                        int node = node_index(d, i, a, b);
                        const double* w = &fd[i * (n + 1)];
                        double* rp = r + node * kComp;
                        for (int c = 0; c < kComp; ++c) {
                            double acc = 0.0;
                            for (int f = 0; f <= n; ++f) acc += w[f] * ftp[f][c];
                            rp[c] -= acc;
                        }
                    }
                }
        }
    }

    void fv_assemble(const std::vector<double>& qt, int e, double* r) {
        const auto& met = *mesh_.elems[e].metrics;
        Vec5 line[9];
        FaceContext ctx;
        ctx.gas = gas_;
        for (int d = 0; d < 3; ++d) {
            if (mesh_.topo.invariant_dir[d]) continue;
            const double* flo = face_flux_for(e, mesh_.elem_face[e][2 * d]);
            const double* fhi = face_flux_for(e, mesh_.elem_face[e][2 * d + 1]);
            for (int a = 0; a < kSub; ++a)
                for (int b = 0; b < kSub; ++b) {
                    fv_gather_line(qt, e, d, a, b, line);
                    Vec5 ftp[kSub + 1];
                    int off = (a * kSub + b) * kComp;
                    for (int c = 0; c < kComp; ++c) {
                        ftp[0][c] = flo[off + c];
                        ftp[kSub][c] = fhi[off + c];
                    }
                    for (int f = 1; f < kSub; ++f) {
                        const Vec3& row = met.sub_face_row[d][flux_idx(kSub, f, a, b)];
                        Eigensystem es = eigensystem_at(
                            roe_average(prim_guard(line[f + 1]), prim_guard(line[f + 2]), gas_),
                            row, gas_);
                        Vec5 cl[5] = {line[f - 1], line[f], line[f + 1], line[f + 2], line[f + 3]};
                        Vec5 cr[5] = {line[f + 4], line[f + 3], line[f + 2], line[f + 1], line[f]};
                        Vec5 qL = char_face_state(es, cl, scheme_.weno);
                        Vec5 qR = char_face_state(es, cr, scheme_.weno);
                        if (scheme_.weno.tvd_enabled)
                            for (int m = 0; m < kComp; ++m) {
                                qL[m] = tvd_limit(line[f][m], line[f + 1][m], line[f + 2][m], qL[m],
                                                  scheme_.weno.tvd_alpha);
                                qR[m] = tvd_limit(line[f + 3][m], line[f + 2][m], line[f + 1][m],
                                                  qR[m], scheme_.weno.tvd_alpha);
                            }
                        double A = norm3(row);
                        double inv = 1.0 / A;
                        ctx.normal = {row[0] * inv, row[1] * inv, row[2] * inv};
                        ctx.area_scale = A;
                        ftp[f] = scheme_.solver(prim_guard(qL), prim_guard(qR), ctx);
                    }
                    for (int i = 0; i < kSub; ++i) {
                        int node = node_index(d, i, a, b);
                        double* rp = r + node * kComp;
                        for (int c = 0; c < kComp; ++c)
                            rp[c] -= kSub * (ftp[i + 1][c] - ftp[i][c]);
                    }
                }
        }
    }

    void check_valid(int stage) {
        const int ne = mesh_.n_elements();
        std::vector<std::uint8_t> bad(ne, 0);
        parallel_for(ne, workers_, [&](int e) {
            for (int p = 0; p < kNodes; ++p)
                if (!state_valid(dof_state(e, p), gas_)) {
                    bad[e] = 1;
                    return;
                }
        });
        for (int e = 0; e < ne; ++e)
            if (bad[e])
                throw SolverAbort("invalid state after step " + std::to_string(step_ + 1) +
                                  " stage " + std::to_string(stage + 1) + " element " +
                                  std::to_string(e));
    }

    // ---- adaptation helpers --------------------------------------------

    void compute_means() {
        const int ne = mesh_.n_elements();
        mean_q_.resize(ne);
        int nf = scheme_.detector.n_fields();
        for (int f = 0; f < nf; ++f) mean_field_[f].resize(ne);
        parallel_for(ne, workers_, [&](int e) {
            const auto& met = *mesh_.elems[e].metrics;
            const double* q = elem_qt(qt_.data(), e);
            long double accq[5] = {0, 0, 0, 0, 0};
            long double accp = 0.0, accv = 0.0;
            for (int p = 0; p < kNodes; ++p) {
                double w, s;
                if (kind_[e] == ElemKind::kSD) {
                    w = met.sol_wjac[p];
                    s = met.sol_inv_jac[p];
                } else {
                    w = met.sub_vol[p];
                    s = met.sub_inv_jc[p];
                }
                Vec5 qp;
                for (int c = 0; c < kComp; ++c) qp[c] = q[p * kComp + c] * s;
                for (int c = 0; c < kComp; ++c) accq[c] += static_cast<long double>(w) * qp[c];
                if (scheme_.detector.on_pressure) {
                    double pr = (gas_.gamma - 1.0) *
                                (qp[kEner] -
                                 0.5 * (qp[kMomX] * qp[kMomX] + qp[kMomY] * qp[kMomY] +
                                        qp[kMomZ] * qp[kMomZ]) /
                                     qp[kRho]);
                    accp += static_cast<long double>(w) * pr;
                }
                accv += w;
            }
            double iv = 1.0 / static_cast<double>(accv);
            for (int c = 0; c < kComp; ++c) mean_q_[e][c] = static_cast<double>(accq[c]) * iv;
            int f = 0;
            if (scheme_.detector.on_density) mean_field_[f++][e] = mean_q_[e][kRho];
            if (scheme_.detector.on_pressure) mean_field_[f][e] = static_cast<double>(accp) * iv;
        });
    }

    double boundary_ghost_mean(int e, int d, int side, int f) {
        const auto& met = *mesh_.elems[e].metrics;
        int face = 2 * d + (side > 0 ? 1 : 0);
        int lattice = (side > 0) ? kSub : 0;
        int center = flux_idx(kSub, lattice, kSub / 2, kSub / 2);
        const Vec3& row = (kind_[e] == ElemKind::kSD) ? met.flux_row[d][center]
                                                      : met.sub_face_row[d][center];
        double sgn = (side > 0) ? 1.0 : -1.0;
        double inv = sgn / norm3(row);
        Vec3 n_out = {row[0] * inv, row[1] * inv, row[2] * inv};
        Vec3 ref = {0.5, 0.5, 0.5};
        ref[d] = (side > 0) ? 1.0 : 0.0;
        Vec3 pos = mesh_.elems[e].geom.map(ref[0], ref[1], ref[2]);
        Vec5 g = bc_[face].ghost(mean_q_[e], pos, time_, n_out);
        int idx = 0;
        if (scheme_.detector.on_density) {
            if (f == idx) return g[kRho];
            ++idx;
        }
        PrimitiveState ps = cons_to_prim(g, gas_);
        return ps.p;
    }

    // ---- members ---------------------------------------------------------

    Mesh mesh_;
    SDBasis basis_;
    GasModel gas_;
    std::array<BoundaryCondition, 6> bc_;
    SchemeConfig scheme_;
    int workers_;

    std::vector<ElemKind> kind_;
    std::vector<std::uint8_t> static_fv_;
    std::vector<int> steady_count_;
    std::vector<double> sensor_;
    std::vector<std::uint8_t> flagged_;
    std::vector<double> qt_, res_, dreg_, snapshot_;
    std::vector<double> trace_, ghost_, fflux_;
    std::vector<Vec5> mean_q_;
    std::array<std::vector<double>, 2> mean_field_;
    MortarOperator mortar_op_;
    double time_ = 0.0;
    long step_ = 0;
    double res_norm_ref_ = -1.0;
};

}  // namespace sdfv
