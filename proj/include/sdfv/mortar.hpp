#pragma once

#include <string>
#include <vector>

#include "sdfv/common.hpp"
#include "sdfv/euler.hpp"
#include "sdfv/riemann.hpp"
#include "sdfv/sd_basis.hpp"

namespace sdfv {

/// Nodal polynomial space on one element face (one tangential direction).
struct FaceSpace {
    std::vector<double> nodes;  // strictly increasing abscissae in [0,1]

    int size() const { return static_cast<int>(nodes.size()); }

    static FaceSpace sd_face(const SDBasis& basis) { return {basis.sol_pts}; }
    static FaceSpace fv_face() { return {subcell_centers()}; }
};

namespace mortar_detail {

// Quadrature for the projection-matrix integrals; exact well past the
// degree 2(J-1) products that appear.
inline const Quadrature& rule() {
    static const Quadrature q = gauss_legendre(8);
    return q;
}

inline std::vector<double> mass_matrix(const std::vector<double>& nodes) {
    const auto& q = rule();
    auto bw = barycentric_weights(nodes);
    int n = static_cast<int>(nodes.size());
    std::vector<double> m(n * n, 0.0);
    for (size_t g = 0; g < q.x.size(); ++g) {
        auto l = lagrange_values(nodes, bw, q.x[g]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m[i * n + j] += q.w[g] * l[i] * l[j];
    }
    return m;
}

inline std::vector<double> cross_matrix(const std::vector<double>& src,
                                        const std::vector<double>& dst) {
    const auto& q = rule();
    auto bs = barycentric_weights(src);
    auto bd = barycentric_weights(dst);
    int ns = static_cast<int>(src.size()), nd = static_cast<int>(dst.size());
    std::vector<double> s(ns * nd, 0.0);
    for (size_t g = 0; g < q.x.size(); ++g) {
        auto ls = lagrange_values(src, bs, q.x[g]);
        auto ld = lagrange_values(dst, bd, q.x[g]);
        for (int i = 0; i < ns; ++i)
            for (int m = 0; m < nd; ++m) s[i * nd + m] += q.w[g] * ls[i] * ld[m];
    }
    return s;
}

// Least-squares projection matrix src -> dst: solve M_dst phi = S^T u.
inline std::vector<double> projection_matrix(const std::vector<double>& src,
                                             const std::vector<double>& dst) {
    int ns = static_cast<int>(src.size()), nd = static_cast<int>(dst.size());
    auto mass = mass_matrix(dst);
    auto minv = invert_dense(mass, nd);
    auto s = cross_matrix(src, dst);
    std::vector<double> p(nd * ns, 0.0);
    for (int r = 0; r < nd; ++r)
        for (int c = 0; c < ns; ++c) {
            double acc = 0.0;
            for (int k = 0; k < nd; ++k) acc += minv[r * nd + k] * s[c * nd + k];
            p[r * ns + c] = acc;
        }
    return p;
}

}  // namespace mortar_detail

enum class MortarSide { kA, kB };

/// Precomputed least-squares projections between two face spaces and the
/// mortar space of size J = max(Ma, Mb) on Gauss abscissae.
struct MortarOperator {
    FaceSpace a, b;
    std::vector<double> mortar_nodes;
    int J = 0;
    std::vector<double> fwd_a, fwd_b;  // face -> mortar, J x M
    std::vector<double> bwd_a, bwd_b;  // mortar -> face, M x J
    std::string quadrature_rule = "gauss-legendre-8";

    const std::vector<double>& fwd(MortarSide s) const { return s == MortarSide::kA ? fwd_a : fwd_b; }
    const std::vector<double>& bwd(MortarSide s) const { return s == MortarSide::kA ? bwd_a : bwd_b; }
    int side_size(MortarSide s) const { return s == MortarSide::kA ? a.size() : b.size(); }
};

inline MortarOperator build_mortar_operator(const FaceSpace& a, const FaceSpace& b) {
    MortarOperator op;
    op.a = a;
    op.b = b;
    op.J = std::max(a.size(), b.size());
    op.mortar_nodes = gauss_solution_points(op.J);
    op.fwd_a = mortar_detail::projection_matrix(a.nodes, op.mortar_nodes);
    op.fwd_b = mortar_detail::projection_matrix(b.nodes, op.mortar_nodes);
    op.bwd_a = mortar_detail::projection_matrix(op.mortar_nodes, a.nodes);
    op.bwd_b = mortar_detail::projection_matrix(op.mortar_nodes, b.nodes);
    return op;
}

/// Apply a 1D operator P (r x c) along both tangential axes of c*c nodal
/// Vec5 data (index a*c+b).
inline std::vector<Vec5> apply_tensor(const std::vector<double>& p, int r, int c,
                                      const Vec5* data) {
    std::vector<Vec5> tmp(r * c, Vec5{0, 0, 0, 0, 0});
    for (int i = 0; i < r; ++i)
        for (int aa = 0; aa < c; ++aa) {
            double w = p[i * c + aa];
            if (w == 0.0) continue;
            for (int bb = 0; bb < c; ++bb)
                for (int m = 0; m < 5; ++m) tmp[i * c + bb][m] += w * data[aa * c + bb][m];
        }
    std::vector<Vec5> out(r * r, Vec5{0, 0, 0, 0, 0});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int bb = 0; bb < c; ++bb) {
                double w = p[j * c + bb];
                for (int m = 0; m < 5; ++m) out[i * r + j][m] += w * tmp[i * c + bb][m];
            }
    return out;
}

inline std::vector<Vec5> project_to_mortar(const MortarOperator& op, MortarSide side,
                                           const std::vector<Vec5>& face_data) {
    int m = op.side_size(side);
    if (static_cast<int>(face_data.size()) != m * m)
        throw std::invalid_argument("project_to_mortar: face data dimension mismatch");
    return apply_tensor(op.fwd(side), op.J, m, face_data.data());
}

inline std::vector<Vec5> project_from_mortar(const MortarOperator& op, MortarSide side,
                                             const std::vector<Vec5>& mortar_data) {
    if (static_cast<int>(mortar_data.size()) != op.J * op.J)
        throw std::invalid_argument("project_from_mortar: mortar data dimension mismatch");
    return apply_tensor(op.bwd(side), op.side_size(side), op.J, mortar_data.data());
}

/// L2 residual of the forward projection (diagnostic: the projection is
/// lossy when the source polynomial exceeds the mortar space).
inline double projection_residual(const MortarOperator& op, MortarSide side,
                                  const std::vector<Vec5>& face_data) {
    auto proj = project_to_mortar(op, side, face_data);
    const auto& q = mortar_detail::rule();
    const auto& src = (side == MortarSide::kA) ? op.a.nodes : op.b.nodes;
    auto bs = barycentric_weights(src);
    auto bm = barycentric_weights(op.mortar_nodes);
    int m = op.side_size(side);
    double acc = 0.0;
    for (size_t gi = 0; gi < q.x.size(); ++gi)
        for (size_t gj = 0; gj < q.x.size(); ++gj) {
            auto li = lagrange_values(src, bs, q.x[gi]);
            auto lj = lagrange_values(src, bs, q.x[gj]);
            auto mi = lagrange_values(op.mortar_nodes, bm, q.x[gi]);
            auto mj = lagrange_values(op.mortar_nodes, bm, q.x[gj]);
            for (int c = 0; c < 5; ++c) {
                double u = 0.0, v = 0.0;
                for (int ii = 0; ii < m; ++ii)
                    for (int jj = 0; jj < m; ++jj) u += face_data[ii * m + jj][c] * li[ii] * lj[jj];
                for (int ii = 0; ii < op.J; ++ii)
                    for (int jj = 0; jj < op.J; ++jj) v += proj[ii * op.J + jj][c] * mi[ii] * mj[jj];
                acc += q.w[gi] * q.w[gj] * (u - v) * (u - v);
            }
        }
    return std::sqrt(acc);
}

/// Geometry of the mortar quadrature points of one mixed face.
struct MortarFaceGeometry {
    std::vector<Vec3> normal;        // unit normals, oriented left -> right
    std::vector<double> area_scale;  // transformed-flux magnitude per node
};

/// Common flux at a mixed interface: both traces are projected onto the
/// mortar, the Riemann problem is solved pointwise at the mortar nodes with
/// the normal oriented left -> right, and the metric-scaled flux is
/// projected back to each side's nodal layout. `a_is_left` states which side
/// of the interface space A occupies.
inline void mixed_face_flux(const MortarOperator& op, const std::vector<Vec5>& trace_a,
                            const std::vector<Vec5>& trace_b, bool a_is_left,
                            const MortarFaceGeometry& geo, const RiemannSolver& solver,
                            const GasModel& gas, std::vector<Vec5>& flux_a,
                            std::vector<Vec5>& flux_b) {
    auto qa = project_to_mortar(op, MortarSide::kA, trace_a);
    auto qb = project_to_mortar(op, MortarSide::kB, trace_b);
    std::vector<Vec5> f(op.J * op.J);
    for (int i = 0; i < op.J * op.J; ++i) {
        FaceContext ctx;
        ctx.normal = geo.normal[i];
        ctx.area_scale = geo.area_scale[i];
        ctx.gas = gas;
        f[i] = a_is_left ? solver(qa[i], qb[i], ctx) : solver(qb[i], qa[i], ctx);
    }
    flux_a = project_from_mortar(op, MortarSide::kA, f);
    flux_b = project_from_mortar(op, MortarSide::kB, f);
}

/// Interpolate an SD element's solution to the two subcell-center layers
/// nearest one of its faces (ghost data for a neighboring FV element's WENO
/// stencils). `qt` is the 5 x n^3 transformed state, `inv_jac` the cached
/// 1/|J| at solution points. Output layout: [layer (0 = adjacent)][a*5+b]
/// with the tangential indexing of the face's direction.
inline std::array<Vec5, 2 * kSub * kSub> sd_ghost_subcell_values(const double* qt,
                                                                 const double* inv_jac,
                                                                 const SDBasis& basis, int dir,
                                                                 bool high_side) {
    const int n = basis.n;
    auto centers = subcell_centers();
    // Depth abscissae inside the neighbor: nearest subcell-center layers.
    double depth[2];
    if (high_side) {
        depth[0] = centers[kSub - 1];
        depth[1] = centers[kSub - 2];
    } else {
        depth[0] = centers[0];
        depth[1] = centers[1];
    }
    std::vector<double> dmat(2 * n);
    for (int l = 0; l < 2; ++l) {
        auto v = basis.sol_basis_at(depth[l]);
        for (int i = 0; i < n; ++i) dmat[l * n + i] = v[i];
    }
    const std::vector<double>& tmat = basis.sol_to_sub;  // kSub x n

    std::array<Vec5, 2 * kSub * kSub> out;
    for (auto& v : out) v = {0, 0, 0, 0, 0};
    for (int l = 0; l < 2; ++l)
        for (int a = 0; a < kSub; ++a)
            for (int b = 0; b < kSub; ++b) {
                Vec5 acc = {0, 0, 0, 0, 0};
                // which axis carries the depth weight depends on the face direction
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (int k = 0; k < n; ++k) {
                            double w;
                            if (dir == 0)
                                w = dmat[l * n + i] * tmat[a * n + j] * tmat[b * n + k];
                            else if (dir == 1)
                                w = tmat[a * n + i] * dmat[l * n + j] * tmat[b * n + k];
                            else
                                w = tmat[a * n + i] * tmat[b * n + j] * dmat[l * n + k];
                            int node = (i * n + j) * n + k;
                            double scale = w * inv_jac[node];
                            const double* q = qt + node * 5;
                            for (int m = 0; m < 5; ++m) acc[m] += scale * q[m];
                        }
                out[l * kSub * kSub + a * kSub + b] = acc;
            }
    return out;
}

}  // namespace sdfv
