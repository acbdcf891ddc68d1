#pragma once

#include <array>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sdfv/common.hpp"
#include "sdfv/sd_basis.hpp"

namespace sdfv {

constexpr int kGeoN = 5;                       // geometry nodes per direction
constexpr int kGeoPts = kGeoN * kGeoN * kGeoN;

/// Chebyshev-Lobatto geometry nodes on [0,1]; end points included so shared
/// faces of adjacent elements sample identical physical points.
inline const std::vector<double>& geometry_nodes() {
    static const std::vector<double> g = [] {
        std::vector<double> v(kGeoN);
        for (int i = 0; i < kGeoN; ++i) v[i] = 0.5 * (1.0 - std::cos(M_PI * i / (kGeoN - 1)));
        return v;
    }();
    return g;
}

enum DomainFace { kXMin = 0, kXMax = 1, kYMin = 2, kYMax = 3, kZMin = 4, kZMax = 5 };

struct MeshTopology {
    int nx = 1, ny = 1, nz = 1;
    std::array<bool, 3> periodic = {false, false, false};
    // Directions along which the case data is uniform on a single periodic
    // element; flux differences vanish identically there and the solver may
    // skip them (verified bitwise by tests).
    std::array<bool, 3> invariant_dir = {false, false, false};

    int count(int d) const { return d == 0 ? nx : d == 1 ? ny : nz; }
    int n_elements() const { return nx * ny * nz; }
    int index(int i, int j, int k) const { return (i * ny + j) * nz + k; }
};

/// Per-element geometry: the tensor degree-(kGeoN-1) polynomial interpolant
/// of the mesh mapping, stored as nodal coordinates.
struct ElementGeometry {
    std::array<Vec3, kGeoPts> node;  // [(a*kGeoN+b)*kGeoN+c], a~xi, b~eta, c~zeta

    Vec3 map(double xi, double eta, double zeta) const {
        const auto& g = geometry_nodes();
        static const auto bw = barycentric_weights(g);
        auto lx = lagrange_values(g, bw, xi);
        auto ly = lagrange_values(g, bw, eta);
        auto lz = lagrange_values(g, bw, zeta);
        Vec3 x = {0, 0, 0};
        for (int a = 0; a < kGeoN; ++a)
            for (int b = 0; b < kGeoN; ++b)
                for (int c = 0; c < kGeoN; ++c) {
                    double l = lx[a] * ly[b] * lz[c];
                    const Vec3& p = node[(a * kGeoN + b) * kGeoN + c];
                    x[0] += l * p[0];
                    x[1] += l * p[1];
                    x[2] += l * p[2];
                }
        return x;
    }

    /// Jacobian columns dX/dxi, dX/deta, dX/dzeta at a point.
    void jacobian(double xi, double eta, double zeta, Vec3& axi, Vec3& aeta, Vec3& azeta) const {
        const auto& g = geometry_nodes();
        static const auto bw = barycentric_weights(g);
        auto lx = lagrange_values(g, bw, xi);
        auto ly = lagrange_values(g, bw, eta);
        auto lz = lagrange_values(g, bw, zeta);
        auto dx = lagrange_derivatives(g, xi);
        auto dy = lagrange_derivatives(g, eta);
        auto dz = lagrange_derivatives(g, zeta);
        axi = aeta = azeta = {0, 0, 0};
        for (int a = 0; a < kGeoN; ++a)
            for (int b = 0; b < kGeoN; ++b)
                for (int c = 0; c < kGeoN; ++c) {
                    const Vec3& p = node[(a * kGeoN + b) * kGeoN + c];
                    double w1 = dx[a] * ly[b] * lz[c];
                    double w2 = lx[a] * dy[b] * lz[c];
                    double w3 = lx[a] * ly[b] * dz[c];
                    for (int m = 0; m < 3; ++m) {
                        axi[m] += w1 * p[m];
                        aeta[m] += w2 * p[m];
                        azeta[m] += w3 * p[m];
                    }
                }
    }
};

/// |J| and J^-1 at a reference-cube point. J^-1 rows are exact inverses of
/// the polynomial-geometry Jacobian.
struct PointMetrics {
    double jac_det;
    double jinv[3][3];
};

inline PointMetrics metrics_at(const ElementGeometry& geom, const Vec3& pt) {
    Vec3 a1, a2, a3;
    geom.jacobian(pt[0], pt[1], pt[2], a1, a2, a3);
    Vec3 r0 = cross3(a2, a3), r1 = cross3(a3, a1), r2 = cross3(a1, a2);
    double det = dot3(a1, r0);
    if (!(det > 0.0)) throw std::runtime_error("metrics_at: nonpositive Jacobian determinant");
    PointMetrics m;
    m.jac_det = det;
    for (int c = 0; c < 3; ++c) {
        m.jinv[0][c] = r0[c] / det;
        m.jinv[1][c] = r1[c] / det;
        m.jinv[2][c] = r2[c] / det;
    }
    return m;
}

// Lattice index helpers.
// Solution points: (i*n+j)*n+k. Flux lattice of direction d: f in 0..n along d,
// (a,b) the two tangential solution/subcell indices in cyclic order:
//   d=0 -> (f; j,k), d=1 -> (f; i,k), d=2 -> (f; i,j), idx = (f*n+a)*n+b.
inline int flux_idx(int n, int f, int a, int b) { return (f * n + a) * n + b; }

/// All geometric data the solver kernels need, cached per element shape.
/// Cartesian meshes share one instance across all elements.
struct ElementMetrics {
    // at the n^3 solution points
    std::vector<double> sol_jac;      // |J|
    std::vector<double> sol_inv_jac;  // 1/|J|
    std::vector<double> sol_wjac;     // w_i w_j w_k |J| (quadrature content weight)
    // transformed-flux rows |J| J^-1 (row d) at the flux lattice of each direction
    std::array<std::vector<Vec3>, 3> flux_row;  // size (n+1)*n*n each
    // FV subcells
    std::vector<double> sub_jc;       // subcell volume / reference volume ( = |J| average)
    std::vector<double> sub_inv_jc;
    std::vector<double> sub_vol;      // physical subcell volume
    std::array<std::vector<Vec3>, 3> sub_face_row;  // bilinear-patch row equivalents, (kSub+1)*kSub*kSub
    double volume = 0.0;              // sum of subcell volumes
    std::array<double, 3> min_spacing = {0, 0, 0};  // min local width per direction
};

// Physical coordinates are never cached in ElementMetrics (congruent elements
// share one instance); they are evaluated from the per-element geometry.

/// Reference coordinates of solution point p (lattice (i*n+j)*n+k).
inline Vec3 sol_ref_coord(const SDBasis& basis, int p) {
    int n = basis.n;
    int k = p % n, j = (p / n) % n, i = p / (n * n);
    return {basis.sol_pts[i], basis.sol_pts[j], basis.sol_pts[k]};
}

/// Reference coordinates of subcell center p (same lattice convention).
inline Vec3 sub_ref_coord(int p) {
    auto c = subcell_centers();
    int k = p % kSub, j = (p / kSub) % kSub, i = p / (kSub * kSub);
    return {c[i], c[j], c[k]};
}

/// Reference coordinates of a flux-lattice point of direction d with
/// along-direction abscissa `x` and tangential indices (a, b).
inline Vec3 flux_ref_coord(const SDBasis& basis, int d, double x, int a, int b) {
    Vec3 r;
    r[d] = x;
    if (d == 0) {
        r[1] = basis.sol_pts[a];
        r[2] = basis.sol_pts[b];
    } else if (d == 1) {
        r[0] = basis.sol_pts[a];
        r[2] = basis.sol_pts[b];
    } else {
        r[0] = basis.sol_pts[a];
        r[1] = basis.sol_pts[b];
    }
    return r;
}

inline Vec3 sub_face_ref_coord(int d, int f, int a, int b) {
    auto c = subcell_centers();
    auto e = subcell_edges();
    Vec3 r;
    r[d] = e[f];
    if (d == 0) {
        r[1] = c[a];
        r[2] = c[b];
    } else if (d == 1) {
        r[0] = c[a];
        r[2] = c[b];
    } else {
        r[0] = c[a];
        r[1] = c[b];
    }
    return r;
}

/// Reference coordinates of the mirrored ghost subcell centers outside a
/// face (layer 0 adjacent to the face).
inline Vec3 ghost_ref_coord(int face, int layer, int a, int b) {
    auto c = subcell_centers();
    int d = face / 2;
    bool high = face % 2;
    Vec3 r;
    r[d] = high ? 1.0 + c[layer] : -c[layer];
    if (d == 0) {
        r[1] = c[a];
        r[2] = c[b];
    } else if (d == 1) {
        r[0] = c[a];
        r[2] = c[b];
    } else {
        r[0] = c[a];
        r[1] = c[b];
    }
    return r;
}

inline std::shared_ptr<const ElementMetrics> build_metrics(const ElementGeometry& geom,
                                                           const SDBasis& basis, int elem_index) {
    const int n = basis.n;
    auto m = std::make_shared<ElementMetrics>();

    auto row_at = [&](double xi, double eta, double zeta, Vec3 rows[3]) -> double {
        Vec3 a1, a2, a3;
        geom.jacobian(xi, eta, zeta, a1, a2, a3);
        rows[0] = cross3(a2, a3);
        rows[1] = cross3(a3, a1);
        rows[2] = cross3(a1, a2);
        double det = dot3(a1, rows[0]);
        if (!(det > 0.0))
            throw std::runtime_error("build_metrics: fold-over (|J| <= 0) in element " +
                                     std::to_string(elem_index));
        return det;
    };

    // Solution points.
    m->sol_jac.resize(n * n * n);
    m->sol_inv_jac.resize(n * n * n);
    m->sol_wjac.resize(n * n * n);
    m->min_spacing = {1e300, 1e300, 1e300};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Vec3 rows[3];
                double xi = basis.sol_pts[i], eta = basis.sol_pts[j], zeta = basis.sol_pts[k];
                double det = row_at(xi, eta, zeta, rows);
                int idx = (i * n + j) * n + k;
                m->sol_jac[idx] = det;
                m->sol_inv_jac[idx] = 1.0 / det;
                m->sol_wjac[idx] = basis.sol_w[i] * basis.sol_w[j] * basis.sol_w[k] * det;
                for (int d = 0; d < 3; ++d) {
                    double width = det / norm3(rows[d]);  // local physical width along d
                    m->min_spacing[d] = std::min(m->min_spacing[d], width);
                }
            }

    // Flux lattices.
    for (int d = 0; d < 3; ++d) {
        m->flux_row[d].resize((n + 1) * n * n);
        for (int f = 0; f <= n; ++f)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    // tangential order: d=0 -> (a,b)=(j,k); d=1 -> (i,k); d=2 -> (i,j)
                    double c[3];
                    c[d] = basis.flux_pts[f];
                    if (d == 0) {
                        c[1] = basis.sol_pts[a];
                        c[2] = basis.sol_pts[b];
                    } else if (d == 1) {
                        c[0] = basis.sol_pts[a];
                        c[2] = basis.sol_pts[b];
                    } else {
                        c[0] = basis.sol_pts[a];
                        c[1] = basis.sol_pts[b];
                    }
                    Vec3 rows[3];
                    row_at(c[0], c[1], c[2], rows);
                    m->flux_row[d][flux_idx(n, f, a, b)] = rows[d];
                }
    }

    // Subcell corner lattice and bilinear-patch face vectors.
    auto edges = subcell_edges();
    std::vector<Vec3> corner((kSub + 1) * (kSub + 1) * (kSub + 1));
    auto cidx = [](int i, int j, int k) { return (i * (kSub + 1) + j) * (kSub + 1) + k; };
    for (int i = 0; i <= kSub; ++i)
        for (int j = 0; j <= kSub; ++j)
            for (int k = 0; k <= kSub; ++k) corner[cidx(i, j, k)] = geom.map(edges[i], edges[j], edges[k]);

    const double ref_face_area = 1.0 / (kSub * kSub);
    for (int d = 0; d < 3; ++d) m->sub_face_row[d].resize((kSub + 1) * kSub * kSub);
    for (int f = 0; f <= kSub; ++f)
        for (int a = 0; a < kSub; ++a)
            for (int b = 0; b < kSub; ++b) {
                // x-faces: tangents (eta, zeta); y-faces: (zeta, xi); z-faces: (xi, eta).
                auto patch_row = [&](const Vec3& q00, const Vec3& q10, const Vec3& q01,
                                     const Vec3& q11) {
                    Vec3 e1 = {q11[0] - q00[0], q11[1] - q00[1], q11[2] - q00[2]};
                    Vec3 e2 = {q01[0] - q10[0], q01[1] - q10[1], q01[2] - q10[2]};
                    Vec3 s = cross3(e1, e2);
                    return Vec3{0.5 * s[0] / ref_face_area, 0.5 * s[1] / ref_face_area,
                                0.5 * s[2] / ref_face_area};
                };
                m->sub_face_row[0][flux_idx(kSub, f, a, b)] =
                    patch_row(corner[cidx(f, a, b)], corner[cidx(f, a + 1, b)],
                              corner[cidx(f, a, b + 1)], corner[cidx(f, a + 1, b + 1)]);
                m->sub_face_row[1][flux_idx(kSub, f, a, b)] =
                    patch_row(corner[cidx(a, f, b)], corner[cidx(a, f, b + 1)],
                              corner[cidx(a + 1, f, b)], corner[cidx(a + 1, f, b + 1)]);
                m->sub_face_row[2][flux_idx(kSub, f, a, b)] =
                    patch_row(corner[cidx(a, b, f)], corner[cidx(a + 1, b, f)],
                              corner[cidx(a, b + 1, f)], corner[cidx(a + 1, b + 1, f)]);
            }

    // Subcell volumes: exact integrals of the polynomial |J| via a degree-rich
    // nodal representation (|J| has degree <= 3(kGeoN-1) per direction).
    {
        static const int kRep = 3 * (kGeoN - 1) + 1;  // 13 nodes: exact through degree 12
        static const Quadrature rep = gauss_legendre(kRep);
        // Integrals of the representation Lagrange basis over each subcell.
        static const std::vector<double> subw = [] {
            auto e = subcell_edges();
            auto bw = barycentric_weights(rep.x);
            std::vector<double> w(kSub * kRep, 0.0);
            auto gl = gauss_legendre(kRep);
            for (int s = 0; s < kSub; ++s)
                for (size_t g = 0; g < gl.x.size(); ++g) {
                    double xg = e[s] + (e[s + 1] - e[s]) * gl.x[g];
                    double wg = (e[s + 1] - e[s]) * gl.w[g];
                    auto l = lagrange_values(rep.x, bw, xg);
                    for (int a = 0; a < kRep; ++a) w[s * kRep + a] += wg * l[a];
                }
            return w;
        }();
        std::vector<double> jrep(kRep * kRep * kRep);
        for (int a = 0; a < kRep; ++a)
            for (int b = 0; b < kRep; ++b)
                for (int c = 0; c < kRep; ++c) {
                    Vec3 rows[3];
                    jrep[(a * kRep + b) * kRep + c] = row_at(rep.x[a], rep.x[b], rep.x[c], rows);
                }
        m->sub_jc.resize(kSub * kSub * kSub);
        m->sub_inv_jc.resize(kSub * kSub * kSub);
        m->sub_vol.resize(kSub * kSub * kSub);
        const double ref_vol = 1.0 / (kSub * kSub * kSub);
        m->volume = 0.0;
        for (int i = 0; i < kSub; ++i)
            for (int j = 0; j < kSub; ++j)
                for (int k = 0; k < kSub; ++k) {
                    double v = 0.0;
                    for (int a = 0; a < kRep; ++a)
                        for (int b = 0; b < kRep; ++b) {
                            double wab = subw[i * kRep + a] * subw[j * kRep + b];
                            if (wab == 0.0) continue;
                            const double* line = &jrep[(a * kRep + b) * kRep];
                            double acc = 0.0;
                            for (int c = 0; c < kRep; ++c) acc += subw[k * kRep + c] * line[c];
                            v += wab * acc;
                        }
                    int idx = (i * kSub + j) * kSub + k;
                    m->sub_vol[idx] = v;
                    m->sub_jc[idx] = v / ref_vol;
                    m->sub_inv_jc[idx] = ref_vol / v;
                    m->volume += v;
                }
    }
    return m;
}

struct Element {
    ElementGeometry geom;
    std::shared_ptr<const ElementMetrics> metrics;
};

/// A mesh face between two elements (or an element and a domain boundary).
struct MeshFace {
    int dir = 0;
    int left = -1;   // element on the low side, -1 at a low-side boundary
    int right = -1;  // element on the high side, -1 at a high-side boundary
    int domain_face = -1;  // DomainFace tag when boundary, else -1
};

struct Mesh {
    MeshTopology topo;
    std::vector<Element> elems;
    std::vector<MeshFace> faces;
    // per element and direction/side: face index (element i's low-x face, ...)
    std::vector<std::array<int, 6>> elem_face;

    int n_elements() const { return topo.n_elements(); }

    int neighbor(int e, int dir, int side) const {
        int nz = topo.nz, ny = topo.ny;
        int k = e % nz, j = (e / nz) % ny, i = e / (ny * nz);
        int c[3] = {i, j, k};
        c[dir] += side;
        int count = topo.count(dir);
        if (c[dir] < 0 || c[dir] >= count) {
            if (!topo.periodic[dir]) return -1;
            c[dir] = (c[dir] + count) % count;
        }
        return topo.index(c[0], c[1], c[2]);
    }
};

inline void build_faces(Mesh& mesh) {
    const auto& t = mesh.topo;
    mesh.faces.clear();
    mesh.elem_face.assign(mesh.n_elements(), {-1, -1, -1, -1, -1, -1});
    for (int d = 0; d < 3; ++d) {
        int count = t.count(d);
        int n1 = (d == 0) ? t.ny : t.nx;
        int n2 = (d == 2) ? t.ny : t.nz;
        for (int f = 0; f <= count; ++f) {
            if (t.periodic[d] && f == count) continue;  // wrapped into f = 0
            for (int a = 0; a < n1; ++a)
                for (int b = 0; b < n2; ++b) {
                    auto cell = [&](int pos) {
                        int c[3];
                        c[d] = pos;
                        if (d == 0) {
                            c[1] = a;
                            c[2] = b;
                        } else if (d == 1) {
                            c[0] = a;
                            c[2] = b;
                        } else {
                            c[0] = a;
                            c[1] = b;
                        }
                        return t.index(c[0], c[1], c[2]);
                    };
                    MeshFace face;
                    face.dir = d;
                    int lo = f - 1, hi = f;
                    if (t.periodic[d]) {
                        face.left = cell((lo + count) % count);
                        face.right = cell(hi % count);
                    } else {
                        face.left = (lo >= 0) ? cell(lo) : -1;
                        face.right = (hi < count) ? cell(hi) : -1;
                        if (face.left < 0) face.domain_face = 2 * d;
                        if (face.right < 0) face.domain_face = 2 * d + 1;
                    }
                    int idx = static_cast<int>(mesh.faces.size());
                    mesh.faces.push_back(face);
                    if (face.left >= 0) mesh.elem_face[face.left][2 * d + 1] = idx;
                    if (face.right >= 0) mesh.elem_face[face.right][2 * d] = idx;
                }
        }
    }
}

/// Sample an analytic map over the global reference cube into per-element
/// polynomial geometries. `shared_metrics` collapses the metric cache to a
/// single instance (valid when all elements are congruent).
inline Mesh build_mesh_from_map(const MeshTopology& topo,
                                const std::function<Vec3(double, double, double)>& map,
                                const SDBasis& basis, bool shared_metrics) {
    Mesh mesh;
    mesh.topo = topo;
    mesh.elems.resize(topo.n_elements());
    const auto& g = geometry_nodes();
    for (int i = 0; i < topo.nx; ++i)
        for (int j = 0; j < topo.ny; ++j)
            for (int k = 0; k < topo.nz; ++k) {
                Element& el = mesh.elems[topo.index(i, j, k)];
                for (int a = 0; a < kGeoN; ++a)
                    for (int b = 0; b < kGeoN; ++b)
                        for (int c = 0; c < kGeoN; ++c) {
                            double u = (i + g[a]) / topo.nx;
                            double v = (j + g[b]) / topo.ny;
                            double w = (k + g[c]) / topo.nz;
                            el.geom.node[(a * kGeoN + b) * kGeoN + c] = map(u, v, w);
                        }
            }
    if (shared_metrics) {
        auto metrics = build_metrics(mesh.elems[0].geom, basis, 0);
        for (auto& el : mesh.elems) el.metrics = metrics;
    } else {
        for (int e = 0; e < topo.n_elements(); ++e)
            mesh.elems[e].metrics = build_metrics(mesh.elems[e].geom, basis, e);
    }
    build_faces(mesh);
    return mesh;
}

struct DomainBounds {
    Vec3 lo = {0, 0, 0};
    Vec3 hi = {1, 1, 1};
};

inline Mesh build_cartesian_mesh(const DomainBounds& bounds, int nx, int ny, int nz,
                                 const SDBasis& basis,
                                 std::array<bool, 3> periodic = {true, true, true}) {
    if (nx < 1 || ny < 1 || nz < 1) throw std::invalid_argument("build_cartesian_mesh: counts must be >= 1");
    for (int d = 0; d < 3; ++d)
        if (!(bounds.hi[d] > bounds.lo[d]))
            throw std::invalid_argument("build_cartesian_mesh: degenerate bounds");
    MeshTopology topo;
    topo.nx = nx;
    topo.ny = ny;
    topo.nz = nz;
    topo.periodic = periodic;
    auto map = [bounds](double u, double v, double w) -> Vec3 {
        return {bounds.lo[0] + u * (bounds.hi[0] - bounds.lo[0]),
                bounds.lo[1] + v * (bounds.hi[1] - bounds.lo[1]),
                bounds.lo[2] + w * (bounds.hi[2] - bounds.lo[2])};
    };
    return build_mesh_from_map(topo, map, basis, /*shared_metrics=*/true);
}

/// Half-annulus body-fitted grid around a cylinder of radius r0, blended
/// linearly in the radial coordinate to an outer ellipse with semi-axes
/// (a, b). xi is radial (wall at xi=0), eta runs from theta=pi/2 to 3pi/2
/// (the upstream half for flow in +x), zeta extrudes one unit in z.
inline Mesh build_cylinder_mesh(double r0, double a, double b, int nr, int ntheta,
                                const SDBasis& basis, double zlen = 1.0) {
    if (!(r0 > 0.0) || !(r0 < a) || !(a <= b))
        throw std::invalid_argument("build_cylinder_mesh: require 0 < r0 < a <= b");
    if (nr < 1 || ntheta < 1) throw std::invalid_argument("build_cylinder_mesh: counts must be >= 1");
    MeshTopology topo;
    topo.nx = nr;
    topo.ny = ntheta;
    topo.nz = 1;
    topo.periodic = {false, false, true};
    auto map = [=](double u, double v, double w) -> Vec3 {
        double theta = 0.5 * M_PI + M_PI * v;
        double rx = r0 + u * (a - r0);
        double ry = r0 + u * (b - r0);
        return {rx * std::cos(theta), ry * std::sin(theta), zlen * w};
    };
    return build_mesh_from_map(topo, map, basis, /*shared_metrics=*/false);
}

/// Plain-text dump: one element per line, 8 corner coordinates in the order
/// (i,j,k) = 000 100 010 110 001 101 011 111, columns x y z per corner.
inline void write_mesh_corners(const Mesh& mesh, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_mesh_corners: cannot open " + path);
    std::fprintf(f, "# element corners: x0 y0 z0 x1 y1 z1 ... (i,j,k bit order i+2j+4k)\n");
    const int e0 = 0, e1 = kGeoN - 1;
    for (const auto& el : mesh.elems) {
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 2; ++j)
                for (int i = 0; i < 2; ++i) {
                    const Vec3& p = el.geom.node[((i ? e1 : e0) * kGeoN + (j ? e1 : e0)) * kGeoN +
                                                 (k ? e1 : e0)];
                    std::fprintf(f, "%.17g %.17g %.17g ", p[0], p[1], p[2]);
                }
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace sdfv
