// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "vsie/em.hpp"

namespace vsie::em {

std::size_t ToeplitzKernels::component(int u, int v) {
    if (u < 0 || u > 2 || v < 0 || v > 2) throw ArgumentError("kernel component out of range");
    if (u > v) std::swap(u, v);
    static constexpr std::size_t table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return table[u][v];
}

int component_parity(int u, int v, const std::array<int, 3>& signs) {
    if (u == v) return 1;
    return signs[static_cast<std::size_t>(u)] * signs[static_cast<std::size_t>(v)];
}

cplx ToeplitzKernels::at(const std::array<long, 3>& o, int u, int v) const {
    Index3 a{};
    std::array<int, 3> s{};
    for (std::size_t k = 0; k < 3; ++k) {
        a[k] = static_cast<std::size_t>(std::labs(o[k]));
        s[k] = o[k] < 0 ? -1 : 1;
        if (a[k] >= dims[k]) throw ArgumentError("kernel offset out of range");
    }
    const auto& t = comp[component(u, v)];
    return static_cast<double>(component_parity(u, v, s)) * t[a[0] + dims[0] * (a[1] + dims[1] * a[2])];
}

namespace {

// Integral of g over a ball of volume dv, seen from its centre.
cplx sphere_self(double dv, double k0) {
    const double a = std::cbrt(3.0 * dv / (4.0 * kPi));
    const double x = k0 * a;
    if (x < 1e-3) {
        // a^2 (1/2 - i x/3 - x^2/8 + i x^3/30)
        return a * a * cplx(0.5 - x * x / 8.0, -x / 3.0 + x * x * x / 30.0);
    }
    const cplx ika(0.0, x);
    return ((1.0 + ika) * std::exp(-ika) - 1.0) / (k0 * k0);
}

// int_{V_o} int_{V_0} g with tensor Gauss rules in both cubes.
cplx scalar_gauss(const Vec3& shift, double h, double k0, int order) {
    const Rule1D q = gauss_legendre(order);
    const auto n = q.x.size();
    std::vector<Vec3> pts;
    std::vector<double> w;
    pts.reserve(n * n * n);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t a = 0; a < n; ++a) {
                pts.emplace_back(0.5 * h * q.x[a], 0.5 * h * q.x[b], 0.5 * h * q.x[c]);
                w.push_back(q.w[a] * q.w[b] * q.w[c]);
            }
    cplx s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) s += w[i] * w[j] * green_scalar(shift + pts[i], pts[j], k0);
    const double jac = std::pow(0.5 * h, 3);
    return s * jac * jac;
}

Rect cube_face(const Vec3& center, double h, int axis, int side) {
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    Vec3 c = center;
    c(axis) += 0.5 * h * side;
    return {c, Vec3::Unit(a1), Vec3::Unit(a2), 0.5 * h, 0.5 * h};
}

// int_{V_o} int_{V_0} d_u d_v g through the face-charge identity
// T_uv = -sum_{s,s'} s s' int_{F_o^{u,s}} int_{F_0^{v,s'}} g.
cplx hessian_faces(const Vec3& shift, double h, double k0, int u, int v, int outer) {
    const Rule1D q = gauss_legendre(outer);
    cplx total = 0.0;
    for (int s : {-1, 1}) {
        const Rect target = cube_face(shift, h, u, s);
        for (int sp : {-1, 1}) {
            const Rect source = cube_face(Vec3::Zero(), h, v, sp);
            cplx acc = 0.0;
            for (std::size_t a = 0; a < q.x.size(); ++a)
                for (std::size_t b = 0; b < q.x.size(); ++b) {
                    const Vec3 p = target.center + q.x[a] * target.hu * target.eu + q.x[b] * target.hv * target.ev;
                    acc += q.w[a] * q.w[b] * rect_mean_green(p, source, k0, 4);
                }
            acc *= target.hu * target.hv * source.area();
            total -= static_cast<double>(s * sp) * acc;
        }
    }
    return total;
}

constexpr int kNearReach = 2;

}  // namespace

VoxelPair vie_pair_integrals(const Index3& offset, double spacing, double k0) {
    if (!(spacing > 0.0)) throw ArgumentError("spacing must be positive");
    const double dv = spacing * spacing * spacing;
    const Vec3 shift = spacing * Vec3(static_cast<double>(offset[0]), static_cast<double>(offset[1]), static_cast<double>(offset[2]));
    const std::size_t reach = std::max({offset[0], offset[1], offset[2]});
    VoxelPair out{};
    static constexpr int uv[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

    if (reach == 0)
        out.scalar = dv * sphere_self(dv, k0);
    else if (reach <= kNearReach)
        out.scalar = scalar_gauss(shift, spacing, k0, 4);
    else
        out.scalar = dv * dv * green_scalar(shift, Vec3::Zero(), k0);

    if (reach <= kNearReach) {
        for (std::size_t c = 0; c < 6; ++c) out.hessian[c] = hessian_faces(shift, spacing, k0, uv[c][0], uv[c][1], 8);
    } else {
        const Dyad hs = green_hessian(shift, k0);
        for (std::size_t c = 0; c < 6; ++c) out.hessian[c] = dv * dv * hs(uv[c][0], uv[c][1]);
    }
    return out;
}

ToeplitzKernels assemble_vie_kernels(const Index3& dims, double spacing, double k0) {
    for (auto n : dims)
        if (n == 0) throw ArgumentError("kernel grid extents must be positive");
    ToeplitzKernels out;
    out.dims = dims;
    const std::vector<std::size_t> d{dims[0], dims[1], dims[2]};
    for (auto& c : out.comp) c = tensor::DenseTensor(d);
    const double dv = spacing * spacing * spacing;
    const std::size_t total = dims[0] * dims[1] * dims[2];
    static constexpr int uv[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(total); ++l) {
        const auto lin = static_cast<std::size_t>(l);
        const Index3 o{lin % dims[0], (lin / dims[0]) % dims[1], lin / (dims[0] * dims[1])};
        const VoxelPair p = vie_pair_integrals(o, spacing, k0);
        for (std::size_t c = 0; c < 6; ++c) {
            const int u = uv[c][0];
            const int v = uv[c][1];
            cplx val = p.hessian[c];
            if (u == v)
                val += k0 * k0 * p.scalar;
            else if (o[static_cast<std::size_t>(u)] == 0 || o[static_cast<std::size_t>(v)] == 0)
                val = 0.0;  // odd in o_u and o_v
            out.comp[c][lin] = val / dv;
        }
    }
    return out;
}

ToeplitzKernels assemble_vie_kernels(const VoxelGrid& grid, double k0) {
    return assemble_vie_kernels(grid.dims(), grid.spacing(), k0);
}

}  // namespace vsie::em
