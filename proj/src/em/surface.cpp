// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "vsie/em.hpp"

namespace vsie::em {

Eigen::Vector3cd coupling_field(const Vec3& center, double spacing, const Patch& p, const Frequency& f, CouplingRule rule) {
    const bool far = rule == CouplingRule::Far;
    const auto vol = voxel_points(center, spacing, far ? VoxelRule::Center : VoxelRule::Eight);
    const auto surf = patch_points(p, far ? PatchRule::Centroid : PatchRule::Five);
    const Vec3 moment = p.length * p.t;
    Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
    for (const auto& a : vol)
        for (const auto& s : surf) e += (a.w * s.w) * (green_dyad(a.r - s.r, f.k0()) * moment.cast<cplx>());
    return e / cplx(0.0, f.omega() * kEps0);
}

cplx coupling_entry(const VoxelGrid& grid, const SurfaceMesh& mesh, const Index3& i, std::size_t p, int chi, const Frequency& f,
                    CouplingRule rule) {
    if (p >= mesh.size()) throw ArgumentError("coupling_entry: patch index out of range");
    if (chi < 0 || chi > 2) throw ArgumentError("coupling_entry: component out of range");
    const Vec3 c = grid.center(i);
    return coupling_field(c, grid.spacing(), mesh.patches[p], f, rule)(chi);
}

Patch end_charge(const Patch& p, int s) {
    Patch e = p;
    e.center = p.center + 0.5 * s * p.length * p.t;
    const Vec3& axis = p.end_axis[s > 0 ? 1 : 0];
    if (axis.squaredNorm() > 0.0) {
        e.t = axis.normalized();
        e.b = (p.b - p.b.dot(e.t) * e.t).normalized();
    }
    e.end_axis = {Vec3::Zero(), Vec3::Zero()};
    return e;
}

namespace {

// Tensor Gauss points on a patch, weights summing to 1.
std::vector<WeightedPoint> outer_points(const Patch& p, int order) {
    const Rule1D r = gauss_legendre(order);
    std::vector<WeightedPoint> out;
    out.reserve(r.x.size() * r.x.size());
    for (std::size_t i = 0; i < r.x.size(); ++i)
        for (std::size_t j = 0; j < r.x.size(); ++j)
            out.push_back({p.center + 0.5 * r.x[i] * p.length * p.t + 0.5 * r.x[j] * p.width * p.b, 0.25 * r.w[i] * r.w[j]});
    return out;
}

// Symmetric mean of g over patches a and b. The rule depends only on the two
// patches, so a charge cell shared by neighbours gets identical terms.
cplx mean_green(const Patch& a, const Patch& b, double k0) {
    cplx acc = 0.0;
    const double dist = (a.center - b.center).norm();
    if (dist <= kSurfaceNearFactor * std::max(a.size(), b.size())) {
        const Rect ra = rect_of(a);
        const Rect rb = rect_of(b);
        for (const auto& q : outer_points(a, kSurfaceOuterOrder)) acc += q.w * rect_mean_green(q.r, rb, k0);
        for (const auto& q : outer_points(b, kSurfaceOuterOrder)) acc += q.w * rect_mean_green(q.r, ra, k0);
        return 0.5 * acc;
    }
    const auto pa = patch_points(a, PatchRule::Five);
    const auto pb = patch_points(b, PatchRule::Five);
    for (const auto& qa : pa)
        for (const auto& qb : pb) acc += (qa.w * qb.w) * green_scalar(qa.r, qb.r, k0);
    return acc;
}

}  // namespace

// Patch-averaged mixed-potential form: vector potential over the patches and
// scalar potential between the end-charge cells.
cplx surface_entry(const Patch& m, const Patch& n, const Frequency& f) {
    const double k0 = f.k0();
    const cplx jw(0.0, f.omega());
    cplx z = jw * kMu0 * m.length * n.length * m.t.dot(n.t) * mean_green(m, n, k0);
    cplx phi = 0.0;
    for (int s : {-1, 1})
        for (int sp : {-1, 1}) phi += static_cast<double>(s * sp) * mean_green(end_charge(m, s), end_charge(n, sp), k0);
    return z + phi / (jw * kEps0);
}

CMatrix surface_block(const SurfaceMesh& a, const SurfaceMesh& b, const Frequency& f) {
    const bool same = &a == &b;
    if (!same) {
        for (const auto& p : a.patches)
            for (const auto& q : b.patches)
                if ((p.center - q.center).norm() <= 1e-9 * std::max(p.size(), q.size()))
                    throw GeometryError("surfaces '" + a.name + "' and '" + b.name + "' overlap");
    }
    const auto rows = static_cast<Eigen::Index>(a.size());
    const auto cols = static_cast<Eigen::Index>(b.size());
    CMatrix z(rows, cols);
#pragma omp parallel for schedule(dynamic, 4)
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index j0 = same ? i : 0;
        for (Eigen::Index j = j0; j < cols; ++j) {
            z(i, j) = surface_entry(a.patches[static_cast<std::size_t>(i)], b.patches[static_cast<std::size_t>(j)], f);
            if (same) z(j, i) = z(i, j);
        }
    }
    return z;
}

CVector excitation_vector(const SurfaceMesh& mesh, std::size_t port) {
    if (port >= mesh.ports.size()) throw ArgumentError("excitation_vector: port index out of range");
    const auto& p = mesh.ports[port];
    if (p.patch >= mesh.size()) throw ArgumentError("excitation_vector: port patch out of range");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(mesh.size()));
    v(static_cast<Eigen::Index>(p.patch)) = static_cast<double>(p.polarity);
    return v;
}

}  // namespace vsie::em
