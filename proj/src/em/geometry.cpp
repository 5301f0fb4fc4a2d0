// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "vsie/em.hpp"

namespace vsie::em {

VoxelGrid::VoxelGrid(Index3 dims, double spacing, Vec3 origin) : dims_(dims), spacing_(spacing), origin_(std::move(origin)) {
    for (auto n : dims_)
        if (n == 0) throw GeometryError("voxel grid extents must be positive");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw GeometryError("voxel spacing must be positive");
    if (!origin_.allFinite()) throw GeometryError("voxel grid origin must be finite");
    eps_r_.assign(n_voxels(), cplx(1.0));
    mask_.assign(n_voxels(), 0);
}

std::size_t VoxelGrid::linear(const Index3& i) const {
    if (i[0] >= dims_[0] || i[1] >= dims_[1] || i[2] >= dims_[2]) throw ArgumentError("voxel index out of range");
    return i[0] + dims_[0] * (i[1] + dims_[1] * i[2]);
}

Index3 VoxelGrid::multi(std::size_t lin) const {
    if (lin >= n_voxels()) throw ArgumentError("voxel index out of range");
    return {lin % dims_[0], (lin / dims_[0]) % dims_[1], lin / (dims_[0] * dims_[1])};
}

Vec3 VoxelGrid::center(const Index3& i) const {
    return origin_ + spacing_ * Vec3(static_cast<double>(i[0]) + 0.5, static_cast<double>(i[1]) + 0.5, static_cast<double>(i[2]) + 0.5);
}

void VoxelGrid::set_eps_r(std::size_t lin, cplx eps_r) {
    if (lin >= n_voxels()) throw ArgumentError("voxel index out of range");
    if (!std::isfinite(eps_r.real()) || !std::isfinite(eps_r.imag())) throw ArgumentError("permittivity must be finite");
    const char body = eps_r != cplx(1.0) ? 1 : 0;
    body_count_ += static_cast<std::size_t>(body) - static_cast<std::size_t>(mask_[lin]);
    mask_[lin] = body;
    eps_r_[lin] = eps_r;
}

std::pair<Vec3, Vec3> VoxelGrid::body_bounds() const {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::size_t l = 0; l < n_voxels(); ++l) {
        if (!mask_[l]) continue;
        const Vec3 c = center(l);
        lo = lo.cwiseMin(c - Vec3::Constant(0.5 * spacing_));
        hi = hi.cwiseMax(c + Vec3::Constant(0.5 * spacing_));
    }
    if (body_count_ == 0) {
        lo = origin_;
        hi = origin_ + spacing_ * Vec3(static_cast<double>(dims_[0]), static_cast<double>(dims_[1]), static_cast<double>(dims_[2]));
    }
    return {lo, hi};
}

std::array<Vec3, 4> Patch::vertices() const {
    const Vec3 du = 0.5 * length * t;
    const Vec3 dv = 0.5 * width * b;
    return {center - du - dv, center + du - dv, center + du + dv, center - du + dv};
}

void SurfaceMesh::validate() const {
    for (std::size_t k = 0; k < patches.size(); ++k) {
        const auto& p = patches[k];
        const std::string where = "surface '" + name + "' patch " + std::to_string(k);
        if (!(p.length > 0.0) || !(p.width > 0.0)) throw GeometryError(where + ": non-positive patch extent");
        if (std::abs(p.t.norm() - 1.0) > 1e-12 || std::abs(p.b.norm() - 1.0) > 1e-12 || std::abs(p.t.dot(p.b)) > 1e-12)
            throw GeometryError(where + ": patch directions are not orthonormal");
        if (!p.center.allFinite()) throw GeometryError(where + ": non-finite centre");
        for (const auto& ax : p.end_axis)
            if (ax.squaredNorm() > 0.0 && (std::abs(ax.norm() - 1.0) > 1e-12 || std::abs(ax.dot(p.b)) > 1e-12 || ax.dot(p.t) <= 0.0))
                throw GeometryError(where + ": end-charge axis must be a unit vector across the patch width, along +t");
    }
    for (const auto& port : ports) {
        if (port.patch >= patches.size()) throw GeometryError("port '" + port.name + "' names a patch outside surface '" + name + "'");
        if (port.polarity != 1 && port.polarity != -1) throw GeometryError("port '" + port.name + "' polarity must be +1 or -1");
    }
}

}  // namespace vsie::em
