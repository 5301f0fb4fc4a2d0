// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "vsie/geometry.hpp"

namespace vsie::scene {

std::pair<Vec3, Vec3> orthonormal_frame(const Vec3& n) {
    const Vec3 z = n.normalized();
    // Pick the coordinate axis least aligned with n.
    Eigen::Index k = 0;
    z.cwiseAbs().minCoeff(&k);
    const Vec3 e1 = (Vec3::Unit(k) - z(k) * z).normalized();
    return {e1, z.cross(e1)};
}

namespace {

void check_axis(const Vec3& a, const char* what) {
    if (!a.allFinite() || a.norm() < 1e-12) throw GeometryError(std::string(what) + " must be a nonzero vector");
}

}  // namespace

em::SurfaceMesh make_loop(const LoopSpec& spec, std::string name) {
    check_axis(spec.normal, "loop normal");
    if (!(spec.radius > 0.0) || !(spec.width > 0.0)) throw GeometryError("loop radius and width must be positive");
    if (spec.patches < 3) throw GeometryError("loop needs at least 3 patches");
    const Vec3 n = spec.normal.normalized();
    const auto [e1, e2] = orthonormal_frame(n);
    const double half = kPi / static_cast<double>(spec.patches);
    const double chord = 2.0 * spec.radius * std::sin(half);
    const double apothem = spec.radius * std::cos(half);

    em::SurfaceMesh mesh;
    mesh.name = std::move(name);
    mesh.patches.reserve(spec.patches);
    for (std::size_t k = 0; k < spec.patches; ++k) {
        const double th = 2.0 * half * static_cast<double>(k);
        const Vec3 radial = std::cos(th) * e1 + std::sin(th) * e2;
        em::Patch p;
        p.center = spec.center + apothem * radial;
        p.t = -std::sin(th) * e1 + std::cos(th) * e2;
        p.b = n;
        p.length = chord;
        p.width = spec.width;
        // Charge cells at the ring vertices follow the bisecting tangent.
        for (int s : {0, 1}) {
            const double tv = th + (2 * s - 1) * half;
            p.end_axis[static_cast<std::size_t>(s)] = -std::sin(tv) * e1 + std::cos(tv) * e2;
        }
        mesh.patches.push_back(p);
    }
    return mesh;
}

em::SurfaceMesh make_shell(const ShellSpec& spec, std::string name) {
    check_axis(spec.axis, "shell axis");
    if (!(spec.radius > 0.0) || !(spec.length > 0.0)) throw GeometryError("shell radius and length must be positive");
    if (spec.axial < 1 || spec.azimuthal < 3) throw GeometryError("shell needs >= 1 axial and >= 3 azimuthal patches");
    const Vec3 a = spec.axis.normalized();
    const auto [e1, e2] = orthonormal_frame(a);
    const double half = kPi / static_cast<double>(spec.azimuthal);
    const double chord = 2.0 * spec.radius * std::sin(half);
    const double apothem = spec.radius * std::cos(half);
    const double dz = spec.length / static_cast<double>(spec.axial);

    em::SurfaceMesh mesh;
    mesh.name = std::move(name);
    mesh.patches.reserve(spec.axial * spec.azimuthal);
    for (std::size_t ia = 0; ia < spec.axial; ++ia) {
        const double z = -0.5 * spec.length + (static_cast<double>(ia) + 0.5) * dz;
        for (std::size_t ip = 0; ip < spec.azimuthal; ++ip) {
            const double th = 2.0 * half * static_cast<double>(ip);
            em::Patch p;
            p.center = spec.center + z * a + apothem * (std::cos(th) * e1 + std::sin(th) * e2);
            p.t = a;
            p.b = -std::sin(th) * e1 + std::cos(th) * e2;
            p.length = dz;
            p.width = chord;
            mesh.patches.push_back(p);
        }
    }
    return mesh;
}

void rasterize_sphere(em::VoxelGrid& grid, const SphereSpec& spec) {
    if (!(spec.radius >= 0.0) || !std::isfinite(spec.radius)) throw GeometryError("sphere radius must be non-negative");
    if (spec.radius == 0.0) return;
    for (std::size_t l = 0; l < grid.n_voxels(); ++l)
        if ((grid.center(l) - spec.center).norm() < spec.radius) grid.set_eps_r(l, spec.eps_r);
}

}  // namespace vsie::scene
