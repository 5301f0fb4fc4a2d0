// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vsie/em.hpp"

namespace vsie::scene {

struct LoopSpec {
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    double radius = 0.0;
    double width = 0.0;
    std::size_t patches = 0;
};

struct ShellSpec {
    Vec3 center = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
    double radius = 0.0;
    double length = 0.0;
    std::size_t axial = 0;
    std::size_t azimuthal = 0;
};

struct SphereSpec {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
    cplx eps_r{1.0, 0.0};
};

/// Two unit vectors completing `n` to a right-handed orthonormal frame.
std::pair<Vec3, Vec3> orthonormal_frame(const Vec3& n);

/// Ring of flat strips inscribed in the circle. Each patch spans one chord
/// (current along the chord) and extends `width` along the loop normal, so
/// neighbours share their end edges exactly. Patch 0 is centred on the
/// first frame axis.
em::SurfaceMesh make_loop(const LoopSpec& spec, std::string name = "loop");

/// Open cylinder of axial x azimuthal flat patches inscribed in the
/// circle; the current runs along the axis.
em::SurfaceMesh make_shell(const ShellSpec& spec, std::string name = "shell");

/// Sets eps_r on every voxel whose centre lies inside the sphere.
void rasterize_sphere(em::VoxelGrid& grid, const SphereSpec& spec);

}  // namespace vsie::scene
