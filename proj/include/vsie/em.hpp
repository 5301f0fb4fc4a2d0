// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "vsie/common.hpp"
#include "vsie/tensor.hpp"

namespace vsie::em {

/// Operating frequency with derived angular frequency and vacuum wavenumber.
class Frequency {
public:
    explicit Frequency(double hz);

    double hz() const noexcept { return hz_; }
    double omega() const noexcept { return omega_; }
    double k0() const noexcept { return k0_; }

private:
    double hz_;
    double omega_;
    double k0_;
};

using Index3 = std::array<std::size_t, 3>;

/// Uniform voxel grid. `origin` is the minimum corner; voxel (i,j,k) is
/// centred at origin + (i+1/2, j+1/2, k+1/2) * spacing. Voxels are
/// linearized column-major (i fastest).
class VoxelGrid {
public:
    VoxelGrid() = default;
    /// Free-space grid: eps_r = 1 and an empty mask.
    VoxelGrid(Index3 dims, double spacing, Vec3 origin);

    const Index3& dims() const noexcept { return dims_; }
    double spacing() const noexcept { return spacing_; }
    const Vec3& origin() const noexcept { return origin_; }
    std::size_t n_voxels() const noexcept { return dims_[0] * dims_[1] * dims_[2]; }
    double voxel_volume() const noexcept { return spacing_ * spacing_ * spacing_; }

    std::size_t linear(const Index3& i) const;
    Index3 multi(std::size_t lin) const;
    Vec3 center(const Index3& i) const;
    Vec3 center(std::size_t lin) const { return center(multi(lin)); }

    /// Sets the permittivity of one voxel. The mask follows: a voxel is in the
    /// body exactly when eps_r != 1.
    void set_eps_r(std::size_t lin, cplx eps_r);
    cplx eps_r(std::size_t lin) const { return eps_r_.at(lin); }
    cplx chi(std::size_t lin) const { return eps_r_.at(lin) - 1.0; }
    bool in_body(std::size_t lin) const { return mask_.at(lin) != 0; }
    std::size_t body_count() const noexcept { return body_count_; }

    /// Axis-aligned box of the masked voxels (empty mask: the whole grid).
    std::pair<Vec3, Vec3> body_bounds() const;

private:
    Index3 dims_{0, 0, 0};
    double spacing_ = 0.0;
    Vec3 origin_ = Vec3::Zero();
    std::vector<cplx> eps_r_;
    std::vector<char> mask_;
    std::size_t body_count_ = 0;
};

/// Flat rectangular patch carrying one pulse unknown along `t`.
/// `length` is measured along t, `width` along b; n = t x b.
struct Patch {
    Vec3 center = Vec3::Zero();
    Vec3 t = Vec3::UnitX();
    Vec3 b = Vec3::UnitY();
    double length = 0.0;
    double width = 0.0;
    /// Direction of the end-charge cell at the -t end [0] and +t end [1].
    /// Zero means t. At a bend the generators use the bisector, so that both
    /// patches meeting at an edge carry the same cell.
    std::array<Vec3, 2> end_axis{Vec3::Zero(), Vec3::Zero()};

    Vec3 normal() const { return t.cross(b); }
    double area() const { return length * width; }
    double size() const { return std::max(length, width); }
    std::array<Vec3, 4> vertices() const;
};

/// Patch-sized cell centred on the end edge at side s (+1 or -1) that
/// carries the end charge of the pulse current.
Patch end_charge(const Patch& p, int s);

enum class Domain { Near, Far };

/// Delta-gap port across one patch. Polarity is +1 or -1 relative to t.
struct Port {
    std::string name;
    std::size_t patch = 0;
    int polarity = 1;
};

struct SurfaceMesh {
    std::string name;
    std::vector<Patch> patches;
    Domain domain = Domain::Near;
    std::vector<Port> ports;

    std::size_t size() const noexcept { return patches.size(); }
    /// Throws GeometryError on degenerate patches or bad port indices.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Green's functions

/// e^{-i k0 R} / (4 pi R). Throws SingularityError when R == 0.
cplx green_scalar(const Vec3& r, const Vec3& rp, double k0);

/// (k0^2 I + grad grad) g evaluated at separation d = r - r'.
Dyad green_dyad(const Vec3& d, double k0);

/// grad grad g at separation d, closed form.
Dyad green_hessian(const Vec3& d, double k0);

/// Axis-aligned description of a flat rectangle: centre, in-plane unit axes
/// and half extents.
struct Rect {
    Vec3 center;
    Vec3 eu;
    Vec3 ev;
    double hu;
    double hv;

    double area() const { return 4.0 * hu * hv; }
};

Rect rect_of(const Patch& p);

/// Integral of 1/(4 pi |p - r'|) over the rectangle, in closed form.
double rect_static_potential(const Vec3& p, const Rect& r);

/// Mean of g(p, r') over the rectangle: closed-form static part plus
/// Gauss quadrature on the smooth remainder (e^{-ikR} - 1)/(4 pi R).
cplx rect_mean_green(const Vec3& p, const Rect& r, double k0, int order = 4);

// ---------------------------------------------------------------------------
// Quadrature

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};

/// Gauss-Legendre rule on [-1, 1].
Rule1D gauss_legendre(int n);

struct WeightedPoint {
    Vec3 r;
    double w;  // weights sum to 1
};

enum class PatchRule { Centroid, Five };
enum class VoxelRule { Center, Eight };

std::vector<WeightedPoint> patch_points(const Patch& p, PatchRule rule);
std::vector<WeightedPoint> voxel_points(const Vec3& center, double spacing, VoxelRule rule);

// ---------------------------------------------------------------------------
// Volume kernels

/// First-column data of the six unique components of the PWC VIE operator
/// G = N - I (averaged over the testing voxel), for offsets o >= 0.
/// Components are ordered xx, xy, xz, yy, yz, zz.
struct ToeplitzKernels {
    Index3 dims{0, 0, 0};
    std::array<tensor::DenseTensor, 6> comp;

    static std::size_t component(int u, int v);
    /// Value at a signed offset, using the parity of each component.
    cplx at(const std::array<long, 3>& o, int u, int v) const;
};

/// Sign picked up by component (u,v) when the offset axes flip: +1 for the
/// diagonal, s_u * s_v otherwise.
int component_parity(int u, int v, const std::array<int, 3>& signs);

/// Double voxel integrals for one non-negative offset: the scalar part
/// S = int int g and T_uv = int int d_u d_v g (in the distributional sense).
struct VoxelPair {
    cplx scalar;
    std::array<cplx, 6> hessian;
};
VoxelPair vie_pair_integrals(const Index3& offset, double spacing, double k0);

ToeplitzKernels assemble_vie_kernels(const Index3& dims, double spacing, double k0);
ToeplitzKernels assemble_vie_kernels(const VoxelGrid& grid, double k0);

// ---------------------------------------------------------------------------
// Coupling and surface blocks

enum class CouplingRule {
    Far,   // 1 volume x 1 surface point
    Near,  // 8 volume x 5 surface points
};

/// Voxel-averaged electric field at a voxel centred at `center` radiated by a
/// 1 A pulse current on the patch.
Eigen::Vector3cd coupling_field(const Vec3& center, double spacing, const Patch& p, const Frequency& f, CouplingRule rule);

/// Component chi (0..2) of the field at voxel i from patch p.
cplx coupling_entry(const VoxelGrid& grid, const SurfaceMesh& mesh, const Index3& i, std::size_t p, int chi, const Frequency& f,
                    CouplingRule rule = CouplingRule::Far);

/// Pulse-basis EFIE impedance between patches m and n in patch-averaged
/// mixed-potential form: i w mu0 l_m l_n t_m.t_n <g>_{m,n} plus the scalar
/// potential of the end charges (see end_charge). Each mean of g picks its rule
/// from the two patches or cells involved: near ones integrate one side in
/// closed form under an outer Gauss rule on the other, symmetrized; far ones
/// use 5 x 5 points.
cplx surface_entry(const Patch& m, const Patch& n, const Frequency& f);

/// Pairs closer than this multiple of the larger patch size use the near form.
inline constexpr double kSurfaceNearFactor = 4.0;
/// Outer Gauss order per axis of the near form.
inline constexpr int kSurfaceOuterOrder = 6;

CMatrix surface_block(const SurfaceMesh& a, const SurfaceMesh& b, const Frequency& f);

/// Delta-gap excitation: polarity on the port patch, zero elsewhere.
CVector excitation_vector(const SurfaceMesh& mesh, std::size_t port);

}  // namespace vsie::em
