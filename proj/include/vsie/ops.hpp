// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "vsie/em.hpp"
#include "vsie/tensor.hpp"

namespace vsie::ops {

using em::Index3;

namespace detail {
struct FftPlans;
}

/// Multilevel block-Toeplitz operator with a symmetric 3x3 dyadic kernel,
/// applied through circulant embedding (2n per axis) and FFTs.
/// Vectors are component-major: all x, then all y, then all z.
class DyadicToeplitz {
public:
    explicit DyadicToeplitz(const em::ToeplitzKernels& kernels);
    ~DyadicToeplitz();
    DyadicToeplitz(const DyadicToeplitz&) = delete;
    DyadicToeplitz& operator=(const DyadicToeplitz&) = delete;

    const Index3& dims() const noexcept { return dims_; }
    std::size_t n() const noexcept { return dims_[0] * dims_[1] * dims_[2]; }

    /// Zero-padded spectra of the three input components.
    struct Spectrum {
        std::array<std::vector<cplx>, 3> comp;
    };
    Spectrum forward(const CVector& x) const;
    /// Multiplies a spectrum by this kernel and transforms back (cropped).
    CVector finish(const Spectrum& s) const;
    CVector apply(const CVector& x) const { return finish(forward(x)); }

private:
    Index3 dims_;
    std::size_t big_ = 0;  // 8 n
    std::array<std::vector<cplx>, 6> spectra_;
    std::unique_ptr<detail::FftPlans> fft_;
};

/// Convolution with an even scalar kernel given on the first octant. Uses the
/// same zero padding as DyadicToeplitz, so spectra of one can feed the other.
class ScalarToeplitz {
public:
    explicit ScalarToeplitz(const tensor::DenseTensor& kernel);
    ~ScalarToeplitz();
    ScalarToeplitz(const ScalarToeplitz&) = delete;
    ScalarToeplitz& operator=(const ScalarToeplitz&) = delete;

    std::size_t n() const noexcept { return dims_[0] * dims_[1] * dims_[2]; }
    std::vector<cplx> forward(const cplx* x) const;
    /// y += a * (kernel * x) for a padded spectrum of x.
    void finish(const std::vector<cplx>& spec, cplx a, cplx* y) const;

private:
    Index3 dims_;
    std::size_t big_ = 0;
    std::vector<cplx> spectrum_;
    std::unique_ptr<detail::FftPlans> fft_;
};

// ---------------------------------------------------------------------------

struct ToeplitzOptions {
    /// 0 keeps the kernels dense; otherwise each component is Tucker-compressed.
    double tucker_tol = 0.0;
};

/// VIE body operator on a voxel grid.
class ToeplitzFFTOperator {
public:
    ToeplitzFFTOperator(const em::VoxelGrid& grid, const em::Frequency& f, const ToeplitzOptions& opts = {});
    /// Reuses precomputed kernels (they depend only on dims, spacing and k0).
    ToeplitzFFTOperator(const em::VoxelGrid& grid, const em::ToeplitzKernels& kernels, const ToeplitzOptions& opts = {});

    std::size_t size() const noexcept { return 3 * grid_->n_voxels(); }
    const em::VoxelGrid& grid() const noexcept { return *grid_; }
    const em::ToeplitzKernels& kernels() const noexcept { return kernels_; }

    /// eps_r j - chi N j with N = I + G.
    CVector apply(const CVector& j) const;
    /// The symmetric form used in the coupled system: body rows give
    /// j / chi - G (P j) with P the body mask; rows outside the body are the identity.
    CVector apply_symmetric(const CVector& j) const;
    /// G j alone (voxel-averaged scattered field times i omega eps0).
    CVector apply_green(const CVector& j) const { return toeplitz_->apply(j); }

    /// Dense element count over the compressed count of the kernels (1 when dense).
    tensor::Ratio kernel_compression() const noexcept { return kernel_cf_; }

private:
    void build(const ToeplitzOptions& opts);

    const em::VoxelGrid* grid_;
    em::ToeplitzKernels kernels_;
    std::unique_ptr<DyadicToeplitz> toeplitz_;
    tensor::Ratio kernel_cf_{1, 1};
    std::vector<cplx> inv_chi_;  // 1/chi in the body, 0 outside
};

// ---------------------------------------------------------------------------

/// Concatenated unknowns of several meshes.
struct PatchSet {
    std::vector<em::Patch> patches;
    /// Scaling factor per unknown (the symmetric diagonal scaling of the system).
    CVector alpha;

    std::size_t size() const noexcept { return patches.size(); }
};

/// Scale shared by all blocks of the symmetric coupled system:
/// coil rows are divided by s = dV / (i omega eps0).
cplx system_scale(const em::VoxelGrid& grid, const em::Frequency& f);

/// Per-mesh diagonal scaling sqrt(|s| / mean |Z_mm|).
double mesh_alpha(const em::SurfaceMesh& mesh, const em::Frequency& f, cplx s);

/// Coupling block B = -i omega eps0 * E (masked), one column per patch, with
/// the given quadrature. Columns are scaled by alpha.
CMatrix dense_coupling(const em::VoxelGrid& grid, const PatchSet& set, const em::Frequency& f, em::CouplingRule rule);

/// Surface block alpha_m alpha_n Z / s.
CMatrix dense_surface(const PatchSet& rows, const PatchSet& cols, const em::Frequency& f, cplx s);

struct PfftOptions {
    std::size_t stencil = 5;
    /// Extra voxels added around stencil boxes when selecting precorrected pairs.
    std::size_t precorrection_gap = 1;
    /// Refuse extended grids larger than this multiple of the body grid per axis.
    double max_extension = 4.0;
};

/// Throws GeometryError naming the patch when the extended grid needed by
/// the stencils of these patches exceeds max_extension times the body grid.
void check_pfft_margin(const std::vector<em::Patch>& patches, const em::VoxelGrid& grid, const PfftOptions& opts);

/// Near block [[A_nn, B_n^T], [B_n, A_bb]] with grid-mediated coil
/// interactions and sparse precorrection. Coil pairs meet on the grid in
/// mixed-potential form (current moments and end charges convolved with g);
/// coil-voxel pairs through point dipoles averaged over the voxel.
class PfftNearOperator {
public:
    PfftNearOperator(const PatchSet& near, const ToeplitzFFTOperator& body, const em::Frequency& f, const PfftOptions& opts = {});
    ~PfftNearOperator();

    std::size_t coil_size() const noexcept { return m_; }
    std::size_t body_size() const noexcept { return body_->size(); }
    std::size_t size() const noexcept { return m_ + body_->size(); }

    /// x = (x_n | x_b).
    CVector apply(const CVector& x) const;

    const Index3& extended_dims() const noexcept { return ext_dims_; }
    const Vec3& extended_origin() const noexcept { return ext_origin_; }
    /// Projection of scaled patch moments onto the extended grid (3 N_ext x m).
    const Eigen::SparseMatrix<double>& projection() const noexcept { return proj_; }
    /// Projection of the scaled end charges of each patch (N_ext x m).
    const Eigen::SparseMatrix<double>& charge_projection() const noexcept { return charge_; }
    std::size_t precorrected_coil_pairs() const noexcept { return static_cast<std::size_t>(pc_cc_.nonZeros()); }
    std::size_t precorrected_body_pairs() const noexcept { return static_cast<std::size_t>(pc_bc_.nonZeros()); }

    /// Grid-mediated (uncorrected) blocks, column by column; for tests.
    CMatrix grid_coil_block() const;
    CMatrix grid_coupling_block() const;
    /// Corrected blocks; for tests.
    CMatrix coil_block() const;
    CMatrix coupling_block() const;

private:
    void grid_apply(const CVector& xc, const CVector* xb, CVector* yc, CVector* yb) const;

    std::size_t m_ = 0;
    const ToeplitzFFTOperator* body_;
    PatchSet near_;
    em::Frequency freq_;
    Index3 ext_dims_{};
    Vec3 ext_origin_ = Vec3::Zero();
    std::vector<std::size_t> body_to_ext_;  // body voxel -> extended node
    Eigen::SparseMatrix<double> proj_;    // current moments
    Eigen::SparseMatrix<double> charge_;  // end charges, N_ext x m
    std::unique_ptr<ScalarToeplitz> kg_;
    std::unique_ptr<DyadicToeplitz> kvb_;
    double k2_ = 0.0;
    double inv_dv_ = 0.0;
    Eigen::SparseMatrix<cplx> pc_cc_;  // m x m
    Eigen::SparseMatrix<cplx> pc_bc_;  // 3 n_v x m
};

/// Lagrange interpolation weights of a point on the nodes of a (stencil)^3 box.
/// `first` receives the lowest node index per axis.
std::vector<double> lagrange_weights(const Vec3& point, const Vec3& origin, double spacing, std::size_t stencil, std::array<long, 3>& first);

/// Dense version of the near block, for validation.
class DenseNearOperator {
public:
    DenseNearOperator(const PatchSet& near, const ToeplitzFFTOperator& body, const em::Frequency& f);
    std::size_t size() const noexcept { return static_cast<std::size_t>(acc_.rows()) + body_->size(); }
    CVector apply(const CVector& x) const;
    const CMatrix& coil_block() const noexcept { return acc_; }
    const CMatrix& coupling_block() const noexcept { return bc_; }

private:
    const ToeplitzFFTOperator* body_;
    CMatrix acc_;
    CMatrix bc_;
};

// ---------------------------------------------------------------------------

struct TTCouplingOptions {
    double tol = 1e-3;
    std::size_t max_rank = 64;
    std::size_t max_sweeps = 8;
    std::uint64_t seed = 1;
};

/// Far coupling E_chi(i, p) as three TT tensors over (n1, n2, n3, m_f).
class TTCouplingOperator {
public:
    TTCouplingOperator(const em::VoxelGrid& grid, const std::vector<em::Patch>& far, const em::Frequency& f, const TTCouplingOptions& opts = {});

    std::size_t rows() const noexcept { return 3 * n_v_; }
    std::size_t cols() const noexcept { return m_; }

    /// Unmasked fields [E_1 x; E_2 x; E_3 x].
    CVector apply(const CVector& x) const;
    CVector apply_transpose(const CVector& y) const;

    const tensor::TTTensor& tt(int chi) const { return tts_.at(static_cast<std::size_t>(chi)); }
    std::size_t evaluations() const noexcept { return evaluations_; }
    std::uint64_t dense_elements() const noexcept { return 3ull * n_v_ * m_; }
    tensor::Ratio compression() const;
    double validation_error() const noexcept { return validation_error_; }
    bool converged() const noexcept { return converged_; }

private:
    std::size_t n_v_ = 0;
    std::size_t m_ = 0;
    std::array<tensor::TTTensor, 3> tts_;
    std::size_t evaluations_ = 0;
    double validation_error_ = 0.0;
    bool converged_ = true;
};

// ---------------------------------------------------------------------------

/// The hybrid block operator on (x_f | x_n | x_b).
class HybridSystem {
public:
    struct Parts {
        CMatrix a_ff;                              // scaled dense far-far block
        tensor::LowRankFactors fn;                 // scaled A_nf ~= U V^*
        std::shared_ptr<TTCouplingOperator> far_coupling;
        CVector alpha_f;
        std::shared_ptr<const PfftNearOperator> pfft;
        std::shared_ptr<const DenseNearOperator> dense_near;
        const ToeplitzFFTOperator* body = nullptr;
        cplx field_scale;  // -i omega eps0
    };

    explicit HybridSystem(Parts parts);

    std::size_t far_size() const noexcept { return m_f_; }
    std::size_t near_size() const noexcept { return m_n_; }
    std::size_t body_size() const noexcept { return n_b_; }
    std::size_t size() const noexcept { return m_f_ + m_n_ + n_b_; }

    CVector apply(const CVector& x) const;
    const Parts& parts() const noexcept { return p_; }

private:
    CVector near_apply(const CVector& x) const;
    Parts p_;
    std::size_t m_f_;
    std::size_t m_n_;
    std::size_t n_b_;
    std::vector<char> mask_;
};

}  // namespace vsie::ops
