// SPDX-License-Identifier: Apache-2.0
#include <mutex>

#include <fftw3.h>

#include "vsie/ops.hpp"

namespace vsie::ops {

namespace {

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

namespace detail {

struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit FftPlans(const Index3& big) {
        std::vector<cplx> scratch(big[0] * big[1] * big[2]);
        // Column-major data: the last FFTW dimension varies fastest.
        const int n0 = static_cast<int>(big[2]);
        const int n1 = static_cast<int>(big[1]);
        const int n2 = static_cast<int>(big[0]);
        std::lock_guard lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fwd = fftw_plan_dft_3d(n0, n1, n2, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, flags);
        bwd = fftw_plan_dft_3d(n0, n1, n2, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, flags);
        if (!fwd || !bwd) throw Error("FFTW planning failed");
    }
    ~FftPlans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
};

}  // namespace detail

namespace {

Index3 padded(const Index3& d) { return {2 * d[0], 2 * d[1], 2 * d[2]}; }

// Circulant embedding of a first-octant kernel; `sign` gives the parity of a
// signed offset.
template <class Sign>
std::vector<cplx> embed(const tensor::DenseTensor& t, const Index3& dims, Sign sign) {
    const Index3 big = padded(dims);
    std::vector<cplx> s(big[0] * big[1] * big[2], cplx{});
    for (std::size_t k = 0; k < big[2]; ++k) {
        if (k == dims[2]) continue;
        const std::size_t ak = k < dims[2] ? k : big[2] - k;
        const int sk = k < dims[2] ? 1 : -1;
        for (std::size_t j = 0; j < big[1]; ++j) {
            if (j == dims[1]) continue;
            const std::size_t aj = j < dims[1] ? j : big[1] - j;
            const int sj = j < dims[1] ? 1 : -1;
            for (std::size_t i = 0; i < big[0]; ++i) {
                if (i == dims[0]) continue;
                const std::size_t ai = i < dims[0] ? i : big[0] - i;
                const int si = i < dims[0] ? 1 : -1;
                s[i + big[0] * (j + big[1] * k)] = static_cast<double>(sign(std::array<int, 3>{si, sj, sk})) * t[ai + dims[0] * (aj + dims[1] * ak)];
            }
        }
    }
    return s;
}

std::vector<cplx> pad_forward(const detail::FftPlans& fft, const Index3& dims, const cplx* src) {
    const Index3 big = padded(dims);
    std::vector<cplx> buf(big[0] * big[1] * big[2], cplx{});
    for (std::size_t k = 0; k < dims[2]; ++k)
        for (std::size_t j = 0; j < dims[1]; ++j)
            std::copy_n(src + dims[0] * (j + dims[1] * k), dims[0], buf.data() + big[0] * (j + big[1] * k));
    fftw_execute_dft(fft.fwd, as_fftw(buf.data()), as_fftw(buf.data()));
    return buf;
}

// Inverse transform of acc (destroyed) and dst += a * crop(acc) / size.
void inverse_crop(const detail::FftPlans& fft, const Index3& dims, std::vector<cplx>& acc, cplx a, cplx* dst) {
    const Index3 big = padded(dims);
    fftw_execute_dft(fft.bwd, as_fftw(acc.data()), as_fftw(acc.data()));
    const cplx scale = a / static_cast<double>(acc.size());
    for (std::size_t k = 0; k < dims[2]; ++k)
        for (std::size_t j = 0; j < dims[1]; ++j) {
            const cplx* row = acc.data() + big[0] * (j + big[1] * k);
            cplx* out = dst + dims[0] * (j + dims[1] * k);
            for (std::size_t i = 0; i < dims[0]; ++i) out[i] += row[i] * scale;
        }
}

}  // namespace

DyadicToeplitz::DyadicToeplitz(const em::ToeplitzKernels& kernels) : dims_(kernels.dims) {
    const Index3 big = padded(dims_);
    big_ = big[0] * big[1] * big[2];
    fft_ = std::make_unique<detail::FftPlans>(big);
    static constexpr int uv[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
    for (std::size_t c = 0; c < 6; ++c) {
        const int u = uv[c][0];
        const int v = uv[c][1];
        spectra_[c] = embed(kernels.comp[c], dims_, [u, v](const std::array<int, 3>& sg) { return em::component_parity(u, v, sg); });
        fftw_execute_dft(fft_->fwd, as_fftw(spectra_[c].data()), as_fftw(spectra_[c].data()));
    }
}

DyadicToeplitz::~DyadicToeplitz() = default;

DyadicToeplitz::Spectrum DyadicToeplitz::forward(const CVector& x) const {
    const std::size_t nv = n();
    if (static_cast<std::size_t>(x.size()) != 3 * nv) throw ArgumentError("Toeplitz apply: vector length must be 3 n_v");
    Spectrum out;
    for (std::size_t v = 0; v < 3; ++v) out.comp[v] = pad_forward(*fft_, dims_, x.data() + v * nv);
    return out;
}

CVector DyadicToeplitz::finish(const Spectrum& s) const {
    const std::size_t nv = n();
    CVector y = CVector::Zero(static_cast<Eigen::Index>(3 * nv));
    std::vector<cplx> acc(big_);
    for (int u = 0; u < 3; ++u) {
        const auto& k0 = spectra_[em::ToeplitzKernels::component(u, 0)];
        const auto& k1 = spectra_[em::ToeplitzKernels::component(u, 1)];
        const auto& k2 = spectra_[em::ToeplitzKernels::component(u, 2)];
        for (std::size_t q = 0; q < big_; ++q) acc[q] = k0[q] * s.comp[0][q] + k1[q] * s.comp[1][q] + k2[q] * s.comp[2][q];
        inverse_crop(*fft_, dims_, acc, 1.0, y.data() + static_cast<std::size_t>(u) * nv);
    }
    return y;
}

ScalarToeplitz::ScalarToeplitz(const tensor::DenseTensor& kernel) {
    if (kernel.order() != 3) throw ArgumentError("scalar Toeplitz kernel must be a 3-way tensor");
    dims_ = {kernel.dims()[0], kernel.dims()[1], kernel.dims()[2]};
    const Index3 big = padded(dims_);
    big_ = big[0] * big[1] * big[2];
    fft_ = std::make_unique<detail::FftPlans>(big);
    spectrum_ = embed(kernel, dims_, [](const std::array<int, 3>&) { return 1; });
    fftw_execute_dft(fft_->fwd, as_fftw(spectrum_.data()), as_fftw(spectrum_.data()));
}

ScalarToeplitz::~ScalarToeplitz() = default;

std::vector<cplx> ScalarToeplitz::forward(const cplx* x) const { return pad_forward(*fft_, dims_, x); }

void ScalarToeplitz::finish(const std::vector<cplx>& spec, cplx a, cplx* y) const {
    if (spec.size() != big_) throw ArgumentError("scalar Toeplitz: spectrum size mismatch");
    std::vector<cplx> acc(big_);
    for (std::size_t q = 0; q < big_; ++q) acc[q] = spectrum_[q] * spec[q];
    inverse_crop(*fft_, dims_, acc, a, y);
}

// ---------------------------------------------------------------------------

ToeplitzFFTOperator::ToeplitzFFTOperator(const em::VoxelGrid& grid, const em::Frequency& f, const ToeplitzOptions& opts)
    : grid_(&grid), kernels_(em::assemble_vie_kernels(grid, f.k0())) {
    build(opts);
}

ToeplitzFFTOperator::ToeplitzFFTOperator(const em::VoxelGrid& grid, const em::ToeplitzKernels& kernels, const ToeplitzOptions& opts)
    : grid_(&grid), kernels_(kernels) {
    if (kernels.dims != grid.dims()) throw ArgumentError("Toeplitz kernels do not match the grid");
    build(opts);
}

void ToeplitzFFTOperator::build(const ToeplitzOptions& opts) {
    const std::size_t nv = grid_->n_voxels();
    if (opts.tucker_tol > 0.0) {
        std::uint64_t compressed = 0;
        for (auto& c : kernels_.comp) {
            if (c.norm() == 0.0) {
                compressed += 1;  // an all-zero component is stored as a scalar
                continue;
            }
            const auto tk = tensor::tucker_hosvd(c, opts.tucker_tol);
            compressed += tk.element_count();
            c = tk.reconstruct();
        }
        kernel_cf_ = tensor::compression_factor(6ull * nv, compressed);
    }
    toeplitz_ = std::make_unique<DyadicToeplitz>(kernels_);
    inv_chi_.assign(nv, cplx{});
    for (std::size_t l = 0; l < nv; ++l)
        if (grid_->in_body(l)) inv_chi_[l] = 1.0 / grid_->chi(l);
}

CVector ToeplitzFFTOperator::apply(const CVector& j) const {
    const std::size_t nv = grid_->n_voxels();
    if (static_cast<std::size_t>(j.size()) != 3 * nv) throw ArgumentError("toeplitz_apply: vector length must be 3 n_v");
    const CVector g = toeplitz_->apply(j);
    CVector y = j;
    for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t l = 0; l < nv; ++l) {
            const auto r = static_cast<Eigen::Index>(u * nv + l);
            y(r) -= grid_->chi(l) * g(r);
        }
    return y;
}

CVector ToeplitzFFTOperator::apply_symmetric(const CVector& j) const {
    const std::size_t nv = grid_->n_voxels();
    if (static_cast<std::size_t>(j.size()) != 3 * nv) throw ArgumentError("toeplitz_apply: vector length must be 3 n_v");
    CVector pj = j;
    for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t l = 0; l < nv; ++l)
            if (!grid_->in_body(l)) pj(static_cast<Eigen::Index>(u * nv + l)) = 0.0;
    const CVector g = toeplitz_->apply(pj);
    CVector y(j.size());
    for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t l = 0; l < nv; ++l) {
            const auto r = static_cast<Eigen::Index>(u * nv + l);
            y(r) = grid_->in_body(l) ? inv_chi_[l] * j(r) - g(r) : j(r);
        }
    return y;
}

}  // namespace vsie::ops
