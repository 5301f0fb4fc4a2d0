// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vsie/common.hpp"

namespace vsie::tensor {

/// d-dimensional complex array, column-major (first index fastest).
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(std::vector<std::size_t> dims);
    DenseTensor(std::vector<std::size_t> dims, std::vector<cplx> data);

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t order() const noexcept { return dims_.size(); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }

    std::size_t linear_index(std::span<const std::size_t> idx) const;
    cplx& at(std::span<const std::size_t> idx) { return data_[linear_index(idx)]; }
    cplx at(std::span<const std::size_t> idx) const { return data_[linear_index(idx)]; }
    cplx& operator[](std::size_t k) { return data_[k]; }
    cplx operator[](std::size_t k) const { return data_[k]; }

    /// Same data, new extents. The element count must match.
    DenseTensor reshaped(std::vector<std::size_t> dims) const;

    double norm() const;

private:
    std::vector<std::size_t> dims_;
    std::vector<cplx> data_;
};

std::size_t product(std::span<const std::size_t> dims);

/// Mode-k unfolding (0-based mode): rows are i_k, columns run over the
/// remaining indices in column-major order.
CMatrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold.
DenseTensor fold(const CMatrix& m, std::size_t mode, const std::vector<std::size_t>& dims);

/// Difference norm ||a - b||_F; dims must agree.
double distance(const DenseTensor& a, const DenseTensor& b);

// ---------------------------------------------------------------------------
// Tensor train

/// One TT core, r_left x n x r_right, stored as its left unfolding
/// ((r_left*n) x r_right, row index a + r_left*i).
struct TTCore {
    std::size_t r_left = 1;
    std::size_t n = 1;
    std::size_t r_right = 1;
    CMatrix mat;

    TTCore() = default;
    TTCore(std::size_t rl, std::size_t nn, std::size_t rr)
        : r_left(rl), n(nn), r_right(rr), mat(CMatrix::Zero(rl * nn, rr)) {}

    cplx operator()(std::size_t a, std::size_t i, std::size_t b) const { return mat(a + r_left * i, b); }
    cplx& operator()(std::size_t a, std::size_t i, std::size_t b) { return mat(a + r_left * i, b); }

    /// The r_left x r_right slice for mode index i.
    auto slice(std::size_t i) const { return mat.middleRows(i * r_left, r_left); }
    std::size_t element_count() const noexcept { return r_left * n * r_right; }
};

class TTTensor {
public:
    TTTensor() = default;
    /// Validates that boundary ranks are 1 and adjacent ranks agree.
    explicit TTTensor(std::vector<TTCore> cores);

    std::size_t order() const noexcept { return cores_.size(); }
    std::vector<std::size_t> dims() const;
    /// Interior ranks r_1..r_{d-1}.
    std::vector<std::size_t> ranks() const;
    std::size_t max_rank() const;

    const std::vector<TTCore>& cores() const noexcept { return cores_; }
    const TTCore& core(std::size_t k) const { return cores_.at(k); }

    /// Chain product G1(i1) G2(i2) ... Gd(id).
    cplx element(std::span<const std::size_t> idx) const;
    DenseTensor to_dense() const;
    std::size_t element_count() const;

private:
    std::vector<TTCore> cores_;
};

/// TT-SVD with per-step truncation tol/sqrt(d-1) * ||t||_F.
TTTensor tt_svd(const DenseTensor& t, double tol);

/// Re-truncate an existing TT with tt_svd applied to its dense form.
/// Only meant for small tensors; cross methods can overshoot ranks.
TTTensor tt_recompress(const TTTensor& t, double tol);

using EntryFn = std::function<cplx(std::span<const std::size_t>)>;

struct CrossOptions {
    double tol = 1e-3;
    /// 0 selects default_rank_cap(dims).
    std::size_t max_rank = 0;
    std::size_t max_sweeps = 12;
    std::size_t initial_rank = 2;
    std::size_t validation_samples = 1000;
    std::uint64_t seed = 1;
};

struct CrossResult {
    TTTensor tt;
    bool converged = false;
    bool rank_capped = false;
    /// RMS relative error on the held-out validation set.
    double validation_error = 0.0;
    /// Distinct calls made to the entry function (validation included).
    std::size_t evaluations = 0;
    std::size_t half_sweeps = 0;
};

/// ceil(min(dims) / 2).
std::size_t default_rank_cap(std::span<const std::size_t> dims);

/// Rank-adaptive two-site (DMRG) TT cross approximation of a black-box tensor.
/// The entry function may be called concurrently.
CrossResult tt_cross(const EntryFn& entry, const std::vector<std::size_t>& dims, const CrossOptions& opts);

/// Row indices of a dominant (quasi-maximal volume) r x r submatrix of a tall n x r matrix.
std::vector<std::size_t> maxvol(const CMatrix& a, double tol = 1.01, std::size_t max_iters = 200);

/// y = T x where T is the 4D TT viewed as an (n1 n2 n3) x m matrix. The
/// fourth core is contracted first.
CVector tt_apply(const TTTensor& t, const CVector& x);

/// x = T^T y (plain transpose, no conjugation).
CVector tt_apply_transpose(const TTTensor& t, const CVector& y);

// ---------------------------------------------------------------------------
// Tucker

struct TuckerTensor {
    DenseTensor core;
    std::vector<CMatrix> factors;

    std::vector<std::size_t> ranks() const;
    std::vector<std::size_t> dims() const;
    DenseTensor reconstruct() const;
    std::size_t element_count() const;
};

/// Truncated HOSVD with per-mode threshold tol/sqrt(d) * ||t||_F.
TuckerTensor tucker_hosvd(const DenseTensor& t, double tol);

/// Mode-k product t x_k m (m is rows x n_k).
DenseTensor mode_product(const DenseTensor& t, const CMatrix& m, std::size_t mode);

// ---------------------------------------------------------------------------
// Adaptive cross approximation

/// A ~= U V^*.
struct LowRankFactors {
    CMatrix U;
    CMatrix V;

    std::size_t rank() const noexcept { return static_cast<std::size_t>(U.cols()); }
    std::size_t rows() const noexcept { return static_cast<std::size_t>(U.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(V.rows()); }
    cplx entry(std::size_t i, std::size_t j) const;
    CMatrix dense() const;
    /// (U V^*) x
    CVector apply(const CVector& x) const;
    /// (U V^*)^T y = conj(V) U^T y
    CVector apply_transpose(const CVector& y) const;
};

using MatrixEntryFn = std::function<cplx(std::size_t, std::size_t)>;

struct AcaOptions {
    double tol = 1e-3;
    /// 0 selects ceil(min(rows, cols) / 2).
    std::size_t max_rank = 0;
    std::size_t validation_samples = 1000;
    std::uint64_t seed = 1;
};

struct AcaResult {
    LowRankFactors factors;
    bool converged = false;
    /// ||u_k|| ||v_k|| / ||A_k||_F at the last step.
    double error_estimate = 0.0;
    /// RMS relative error on random sampled entries.
    double validation_error = 0.0;
    std::size_t evaluations = 0;
};

/// Partial-pivot ACA.
AcaResult aca(const MatrixEntryFn& entry, std::size_t rows, std::size_t cols, const AcaOptions& opts);

// ---------------------------------------------------------------------------

struct Ratio {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 1;
    double value() const { return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator); }
};

/// elements(dense) / elements(compressed), as exact integers.
Ratio compression_factor(std::uint64_t dense_elements, std::uint64_t compressed_elements);

}  // namespace vsie::tensor
