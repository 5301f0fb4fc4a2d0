// SPDX-License-Identifier: Apache-2.0
#include "vsie/ops.hpp"

namespace vsie::ops {

TTCouplingOperator::TTCouplingOperator(const em::VoxelGrid& grid, const std::vector<em::Patch>& far, const em::Frequency& f,
                                       const TTCouplingOptions& opts)
    : n_v_(grid.n_voxels()), m_(far.size()) {
    if (m_ == 0) return;
    const Index3& d = grid.dims();
    const std::vector<std::size_t> dims{d[0], d[1], d[2], m_};
    const double h = grid.spacing();
    tensor::CrossOptions co;
    co.tol = opts.tol;
    co.max_rank = opts.max_rank;
    co.max_sweeps = opts.max_sweeps;
    co.seed = opts.seed;
    for (int chi = 0; chi < 3; ++chi) {
        auto entry = [&, chi](std::span<const std::size_t> idx) {
            const Vec3 c = grid.center(Index3{idx[0], idx[1], idx[2]});
            return em::coupling_field(c, h, far[idx[3]], f, em::CouplingRule::Far)(chi);
        };
        auto res = tensor::tt_cross(entry, dims, co);
        tts_[static_cast<std::size_t>(chi)] = std::move(res.tt);
        evaluations_ += res.evaluations;
        validation_error_ = std::max(validation_error_, res.validation_error);
        converged_ = converged_ && res.converged;
    }
}

CVector TTCouplingOperator::apply(const CVector& x) const {
    if (static_cast<std::size_t>(x.size()) != m_) throw ArgumentError("tt coupling apply: vector length mismatch");
    CVector y = CVector::Zero(static_cast<Eigen::Index>(3 * n_v_));
    if (m_ == 0) return y;
    const auto nv = static_cast<Eigen::Index>(n_v_);
    for (int chi = 0; chi < 3; ++chi) y.segment(chi * nv, nv) = tensor::tt_apply(tts_[static_cast<std::size_t>(chi)], x);
    return y;
}

CVector TTCouplingOperator::apply_transpose(const CVector& y) const {
    if (static_cast<std::size_t>(y.size()) != 3 * n_v_) throw ArgumentError("tt coupling transpose: vector length mismatch");
    CVector x = CVector::Zero(static_cast<Eigen::Index>(m_));
    if (m_ == 0) return x;
    const auto nv = static_cast<Eigen::Index>(n_v_);
    for (int chi = 0; chi < 3; ++chi) x += tensor::tt_apply_transpose(tts_[static_cast<std::size_t>(chi)], y.segment(chi * nv, nv));
    return x;
}

tensor::Ratio TTCouplingOperator::compression() const {
    if (m_ == 0) return {0, 1};
    std::uint64_t stored = 0;
    for (const auto& t : tts_) stored += t.element_count();
    return tensor::compression_factor(dense_elements(), stored);
}

}  // namespace vsie::ops
