// SPDX-License-Identifier: Apache-2.0
#include "vsie/ops.hpp"

namespace vsie::ops {

HybridSystem::HybridSystem(Parts parts) : p_(std::move(parts)) {
    if (!p_.body) throw ArgumentError("hybrid system: body operator missing");
    if (p_.pfft && p_.dense_near) throw ArgumentError("hybrid system: choose one near operator");
    m_f_ = static_cast<std::size_t>(p_.a_ff.rows());
    if (static_cast<std::size_t>(p_.a_ff.cols()) != m_f_ || static_cast<std::size_t>(p_.alpha_f.size()) != m_f_)
        throw ArgumentError("hybrid system: far block sizes disagree");
    m_n_ = p_.pfft ? p_.pfft->coil_size() : p_.dense_near ? p_.dense_near->size() - p_.body->size() : 0;
    n_b_ = p_.body->size();
    if (m_f_ > 0) {
        if (!p_.far_coupling || p_.far_coupling->cols() != m_f_ || p_.far_coupling->rows() != n_b_)
            throw ArgumentError("hybrid system: far coupling operator missing or mis-sized");
        if (m_n_ > 0 && (p_.fn.rows() != m_n_ || p_.fn.cols() != m_f_))
            throw ArgumentError("hybrid system: near-far factors mis-sized");
    }
    const auto& grid = p_.body->grid();
    const std::size_t nv = grid.n_voxels();
    mask_.assign(n_b_, 0);
    for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t l = 0; l < nv; ++l) mask_[u * nv + l] = grid.in_body(l) ? 1 : 0;
}

CVector HybridSystem::near_apply(const CVector& x) const {
    if (p_.pfft) return p_.pfft->apply(x);
    if (p_.dense_near) return p_.dense_near->apply(x);
    return p_.body->apply_symmetric(x);
}

CVector HybridSystem::apply(const CVector& x) const {
    if (static_cast<std::size_t>(x.size()) != size()) throw ArgumentError("hybrid apply: vector length mismatch");
    const auto mf = static_cast<Eigen::Index>(m_f_);
    const auto mn = static_cast<Eigen::Index>(m_n_);
    const auto nb = static_cast<Eigen::Index>(n_b_);
    const CVector xf = x.head(mf);
    const CVector xn = x.segment(mf, mn);
    const CVector xb = x.tail(nb);

    CVector y(x.size());
    CVector near_in(mn + nb);
    near_in << xn, xb;
    const CVector near_out = near_apply(near_in);
    y.segment(mf, mn) = near_out.head(mn);
    y.tail(nb) = near_out.tail(nb);
    if (m_f_ == 0) return y;

    CVector masked_b = xb;
    for (Eigen::Index r = 0; r < nb; ++r)
        if (!mask_[static_cast<std::size_t>(r)]) masked_b(r) = 0.0;
    y.head(mf) = p_.a_ff * xf + (p_.field_scale * p_.far_coupling->apply_transpose(masked_b)).cwiseProduct(p_.alpha_f);
    CVector fb = p_.field_scale * p_.far_coupling->apply(p_.alpha_f.cwiseProduct(xf));
    for (Eigen::Index r = 0; r < nb; ++r)
        if (!mask_[static_cast<std::size_t>(r)]) fb(r) = 0.0;
    y.tail(nb) += fb;
    if (m_n_ > 0) {
        y.head(mf) += p_.fn.apply_transpose(xn);
        y.segment(mf, mn) += p_.fn.apply(xf);
    }
    return y;
}

}  // namespace vsie::ops
