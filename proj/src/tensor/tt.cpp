// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "vsie/tensor.hpp"

namespace vsie::tensor {

TTTensor::TTTensor(std::vector<TTCore> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) throw ArgumentError("TT needs at least one core");
    if (cores_.front().r_left != 1 || cores_.back().r_right != 1)
        throw ArgumentError("TT boundary ranks must be 1");
    for (std::size_t k = 0; k < cores_.size(); ++k) {
        const auto& c = cores_[k];
        if (c.n == 0 || c.r_left == 0 || c.r_right == 0) throw ArgumentError("TT core has an empty extent");
        if (static_cast<std::size_t>(c.mat.rows()) != c.r_left * c.n ||
            static_cast<std::size_t>(c.mat.cols()) != c.r_right)
            throw ArgumentError("TT core storage does not match its shape");
        if (k + 1 < cores_.size() && c.r_right != cores_[k + 1].r_left)
            throw ArgumentError("TT adjacent core ranks do not match");
    }
}

std::vector<std::size_t> TTTensor::dims() const {
    std::vector<std::size_t> d;
    d.reserve(cores_.size());
    for (const auto& c : cores_) d.push_back(c.n);
    return d;
}

std::vector<std::size_t> TTTensor::ranks() const {
    std::vector<std::size_t> r;
    for (std::size_t k = 0; k + 1 < cores_.size(); ++k) r.push_back(cores_[k].r_right);
    return r;
}

std::size_t TTTensor::max_rank() const {
    std::size_t m = 1;
    for (auto r : ranks()) m = std::max(m, r);
    return m;
}

cplx TTTensor::element(std::span<const std::size_t> idx) const {
    if (idx.size() != cores_.size()) throw ArgumentError("TT element: wrong index order");
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    for (std::size_t k = 0; k < cores_.size(); ++k) {
        if (idx[k] >= cores_[k].n) throw ArgumentError("TT element: index out of range");
        v = v * cores_[k].slice(idx[k]);
    }
    return v(0);
}

DenseTensor TTTensor::to_dense() const {
    // Left-to-right accumulation: W is (n_0...n_k) x r_{k+1}.
    CMatrix w = cores_[0].mat;
    for (std::size_t k = 1; k < cores_.size(); ++k) {
        const auto& c = cores_[k];
        const Eigen::Index p = w.rows();
        CMatrix next(p * c.n, c.r_right);
        for (std::size_t i = 0; i < c.n; ++i)
            next.middleRows(static_cast<Eigen::Index>(i) * p, p) = w * c.slice(i);
        w = std::move(next);
    }
    std::vector<cplx> data(w.data(), w.data() + w.size());
    return DenseTensor(dims(), std::move(data));
}

std::size_t TTTensor::element_count() const {
    std::size_t n = 0;
    for (const auto& c : cores_) n += c.element_count();
    return n;
}

namespace {

std::size_t truncation_rank(const Eigen::VectorXd& s, double delta) {
    // Smallest r >= 1 with sqrt(sum_{j>=r} s_j^2) <= delta.
    std::size_t r = static_cast<std::size_t>(s.size());
    double tail = 0.0;
    while (r > 1) {
        const double next = tail + s(static_cast<Eigen::Index>(r) - 1) * s(static_cast<Eigen::Index>(r) - 1);
        if (std::sqrt(next) > delta) break;
        tail = next;
        --r;
    }
    return std::max<std::size_t>(r, 1);
}

}  // namespace

TTTensor tt_svd(const DenseTensor& t, double tol) {
    if (!(tol > 0.0)) throw ArgumentError("tt_svd: tol must be positive");
    const auto& dims = t.dims();
    const std::size_t d = dims.size();
    std::vector<TTCore> cores;
    cores.reserve(d);

    const double nrm = t.norm();
    if (d == 1) {
        TTCore c(1, dims[0], 1);
        for (std::size_t i = 0; i < dims[0]; ++i) c.mat(i, 0) = t[i];
        cores.push_back(std::move(c));
        return TTTensor(std::move(cores));
    }
    if (nrm == 0.0) {
        for (auto n : dims) cores.emplace_back(1, n, 1);
        return TTTensor(std::move(cores));
    }

    const double delta = tol / std::sqrt(static_cast<double>(d - 1)) * nrm;
    CMatrix c = Eigen::Map<const CMatrix>(t.data().data(), 1, static_cast<Eigen::Index>(t.size()));
    std::size_t r = 1;
    for (std::size_t k = 0; k + 1 < d; ++k) {
        const auto rows = static_cast<Eigen::Index>(r * dims[k]);
        const Eigen::Index cols = c.size() / rows;
        CMatrix m = Eigen::Map<const CMatrix>(c.data(), rows, cols);
        Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const std::size_t rk = truncation_rank(s, delta);
        TTCore core(r, dims[k], rk);
        core.mat = svd.matrixU().leftCols(static_cast<Eigen::Index>(rk));
        cores.push_back(std::move(core));
        c = s.head(static_cast<Eigen::Index>(rk)).asDiagonal() *
            svd.matrixV().leftCols(static_cast<Eigen::Index>(rk)).adjoint();
        r = rk;
    }
    TTCore last(r, dims[d - 1], 1);
    last.mat = Eigen::Map<const CMatrix>(c.data(), static_cast<Eigen::Index>(r * dims[d - 1]), 1);
    cores.push_back(std::move(last));
    return TTTensor(std::move(cores));
}

TTTensor tt_recompress(const TTTensor& t, double tol) { return tt_svd(t.to_dense(), tol); }

CVector tt_apply(const TTTensor& t, const CVector& x) {
    const std::size_t d = t.order();
    if (d < 2) throw ArgumentError("tt_apply: need at least two modes");
    const TTCore& last = t.core(d - 1);
    if (static_cast<std::size_t>(x.size()) != last.n) throw ArgumentError("tt_apply: vector length does not match trailing mode");

    // y = G^d x, viewing the last core as r_{d-1} x m.
    const auto g_last = Eigen::Map<const CMatrix>(last.mat.data(), static_cast<Eigen::Index>(last.r_left),
                                                  static_cast<Eigen::Index>(last.n));
    CMatrix w = g_last * x;  // r_{d-1} x 1
    for (std::size_t k = d - 1; k-- > 0;) {
        const TTCore& c = t.core(k);
        // (r_k n_k) x r_{k+1} times r_{k+1} x P; the result read column-major is r_k x (n_k P).
        CMatrix next = c.mat * w;
        w = Eigen::Map<const CMatrix>(next.data(), static_cast<Eigen::Index>(c.r_left), next.size() / static_cast<Eigen::Index>(c.r_left));
    }
    return Eigen::Map<const CVector>(w.data(), w.size());
}

CVector tt_apply_transpose(const TTTensor& t, const CVector& y) {
    const std::size_t d = t.order();
    if (d < 2) throw ArgumentError("tt_apply_transpose: need at least two modes");
    std::size_t lead = 1;
    for (std::size_t k = 0; k + 1 < d; ++k) lead *= t.core(k).n;
    if (static_cast<std::size_t>(y.size()) != lead) throw ArgumentError("tt_apply_transpose: vector length does not match leading modes");

    CMatrix w = Eigen::Map<const CMatrix>(y.data(), 1, y.size());  // r_0 x (n_0 ... )
    for (std::size_t k = 0; k + 1 < d; ++k) {
        const TTCore& c = t.core(k);
        const auto rows = static_cast<Eigen::Index>(c.r_left * c.n);
        const auto m = Eigen::Map<const CMatrix>(w.data(), rows, w.size() / rows);
        w = c.mat.transpose() * m;  // r_{k+1} x P'
    }
    const TTCore& last = t.core(d - 1);
    const auto g_last = Eigen::Map<const CMatrix>(last.mat.data(), static_cast<Eigen::Index>(last.r_left),
                                                  static_cast<Eigen::Index>(last.n));
    return g_last.transpose() * w;
}

}  // namespace vsie::tensor
