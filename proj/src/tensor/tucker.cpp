// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <Eigen/SVD>

#include "vsie/tensor.hpp"

namespace vsie::tensor {

DenseTensor mode_product(const DenseTensor& t, const CMatrix& m, std::size_t mode) {
    if (mode >= t.order()) throw ArgumentError("mode_product: mode out of range");
    if (static_cast<std::size_t>(m.cols()) != t.dims()[mode]) throw ArgumentError("mode_product: matrix columns do not match mode extent");
    auto dims = t.dims();
    dims[mode] = static_cast<std::size_t>(m.rows());
    return fold(m * unfold(t, mode), mode, dims);
}

std::vector<std::size_t> TuckerTensor::ranks() const { return core.dims(); }

std::vector<std::size_t> TuckerTensor::dims() const {
    std::vector<std::size_t> d;
    d.reserve(factors.size());
    for (const auto& f : factors) d.push_back(static_cast<std::size_t>(f.rows()));
    return d;
}

DenseTensor TuckerTensor::reconstruct() const {
    DenseTensor out = core;
    for (std::size_t k = 0; k < factors.size(); ++k) out = mode_product(out, factors[k], k);
    return out;
}

std::size_t TuckerTensor::element_count() const {
    std::size_t n = core.size();
    for (const auto& f : factors) n += static_cast<std::size_t>(f.size());
    return n;
}

TuckerTensor tucker_hosvd(const DenseTensor& t, double tol) {
    if (!(tol > 0.0)) throw ArgumentError("tucker_hosvd: tol must be positive");
    const std::size_t d = t.order();
    if (d == 0) throw ArgumentError("tucker_hosvd: empty tensor");
    const double nrm = t.norm();
    TuckerTensor out;
    out.factors.reserve(d);

    if (nrm == 0.0) {
        std::vector<std::size_t> ones(d, 1);
        out.core = DenseTensor(ones);
        for (auto n : t.dims()) out.factors.push_back(CMatrix::Identity(static_cast<Eigen::Index>(n), 1));
        return out;
    }

    const double delta = tol / std::sqrt(static_cast<double>(d)) * nrm;
    for (std::size_t k = 0; k < d; ++k) {
        const CMatrix a = unfold(t, k);
        Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        auto r = static_cast<Eigen::Index>(s.size());
        double tail = 0.0;
        while (r > 1) {
            const double next = tail + s(r - 1) * s(r - 1);
            if (std::sqrt(next) > delta) break;
            tail = next;
            --r;
        }
        out.factors.push_back(svd.matrixU().leftCols(r));
    }
    DenseTensor core = t;
    for (std::size_t k = 0; k < d; ++k) core = mode_product(core, out.factors[k].adjoint(), k);
    out.core = std::move(core);
    return out;
}

}  // namespace vsie::tensor
