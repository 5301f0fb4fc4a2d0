// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>

#include "vsie/tensor.hpp"

namespace vsie::tensor {

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw ArgumentError("tensor needs at least one dimension");
    for (auto n : dims)
        if (n == 0) throw ArgumentError("tensor extents must be positive");
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(product(dims_), cplx{});
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (product(dims_) != data_.size()) throw ArgumentError("tensor data length does not match extents");
}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> idx) const {
    if (idx.size() != dims_.size()) throw ArgumentError("multi-index has wrong order");
    std::size_t lin = 0;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (idx[k] >= dims_[k]) throw ArgumentError("multi-index out of range");
        lin += idx[k] * stride;
        stride *= dims_[k];
    }
    return lin;
}

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> dims) const {
    return DenseTensor(std::move(dims), data_);
}

double DenseTensor::norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

double distance(const DenseTensor& a, const DenseTensor& b) {
    if (a.dims() != b.dims()) throw ArgumentError("distance: extents differ");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
    return std::sqrt(s);
}

CMatrix unfold(const DenseTensor& t, std::size_t mode) {
    const auto& dims = t.dims();
    if (mode >= dims.size()) throw ArgumentError("unfold: mode out of range");
    const std::size_t rows = dims[mode];
    const std::size_t cols = t.size() / rows;
    // Column-major layout splits into (inner, n_mode, outer) blocks.
    std::size_t inner = 1;
    for (std::size_t k = 0; k < mode; ++k) inner *= dims[k];
    const std::size_t outer = cols / inner;

    CMatrix m(rows, cols);
    const auto data = t.data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t a = 0; a < inner; ++a)
                m(i, a + inner * o) = data[a + inner * (i + rows * o)];
    return m;
}

DenseTensor fold(const CMatrix& m, std::size_t mode, const std::vector<std::size_t>& dims) {
    if (mode >= dims.size()) throw ArgumentError("fold: mode out of range");
    DenseTensor t(dims);
    const std::size_t rows = dims[mode];
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) * rows != t.size())
        throw ArgumentError("fold: matrix shape does not match extents");
    std::size_t inner = 1;
    for (std::size_t k = 0; k < mode; ++k) inner *= dims[k];
    const std::size_t outer = t.size() / (rows * inner);
    auto data = t.data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t a = 0; a < inner; ++a)
                data[a + inner * (i + rows * o)] = m(i, a + inner * o);
    return t;
}

Ratio compression_factor(std::uint64_t dense_elements, std::uint64_t compressed_elements) {
    if (compressed_elements == 0) throw ArgumentError("compression_factor: empty representation");
    const std::uint64_t g = std::gcd(dense_elements, compressed_elements);
    return {dense_elements / g, compressed_elements / g};
}

}  // namespace vsie::tensor
