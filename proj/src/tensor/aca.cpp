// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include "vsie/tensor.hpp"

namespace vsie::tensor {

cplx LowRankFactors::entry(std::size_t i, std::size_t j) const {
    if (rank() == 0) return {};
    return U.row(static_cast<Eigen::Index>(i)).cwiseProduct(V.row(static_cast<Eigen::Index>(j)).conjugate()).sum();
}

CMatrix LowRankFactors::dense() const {
    if (rank() == 0) return CMatrix::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
    return U * V.adjoint();
}

CVector LowRankFactors::apply(const CVector& x) const {
    if (static_cast<std::size_t>(x.size()) != cols()) throw ArgumentError("low-rank apply: length mismatch");
    if (rank() == 0) return CVector::Zero(static_cast<Eigen::Index>(rows()));
    return U * (V.adjoint() * x);
}

CVector LowRankFactors::apply_transpose(const CVector& y) const {
    if (static_cast<std::size_t>(y.size()) != rows()) throw ArgumentError("low-rank transpose apply: length mismatch");
    if (rank() == 0) return CVector::Zero(static_cast<Eigen::Index>(cols()));
    return V.conjugate() * (U.transpose() * y);
}

AcaResult aca(const MatrixEntryFn& entry, std::size_t rows, std::size_t cols, const AcaOptions& opts) {
    if (!(opts.tol > 0.0)) throw ArgumentError("aca: tol must be positive");
    if (!entry) throw ArgumentError("aca: missing entry function");
    AcaResult res;
    const auto nr = static_cast<Eigen::Index>(rows);
    const auto nc = static_cast<Eigen::Index>(cols);
    res.factors.U = CMatrix(nr, 0);
    res.factors.V = CMatrix(nc, 0);
    if (rows == 0 || cols == 0) {
        res.converged = true;
        return res;
    }
    const std::size_t cap = opts.max_rank == 0 ? std::max<std::size_t>(1, (std::min(rows, cols) + 1) / 2)
                                               : std::min(opts.max_rank, std::min(rows, cols));

    std::vector<CVector> us;
    std::vector<CVector> vs;  // columns of V, so the term is u v^*
    std::vector<char> used_row(rows, 0);
    double norm2 = 0.0;
    bool stopped = false;
    std::size_t next_row = 0;
    std::size_t evals = 0;

    double raw_peak = 0.0;
    auto residual_row = [&](std::size_t i) {
        CVector r(nc);
        for (Eigen::Index j = 0; j < nc; ++j) r(j) = entry(i, static_cast<std::size_t>(j));
        evals += cols;
        raw_peak = r.cwiseAbs().maxCoeff();
        for (std::size_t l = 0; l < us.size(); ++l) r -= us[l](static_cast<Eigen::Index>(i)) * vs[l].conjugate();
        return r;
    };
    auto pick_unused = [&]() -> std::size_t {
        for (std::size_t i = 0; i < rows; ++i)
            if (!used_row[i]) return i;
        return rows;
    };

    std::size_t zero_rows = 0;
    while (us.size() < cap) {
        const std::size_t i = next_row;
        if (i >= rows) {
            stopped = true;
            break;
        }
        used_row[i] = 1;
        const CVector r = residual_row(i);
        Eigen::Index jstar = 0;
        const double peak = r.cwiseAbs().maxCoeff(&jstar);
        if (peak <= 1e-13 * raw_peak || peak == 0.0) {
            // A residual row at rounding level: move on, but give up quickly once a basis exists.
            ++zero_rows;
            if (!us.empty() && zero_rows >= 8) {
                stopped = true;
                break;
            }
            next_row = pick_unused();
            continue;
        }
        zero_rows = 0;
        const cplx pivot = r(jstar);
        CVector u(nr);
        for (Eigen::Index a = 0; a < nr; ++a) u(a) = entry(static_cast<std::size_t>(a), static_cast<std::size_t>(jstar));
        evals += rows;
        for (std::size_t l = 0; l < us.size(); ++l) u -= us[l] * std::conj(vs[l](jstar));
        const CVector v = (r / pivot).conjugate();

        double cross = 0.0;
        for (std::size_t l = 0; l < us.size(); ++l) cross += std::real(us[l].dot(u) * v.dot(vs[l]));
        const double un = u.norm();
        const double vn = v.norm();
        norm2 += un * un * vn * vn + 2.0 * cross;
        us.push_back(u);
        vs.push_back(v);
        res.error_estimate = un * vn / std::sqrt(std::max(norm2, 1e-300));
        if (un * vn <= opts.tol * std::sqrt(std::max(norm2, 0.0))) {
            stopped = true;
            break;
        }

        double best = -1.0;
        next_row = rows;
        for (std::size_t a = 0; a < rows; ++a) {
            if (used_row[a]) continue;
            const double m = std::abs(u(static_cast<Eigen::Index>(a)));
            if (m > best) {
                best = m;
                next_row = a;
            }
        }
    }

    const auto k = static_cast<Eigen::Index>(us.size());
    res.factors.U = CMatrix(nr, k);
    res.factors.V = CMatrix(nc, k);
    for (Eigen::Index l = 0; l < k; ++l) {
        res.factors.U.col(l) = us[static_cast<std::size_t>(l)];
        res.factors.V.col(l) = vs[static_cast<std::size_t>(l)];
    }

    // Held-out sampled validation.
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> dr(0, rows - 1);
    std::uniform_int_distribution<std::size_t> dc(0, cols - 1);
    const std::size_t samples = std::min<std::size_t>(opts.validation_samples, rows * cols);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t i = dr(rng);
        const std::size_t j = dc(rng);
        const cplx exact = entry(i, j);
        num += std::norm(res.factors.entry(i, j) - exact);
        den += std::norm(exact);
    }
    evals += samples;
    res.validation_error = den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
    res.evaluations = evals;
    res.converged = stopped && res.validation_error <= 10.0 * opts.tol;
    return res;
}

}  // namespace vsie::tensor
