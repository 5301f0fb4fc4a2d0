// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "vsie/tensor.hpp"

namespace vsie::tensor {

std::size_t default_rank_cap(std::span<const std::size_t> dims) {
    if (dims.empty()) return 1;
    const std::size_t m = *std::min_element(dims.begin(), dims.end());
    return std::max<std::size_t>(1, (m + 1) / 2);
}

std::vector<std::size_t> maxvol(const CMatrix& a, double tol, std::size_t max_iters) {
    const auto n = static_cast<std::size_t>(a.rows());
    const auto r = static_cast<std::size_t>(a.cols());
    if (r == 0 || r > n) throw ArgumentError("maxvol: need a tall matrix");

    // Greedy start from Gaussian elimination with partial pivoting.
    std::vector<std::size_t> rows;
    rows.reserve(r);
    std::vector<char> used(n, 0);
    CMatrix w = a;
    for (std::size_t j = 0; j < r; ++j) {
        std::size_t p = n;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            const double v = std::abs(w(i, j));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        used[p] = 1;
        rows.push_back(p);
        if (best > 0.0) {
            const Eigen::RowVectorXcd prow = w.row(p) / w(p, j);
            const CVector col = w.col(j);
            w -= col * prow;
        }
    }
    if (n == r) return rows;

    CMatrix sub(r, r);
    for (std::size_t j = 0; j < r; ++j) sub.row(j) = a.row(rows[j]);
    Eigen::FullPivLU<CMatrix> lu(sub);
    if (!lu.isInvertible()) return rows;
    // B = A sub^{-1}
    CMatrix b = lu.solve(CMatrix::Identity(r, r)).transpose();
    b = (a * b.transpose()).eval();

    for (std::size_t it = 0; it < max_iters; ++it) {
        Eigen::Index bi = 0;
        Eigen::Index bj = 0;
        const double m = b.cwiseAbs().maxCoeff(&bi, &bj);
        if (m <= tol) break;
        rows[static_cast<std::size_t>(bj)] = static_cast<std::size_t>(bi);
        const cplx piv = b(bi, bj);
        Eigen::RowVectorXcd rowv = b.row(bi);
        rowv(bj) -= 1.0;
        const CVector colv = b.col(bj);
        b -= colv * rowv / piv;
    }
    return rows;
}

namespace {

using Multi = std::vector<std::size_t>;

struct KeyHash {
    std::size_t operator()(const Multi& m) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (auto v : m) h = (h ^ v) * 1099511628211ULL;
        return h;
    }
};

class CachedTensor {
public:
    CachedTensor(const EntryFn& fn, const std::vector<std::size_t>& dims) : fn_(fn), dims_(dims) {}

    /// Evaluates every listed multi-index, reusing earlier results.
    std::vector<cplx> evaluate(const std::vector<Multi>& idx) {
        std::vector<std::size_t> missing;
        std::vector<std::uint64_t> keys(idx.size());
        std::unordered_set<std::uint64_t> seen;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            keys[k] = encode(idx[k]);
            if (!cache_.contains(keys[k]) && seen.insert(keys[k]).second) missing.push_back(k);
        }
        std::vector<cplx> fresh(missing.size());
        const auto nm = static_cast<std::ptrdiff_t>(missing.size());
#pragma omp parallel for schedule(dynamic, 64)
        for (std::ptrdiff_t q = 0; q < nm; ++q) fresh[static_cast<std::size_t>(q)] = fn_(idx[missing[static_cast<std::size_t>(q)]]);
        for (std::size_t q = 0; q < missing.size(); ++q) cache_.emplace(keys[missing[q]], fresh[q]);
        evaluations_ += missing.size();

        std::vector<cplx> out(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) out[k] = cache_.at(keys[k]);
        return out;
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    std::uint64_t encode(const Multi& m) const {
        std::uint64_t lin = 0;
        std::uint64_t stride = 1;
        for (std::size_t k = 0; k < m.size(); ++k) {
            lin += m[k] * stride;
            stride *= dims_[k];
        }
        return lin;
    }

    const EntryFn& fn_;
    const std::vector<std::size_t>& dims_;
    std::unordered_map<std::uint64_t, cplx> cache_;
    std::size_t evaluations_ = 0;
};

std::size_t truncation_rank(const Eigen::VectorXd& s, double delta) {
    std::size_t r = static_cast<std::size_t>(s.size());
    double tail = 0.0;
    while (r > 1) {
        const double v = s(static_cast<Eigen::Index>(r) - 1);
        if (std::sqrt(tail + v * v) > delta) break;
        tail += v * v;
        --r;
    }
    return std::max<std::size_t>(r, 1);
}

/// Right-unfolded r x (n * rr) matrix, column (i + n*b), into core storage.
TTCore core_from_right(const CMatrix& m, std::size_t r, std::size_t n, std::size_t rr) {
    TTCore c(r, n, rr);
    for (std::size_t b = 0; b < rr; ++b)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < r; ++a) c(a, i, b) = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i + n * b));
    return c;
}

class DmrgCross {
public:
    DmrgCross(const EntryFn& fn, const std::vector<std::size_t>& dims, const CrossOptions& opts)
        : dims_(dims), d_(dims.size()), opts_(opts), tensor_(fn, dims_), left_(d_ + 1), right_(d_ + 1), cores_(d_) {
        cap_ = opts.max_rank == 0 ? default_rank_cap(dims_) : opts.max_rank;
        delta_rel_ = opts.tol / std::sqrt(static_cast<double>(d_ - 1));
        rng_.seed(opts.seed);
        init_index_sets();
        draw_validation();
    }

    CrossResult run() {
        CrossResult res;
        double prev_err = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> prev_ranks;
        const std::size_t max_half = 2 * std::max<std::size_t>(opts_.max_sweeps, 1);
        for (std::size_t half = 0; half < max_half; ++half) {
            capped_ = false;
            if (half % 2 == 0)
                sweep_left_to_right();
            else
                sweep_right_to_left();
            TTTensor tt(cores_);
            const double err = validate(tt);
            res.half_sweeps = half + 1;
            res.validation_error = err;
            res.rank_capped = capped_;
            const auto ranks = tt.ranks();
            res.tt = std::move(tt);
            if (err <= opts_.tol) break;
            const bool stalled = half >= 2 && ranks == prev_ranks && err > 0.9 * prev_err;
            if (stalled) break;
            prev_err = err;
            prev_ranks = ranks;
        }
        res.evaluations = tensor_.evaluations();
        res.converged = res.validation_error <= 10.0 * opts_.tol && !(res.rank_capped && res.validation_error > opts_.tol);
        return res;
    }

private:
    void init_index_sets() {
        left_[0] = {Multi{}};
        right_[d_] = {Multi{}};
        for (std::size_t b = d_ - 1; b >= 1; --b) {
            const std::size_t avail = dims_[b] * right_[b + 1].size();
            const std::size_t want = std::min(opts_.initial_rank, avail);
            std::unordered_set<Multi, KeyHash> chosen;
            std::vector<Multi> set;
            while (set.size() < want) {
                std::uniform_int_distribution<std::size_t> di(0, dims_[b] - 1);
                std::uniform_int_distribution<std::size_t> dr(0, right_[b + 1].size() - 1);
                Multi m{di(rng_)};
                const auto& tail = right_[b + 1][dr(rng_)];
                m.insert(m.end(), tail.begin(), tail.end());
                if (chosen.insert(m).second) set.push_back(std::move(m));
            }
            right_[b] = std::move(set);
        }
    }

    Multi random_index() {
        Multi m(d_);
        for (std::size_t k = 0; k < d_; ++k) m[k] = std::uniform_int_distribution<std::size_t>(0, dims_[k] - 1)(rng_);
        return m;
    }

    void draw_validation() {
        std::size_t total = 1;
        bool huge = false;
        for (auto n : dims_) {
            if (total > std::numeric_limits<std::size_t>::max() / n) huge = true;
            total = huge ? total : total * n;
        }
        const std::size_t want = huge ? opts_.validation_samples : std::min(opts_.validation_samples, total);
        std::unordered_set<Multi, KeyHash> chosen;
        while (validation_.size() < want) {
            Multi m = random_index();
            if (chosen.insert(m).second) validation_.push_back(std::move(m));
        }
        validation_values_ = tensor_.evaluate(validation_);
    }

    CMatrix superblock(std::size_t k) {
        const auto& L = left_[k];
        const auto& R = right_[k + 2];
        const std::size_t nk = dims_[k];
        const std::size_t nk1 = dims_[k + 1];
        const std::size_t rows = L.size() * nk;
        const std::size_t cols = nk1 * R.size();
        std::vector<Multi> idx;
        idx.reserve(rows * cols);
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i1 = c % nk1;
            const auto& rb = R[c / nk1];
            for (std::size_t r = 0; r < rows; ++r) {
                const auto& la = L[r % L.size()];
                Multi m;
                m.reserve(d_);
                m.insert(m.end(), la.begin(), la.end());
                m.push_back(r / L.size());
                m.push_back(i1);
                m.insert(m.end(), rb.begin(), rb.end());
                idx.push_back(std::move(m));
            }
        }
        const auto vals = tensor_.evaluate(idx);
        CMatrix b(rows, cols);
        std::copy(vals.begin(), vals.end(), b.data());
        return b;
    }

    std::size_t choose_rank(const Eigen::VectorXd& s, double norm_b, std::size_t limit) {
        std::size_t r = truncation_rank(s, delta_rel_ * norm_b);
        const std::size_t hard = std::min(cap_, limit);
        if (r > hard) {
            capped_ = true;
            r = hard;
        }
        return std::max<std::size_t>(r, 1);
    }

    void sweep_left_to_right() {
        for (std::size_t k = 0; k + 1 < d_; ++k) {
            const CMatrix b = superblock(k);
            Eigen::BDCSVD<CMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto limit = static_cast<std::size_t>(std::min(b.rows(), b.cols()));
            const std::size_t r = choose_rank(svd.singularValues(), b.norm(), limit);
            const auto re = static_cast<Eigen::Index>(r);
            const CMatrix u = svd.matrixU().leftCols(re);
            const auto rows = maxvol(u);
            CMatrix usub(re, re);
            for (std::size_t j = 0; j < r; ++j) usub.row(static_cast<Eigen::Index>(j)) = u.row(static_cast<Eigen::Index>(rows[j]));
            Eigen::FullPivLU<CMatrix> lu(usub);
            const CMatrix inv = lu.inverse();

            const auto& L = left_[k];
            std::vector<Multi> next;
            next.reserve(r);
            for (auto row : rows) {
                Multi m = L[row % L.size()];
                m.push_back(row / L.size());
                next.push_back(std::move(m));
            }
            TTCore core(L.size(), dims_[k], r);
            core.mat = u * inv;
            cores_[k] = std::move(core);
            left_[k + 1] = std::move(next);

            if (k + 2 == d_) {
                const CMatrix tail = usub * svd.singularValues().head(re).asDiagonal() * svd.matrixV().leftCols(re).adjoint();
                TTCore last(r, dims_[k + 1], 1);
                last.mat = Eigen::Map<const CMatrix>(tail.data(), tail.size(), 1);
                cores_[k + 1] = std::move(last);
            }
        }
    }

    void sweep_right_to_left() {
        for (std::size_t k = d_ - 1; k-- > 0;) {
            const CMatrix b = superblock(k);
            Eigen::BDCSVD<CMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto limit = static_cast<std::size_t>(std::min(b.rows(), b.cols()));
            const std::size_t r = choose_rank(svd.singularValues(), b.norm(), limit);
            const auto re = static_cast<Eigen::Index>(r);
            const CMatrix vh = svd.matrixV().leftCols(re).adjoint();  // r x cols
            const auto cols = maxvol(vh.transpose());
            CMatrix vsub(re, re);
            for (std::size_t j = 0; j < r; ++j) vsub.col(static_cast<Eigen::Index>(j)) = vh.col(static_cast<Eigen::Index>(cols[j]));
            Eigen::FullPivLU<CMatrix> lu(vsub);
            const CMatrix right_interp = lu.inverse() * vh;

            const auto& R = right_[k + 2];
            const std::size_t n1 = dims_[k + 1];
            std::vector<Multi> next;
            next.reserve(r);
            for (auto c : cols) {
                Multi m{c % n1};
                const auto& tail = R[c / n1];
                m.insert(m.end(), tail.begin(), tail.end());
                next.push_back(std::move(m));
            }
            cores_[k + 1] = core_from_right(right_interp, r, n1, R.size());
            right_[k + 1] = std::move(next);

            if (k == 0) {
                const CMatrix head = svd.matrixU().leftCols(re) * svd.singularValues().head(re).asDiagonal() * vsub;
                TTCore first(1, dims_[0], r);
                first.mat = head;
                cores_[0] = std::move(first);
            }
        }
    }

    bool on_cross(const Multi& v) const {
        // A validation index lies on a pivot cross when some bond's prefix and
        // suffix both belong to the current index sets.
        for (std::size_t b = 1; b < d_; ++b) {
            const Multi pre(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(b));
            const Multi suf(v.begin() + static_cast<std::ptrdiff_t>(b), v.end());
            const bool in_left = std::find(left_[b].begin(), left_[b].end(), pre) != left_[b].end();
            if (!in_left) continue;
            if (std::find(right_[b].begin(), right_[b].end(), suf) != right_[b].end()) return true;
        }
        return false;
    }

    double validate(const TTTensor& tt) {
        // Keep the held-out set disjoint from the interpolation crosses.
        std::unordered_set<Multi, KeyHash> current(validation_.begin(), validation_.end());
        for (std::size_t q = 0; q < validation_.size(); ++q) {
            int attempts = 0;
            while (on_cross(validation_[q]) && attempts++ < 16) {
                Multi m = random_index();
                if (current.contains(m)) continue;
                current.erase(validation_[q]);
                current.insert(m);
                validation_[q] = m;
                validation_values_[q] = tensor_.evaluate({m})[0];
            }
        }
        double num = 0.0;
        double den = 0.0;
        for (std::size_t q = 0; q < validation_.size(); ++q) {
            num += std::norm(tt.element(validation_[q]) - validation_values_[q]);
            den += std::norm(validation_values_[q]);
        }
        if (den == 0.0) return std::sqrt(num);
        return std::sqrt(num / den);
    }

    std::vector<std::size_t> dims_;
    std::size_t d_;
    CrossOptions opts_;
    CachedTensor tensor_;
    std::vector<std::vector<Multi>> left_;
    std::vector<std::vector<Multi>> right_;
    std::vector<TTCore> cores_;
    std::vector<Multi> validation_;
    std::vector<cplx> validation_values_;
    std::mt19937_64 rng_;
    std::size_t cap_ = 1;
    double delta_rel_ = 0.0;
    bool capped_ = false;
};

}  // namespace

CrossResult tt_cross(const EntryFn& entry, const std::vector<std::size_t>& dims, const CrossOptions& opts) {
    if (!(opts.tol > 0.0)) throw ArgumentError("tt_cross: tol must be positive");
    if (dims.size() < 2) throw ArgumentError("tt_cross: need at least two modes");
    for (auto n : dims)
        if (n == 0) throw ArgumentError("tt_cross: extents must be positive");
    if (!entry) throw ArgumentError("tt_cross: missing entry function");
    DmrgCross cross(entry, dims, opts);
    return cross.run();
}

}  // namespace vsie::tensor
