// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include "vsie/ops.hpp"

namespace vsie::ops {

cplx system_scale(const em::VoxelGrid& grid, const em::Frequency& f) {
    return grid.voxel_volume() / cplx(0.0, f.omega() * kEps0);
}

double mesh_alpha(const em::SurfaceMesh& mesh, const em::Frequency& f, cplx s) {
    if (mesh.size() == 0) return 1.0;
    double mean = 0.0;
    for (const auto& p : mesh.patches) mean += std::abs(em::surface_entry(p, p, f));
    mean /= static_cast<double>(mesh.size());
    return std::sqrt(std::abs(s) / mean);
}

CMatrix dense_coupling(const em::VoxelGrid& grid, const PatchSet& set, const em::Frequency& f, em::CouplingRule rule) {
    const std::size_t nv = grid.n_voxels();
    const auto m = static_cast<Eigen::Index>(set.size());
    const cplx scale(0.0, -f.omega() * kEps0);
    CMatrix b = CMatrix::Zero(static_cast<Eigen::Index>(3 * nv), m);
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index p = 0; p < m; ++p) {
        const auto& patch = set.patches[static_cast<std::size_t>(p)];
        const cplx a = scale * set.alpha(p);
        for (std::size_t l = 0; l < nv; ++l) {
            if (!grid.in_body(l)) continue;
            const auto e = em::coupling_field(grid.center(l), grid.spacing(), patch, f, rule);
            for (std::size_t u = 0; u < 3; ++u) b(static_cast<Eigen::Index>(u * nv + l), p) = a * e(static_cast<Eigen::Index>(u));
        }
    }
    return b;
}

CMatrix dense_surface(const PatchSet& rows, const PatchSet& cols, const em::Frequency& f, cplx s) {
    const bool same = &rows == &cols;
    const auto nr = static_cast<Eigen::Index>(rows.size());
    const auto nc = static_cast<Eigen::Index>(cols.size());
    CMatrix z(nr, nc);
#pragma omp parallel for schedule(dynamic, 4)
    for (Eigen::Index i = 0; i < nr; ++i) {
        const Eigen::Index j0 = same ? i : 0;
        for (Eigen::Index j = j0; j < nc; ++j) {
            const auto& a = rows.patches[static_cast<std::size_t>(i)];
            const auto& b = cols.patches[static_cast<std::size_t>(j)];
            z(i, j) = rows.alpha(i) * cols.alpha(j) * em::surface_entry(a, b, f) / s;
            if (same) z(j, i) = z(i, j);
        }
    }
    return z;
}

std::vector<double> lagrange_weights(const Vec3& point, const Vec3& origin, double spacing, std::size_t stencil,
                                     std::array<long, 3>& first) {
    if (stencil == 0) throw ArgumentError("lagrange_weights: empty stencil");
    std::array<std::vector<double>, 3> w;
    for (int a = 0; a < 3; ++a) {
        const double xi = (point(a) - origin(a)) / spacing;
        const long nearest = std::lround(xi);
        first[static_cast<std::size_t>(a)] = nearest - static_cast<long>(stencil / 2);
        auto& wa = w[static_cast<std::size_t>(a)];
        wa.assign(stencil, 1.0);
        for (std::size_t i = 0; i < stencil; ++i) {
            const double ni = static_cast<double>(first[static_cast<std::size_t>(a)] + static_cast<long>(i));
            for (std::size_t j = 0; j < stencil; ++j) {
                if (j == i) continue;
                const double nj = static_cast<double>(first[static_cast<std::size_t>(a)] + static_cast<long>(j));
                wa[i] *= (xi - nj) / (ni - nj);
            }
        }
    }
    std::vector<double> out(stencil * stencil * stencil);
    for (std::size_t k = 0; k < stencil; ++k)
        for (std::size_t j = 0; j < stencil; ++j)
            for (std::size_t i = 0; i < stencil; ++i) out[i + stencil * (j + stencil * k)] = w[0][i] * w[1][j] * w[2][k];
    return out;
}

// ---------------------------------------------------------------------------

namespace {

CVector real_times(const Eigen::SparseMatrix<double>& a, const CVector& x) {
    const Eigen::VectorXd re = a * x.real();
    const Eigen::VectorXd im = a * x.imag();
    CVector y(re.size());
    y.real() = re;
    y.imag() = im;
    return y;
}

CVector real_transpose_times(const Eigen::SparseMatrix<double>& a, const CVector& x) {
    const Eigen::VectorXd re = a.transpose() * x.real();
    const Eigen::VectorXd im = a.transpose() * x.imag();
    CVector y(re.size());
    y.real() = re;
    y.imag() = im;
    return y;
}

using Box = std::array<std::array<long, 2>, 3>;  // per axis [lo, hi], inclusive

bool boxes_touch(const Box& a, const Box& b, long gap) {
    for (int k = 0; k < 3; ++k)
        if (a[k][0] - gap > b[k][1] || b[k][0] - gap > a[k][1]) return false;
    return true;
}

bool box_contains(const Box& b, const std::array<long, 3>& n, long gap) {
    for (int k = 0; k < 3; ++k)
        if (n[k] < b[k][0] - gap || n[k] > b[k][1] + gap) return false;
    return true;
}

// Kernels on the extended grid: scalar g between nodes (zero self term) and
// the point-dipole field averaged over a voxel.
std::pair<tensor::DenseTensor, em::ToeplitzKernels> grid_kernels(const Index3& dims, double h, double k0) {
    const std::vector<std::size_t> d{dims[0], dims[1], dims[2]};
    tensor::DenseTensor g(d);
    em::ToeplitzKernels vb;
    vb.dims = dims;
    for (auto& c : vb.comp) c = tensor::DenseTensor(d);
    static constexpr int uv[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
    const auto offsets = em::voxel_points(Vec3::Zero(), h, em::VoxelRule::Eight);
    const auto total = static_cast<long>(dims[0] * dims[1] * dims[2]);
#pragma omp parallel for schedule(dynamic, 64)
    for (long lin = 0; lin < total; ++lin) {
        const auto l = static_cast<std::size_t>(lin);
        const std::array<std::size_t, 3> o{l % dims[0], (l / dims[0]) % dims[1], l / (dims[0] * dims[1])};
        const Vec3 r = h * Vec3(static_cast<double>(o[0]), static_cast<double>(o[1]), static_cast<double>(o[2]));
        g[l] = l == 0 ? cplx{} : em::green_scalar(r, Vec3::Zero(), k0);
        Dyad dvb = Dyad::Zero();
        for (const auto& q : offsets) dvb += q.w * em::green_dyad(r + q.r, k0);
        for (std::size_t c = 0; c < 6; ++c) {
            const int u = uv[c][0];
            const int v = uv[c][1];
            const bool zero = u != v && (o[static_cast<std::size_t>(u)] == 0 || o[static_cast<std::size_t>(v)] == 0);
            vb.comp[c][l] = zero ? cplx{} : dvb(u, v);
        }
    }
    return {std::move(g), std::move(vb)};
}

}  // namespace

void check_pfft_margin(const std::vector<em::Patch>& patches, const em::VoxelGrid& grid, const PfftOptions& opts) {
    if (patches.empty()) return;
    const Index3& nb = grid.dims();
    const Vec3 node0 = grid.center(Index3{0, 0, 0});
    const long sl = static_cast<long>(opts.stencil);
    std::array<long, 3> lo{0, 0, 0};
    std::array<long, 3> hi{static_cast<long>(nb[0]) - 1, static_cast<long>(nb[1]) - 1, static_cast<long>(nb[2]) - 1};
    std::vector<std::array<long, 6>> reach(patches.size());
    for (std::size_t p = 0; p < patches.size(); ++p) {
        std::vector<em::WeightedPoint> pts = em::patch_points(patches[p], em::PatchRule::Five);
        for (int sgn : {-1, 1})
            for (const auto& q : em::patch_points(em::end_charge(patches[p], sgn), em::PatchRule::Five)) pts.push_back(q);
        auto& r = reach[p];
        r = {std::numeric_limits<long>::max(), std::numeric_limits<long>::min(), std::numeric_limits<long>::max(),
             std::numeric_limits<long>::min(), std::numeric_limits<long>::max(), std::numeric_limits<long>::min()};
        for (const auto& q : pts) {
            std::array<long, 3> first{};
            lagrange_weights(q.r, node0, grid.spacing(), opts.stencil, first);
            for (int k = 0; k < 3; ++k) {
                r[2 * k] = std::min(r[2 * k], first[k]);
                r[2 * k + 1] = std::max(r[2 * k + 1], first[k] + sl - 1);
            }
        }
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], r[2 * k]);
            hi[k] = std::max(hi[k], r[2 * k + 1]);
        }
    }
    for (int k = 0; k < 3; ++k) {
        const auto ext = static_cast<std::size_t>(hi[k] - lo[k] + 1);
        if (static_cast<double>(ext) <= opts.max_extension * static_cast<double>(nb[k])) continue;
        // Name the patch reaching farthest outside the body grid along this axis.
        std::size_t worst = 0;
        long far = -1;
        for (std::size_t p = 0; p < patches.size(); ++p) {
            const long out = std::max(-reach[p][2 * k], reach[p][2 * k + 1] - static_cast<long>(nb[k]) + 1);
            if (out > far) {
                far = out;
                worst = p;
            }
        }
        throw GeometryError("pfft: patch " + std::to_string(worst) + " lies too far from the body grid (extended grid " +
                            std::to_string(ext) + " > " + std::to_string(opts.max_extension) + " x " + std::to_string(nb[k]) +
                            " nodes along axis " + std::to_string(k) + ")");
    }
}

PfftNearOperator::PfftNearOperator(const PatchSet& near, const ToeplitzFFTOperator& body, const em::Frequency& f, const PfftOptions& opts)
    : m_(near.size()), body_(&body), near_(near), freq_(f) {
    if (static_cast<std::size_t>(near.alpha.size()) != m_) throw ArgumentError("pfft: one scale factor per patch required");
    if (opts.stencil == 0) throw ArgumentError("pfft: stencil must be positive");
    if (m_ == 0) return;
    check_pfft_margin(near.patches, body.grid(), opts);

    const auto& grid = body.grid();
    const double h = grid.spacing();
    const Index3& nb = grid.dims();
    const Vec3 node0 = grid.center(Index3{0, 0, 0});
    const long sl = static_cast<long>(opts.stencil);

    // Stencil boxes in body-node coordinates (may reach outside the body grid).
    struct QuadStencil {
        std::array<long, 3> first;
        std::vector<double> w;
        double weight;
    };
    std::vector<std::vector<QuadStencil>> stencils(m_);  // current moments
    std::vector<std::vector<QuadStencil>> charges(m_);   // end charges, signed weights
    std::vector<Box> boxes(m_);                          // all stencils of a patch
    std::vector<Box> current_boxes(m_);
    Box all{{{0, static_cast<long>(nb[0]) - 1}, {0, static_cast<long>(nb[1]) - 1}, {0, static_cast<long>(nb[2]) - 1}}};
    constexpr long lmax = std::numeric_limits<long>::max();
    constexpr long lmin = std::numeric_limits<long>::min();
    auto add = [&](std::vector<QuadStencil>& out, Box& b, const Vec3& r, double weight) {
        QuadStencil st;
        st.w = lagrange_weights(r, node0, h, opts.stencil, st.first);
        st.weight = weight;
        for (int k = 0; k < 3; ++k) {
            b[k][0] = std::min(b[k][0], st.first[k]);
            b[k][1] = std::max(b[k][1], st.first[k] + sl - 1);
        }
        out.push_back(std::move(st));
    };
    for (std::size_t p = 0; p < m_; ++p) {
        const auto& patch = near.patches[p];
        Box b{{{lmax, lmin}, {lmax, lmin}, {lmax, lmin}}};
        for (const auto& q : em::patch_points(patch, em::PatchRule::Five)) add(stencils[p], b, q.r, q.w);
        current_boxes[p] = b;
        // Each end carries a unit charge spread over a patch-sized rectangle centred on the end edge.
        for (int sgn : {-1, 1}) {
            const em::Patch end = em::end_charge(patch, sgn);
            for (const auto& q : em::patch_points(end, em::PatchRule::Five)) add(charges[p], b, q.r, sgn * q.w);
        }
        boxes[p] = b;
        for (int k = 0; k < 3; ++k) {
            all[k][0] = std::min(all[k][0], b[k][0]);
            all[k][1] = std::max(all[k][1], b[k][1]);
        }
    }

    std::array<long, 3> lo{};
    for (int k = 0; k < 3; ++k) {
        lo[k] = all[k][0];
        ext_dims_[k] = static_cast<std::size_t>(all[k][1] - all[k][0] + 1);
    }
    ext_origin_ = grid.origin() + h * Vec3(static_cast<double>(lo[0]), static_cast<double>(lo[1]), static_cast<double>(lo[2]));
    const std::size_t n_ext = ext_dims_[0] * ext_dims_[1] * ext_dims_[2];
    auto ext_linear = [&](long i, long j, long k) {
        return static_cast<std::size_t>(i - lo[0]) + ext_dims_[0] * (static_cast<std::size_t>(j - lo[1]) + ext_dims_[1] * static_cast<std::size_t>(k - lo[2]));
    };

    const std::size_t nv = grid.n_voxels();
    body_to_ext_.resize(nv);
    for (std::size_t l = 0; l < nv; ++l) {
        const Index3 b = grid.multi(l);
        body_to_ext_[l] = ext_linear(static_cast<long>(b[0]), static_cast<long>(b[1]), static_cast<long>(b[2]));
    }

    // Projections: current moments alpha l t w_q and end charges alpha s w_q.
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<Eigen::Triplet<double>> qtrip;
    trip.reserve(m_ * 5 * 3 * static_cast<std::size_t>(sl * sl * sl));
    qtrip.reserve(m_ * 10 * static_cast<std::size_t>(sl * sl * sl));
    auto scatter = [&](const QuadStencil& st, auto&& emit) {
        for (long c = 0; c < sl; ++c)
            for (long b = 0; b < sl; ++b)
                for (long i = 0; i < sl; ++i) {
                    const double w = st.weight * st.w[static_cast<std::size_t>(i + sl * (b + sl * c))];
                    if (w != 0.0) emit(ext_linear(st.first[0] + i, st.first[1] + b, st.first[2] + c), w);
                }
    };
    for (std::size_t p = 0; p < m_; ++p) {
        const auto& patch = near.patches[p];
        if (near.alpha(static_cast<Eigen::Index>(p)).imag() != 0.0) throw ArgumentError("pfft: scale factors must be real");
        const double a = near.alpha(static_cast<Eigen::Index>(p)).real();
        const Vec3 moment = a * patch.length * patch.t;
        const int col = static_cast<int>(p);
        for (const auto& st : stencils[p])
            scatter(st, [&](std::size_t node, double w) {
                for (int u = 0; u < 3; ++u)
                    if (moment(u) != 0.0) trip.emplace_back(static_cast<int>(static_cast<std::size_t>(u) * n_ext + node), col, w * moment(u));
            });
        for (const auto& st : charges[p]) scatter(st, [&](std::size_t node, double w) { qtrip.emplace_back(static_cast<int>(node), col, a * w); });
    }
    proj_.resize(static_cast<Eigen::Index>(3 * n_ext), static_cast<Eigen::Index>(m_));
    proj_.setFromTriplets(trip.begin(), trip.end());
    charge_.resize(static_cast<Eigen::Index>(n_ext), static_cast<Eigen::Index>(m_));
    charge_.setFromTriplets(qtrip.begin(), qtrip.end());

    auto [g, vb] = grid_kernels(ext_dims_, h, f.k0());
    kg_ = std::make_unique<ScalarToeplitz>(g);
    kvb_ = std::make_unique<DyadicToeplitz>(vb);
    k2_ = f.k0() * f.k0();
    inv_dv_ = 1.0 / grid.voxel_volume();

    // Precorrection: direct minus grid-mediated entries for nearby pairs.
    const long gap = static_cast<long>(opts.precorrection_gap);
    // A voxel sees the grid through the same stencil a patch point would use,
    // so voxel pairs overlap when the voxel lies within half a stencil of the box.
    const long body_reach = sl / 2;
    const cplx s = system_scale(grid, f);
    const cplx field_scale(0.0, -f.omega() * kEps0);
    std::vector<Eigen::Triplet<cplx>> tcc;
    std::vector<Eigen::Triplet<cplx>> tbc;
    std::vector<std::size_t> body_voxels;
    for (std::size_t l = 0; l < nv; ++l)
        if (grid.in_body(l)) body_voxels.push_back(l);

#pragma omp parallel
    {
        std::vector<Eigen::Triplet<cplx>> lcc;
        std::vector<Eigen::Triplet<cplx>> lbc;
#pragma omp for schedule(dynamic, 1) nowait
        for (long qq = 0; qq < static_cast<long>(m_); ++qq) {
            const auto q = static_cast<std::size_t>(qq);
            CVector e = CVector::Zero(static_cast<Eigen::Index>(m_));
            e(qq) = 1.0;
            CVector yc;
            CVector yb;
            grid_apply(e, nullptr, &yc, &yb);
            const cplx aq = near.alpha(qq);
            for (std::size_t p = 0; p < m_; ++p) {
                if (!boxes_touch(boxes[p], boxes[q], gap)) continue;
                const cplx direct = near.alpha(static_cast<Eigen::Index>(p)) * aq * em::surface_entry(near.patches[p], near.patches[q], f) / s;
                lcc.emplace_back(static_cast<int>(p), static_cast<int>(q), direct - yc(static_cast<Eigen::Index>(p)));
            }
            for (std::size_t l : body_voxels) {
                const Index3 b = grid.multi(l);
                if (!box_contains(current_boxes[q], {static_cast<long>(b[0]), static_cast<long>(b[1]), static_cast<long>(b[2])}, gap + body_reach)) continue;
                const auto fld = em::coupling_field(grid.center(l), h, near.patches[q], f, em::CouplingRule::Near);
                for (std::size_t u = 0; u < 3; ++u) {
                    const auto r = static_cast<Eigen::Index>(u * nv + l);
                    lbc.emplace_back(static_cast<int>(r), static_cast<int>(q), field_scale * aq * fld(static_cast<Eigen::Index>(u)) - yb(r));
                }
            }
        }
#pragma omp critical
        {
            tcc.insert(tcc.end(), lcc.begin(), lcc.end());
            tbc.insert(tbc.end(), lbc.begin(), lbc.end());
        }
    }
    pc_cc_.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    pc_cc_.setFromTriplets(tcc.begin(), tcc.end());
    pc_bc_.resize(static_cast<Eigen::Index>(3 * nv), static_cast<Eigen::Index>(m_));
    pc_bc_.setFromTriplets(tbc.begin(), tbc.end());
}

PfftNearOperator::~PfftNearOperator() = default;

void PfftNearOperator::grid_apply(const CVector& xc, const CVector* xb, CVector* yc, CVector* yb) const {
    const std::size_t n_ext = ext_dims_[0] * ext_dims_[1] * ext_dims_[2];
    const std::size_t nv = body_->grid().n_voxels();
    const auto& grid = body_->grid();
    const auto spec_c = kvb_->forward(real_times(proj_, xc));

    std::optional<DyadicToeplitz::Spectrum> spec_b;
    if (xb) {
        CVector gb = CVector::Zero(static_cast<Eigen::Index>(3 * n_ext));
        for (std::size_t l = 0; l < nv; ++l) {
            if (!grid.in_body(l)) continue;
            for (std::size_t u = 0; u < 3; ++u)
                gb(static_cast<Eigen::Index>(u * n_ext + body_to_ext_[l])) = (*xb)(static_cast<Eigen::Index>(u * nv + l));
        }
        spec_b = kvb_->forward(gb);
    }
    if (yc) {
        // Mixed potentials scaled by 1/s: -k0^2 A / dV from currents, phi / dV from charges.
        CVector pot = CVector::Zero(static_cast<Eigen::Index>(3 * n_ext));
        for (std::size_t u = 0; u < 3; ++u) kg_->finish(spec_c.comp[u], -k2_ * inv_dv_, pot.data() + u * n_ext);
        if (spec_b) pot -= kvb_->finish(*spec_b);
        const CVector q = real_times(charge_, xc);
        CVector phi = CVector::Zero(static_cast<Eigen::Index>(n_ext));
        kg_->finish(kg_->forward(q.data()), inv_dv_, phi.data());
        *yc = real_transpose_times(proj_, pot) + real_transpose_times(charge_, phi);
    }
    if (yb) {
        const CVector field = kvb_->finish(spec_c);
        *yb = CVector::Zero(static_cast<Eigen::Index>(3 * nv));
        for (std::size_t l = 0; l < nv; ++l) {
            if (!grid.in_body(l)) continue;
            for (std::size_t u = 0; u < 3; ++u)
                (*yb)(static_cast<Eigen::Index>(u * nv + l)) = -field(static_cast<Eigen::Index>(u * n_ext + body_to_ext_[l]));
        }
    }
}

CVector PfftNearOperator::apply(const CVector& x) const {
    if (static_cast<std::size_t>(x.size()) != size()) throw ArgumentError("pfft_apply: vector length mismatch");
    const auto m = static_cast<Eigen::Index>(m_);
    const auto nb = static_cast<Eigen::Index>(body_->size());
    const CVector xb = x.tail(nb);
    CVector y(x.size());
    y.tail(nb) = body_->apply_symmetric(xb);
    if (m_ == 0) return y;
    const CVector xc = x.head(m);
    CVector yc;
    CVector yb;
    grid_apply(xc, &xb, &yc, &yb);
    y.head(m) = yc + pc_cc_ * xc + pc_bc_.transpose() * xb;
    y.tail(nb) += yb + pc_bc_ * xc;
    return y;
}

CMatrix PfftNearOperator::grid_coil_block() const {
    const auto m = static_cast<Eigen::Index>(m_);
    CMatrix out(m, m);
    for (Eigen::Index q = 0; q < m; ++q) {
        CVector e = CVector::Zero(m);
        e(q) = 1.0;
        CVector yc;
        grid_apply(e, nullptr, &yc, nullptr);
        out.col(q) = yc;
    }
    return out;
}

CMatrix PfftNearOperator::grid_coupling_block() const {
    const auto m = static_cast<Eigen::Index>(m_);
    CMatrix out(static_cast<Eigen::Index>(body_->size()), m);
    for (Eigen::Index q = 0; q < m; ++q) {
        CVector e = CVector::Zero(m);
        e(q) = 1.0;
        CVector yb;
        grid_apply(e, nullptr, nullptr, &yb);
        out.col(q) = yb;
    }
    return out;
}

CMatrix PfftNearOperator::coil_block() const { return grid_coil_block() + CMatrix(pc_cc_); }

CMatrix PfftNearOperator::coupling_block() const { return grid_coupling_block() + CMatrix(pc_bc_); }

// ---------------------------------------------------------------------------

DenseNearOperator::DenseNearOperator(const PatchSet& near, const ToeplitzFFTOperator& body, const em::Frequency& f)
    : body_(&body) {
    const cplx s = system_scale(body.grid(), f);
    acc_ = dense_surface(near, near, f, s);
    bc_ = dense_coupling(body.grid(), near, f, em::CouplingRule::Near);
}

CVector DenseNearOperator::apply(const CVector& x) const {
    if (static_cast<std::size_t>(x.size()) != size()) throw ArgumentError("dense near apply: vector length mismatch");
    const Eigen::Index m = acc_.rows();
    const auto nb = static_cast<Eigen::Index>(body_->size());
    const CVector xc = x.head(m);
    const CVector xb = x.tail(nb);
    CVector y(x.size());
    y.head(m) = acc_ * xc + bc_.transpose() * xb;
    y.tail(nb) = bc_ * xc + body_->apply_symmetric(xb);
    return y;
}

}  // namespace vsie::ops
