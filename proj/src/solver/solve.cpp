// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <random>

#include "vsie/solver.hpp"

namespace vsie::solver {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void append(ops::PatchSet& set, CVector& v, const em::SurfaceMesh& mesh, double alpha, cplx scale) {
    const auto old = static_cast<Eigen::Index>(set.size());
    const auto add = static_cast<Eigen::Index>(mesh.size());
    set.patches.insert(set.patches.end(), mesh.patches.begin(), mesh.patches.end());
    set.alpha.conservativeResize(old + add);
    set.alpha.tail(add).setConstant(alpha);
    v.conservativeResize(old + add);
    v.tail(add).setZero();
    for (std::size_t p = 0; p < mesh.ports.size(); ++p) v.tail(add) += scale * em::excitation_vector(mesh, p);
}

void check_problem(const Problem& problem) {
    std::size_t ports = 0;
    for (const auto& m : problem.surfaces) {
        m.validate();
        ports += m.ports.size();
    }
    if (ports == 0) throw ArgumentError("scene has no ports to excite");
}

// Right-hand side (alpha v / s | 0) on the stacked layout.
CVector stacked_rhs(const Partition& part, std::size_t n_body, cplx s) {
    const auto mf = static_cast<Eigen::Index>(part.far.size());
    const auto mn = static_cast<Eigen::Index>(part.near.size());
    CVector b = CVector::Zero(mf + mn + static_cast<Eigen::Index>(n_body));
    b.head(mf) = part.far.alpha.cwiseProduct(part.v_far) / s;
    b.segment(mf, mn) = part.near.alpha.cwiseProduct(part.v_near) / s;
    return b;
}

void finish(SolveResult& res, const Partition& part, const Problem& problem, const GmresResult& g, const LinearOperator& op,
            const CVector& b) {
    const auto mf = static_cast<Eigen::Index>(part.far.size());
    const auto mn = static_cast<Eigen::Index>(part.near.size());
    const auto nb = static_cast<Eigen::Index>(3 * problem.grid.n_voxels());
    auto& sol = res.solution;
    sol.scaled = g.x;
    sol.far = part.far.alpha.cwiseProduct(g.x.head(mf));
    sol.near = part.near.alpha.cwiseProduct(g.x.segment(mf, mn));
    sol.body = g.x.tail(nb);

    auto& rep = res.report;
    rep.converged = g.converged;
    rep.iterations = g.iterations;
    rep.cycles = g.cycles;
    rep.residual = g.residual;
    rep.history = g.history;
    const CVector r = b - op(g.x);
    rep.residual_coil = r.head(mf + mn).norm() / b.norm();
    rep.residual_body = r.tail(nb).norm() / b.norm();
    rep.n_voxels = problem.grid.n_voxels();
    rep.n_body = problem.grid.body_count();
    rep.m_far = part.far.size();
    rep.m_near = part.near.size();
    rep.absorbed_power_w = absorbed_power(problem.grid, problem.frequency, sol.body);
}

}  // namespace

Partition partition(const Problem& problem, cplx s) {
    Partition part;
    part.far.alpha = CVector(0);
    part.near.alpha = CVector(0);
    part.v_far = CVector(0);
    part.v_near = CVector(0);
    for (const auto& mesh : problem.surfaces) {
        const double alpha = ops::mesh_alpha(mesh, problem.frequency, s);
        if (mesh.domain == em::Domain::Far)
            append(part.far, part.v_far, mesh, alpha, problem.excitation_scale);
        else
            append(part.near, part.v_near, mesh, alpha, problem.excitation_scale);
    }
    return part;
}

SolveResult solve_hybrid(const Problem& problem, const SolveConfig& cfg) {
    const auto t0 = Clock::now();
    check_problem(problem);
    const auto& f = problem.frequency;
    const cplx s = ops::system_scale(problem.grid, f);
    const Partition part = partition(problem, s);
    SolveResult res;
    auto& rep = res.report;

    const ops::ToeplitzFFTOperator body(problem.grid, f, {cfg.compression.tucker_tol});
    rep.cf_kernels = body.kernel_compression();

    ops::HybridSystem::Parts parts;
    parts.body = &body;
    parts.field_scale = cplx(0.0, -f.omega() * kEps0);
    parts.alpha_f = part.far.alpha;
    parts.a_ff = ops::dense_surface(part.far, part.far, f, s);
    if (part.far.size() > 0) {
        ops::TTCouplingOptions tto;
        tto.tol = cfg.compression.tt_tol;
        tto.max_rank = cfg.compression.tt_max_rank;
        tto.max_sweeps = cfg.compression.tt_max_sweeps;
        tto.seed = cfg.compression.seed;
        parts.far_coupling = std::make_shared<ops::TTCouplingOperator>(problem.grid, part.far.patches, f, tto);
        rep.cf_coupling = parts.far_coupling->compression();
        rep.entry_evals += parts.far_coupling->evaluations();
        rep.tt_validation_error = parts.far_coupling->validation_error();
        if (part.near.size() > 0) {
            const auto entry = [&](std::size_t i, std::size_t j) {
                return part.near.alpha(static_cast<Eigen::Index>(i)) * part.far.alpha(static_cast<Eigen::Index>(j)) *
                       em::surface_entry(part.near.patches[i], part.far.patches[j], f) / s;
            };
            tensor::AcaOptions ao;
            ao.tol = cfg.compression.aca_tol;
            ao.seed = cfg.compression.seed;
            auto aca = tensor::aca(entry, part.near.size(), part.far.size(), ao);
            rep.entry_evals += aca.evaluations;
            rep.aca_rank = aca.factors.rank();
            parts.fn = std::move(aca.factors);
        }
    }
    parts.pfft = std::make_shared<ops::PfftNearOperator>(part.near, body, f, cfg.pfft);
    const ops::HybridSystem sys(std::move(parts));

    const CVector b = stacked_rhs(part, body.size(), s);
    const LinearOperator op = [&](const CVector& x) { return sys.apply(x); };
    const auto g = gmres(op, b, cfg.gmres);
    finish(res, part, problem, g, op, b);
    rep.wall_ms = elapsed_ms(t0);
    return res;
}

SolveResult solve_dense(const Problem& problem, const SolveConfig& cfg) {
    const auto t0 = Clock::now();
    check_problem(problem);
    const auto& f = problem.frequency;
    const cplx s = ops::system_scale(problem.grid, f);
    const Partition part = partition(problem, s);
    const std::size_t m = part.far.size() + part.near.size();
    const std::size_t nb = 3 * problem.grid.n_voxels();
    if (m + nb > cfg.dense_limit)
        throw LimitError("dense reference refused: " + std::to_string(m + nb) + " unknowns exceed the limit of " +
                         std::to_string(cfg.dense_limit));
    SolveResult res;
    auto& rep = res.report;

    ops::PatchSet all = part.far;
    all.patches.insert(all.patches.end(), part.near.patches.begin(), part.near.patches.end());
    all.alpha.conservativeResize(static_cast<Eigen::Index>(m));
    all.alpha.tail(static_cast<Eigen::Index>(part.near.size())) = part.near.alpha;
    const CMatrix acc = ops::dense_surface(all, all, f, s);
    const CMatrix bc = ops::dense_coupling(problem.grid, all, f, em::CouplingRule::Near);
    const ops::ToeplitzFFTOperator body(problem.grid, f);
    rep.entry_evals = m * m + m * problem.grid.body_count() * 3;
    rep.cf_coupling = {1, 1};

    const auto mi = static_cast<Eigen::Index>(m);
    const auto ni = static_cast<Eigen::Index>(nb);
    const LinearOperator op = [&](const CVector& x) {
        CVector y(x.size());
        y.head(mi) = acc * x.head(mi) + bc.transpose() * x.tail(ni);
        y.tail(ni) = bc * x.head(mi) + body.apply_symmetric(x.tail(ni));
        return y;
    };

    // The coupled matrix is complex-symmetric by construction; probe it.
    {
        std::mt19937_64 rng(cfg.compression.seed);
        std::normal_distribution<double> d;
        CVector x(mi + ni);
        CVector y(mi + ni);
        for (auto& e : x) e = cplx(d(rng), d(rng));
        for (auto& e : y) e = cplx(d(rng), d(rng));
        const CVector ax = op(x);
        const CVector ay = op(y);
        const cplx l = (y.transpose() * ax)(0);
        const cplx r = (x.transpose() * ay)(0);
        rep.symmetry_error = std::abs(l - r) / (y.norm() * ax.norm());
        if (*rep.symmetry_error > 1e-10) throw Error("dense reference: assembled system is not symmetric");
    }

    const CVector b = stacked_rhs(part, nb, s);
    const auto g = gmres(op, b, cfg.gmres);
    finish(res, part, problem, g, op, b);

    if (cfg.direct && m + nb <= cfg.direct_limit) {
        CMatrix full(mi + ni, mi + ni);
        for (Eigen::Index c = 0; c < mi + ni; ++c) {
            CVector e = CVector::Zero(mi + ni);
            e(c) = 1.0;
            full.col(c) = op(e);
        }
        const CVector xd = full.partialPivLu().solve(b);
        rep.direct_vs_gmres = relative_difference(g.x, xd);
    }
    rep.wall_ms = elapsed_ms(t0);
    return res;
}

double absorbed_power(const em::VoxelGrid& grid, const em::Frequency& f, const CVector& j) {
    const std::size_t nv = grid.n_voxels();
    if (static_cast<std::size_t>(j.size()) != 3 * nv) throw ArgumentError("absorbed_power: vector length must be 3 n_v");
    const double we0 = f.omega() * kEps0;
    double p = 0.0;
    for (std::size_t l = 0; l < nv; ++l) {
        if (!grid.in_body(l)) continue;
        const cplx denom = cplx(0.0, we0) * grid.chi(l);
        double e2 = 0.0;
        for (std::size_t u = 0; u < 3; ++u) e2 += std::norm(j(static_cast<Eigen::Index>(u * nv + l)) / denom);
        p += 0.5 * grid.voxel_volume() * we0 * (-grid.eps_r(l).imag()) * e2;
    }
    return p;
}

}  // namespace vsie::solver
