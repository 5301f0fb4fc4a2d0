// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, thresholds fixed below.
// Usage: vsie_acceptance <desk.yaml> <vsie cli> <scratch dir>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vsie/geometry.hpp"
#include "vsie/ops.hpp"
#include "vsie/scene.hpp"
#include "vsie/solver.hpp"
#include "vsie/tensor.hpp"

using namespace vsie;
namespace fs = std::filesystem;

namespace {

// Thresholds.
constexpr double kAc1MaxRelDiff = 1e-2;
constexpr double kAc2MinCompression = 50.0;
constexpr double kAc2MaxEvalFraction = 0.2;
constexpr double kAc3ToeplitzTol = 1e-10;
constexpr double kAc3TTApplyTol = 1e-12;
constexpr double kAc3AcaFactor = 10.0;
constexpr double kAc3PfftTol = 1e-2;
constexpr double kAc4CrossFactor = 10.0;
constexpr double kAc5LinearityTol = 1e-12;
constexpr double kAc6GmresTol = 1e-5;
constexpr std::size_t kAc6Restart = 50;
constexpr std::size_t kAc7Radii = 16;
constexpr double kShieldMinDistanceFraction = 0.4;

const em::Frequency kF(298e6);

// Collects sub-check lines and the verdict of one criterion.
class Criterion {
public:
    explicit Criterion(std::string id) : id_(std::move(id)) {}

    void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
        char buf[512];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(buf, sizeof buf, fmt, ap);
        va_end(ap);
        std::printf("  %s %-4s %s\n", id_.c_str(), ok ? "ok" : "bad", buf);
        std::fflush(stdout);
        pass_ = pass_ && ok;
    }

    void fail(const std::string& why) { check(false, "%s", why.c_str()); }

    bool finish(const std::string& summary, double seconds) const {
        std::printf("%s %s %s (%.1f s)\n", id_.c_str(), pass_ ? "PASS" : "FAIL", summary.c_str(), seconds);
        std::fflush(stdout);
        return pass_;
    }

private:
    std::string id_;
    bool pass_ = true;
};

CVector random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    CVector v(static_cast<Eigen::Index>(n));
    for (auto& e : v) e = cplx(d(rng), d(rng));
    return v;
}

double rel(const CVector& a, const CVector& b) { return (a - b).norm() / b.norm(); }

// Free-space Green function, written out here as an independent oracle.
cplx green(double r, double k0) { return std::exp(cplx(0.0, -k0 * r)) / (4.0 * kPi * r); }

// ---------------------------------------------------------------------------
// Desk scene, solved once for AC1, AC2 and AC6.

struct DeskRun {
    scene::SceneConfig config;
    scene::RunOutput out;
    double seconds = 0.0;
};

bool run_ac1(const DeskRun& d) {
    Criterion c("AC1");
    const auto& cfg = d.config;
    const auto& rep = d.out.result.report;
    c.check(cfg.dims == em::Index3{16, 16, 16}, "grid %zux%zux%zu", cfg.dims[0], cfg.dims[1], cfg.dims[2]);
    c.check(rep.m_near == 64 && rep.m_far == 256, "near patches %zu, far patches %zu", rep.m_near, rep.m_far);
    c.check(cfg.solve.compression.tt_tol == 1e-3 && cfg.solve.compression.aca_tol == 1e-3 && cfg.solve.compression.tucker_tol == 1e-5 &&
                cfg.solve.gmres.tol == 1e-5,
            "tolerances tt %.0e aca %.0e tucker %.0e gmres %.0e", cfg.solve.compression.tt_tol, cfg.solve.compression.aca_tol,
            cfg.solve.compression.tucker_tol, cfg.solve.gmres.tol);
    const em::VoxelGrid grid = scene::build_grid(cfg);
    const auto [lo, hi] = grid.body_bounds();
    const double extent = (hi - lo).maxCoeff();
    for (const auto& s : cfg.surfaces)
        if (s.domain == em::Domain::Far)
            c.check(s.body_distance >= kShieldMinDistanceFraction * extent, "far surface '%s' at %.3f m = %.2f x body extent", s.name.c_str(),
                    s.body_distance, s.body_distance / extent);
    const double diff = rep.rel_diff_ref.value_or(INFINITY);
    c.check(d.out.converged() && d.out.reference && d.out.reference->report.converged, "hybrid and dense solves converged");
    c.check(diff <= kAc1MaxRelDiff, "relative L2 difference hybrid vs dense %.3e (limit %.0e)", diff, kAc1MaxRelDiff);
    char s[128];
    std::snprintf(s, sizeof s, "desk hybrid vs dense rel diff %.3e <= %.0e", diff, kAc1MaxRelDiff);
    return c.finish(s, d.seconds);
}

bool run_ac2(const DeskRun& d) {
    Criterion c("AC2");
    const auto& rep = d.out.result.report;
    const em::VoxelGrid grid = scene::build_grid(d.config);
    const double dense = 3.0 * static_cast<double>(grid.n_voxels()) * static_cast<double>(rep.m_far);
    const double cf = rep.cf_coupling.value();
    const double frac = static_cast<double>(rep.entry_evals) / dense;
    c.check(cf > kAc2MinCompression, "TT coupling compression %.2f (%llu / %llu elements, floor %.0f)", cf,
            static_cast<unsigned long long>(rep.cf_coupling.numerator), static_cast<unsigned long long>(rep.cf_coupling.denominator),
            kAc2MinCompression);
    c.check(frac < kAc2MaxEvalFraction, "entry evaluations %zu = %.2f%% of 3 n_v m_f = %.0f (limit %.0f%%)", rep.entry_evals, 100.0 * frac,
            dense, 100.0 * kAc2MaxEvalFraction);
    c.check(rep.tt_validation_error <= 10.0 * d.config.solve.compression.tt_tol, "TT held-out error %.2e", rep.tt_validation_error);
    char s[160];
    std::snprintf(s, sizeof s, "compression %.1f > %.0f, evaluations %.1f%% < %.0f%%", cf, kAc2MinCompression, 100.0 * frac,
                  100.0 * kAc2MaxEvalFraction);
    return c.finish(s, 0.0);
}

// ---------------------------------------------------------------------------

// Block-Toeplitz matrix assembled entry by entry from signed voxel offsets.
CMatrix dense_toeplitz(const em::ToeplitzKernels& k) {
    const em::Index3 d = k.dims;
    const std::size_t n = d[0] * d[1] * d[2];
    CMatrix a(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
    auto coord = [&](std::size_t p) {
        return std::array<long, 3>{static_cast<long>(p % d[0]), static_cast<long>((p / d[0]) % d[1]), static_cast<long>(p / (d[0] * d[1]))};
    };
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            const auto cp = coord(p), cq = coord(q);
            const std::array<long, 3> o{cp[0] - cq[0], cp[1] - cq[1], cp[2] - cq[2]};
            for (int u = 0; u < 3; ++u)
                for (int v = 0; v < 3; ++v)
                    a(static_cast<Eigen::Index>(static_cast<std::size_t>(u) * n + p), static_cast<Eigen::Index>(static_cast<std::size_t>(v) * n + q)) =
                        k.at(o, u, v);
        }
    return a;
}

tensor::TTTensor random_tt(const std::vector<std::size_t>& dims, const std::vector<std::size_t>& ranks, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<tensor::TTCore> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        tensor::TTCore core(k == 0 ? 1 : ranks[k - 1], dims[k], k + 1 == dims.size() ? 1 : ranks[k]);
        for (Eigen::Index a = 0; a < core.mat.size(); ++a) core.mat.data()[a] = {nd(rng), nd(rng)};
        cores.push_back(std::move(core));
    }
    return tensor::TTTensor(std::move(cores));
}

// RMS relative error of an approximation on random entries of a matrix.
double sampled_error(const tensor::LowRankFactors& f, const tensor::MatrixEntryFn& entry, std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> ri(0, rows - 1), ci(0, cols - 1);
    double num = 0.0, den = 0.0;
    for (int s = 0; s < 1000; ++s) {
        const std::size_t i = ri(rng), j = ci(rng);
        const cplx a = entry(i, j);
        num += std::norm(f.entry(i, j) - a);
        den += std::norm(a);
    }
    return std::sqrt(num / den);
}

bool run_ac3() {
    Criterion c("AC3");
    const auto t0 = std::chrono::steady_clock::now();

    // (a) FFT convolution against the explicit matrix.
    double worst_a = 0.0;
    for (const em::Index3 dims : {em::Index3{5, 4, 3}, em::Index3{8, 8, 8}}) {
        const auto k = em::assemble_vie_kernels(dims, 0.005, kF.k0());
        const ops::DyadicToeplitz t(k);
        const CMatrix a = dense_toeplitz(k);
        for (std::uint64_t seed : {1u, 2u}) {
            const CVector x = random_vector(3 * t.n(), seed);
            worst_a = std::max(worst_a, rel(t.apply(x), a * x));
        }
    }
    c.check(worst_a <= kAc3ToeplitzTol, "(a) Toeplitz FFT vs dense matvec, worst %.2e (limit %.0e)", worst_a, kAc3ToeplitzTol);

    // (b) TT forward and transpose applies against the dense matrix.
    double worst_b = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto tt = random_tt({6, 7, 8, 40}, {4, 5, 3}, 50 + s);
        const auto dense = tt.to_dense();
        const CMatrix m = Eigen::Map<const CMatrix>(dense.data().data(), 6 * 7 * 8, 40);
        const CVector x = random_vector(40, 60 + s), y = random_vector(6 * 7 * 8, 70 + s);
        worst_b = std::max({worst_b, rel(tensor::tt_apply(tt, x), m * x), rel(tensor::tt_apply_transpose(tt, y), m.transpose() * y)});
    }
    c.check(worst_b <= kAc3TTApplyTol, "(b) TT apply and transpose vs dense, worst %.2e (limit %.0e)", worst_b, kAc3TTApplyTol);

    // (c) ACA on well-separated point clusters and on a coil-to-shield block.
    {
        const double tol = 1e-3;
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        std::vector<Vec3> r(300), s(400);
        for (auto& p : r) p = Vec3(ud(rng), ud(rng), ud(rng));
        for (auto& p : s) p = Vec3(ud(rng) + 4.0, ud(rng), ud(rng));
        const tensor::MatrixEntryFn f = [&](std::size_t i, std::size_t j) { return green((r[i] - s[j]).norm(), 2.0); };
        const auto res = tensor::aca(f, r.size(), s.size(), {tol});
        const double e = sampled_error(res.factors, f, r.size(), s.size(), 99);
        c.check(e <= kAc3AcaFactor * tol, "(c) ACA point clusters: rank %zu, sampled error %.2e (limit %.0e)", res.factors.rank(), e,
                kAc3AcaFactor * tol);

        const auto loop = scene::make_loop({Vec3(0.046, 0, 0), Vec3::UnitX(), 0.025, 0.003, 64});
        const auto shell = scene::make_shell({Vec3::Zero(), Vec3::UnitZ(), 0.25, 0.3, 8, 32});
        const tensor::MatrixEntryFn z = [&](std::size_t i, std::size_t j) { return em::surface_entry(loop.patches[i], shell.patches[j], kF); };
        const auto zr = tensor::aca(z, loop.size(), shell.size(), {tol});
        const double ez = sampled_error(zr.factors, z, loop.size(), shell.size(), 98);
        c.check(ez <= kAc3AcaFactor * tol, "(c) ACA coil-shield block: rank %zu, sampled error %.2e (limit %.0e)", zr.factors.rank(), ez,
                kAc3AcaFactor * tol);
    }

    // (d) pFFT near block against the dense near block.
    {
        em::VoxelGrid grid(em::Index3{10, 10, 10}, 0.005, Vec3::Constant(-0.025));
        scene::rasterize_sphere(grid, {Vec3::Zero(), 0.02, cplx(50, -20)});
        const auto loop = scene::make_loop({Vec3(0.04, 0, 0), Vec3::UnitX(), 0.02, 0.003, 32});
        const cplx sc = ops::system_scale(grid, kF);
        ops::PatchSet near{loop.patches, CVector::Constant(static_cast<Eigen::Index>(loop.size()), ops::mesh_alpha(loop, kF, sc))};
        const ops::ToeplitzFFTOperator body(grid, kF);
        const ops::PfftNearOperator pfft(near, body, kF);
        const ops::DenseNearOperator dense(near, body, kF);
        double worst_d = 0.0;
        for (std::uint64_t seed : {7u, 8u, 9u}) {
            const CVector x = random_vector(pfft.size(), seed);
            worst_d = std::max(worst_d, rel(pfft.apply(x), dense.apply(x)));
            // Coil-only excitation isolates the grid-mediated blocks.
            CVector xc = CVector::Zero(x.size());
            xc.head(static_cast<Eigen::Index>(near.size())) = x.head(static_cast<Eigen::Index>(near.size()));
            worst_d = std::max(worst_d, rel(pfft.apply(xc), dense.apply(xc)));
        }
        c.check(worst_d <= kAc3PfftTol, "(d) pFFT vs dense near block on 10^3 grid + 32 patches, worst %.2e (limit %.0e)", worst_d, kAc3PfftTol);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c.finish("operator equivalence suite", secs);
}

// ---------------------------------------------------------------------------

tensor::DenseTensor random_tensor(std::vector<std::size_t> dims, std::uint64_t seed) {
    tensor::DenseTensor t(std::move(dims));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = {nd(rng), nd(rng)};
    return t;
}

tensor::DenseTensor from_entries(const std::vector<std::size_t>& dims, const tensor::EntryFn& f) {
    tensor::DenseTensor t(dims);
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        std::size_t r = k;
        for (std::size_t m = 0; m < dims.size(); ++m) {
            idx[m] = r % dims[m];
            r /= dims[m];
        }
        t[k] = f(idx);
    }
    return t;
}

cplx hilbert_entry(std::span<const std::size_t> i) {
    std::size_t s = 1;
    for (auto v : i) s += v;
    return 1.0 / static_cast<double>(s);
}

// g between the centres of a 12^3 grid (5 mm) and 16 points on a ring 0.2 m away.
cplx green_entry(std::span<const std::size_t> i) {
    const Vec3 r = 0.005 * Vec3(static_cast<double>(i[0]), static_cast<double>(i[1]), static_cast<double>(i[2]));
    if (i.size() == 3) return green((r - Vec3(0.25, 0.21, 0.19)).norm(), kF.k0());
    const double ph = 2.0 * kPi * static_cast<double>(i[3]) / 16.0;
    const Vec3 s(0.03 + 0.2 * std::cos(ph), 0.03 + 0.2 * std::sin(ph), 0.1);
    return green((r - s).norm(), kF.k0());
}

cplx wave_entry(std::span<const std::size_t> i) {
    double s = 0.0;
    for (std::size_t m = 0; m < i.size(); ++m) s += static_cast<double>((m + 1) * i[m]);
    return std::exp(cplx(0.0, 0.3 * s)) + std::cos(0.1 * s);
}

double held_out_error(const tensor::TTTensor& tt, const tensor::EntryFn& f, const std::vector<std::size_t>& dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(dims.size());
    double num = 0.0, den = 0.0;
    for (int s = 0; s < 1000; ++s) {
        for (std::size_t m = 0; m < dims.size(); ++m) idx[m] = std::uniform_int_distribution<std::size_t>(0, dims[m] - 1)(rng);
        const cplx a = f(idx);
        num += std::norm(tt.element(idx) - a);
        den += std::norm(a);
    }
    return std::sqrt(num / den);
}

bool run_ac4() {
    Criterion c("AC4");
    const auto t0 = std::chrono::steady_clock::now();

    struct Case {
        std::string name;
        tensor::DenseTensor t;
        double tol;
    };
    std::vector<Case> tt_cases, tucker_cases;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const double tol = 0.1 + 0.02 * static_cast<double>(s);
        tt_cases.push_back({"random", random_tensor({4 + s % 3, 5, 3 + s % 2, 4}, 100 + s), tol});
        tucker_cases.push_back({"random", random_tensor({5, 4 + s % 3, 6}, 300 + s), tol});
    }
    tt_cases.push_back({"hilbert", from_entries({10, 10, 10, 10}, hilbert_entry), 1e-6});
    tt_cases.push_back({"green", from_entries({12, 12, 12, 16}, green_entry), 1e-5});
    tt_cases.push_back({"wave", from_entries({8, 9, 10, 11}, wave_entry), 1e-8});
    tucker_cases.push_back({"hilbert", from_entries({20, 20, 20}, hilbert_entry), 1e-6});
    tucker_cases.push_back({"green", from_entries({12, 12, 12}, green_entry), 1e-5});
    tucker_cases.push_back({"wave", from_entries({8, 9, 10}, wave_entry), 1e-8});

    auto sweep = [&](const char* what, const std::vector<Case>& cases, const std::function<tensor::DenseTensor(const Case&)>& approx) {
        std::size_t ok = 0;
        double worst = 0.0;
        for (const auto& k : cases) {
            const double ratio = tensor::distance(approx(k), k.t) / (k.tol * k.t.norm());
            worst = std::max(worst, ratio);
            if (ratio <= 1.0) ++ok;
            else c.fail(std::string(what) + " bound violated on " + k.name + " tensor");
        }
        c.check(ok == cases.size(), "%s: %zu/%zu tensors within tol*||T||_F, worst error/bound %.3f", what, ok, cases.size(), worst);
    };
    sweep("tt_svd", tt_cases, [](const Case& k) { return tensor::tt_svd(k.t, k.tol).to_dense(); });
    sweep("tucker_hosvd", tucker_cases, [](const Case& k) { return tensor::tucker_hosvd(k.t, k.tol).reconstruct(); });

    // Coupling element E_x between the voxels of a 12^3 grid and a 64-patch loop.
    const auto loop = scene::make_loop({Vec3(0.16, 0.03, 0.03), Vec3::UnitX(), 0.05, 0.003, 64});
    const tensor::EntryFn coupling = [&](std::span<const std::size_t> i) {
        const Vec3 r = 0.005 * Vec3(static_cast<double>(i[0]) + 0.5, static_cast<double>(i[1]) + 0.5, static_cast<double>(i[2]) + 0.5);
        return em::coupling_field(r, 0.005, loop.patches[i[3]], kF, em::CouplingRule::Far)(0);
    };
    struct CrossCase {
        const char* name;
        tensor::EntryFn f;
        std::vector<std::size_t> dims;
        double tol;
        std::size_t max_rank;
    };
    // Both 4D cases need ranks above the default cap of ceil(min n / 2): the
    // Hilbert tensor gets its full cap, the coupling element the solver's cap.
    for (const auto& k : {CrossCase{"Hilbert", hilbert_entry, {10, 10, 10, 10}, 1e-6, 10},
                          CrossCase{"coupling element", coupling, {12, 12, 12, 64}, 1e-3, solver::CompressionConfig{}.tt_max_rank},
                          CrossCase{"scalar Green", green_entry, {12, 12, 12, 16}, 1e-3, 0}}) {
        tensor::CrossOptions o;
        o.tol = k.tol;
        o.max_rank = k.max_rank;
        o.seed = 3;
        const auto res = tensor::tt_cross(k.f, k.dims, o);
        const double e = held_out_error(res.tt, k.f, k.dims, 12345);
        c.check(res.converged && e <= kAc4CrossFactor * k.tol,
                "tt_cross %s tol %.0e: held-out RMS %.2e (own estimate %.2e, limit %.0e), max rank %zu, %zu evaluations", k.name, k.tol, e,
                res.validation_error, kAc4CrossFactor * k.tol, res.tt.max_rank(), res.evaluations);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c.finish("decomposition accuracy suite", secs);
}

// ---------------------------------------------------------------------------

solver::Problem small_problem(double sphere_radius, bool with_shell) {
    solver::Problem p;
    p.frequency = kF;
    p.grid = em::VoxelGrid({8, 8, 8}, 0.005, Vec3::Constant(-0.0175));
    scene::rasterize_sphere(p.grid, {Vec3::Zero(), sphere_radius, cplx(50, -20)});
    auto loop = scene::make_loop({Vec3(0.028, 0, 0), Vec3::UnitX(), 0.012, 0.002, 16}, "coil");
    loop.ports.push_back({"drive", 0, 1});
    p.surfaces.push_back(loop);
    if (with_shell) {
        auto shell = scene::make_shell({Vec3::Zero(), Vec3::UnitZ(), 0.12, 0.12, 2, 12}, "shield");
        shell.domain = em::Domain::Far;
        p.surfaces.push_back(shell);
    }
    return p;
}

bool run_ac5() {
    Criterion c("AC5");
    const auto t0 = std::chrono::steady_clock::now();
    const solver::SolveConfig cfg;

    // chi = 0: no body current, and the coil solve matches Z I = v.
    {
        const auto p = small_problem(0.0, false);
        const auto r = solver::solve_hybrid(p, cfg);
        const auto& loop = p.surfaces[0];
        const CVector i = em::surface_block(loop, loop, kF).partialPivLu().solve(em::excitation_vector(loop, 0));
        const double d = solver::relative_difference(r.solution.near, i);
        c.check(r.report.converged && r.solution.body.norm() == 0.0, "zero contrast: |j_b| = %.1e", r.solution.body.norm());
        c.check(d <= 10.0 * cfg.gmres.tol, "zero contrast: coil current vs unloaded direct solve %.2e (limit %.0e)", d, 10.0 * cfg.gmres.tol);
    }

    // No far surfaces: the hybrid operator is the pFFT near operator.
    {
        em::VoxelGrid grid(em::Index3{10, 10, 10}, 0.005, Vec3::Constant(-0.025));
        scene::rasterize_sphere(grid, {Vec3::Zero(), 0.02, cplx(50, -20)});
        const auto loop = scene::make_loop({Vec3(0.04, 0, 0), Vec3::UnitX(), 0.02, 0.003, 32});
        const cplx s = ops::system_scale(grid, kF);
        ops::PatchSet near{loop.patches, CVector::Constant(static_cast<Eigen::Index>(loop.size()), ops::mesh_alpha(loop, kF, s))};
        const ops::ToeplitzFFTOperator body(grid, kF);
        ops::HybridSystem::Parts parts;
        parts.body = &body;
        parts.field_scale = cplx(0.0, -kF.omega() * kEps0);
        parts.pfft = std::make_shared<ops::PfftNearOperator>(near, body, kF);
        parts.alpha_f = CVector(0);
        const ops::HybridSystem sys(std::move(parts));
        const ops::PfftNearOperator pfft(near, body, kF);
        const CVector x = random_vector(sys.size(), 21);
        const double d = (sys.apply(x) - pfft.apply(x)).norm();
        c.check(sys.far_size() == 0 && d == 0.0, "empty far domain: |hybrid_apply - pfft_apply| = %.1e", d);
    }

    // Scaling the excitation scales every current.
    {
        auto p = small_problem(0.012, true);
        const auto a = solver::solve_hybrid(p, cfg);
        const cplx k(2.5, -1.0);
        p.excitation_scale = k;
        const auto b = solver::solve_hybrid(p, cfg);
        const double d = solver::relative_difference(b.solution.scaled, CVector(k * a.solution.scaled));
        c.check(a.report.converged && b.report.converged && d <= kAc5LinearityTol, "excitation linearity %.2e (limit %.0e)", d, kAc5LinearityTol);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c.finish("degenerate limits", secs);
}

// ---------------------------------------------------------------------------

bool monotone_within_cycles(const std::vector<double>& h, const std::vector<std::size_t>& starts) {
    for (std::size_t c = 0; c < starts.size(); ++c) {
        const std::size_t hi = c + 1 < starts.size() ? starts[c + 1] : h.size();
        for (std::size_t k = starts[c] + 1; k < hi; ++k)
            if (h[k] > h[k - 1] * (1.0 + 1e-12)) return false;
    }
    return true;
}

bool run_ac6(const DeskRun& d) {
    Criterion c("AC6");
    const auto t0 = std::chrono::steady_clock::now();
    {
        const CVector b = random_vector(64, 1);
        const auto r = solver::gmres([](const CVector& x) { return x; }, b, {});
        c.check(r.converged && r.iterations == 1, "identity: %zu iteration(s)", r.iterations);
    }
    {
        const Eigen::Index n = 150;
        std::mt19937_64 rng(11);
        std::normal_distribution<double> nd;
        CMatrix a(n, n);
        for (auto& e : a.reshaped()) e = cplx(nd(rng), nd(rng)) / std::sqrt(static_cast<double>(n));
        a.diagonal().array() += 2.0;
        solver::GmresConfig g;
        g.tol = 1e-10;
        g.restart = 6;
        const auto r = solver::gmres([&](const CVector& x) { return CVector(a * x); }, random_vector(n, 12), g);
        c.check(r.converged && r.cycles > 2 && monotone_within_cycles(r.history, r.cycle_starts), "random system, restart 6: %zu cycles, monotone",
                r.cycles);
    }
    const auto& rep = d.out.result.report;
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < rep.history.size(); k += d.config.solve.gmres.restart) starts.push_back(k);
    c.check(monotone_within_cycles(rep.history, starts), "desk: residual history monotone within each cycle");
    c.check(d.config.solve.gmres.restart == kAc6Restart && d.config.solve.gmres.tol == kAc6GmresTol, "desk: restart %zu, tol %.0e",
            d.config.solve.gmres.restart, d.config.solve.gmres.tol);
    c.check(rep.converged && rep.residual <= kAc6GmresTol, "desk: converged in %zu iterations over %zu cycle(s), true residual %.2e", rep.iterations,
            rep.cycles, rep.residual);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char s[96];
    std::snprintf(s, sizeof s, "GMRES contract, desk iterations %zu", rep.iterations);
    return c.finish(s, secs);
}

// ---------------------------------------------------------------------------

const std::vector<std::string> kReportKeys = {"converged",        "iterations",  "cycles",        "residual",      "residual_coil",
                                              "residual_body",    "wall_ms",     "cf_coupling",   "cf_kernels",    "entry_evals",
                                              "entry_evals_dense", "tt_validation_error", "aca_rank", "n_voxels",   "n_body",
                                              "m_near",           "m_far",       "absorbed_power_w", "rel_diff_ref", "ref_converged",
                                              "warnings"};

// Keys in the fixed order, every numeric value parses and the solve converged.
std::string check_report(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return "missing " + path.string();
    std::size_t k = 0;
    for (std::string line; std::getline(in, line); ++k) {
        const auto eq = line.find('=');
        if (k >= kReportKeys.size() || eq == std::string::npos || line.substr(0, eq) != kReportKeys[k]) return "unexpected line '" + line + "'";
        const std::string v = line.substr(eq + 1);
        if (kReportKeys[k] == "converged" && v != "1") return "not converged";
        if (kReportKeys[k] == "warnings" || v == "none") continue;
        char* end = nullptr;
        std::strtod(v.c_str(), &end);
        if (v.empty() || *end != '\0') return "non-numeric " + kReportKeys[k] + "=" + v;
    }
    return k == kReportKeys.size() ? "" : "truncated report";
}

bool run_ac7(const std::string& desk, const std::string& cli, const fs::path& scratch) {
    Criterion c("AC7");
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path out = scratch / "sweep";
    fs::remove_all(out);
    const std::string cmd = "\"" + cli + "\" solve \"" + desk + "\" --sweep surfaces.shield.shell.radius=0.25:0.40:" + std::to_string(kAc7Radii) +
                            " --out \"" + out.string() + "\" > \"" + (scratch / "sweep.log").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    c.check(status == 0, "CLI sweep exit status %d", status);
    std::size_t good = 0;
    for (std::size_t i = 0; i < kAc7Radii; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "sweep_%02zu", i);
        const std::string why = check_report(out / name / "report.txt");
        if (why.empty() && fs::exists(out / name / "currents.vsc")) ++good;
        else c.fail(std::string(name) + ": " + (why.empty() ? "no currents" : why));
    }
    std::ifstream summary(out / "sweep.csv");
    std::size_t rows = 0;
    for (std::string line; std::getline(summary, line);) ++rows;
    c.check(rows == kAc7Radii + 1, "sweep.csv has %zu rows for %zu radii", rows ? rows - 1 : 0, kAc7Radii);
    c.check(good == kAc7Radii, "%zu/%zu well-formed reports (radius 0.25 to 0.40 m, 1 cm steps)", good, kAc7Radii);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char s[64];
    std::snprintf(s, sizeof s, "%zu/%zu sweep reports", good, kAc7Radii);
    return c.finish(s, secs);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::fprintf(stderr, "usage: %s <desk.yaml> <vsie cli> <scratch dir>\n", argv[0]);
        return 2;
    }
    const std::string desk = argv[1];
    const std::string cli = argv[2];
    const fs::path scratch = argv[3];
    fs::create_directories(scratch);

    int failures = 0;
    DeskRun d;
    bool desk_ok = true;
    try {
        d.config = scene::load_scene(desk);
        const auto t0 = std::chrono::steady_clock::now();
        d.out = scene::run(d.config, {true, 1});
        d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (const std::exception& e) {
        std::printf("desk scene failed: %s\n", e.what());
        desk_ok = false;
    }
    auto guarded = [&](const char* id, const std::function<bool()>& f) {
        try {
            if (!f()) ++failures;
        } catch (const std::exception& e) {
            std::printf("%s FAIL exception: %s\n", id, e.what());
            ++failures;
        }
    };
    auto desk_check = [&](const char* id, const std::function<bool()>& f) {
        if (desk_ok) guarded(id, f);
        else {
            std::printf("%s FAIL desk scene did not run\n", id);
            ++failures;
        }
    };
    desk_check("AC1", [&] { return run_ac1(d); });
    desk_check("AC2", [&] { return run_ac2(d); });
    guarded("AC3", run_ac3);
    guarded("AC4", run_ac4);
    guarded("AC5", run_ac5);
    desk_check("AC6", [&] { return run_ac6(d); });
    guarded("AC7", [&] { return run_ac7(desk, cli, scratch); });
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
