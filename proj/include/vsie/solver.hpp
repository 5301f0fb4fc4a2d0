// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vsie/ops.hpp"

namespace vsie::solver {

struct GmresConfig {
    double tol = 1e-5;
    std::size_t restart = 50;
    std::size_t max_cycles = 40;
};

using LinearOperator = std::function<CVector(const CVector&)>;

struct GmresResult {
    CVector x;
    bool converged = false;
    bool stagnated = false;
    std::size_t iterations = 0;
    std::size_t cycles = 0;
    /// True relative residual ||b - A x|| / ||b|| of the returned iterate.
    double residual = 0.0;
    /// Estimated relative residual after every inner iteration.
    std::vector<double> history;
    /// Index into `history` where each cycle starts.
    std::vector<std::size_t> cycle_starts;
};

/// Restarted GMRES with modified Gram-Schmidt Arnoldi and Givens rotations.
/// A cycle that reduces the residual by less than a relative 1e-14 ends the
/// solve as stagnated.
GmresResult gmres(const LinearOperator& a, const CVector& b, const GmresConfig& cfg, const CVector* x0 = nullptr);

/// ||a - b|| / ||b||.
double relative_difference(const CVector& a, const CVector& b);

// ---------------------------------------------------------------------------

/// A voxelized body plus conducting surfaces with their near/far tags and ports.
struct Problem {
    em::Frequency frequency{1.0};
    em::VoxelGrid grid;
    std::vector<em::SurfaceMesh> surfaces;
    /// Multiplies every port voltage.
    cplx excitation_scale{1.0, 0.0};
};

struct CompressionConfig {
    double tt_tol = 1e-3;
    double aca_tol = 1e-3;
    /// 0 disables Tucker compression of the body kernels.
    double tucker_tol = 1e-5;
    std::size_t tt_max_rank = 64;
    std::size_t tt_max_sweeps = 8;
    std::uint64_t seed = 1;
};

struct SolveConfig {
    GmresConfig gmres;
    CompressionConfig compression;
    ops::PfftOptions pfft;
    /// Dense reference: also factorize directly when the system is small enough.
    bool direct = true;
    std::size_t direct_limit = 6000;
    std::size_t dense_limit = 20000;
};

/// Physical unknowns: coil currents (A) per patch, and the equivalent volume
/// current density j = i omega eps0 chi E (A/m^2), component-major.
struct Solution {
    CVector far;
    CVector near;
    CVector body;
    /// The scaled unknowns the solver iterated on, (far | near | body).
    CVector scaled;
};

struct SolveReport {
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t cycles = 0;
    double residual = 0.0;
    double residual_coil = 0.0;
    double residual_body = 0.0;
    double wall_ms = 0.0;
    tensor::Ratio cf_coupling{0, 1};
    tensor::Ratio cf_kernels{1, 1};
    std::size_t entry_evals = 0;
    double tt_validation_error = 0.0;
    std::size_t aca_rank = 0;
    std::size_t n_voxels = 0;
    std::size_t n_body = 0;
    std::size_t m_near = 0;
    std::size_t m_far = 0;
    double absorbed_power_w = 0.0;
    /// ||A - A^T|| check on random probes (dense reference only).
    std::optional<double> symmetry_error;
    /// Direct factorization vs GMRES (dense reference only).
    std::optional<double> direct_vs_gmres;
    std::optional<double> rel_diff_ref;
    std::vector<double> history;
};

struct SolveResult {
    Solution solution;
    SolveReport report;
};

/// Surfaces split by domain, with per-mesh scale factors applied to every patch.
struct Partition {
    ops::PatchSet far;
    ops::PatchSet near;
    CVector v_far;
    CVector v_near;
};
Partition partition(const Problem& problem, cplx s);

/// Compressed hybrid solve of the 3x3 block system.
SolveResult solve_hybrid(const Problem& problem, const SolveConfig& cfg);

/// Fully dense reference: every coil pair and coupling entry assembled
/// explicitly with the accurate rules; the body block is applied by FFT
/// (or assembled when factorizing directly).
SolveResult solve_dense(const Problem& problem, const SolveConfig& cfg);

/// Time-averaged power dissipated in the body, 0.5 sum dV omega eps0 (-Im eps_r) |E|^2.
double absorbed_power(const em::VoxelGrid& grid, const em::Frequency& f, const CVector& j);

}  // namespace vsie::solver
