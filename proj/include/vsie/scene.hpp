// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsie/geometry.hpp"
#include "vsie/solver.hpp"

namespace vsie::scene {

enum class DomainTag { Near, Far, Auto };

struct SurfaceSpec {
    enum class Kind { Loop, Shell };
    std::string name;
    Kind kind = Kind::Loop;
    LoopSpec loop;
    ShellSpec shell;
    DomainTag tag = DomainTag::Auto;
    /// Resolved domain after auto-tagging.
    em::Domain domain = em::Domain::Near;
    /// Minimum distance from the surface to the body bounding box (m).
    double body_distance = 0.0;
};

struct PortSpec {
    std::string name;
    std::string surface;
    std::size_t patch = 0;
    int polarity = 1;
};

struct BodySpec {
    enum class Kind { None, Sphere, File };
    Kind kind = Kind::None;
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
    double eps_real = 1.0;
    /// Conductivity (S/m); eps_r = eps_real - i sigma / (omega eps0).
    double sigma = 0.0;
    /// Absolute path of a permittivity file (Kind::File).
    std::string file;
};

struct SceneConfig {
    double frequency = 0.0;
    em::Index3 dims{0, 0, 0};
    double spacing = 0.0;
    Vec3 origin = Vec3::Zero();
    BodySpec body;
    std::vector<SurfaceSpec> surfaces;
    std::vector<PortSpec> ports;
    solver::SolveConfig solve;
    /// Auto-tag threshold as a fraction of the largest body extent.
    double far_threshold = 0.3;
    std::string output_dir = "out";
    /// Currents payload: complex64 unless double precision is requested.
    bool double_precision = false;
    std::vector<std::string> warnings;
};

/// Replaces one value of the document before validation. The path is
/// dot-separated; sequence items are addressed by their `name` or index,
/// e.g. "surfaces.shield.shell.radius". Values starting with '[' or '{'
/// are read as YAML flow collections.
struct Override {
    std::string path;
    std::string value;
};

/// Parses and validates a YAML scene. Lengths are metres, frequency Hz and
/// conductivity S/m; a quantity may also be written as "<value> <unit>"
/// (Hz, kHz, MHz, GHz; m, cm, mm, um; S/m). Relative file paths resolve
/// against `base_dir`. Throws ParseError with key and line context.
SceneConfig parse_scene(const std::string& text, const std::string& base_dir = ".", const std::vector<Override>& overrides = {});
SceneConfig load_scene(const std::string& path, const std::vector<Override>& overrides = {});

/// Voxel grid with the body rasterized onto it.
em::VoxelGrid build_grid(const SceneConfig& cfg);
em::SurfaceMesh build_surface(const SurfaceSpec& spec);

/// Minimum distance between a mesh and an axis-aligned box, sampled at the
/// corners, edge midpoints and centre of every patch (0 when inside).
double distance_to_box(const em::SurfaceMesh& mesh, const Vec3& lo, const Vec3& hi);

/// Near iff the distance to the body box is below fraction * max extent.
em::Domain auto_tag(double distance, const Vec3& lo, const Vec3& hi, double fraction);

/// Grid, meshes with resolved domains and ports, and excitation.
solver::Problem build_problem(const SceneConfig& cfg);

/// Resolved configuration as YAML, including domains and warnings.
std::string echo_scene(const SceneConfig& cfg);

// ---------------------------------------------------------------------------
// Results

struct CurrentBlock {
    std::string name;
    std::string layout;
    std::vector<std::uint64_t> dims;
    CVector data;
};

struct CurrentsFile {
    bool double_precision = false;
    std::vector<CurrentBlock> blocks;
};

/// Little-endian container: magic, version, endianness tag, scalar type,
/// then per block its name, layout text, dims and payload.
void write_currents(const std::string& path, const CurrentsFile& file);
CurrentsFile read_currents(const std::string& path);
/// One row per entry: block,index,re,im.
void write_currents_csv(const std::string& path, const CurrentsFile& file);

struct RunOptions {
    bool reference = false;
    std::size_t workers = 1;
};

struct RunOutput {
    SceneConfig config;
    solver::SolveResult result;
    std::optional<solver::SolveResult> reference;
    CurrentsFile currents;
    bool converged() const;
};

RunOutput run(const SceneConfig& cfg, const RunOptions& opts = {});

/// Fixed keys, one key=value per line.
std::string format_report(const RunOutput& out);

/// Writes currents.vsc, currents.csv, report.txt and scene.yaml into `dir`.
void write_outputs(const RunOutput& out, const std::string& dir);

}  // namespace vsie::scene
