// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <omp.h>

#include "vsie/scene.hpp"

namespace vsie::scene {

namespace {

constexpr char kMagic[8] = {'V', 'S', 'I', 'E', 'C', 'U', 'R', 'R'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kByteOrderMark = 0x01020304u;

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
}

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot write '" + path + "'");
    }
    template <class T>
    void put(T v) {
        v = to_little(v);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_text(const std::string& s) {
        put(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
    void close() {
        out_.close();
        if (!out_) throw IoError("failed writing '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream out_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot read '" + path + "'");
    }
    template <class T>
    T get() {
        T v{};
        raw(reinterpret_cast<char*>(&v), sizeof(T));
        return to_little(v);
    }
    std::string get_text() {
        const auto n = get<std::uint32_t>();
        if (n > (1u << 20)) fail("implausible string length");
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    void raw(char* p, std::size_t n) {
        in_.read(p, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
    }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
    [[noreturn]] void fail(const std::string& msg) const { throw IoError("currents file '" + path_ + "': " + msg); }

private:
    std::string path_;
    std::ifstream in_;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Patch ranges of each surface inside the far / near blocks.
std::string surface_layout(const SceneConfig& cfg, em::Domain d) {
    std::ostringstream os;
    os << "patch current (A) along t; surfaces in scene order:";
    std::size_t offset = 0;
    for (const auto& s : cfg.surfaces) {
        if (s.domain != d) continue;
        const std::size_t n = s.kind == SurfaceSpec::Kind::Loop ? s.loop.patches : s.shell.axial * s.shell.azimuthal;
        os << ' ' << s.name << '[' << offset << ':' << offset + n << ']';
        offset += n;
    }
    return os.str();
}

}  // namespace

void write_currents(const std::string& path, const CurrentsFile& file) {
    Writer w(path);
    w.raw(kMagic, sizeof kMagic);
    w.put(kVersion);
    w.put(kByteOrderMark);
    w.put(static_cast<std::uint32_t>(file.double_precision ? 16 : 8));
    w.put(static_cast<std::uint32_t>(file.blocks.size()));
    for (const auto& b : file.blocks) {
        std::uint64_t n = 1;
        for (auto d : b.dims) n *= d;
        if (n != static_cast<std::uint64_t>(b.data.size())) throw ArgumentError("currents block '" + b.name + "': dims do not match the data");
        w.put_text(b.name);
        w.put_text(b.layout);
        w.put(static_cast<std::uint32_t>(b.dims.size()));
        for (auto d : b.dims) w.put(d);
        w.put(n);
        for (const cplx& z : b.data) {
            if (file.double_precision) {
                w.put(z.real());
                w.put(z.imag());
            } else {
                w.put(static_cast<float>(z.real()));
                w.put(static_cast<float>(z.imag()));
            }
        }
    }
    w.close();
}

CurrentsFile read_currents(const std::string& path) {
    ByteReader r(path);
    char magic[8];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) r.fail("not a currents file");
    if (r.get<std::uint32_t>() != kVersion) r.fail("unsupported version");
    if (r.get<std::uint32_t>() != kByteOrderMark) r.fail("byte-order mark mismatch");
    const auto scalar = r.get<std::uint32_t>();
    if (scalar != 8 && scalar != 16) r.fail("unknown scalar type");
    CurrentsFile f;
    f.double_precision = scalar == 16;
    const auto nblocks = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < nblocks; ++k) {
        CurrentBlock b;
        b.name = r.get_text();
        b.layout = r.get_text();
        const auto nd = r.get<std::uint32_t>();
        if (nd > 8) r.fail("too many dimensions");
        std::uint64_t prod = 1;
        for (std::uint32_t i = 0; i < nd; ++i) {
            b.dims.push_back(r.get<std::uint64_t>());
            prod *= b.dims.back();
        }
        const auto n = r.get<std::uint64_t>();
        if (n != prod) r.fail("block '" + b.name + "' size does not match its dims");
        if (n > (1ull << 32)) r.fail("implausible block size");
        b.data.resize(static_cast<Eigen::Index>(n));
        for (auto& z : b.data) {
            if (f.double_precision) {
                const double re = r.get<double>();
                const double im = r.get<double>();
                z = cplx(re, im);
            } else {
                const float re = r.get<float>();
                const float im = r.get<float>();
                z = cplx(re, im);
            }
        }
        f.blocks.push_back(std::move(b));
    }
    if (!r.at_end()) r.fail("trailing bytes");
    return f;
}

void write_currents_csv(const std::string& path, const CurrentsFile& file) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "block,index,re,im\n";
    for (const auto& b : file.blocks)
        for (Eigen::Index i = 0; i < b.data.size(); ++i) {
            // Values as stored in the binary file.
            const double re = file.double_precision ? b.data(i).real() : static_cast<float>(b.data(i).real());
            const double im = file.double_precision ? b.data(i).imag() : static_cast<float>(b.data(i).imag());
            out << b.name << ',' << i << ',' << num(re) << ',' << num(im) << '\n';
        }
    if (!out) throw IoError("failed writing '" + path + "'");
}

bool RunOutput::converged() const { return result.report.converged && (!reference || reference->report.converged); }

RunOutput run(const SceneConfig& cfg, const RunOptions& opts) {
    if (opts.workers < 1) throw ArgumentError("workers must be at least 1");
    omp_set_num_threads(static_cast<int>(opts.workers));
    RunOutput out;
    out.config = cfg;
    const solver::Problem problem = build_problem(cfg);
    out.result = solver::solve_hybrid(problem, cfg.solve);
    if (opts.reference) {
        out.reference = solver::solve_dense(problem, cfg.solve);
        out.result.report.rel_diff_ref = solver::relative_difference(out.result.solution.scaled, out.reference->solution.scaled);
    }
    const auto& sol = out.result.solution;
    const auto& d = problem.grid.dims();
    out.currents.double_precision = cfg.double_precision;
    out.currents.blocks = {
        {"far", surface_layout(cfg, em::Domain::Far), {static_cast<std::uint64_t>(sol.far.size())}, sol.far},
        {"near", surface_layout(cfg, em::Domain::Near), {static_cast<std::uint64_t>(sol.near.size())}, sol.near},
        {"body", "volume current density (A/m^2), component-major [x|y|z], voxel index i fastest then j, k", {3, d[0], d[1], d[2]}, sol.body},
    };
    return out;
}

std::string format_report(const RunOutput& out) {
    const auto& r = out.result.report;
    std::ostringstream os;
    auto kv = [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
    kv("converged", r.converged ? "1" : "0");
    kv("iterations", std::to_string(r.iterations));
    kv("cycles", std::to_string(r.cycles));
    kv("residual", num(r.residual));
    kv("residual_coil", num(r.residual_coil));
    kv("residual_body", num(r.residual_body));
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    kv("wall_ms", wall);
    kv("cf_coupling", num(r.cf_coupling.value()));
    kv("cf_kernels", num(r.cf_kernels.value()));
    kv("entry_evals", std::to_string(r.entry_evals));
    kv("entry_evals_dense", std::to_string(3ull * r.n_voxels * r.m_far));
    kv("tt_validation_error", num(r.tt_validation_error));
    kv("aca_rank", std::to_string(r.aca_rank));
    kv("n_voxels", std::to_string(r.n_voxels));
    kv("n_body", std::to_string(r.n_body));
    kv("m_near", std::to_string(r.m_near));
    kv("m_far", std::to_string(r.m_far));
    kv("absorbed_power_w", num(r.absorbed_power_w));
    kv("rel_diff_ref", r.rel_diff_ref ? num(*r.rel_diff_ref) : "none");
    kv("ref_converged", out.reference ? (out.reference->report.converged ? "1" : "0") : "none");
    kv("warnings", std::to_string(out.config.warnings.size()));
    return os.str();
}

void write_outputs(const RunOutput& out, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    const std::filesystem::path base(dir);
    write_currents((base / "currents.vsc").string(), out.currents);
    write_currents_csv((base / "currents.csv").string(), out.currents);
    auto text = [&](const char* name, const std::string& body) {
        std::ofstream f(base / name);
        f << body;
        if (!f) throw IoError("failed writing '" + (base / name).string() + "'");
    };
    text("report.txt", format_report(out));
    text("scene.yaml", echo_scene(out.config));
}

}  // namespace vsie::scene
