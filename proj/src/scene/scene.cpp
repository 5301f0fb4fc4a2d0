// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "vsie/scene.hpp"

namespace vsie::scene {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

enum class Dim { None, Length, Frequency, Conductivity };

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::Length: return "length";
        case Dim::Frequency: return "frequency";
        case Dim::Conductivity: return "conductivity";
        case Dim::None: break;
    }
    return "dimensionless";
}

std::optional<double> unit_factor(const std::string& unit, Dim d) {
    static const std::map<std::string, std::pair<Dim, double>> units = {
        {"Hz", {Dim::Frequency, 1.0}},  {"kHz", {Dim::Frequency, 1e3}}, {"MHz", {Dim::Frequency, 1e6}},
        {"GHz", {Dim::Frequency, 1e9}}, {"m", {Dim::Length, 1.0}},      {"cm", {Dim::Length, 1e-2}},
        {"mm", {Dim::Length, 1e-3}},    {"um", {Dim::Length, 1e-6}},    {"S/m", {Dim::Conductivity, 1.0}},
    };
    const auto it = units.find(unit);
    if (it == units.end() || it->second.first != d) return std::nullopt;
    return it->second.second;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

// Walks a document and reports errors against dotted key paths.
class Reader {
public:
    [[noreturn]] static void fail(const std::string& msg, const std::string& key, const YAML::Node& n) {
        throw ParseError(msg, key, line_of(n));
    }

    static void check_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> allowed) {
        if (!map.IsMap()) fail("expected a mapping", where, map);
        for (const auto& kv : map) {
            const std::string k = kv.first.as<std::string>();
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) fail("unknown key", join(where, k), kv.first);
        }
    }

    static std::string join(const std::string& where, const std::string& k) { return where.empty() ? k : where + "." + k; }

    static YAML::Node required(const YAML::Node& map, const std::string& where, const char* key) {
        const YAML::Node n = map[key];
        if (!n) fail("missing required key", join(where, key), map);
        return n;
    }

    static double quantity(const YAML::Node& n, const std::string& key, Dim d) {
        if (!n.IsScalar()) fail("expected a number", key, n);
        const std::string s = n.Scalar();
        double v = 0.0;
        if (parse_double(s, v)) return v;
        const auto sp = s.find_first_of(" \t");
        if (sp != std::string::npos && parse_double(s.substr(0, sp), v)) {
            const std::string unit = s.substr(s.find_first_not_of(" \t", sp));
            if (d == Dim::None) fail("unit '" + unit + "' given for a dimensionless value", key, n);
            const auto f = unit_factor(unit, d);
            if (!f) fail("unit '" + unit + "' is not a " + std::string(dim_name(d)) + " unit", key, n);
            return v * *f;
        }
        fail("expected a number, got '" + s + "'", key, n);
    }

    static double positive(const YAML::Node& n, const std::string& key, Dim d) {
        const double v = quantity(n, key, d);
        if (!(v > 0.0)) fail("value must be positive", key, n);
        return v;
    }

    static std::size_t count(const YAML::Node& n, const std::string& key, std::size_t min) {
        if (!n.IsScalar()) fail("expected an integer", key, n);
        const std::string s = n.Scalar();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) fail("expected a non-negative integer, got '" + s + "'", key, n);
        const unsigned long long v = std::stoull(s);
        if (v < min) fail("value must be at least " + std::to_string(min), key, n);
        return static_cast<std::size_t>(v);
    }

    static std::string text(const YAML::Node& n, const std::string& key) {
        if (!n.IsScalar() || n.Scalar().empty()) fail("expected a non-empty string", key, n);
        return n.Scalar();
    }

    static Vec3 vec3(const YAML::Node& n, const std::string& key, Dim d) {
        if (!n.IsSequence() || n.size() != 3) fail("expected a list of 3 numbers", key, n);
        Vec3 v;
        for (std::size_t i = 0; i < 3; ++i) v(static_cast<Eigen::Index>(i)) = quantity(n[i], key + "[" + std::to_string(i) + "]", d);
        return v;
    }

    static Vec3 direction(const YAML::Node& n, const std::string& key) {
        const Vec3 v = vec3(n, key, Dim::None);
        if (!(v.norm() > 0.0)) fail("direction must be nonzero", key, n);
        return v.normalized();
    }
};

using R = Reader;

YAML::Node navigate(YAML::Node root, const Override& ov) {
    std::vector<std::string> parts;
    std::stringstream ss(ov.path);
    for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
    if (parts.empty() || ov.path.empty()) throw ParseError("empty override path", ov.path, 0);
    YAML::Node cur = root;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        const bool last = i + 1 == parts.size();
        if (cur.IsSequence()) {
            YAML::Node found;
            bool hit = false;
            for (std::size_t k = 0; k < cur.size() && !hit; ++k)
                if (cur[k].IsMap() && cur[k]["name"] && cur[k]["name"].Scalar() == p) {
                    found.reset(cur[k]);
                    hit = true;
                }
            if (!hit && !p.empty() && p.find_first_not_of("0123456789") == std::string::npos && std::stoull(p) < cur.size()) {
                found.reset(cur[std::stoull(p)]);
                hit = true;
            }
            if (!hit) throw ParseError("override names no item '" + p + "'", ov.path, 0);
            if (last) throw ParseError("override must name a value, not a list item", ov.path, 0);
            cur.reset(found);
        } else if (cur.IsMap() || cur.IsNull()) {
            if (last) return cur;
            YAML::Node next = cur[p];
            if (!next) {
                cur[p] = YAML::Node(YAML::NodeType::Map);
                next.reset(cur[p]);
            }
            cur.reset(next);
        } else {
            throw ParseError("override path runs through a value", ov.path, 0);
        }
    }
    return cur;
}

void apply_override(YAML::Node root, const Override& ov) {
    YAML::Node parent = navigate(root, ov);
    const std::string key = ov.path.substr(ov.path.rfind('.') == std::string::npos ? 0 : ov.path.rfind('.') + 1);
    // Flow lists and maps ("[0.1, 0, 0]") are read as YAML; anything else stays a scalar.
    const auto first = ov.value.find_first_not_of(" \t");
    if (first != std::string::npos && (ov.value[first] == '[' || ov.value[first] == '{')) {
        try {
            parent[key] = YAML::Load(ov.value);
        } catch (const YAML::Exception& e) {
            throw ParseError("override value is not valid YAML: " + e.msg, ov.path, 0);
        }
    } else {
        parent[key] = ov.value;
    }
}

BodySpec parse_body(const YAML::Node& n, const std::string& base_dir) {
    BodySpec b;
    if (!n || n.IsNull()) return b;
    R::check_keys(n, "body", {"sphere", "permittivity_file"});
    if (n["sphere"] && n["permittivity_file"]) R::fail("give either a sphere or a permittivity file", "body", n);
    if (const auto s = n["sphere"]) {
        R::check_keys(s, "body.sphere", {"center", "radius", "eps_real", "sigma", "eps_imag"});
        b.kind = BodySpec::Kind::Sphere;
        b.center = s["center"] ? R::vec3(s["center"], "body.sphere.center", Dim::Length) : Vec3::Zero();
        b.radius = R::quantity(R::required(s, "body.sphere", "radius"), "body.sphere.radius", Dim::Length);
        if (b.radius < 0.0) R::fail("radius must be non-negative", "body.sphere.radius", s["radius"]);
        b.eps_real = R::quantity(R::required(s, "body.sphere", "eps_real"), "body.sphere.eps_real", Dim::None);
        if (!(b.eps_real >= 1.0)) R::fail("eps_real must be at least 1", "body.sphere.eps_real", s["eps_real"]);
        if (s["sigma"] && s["eps_imag"]) R::fail("give either sigma or eps_imag", "body.sphere", s);
        if (s["sigma"]) {
            b.sigma = R::quantity(s["sigma"], "body.sphere.sigma", Dim::Conductivity);
            if (b.sigma < 0.0) R::fail("conductivity must be non-negative", "body.sphere.sigma", s["sigma"]);
        }
        if (s["eps_imag"]) {
            // Stored as the equivalent conductivity once the frequency is known.
            const double ei = R::quantity(s["eps_imag"], "body.sphere.eps_imag", Dim::None);
            if (ei > 0.0) R::fail("eps_imag must be <= 0 for a passive body", "body.sphere.eps_imag", s["eps_imag"]);
            b.sigma = -ei;  // rescaled by omega eps0 in parse_scene
        }
    } else if (const auto f = n["permittivity_file"]) {
        b.kind = BodySpec::Kind::File;
        const std::filesystem::path p(R::text(f, "body.permittivity_file"));
        b.file = (p.is_absolute() ? p : std::filesystem::path(base_dir) / p).lexically_normal().string();
        if (!std::filesystem::exists(b.file)) R::fail("permittivity file not found: " + b.file, "body.permittivity_file", f);
    }
    return b;
}

SurfaceSpec parse_surface(const YAML::Node& n, std::size_t index) {
    const std::string where = "surfaces[" + std::to_string(index) + "]";
    R::check_keys(n, where, {"name", "loop", "shell", "domain"});
    SurfaceSpec s;
    s.name = R::text(R::required(n, where, "name"), where + ".name");
    const std::string at = "surfaces." + s.name;
    if (n["loop"] && n["shell"]) R::fail("a surface is either a loop or a shell", at, n);
    if (const auto l = n["loop"]) {
        const std::string w = at + ".loop";
        R::check_keys(l, w, {"center", "normal", "radius", "width", "patches"});
        s.kind = SurfaceSpec::Kind::Loop;
        s.loop.center = R::vec3(R::required(l, w, "center"), w + ".center", Dim::Length);
        s.loop.normal = R::direction(R::required(l, w, "normal"), w + ".normal");
        s.loop.radius = R::positive(R::required(l, w, "radius"), w + ".radius", Dim::Length);
        s.loop.width = R::positive(R::required(l, w, "width"), w + ".width", Dim::Length);
        s.loop.patches = R::count(R::required(l, w, "patches"), w + ".patches", 3);
    } else if (const auto c = n["shell"]) {
        const std::string w = at + ".shell";
        R::check_keys(c, w, {"center", "axis", "radius", "length", "axial", "azimuthal"});
        s.kind = SurfaceSpec::Kind::Shell;
        s.shell.center = c["center"] ? R::vec3(c["center"], w + ".center", Dim::Length) : Vec3::Zero();
        s.shell.axis = c["axis"] ? R::direction(c["axis"], w + ".axis") : Vec3::UnitZ();
        s.shell.radius = R::positive(R::required(c, w, "radius"), w + ".radius", Dim::Length);
        s.shell.length = R::positive(R::required(c, w, "length"), w + ".length", Dim::Length);
        s.shell.axial = R::count(R::required(c, w, "axial"), w + ".axial", 1);
        s.shell.azimuthal = R::count(R::required(c, w, "azimuthal"), w + ".azimuthal", 3);
    } else {
        R::fail("surface needs a loop or a shell", at, n);
    }
    if (const auto d = n["domain"]) {
        const std::string v = R::text(d, at + ".domain");
        if (v == "near")
            s.tag = DomainTag::Near;
        else if (v == "far")
            s.tag = DomainTag::Far;
        else if (v == "auto")
            s.tag = DomainTag::Auto;
        else
            R::fail("domain must be near, far or auto", at + ".domain", d);
    }
    return s;
}

void parse_settings(const YAML::Node& root, SceneConfig& c) {
    auto& g = c.solve.gmres;
    auto& k = c.solve.compression;
    if (const auto s = root["solver"]) {
        R::check_keys(s, "solver", {"tol_gmres", "restart", "max_cycles", "dense_limit"});
        if (s["tol_gmres"]) g.tol = R::positive(s["tol_gmres"], "solver.tol_gmres", Dim::None);
        if (s["restart"]) g.restart = R::count(s["restart"], "solver.restart", 1);
        if (s["max_cycles"]) g.max_cycles = R::count(s["max_cycles"], "solver.max_cycles", 1);
        if (s["dense_limit"]) c.solve.dense_limit = R::count(s["dense_limit"], "solver.dense_limit", 1);
    }
    if (const auto s = root["compression"]) {
        R::check_keys(s, "compression", {"tol_tt", "tol_aca", "tol_tucker", "tt_max_rank", "tt_max_sweeps", "seed"});
        if (s["tol_tt"]) k.tt_tol = R::positive(s["tol_tt"], "compression.tol_tt", Dim::None);
        if (s["tol_aca"]) k.aca_tol = R::positive(s["tol_aca"], "compression.tol_aca", Dim::None);
        if (s["tol_tucker"]) {
            k.tucker_tol = R::quantity(s["tol_tucker"], "compression.tol_tucker", Dim::None);
            if (k.tucker_tol < 0.0) R::fail("value must be non-negative (0 disables Tucker)", "compression.tol_tucker", s["tol_tucker"]);
        }
        if (s["tt_max_rank"]) k.tt_max_rank = R::count(s["tt_max_rank"], "compression.tt_max_rank", 1);
        if (s["tt_max_sweeps"]) k.tt_max_sweeps = R::count(s["tt_max_sweeps"], "compression.tt_max_sweeps", 1);
        if (s["seed"]) k.seed = R::count(s["seed"], "compression.seed", 0);
    }
    if (const auto s = root["pfft"]) {
        R::check_keys(s, "pfft", {"precorrection_gap", "max_extension"});
        if (s["precorrection_gap"]) c.solve.pfft.precorrection_gap = R::count(s["precorrection_gap"], "pfft.precorrection_gap", 0);
        if (s["max_extension"]) {
            c.solve.pfft.max_extension = R::quantity(s["max_extension"], "pfft.max_extension", Dim::None);
            if (!(c.solve.pfft.max_extension >= 1.0)) R::fail("value must be at least 1", "pfft.max_extension", s["max_extension"]);
        }
    }
    if (const auto s = root["output"]) {
        R::check_keys(s, "output", {"dir", "precision"});
        if (s["dir"]) c.output_dir = R::text(s["dir"], "output.dir");
        if (s["precision"]) {
            const std::string p = R::text(s["precision"], "output.precision");
            if (p != "single" && p != "double") R::fail("precision must be single or double", "output.precision", s["precision"]);
            c.double_precision = p == "double";
        }
    }
    if (const auto t = root["far_threshold"]) c.far_threshold = R::positive(t, "far_threshold", Dim::None);
}

// Shortest text that reads back to the same double.
std::string d(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

SceneConfig parse_scene(const std::string& text, const std::string& base_dir, const std::vector<Override>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError("malformed document: " + e.msg, "", e.mark.line + 1);
    }
    if (!root.IsMap()) throw ParseError("scene must be a mapping", "", line_of(root));
    for (const auto& ov : overrides) apply_override(root, ov);

    R::check_keys(root, "", {"frequency", "grid", "body", "surfaces", "ports", "solver", "compression", "pfft", "far_threshold", "output"});
    SceneConfig c;
    c.frequency = R::positive(R::required(root, "", "frequency"), "frequency", Dim::Frequency);

    const auto grid = R::required(root, "", "grid");
    R::check_keys(grid, "grid", {"dims", "spacing", "origin"});
    const auto dims = R::required(grid, "grid", "dims");
    if (!dims.IsSequence() || dims.size() != 3) R::fail("expected a list of 3 integers", "grid.dims", dims);
    for (std::size_t i = 0; i < 3; ++i) c.dims[i] = R::count(dims[i], "grid.dims", 1);
    c.spacing = R::positive(R::required(grid, "grid", "spacing"), "grid.spacing", Dim::Length);
    c.origin = grid["origin"] ? R::vec3(grid["origin"], "grid.origin", Dim::Length) : Vec3::Zero();

    c.body = parse_body(root["body"], base_dir);
    if (c.body.kind == BodySpec::Kind::Sphere && root["body"]["sphere"]["eps_imag"])
        c.body.sigma *= 2.0 * kPi * c.frequency * kEps0;

    const auto surfaces = R::required(root, "", "surfaces");
    if (!surfaces.IsSequence() || surfaces.size() == 0) R::fail("expected a non-empty list of surfaces", "surfaces", surfaces);
    std::set<std::string> names;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        c.surfaces.push_back(parse_surface(surfaces[i], i));
        if (!names.insert(c.surfaces.back().name).second) R::fail("duplicate surface '" + c.surfaces.back().name + "'", "surfaces", surfaces[i]);
    }

    const auto ports = R::required(root, "", "ports");
    if (!ports.IsSequence() || ports.size() == 0) R::fail("expected a non-empty list of ports", "ports", ports);
    std::set<std::string> port_names;
    for (std::size_t i = 0; i < ports.size(); ++i) {
        const auto& n = ports[i];
        const std::string where = "ports[" + std::to_string(i) + "]";
        R::check_keys(n, where, {"name", "surface", "patch", "polarity"});
        PortSpec p;
        p.name = R::text(R::required(n, where, "name"), where + ".name");
        if (!port_names.insert(p.name).second) R::fail("duplicate port '" + p.name + "'", "ports." + p.name, n);
        const std::string at = "ports." + p.name;
        p.surface = R::text(R::required(n, where, "surface"), at + ".surface");
        const auto s = std::find_if(c.surfaces.begin(), c.surfaces.end(), [&](const SurfaceSpec& x) { return x.name == p.surface; });
        if (s == c.surfaces.end()) R::fail("port refers to unknown surface '" + p.surface + "'", at + ".surface", n["surface"]);
        const std::size_t np = s->kind == SurfaceSpec::Kind::Loop ? s->loop.patches : s->shell.axial * s->shell.azimuthal;
        p.patch = R::count(R::required(n, where, "patch"), at + ".patch", 0);
        if (p.patch >= np) R::fail("patch index out of range (surface has " + std::to_string(np) + " patches)", at + ".patch", n["patch"]);
        if (const auto pol = n["polarity"]) {
            const std::string v = R::text(pol, at + ".polarity");
            if (v == "1" || v == "+1")
                p.polarity = 1;
            else if (v == "-1")
                p.polarity = -1;
            else
                R::fail("polarity must be +1 or -1", at + ".polarity", pol);
        }
        c.ports.push_back(p);
    }
    parse_settings(root, c);

    // Resolve domains against the body box.
    const em::VoxelGrid g = build_grid(c);
    const auto [lo, hi] = g.body_bounds();
    const double limit = c.far_threshold * (hi - lo).maxCoeff();
    for (auto& s : c.surfaces) {
        const em::SurfaceMesh mesh = build_surface(s);
        s.body_distance = distance_to_box(mesh, lo, hi);
        const em::Domain rule = auto_tag(s.body_distance, lo, hi, c.far_threshold);
        if (s.tag == DomainTag::Auto) {
            s.domain = rule;
        } else {
            s.domain = s.tag == DomainTag::Near ? em::Domain::Near : em::Domain::Far;
            if (s.tag == DomainTag::Far && rule == em::Domain::Near)
                c.warnings.push_back("surface '" + s.name + "' is tagged far but lies " + fmt(s.body_distance) +
                                     " m from the body box, inside the near threshold of " + fmt(limit) + " m");
        }
        if (s.domain == em::Domain::Near) {
            try {
                ops::check_pfft_margin(mesh.patches, g, c.solve.pfft);
            } catch (const GeometryError& e) {
                throw ParseError("near surface violates the pFFT grid margin: " + std::string(e.what()), "surfaces." + s.name, 0);
            }
        }
    }
    return c;
}

SceneConfig load_scene(const std::string& path, const std::vector<Override>& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scene file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::absolute(path).parent_path().string();
    return parse_scene(ss.str(), dir, overrides);
}

em::VoxelGrid build_grid(const SceneConfig& cfg) {
    em::VoxelGrid g(cfg.dims, cfg.spacing, cfg.origin);
    const double we0 = 2.0 * kPi * cfg.frequency * kEps0;
    switch (cfg.body.kind) {
        case BodySpec::Kind::None: break;
        case BodySpec::Kind::Sphere:
            rasterize_sphere(g, {cfg.body.center, cfg.body.radius, cplx(cfg.body.eps_real, -cfg.body.sigma / we0)});
            break;
        case BodySpec::Kind::File: {
            // Lines "i j k eps_real eps_imag"; '#' starts a comment; unlisted voxels are free space.
            std::ifstream in(cfg.body.file);
            if (!in) throw IoError("cannot read permittivity file '" + cfg.body.file + "'");
            std::string line;
            int no = 0;
            while (std::getline(in, line)) {
                ++no;
                const auto hash = line.find('#');
                if (hash != std::string::npos) line.resize(hash);
                std::istringstream ls(line);
                long i = 0, j = 0, k = 0;
                double re = 0.0, im = 0.0;
                if (!(ls >> i)) continue;
                std::string rest;
                if (!(ls >> j >> k >> re >> im) || (ls >> rest))
                    throw ParseError("permittivity line must be 'i j k eps_real eps_imag'", cfg.body.file, no);
                if (i < 0 || j < 0 || k < 0 || static_cast<std::size_t>(i) >= cfg.dims[0] || static_cast<std::size_t>(j) >= cfg.dims[1] ||
                    static_cast<std::size_t>(k) >= cfg.dims[2])
                    throw ParseError("voxel index outside the grid", cfg.body.file, no);
                if (!std::isfinite(re) || !std::isfinite(im) || im > 0.0)
                    throw ParseError("permittivity must be finite with eps_imag <= 0", cfg.body.file, no);
                g.set_eps_r(g.linear({static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k)}), cplx(re, im));
            }
            break;
        }
    }
    return g;
}

em::SurfaceMesh build_surface(const SurfaceSpec& spec) {
    em::SurfaceMesh m = spec.kind == SurfaceSpec::Kind::Loop ? make_loop(spec.loop, spec.name) : make_shell(spec.shell, spec.name);
    m.domain = spec.domain;
    return m;
}

double distance_to_box(const em::SurfaceMesh& mesh, const Vec3& lo, const Vec3& hi) {
    double best = std::numeric_limits<double>::infinity();
    auto visit = [&](const Vec3& r) {
        const Vec3 d = (lo - r).cwiseMax(r - hi).cwiseMax(Vec3::Zero());
        best = std::min(best, d.norm());
    };
    for (const auto& p : mesh.patches) {
        const auto v = p.vertices();
        visit(p.center);
        for (std::size_t i = 0; i < 4; ++i) {
            visit(v[i]);
            visit(0.5 * (v[i] + v[(i + 1) % 4]));
        }
    }
    return best;
}

em::Domain auto_tag(double distance, const Vec3& lo, const Vec3& hi, double fraction) {
    return distance < fraction * (hi - lo).maxCoeff() ? em::Domain::Near : em::Domain::Far;
}

solver::Problem build_problem(const SceneConfig& cfg) {
    solver::Problem p;
    p.frequency = em::Frequency(cfg.frequency);
    p.grid = build_grid(cfg);
    for (const auto& s : cfg.surfaces) {
        em::SurfaceMesh m = build_surface(s);
        for (const auto& port : cfg.ports)
            if (port.surface == s.name) m.ports.push_back({port.name, port.patch, port.polarity});
        p.surfaces.push_back(std::move(m));
    }
    return p;
}

std::string echo_scene(const SceneConfig& c) {
    YAML::Emitter e;
    auto vec = [&](const Vec3& v) {
        e << YAML::Flow << YAML::BeginSeq << d(v.x()) << d(v.y()) << d(v.z()) << YAML::EndSeq;
    };
    e << YAML::BeginMap;
    e << YAML::Key << "frequency" << YAML::Value << d(c.frequency);
    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dims" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.dims[0] << c.dims[1] << c.dims[2] << YAML::EndSeq;
    e << YAML::Key << "spacing" << YAML::Value << d(c.spacing);
    e << YAML::Key << "origin" << YAML::Value;
    vec(c.origin);
    e << YAML::EndMap;
    e << YAML::Key << "body" << YAML::Value << YAML::BeginMap;
    if (c.body.kind == BodySpec::Kind::Sphere) {
        e << YAML::Key << "sphere" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "center" << YAML::Value;
        vec(c.body.center);
        e << YAML::Key << "radius" << YAML::Value << d(c.body.radius);
        e << YAML::Key << "eps_real" << YAML::Value << d(c.body.eps_real);
        e << YAML::Key << "sigma" << YAML::Value << d(c.body.sigma);
        e << YAML::EndMap;
    } else if (c.body.kind == BodySpec::Kind::File) {
        e << YAML::Key << "permittivity_file" << YAML::Value << c.body.file;
    }
    e << YAML::EndMap;
    e << YAML::Key << "surfaces" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : c.surfaces) {
        e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.name;
        if (s.kind == SurfaceSpec::Kind::Loop) {
            e << YAML::Key << "loop" << YAML::Value << YAML::BeginMap;
            e << YAML::Key << "center" << YAML::Value;
            vec(s.loop.center);
            e << YAML::Key << "normal" << YAML::Value;
            vec(s.loop.normal);
            e << YAML::Key << "radius" << YAML::Value << d(s.loop.radius);
            e << YAML::Key << "width" << YAML::Value << d(s.loop.width);
            e << YAML::Key << "patches" << YAML::Value << s.loop.patches << YAML::EndMap;
        } else {
            e << YAML::Key << "shell" << YAML::Value << YAML::BeginMap;
            e << YAML::Key << "center" << YAML::Value;
            vec(s.shell.center);
            e << YAML::Key << "axis" << YAML::Value;
            vec(s.shell.axis);
            e << YAML::Key << "radius" << YAML::Value << d(s.shell.radius);
            e << YAML::Key << "length" << YAML::Value << d(s.shell.length);
            e << YAML::Key << "axial" << YAML::Value << s.shell.axial;
            e << YAML::Key << "azimuthal" << YAML::Value << s.shell.azimuthal << YAML::EndMap;
        }
        const char* tag = s.tag == DomainTag::Auto ? "auto" : (s.tag == DomainTag::Near ? "near" : "far");
        e << YAML::Key << "domain" << YAML::Value << tag;
        e << YAML::Key << "resolved_domain" << YAML::Value << (s.domain == em::Domain::Near ? "near" : "far");
        e << YAML::Key << "body_distance" << YAML::Value << d(s.body_distance);
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "ports" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : c.ports)
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << p.name << YAML::Key << "surface" << YAML::Value << p.surface
          << YAML::Key << "patch" << YAML::Value << p.patch << YAML::Key << "polarity" << YAML::Value << p.polarity << YAML::EndMap;
    e << YAML::EndSeq;
    const auto& g = c.solve.gmres;
    const auto& k = c.solve.compression;
    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap << YAML::Key << "tol_gmres" << YAML::Value << d(g.tol) << YAML::Key
      << "restart" << YAML::Value << g.restart << YAML::Key << "max_cycles" << YAML::Value << g.max_cycles << YAML::Key << "dense_limit"
      << YAML::Value << c.solve.dense_limit << YAML::EndMap;
    e << YAML::Key << "compression" << YAML::Value << YAML::BeginMap << YAML::Key << "tol_tt" << YAML::Value << d(k.tt_tol) << YAML::Key
      << "tol_aca" << YAML::Value << d(k.aca_tol) << YAML::Key << "tol_tucker" << YAML::Value << d(k.tucker_tol) << YAML::Key << "tt_max_rank"
      << YAML::Value << k.tt_max_rank << YAML::Key << "tt_max_sweeps" << YAML::Value << k.tt_max_sweeps << YAML::Key << "seed"
      << YAML::Value << k.seed << YAML::EndMap;
    e << YAML::Key << "pfft" << YAML::Value << YAML::BeginMap << YAML::Key << "precorrection_gap" << YAML::Value
      << c.solve.pfft.precorrection_gap << YAML::Key << "max_extension" << YAML::Value << d(c.solve.pfft.max_extension) << YAML::EndMap;
    e << YAML::Key << "far_threshold" << YAML::Value << d(c.far_threshold);
    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap << YAML::Key << "dir" << YAML::Value << c.output_dir << YAML::Key
      << "precision" << YAML::Value << (c.double_precision ? "double" : "single") << YAML::EndMap;
    e << YAML::Key << "warnings" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : c.warnings) e << w;
    e << YAML::EndSeq;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

}  // namespace vsie::scene
