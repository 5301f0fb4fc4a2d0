// SPDX-License-Identifier: Apache-2.0
// Command-line driver over the C API.
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "vsie/vsie.h"

namespace {

struct SceneHandle {
    vsie_scene* p = nullptr;
    ~SceneHandle() { vsie_scene_free(p); }
};

struct ResultHandle {
    vsie_result* p = nullptr;
    ~ResultHandle() { vsie_result_free(p); }
};

std::string report_text(const vsie_result* r) {
    size_t len = 0;
    if (vsie_result_report(r, nullptr, 0, &len) != VSIE_OK) return {};
    std::string s(len + 1, '\0');
    vsie_result_report(r, s.data(), s.size(), &len);
    s.resize(len);
    return s;
}

std::string report_value(const std::string& report, const std::string& key) {
    const std::string tag = key + "=";
    for (std::size_t pos = 0; pos < report.size();) {
        const auto end = report.find('\n', pos);
        const std::string line = report.substr(pos, end - pos);
        if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    return "";
}

// "a,b,c" or "start:stop:count" (inclusive, evenly spaced).
std::vector<std::string> parse_value_list(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::vector<std::string> parts;
    const char sep = list.find(':') != std::string::npos ? ':' : ',';
    for (std::string v; std::getline(ss, v, sep);) parts.push_back(v);
    if (sep == ',') {
        for (const auto& v : parts)
            if (v.empty()) throw std::invalid_argument("empty entry in value list '" + list + "'");
        if (parts.empty()) throw std::invalid_argument("empty value list");
        return parts;
    }
    auto number = [&](const std::string& v) {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) throw std::invalid_argument("value range must be start:stop:count, got '" + list + "'");
        return x;
    };
    if (parts.size() != 3) throw std::invalid_argument("value range must be start:stop:count, got '" + list + "'");
    const double lo = number(parts[0]);
    const double hi = number(parts[1]);
    const double cnt = number(parts[2]);
    if (cnt < 1 || cnt != std::floor(cnt)) throw std::invalid_argument("range count must be a positive integer");
    const auto c = static_cast<std::size_t>(cnt);
    for (std::size_t i = 0; i < c; ++i) {
        const double v = c == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(c - 1);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out.emplace_back(buf);
    }
    return out;
}

int input_error(const std::string& what) {
    std::fprintf(stderr, "error: %s\n", what.c_str());
    return VSIE_ERR_INPUT;
}

struct Options {
    std::string scene;
    bool reference = false;
    std::string sweep;
    std::string out;
    std::vector<std::pair<std::string, std::string>> settings;
    unsigned workers = 1;
};

// One solve; writes its outputs and returns the exit status.
int solve_one(const vsie_scene* scene, const Options& o, unsigned threads, const std::string& dir, std::string* report) {
    ResultHandle res;
    const vsie_status st = vsie_solve(scene, o.reference ? 1 : 0, threads, &res.p);
    if (!res.p) {
        std::fprintf(stderr, "error: %s\n", vsie_last_error());
        return st == VSIE_ERR_LIMIT || st == VSIE_ERR_ARGUMENT ? VSIE_ERR_INPUT : static_cast<int>(st);
    }
    if (vsie_result_write(res.p, dir.c_str()) != VSIE_OK) {
        std::fprintf(stderr, "error: %s\n", vsie_last_error());
        return VSIE_ERR_INPUT;
    }
    *report = report_text(res.p);
    return st == VSIE_OK ? 0 : VSIE_ERR_NOT_CONVERGED;
}

int run_solve(const Options& o) {
    SceneHandle scene;
    if (vsie_scene_load(o.scene.c_str(), &scene.p) != VSIE_OK) return input_error(vsie_last_error());
    for (const auto& [path, value] : o.settings)
        if (vsie_scene_set(scene.p, path.c_str(), value.c_str()) != VSIE_OK) return input_error(vsie_last_error());
    for (size_t i = 0; i < vsie_scene_warning_count(scene.p); ++i) std::fprintf(stderr, "warning: %s\n", vsie_scene_warning(scene.p, i));
    const std::string out = o.out.empty() ? vsie_scene_output_dir(scene.p) : o.out;

    if (o.sweep.empty()) {
        std::string report;
        const int code = solve_one(scene.p, o, o.workers, out, &report);
        std::fputs(report.c_str(), stdout);
        return code;
    }

    const auto eq = o.sweep.find('=');
    if (eq == std::string::npos || eq == 0) return input_error("--sweep expects <param>=<list>");
    const std::string param = o.sweep.substr(0, eq);
    std::vector<std::string> values;
    try {
        values = parse_value_list(o.sweep.substr(eq + 1));
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
    // Validate every entry before solving any.
    std::vector<SceneHandle> scenes(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (vsie_scene_clone(scene.p, &scenes[i].p) != VSIE_OK || vsie_scene_set(scenes[i].p, param.c_str(), values[i].c_str()) != VSIE_OK)
            return input_error("sweep value " + values[i] + ": " + vsie_last_error());
    }

    std::vector<int> codes(values.size(), 0);
    std::vector<std::string> reports(values.size());
    std::atomic<std::size_t> next{0};
    std::mutex print;
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            char name[32];
            std::snprintf(name, sizeof name, "sweep_%02zu", i);
            codes[i] = solve_one(scenes[i].p, o, 1, (std::filesystem::path(out) / name).string(), &reports[i]);
            std::lock_guard lock(print);
            std::printf("%s %s=%s converged=%s iterations=%s rel_diff_ref=%s\n", name, param.c_str(), values[i].c_str(),
                        report_value(reports[i], "converged").c_str(), report_value(reports[i], "iterations").c_str(),
                        report_value(reports[i], "rel_diff_ref").c_str());
            std::fflush(stdout);
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(o.workers, static_cast<unsigned>(values.size())));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ofstream summary(std::filesystem::path(out) / "sweep.csv");
    summary << "index,value,converged,iterations,residual,wall_ms,cf_coupling,rel_diff_ref\n";
    int code = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        summary << i << ',' << values[i];
        for (const char* k : {"converged", "iterations", "residual", "wall_ms", "cf_coupling", "rel_diff_ref"}) summary << ',' << report_value(reports[i], k);
        summary << '\n';
        if (codes[i] != 0) code = code == VSIE_ERR_INPUT ? code : codes[i];
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid volume-surface integral equation solver"};
    app.require_subcommand(1);
    Options o;
    auto* solve = app.add_subcommand("solve", "Solve a scene and write currents, report and scene echo");
    solve->add_option("scene", o.scene, "Scene file (YAML)")->required();
    solve->add_flag("--reference", o.reference, "Also run the dense reference and report rel_diff_ref");
    solve->add_option("--sweep", o.sweep, "Re-solve over values: <param>=a,b,c or <param>=start:stop:count");
    solve->add_option("--out", o.out, "Output directory (default: output.dir of the scene)");
    auto setting = [&](const char* flag, const char* path, const char* help) {
        solve->add_option_function<std::string>(flag, [&o, path](const std::string& v) { o.settings.emplace_back(path, v); }, help);
    };
    setting("--tol-gmres", "solver.tol_gmres", "GMRES relative residual tolerance");
    setting("--tol-tt", "compression.tol_tt", "TT-cross tolerance");
    setting("--tol-aca", "compression.tol_aca", "ACA tolerance");
    setting("--tol-tucker", "compression.tol_tucker", "Tucker tolerance (0 disables)");
    setting("--seed", "compression.seed", "Random seed for the cross approximations");
    solve->add_option("--workers", o.workers, "Threads per solve, or concurrent sweep entries")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : VSIE_ERR_INPUT;
    }
    return run_solve(o);
}
