// SPDX-License-Identifier: Apache-2.0
#include "vsie/vsie.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "vsie/scene.hpp"

struct vsie_scene {
    std::string text;
    std::string base_dir;
    std::vector<vsie::scene::Override> overrides;
    vsie::scene::SceneConfig config;
};

struct vsie_result {
    vsie::scene::RunOutput out;
};

namespace {

thread_local std::string last_error;

vsie_status fail(vsie_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class F>
vsie_status guarded(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const vsie::ParseError& e) {
        return fail(VSIE_ERR_INPUT, e.what());
    } catch (const vsie::GeometryError& e) {
        return fail(VSIE_ERR_INPUT, e.what());
    } catch (const vsie::LimitError& e) {
        return fail(VSIE_ERR_LIMIT, e.what());
    } catch (const vsie::IoError& e) {
        return fail(VSIE_ERR_IO, e.what());
    } catch (const vsie::ArgumentError& e) {
        return fail(VSIE_ERR_INPUT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(VSIE_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(VSIE_ERR_INTERNAL, e.what());
    }
}

vsie_status copy_text(const std::string& s, char* buf, size_t cap, size_t* len) {
    if (!len) return fail(VSIE_ERR_ARGUMENT, "len must not be NULL");
    *len = s.size();
    if (!buf) return VSIE_OK;
    if (cap <= s.size()) return fail(VSIE_ERR_ARGUMENT, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return VSIE_OK;
}

}  // namespace

extern "C" {

const char* vsie_version(void) { return "1.0.0"; }

const char* vsie_last_error(void) { return last_error.c_str(); }

vsie_status vsie_scene_parse(const char* text, const char* base_dir, vsie_scene** out) {
    if (!text || !out) return fail(VSIE_ERR_ARGUMENT, "text and out must not be NULL");
    *out = nullptr;
    return guarded([&] {
        auto s = std::make_unique<vsie_scene>();
        s->text = text;
        s->base_dir = base_dir ? base_dir : ".";
        s->config = vsie::scene::parse_scene(s->text, s->base_dir);
        *out = s.release();
        return VSIE_OK;
    });
}

vsie_status vsie_scene_load(const char* path, vsie_scene** out) {
    if (!path || !out) return fail(VSIE_ERR_ARGUMENT, "path and out must not be NULL");
    *out = nullptr;
    return guarded([&] {
        auto s = std::make_unique<vsie_scene>();
        std::ifstream in(path);
        if (!in) throw vsie::ParseError(std::string("cannot read scene file '") + path + "'", "", 0);
        std::stringstream ss;
        ss << in.rdbuf();
        s->text = ss.str();
        s->base_dir = std::filesystem::absolute(path).parent_path().string();
        s->config = vsie::scene::parse_scene(s->text, s->base_dir);
        *out = s.release();
        return VSIE_OK;
    });
}

vsie_status vsie_scene_clone(const vsie_scene* scene, vsie_scene** out) {
    if (!scene || !out) return fail(VSIE_ERR_ARGUMENT, "scene and out must not be NULL");
    *out = nullptr;
    return guarded([&] {
        *out = new vsie_scene(*scene);
        return VSIE_OK;
    });
}

void vsie_scene_free(vsie_scene* scene) { delete scene; }

vsie_status vsie_scene_set(vsie_scene* scene, const char* path, const char* value) {
    if (!scene || !path || !value) return fail(VSIE_ERR_ARGUMENT, "scene, path and value must not be NULL");
    return guarded([&] {
        auto overrides = scene->overrides;
        overrides.push_back({path, value});
        scene->config = vsie::scene::parse_scene(scene->text, scene->base_dir, overrides);
        scene->overrides = std::move(overrides);
        return VSIE_OK;
    });
}

size_t vsie_scene_warning_count(const vsie_scene* scene) { return scene ? scene->config.warnings.size() : 0; }

const char* vsie_scene_warning(const vsie_scene* scene, size_t index) {
    if (!scene || index >= scene->config.warnings.size()) return nullptr;
    return scene->config.warnings[index].c_str();
}

const char* vsie_scene_output_dir(const vsie_scene* scene) { return scene ? scene->config.output_dir.c_str() : nullptr; }

vsie_status vsie_scene_echo(const vsie_scene* scene, char* buf, size_t cap, size_t* len) {
    if (!scene) return fail(VSIE_ERR_ARGUMENT, "scene must not be NULL");
    return guarded([&] { return copy_text(vsie::scene::echo_scene(scene->config), buf, cap, len); });
}

vsie_status vsie_solve(const vsie_scene* scene, int reference, unsigned workers, vsie_result** out) {
    if (!scene || !out) return fail(VSIE_ERR_ARGUMENT, "scene and out must not be NULL");
    if (workers < 1) return fail(VSIE_ERR_ARGUMENT, "workers must be at least 1");
    *out = nullptr;
    return guarded([&] {
        auto r = std::make_unique<vsie_result>();
        r->out = vsie::scene::run(scene->config, {reference != 0, workers});
        const bool ok = r->out.converged();
        *out = r.release();
        return ok ? VSIE_OK : fail(VSIE_ERR_NOT_CONVERGED, "solve did not reach its tolerance");
    });
}

void vsie_result_free(vsie_result* result) { delete result; }

int vsie_result_converged(const vsie_result* result) { return result && result->out.converged() ? 1 : 0; }

vsie_status vsie_result_report(const vsie_result* result, char* buf, size_t cap, size_t* len) {
    if (!result) return fail(VSIE_ERR_ARGUMENT, "result must not be NULL");
    return guarded([&] { return copy_text(vsie::scene::format_report(result->out), buf, cap, len); });
}

vsie_status vsie_result_write(const vsie_result* result, const char* dir) {
    if (!result || !dir) return fail(VSIE_ERR_ARGUMENT, "result and dir must not be NULL");
    return guarded([&] {
        vsie::scene::write_outputs(result->out, dir);
        return VSIE_OK;
    });
}

vsie_status vsie_result_currents(const vsie_result* result, const char* block, double* re_im, size_t cap, size_t* count) {
    if (!result || !block || !count) return fail(VSIE_ERR_ARGUMENT, "result, block and count must not be NULL");
    for (const auto& b : result->out.currents.blocks) {
        if (b.name != block) continue;
        const auto n = static_cast<size_t>(b.data.size());
        *count = n;
        if (!re_im) return VSIE_OK;
        if (cap < 2 * n) return fail(VSIE_ERR_ARGUMENT, "buffer too small");
        for (size_t i = 0; i < n; ++i) {
            re_im[2 * i] = b.data(static_cast<Eigen::Index>(i)).real();
            re_im[2 * i + 1] = b.data(static_cast<Eigen::Index>(i)).imag();
        }
        return VSIE_OK;
    }
    return fail(VSIE_ERR_ARGUMENT, std::string("unknown current block '") + block + "'");
}

}  // extern "C"
