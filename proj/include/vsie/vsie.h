/* SPDX-License-Identifier: Apache-2.0 */
#ifndef VSIE_H
#define VSIE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define VSIE_API __declspec(dllexport)
#else
#define VSIE_API __attribute__((visibility("default")))
#endif

/* Status codes. The first three double as CLI exit codes. */
typedef enum vsie_status {
    VSIE_OK = 0,
    VSIE_ERR_INPUT = 1,         /* malformed scene, invalid geometry, unreadable input */
    VSIE_ERR_NOT_CONVERGED = 2, /* a solve finished without meeting its tolerance */
    VSIE_ERR_ARGUMENT = 3,      /* null handle, unknown block, buffer too small */
    VSIE_ERR_LIMIT = 4,         /* a size guard refused the request */
    VSIE_ERR_IO = 5,            /* output could not be written */
    VSIE_ERR_INTERNAL = 6
} vsie_status;

typedef struct vsie_scene vsie_scene;
typedef struct vsie_result vsie_result;

VSIE_API const char* vsie_version(void);

/* Message of the last failing call on this thread ("" if none). */
VSIE_API const char* vsie_last_error(void);

/* Scenes. Relative paths inside a parsed document resolve against base_dir
   (NULL: the working directory). */
VSIE_API vsie_status vsie_scene_load(const char* path, vsie_scene** out);
VSIE_API vsie_status vsie_scene_parse(const char* text, const char* base_dir, vsie_scene** out);
VSIE_API vsie_status vsie_scene_clone(const vsie_scene* scene, vsie_scene** out);
VSIE_API void vsie_scene_free(vsie_scene* scene);

/* Overrides one document value by dotted path (list items by name), e.g.
   "surfaces.shield.shell.radius" or "solver.tol_gmres", and revalidates.
   On failure the scene is left unchanged. */
VSIE_API vsie_status vsie_scene_set(vsie_scene* scene, const char* path, const char* value);

VSIE_API size_t vsie_scene_warning_count(const vsie_scene* scene);
VSIE_API const char* vsie_scene_warning(const vsie_scene* scene, size_t index);
VSIE_API const char* vsie_scene_output_dir(const vsie_scene* scene);

/* Text outputs follow one convention: *len receives the length without the
   terminator; buf may be NULL to query it, otherwise cap must exceed *len. */
VSIE_API vsie_status vsie_scene_echo(const vsie_scene* scene, char* buf, size_t cap, size_t* len);

/* Hybrid solve; with reference != 0 also the dense reference solve.
   workers sets the thread count of this solve (>= 1).
   Returns VSIE_OK or VSIE_ERR_NOT_CONVERGED with *out set, or another
   error with *out NULL. */
VSIE_API vsie_status vsie_solve(const vsie_scene* scene, int reference, unsigned workers, vsie_result** out);
VSIE_API void vsie_result_free(vsie_result* result);

VSIE_API int vsie_result_converged(const vsie_result* result);
VSIE_API vsie_status vsie_result_report(const vsie_result* result, char* buf, size_t cap, size_t* len);

/* Writes currents.vsc, currents.csv, report.txt and scene.yaml into dir. */
VSIE_API vsie_status vsie_result_write(const vsie_result* result, const char* dir);

/* Copies a current block ("far", "near" or "body") as interleaved re, im
   doubles; cap is the length of re_im in doubles. re_im may be NULL to
   query *count (complex entries). */
VSIE_API vsie_status vsie_result_currents(const vsie_result* result, const char* block, double* re_im, size_t cap, size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* VSIE_H */
