#ifndef METANET_METANET_H
#define METANET_METANET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define MN_API __declspec(dllexport)
#else
#  define MN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. MN_OK is zero; everything else is an error whose message is in mn_last_error(). */
enum {
    MN_OK = 0,
    MN_INVALID_ARGUMENT = 1,
    MN_PARSE_ERROR = 2,
    MN_IO_ERROR = 3,
    MN_DIVERGENCE = 4,
    MN_NOT_CONVERGED = 5,
    MN_UNSUPPORTED = 6,
    MN_INTERNAL = 7
};

enum { MN_EULER = 0, MN_RK4 = 1, MN_PAPER_EULER = 2 };

typedef struct mn_model mn_model;
typedef struct mn_trajectory mn_trajectory;
typedef struct mn_detector mn_detector;
typedef struct mn_tracker mn_tracker;

typedef struct {
    double tau_r;
    double tau_w;
    double dt;
    long max_steps;
    double convergence_eps;
    double denominator_guard;
    uint64_t seed;
    int integrator;
    int window;
    int stride;
    double ceiling;
    int threads;
} mn_sim_config;

typedef struct {
    int connection_range;
    double potential_min;
    double potential_max;
    int steps_per_frame;
    int torus;
    int broadcast_count;
} mn_detector_config;

typedef struct {
    int fovea_width;
    int fovea_height;
    int downsample;
    int max_step;
} mn_tracker_config;

MN_API const char* mn_version(void);
/* Message of the last failed call on this thread, "" if none. */
MN_API const char* mn_last_error(void);
MN_API const char* mn_status_name(int status);
/* Releases strings and arrays handed out by the library. */
MN_API void mn_free(void* p);

MN_API void mn_sim_config_default(mn_sim_config* cfg);
/* Hard violations return an error; soft ones are listed in *warnings_json (may be NULL). */
MN_API int mn_sim_config_validate(const mn_sim_config* cfg, char** warnings_json);
MN_API int mn_sim_config_to_json(const mn_sim_config* cfg, char** out_json);
MN_API int mn_sim_config_from_json(const char* json, mn_sim_config* cfg);

/* Models */
MN_API int mn_model_from_json(const char* json, mn_model** out);
MN_API void mn_model_destroy(mn_model* m);
MN_API size_t mn_model_size(const mn_model* m);
MN_API int mn_model_label(const mn_model* m, size_t var, char** out);
MN_API int mn_model_apply_weights_json(mn_model* m, const char* json);
MN_API int mn_model_apply_inputs_json(mn_model* m, const char* json);
MN_API int mn_model_set_weight(mn_model* m, const char* label, double w);
MN_API int mn_model_set_input(mn_model* m, int k, double value);
MN_API int mn_model_initial_state(const mn_model* m, double* out, size_t n);
MN_API int mn_model_set_initial_state(mn_model* m, const double* x, size_t n);
/* tau_r du/dt at x. */
MN_API int mn_model_rhs(const mn_model* m, const double* x, double* out, size_t n);
/* JSON description of the model variables and weights. */
MN_API int mn_model_to_json(const mn_model* m, char** out_json);

/* Simulation. A trajectory is returned even when the run stops at max_steps. */
MN_API int mn_simulate(const mn_model* m, const mn_sim_config* cfg, mn_trajectory** out);
MN_API void mn_trajectory_destroy(mn_trajectory* t);
MN_API size_t mn_trajectory_rows(const mn_trajectory* t);
MN_API int mn_trajectory_row(const mn_trajectory* t, size_t row, double* time, double* values, size_t n);
MN_API int mn_trajectory_converged(const mn_trajectory* t);
MN_API double mn_trajectory_residual(const mn_trajectory* t);
MN_API long mn_trajectory_steps(const mn_trajectory* t);
MN_API int mn_trajectory_write_csv(const mn_trajectory* t, const mn_model* m, const char* path);

/* Motifs: JSON in, JSON out. */
MN_API int mn_motif_default_json(const char* kind, char** out_json);
MN_API int mn_motif_equilibria(const char* motif_json, char** out_json);
MN_API int mn_motif_verify(const char* motif_json, const mn_sim_config* cfg, double tolerance, char** out_json,
                           int* passed);

/* Images. Pixels are row-major white amounts in [0, 1]. */
MN_API int mn_frame_load(const char* path, int* width, int* height, double** pixels);
MN_API int mn_frame_save_pgm(const double* pixels, int width, int height, const char* path);
/* Writes a PGM scaled to [0, 255] plus a JSON sidecar; *scale may be NULL. */
MN_API int mn_map_save(const double* map, int width, int height, const char* path, double* scale);

/* Detector */
MN_API void mn_detector_config_default(mn_detector_config* cfg);
MN_API int mn_detector_create(int width, int height, const mn_detector_config* cfg, const mn_sim_config* sim,
                              mn_detector** out);
MN_API void mn_detector_destroy(mn_detector* d);
/* Runs steps_per_frame steps on the frame; each output buffer holds width*height values and may be NULL. */
MN_API int mn_detector_run(mn_detector* d, const double* pixels, double* white, double* black, double* uncertainty);
MN_API long mn_detector_steps(const mn_detector* d);

/* Tracker */
MN_API void mn_tracker_config_default(mn_tracker_config* cfg);
MN_API int mn_tracker_create(int width, int height, const mn_detector_config* dcfg, const mn_tracker_config* tcfg,
                             const mn_sim_config* sim, mn_tracker** out);
MN_API void mn_tracker_destroy(mn_tracker* t);
MN_API int mn_tracker_periphery_size(const mn_tracker* t, int* width, int* height);
/* gaze and target receive (x, y). Map buffers may be NULL; periphery maps are downsampled, fovea maps are
   fovea-sized. */
MN_API int mn_tracker_step(mn_tracker* t, const double* pixels, int* gaze, int* target, double* periphery_uncertainty,
                           double* fovea_uncertainty);

/* Synthesis. problem_json is a pairs file; with validate != 0 each pair is simulated for recall. */
MN_API int mn_synthesize(const char* problem_json, const mn_sim_config* sim, int validate, char** out_json);
MN_API int mn_glyph_benchmark(int per_class, uint64_t seed, const mn_sim_config* sim, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
