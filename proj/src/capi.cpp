#include "metanet/metanet.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>

#include <nlohmann/json.hpp>

#include "metanet/config.hpp"

struct mn_model {
    metanet::ModelConfig cfg;
};

struct mn_trajectory {
    metanet::Trajectory traj;
};

struct mn_detector {
    metanet::Detector det;
};

struct mn_tracker {
    metanet::Tracker tr;
};

namespace {

using namespace metanet;

thread_local std::string last_error;

template <class F>
int guarded(F&& f) {
    last_error.clear();
    try {
        f();
        return MN_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const nlohmann::json::exception& e) {
        last_error = e.what();
        return MN_PARSE_ERROR;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return MN_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return MN_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

SimulationConfig to_cpp(const mn_sim_config* c) {
    SimulationConfig s;
    if (!c) return s;
    s.tau_r = c->tau_r;
    s.tau_w = c->tau_w;
    s.dt = c->dt;
    s.max_steps = c->max_steps;
    s.convergence_eps = c->convergence_eps;
    s.denominator_guard = c->denominator_guard;
    s.seed = c->seed;
    switch (c->integrator) {
        case MN_EULER: s.integrator = Integrator::euler; break;
        case MN_RK4: s.integrator = Integrator::rk4; break;
        case MN_PAPER_EULER: s.integrator = Integrator::paper_euler; break;
        default: fail(ErrorCode::invalid_argument, "unknown integrator " + std::to_string(c->integrator));
    }
    s.window = c->window;
    s.stride = c->stride;
    s.ceiling = c->ceiling;
    s.threads = c->threads;
    return s;
}

void from_cpp(const SimulationConfig& s, mn_sim_config* c) {
    c->tau_r = s.tau_r;
    c->tau_w = s.tau_w;
    c->dt = s.dt;
    c->max_steps = s.max_steps;
    c->convergence_eps = s.convergence_eps;
    c->denominator_guard = s.denominator_guard;
    c->seed = s.seed;
    c->integrator = s.integrator == Integrator::rk4 ? MN_RK4 : s.integrator == Integrator::paper_euler ? MN_PAPER_EULER : MN_EULER;
    c->window = s.window;
    c->stride = s.stride;
    c->ceiling = s.ceiling;
    c->threads = s.threads;
}

DetectorConfig to_cpp(const mn_detector_config* c) {
    DetectorConfig d;
    if (!c) return d;
    d.connection_range = c->connection_range;
    d.potential_min = c->potential_min;
    d.potential_max = c->potential_max;
    d.steps_per_frame = c->steps_per_frame;
    d.torus = c->torus != 0;
    d.broadcast_count = c->broadcast_count;
    return d;
}

TrackerConfig to_cpp(const mn_tracker_config* c) {
    TrackerConfig t;
    if (!c) return t;
    t.fovea_width = c->fovea_width;
    t.fovea_height = c->fovea_height;
    t.downsample = c->downsample;
    t.max_step = c->max_step;
    return t;
}

Frame frame_of(const double* pixels, int w, int h) {
    need(pixels, "pixels");
    require(w > 0 && h > 0, "frame dimensions must be positive");
    Frame f{w, h, std::vector<double>(pixels, pixels + static_cast<std::size_t>(w) * h)};
    validate(f);
    return f;
}

void copy_out(const std::vector<double>& v, double* out) {
    if (out) std::copy(v.begin(), v.end(), out);
}

}  // namespace

extern "C" {

const char* mn_version(void) { return "0.1.0"; }

const char* mn_last_error(void) { return last_error.c_str(); }

const char* mn_status_name(int status) {
    switch (status) {
        case MN_OK: return "ok";
        case MN_INVALID_ARGUMENT: return "invalid_argument";
        case MN_PARSE_ERROR: return "parse_error";
        case MN_IO_ERROR: return "io_error";
        case MN_DIVERGENCE: return "divergence";
        case MN_NOT_CONVERGED: return "not_converged";
        case MN_UNSUPPORTED: return "unsupported";
        case MN_INTERNAL: return "internal";
        default: return "unknown";
    }
}

void mn_free(void* p) { std::free(p); }

void mn_sim_config_default(mn_sim_config* cfg) {
    if (cfg) from_cpp(SimulationConfig{}, cfg);
}

int mn_sim_config_validate(const mn_sim_config* cfg, char** warnings_json) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto w = validate(to_cpp(cfg));
        if (warnings_json) *warnings_json = dup(nlohmann::json(w).dump());
    });
}

int mn_sim_config_to_json(const mn_sim_config* cfg, char** out_json) {
    return guarded([&] {
        need(cfg, "cfg");
        need(out_json, "out_json");
        *out_json = dup(to_json(to_cpp(cfg)));
    });
}

int mn_sim_config_from_json(const char* json, mn_sim_config* cfg) {
    return guarded([&] {
        need(json, "json");
        need(cfg, "cfg");
        from_cpp(sim_config_from_json(json), cfg);
    });
}

int mn_model_from_json(const char* json, mn_model** out) {
    return guarded([&] {
        need(json, "json");
        need(out, "out");
        *out = new mn_model{model_from_json(json)};
    });
}

void mn_model_destroy(mn_model* m) { delete m; }

size_t mn_model_size(const mn_model* m) { return m ? m->cfg.spec.size() : 0; }

int mn_model_label(const mn_model* m, size_t var, char** out) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        require(var < m->cfg.spec.size(), "variable index out of range");
        *out = dup(m->cfg.spec.label(var));
    });
}

int mn_model_apply_weights_json(mn_model* m, const char* json) {
    return guarded([&] {
        need(m, "model");
        need(json, "json");
        apply_weights_json(m->cfg, json);
    });
}

int mn_model_apply_inputs_json(mn_model* m, const char* json) {
    return guarded([&] {
        need(m, "model");
        need(json, "json");
        apply_inputs_json(m->cfg, json);
    });
}

int mn_model_set_weight(mn_model* m, const char* label, double w) {
    return guarded([&] {
        need(m, "model");
        need(label, "label");
        require(std::isfinite(w), "weight must be finite");
        m->cfg.weights.weight[variable_by_label(m->cfg.spec, label)] = w;
    });
}

int mn_model_set_input(mn_model* m, int k, double value) {
    return guarded([&] {
        need(m, "model");
        set_input(m->cfg.spec, k, value);
    });
}

int mn_model_initial_state(const mn_model* m, double* out, size_t n) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        require(n == m->cfg.spec.size(), "buffer length must equal the model size");
        copy_out(m->cfg.initial.values, out);
    });
}

int mn_model_set_initial_state(mn_model* m, const double* x, size_t n) {
    return guarded([&] {
        need(m, "model");
        need(x, "x");
        require(n == m->cfg.spec.size(), "buffer length must equal the model size");
        PotentialState s{std::vector<double>(x, x + n), 0.0};
        validate(m->cfg.spec, s);
        m->cfg.initial = std::move(s);
    });
}

int mn_model_rhs(const mn_model* m, const double* x, double* out, size_t n) {
    return guarded([&] {
        need(m, "model");
        need(x, "x");
        need(out, "out");
        require(n == m->cfg.spec.size(), "buffer length must equal the model size");
        rhs(m->cfg.spec, m->cfg.weights, x, out);
    });
}

int mn_model_to_json(const mn_model* m, char** out_json) {
    return guarded([&] {
        need(m, "model");
        need(out_json, "out_json");
        const ModelSpec& s = m->cfg.spec;
        nlohmann::json j;
        j["format_version"] = format_version;
        j["family"] = to_string(s.family);
        j["shape"] = {{"inputs", s.shape.n_inputs}, {"outputs", s.shape.n_outputs}};
        nlohmann::json vars = nlohmann::json::array();
        for (std::size_t v = 0; v < s.size(); ++v)
            vars.push_back({{"label", s.label(v)},
                            {"kind", to_string(s.vars[v].kind)},
                            {"weight", m->cfg.weights.weight[v]},
                            {"initial", m->cfg.initial.values[v]}});
        j["variables"] = vars;
        *out_json = dup(j.dump(2));
    });
}

int mn_simulate(const mn_model* m, const mn_sim_config* cfg, mn_trajectory** out) {
    return guarded([&] {
        need(m, "model");
        need(out, "out");
        auto t = std::make_unique<mn_trajectory>();
        t->traj = simulate(m->cfg.initial, m->cfg.spec, m->cfg.weights, to_cpp(cfg));
        *out = t.release();
    });
}

void mn_trajectory_destroy(mn_trajectory* t) { delete t; }

size_t mn_trajectory_rows(const mn_trajectory* t) { return t ? t->traj.states.size() : 0; }

int mn_trajectory_row(const mn_trajectory* t, size_t row, double* time, double* values, size_t n) {
    return guarded([&] {
        need(t, "trajectory");
        require(row < t->traj.states.size(), "row out of range");
        const auto& s = t->traj.states[row];
        if (time) *time = s.time;
        if (values) {
            require(n == s.values.size(), "buffer length must equal the model size");
            copy_out(s.values, values);
        }
    });
}

int mn_trajectory_converged(const mn_trajectory* t) { return t && t->traj.converged ? 1 : 0; }

double mn_trajectory_residual(const mn_trajectory* t) { return t ? t->traj.final_residual : 0.0; }

long mn_trajectory_steps(const mn_trajectory* t) { return t ? t->traj.steps : 0; }

int mn_trajectory_write_csv(const mn_trajectory* t, const mn_model* m, const char* path) {
    return guarded([&] {
        need(t, "trajectory");
        need(m, "model");
        need(path, "path");
        std::ofstream os(path, std::ios::binary);
        if (!os) fail(ErrorCode::io_error, std::string("cannot write ") + path);
        write_csv(os, m->cfg.spec, t->traj);
        if (!os) fail(ErrorCode::io_error, std::string("write failed for ") + path);
    });
}

int mn_motif_default_json(const char* kind, char** out_json) {
    return guarded([&] {
        need(kind, "kind");
        need(out_json, "out_json");
        *out_json = dup(to_json(default_motif(motif_kind_from_string(kind))));
    });
}

int mn_motif_equilibria(const char* motif_json, char** out_json) {
    return guarded([&] {
        need(motif_json, "motif_json");
        need(out_json, "out_json");
        *out_json = dup(to_json(motif_equilibria(motif_from_json(motif_json))));
    });
}

int mn_motif_verify(const char* motif_json, const mn_sim_config* cfg, double tolerance, char** out_json, int* passed) {
    return guarded([&] {
        need(motif_json, "motif_json");
        need(out_json, "out_json");
        require(tolerance > 0.0, "tolerance must be positive");
        const MotifReport r = verify_motif(motif_from_json(motif_json), to_cpp(cfg), {}, tolerance);
        if (passed) *passed = r.passed ? 1 : 0;
        *out_json = dup(to_json(r));
    });
}

int mn_frame_load(const char* path, int* width, int* height, double** pixels) {
    return guarded([&] {
        need(path, "path");
        need(width, "width");
        need(height, "height");
        need(pixels, "pixels");
        const Frame f = load_frame(path);
        auto* buf = static_cast<double*>(std::malloc(f.pixels.size() * sizeof(double)));
        if (!buf) throw std::bad_alloc();
        std::copy(f.pixels.begin(), f.pixels.end(), buf);
        *width = f.width;
        *height = f.height;
        *pixels = buf;
    });
}

int mn_frame_save_pgm(const double* pixels, int width, int height, const char* path) {
    return guarded([&] {
        need(path, "path");
        save_pgm(frame_of(pixels, width, height), path);
    });
}

int mn_map_save(const double* map, int width, int height, const char* path, double* scale) {
    return guarded([&] {
        need(map, "map");
        need(path, "path");
        require(width > 0 && height > 0, "map dimensions must be positive");
        const double s = save_map(std::vector<double>(map, map + static_cast<std::size_t>(width) * height), width, height, path);
        if (scale) *scale = s;
    });
}

void mn_detector_config_default(mn_detector_config* cfg) {
    if (!cfg) return;
    const DetectorConfig d;
    cfg->connection_range = d.connection_range;
    cfg->potential_min = d.potential_min;
    cfg->potential_max = d.potential_max;
    cfg->steps_per_frame = d.steps_per_frame;
    cfg->torus = d.torus ? 1 : 0;
    cfg->broadcast_count = d.broadcast_count;
}

int mn_detector_create(int width, int height, const mn_detector_config* cfg, const mn_sim_config* sim,
                       mn_detector** out) {
    return guarded([&] {
        need(out, "out");
        *out = new mn_detector{Detector(width, height, to_cpp(cfg), to_cpp(sim))};
    });
}

void mn_detector_destroy(mn_detector* d) { delete d; }

int mn_detector_run(mn_detector* d, const double* pixels, double* white, double* black, double* uncertainty) {
    return guarded([&] {
        need(d, "detector");
        const AttentionFrame a = d->det.run(frame_of(pixels, d->det.width(), d->det.height()));
        copy_out(a.white_map, white);
        copy_out(a.black_map, black);
        copy_out(a.uncertainty_map, uncertainty);
    });
}

long mn_detector_steps(const mn_detector* d) { return d ? d->det.steps() : 0; }

void mn_tracker_config_default(mn_tracker_config* cfg) {
    if (!cfg) return;
    const TrackerConfig t;
    cfg->fovea_width = t.fovea_width;
    cfg->fovea_height = t.fovea_height;
    cfg->downsample = t.downsample;
    cfg->max_step = t.max_step;
}

int mn_tracker_create(int width, int height, const mn_detector_config* dcfg, const mn_tracker_config* tcfg,
                      const mn_sim_config* sim, mn_tracker** out) {
    return guarded([&] {
        need(out, "out");
        *out = new mn_tracker{Tracker(width, height, to_cpp(dcfg), to_cpp(tcfg), to_cpp(sim))};
    });
}

void mn_tracker_destroy(mn_tracker* t) { delete t; }

int mn_tracker_periphery_size(const mn_tracker* t, int* width, int* height) {
    return guarded([&] {
        need(t, "tracker");
        if (width) *width = t->tr.periphery().width();
        if (height) *height = t->tr.periphery().height();
    });
}

int mn_tracker_step(mn_tracker* t, const double* pixels, int* gaze, int* target, double* periphery_uncertainty,
                    double* fovea_uncertainty) {
    return guarded([&] {
        need(t, "tracker");
        need(pixels, "pixels");
        const TrackStep st = t->tr.step(frame_of(pixels, t->tr.frame_width(), t->tr.frame_height()));
        if (gaze) {
            gaze[0] = st.gaze[0];
            gaze[1] = st.gaze[1];
        }
        if (target) {
            target[0] = st.target[0];
            target[1] = st.target[1];
        }
        copy_out(st.periphery.uncertainty_map, periphery_uncertainty);
        copy_out(st.fovea.uncertainty_map, fovea_uncertainty);
    });
}

int mn_synthesize(const char* problem_json, const mn_sim_config* sim, int validate_recall_flag, char** out_json) {
    return guarded([&] {
        need(problem_json, "problem_json");
        need(out_json, "out_json");
        ProblemConfig pc = problem_from_json(problem_json);
        SynthesisSolution sol = solve_weights(pc.problem, pc.initial_guess);
        nlohmann::json j;
        j["format_version"] = format_version;
        if (validate_recall_flag) j["recall"] = nlohmann::json::parse(recall_json(validate_recall(sol, pc.problem, to_cpp(sim))));
        j["solution"] = nlohmann::json::parse(to_json(sol, pc.problem.model));
        const std::string sw = scale_warning(pc.problem.model.shape);
        if (!sw.empty()) j["scale_warning"] = sw;
        *out_json = dup(j.dump(2));
    });
}

int mn_glyph_benchmark(int per_class, uint64_t seed, const mn_sim_config* sim, char** out_json) {
    return guarded([&] {
        need(out_json, "out_json");
        require(per_class >= 1, "per_class must be positive");
        const GlyphSet g = glyph_benchmark(per_class, seed);
        SynthesisProblem p;
        p.model = build_feedforward(Family::mm5, {16, 3}, true);
        p.pairs = g.train;
        for (int k = 1; k <= 16; ++k) p.unbiased_feature_units.push_back(k);
        p.aggregation = Aggregation::average;
        *out_json = dup(to_json(classify_benchmark(g.train, g.test, p, to_cpp(sim)), p.model));
    });
}

}  // extern "C"
