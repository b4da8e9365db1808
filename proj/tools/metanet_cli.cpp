#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "metanet/metanet.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_unconverged = 2;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(int status) {
    if (status != MN_OK) throw Failure(std::string(mn_status_name(status)) + ": " + mn_last_error());
}

struct CString {
    char* p = nullptr;
    ~CString() { mn_free(p); }
    std::string str() const { return p ? p : ""; }
};

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Failure("io_error: cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Failure("io_error: cannot write " + path);
    os << text;
    if (!os) throw Failure("io_error: write failed for " + path);
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Failure("internal: sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

struct Manifest {
    std::string command;
    json config;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    json to_json() const {
        json j;
        j["format_version"] = 1;
        j["command"] = command;
        j["config"] = config;
        j["config_digest"] = "sha256:" + sha256_hex(config.dump());
        j["seed"] = seed;
        j["tool_version"] = mn_version();
        j["inputs"] = json::array();
        for (const auto& p : inputs) j["inputs"].push_back({{"path", p}, {"sha256", sha256_hex(read_file(p))}});
        j["outputs"] = json::array();
        for (const auto& p : outputs) j["outputs"].push_back({{"path", p}, {"sha256", sha256_hex(read_file(p))}});
        return j;
    }
};

struct Common {
    std::string out_dir = ".";
    int threads = 1;
    bool print_config = false;
    std::string command_line;
};

std::string out_path(const Common& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

void write_manifest(const Common& c, Manifest& m) {
    m.command = c.command_line;
    const std::string path = out_path(c, "manifest.json");
    write_file(path, m.to_json().dump(2) + "\n");
    std::cerr << "manifest: " << path << "\n";
}

void prepare(const Common& c) {
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw Failure("io_error: cannot create " + c.out_dir + ": " + ec.message());
}

int integrator_code(const std::string& s) {
    if (s == "euler") return MN_EULER;
    if (s == "rk4") return MN_RK4;
    if (s == "paper-euler") return MN_PAPER_EULER;
    throw Failure("invalid_argument: unknown integrator " + s);
}

json sim_json(const mn_sim_config& sim) {
    CString s;
    check(mn_sim_config_to_json(&sim, &s.p));
    return json::parse(s.str());
}

void validate_sim(const mn_sim_config& sim) {
    CString w;
    check(mn_sim_config_validate(&sim, &w.p));
    for (const auto& msg : json::parse(w.str())) std::cerr << "warning: " << msg.get<std::string>() << "\n";
}

json detector_json(const mn_detector_config& d) {
    return {{"format_version", 1},       {"connection_range", d.connection_range}, {"potential_min", d.potential_min},
            {"potential_max", d.potential_max}, {"steps_per_frame", d.steps_per_frame}, {"torus", d.torus != 0},
            {"broadcast_count", d.broadcast_count}};
}

// ---- frames ----

std::vector<std::string> expand_inputs(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (const auto& a : args) {
        if (fs::is_directory(a)) {
            std::vector<std::string> files;
            for (const auto& e : fs::directory_iterator(a)) {
                std::string ext = e.path().extension().string();
                std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
                if (e.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(e.path().string());
            }
            std::sort(files.begin(), files.end());
            if (files.empty()) throw Failure("invalid_argument: no .pgm or .png frames in " + a);
            out.insert(out.end(), files.begin(), files.end());
        } else {
            out.push_back(a);
        }
    }
    if (out.empty()) throw Failure("invalid_argument: no input frames");
    return out;
}

struct LoadedFrame {
    int w = 0, h = 0;
    std::vector<double> px;
};

std::vector<LoadedFrame> load_frames(const std::vector<std::string>& paths) {
    std::vector<LoadedFrame> frames;
    for (const auto& p : paths) {
        LoadedFrame f;
        double* buf = nullptr;
        check(mn_frame_load(p.c_str(), &f.w, &f.h, &buf));
        f.px.assign(buf, buf + static_cast<std::size_t>(f.w) * f.h);
        mn_free(buf);
        if (!frames.empty() && (f.w != frames[0].w || f.h != frames[0].h))
            throw Failure("invalid_argument: mixed frame sizes: " + p + " is " + std::to_string(f.w) + "x" +
                          std::to_string(f.h) + ", expected " + std::to_string(frames[0].w) + "x" +
                          std::to_string(frames[0].h));
        frames.push_back(std::move(f));
    }
    return frames;
}

std::string frame_name(std::size_t i, const std::string& what) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "frame_%04zu_%s.pgm", i, what.c_str());
    return buf;
}

void save_map(const std::vector<double>& map, int w, int h, const std::string& path, Manifest& m) {
    check(mn_map_save(map.data(), w, h, path.c_str(), nullptr));
    m.outputs.push_back(path);
    m.outputs.push_back(path + ".json");
}

// ---- commands ----

struct SimulateArgs {
    std::string model, weights, inputs, family, integrator = "euler", csv;
    double dt = 0.01, eps = 1e-9;
    long steps = 100000;
    std::uint64_t seed = 0;
    int stride = 10;
};

int run_simulate(const Common& c, const SimulateArgs& a) {
    mn_sim_config sim;
    mn_sim_config_default(&sim);
    sim.dt = a.dt;
    sim.max_steps = a.steps;
    sim.integrator = integrator_code(a.integrator);
    sim.convergence_eps = a.eps;
    sim.seed = a.seed;
    sim.stride = a.stride;
    sim.threads = c.threads;
    const std::string raw_text = read_file(a.model);
    json model_text = json::parse(raw_text, nullptr, false);
    if (model_text.is_discarded() || !model_text.is_object()) {
        mn_model* probe = nullptr;
        const int st = mn_model_from_json(raw_text.c_str(), &probe);
        mn_model_destroy(probe);
        throw Failure(std::string(mn_status_name(st == MN_OK ? MN_PARSE_ERROR : st)) + ": " + a.model + ": " +
                      (st == MN_OK ? "expected a JSON object" : mn_last_error()));
    }
    if (!a.family.empty()) {
        if (model_text.contains("motif")) throw Failure("invalid_argument: --family does not apply to motif files");
        model_text["family"] = a.family;
    }
    json cfg{{"simulation", sim_json(sim)}, {"model", a.model}, {"family", a.family}};
    if (c.print_config) {
        std::cout << cfg.dump(2) << "\n";
        return exit_ok;
    }
    validate_sim(sim);
    prepare(c);
    mn_model* raw = nullptr;
    const std::string text = model_text.dump();
    int st = mn_model_from_json(text.c_str(), &raw);
    if (st != MN_OK) throw Failure(std::string(mn_status_name(st)) + ": " + a.model + ": " + mn_last_error());
    std::unique_ptr<mn_model, decltype(&mn_model_destroy)> model(raw, mn_model_destroy);
    Manifest man;
    man.config = cfg;
    man.seed = a.seed;
    man.inputs.push_back(a.model);
    if (!a.weights.empty()) {
        check(mn_model_apply_weights_json(model.get(), read_file(a.weights).c_str()));
        man.inputs.push_back(a.weights);
    }
    if (!a.inputs.empty()) {
        check(mn_model_apply_inputs_json(model.get(), read_file(a.inputs).c_str()));
        man.inputs.push_back(a.inputs);
    }
    mn_trajectory* traj_raw = nullptr;
    check(mn_simulate(model.get(), &sim, &traj_raw));
    std::unique_ptr<mn_trajectory, decltype(&mn_trajectory_destroy)> traj(traj_raw, mn_trajectory_destroy);
    const std::string csv = a.csv.empty() ? out_path(c, "trajectory.csv") : a.csv;
    check(mn_trajectory_write_csv(traj.get(), model.get(), csv.c_str()));
    man.outputs.push_back(csv);
    write_manifest(c, man);

    const std::size_t n = mn_model_size(model.get());
    std::vector<double> last(n);
    double t = 0.0;
    check(mn_trajectory_row(traj.get(), mn_trajectory_rows(traj.get()) - 1, &t, last.data(), n));
    json summary;
    summary["converged"] = mn_trajectory_converged(traj.get()) == 1;
    summary["steps"] = mn_trajectory_steps(traj.get());
    summary["time"] = t;
    summary["residual"] = mn_trajectory_residual(traj.get());
    json fin = json::object();
    for (std::size_t v = 0; v < n; ++v) {
        CString label;
        check(mn_model_label(model.get(), v, &label.p));
        fin[label.str()] = last[v];
    }
    summary["final"] = fin;
    std::cout << summary.dump(2) << "\n";
    return mn_trajectory_converged(traj.get()) ? exit_ok : exit_unconverged;
}

struct MotifArgs {
    std::string name, params;
    bool verify = false;
    double tolerance = 1e-6;
    std::string integrator = "rk4";
    double dt = 1e-3;
    double eps = 1e-9;
    long steps = 200000;
};

// A params file holding a "model" describes a whole network; its equilibrium is found by simulation.
int run_network_motif(const Common& c, const MotifArgs& a, const json& params, Manifest& man, mn_sim_config& sim) {
    json mj = params["model"];
    if (!mj.contains("format_version")) mj["format_version"] = 1;
    mn_model* raw = nullptr;
    check(mn_model_from_json(mj.dump().c_str(), &raw));
    std::unique_ptr<mn_model, decltype(&mn_model_destroy)> model(raw, mn_model_destroy);
    mn_trajectory* tr = nullptr;
    check(mn_simulate(model.get(), &sim, &tr));
    std::unique_ptr<mn_trajectory, decltype(&mn_trajectory_destroy)> traj(tr, mn_trajectory_destroy);
    const std::size_t n = mn_model_size(model.get());
    std::vector<double> last(n);
    check(mn_trajectory_row(traj.get(), mn_trajectory_rows(traj.get()) - 1, nullptr, last.data(), n));
    json coords = json::array();
    for (std::size_t v = 0; v < n; ++v) {
        CString label;
        check(mn_model_label(model.get(), v, &label.p));
        coords.push_back(label.str());
    }
    json out;
    out["format_version"] = 1;
    out["motif"] = a.name;
    out["kind"] = "point";
    out["coordinates"] = coords;
    json outputs = json::array();
    if (params.contains("report")) {
        for (const auto& label : params["report"]) {
            auto it = std::find(coords.begin(), coords.end(), label);
            if (it == coords.end()) throw Failure("invalid_argument: report label " + label.dump() + " not in model");
            outputs.push_back(last[static_cast<std::size_t>(it - coords.begin())]);
        }
    }
    out["points"] = json::array({{{"label", "simulated"},
                                  {"state", last},
                                  {"empirical", true},
                                  {"converged", mn_trajectory_converged(traj.get()) == 1},
                                  {"residual", mn_trajectory_residual(traj.get())},
                                  {"report", outputs}}});
    const std::string path = out_path(c, "equilibria.json");
    write_file(path, out.dump(2) + "\n");
    man.outputs.push_back(path);
    write_manifest(c, man);
    std::cout << out.dump(2) << "\n";
    return mn_trajectory_converged(traj.get()) ? exit_ok : exit_unconverged;
}

int run_motif(const Common& c, const MotifArgs& a) {
    mn_sim_config sim;
    mn_sim_config_default(&sim);
    sim.integrator = integrator_code(a.integrator);
    sim.dt = a.dt;
    sim.max_steps = a.steps;
    sim.convergence_eps = a.eps;
    sim.threads = c.threads;
    json params;
    std::string motif_text;
    if (a.params.empty()) {
        CString d;
        check(mn_motif_default_json(a.name.c_str(), &d.p));
        motif_text = d.str();
    } else {
        const std::string raw = read_file(a.params);
        params = json::parse(raw, nullptr, false);
        if (params.is_discarded() || !params.is_object())
            throw Failure("parse_error: " + a.params + ": expected a JSON object");
        if (!params.contains("model")) {
            json m = params;
            if (!m.contains("kind")) m["kind"] = a.name;
            if (m["kind"] != a.name)
                throw Failure("invalid_argument: " + a.params + " describes motif " + m["kind"].dump() + ", not " + a.name);
            if (!m.contains("format_version")) m["format_version"] = 1;
            CString d;
            check(mn_motif_default_json(a.name.c_str(), &d.p));
            json full = json::parse(d.str());
            if (m.contains("parameters")) {
                if (!m["parameters"].is_object()) throw Failure("parse_error: " + a.params + ": 'parameters' must be an object");
                full["parameters"].update(m["parameters"]);
            }
            m["parameters"] = full["parameters"];
            motif_text = m.dump();
        }
    }
    json cfg{{"motif", a.name}, {"params", a.params}, {"verify", a.verify}, {"tolerance", a.tolerance},
             {"simulation", sim_json(sim)}};
    if (c.print_config) {
        std::cout << cfg.dump(2) << "\n";
        return exit_ok;
    }
    validate_sim(sim);
    prepare(c);
    Manifest man;
    man.config = cfg;
    if (!a.params.empty()) man.inputs.push_back(a.params);
    if (params.contains("model")) return run_network_motif(c, a, params, man, sim);

    CString eq;
    check(mn_motif_equilibria(motif_text.c_str(), &eq.p));
    const std::string eq_path = out_path(c, "equilibria.json");
    write_file(eq_path, eq.str() + "\n");
    man.outputs.push_back(eq_path);
    std::cout << eq.str() << "\n";
    int code = exit_ok;
    if (a.verify) {
        CString rep;
        int passed = 0;
        check(mn_motif_verify(motif_text.c_str(), &sim, a.tolerance, &rep.p, &passed));
        const std::string rep_path = out_path(c, "verify.json");
        write_file(rep_path, rep.str() + "\n");
        man.outputs.push_back(rep_path);
        std::cerr << "verification " << (passed ? "passed" : "failed") << ": " << rep_path << "\n";
        if (!passed) code = exit_unconverged;
    }
    write_manifest(c, man);
    return code;
}

struct DetectArgs {
    std::vector<std::string> inputs;
    mn_detector_config det{};
    std::string integrator = "paper-euler";
    double dt = 0.01;
    bool uncertainty_only = false;
    bool no_torus = false;
};

void fill_sim_for_vision(mn_sim_config& sim, const std::string& integrator, double dt, int threads) {
    mn_sim_config_default(&sim);
    sim.integrator = integrator_code(integrator);
    sim.dt = dt;
    sim.threads = threads;
}

int run_detect(const Common& c, DetectArgs a) {
    mn_sim_config sim;
    fill_sim_for_vision(sim, a.integrator, a.dt, c.threads);
    if (a.no_torus) a.det.torus = 0;
    json cfg{{"detector", detector_json(a.det)}, {"simulation", sim_json(sim)}, {"uncertainty_only", a.uncertainty_only}};
    if (c.print_config) {
        std::cout << cfg.dump(2) << "\n";
        return exit_ok;
    }
    const auto paths = expand_inputs(a.inputs);
    const auto frames = load_frames(paths);
    prepare(c);
    const int w = frames[0].w, h = frames[0].h;
    mn_detector* raw = nullptr;
    check(mn_detector_create(w, h, &a.det, &sim, &raw));
    std::unique_ptr<mn_detector, decltype(&mn_detector_destroy)> det(raw, mn_detector_destroy);
    Manifest man;
    man.config = cfg;
    man.inputs = paths;
    const std::size_t P = static_cast<std::size_t>(w) * h;
    std::vector<double> white(P), black(P), unc(P), potential(P);
    json summary = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        check(mn_detector_run(det.get(), frames[i].px.data(), white.data(), black.data(), unc.data()));
        for (std::size_t p = 0; p < P; ++p) potential[p] = white[p] + black[p];
        save_map(unc, w, h, out_path(c, frame_name(i, "uncertainty")), man);
        if (!a.uncertainty_only) {
            save_map(white, w, h, out_path(c, frame_name(i, "white")), man);
            save_map(black, w, h, out_path(c, frame_name(i, "black")), man);
        }
        summary.push_back({{"frame", paths[i]},
                           {"step", mn_detector_steps(det.get())},
                           {"max_uncertainty", *std::max_element(unc.begin(), unc.end())},
                           {"max_output", *std::max_element(potential.begin(), potential.end())}});
    }
    write_manifest(c, man);
    std::cout << summary.dump(2) << "\n";
    return exit_ok;
}

struct TrackArgs {
    std::vector<std::string> inputs;
    mn_detector_config det{};
    mn_tracker_config tr{};
    std::string fovea;
    std::string integrator = "paper-euler";
    double dt = 0.01;
};

int run_track(const Common& c, TrackArgs a) {
    mn_sim_config sim;
    fill_sim_for_vision(sim, a.integrator, a.dt, c.threads);
    if (!a.fovea.empty()) {
        int fw = 0, fh = 0;
        char x = 0, extra = 0;
        if (std::sscanf(a.fovea.c_str(), "%d%c%d%c", &fw, &x, &fh, &extra) != 3 || (x != 'x' && x != 'X'))
            throw Failure("invalid_argument: --fovea expects WxH, got " + a.fovea);
        a.tr.fovea_width = fw;
        a.tr.fovea_height = fh;
    }
    json cfg{{"detector", detector_json(a.det)},
             {"tracker",
              {{"fovea_width", a.tr.fovea_width},
               {"fovea_height", a.tr.fovea_height},
               {"downsample", a.tr.downsample},
               {"max_step", a.tr.max_step}}},
             {"simulation", sim_json(sim)}};
    if (c.print_config) {
        std::cout << cfg.dump(2) << "\n";
        return exit_ok;
    }
    const auto paths = expand_inputs(a.inputs);
    const auto frames = load_frames(paths);
    prepare(c);
    const int w = frames[0].w, h = frames[0].h;
    mn_tracker* raw = nullptr;
    check(mn_tracker_create(w, h, &a.det, &a.tr, &sim, &raw));
    std::unique_ptr<mn_tracker, decltype(&mn_tracker_destroy)> tr(raw, mn_tracker_destroy);
    int pw = 0, ph = 0;
    check(mn_tracker_periphery_size(tr.get(), &pw, &ph));
    Manifest man;
    man.config = cfg;
    man.inputs = paths;
    std::vector<double> per(static_cast<std::size_t>(pw) * ph),
        fov(static_cast<std::size_t>(a.tr.fovea_width) * a.tr.fovea_height);
    json steps = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        int gaze[2], target[2];
        check(mn_tracker_step(tr.get(), frames[i].px.data(), gaze, target, per.data(), fov.data()));
        save_map(per, pw, ph, out_path(c, frame_name(i, "periphery")), man);
        save_map(fov, a.tr.fovea_width, a.tr.fovea_height, out_path(c, frame_name(i, "fovea")), man);
        steps.push_back({{"frame", paths[i]}, {"gaze", {gaze[0], gaze[1]}}, {"target", {target[0], target[1]}}});
    }
    json out{{"format_version", 1},
             {"width", w},
             {"height", h},
             {"fovea", {a.tr.fovea_width, a.tr.fovea_height}},
             {"frames", steps}};
    const std::string path = out_path(c, "gaze.json");
    write_file(path, out.dump(2) + "\n");
    man.outputs.push_back(path);
    write_manifest(c, man);
    std::cout << out.dump(2) << "\n";
    return exit_ok;
}

struct SynthArgs {
    std::string pairs;
    bool validate = false;
    bool glyph = false;
    int per_class = 5;
    std::uint64_t seed = 7;
    std::string integrator = "rk4";
    double dt = 0.01;
    long steps = 200000;
};

int run_synth(const Common& c, const SynthArgs& a) {
    mn_sim_config sim;
    mn_sim_config_default(&sim);
    sim.integrator = integrator_code(a.integrator);
    sim.dt = a.dt;
    sim.max_steps = a.steps;
    sim.seed = a.seed;
    sim.threads = c.threads;
    if (a.glyph == !a.pairs.empty())
        throw Failure("invalid_argument: give either a pairs file or --glyph-benchmark");
    json cfg{{"pairs", a.pairs}, {"validate", a.validate}, {"glyph_benchmark", a.glyph}, {"simulation", sim_json(sim)}};
    if (a.glyph) {
        cfg["per_class"] = a.per_class;
        cfg["seed"] = a.seed;
    }
    if (c.print_config) {
        std::cout << cfg.dump(2) << "\n";
        return exit_ok;
    }
    validate_sim(sim);
    prepare(c);
    Manifest man;
    man.config = cfg;
    man.seed = a.seed;
    if (a.glyph) {
        CString rep;
        check(mn_glyph_benchmark(a.per_class, a.seed, &sim, &rep.p));
        const std::string path = out_path(c, "benchmark.json");
        write_file(path, rep.str() + "\n");
        man.outputs.push_back(path);
        write_manifest(c, man);
        const json r = json::parse(rep.str());
        std::cout << json{{"accuracy", r["accuracy"]}, {"chance", r["chance"]}, {"report", path}}.dump(2) << "\n";
        return exit_ok;
    }
    man.inputs.push_back(a.pairs);
    CString out;
    const int st = mn_synthesize(read_file(a.pairs).c_str(), &sim, a.validate ? 1 : 0, &out.p);
    if (st != MN_OK) throw Failure(std::string(mn_status_name(st)) + ": " + a.pairs + ": " + mn_last_error());
    const json r = json::parse(out.str());
    const std::string wpath = out_path(c, "weights.json");
    write_file(wpath, r["solution"].dump(2) + "\n");
    man.outputs.push_back(wpath);
    if (r.contains("recall")) {
        const std::string rpath = out_path(c, "recall.json");
        write_file(rpath, json{{"format_version", 1}, {"pairs", r["recall"]}}.dump(2) + "\n");
        man.outputs.push_back(rpath);
    }
    write_manifest(c, man);
    if (r.contains("scale_warning")) std::cerr << "warning: " << r["scale_warning"].get<std::string>() << "\n";
    for (const auto& w : r["solution"]["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
    json summary{{"success", r["solution"]["success"]},
                 {"residual", r["solution"]["residual"]},
                 {"iterations", r["solution"]["iterations"]},
                 {"weights", wpath}};
    if (r.contains("recall")) summary["recall"] = r["recall"];
    std::cout << summary.dump(2) << "\n";
    return r["solution"]["success"].get<bool>() ? exit_ok : exit_unconverged;
}

int run_check(const std::string& path) {
    const json m = json::parse(read_file(path), nullptr, false);
    if (m.is_discarded() || !m.is_object()) throw Failure("parse_error: " + path + ": not a JSON object");
    if (m.value("format_version", 0) != 1) throw Failure("parse_error: " + path + ": unsupported format_version");
    bool ok = m["config_digest"] == "sha256:" + sha256_hex(m["config"].dump());
    if (!ok) std::cerr << "config digest mismatch\n";
    for (const char* key : {"inputs", "outputs"})
        for (const auto& e : m[key]) {
            const std::string p = e["path"];
            std::string have;
            try {
                have = sha256_hex(read_file(p));
            } catch (const Failure& f) {
                std::cerr << f.what() << "\n";
                ok = false;
                continue;
            }
            if (have != e["sha256"]) {
                std::cerr << "digest mismatch: " << p << "\n";
                ok = false;
            }
        }
    std::cout << (ok ? "manifest ok" : "manifest mismatch") << "\n";
    return ok ? exit_ok : exit_error;
}

void add_detector_flags(CLI::App* sub, mn_detector_config& d, std::string& integrator, double& dt) {
    mn_detector_config_default(&d);
    sub->add_option("--range", d.connection_range, "connection range in pixels")->capture_default_str();
    sub->add_option("--pmin", d.potential_min, "lower bound of the active potential range")->capture_default_str();
    sub->add_option("--pmax", d.potential_max, "upper bound of the active potential range")->capture_default_str();
    sub->add_option("--steps-per-frame", d.steps_per_frame, "integration steps per frame")->capture_default_str();
    sub->add_option("--broadcast-count", d.broadcast_count, "outputs in range needed to count as broadcasting")
        ->capture_default_str();
    sub->add_option("--integrator", integrator, "euler or paper-euler")->capture_default_str();
    sub->add_option("--dt", dt, "step size for euler")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metanet: metanetwork simulation, analysis and synthesis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mn_version()));
    Common common;
    for (int i = 0; i < argc; ++i) common.command_line += (i ? " " : "") + std::string(argv[i]);
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-o,--out-dir", common.out_dir, "directory for outputs and manifest")->capture_default_str();
        sub->add_option("--threads", common.threads, "worker threads")->capture_default_str();
        sub->add_flag("--print-config", common.print_config, "print the effective configuration and exit");
    };

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "integrate a model and write its trajectory");
    sim->add_option("model", sa.model, "model file")->required();
    sim->add_option("--weights", sa.weights, "weights file");
    sim->add_option("--inputs", sa.inputs, "external input file");
    sim->add_option("--family", sa.family, "override the model family");
    sim->add_option("--dt", sa.dt)->capture_default_str();
    sim->add_option("--steps", sa.steps, "maximum steps")->capture_default_str();
    sim->add_option("--integrator", sa.integrator, "euler, rk4 or paper-euler")->capture_default_str();
    sim->add_option("--eps", sa.eps, "convergence threshold")->capture_default_str();
    sim->add_option("--seed", sa.seed)->capture_default_str();
    sim->add_option("--stride", sa.stride, "record every n-th step")->capture_default_str();
    sim->add_option("--csv", sa.csv, "trajectory path (default <out-dir>/trajectory.csv)");
    add_common(sim);

    MotifArgs ma;
    auto* mot = app.add_subcommand("motif", "closed-form motif equilibria");
    mot->add_option("name", ma.name, "broadcast, meta, feedback, competitive_meta or competitive_feedback")->required();
    mot->add_option("--params", ma.params, "parameter file");
    mot->add_flag("--verify", ma.verify, "check the closed forms against simulation");
    mot->add_option("--tolerance", ma.tolerance)->capture_default_str();
    mot->add_option("--integrator", ma.integrator)->capture_default_str();
    mot->add_option("--dt", ma.dt)->capture_default_str();
    mot->add_option("--steps", ma.steps)->capture_default_str();
    mot->add_option("--eps", ma.eps, "convergence threshold")->capture_default_str();
    add_common(mot);

    DetectArgs da;
    auto* det = app.add_subcommand("detect", "run the feature detector over frames");
    det->add_option("inputs", da.inputs, "frames or directories of frames")->required();
    add_detector_flags(det, da.det, da.integrator, da.dt);
    det->add_flag("--uncertainty", da.uncertainty_only, "write only the uncertainty maps");
    det->add_flag("--no-torus", da.no_torus, "use open borders");
    add_common(det);

    TrackArgs ta;
    auto* trk = app.add_subcommand("track", "foveated tracking over a frame sequence");
    trk->add_option("inputs", ta.inputs, "frames or directories of frames")->required();
    add_detector_flags(trk, ta.det, ta.integrator, ta.dt);
    mn_tracker_config_default(&ta.tr);
    trk->add_option("--fovea", ta.fovea, "fovea size WxH");
    trk->add_option("--downsample", ta.tr.downsample, "periphery downsampling factor")->capture_default_str();
    trk->add_option("--max-step", ta.tr.max_step, "largest gaze move per frame")->capture_default_str();
    add_common(trk);

    SynthArgs ya;
    auto* syn = app.add_subcommand("synth", "solve weights for input/output pairs");
    syn->add_option("pairs", ya.pairs, "pairs file");
    syn->add_flag("--validate", ya.validate, "simulate every pair and report recall");
    syn->add_flag("--glyph-benchmark", ya.glyph, "run the 3-class glyph benchmark");
    syn->add_option("--per-class", ya.per_class)->capture_default_str();
    syn->add_option("--seed", ya.seed)->capture_default_str();
    syn->add_option("--integrator", ya.integrator)->capture_default_str();
    syn->add_option("--dt", ya.dt)->capture_default_str();
    syn->add_option("--steps", ya.steps)->capture_default_str();
    add_common(syn);

    std::string manifest;
    auto* chk = app.add_subcommand("check", "recompute the digests recorded in a manifest");
    chk->add_option("manifest", manifest)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_error;
    }
    try {
        if (*sim) return run_simulate(common, sa);
        if (*mot) return run_motif(common, ma);
        if (*det) return run_detect(common, da);
        if (*trk) return run_track(common, ta);
        if (*syn) return run_synth(common, ya);
        if (*chk) return run_check(manifest);
    } catch (const Failure& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return exit_error;
}
