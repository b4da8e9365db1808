#include "metanet/config.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace metanet {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    fail(ErrorCode::parse_error, where + ": " + what);
}

json parse(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::parse_error, what + ": " + e.what());
    }
}

void check_version(const json& j, const std::string& what, bool required = true) {
    if (!j.contains("format_version")) {
        if (required) bad(what, "missing format_version");
        return;
    }
    const json& v = j["format_version"];
    if (!v.is_number_integer() || v.get<int>() != format_version)
        bad(what + "/format_version", "unsupported version " + v.dump());
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number, got " + j.dump());
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(where, "value must be finite");
    return v;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where, "expected an integer, got " + j.dump());
    return j.get<int>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) bad(where, "expected true or false, got " + j.dump());
    return j.get<bool>();
}

template <class F>
void for_labels(const json& obj, const std::string& where, F&& f) {
    if (!obj.is_object()) bad(where, "expected an object keyed by variable label");
    for (auto it = obj.begin(); it != obj.end(); ++it) f(it.key(), it.value(), where + "/" + it.key());
}

void set_weights(ModelConfig& m, const json& obj, const std::string& where) {
    for_labels(obj, where, [&](const std::string& label, const json& v, const std::string& at) {
        std::size_t var;
        try {
            var = variable_by_label(m.spec, label);
        } catch (const Error& e) {
            bad(at, e.what());
        }
        m.weights.weight[var] = number(v, at);
    });
}

void set_inputs(ModelConfig& m, const json& arr, const std::string& where) {
    if (!arr.is_array()) bad(where, "expected an array of external inputs");
    if (arr.size() != static_cast<std::size_t>(m.spec.shape.n_inputs))
        bad(where, "expected " + std::to_string(m.spec.shape.n_inputs) + " inputs, got " + std::to_string(arr.size()));
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const double v = number(arr[k], where + "/" + std::to_string(k));
        if (v < 0.0) bad(where + "/" + std::to_string(k), "external inputs must be nonnegative");
        set_input(m.spec, static_cast<int>(k) + 1, v);
    }
}

ModelSpec build_from(const json& j, const std::string& where) {
    if (!j.contains("family") || !j["family"].is_string()) bad(where, "needs a string 'family'");
    Family fam;
    try {
        fam = family_from_string(j["family"].get<std::string>());
    } catch (const Error& e) {
        bad(where + "/family", e.what());
    }
    NetworkShape shape;
    if (!j.contains("shape") || !j["shape"].is_object()) bad(where, "needs a 'shape' object with inputs and outputs");
    shape.n_inputs = integer(j["shape"].value("inputs", json()), where + "/shape/inputs");
    shape.n_outputs = integer(j["shape"].value("outputs", json()), where + "/shape/outputs");
    try {
        validate(shape);
    } catch (const Error& e) {
        bad(where + "/shape", e.what());
    }
    if (is_feedforward_family(fam)) {
        const bool metas = j.contains("metaconnections") ? boolean(j["metaconnections"], where + "/metaconnections") : true;
        return build_feedforward(fam, shape, metas);
    }
    if (fam == Family::mm12) return build_paired(shape);
    if (fam == Family::mm100) return build_fully_recurrent(shape);
    RecurrentTopology t;
    if (j.contains("topology")) {
        const json& tj = j["topology"];
        if (!tj.is_object()) bad(where + "/topology", "expected an object");
        for (auto it = tj.begin(); it != tj.end(); ++it) {
            const std::string at = where + "/topology/" + it.key();
            if (it.key() == "forward_meta") t.forward_meta = boolean(it.value(), at);
            else if (it.key() == "lateral") t.lateral = boolean(it.value(), at);
            else if (it.key() == "feedback") t.feedback = boolean(it.value(), at);
            else if (it.key() == "feedback_meta") t.feedback_meta = boolean(it.value(), at);
            else bad(at, "unknown topology flag");
        }
    }
    return build_recurrent(fam, shape, t);
}

ModelConfig model_from(const json& j, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    ModelConfig m;
    if (j.contains("motif")) {
        try {
            const json& mj = j["motif"];
            if (!mj.is_object() || !mj.contains("kind") || !mj["kind"].is_string()) bad(where + "/motif", "needs a string 'kind'");
            json full = json::parse(to_json(default_motif(motif_kind_from_string(mj["kind"].get<std::string>()))));
            if (mj.contains("parameters")) {
                if (!mj["parameters"].is_object()) bad(where + "/motif/parameters", "expected an object");
                full["parameters"].update(mj["parameters"]);
            }
            m.motif = motif_from_json(full.dump());
        } catch (const Error& e) {
            bad(where + "/motif", e.what());
        }
        MotifModel mm = build_motif(*m.motif);
        m.spec = std::move(mm.spec);
        m.weights = std::move(mm.weights);
        m.initial = zero_state(m.spec);
        for (std::size_t v : m.spec.inputs()) m.initial.values[v] = m.spec.external_input[v];
    } else {
        m.spec = build_from(j, where);
        if (j.contains("activation")) {
            const json& a = j["activation"];
            if (!a.is_object()) bad(where + "/activation", "expected an object");
            ActivationParams p;
            if (a.contains("variant")) {
                if (!a["variant"].is_string()) bad(where + "/activation/variant", "expected a string");
                try {
                    p.variant = activation_from_string(a["variant"].get<std::string>());
                } catch (const Error& e) {
                    bad(where + "/activation/variant", e.what());
                }
            }
            if (a.contains("alpha")) p.alpha = number(a["alpha"], where + "/activation/alpha");
            m.spec.activation = p;
        }
        if (j.contains("tau_r")) m.spec.tau_r = number(j["tau_r"], where + "/tau_r");
        const double w0 = j.contains("default_weight") ? number(j["default_weight"], where + "/default_weight") : 1.0;
        m.weights = default_weights(m.spec, w0);
        m.initial = zero_state(m.spec);
    }
    if (j.contains("inputs")) {
        set_inputs(m, j["inputs"], where + "/inputs");
        if (m.motif)
            for (std::size_t v : m.spec.inputs()) m.initial.values[v] = m.spec.external_input[v];
    }
    if (j.contains("weights")) set_weights(m, j["weights"], where + "/weights");
    if (j.contains("initial_state")) {
        const json& s = j["initial_state"];
        const std::string at = where + "/initial_state";
        if (s.is_array()) {
            if (s.size() != m.spec.size()) bad(at, "expected " + std::to_string(m.spec.size()) + " values");
            for (std::size_t v = 0; v < s.size(); ++v) m.initial.values[v] = number(s[v], at + "/" + std::to_string(v));
        } else {
            for_labels(s, at, [&](const std::string& label, const json& v, const std::string& a2) {
                std::size_t var;
                try {
                    var = variable_by_label(m.spec, label);
                } catch (const Error& e) {
                    bad(a2, e.what());
                }
                m.initial.values[var] = number(v, a2);
            });
        }
    }
    try {
        validate(m.spec, m.weights);
        validate(m.spec, m.initial);
    } catch (const Error& e) {
        bad(where, e.what());
    }
    return m;
}

}  // namespace

std::size_t variable_by_label(const ModelSpec& spec, const std::string& label) {
    for (std::size_t v = 0; v < spec.size(); ++v)
        if (spec.label(v) == label) return v;
    fail(ErrorCode::invalid_argument, "no variable labelled '" + label + "'");
}

ModelConfig model_from_json(const std::string& text) {
    const json j = parse(text, "model file");
    if (j.is_object()) check_version(j, "model file");
    return model_from(j, "model file");
}

void apply_weights_json(ModelConfig& m, const std::string& text) {
    const json j = parse(text, "weights file");
    if (!j.is_object()) bad("weights file", "expected an object");
    check_version(j, "weights file");
    if (!j.contains("weights")) bad("weights file", "missing 'weights'");
    set_weights(m, j["weights"], "weights file/weights");
    validate(m.spec, m.weights);
}

void apply_inputs_json(ModelConfig& m, const std::string& text) {
    const json j = parse(text, "input file");
    if (!j.is_object()) bad("input file", "expected an object");
    check_version(j, "input file");
    if (!j.contains("inputs")) bad("input file", "missing 'inputs'");
    set_inputs(m, j["inputs"], "input file/inputs");
    if (m.motif)
        for (std::size_t v : m.spec.inputs()) m.initial.values[v] = m.spec.external_input[v];
}

std::string to_json(const SimulationConfig& c) {
    json j;
    j["format_version"] = format_version;
    j["tau_r"] = c.tau_r;
    j["tau_w"] = c.tau_w;
    j["dt"] = c.dt;
    j["max_steps"] = c.max_steps;
    j["convergence_eps"] = c.convergence_eps;
    j["denominator_guard"] = c.denominator_guard;
    j["seed"] = c.seed;
    j["integrator"] = to_string(c.integrator);
    j["window"] = c.window;
    j["stride"] = c.stride;
    j["ceiling"] = c.ceiling;
    j["threads"] = c.threads;
    return j.dump(2);
}

SimulationConfig sim_config_from_json(const std::string& text) {
    const json j = parse(text, "simulation config");
    if (!j.is_object()) bad("simulation config", "expected an object");
    check_version(j, "simulation config");
    SimulationConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        const std::string at = "simulation config/" + k;
        if (k == "format_version") continue;
        if (k == "tau_r") c.tau_r = number(v, at);
        else if (k == "tau_w") c.tau_w = number(v, at);
        else if (k == "dt") c.dt = number(v, at);
        else if (k == "max_steps") c.max_steps = integer(v, at);
        else if (k == "convergence_eps") c.convergence_eps = number(v, at);
        else if (k == "denominator_guard") c.denominator_guard = number(v, at);
        else if (k == "seed") {
            if (!v.is_number_unsigned()) bad(at, "expected a nonnegative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (k == "integrator") {
            if (!v.is_string()) bad(at, "expected a string");
            c.integrator = integrator_from_string(v.get<std::string>());
        } else if (k == "window") c.window = integer(v, at);
        else if (k == "stride") c.stride = integer(v, at);
        else if (k == "ceiling") c.ceiling = number(v, at);
        else if (k == "threads") c.threads = integer(v, at);
        else bad(at, "unknown key");
    }
    validate(c);
    return c;
}

std::string to_json(const DetectorConfig& c) {
    json j;
    j["format_version"] = format_version;
    j["connection_range"] = c.connection_range;
    j["potential_min"] = c.potential_min;
    j["potential_max"] = c.potential_max;
    j["steps_per_frame"] = c.steps_per_frame;
    j["torus"] = c.torus;
    j["broadcast_count"] = c.broadcast_count;
    return j.dump(2);
}

std::string to_json(const TrackerConfig& c) {
    json j;
    j["format_version"] = format_version;
    j["fovea_width"] = c.fovea_width;
    j["fovea_height"] = c.fovea_height;
    j["downsample"] = c.downsample;
    j["max_step"] = c.max_step;
    return j.dump(2);
}

ProblemConfig problem_from_json(const std::string& text) {
    const json j = parse(text, "pairs file");
    ProblemConfig pc;
    SynthesisProblem& p = pc.problem;
    p.pairs = pairs_from_json(text);
    if (p.pairs.empty()) bad("pairs file", "no training pairs");
    const std::string w = "pairs file";
    if (j.is_object()) {
        check_version(j, w);
        for (auto it = j.begin(); it != j.end(); ++it) {
            static const char* known[] = {"format_version", "pairs",          "model",          "unbiased",
                                          "aggregation",    "fixed_weights",  "nonneg_weights", "residual_tol",
                                          "max_iterations", "initial_guess"};
            if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
                bad(w + "/" + it.key(), "unknown key");
        }
    }
    const auto N = static_cast<int>(p.pairs[0].input.size()), M = static_cast<int>(p.pairs[0].output.size());
    ModelConfig model;
    if (j.is_object() && j.contains("model")) {
        json mj = j["model"];
        if (mj.is_object() && !mj.contains("format_version")) mj["format_version"] = format_version;
        model = model_from(mj, w + "/model");
    } else {
        if (N < 1 || M < 1) bad(w, "pairs need nonempty input and output");
        model.spec = build_feedforward(Family::mm5, {N, M}, true);
        model.weights = default_weights(model.spec, 1.0);
    }
    p.model = model.spec;
    if (!j.is_object()) return pc;
    if (j.contains("unbiased")) {
        const json& u = j["unbiased"];
        if (!u.is_array()) bad(w + "/unbiased", "expected an array of 1-based input indices");
        for (std::size_t i = 0; i < u.size(); ++i) p.unbiased_feature_units.push_back(integer(u[i], w + "/unbiased/" + std::to_string(i)));
    }
    if (j.contains("aggregation")) {
        const json& a = j["aggregation"];
        if (a == "average") p.aggregation = Aggregation::average;
        else if (a == "stacked") p.aggregation = Aggregation::stacked;
        else bad(w + "/aggregation", "expected \"average\" or \"stacked\"");
    }
    if (j.contains("fixed_weights"))
        for_labels(j["fixed_weights"], w + "/fixed_weights", [&](const std::string& label, const json& v, const std::string& at) {
            try {
                p.fixed_weights[variable_by_label(p.model, label)] = number(v, at);
            } catch (const Error& e) {
                bad(at, e.what());
            }
        });
    if (j.contains("nonneg_weights")) p.nonneg_weights = boolean(j["nonneg_weights"], w + "/nonneg_weights");
    if (j.contains("residual_tol")) p.residual_tol = number(j["residual_tol"], w + "/residual_tol");
    if (j.contains("max_iterations")) p.max_iterations = integer(j["max_iterations"], w + "/max_iterations");
    if (j.contains("initial_guess")) {
        const json& g = j["initial_guess"];
        if (!g.is_array()) bad(w + "/initial_guess", "expected an array over the unknowns");
        for (std::size_t i = 0; i < g.size(); ++i) pc.initial_guess.push_back(number(g[i], w + "/initial_guess/" + std::to_string(i)));
    }
    return pc;
}

std::string recall_json(const std::vector<RecallRecord>& r) {
    json arr = json::array();
    for (const auto& x : r) {
        json e;
        e["outputs"] = x.outputs;
        e["error"] = std::isfinite(x.error) ? json(x.error) : json();
        e["converged"] = x.converged;
        e["message"] = x.message;
        arr.push_back(e);
    }
    return arr.dump(2);
}

std::string to_json(const BenchmarkReport& r, const ModelSpec& spec) {
    json j;
    j["format_version"] = format_version;
    j["accuracy"] = r.accuracy;
    j["chance"] = r.expected.empty() ? 0.0 : 1.0 / static_cast<double>(spec.shape.n_outputs);
    j["mean_recall_error"] = std::isfinite(r.mean_recall_error) ? json(r.mean_recall_error) : json();
    j["used_pairs"] = r.used_pairs;
    j["predicted"] = r.predicted;
    j["expected"] = r.expected;
    j["warnings"] = r.warnings;
    j["solution"] = json::parse(to_json(r.solution, spec));
    return j.dump(2);
}

}  // namespace metanet
