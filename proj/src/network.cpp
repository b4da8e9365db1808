#include "metanet/network.hpp"

#include <cmath>

namespace metanet {

std::string to_string(Family f) {
    switch (f) {
        case Family::mm1: return "mm1";
        case Family::mm2: return "mm2";
        case Family::mm3: return "mm3";
        case Family::mm4: return "mm4";
        case Family::mm5: return "mm5";
        case Family::mm11: return "mm11";
        case Family::mm12: return "mm12";
        case Family::mm13: return "mm13";
        case Family::mm100: return "mm100";
    }
    return "mm5";
}

Family family_from_string(const std::string& s) {
    for (Family f : {Family::mm1, Family::mm2, Family::mm3, Family::mm4, Family::mm5, Family::mm11, Family::mm12,
                     Family::mm13, Family::mm100})
        if (to_string(f) == s) return f;
    fail(ErrorCode::invalid_argument, "unknown family '" + s + "'");
}

bool is_feedforward_family(Family f) {
    return f == Family::mm1 || f == Family::mm2 || f == Family::mm3 || f == Family::mm4 || f == Family::mm5;
}

std::string to_string(VarKind k) {
    switch (k) {
        case VarKind::unit: return "unit";
        case VarKind::connection: return "connection";
        case VarKind::metaconnection: return "metaconnection";
    }
    return "unit";
}

std::optional<std::size_t> ModelSpec::lookup(const Index3& idx, int population) const {
    auto it = by_label.find({population, idx.k, idx.j, idx.i});
    if (it == by_label.end()) return std::nullopt;
    return it->second;
}

std::size_t ModelSpec::find(const Index3& idx, int population) const {
    auto v = lookup(idx, population);
    if (!v)
        fail(ErrorCode::invalid_argument, "no variable with index " + std::to_string(idx.k) + "." +
                                              std::to_string(idx.j) + "." + std::to_string(idx.i));
    return *v;
}

std::string ModelSpec::label(std::size_t v) const {
    const auto& x = vars.at(v);
    std::string s = std::to_string(x.index.k) + "." + std::to_string(x.index.j) + "." + std::to_string(x.index.i);
    return x.population == 0 ? s : "v" + s;
}

std::vector<std::size_t> ModelSpec::units() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < vars.size(); ++v)
        if (vars[v].kind == VarKind::unit) out.push_back(v);
    return out;
}

std::vector<std::size_t> ModelSpec::inputs() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < vars.size(); ++v)
        if (vars[v].kind == VarKind::unit && vars[v].input) out.push_back(v);
    return out;
}

ModelBuilder::ModelBuilder(Family family, Labeling labeling, NetworkShape shape) {
    validate(shape);
    spec_.family = family;
    spec_.labeling = labeling;
    spec_.shape = shape;
    spec_.paired = family == Family::mm12;
}

std::size_t ModelBuilder::add(Variable v) {
    auto key = std::make_tuple(v.population, v.index.k, v.index.j, v.index.i);
    require(!spec_.by_label.count(key), "duplicate variable label");
    std::size_t id = spec_.vars.size();
    spec_.by_label[key] = id;
    spec_.vars.push_back(std::move(v));
    spec_.emits.emplace_back();
    spec_.external_input.push_back(0.0);
    return id;
}

std::size_t ModelBuilder::add_unit(const Index3& label, bool input, int population) {
    Variable v;
    v.kind = VarKind::unit;
    v.index = label;
    v.population = population;
    v.input = input;
    return add(std::move(v));
}

std::size_t ModelBuilder::add_connection(std::size_t from_unit, std::size_t to_unit, const Index3& label,
                                         int population) {
    require(from_unit < spec_.vars.size() && spec_.vars[from_unit].kind == VarKind::unit, "connection source");
    require(to_unit < spec_.vars.size() && spec_.vars[to_unit].kind == VarKind::unit, "connection target");
    require(from_unit != to_unit, "self connection");
    Variable v;
    v.kind = VarKind::connection;
    v.index = label;
    v.population = population;
    v.emitter = from_unit;
    std::size_t id = add(std::move(v));
    spec_.emits[from_unit].push_back(id);
    spec_.vars[to_unit].incoming.push_back({id, 1.0});
    return id;
}

std::size_t ModelBuilder::add_metaconnection(std::size_t from_unit, std::size_t onto, const Index3& label,
                                             int population) {
    require(from_unit < spec_.vars.size() && spec_.vars[from_unit].kind == VarKind::unit, "metaconnection source");
    require(onto < spec_.vars.size() && spec_.vars[onto].kind == VarKind::connection, "metaconnection target");
    require(spec_.vars[onto].emitter != from_unit, "self metaconnection");
    Variable v;
    v.kind = VarKind::metaconnection;
    v.index = label;
    v.population = population;
    v.emitter = from_unit;
    std::size_t id = add(std::move(v));
    spec_.emits[from_unit].push_back(id);
    spec_.vars[onto].incoming.push_back({id, 1.0});
    return id;
}

void ModelBuilder::add_influence(std::size_t target, std::size_t source, double coef) {
    require(target < spec_.vars.size() && source < spec_.vars.size(), "influence index");
    require(spec_.vars[source].kind != VarKind::unit, "influence source must be a (meta)connection");
    spec_.vars[target].incoming.push_back({source, coef});
}

ModelSpec ModelBuilder::build() {
    validate(spec_);
    return spec_;
}

ModelSpec build_feedforward(Family family, NetworkShape shape, bool metaconnections) {
    require(is_feedforward_family(family), "build_feedforward needs mm1..mm5");
    ModelBuilder b(family, Labeling::feedforward, shape);
    const int N = shape.n_inputs, M = shape.n_outputs;
    std::vector<std::size_t> in(N + 1), out(M + 1);
    for (int k = 1; k <= N; ++k) in[k] = b.add_unit({k, 0, 0}, true);
    for (int i = 1; i <= M; ++i) out[i] = b.add_unit({0, 0, i}, false);
    std::vector<std::vector<std::size_t>> conn(N + 1, std::vector<std::size_t>(M + 1));
    for (int j = 1; j <= N; ++j)
        for (int i = 1; i <= M; ++i) conn[j][i] = b.add_connection(in[j], out[i], {j, 0, i});
    if (metaconnections)
        for (int j = 1; j <= N; ++j)
            for (int i = 1; i <= M; ++i)
                for (int k = 1; k <= N; ++k)
                    if (k != j) b.add_metaconnection(in[k], conn[j][i], {k, j, i});
    return b.build();
}

ModelSpec build_recurrent(Family family, NetworkShape shape, const RecurrentTopology& topo) {
    require(family == Family::mm11 || family == Family::mm13 || family == Family::mm100,
            "build_recurrent needs mm11, mm13 or mm100");
    ModelBuilder b(family, Labeling::renumbered, shape);
    const int N = shape.n_inputs, M = shape.n_outputs, P = N + M;
    std::vector<std::size_t> unit(P + 1);
    for (int p = 1; p <= P; ++p) unit[p] = b.add_unit({0, 0, p}, p <= N);
    std::map<std::pair<int, int>, std::size_t> fwd;
    for (int j = 1; j <= N; ++j)
        for (int i = N + 1; i <= P; ++i) fwd[{j, i}] = b.add_connection(unit[j], unit[i], {j, 0, i});
    if (topo.lateral)
        for (int l = N + 1; l <= P; ++l)
            for (int i = N + 1; i <= P; ++i)
                if (l != i) b.add_connection(unit[l], unit[i], {l, 0, i});
    if (topo.feedback)
        for (int i = N + 1; i <= P; ++i)
            for (int j = 1; j <= N; ++j) b.add_connection(unit[i], unit[j], {i, 0, j});
    if (topo.forward_meta)
        for (auto [ji, c] : fwd)
            for (int k = 1; k <= N; ++k)
                if (k != ji.first) b.add_metaconnection(unit[k], c, {k, ji.first, ji.second});
    if (topo.feedback_meta)
        for (auto [ji, c] : fwd)
            for (int l = N + 1; l <= P; ++l) b.add_metaconnection(unit[l], c, {l, ji.first, ji.second});
    return b.build();
}

ModelSpec build_fully_recurrent(NetworkShape shape) {
    ModelBuilder b(Family::mm100, Labeling::renumbered, shape);
    const int P = shape.n_inputs + shape.n_outputs;
    std::vector<std::size_t> unit(P + 1);
    for (int p = 1; p <= P; ++p) unit[p] = b.add_unit({0, 0, p}, p <= shape.n_inputs);
    std::map<std::pair<int, int>, std::size_t> conn;
    for (int j = 1; j <= P; ++j)
        for (int i = 1; i <= P; ++i)
            if (j != i) conn[{j, i}] = b.add_connection(unit[j], unit[i], {j, 0, i});
    for (auto [ji, c] : conn)
        for (int k = 1; k <= P; ++k)
            if (k != ji.first) b.add_metaconnection(unit[k], c, {k, ji.first, ji.second});
    return b.build();
}

ModelSpec build_paired(NetworkShape shape) {
    ModelBuilder b(Family::mm12, Labeling::feedforward, shape);
    const int N = shape.n_inputs, M = shape.n_outputs;
    using Grid = std::vector<std::vector<std::size_t>>;
    Grid conn[2];
    std::map<std::tuple<int, int, int>, std::size_t> meta[2];
    for (int pop = 0; pop < 2; ++pop) {
        std::vector<std::size_t> in(N + 1), out(M + 1);
        for (int k = 1; k <= N; ++k) in[k] = b.add_unit({k, 0, 0}, true, pop);
        for (int i = 1; i <= M; ++i) out[i] = b.add_unit({0, 0, i}, false, pop);
        conn[pop].assign(N + 1, std::vector<std::size_t>(M + 1));
        for (int j = 1; j <= N; ++j)
            for (int i = 1; i <= M; ++i) conn[pop][j][i] = b.add_connection(in[j], out[i], {j, 0, i}, pop);
        for (int j = 1; j <= N; ++j)
            for (int i = 1; i <= M; ++i)
                for (int k = 1; k <= N; ++k)
                    if (k != j) meta[pop][{k, j, i}] = b.add_metaconnection(in[k], conn[pop][j][i], {k, j, i}, pop);
    }
    for (int pop = 0; pop < 2; ++pop)
        for (auto [kji, m] : meta[1 - pop]) b.add_influence(conn[pop][std::get<1>(kji)][std::get<2>(kji)], m, -1.0);
    return b.build();
}

WeightSet default_weights(const ModelSpec& spec, double w) {
    WeightSet ws;
    const std::size_t n = spec.size();
    ws.weight.assign(n, 0.0);
    ws.mask_b.assign(n, 0.0);
    ws.mask_c.assign(n, 0.0);
    ws.decay.assign(n, 1.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto k = spec.vars[v].kind;
        if (k != VarKind::unit) ws.weight[v] = w;
        ws.mask_b[v] = k == VarKind::unit ? 0.0 : 1.0;
        ws.mask_c[v] = k == VarKind::metaconnection ? 0.0 : 1.0;
    }
    return ws;
}

PotentialState zero_state(const ModelSpec& spec) { return PotentialState{std::vector<double>(spec.size(), 0.0), 0.0}; }

void validate(const ModelSpec& spec) {
    validate(spec.shape);
    require(spec.tau_r > 0, "tau_r must be positive");
    require(spec.guard >= 0, "guard must be nonnegative");
    require(spec.activation.alpha >= 0, "alpha must be nonnegative");
    require(spec.paired == (spec.family == Family::mm12), "pairing descriptor is required for mm12 and only mm12");
    require(spec.emits.size() == spec.vars.size() && spec.external_input.size() == spec.vars.size(),
            "model arrays size mismatch");
    for (std::size_t v = 0; v < spec.vars.size(); ++v) {
        const auto& x = spec.vars[v];
        if (x.kind != VarKind::unit) {
            require(x.emitter < spec.vars.size() && spec.vars[x.emitter].kind == VarKind::unit,
                    "connection without emitting unit: " + spec.label(v));
            require(spec.external_input[v] == 0.0 || spec.family == Family::mm100,
                    "external input on a non-unit variable: " + spec.label(v));
        } else if (!x.input && spec.external_input[v] != 0.0) {
            require(spec.family == Family::mm100 || spec.family == Family::mm13 || spec.family == Family::mm11,
                    "external input on an output unit: " + spec.label(v));
        }
        for (const auto& in : x.incoming) require(in.source < spec.vars.size(), "dangling influence");
        require(std::isfinite(spec.external_input[v]), "external input must be finite");
    }
}

void validate(const ModelSpec& spec, const WeightSet& w) {
    const std::size_t n = spec.size();
    require(w.weight.size() == n && w.mask_b.size() == n && w.mask_c.size() == n && w.decay.size() == n,
            "weight set size does not match model");
    for (std::size_t v = 0; v < n; ++v) {
        const auto k = spec.vars[v].kind;
        require(std::isfinite(w.weight[v]), "non-finite weight at " + spec.label(v));
        require(w.decay[v] > 0 && std::isfinite(w.decay[v]), "decay must be positive at " + spec.label(v));
        require(w.mask_b[v] == (k == VarKind::unit ? 0.0 : 1.0), "mask_b violates structure at " + spec.label(v));
        require(w.mask_c[v] == (k == VarKind::metaconnection ? 0.0 : 1.0),
                "mask_c violates structure at " + spec.label(v));
    }
}

void validate(const ModelSpec& spec, const PotentialState& s) {
    require(s.values.size() == spec.size(), "state size does not match model");
    require(s.time >= 0 && std::isfinite(s.time), "state time must be nonnegative");
    for (std::size_t v = 0; v < s.values.size(); ++v)
        require(std::isfinite(s.values[v]) && s.values[v] >= 0.0, "state entry negative or non-finite at " + spec.label(v));
}

void set_input(ModelSpec& spec, int k, double value) {
    auto in = spec.inputs();
    require(k >= 1 && k <= static_cast<int>(in.size()), "input index out of range");
    spec.external_input[in[k - 1]] = value;
}

std::vector<std::size_t> output_units(const ModelSpec& spec) {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < spec.size(); ++v)
        if (spec.vars[v].kind == VarKind::unit && !spec.vars[v].input) out.push_back(v);
    return out;
}

}  // namespace metanet
