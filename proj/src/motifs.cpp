#include "metanet/motifs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

namespace metanet {

namespace {

using json = nlohmann::json;

const std::vector<std::string> kBroadcast{"U_1", "w_1^1", "w_1^2"};
const std::vector<std::string> kMeta{"U_1", "U_2", "w_1^1", "w_1^2", "w_2^12"};
const std::vector<std::string> kFeedback{"U_1", "U_2", "w_1^1", "w_1^2", "w_2^12", "w^2_2"};
const std::vector<std::string> kCompMeta{"U_1", "U_2", "U_3", "w_1^1", "w_1^2", "w_2^11", "w_3^12"};
const std::vector<std::string> kCompFeedback{"U_1",    "U_2",    "U_3",   "w_1^1", "w_1^2",
                                             "w_2^11", "w_3^12", "w^1_2", "w^2_3"};

double pos(double x) { return x > 0.0 ? x : 0.0; }

struct Slots {
    std::size_t u1 = npos, u2 = npos, u3 = npos, o1 = npos, o2 = npos;
    std::size_t c1 = npos, c2 = npos, m1 = npos, m2 = npos, f1 = npos, f2 = npos;
};

Slots slots_of(const MotifModel& mm) {
    Slots s;
    for (std::size_t v = 0; v < mm.coordinates.size(); ++v) {
        const auto& n = mm.coordinates[v];
        if (n == "u_1") s.u1 = v;
        else if (n == "u_2") s.u2 = v;
        else if (n == "u_3") s.u3 = v;
        else if (n == "u^1") s.o1 = v;
        else if (n == "u^2") s.o2 = v;
        else if (n == "u_1^1") s.c1 = v;
        else if (n == "u_1^2") s.c2 = v;
        else if (n == "u_2^12" || n == "u_2^11") s.m1 = v;
        else if (n == "u_3^12") s.m2 = v;
        else if (n == "u^2_2" || n == "u^1_2") s.f1 = v;
        else if (n == "u^2_3") s.f2 = v;
    }
    return s;
}

double rel_distance(const std::vector<double>& x, const std::vector<double>& p,
                    const std::vector<std::size_t>& skip = {}) {
    double d = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::find(skip.begin(), skip.end(), i) != skip.end()) continue;
        d = std::max(d, std::fabs(x[i] - p[i]));
        scale = std::max(scale, std::fabs(p[i]));
    }
    return d / scale;
}

}  // namespace

std::string to_string(MotifKind k) {
    switch (k) {
        case MotifKind::broadcast: return "broadcast";
        case MotifKind::meta: return "meta";
        case MotifKind::feedback: return "feedback";
        case MotifKind::competitive_meta: return "competitive_meta";
        case MotifKind::competitive_feedback: return "competitive_feedback";
    }
    return "broadcast";
}

MotifKind motif_kind_from_string(const std::string& s) {
    for (auto k : {MotifKind::broadcast, MotifKind::meta, MotifKind::feedback, MotifKind::competitive_meta,
                   MotifKind::competitive_feedback})
        if (to_string(k) == s) return k;
    fail(ErrorCode::invalid_argument, "unknown motif '" + s + "'");
}

const std::vector<std::string>& motif_parameter_names(MotifKind k) {
    switch (k) {
        case MotifKind::broadcast: return kBroadcast;
        case MotifKind::meta: return kMeta;
        case MotifKind::feedback: return kFeedback;
        case MotifKind::competitive_meta: return kCompMeta;
        case MotifKind::competitive_feedback: return kCompFeedback;
    }
    return kBroadcast;
}

double MotifDescriptor::operator[](const std::string& name) const {
    auto it = parameters.find(name);
    if (it == parameters.end()) fail(ErrorCode::invalid_argument, "motif parameter '" + name + "' missing");
    return it->second;
}

void validate(const MotifDescriptor& m) {
    const auto& names = motif_parameter_names(m.kind);
    for (const auto& [k, v] : m.parameters) {
        require(std::find(names.begin(), names.end(), k) != names.end(),
                "unknown parameter '" + k + "' for motif " + to_string(m.kind));
        require(std::isfinite(v), "parameter '" + k + "' must be finite");
    }
    for (const auto& n : names) require(m.parameters.count(n), "motif " + to_string(m.kind) + " needs '" + n + "'");
    require(m["U_1"] >= 0.0, "U_1 must be nonnegative");
}

MotifDescriptor make_motif(MotifKind kind, const std::map<std::string, double>& params) {
    MotifDescriptor m{kind, params};
    validate(m);
    return m;
}

MotifDescriptor default_motif(MotifKind kind) {
    MotifDescriptor m{kind, {}};
    for (const auto& n : motif_parameter_names(kind)) m.parameters[n] = 1.0;
    if (kind == MotifKind::feedback) m.parameters["w^2_2"] = 0.5;
    if (kind == MotifKind::competitive_feedback) {
        m.parameters["w^1_2"] = 0.25;
        m.parameters["w^2_3"] = 0.25;
    }
    return m;
}

MotifModel build_motif(const MotifDescriptor& m) {
    validate(m);
    const bool recurrent = m.kind == MotifKind::feedback || m.kind == MotifKind::competitive_feedback;
    const bool three = m.kind == MotifKind::competitive_meta || m.kind == MotifKind::competitive_feedback;
    const int N = m.kind == MotifKind::broadcast ? 1 : (three ? 3 : 2);
    const Family fam = recurrent ? Family::mm13 : Family::mm5;
    ModelBuilder b(fam, recurrent ? Labeling::renumbered : Labeling::feedforward, {N, 2});
    MotifModel mm;
    auto name = [&](std::size_t id, const std::string& n) {
        if (mm.coordinates.size() <= id) mm.coordinates.resize(id + 1);
        mm.coordinates[id] = n;
        return id;
    };
    auto unit_label = [&](int p, bool input) -> Index3 {
        if (recurrent) return {0, 0, input ? p : N + p};
        return input ? Index3{p, 0, 0} : Index3{0, 0, p};
    };
    auto conn_label = [&](int from, int to_out) -> Index3 {
        return recurrent ? Index3{from, 0, N + to_out} : Index3{from, 0, to_out};
    };
    auto meta_label = [&](int k, int j, int to_out) -> Index3 {
        return recurrent ? Index3{k, j, N + to_out} : Index3{k, j, to_out};
    };

    std::size_t u[4] = {npos, npos, npos, npos};
    for (int k = 1; k <= N; ++k) u[k] = name(b.add_unit(unit_label(k, true), true), "u_" + std::to_string(k));
    const std::size_t o1 = name(b.add_unit(unit_label(1, false), false), "u^1");
    const std::size_t o2 = name(b.add_unit(unit_label(2, false), false), "u^2");
    mm.first = name(b.add_connection(u[1], o1, conn_label(1, 1)), "u_1^1");
    mm.second = name(b.add_connection(u[1], o2, conn_label(1, 2)), "u_1^2");
    std::size_t m1 = npos, m2 = npos, f1 = npos, f2 = npos;
    switch (m.kind) {
        case MotifKind::broadcast: break;
        case MotifKind::meta: m1 = name(b.add_metaconnection(u[2], mm.second, meta_label(2, 1, 2)), "u_2^12"); break;
        case MotifKind::feedback:
            m1 = name(b.add_metaconnection(u[2], mm.second, meta_label(2, 1, 2)), "u_2^12");
            f1 = name(b.add_connection(o2, u[2], {N + 2, 0, 2}), "u^2_2");
            break;
        case MotifKind::competitive_meta:
            m1 = name(b.add_metaconnection(u[2], mm.first, meta_label(2, 1, 1)), "u_2^11");
            m2 = name(b.add_metaconnection(u[3], mm.second, meta_label(3, 1, 2)), "u_3^12");
            break;
        case MotifKind::competitive_feedback:
            m1 = name(b.add_metaconnection(u[2], mm.first, meta_label(2, 1, 1)), "u_2^11");
            m2 = name(b.add_metaconnection(u[3], mm.second, meta_label(3, 1, 2)), "u_3^12");
            f1 = name(b.add_connection(o1, u[2], {N + 1, 0, 2}), "u^1_2");
            f2 = name(b.add_connection(o2, u[3], {N + 2, 0, 3}), "u^2_3");
            break;
    }
    mm.spec = b.build();
    mm.weights = default_weights(mm.spec, 0.0);
    auto& w = mm.weights.weight;
    w[mm.first] = m["w_1^1"];
    w[mm.second] = m["w_1^2"];
    if (m.kind == MotifKind::meta || m.kind == MotifKind::feedback) w[m1] = m["w_2^12"];
    if (m.kind == MotifKind::feedback) w[f1] = m["w^2_2"];
    if (three) {
        w[m1] = m["w_2^11"];
        w[m2] = m["w_3^12"];
    }
    if (m.kind == MotifKind::competitive_feedback) {
        w[f1] = m["w^1_2"];
        w[f2] = m["w^2_3"];
    }
    mm.spec.external_input[u[1]] = m["U_1"];
    if (N >= 2) mm.spec.external_input[u[2]] = m["U_2"];
    if (N >= 3) mm.spec.external_input[u[3]] = m["U_3"];
    return mm;
}

std::vector<double> EquilibriumLine::at(double s) const {
    std::vector<double> x(base.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = base[i] + s * direction[i];
        if (!clamped.empty() && clamped[i] && x[i] < 0.0) x[i] = 0.0;
    }
    return x;
}

std::string to_string(EquilibriumSet::Kind k) {
    switch (k) {
        case EquilibriumSet::Kind::point: return "point";
        case EquilibriumSet::Kind::line_segment: return "line_segment";
        case EquilibriumSet::Kind::none: return "none";
    }
    return "none";
}

namespace {

// (u_1^1, u_1^2) = (s, U_1 - s) with the rest of the motif at rest.
EquilibriumLine split_line(const MotifModel& mm, const Slots& s, double U1, double w11, double w12) {
    EquilibriumLine line;
    line.label = "line";
    const std::size_t n = mm.spec.size();
    line.base.assign(n, 0.0);
    line.direction.assign(n, 0.0);
    for (std::size_t v : mm.spec.inputs()) line.base[v] = mm.spec.external_input[v];
    line.base[s.c2] = U1;
    line.direction[s.c1] = 1.0;
    line.direction[s.c2] = -1.0;
    line.base[s.o2] = pos(w12) * U1;
    line.direction[s.o1] = pos(w11);
    line.direction[s.o2] = -pos(w12);
    if (s.m1 != npos) line.base[s.m1] = mm.spec.external_input[s.u2];
    line.s_min = 0.0;
    line.s_max = U1;
    return line;
}

std::vector<double> rest_state(const MotifModel& mm) {
    std::vector<double> x(mm.spec.size(), 0.0);
    for (std::size_t v : mm.spec.inputs()) x[v] = mm.spec.external_input[v];
    return x;
}

void add_point(EquilibriumSet& set, EquilibriumPoint p) {
    set.kind = EquilibriumSet::Kind::point;
    set.points.push_back(std::move(p));
}

EquilibriumSet meta_equilibria(const MotifDescriptor& m, const MotifModel& mm, const Slots& s) {
    EquilibriumSet set;
    const double U1 = m["U_1"], U2 = pos(m["U_2"]), w11 = m["w_1^1"], w12 = m["w_1^2"];
    const double W = m["w_2^12"] * U2;
    if (std::fabs(W) <= case_b_tolerance) {
        set.kind = EquilibriumSet::Kind::line_segment;
        set.line = split_line(mm, s, U1, w11, w12);
        set.outcome = "line attractor";
        return set;
    }
    auto base = rest_state(mm);
    base[s.m1] = U2;
    if (W > 0.0) {
        auto x = base;
        x[s.c2] = U1 + W;
        x[s.o2] = pos(w12) * (U1 + W);
        add_point(set, {"P", x, Stability::stable, false, {}});
        set.outcome = "single stable point";
        return set;
    }
    auto q = base;
    q[s.c1] = U1;
    q[s.o1] = pos(w11) * U1;
    add_point(set, {"Q", q, Stability::stable, false, {}});
    if (U1 + W > 0.0) {
        auto p = base;
        p[s.c2] = U1 + W;
        p[s.o2] = pos(w12) * (U1 + W);
        std::vector<double> dir(p.size(), 0.0);
        dir[s.c1] = 1.0;
        add_point(set, {"P", p, Stability::unstable, false, dir});
    }
    set.outcome = "inhibited connection silenced";
    return set;
}

EquilibriumSet feedback_equilibria(const MotifDescriptor& m, const MotifModel& mm, const Slots& s) {
    EquilibriumSet set;
    const double U1 = m["U_1"], U2 = m["U_2"], w11 = m["w_1^1"], w12 = m["w_1^2"];
    const double w = m["w_2^12"], wf = m["w^2_2"];
    const double loop = wf * w12;
    const double g = w * loop;
    if (std::fabs(w) <= case_b_tolerance || (std::fabs(U2) <= case_b_tolerance && std::fabs(loop) <= case_b_tolerance)) {
        set.kind = EquilibriumSet::Kind::line_segment;
        EquilibriumLine line = split_line(mm, s, U1, w11, w12);
        // the fed-back potential follows s along the line
        line.base[s.f1] = pos(w12) * U1;
        line.direction[s.f1] = -pos(w12);
        line.base[s.u2] = U2 + wf * pos(w12) * U1;
        line.direction[s.u2] = -wf * pos(w12);
        line.base[s.m1] = line.base[s.u2];
        line.direction[s.m1] = line.direction[s.u2];
        line.clamped.assign(line.base.size(), false);
        line.clamped[s.u2] = true;
        if (U2 + std::min(0.0, wf * pos(w12) * U1) < 0.0) {
            // u_2 reaches zero somewhere on the line; the meta then only stores
            line.clamped[s.m1] = true;
            set.storage.push_back(s.m1);
        }
        set.line = line;
        set.outcome = "line attractor";
        return set;
    }
    if (1.0 - g <= infinity_gain_tolerance) {
        set.at_infinity = true;
        set.outcome = "equilibrium at infinity: cycle gain reaches 1";
    } else {
        const double Ut1 = (U1 + w * U2) / (1.0 - g);
        const double o2 = w12 * Ut1;
        const double u2 = loop * Ut1 + U2;
        if (Ut1 > 0.0 && o2 >= 0.0 && u2 > 0.0) {
            auto x = rest_state(mm);
            x[s.c2] = Ut1;
            x[s.o2] = o2;
            x[s.f1] = o2;
            x[s.u2] = u2;
            x[s.m1] = u2;
            // linear cascade c -> u^2 -> feedback -> u_2 -> meta closes with gain g; (s+1)^5 = g
            const double loop_rate = g >= 0.0 ? 1.0 - std::pow(g, 0.2) : 1.0 - std::pow(-g, 0.2) * std::cos(std::numbers::pi / 5);
            const double split_rate = 1.0 - U1 / Ut1;
            Stability st = Stability::stable;
            if (loop_rate < 0.0 || split_rate < -1e-12) st = Stability::unstable;
            else if (std::fabs(split_rate) <= 1e-12) st = Stability::semistable;
            std::vector<double> dir;
            if (st != Stability::stable) {
                dir.assign(x.size(), 0.0);
                dir[s.c1] = 1.0;
            }
            add_point(set, {"P1", x, st, false, dir});
        }
    }
    if (std::fabs(loop) > case_b_tolerance) {
        const double Ut2 = U2 / loop;
        if (Ut2 <= 0.0 && U1 + Ut2 >= 0.0) {
            auto x = rest_state(mm);
            x[s.c1] = U1 + Ut2;
            x[s.c2] = -Ut2;
            x[s.o1] = pos(w11) * (U1 + Ut2);
            x[s.o2] = pos(w12) * -Ut2;
            x[s.f1] = x[s.o2];
            x[s.u2] = 0.0;
            x[s.m1] = 0.0;
            add_point(set, {"P2", x, Stability::stable, true, {}});
            // Past P2 the feedback holds u_2 at zero through the resetting condition, the meta goes
            // silent and (s, U_1 - s) is neutral again: P2 is the end of a segment of equilibria.
            EquilibriumLine line;
            line.label = "reset segment";
            line.base = rest_state(mm);
            line.direction.assign(x.size(), 0.0);
            line.base[s.c1] = U1;
            line.direction[s.c1] = -1.0;
            line.direction[s.c2] = 1.0;
            line.direction[s.o1] = -pos(w11);
            line.base[s.o1] = pos(w11) * U1;
            line.direction[s.o2] = pos(w12);
            line.direction[s.f1] = pos(w12);
            line.base[s.u2] = 0.0;
            line.base[s.m1] = 0.0;
            line.s_min = -Ut2;
            line.s_max = U1;
            set.line = line;
            set.storage.push_back(s.m1);
        }
    }
    if (set.outcome.empty()) {
        if (set.line) set.outcome = "inhibitory feedback: reset segment";
        else set.outcome = set.points.empty() ? "no admissible equilibrium" : "cycle-amplified point";
    }
    if (set.line) set.kind = EquilibriumSet::Kind::line_segment;
    else if (set.points.empty() && !set.at_infinity) set.kind = EquilibriumSet::Kind::none;
    return set;
}

EquilibriumSet competitive_meta_equilibria(const MotifDescriptor& m, const MotifModel& mm, const Slots& s) {
    EquilibriumSet set;
    const double U = m["U_1"], U2 = pos(m["U_2"]), U3 = pos(m["U_3"]), w11 = m["w_1^1"], w12 = m["w_1^2"];
    const double W1 = m["w_2^11"] * U2, W2 = m["w_3^12"] * U3;
    auto base = rest_state(mm);
    base[s.m1] = U2;
    base[s.m2] = U3;
    const bool z1 = std::fabs(W1) <= case_b_tolerance, z2 = std::fabs(W2) <= case_b_tolerance;
    if (z1 && z2) {
        set.kind = EquilibriumSet::Kind::line_segment;
        auto line = split_line(mm, s, U, w11, w12);
        line.base[s.m1] = U2;
        line.base[s.m2] = U3;
        set.line = line;
        set.outcome = "line attractor";
        return set;
    }
    auto winner = [&](bool first, double Wp, Stability st, bool empirical) {
        auto x = base;
        const double c = U + Wp;
        x[first ? s.c1 : s.c2] = c;
        x[first ? s.o1 : s.o2] = pos(first ? w11 : w12) * c;
        add_point(set, {first ? "W1" : "W2", x, st, empirical, {}});
    };
    if (W1 > 0.0 && W2 > 0.0) {
        const double S = W1 + W2, total = U + S;
        auto x = base;
        x[s.c1] = W1 * total / S;
        x[s.c2] = W2 * total / S;
        x[s.o1] = pos(w11) * x[s.c1];
        x[s.o2] = pos(w12) * x[s.c2];
        add_point(set, {"B", x, Stability::stable, false, {}});
        set.outcome = "balanced";
    } else if (W1 < 0.0 && W2 < 0.0) {
        const double S = W1 + W2, total = U + S;
        if (total > 0.0) {
            auto x = base;
            x[s.c1] = W1 * total / S;
            x[s.c2] = W2 * total / S;
            x[s.o1] = pos(w11) * x[s.c1];
            x[s.o2] = pos(w12) * x[s.c2];
            std::vector<double> dir(x.size(), 0.0);
            dir[s.c1] = 1.0;
            dir[s.c2] = -1.0;
            add_point(set, {"B", x, Stability::unstable, false, dir});
        }
        if (U + W1 > 0.0) winner(true, W1, Stability::stable, false);
        if (U + W2 > 0.0) winner(false, W2, Stability::stable, false);
        if (U + W1 <= 0.0 && U + W2 <= 0.0) {
            add_point(set, {"O", base, Stability::stable, false, {}});
        }
        set.outcome = "winner-take-all";
    } else {
        // one contribution is zero or of opposite sign: the positive side takes the unit
        const bool first = W1 > W2;
        const double Wp = first ? W1 : W2;
        if (U + Wp > 0.0) winner(first, Wp, Stability::stable, false);
        set.outcome = std::string("no balanced equilibrium, winner-take-all: ") + (first ? "u_1^1" : "u_1^2");
    }
    if (set.points.empty()) set.kind = EquilibriumSet::Kind::none;
    return set;
}

EquilibriumSet competitive_feedback_equilibria(const MotifDescriptor& m, const MotifModel& mm, const Slots& s) {
    EquilibriumSet set;
    const double U = m["U_1"], U2 = m["U_2"], U3 = m["U_3"], w11 = m["w_1^1"], w12 = m["w_1^2"];
    const double mu1 = m["w_2^11"], mu2 = m["w_3^12"];
    const double g1 = m["w^1_2"] * w11, g2 = m["w^2_3"] * w12;
    const double k1 = mu1 * g1, k2 = mu2 * g2;
    const double a1 = mu1 * U2, a2 = mu2 * U3;

    auto fill = [&](double c1, double c2) {
        auto x = rest_state(mm);
        x[s.c1] = c1;
        x[s.c2] = c2;
        x[s.o1] = pos(w11) * c1;
        x[s.o2] = pos(w12) * c2;
        x[s.f1] = x[s.o1];
        x[s.f2] = x[s.o2];
        x[s.u2] = pos(U2 + m["w^1_2"] * x[s.f1]);
        x[s.u3] = pos(U3 + m["w^2_3"] * x[s.f2]);
        x[s.m1] = x[s.u2];
        x[s.m2] = x[s.u3];
        return x;
    };

    if (1.0 - k1 <= infinity_gain_tolerance || 1.0 - k2 <= infinity_gain_tolerance) {
        set.at_infinity = true;
        set.outcome = "equilibrium at infinity: cycle gain reaches 1";
        return set;
    }
    const bool positive = mu1 > 0.0 && mu2 > 0.0 && U2 > 0.0 && U3 > 0.0;
    const bool negative = mu1 < 0.0 && mu2 < 0.0 && U2 > 0.0 && U3 > 0.0;
    if (positive || negative) {
        // S = c1 + c2 with c_i = a_i S / D_i, D_i = S (1 - k_i) - U and sum c_i = S
        const double A = (1.0 - k1) * (1.0 - k2);
        const double B = -U * (2.0 - k1 - k2) - a1 * (1.0 - k2) - a2 * (1.0 - k1);
        const double C = U * U + U * (a1 + a2);
        std::vector<double> roots;
        const double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0) {
            const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
            if (q != 0.0) roots.push_back(C / q);
            if (A != 0.0) roots.push_back(q / A);
        }
        for (double S : roots) {
            const double D1 = S * (1.0 - k1) - U, D2 = S * (1.0 - k2) - U;
            if (S <= 0.0 || D1 == 0.0 || D2 == 0.0) continue;
            const double c1 = a1 * S / D1, c2 = a2 * S / D2;
            if (!(c1 > 0.0 && c2 > 0.0)) continue;
            auto x = fill(c1, c2);
            if (x[s.u2] <= 0.0 || x[s.u3] <= 0.0) continue;
            std::vector<double> dir;
            if (negative) {
                dir.assign(x.size(), 0.0);
                dir[s.c1] = 1.0;
                dir[s.c2] = -1.0;
            }
            add_point(set, {"B", x, positive ? Stability::stable : Stability::unstable, false, dir});
            break;
        }
    }
    auto winner = [&](bool first) {
        const double a = first ? a1 : a2, k = first ? k1 : k2;
        const double c = (U + a) / (1.0 - k);
        if (!(c > 0.0)) return;
        auto x = first ? fill(c, 0.0) : fill(0.0, c);
        if ((first ? x[s.u2] : x[s.u3]) <= 0.0) return;
        add_point(set, {first ? "W1" : "W2", x, Stability::stable, true, {}});
    };
    if (positive) {
        set.outcome = "balanced";
    } else if (negative) {
        winner(true);
        winner(false);
        set.outcome = "winner-take-all";
    } else {
        const bool first = a1 > a2;
        winner(first);
        set.outcome = std::string("no balanced equilibrium, winner-take-all: ") + (first ? "u_1^1" : "u_1^2");
    }
    if (set.points.empty()) set.kind = EquilibriumSet::Kind::none;
    return set;
}

}  // namespace

EquilibriumSet motif_equilibria(const MotifDescriptor& m) {
    const MotifModel mm = build_motif(m);
    const Slots s = slots_of(mm);
    EquilibriumSet set;
    switch (m.kind) {
        case MotifKind::broadcast:
            set.kind = EquilibriumSet::Kind::line_segment;
            set.line = split_line(mm, s, m["U_1"], m["w_1^1"], m["w_1^2"]);
            set.outcome = "line attractor";
            break;
        case MotifKind::meta: set = meta_equilibria(m, mm, s); break;
        case MotifKind::feedback: set = feedback_equilibria(m, mm, s); break;
        case MotifKind::competitive_meta: set = competitive_meta_equilibria(m, mm, s); break;
        case MotifKind::competitive_feedback: set = competitive_feedback_equilibria(m, mm, s); break;
    }
    set.coordinates = mm.coordinates;
    return set;
}

std::vector<double> motif_start(const MotifDescriptor& m, double first, double second) {
    const MotifModel mm = build_motif(m);
    auto x = rest_state(mm);
    for (double& v : x) v = std::max(v, 0.0);
    x[mm.first] = first;
    x[mm.second] = second;
    return x;
}

std::vector<std::vector<double>> basin_grid(const MotifDescriptor& m, int per_axis) {
    require(per_axis >= 2, "basin grid needs at least 2 points per axis");
    const double top = 2.0 * std::max(m["U_1"], 1e-3);
    std::vector<std::vector<double>> out;
    for (int a = 0; a < per_axis; ++a)
        for (int b = 0; b < per_axis; ++b)
            out.push_back(motif_start(m, top * a / (per_axis - 1), top * b / (per_axis - 1)));
    return out;
}

std::pair<double, std::string> match_equilibrium(const EquilibriumSet& set, const std::vector<double>& x) {
    double best = std::numeric_limits<double>::infinity();
    std::string label;
    for (const auto& p : set.points) {
        const double d = rel_distance(x, p.state, set.storage);
        if (d < best) {
            best = d;
            label = p.label;
        }
    }
    if (set.line) {
        const auto& L = *set.line;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!L.clamped.empty() && L.clamped[i]) continue;
            num += (x[i] - L.base[i]) * L.direction[i];
            den += L.direction[i] * L.direction[i];
        }
        const double s = den > 0.0 ? std::clamp(num / den, L.s_min, L.s_max) : L.s_min;
        auto p = L.at(s);
        const double d = rel_distance(x, p, set.storage);
        if (d < best) {
            best = d;
            label = L.label;
        }
    }
    return {best, label};
}

MotifReport verify_motif(const MotifDescriptor& m, const SimulationConfig& cfg, std::vector<std::vector<double>> starts,
                         double tolerance) {
    MotifReport rep;
    rep.motif = m;
    rep.equilibria = motif_equilibria(m);
    const MotifModel mm = build_motif(m);
    if (starts.empty()) starts = basin_grid(m);
    bool all = true;
    for (const auto& st : starts) {
        MotifRun run;
        run.start = st;
        try {
            auto traj = simulate({st, 0.0}, mm.spec, mm.weights, cfg);
            run.limit = traj.states.back().values;
            run.converged = traj.converged;
            if (rep.equilibria.at_infinity) {
                run.matched = "infinity";
                run.ok = !traj.converged;
            } else {
                auto [err, label] = match_equilibrium(rep.equilibria, run.limit);
                run.error = err;
                run.matched = label;
                run.ok = err <= tolerance;
            }
        } catch (const Error& e) {
            run.diverged = e.code() == ErrorCode::divergence;
            run.message = e.what();
            run.matched = run.diverged && rep.equilibria.at_infinity ? "infinity" : "";
            run.ok = rep.equilibria.at_infinity && run.diverged;
        }
        rep.max_error = std::max(rep.max_error, run.error);
        all = all && run.ok;
        rep.runs.push_back(std::move(run));
    }
    for (const auto& p : rep.equilibria.points) {
        if (p.stability == Stability::stable || p.probe.empty()) continue;
        MotifProbe probe;
        probe.label = p.label;
        auto x = p.state;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(0.0, x[i] + 1e-3 * p.probe[i]);
        try {
            auto traj = simulate({x, 0.0}, mm.spec, mm.weights, cfg);
            probe.displacement = rel_distance(traj.states.back().values, p.state);
        } catch (const Error&) {
            probe.displacement = std::numeric_limits<double>::infinity();
        }
        probe.departed = probe.displacement > 1e-2;
        all = all && probe.departed;
        rep.probes.push_back(probe);
    }
    rep.passed = all;
    return rep;
}

MotifDescriptor sample_admissible(MotifKind kind, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.5, 1.5), w(0.5, 2.0), regime(0.0, 1.0);
    MotifDescriptor m{kind, {}};
    auto& p = m.parameters;
    p["U_1"] = U(rng);
    p["w_1^1"] = w(rng);
    p["w_1^2"] = w(rng);
    const double r = regime(rng);
    switch (kind) {
        case MotifKind::broadcast: break;
        case MotifKind::meta: {
            p["U_2"] = U(rng);
            std::uniform_real_distribution<double> wm(1.0, 2.0);
            if (r < 0.5) {
                p["w_2^12"] = wm(rng);
            } else {
                // keep U_1 + W away from zero so the unstable point is well separated
                std::uniform_real_distribution<double> frac(0.2, 0.6);
                p["w_2^12"] = -frac(rng) * p["U_1"] / p["U_2"];
            }
            break;
        }
        case MotifKind::feedback: {
            p["U_2"] = U(rng);
            std::uniform_real_distribution<double> wm(0.5, 1.5), gain(0.05, 0.3);
            p["w_2^12"] = wm(rng);
            p["w^2_2"] = gain(rng) / (p["w_2^12"] * p["w_1^2"]);
            break;
        }
        case MotifKind::competitive_meta: {
            p["U_2"] = U(rng);
            p["U_3"] = U(rng);
            std::uniform_real_distribution<double> wp(0.5, 2.0), wn(0.1, 0.35);
            if (r < 0.4) {
                p["w_2^11"] = wp(rng);
                p["w_3^12"] = wp(rng);
            } else if (r < 0.7) {
                p["w_2^11"] = -wn(rng) * p["U_1"] / p["U_2"];
                p["w_3^12"] = -wn(rng) * p["U_1"] / p["U_3"];
            } else {
                p["w_2^11"] = wp(rng);
                p["w_3^12"] = -wn(rng) * p["U_1"] / p["U_3"];
                if (regime(rng) < 0.5) std::swap(p["w_2^11"], p["w_3^12"]);
            }
            break;
        }
        case MotifKind::competitive_feedback: {
            p["U_2"] = U(rng);
            p["U_3"] = U(rng);
            std::uniform_real_distribution<double> wp(0.5, 1.5), gain(0.05, 0.3);
            p["w_2^11"] = wp(rng);
            p["w_3^12"] = wp(rng);
            p["w^1_2"] = gain(rng) / (p["w_2^11"] * p["w_1^1"]);
            p["w^2_3"] = gain(rng) / (p["w_3^12"] * p["w_1^2"]);
            break;
        }
    }
    validate(m);
    return m;
}

std::string to_json(const MotifDescriptor& m) {
    json j;
    j["format_version"] = 1;
    j["kind"] = to_string(m.kind);
    j["parameters"] = m.parameters;
    return j.dump(2);
}

MotifDescriptor motif_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::parse_error, std::string("motif file: ") + e.what());
    }
    require(j.is_object(), "motif file must hold an object");
    if (j.contains("format_version"))
        require(j["format_version"] == 1, "unsupported motif format_version " + j["format_version"].dump());
    require(j.contains("kind") && j["kind"].is_string(), "motif file needs a string 'kind'");
    MotifDescriptor m{motif_kind_from_string(j["kind"].get<std::string>()), {}};
    if (j.contains("parameters")) {
        require(j["parameters"].is_object(), "'parameters' must be an object");
        for (auto it = j["parameters"].begin(); it != j["parameters"].end(); ++it) {
            require(it.value().is_number(), "parameter '" + it.key() + "' must be a number");
            m.parameters[it.key()] = it.value().get<double>();
        }
    }
    validate(m);
    return m;
}

namespace {

json set_json(const EquilibriumSet& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["coordinates"] = s.coordinates;
    j["outcome"] = s.outcome;
    j["at_infinity"] = s.at_infinity;
    j["storage"] = json::array();
    for (auto v : s.storage) j["storage"].push_back(s.coordinates.at(v));
    j["points"] = json::array();
    for (const auto& p : s.points)
        j["points"].push_back({{"label", p.label},
                               {"state", p.state},
                               {"stability", p.empirical ? "empirical" : to_string(p.stability)}});
    if (s.line)
        j["line"] = {{"label", s.line->label},
                     {"base", s.line->base},
                     {"direction", s.line->direction},
                     {"s_min", s.line->s_min},
                     {"s_max", s.line->s_max},
                     {"stability", "stable"}};
    else
        j["line"] = nullptr;
    return j;
}

}  // namespace

std::string to_json(const EquilibriumSet& s) {
    json j = set_json(s);
    j["format_version"] = 1;
    return j.dump(2);
}

std::string to_json(const MotifReport& r) {
    json j;
    j["format_version"] = 1;
    j["kind"] = to_string(r.motif.kind);
    j["parameters"] = r.motif.parameters;
    j["equilibria"] = set_json(r.equilibria);
    j["runs"] = json::array();
    for (const auto& run : r.runs) {
        json e{{"start", run.start},   {"limit", run.limit}, {"matched", run.matched},
               {"error", run.error},   {"converged", run.converged},
               {"diverged", run.diverged}, {"ok", run.ok}};
        if (!run.message.empty()) e["message"] = run.message;
        j["runs"].push_back(e);
    }
    j["probes"] = json::array();
    for (const auto& p : r.probes)
        j["probes"].push_back({{"label", p.label}, {"displacement", p.displacement}, {"departed", p.departed}});
    j["max_error"] = r.max_error;
    j["passed"] = r.passed;
    return j.dump(2);
}

}  // namespace metanet
