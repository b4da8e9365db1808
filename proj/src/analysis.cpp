#include "metanet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace metanet {

std::string to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::semistable: return "semistable";
    }
    return "stable";
}

double scalar_rhs(const ScalarEquilibriumProblem& p, double u) { return p.b * u / (p.a + u) + p.c - p.d * u; }

namespace {

// Real roots of A x^2 + B x + C = 0, ascending; D clamped at zero.
std::vector<double> quadratic_roots(double A, double B, double C) {
    double D = B * B - 4.0 * A * C;
    if (D < 0) D = 0;
    double sq = std::sqrt(D);
    double q = -0.5 * (B + (B >= 0 ? sq : -sq));
    std::vector<double> r;
    if (q == 0.0) {
        r = {0.0, 0.0};
    } else {
        r = {q / A, C / q};
    }
    std::sort(r.begin(), r.end());
    return r;
}

}  // namespace

CaseClassification classify_case(const ScalarEquilibriumProblem& p) {
    require(p.d > 0, "classify_case needs d > 0");
    CaseClassification out;
    const double a = p.a, b = p.b, c = p.c, d = p.d;
    const double ba = b * a;
    if (b != 0.0) out.singularity = -a;

    const double B = d * a - b - c, C = -c * a;
    if (ba < -case_b_tolerance) {
        out.case_label = 'a';
        for (double u : quadratic_roots(d, B, C)) out.equilibria.push_back({u, Stability::stable});
        return out;
    }
    if (std::fabs(ba) <= case_b_tolerance) {
        out.case_label = 'b';
        double u;
        if (a == 0.0)
            u = (b + c) / d;
        else if (b == 0.0)
            u = c / d;
        else {
            // keep the root away from the (numerically vanishing) singular branch
            auto r = quadratic_roots(d, B, C);
            u = std::fabs(r[0] + a) > std::fabs(r[1] + a) ? r[0] : r[1];
        }
        out.equilibria.push_back({u, Stability::stable});
        return out;
    }

    const double s = std::sqrt(ba / d);
    const double u1 = -a + s, u2 = -a - s;
    const double fg1 = d * u1 - (b * u1 / (a + u1) + c);
    const double fg2 = d * u2 - (b * u2 / (a + u2) + c);
    const double scale = std::max({1.0, std::fabs(d * a), std::fabs(b), std::fabs(c)});
    const double tol = 1e-12 * scale;
    if (std::fabs(fg1) <= tol) {
        out.case_label = 'f';
        out.equilibria.push_back({u1, Stability::semistable});
        return out;
    }
    if (std::fabs(fg2) <= tol) {
        out.case_label = 'f';
        out.equilibria.push_back({u2, Stability::semistable});
        return out;
    }
    if (fg1 > 0 && fg2 < 0) {
        out.case_label = 'c';
        return out;
    }
    auto r = quadratic_roots(d, B, C);
    if (fg1 > 0 && fg2 > 0) {
        out.case_label = 'd';
        out.equilibria.push_back({r[0], Stability::stable});
        out.equilibria.push_back({r[1], Stability::unstable});
    } else {
        out.case_label = 'e';
        out.equilibria.push_back({r[0], Stability::unstable});
        out.equilibria.push_back({r[1], Stability::stable});
    }
    return out;
}

std::string to_json(const CaseClassification& c) {
    nlohmann::json j;
    j["case"] = std::string(1, c.case_label);
    j["roots"] = nlohmann::json::array();
    for (const auto& e : c.equilibria) j["roots"].push_back({{"value", e.value}, {"stability", to_string(e.stability)}});
    j["singularity"] = c.singularity ? nlohmann::json(*c.singularity) : nlohmann::json(nullptr);
    return j.dump();
}

ScalarEquilibriumProblem partial_problem(const PotentialState& s, const ModelSpec& spec, const WeightSet& w,
                                         std::size_t var) {
    validate(spec, s);
    validate(spec, w);
    require(var < spec.size(), "partial_equilibrium: index out of range");
    const auto& x = s.values;
    const auto& V = spec.vars[var];
    const auto& act = spec.activation;
    const Family fam = spec.family;
    auto emitted = [&](std::size_t src) {
        switch (fam) {
            case Family::mm1: return x[src];
            case Family::mm2:
            case Family::mm3:
            case Family::mm4: return activation(x[src], act);
            default: return highway_activation(x[src], x[spec.vars[src].emitter], act);
        }
    };
    double sum = 0.0;
    for (const auto& in : V.incoming) sum += in.coef * w.weight[in.source] * emitted(in.source);

    ScalarEquilibriumProblem p;
    p.d = w.decay[var];
    const bool unit = V.kind == VarKind::unit;
    const double U = spec.external_input[var];
    if (fam == Family::mm1) {
        p.c = activation(w.mask_c[var] * sum + (unit ? 0.0 : w.mask_b[var] * x[V.emitter]) + U, act);
        return p;
    }
    p.c = U + w.mask_c[var] * sum;
    if (unit) return p;
    if (fam == Family::mm2) {
        p.c += w.mask_b[var] * activation(x[V.emitter], act);
        return p;
    }
    p.b = w.mask_b[var] * activation(x[V.emitter], act);
    p.a = context_denominator(spec, x, V.emitter) - x[var];
    if (std::fabs(p.a) <= spec.guard) p.a = 0.0;
    return p;
}

CaseClassification partial_equilibrium(const PotentialState& s, const ModelSpec& spec, const WeightSet& w,
                                       std::size_t var) {
    return classify_case(partial_problem(s, spec, w, var));
}

namespace {

long node_of(const Index3& idx, int N, int M) {
    if (idx.k < 0 || idx.k > N || idx.j < 0 || idx.j > N || idx.i < 0 || idx.i > M) return -1;
    return (static_cast<long>(idx.k) * (N + 1) + idx.j) * (M + 1) + idx.i;
}

}  // namespace

AdditiveNetwork flatten_to_additive(const ModelSpec& spec, const WeightSet& w) {
    validate(spec);
    validate(spec, w);
    if (spec.family != Family::mm2)
        fail(ErrorCode::unsupported, "flatten_to_additive needs family mm2 (context terms are not additive)");
    require(spec.labeling == Labeling::feedforward, "flatten_to_additive needs feedforward labels");
    const int N = spec.shape.n_inputs, M = spec.shape.n_outputs;
    AdditiveNetwork net;
    net.dim = (N + 1) * (N + 1) * (M + 1);
    net.weight_matrix = Eigen::MatrixXd::Zero(net.dim, net.dim);
    net.decay = Eigen::VectorXd::Ones(net.dim);
    net.input = Eigen::VectorXd::Zero(net.dim);
    net.activation = spec.activation;
    net.variable_of_node.assign(net.dim, -1);
    net.node_index.resize(net.dim);
    net.fixed_value.assign(net.dim, 0.0);
    net.structural.assign(net.dim, true);
    for (int k = 0; k <= N; ++k)
        for (int j = 0; j <= N; ++j)
            for (int i = 0; i <= M; ++i) net.node_index[node_of({k, j, i}, N, M)] = {k, j, i};
    net.fixed_value[0] = 1.0;
    net.input[0] = 1.0;

    std::vector<long> node(spec.size());
    for (std::size_t v = 0; v < spec.size(); ++v) {
        node[v] = node_of(spec.vars[v].index, N, M);
        require(node[v] >= 0, "label outside the dense index space: " + spec.label(v));
        net.variable_of_node[node[v]] = static_cast<long>(v);
        net.structural[node[v]] = false;
    }
    for (std::size_t v = 0; v < spec.size(); ++v) {
        const auto& V = spec.vars[v];
        const long r = node[v];
        net.decay[r] = w.decay[v];
        net.input[r] = spec.external_input[v];
        for (const auto& in : V.incoming) net.weight_matrix(r, node[in.source]) += w.mask_c[v] * in.coef * w.weight[in.source];
        if (V.kind != VarKind::unit) net.weight_matrix(r, node[V.emitter]) += w.mask_b[v];
    }
    return net;
}

Eigen::VectorXd additive_rhs(const AdditiveNetwork& net, const Eigen::VectorXd& u) {
    Eigen::VectorXd a(u.size());
    for (int n = 0; n < u.size(); ++n) a[n] = activation(u[n], net.activation);
    return -net.decay.cwiseProduct(u) + net.weight_matrix * a + net.input;
}

Eigen::VectorXd additive_state(const AdditiveNetwork& net, const PotentialState& s) {
    Eigen::VectorXd u(net.dim);
    for (int n = 0; n < net.dim; ++n) {
        long v = net.variable_of_node[n];
        u[n] = v < 0 ? net.fixed_value[n] : s.values.at(v);
    }
    return u;
}

PotentialState tensor_state(const AdditiveNetwork& net, const Eigen::VectorXd& u, const ModelSpec& spec) {
    PotentialState s{std::vector<double>(spec.size(), 0.0), 0.0};
    for (int n = 0; n < net.dim; ++n)
        if (net.variable_of_node[n] >= 0) s.values[net.variable_of_node[n]] = u[n];
    return s;
}

Eigen::VectorXd additive_step_rk4(const AdditiveNetwork& net, const Eigen::VectorXd& u, double dt) {
    auto proj = [](Eigen::VectorXd v) {
        for (int n = 0; n < v.size(); ++n)
            if (!(v[n] > 0.0)) v[n] = 0.0;
        return v;
    };
    Eigen::VectorXd k1 = additive_rhs(net, u);
    Eigen::VectorXd k2 = additive_rhs(net, proj(u + 0.5 * dt * k1));
    Eigen::VectorXd k3 = additive_rhs(net, proj(u + 0.5 * dt * k2));
    Eigen::VectorXd k4 = additive_rhs(net, proj(u + dt * k3));
    Eigen::VectorXd out = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (int n = 0; n < out.size(); ++n)
        if (!(out[n] > 0.0)) out[n] = 0.0;
    return out;
}

double relu_energy_integral(double u, double alpha) { return u > alpha ? 0.5 * (u * u - alpha * alpha) : 0.0; }

double additive_energy(const Eigen::VectorXd& u, const AdditiveNetwork& net) {
    require(u.size() == net.dim, "energy: state dimension mismatch");
    const double scale = std::max(1.0, net.weight_matrix.cwiseAbs().maxCoeff());
    if ((net.weight_matrix - net.weight_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        fail(ErrorCode::invalid_argument, "additive_energy: weight matrix is not symmetric");
    require(net.activation.variant == Activation::relu, "additive_energy: relu activation required");
    Eigen::VectorXd a(u.size());
    double integral = 0.0;
    for (int n = 0; n < u.size(); ++n) {
        a[n] = activation(u[n], net.activation);
        integral += net.decay[n] * relu_energy_integral(u[n], net.activation.alpha);
    }
    return -0.5 * a.dot(net.weight_matrix * a) - net.input.dot(a) + integral;
}

AdditiveNetwork symmetrized(const AdditiveNetwork& net) {
    AdditiveNetwork out = net;
    out.weight_matrix = 0.5 * (net.weight_matrix + net.weight_matrix.transpose());
    return out;
}

std::vector<double> instant_output_linear(const std::vector<double>& inputs, const ModelSpec& spec,
                                          const WeightSet& w) {
    validate(spec, w);
    require(spec.family == Family::mm1 && spec.labeling == Labeling::feedforward,
            "instant_output_linear needs a feedforward mm1 model");
    require(spec.activation.alpha == 0.0, "instant_output_linear needs alpha = 0");
    auto in = spec.inputs();
    require(inputs.size() == in.size(), "instant_output_linear: input size mismatch");
    std::vector<double> pot(spec.size(), 0.0);
    for (std::size_t k = 0; k < in.size(); ++k) pot[in[k]] = inputs[k];
    std::vector<double> v;
    for (std::size_t o : output_units(spec)) {
        double vi = 0.0;
        for (const auto& c : spec.vars[o].incoming) {
            const auto& C = spec.vars[c.source];
            double inner = pot[C.emitter];
            for (const auto& m : C.incoming) inner += m.coef * w.weight[m.source] * pot[spec.vars[m.source].emitter];
            vi += c.coef * w.weight[c.source] * inner;
        }
        v.push_back(vi);
    }
    return v;
}

BoundReport check_trajectory_bounds(const Trajectory& traj, const ModelSpec& spec, const WeightSet& w,
                                    double slack) {
    BoundReport rep;
    auto inapplicable = [&](const std::string& why) {
        rep.applicable = false;
        rep.reason = why;
        return rep;
    };
    if (spec.family != Family::mm5 || spec.labeling != Labeling::feedforward)
        return inapplicable("bounds need a feedforward mm5 model");
    if (spec.activation.alpha != 0.0) return inapplicable("bounds need alpha = 0");
    if (spec.tau_r != 1.0) return inapplicable("bounds need tau_r = 1");
    if (traj.states.empty()) return inapplicable("empty trajectory");
    for (std::size_t v = 0; v < spec.size(); ++v) {
        if (spec.vars[v].kind != VarKind::unit && (w.weight[v] < 0.0 || w.weight[v] > 1.0))
            return inapplicable("weight outside [0,1] at " + spec.label(v));
        for (const auto& in : spec.vars[v].incoming)
            if (in.coef != 1.0) return inapplicable("signed influence at " + spec.label(v));
    }
    const auto& x0 = traj.states.front().values;
    for (std::size_t v = 0; v < spec.size(); ++v) {
        if (x0[v] < 0.0) return inapplicable("negative start at " + spec.label(v));
        if (spec.vars[v].input) {
            const double U = spec.external_input[v];
            if (U < 0.0 || U > 1.0) return inapplicable("input outside [0,1] at " + spec.label(v));
            if (x0[v] > 1.0) return inapplicable("input unit starts above 1 at " + spec.label(v));
        }
    }
    rep.applicable = true;
    const double N = spec.shape.n_inputs;
    const double t0 = traj.times.front();

    std::vector<double> lin(spec.size(), 0.0), quad(spec.size(), 0.0), cub(spec.size(), 0.0);
    std::vector<bool> bounded(spec.size(), false);
    for (std::size_t v = 0; v < spec.size(); ++v) {
        const auto& V = spec.vars[v];
        if (V.kind == VarKind::metaconnection) {
            lin[v] = 1.0;
            bounded[v] = true;
        } else if (V.kind == VarKind::connection) {
            double m0 = 0.0;
            for (const auto& in : V.incoming) m0 += x0[in.source];
            lin[v] = 1.0 + m0;
            quad[v] = (N - 1.0) / 2.0;
            bounded[v] = true;
        } else if (!V.input) {
            double c0 = 0.0, m0 = 0.0;
            for (const auto& in : V.incoming) {
                c0 += x0[in.source];
                for (const auto& mm : spec.vars[in.source].incoming) m0 += x0[mm.source];
            }
            lin[v] = c0;
            quad[v] = 0.5 * (N + m0);
            cub[v] = N * (N - 1.0) / 6.0;
            bounded[v] = true;
        }
    }
    bool first = true;
    for (std::size_t r = 0; r < traj.states.size(); ++r) {
        const double t = traj.times[r] - t0;
        const auto& x = traj.states[r].values;
        for (std::size_t v = 0; v < spec.size(); ++v) {
            if (!bounded[v]) continue;
            const double bound = x0[v] + t * lin[v] + t * t * quad[v] + t * t * t * cub[v];
            const double margin = bound - x[v];
            if (margin < -slack) ++rep.violations;
            if (first || margin < rep.tightest_margin) {
                rep.tightest_margin = margin;
                rep.tightest_label = spec.label(v);
                rep.tightest_time = traj.times[r];
                first = false;
            }
        }
    }
    return rep;
}

}  // namespace metanet
