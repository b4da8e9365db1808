#include "metanet/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace metanet {

double context_denominator(const ModelSpec& spec, const std::vector<double>& x, std::size_t unit) {
    require(unit < spec.size() && spec.vars[unit].kind == VarKind::unit, "context_denominator needs a unit");
    double h = 0.0;
    for (std::size_t o : spec.emits[unit]) h += x[o];
    return h;
}

void rhs(const ModelSpec& spec, const WeightSet& w, const double* x, double* out) {
    const std::size_t n = spec.size();
    const auto& act = spec.activation;
    const Family fam = spec.family;

    std::vector<double> h(n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t o : spec.emits[u]) h[u] += x[o];

    auto emitted = [&](std::size_t s) -> double {
        switch (fam) {
            case Family::mm1: return x[s];
            case Family::mm2:
            case Family::mm3:
            case Family::mm4: return activation(x[s], act);
            default: return highway_activation(x[s], x[spec.vars[s].emitter], act);
        }
    };

    for (std::size_t v = 0; v < n; ++v) {
        const Variable& V = spec.vars[v];
        double sum = 0.0;
        for (const auto& in : V.incoming) sum += in.coef * w.weight[in.source] * emitted(in.source);
        const double d = w.decay[v], U = spec.external_input[v];
        const double c = w.mask_c[v], b = w.mask_b[v];
        const bool unit = V.kind == VarKind::unit;
        double e = 0.0;
        if (!unit && fam != Family::mm1 && fam != Family::mm2)
            e = distribution(x[v], x[V.emitter], h[V.emitter], spec.fan_out(V.emitter), act, spec.guard);
        double r = 0.0;
        switch (fam) {
            case Family::mm1:
                r = -d * x[v] + activation(c * sum + (unit ? 0.0 : b * x[V.emitter]) + U, act);
                break;
            case Family::mm2:
                r = -d * x[v] + c * sum + (unit ? 0.0 : b * activation(x[V.emitter], act)) + U;
                break;
            case Family::mm3: r = -d * x[v] + c * sum + b * e + U; break;
            case Family::mm4: r = -d * activation(x[v], act) + c * sum + b * e + U; break;
            default:
                if (unit)
                    r = -d * activation(x[v], act) + c * sum + U;
                else
                    r = -d * highway_activation(x[v], x[V.emitter], act) + c * sum + b * e + U;
        }
        out[v] = r;
    }
}

std::vector<double> rhs(const PotentialState& s, const ModelSpec& spec, const WeightSet& w) {
    validate(spec, s);
    validate(spec, w);
    std::vector<double> out(spec.size());
    rhs(spec, w, s.values.data(), out.data());
    return out;
}

void project(std::vector<double>& x) {
    for (double& v : x)
        if (!(v > 0.0) && !std::isnan(v)) v = 0.0;
}

namespace {

void euler_into(std::vector<double>& x, const std::vector<double>& k1, double h) {
    for (std::size_t v = 0; v < x.size(); ++v) x[v] += h * k1[v];
    project(x);
}

void rk4_into(const ModelSpec& spec, const WeightSet& w, std::vector<double>& x, const std::vector<double>& k1,
              double h, std::vector<double>& tmp, std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4) {
    const std::size_t n = x.size();
    // stages are evaluated on the projected state so pinned coordinates stay exact
    for (std::size_t v = 0; v < n; ++v) tmp[v] = x[v] + 0.5 * h * k1[v];
    project(tmp);
    rhs(spec, w, tmp.data(), k2.data());
    for (std::size_t v = 0; v < n; ++v) tmp[v] = x[v] + 0.5 * h * k2[v];
    project(tmp);
    rhs(spec, w, tmp.data(), k3.data());
    for (std::size_t v = 0; v < n; ++v) tmp[v] = x[v] + h * k3[v];
    project(tmp);
    rhs(spec, w, tmp.data(), k4.data());
    for (std::size_t v = 0; v < n; ++v) x[v] += h / 6.0 * (k1[v] + 2.0 * k2[v] + 2.0 * k3[v] + k4[v]);
    project(x);
}

double projected_residual(const std::vector<double>& x, const std::vector<double>& k) {
    double r = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) {
        if (x[v] <= 0.0 && k[v] < 0.0) continue;
        r = std::max(r, std::fabs(k[v]));
    }
    return r;
}

}  // namespace

PotentialState step_euler(const PotentialState& s, const ModelSpec& spec, const WeightSet& w, double dt) {
    validate(spec, s);
    validate(spec, w);
    require(dt > 0, "dt must be positive");
    std::vector<double> k1(spec.size());
    rhs(spec, w, s.values.data(), k1.data());
    PotentialState out = s;
    euler_into(out.values, k1, dt / spec.tau_r);
    out.time = s.time + dt / spec.tau_r;
    return out;
}

PotentialState step_rk4(const PotentialState& s, const ModelSpec& spec, const WeightSet& w, double dt) {
    validate(spec, s);
    validate(spec, w);
    require(dt > 0, "dt must be positive");
    const std::size_t n = spec.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    rhs(spec, w, s.values.data(), k1.data());
    PotentialState out = s;
    rk4_into(spec, w, out.values, k1, dt / spec.tau_r, tmp, k2, k3, k4);
    out.time = s.time + dt / spec.tau_r;
    return out;
}

Trajectory simulate(const PotentialState& s0, const ModelSpec& spec, const WeightSet& w, const SimulationConfig& cfg) {
    validate(cfg);
    validate(spec);
    validate(spec, w);
    validate(spec, s0);
    const std::size_t n = spec.size();
    const double dt = cfg.integrator == Integrator::paper_euler ? spec.tau_r : cfg.dt;
    const double h = dt / spec.tau_r;

    Trajectory traj;
    std::vector<double> x = s0.values, k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = s0.time;
    traj.times.push_back(t);
    traj.states.push_back({x, t});

    int quiet = 0;
    long step = 0;
    double residual = 0.0;
    bool recorded_last = true;
    for (;;) {
        rhs(spec, w, x.data(), k1.data());
        residual = projected_residual(x, k1);
        quiet = residual < cfg.convergence_eps ? quiet + 1 : 0;
        if (quiet >= cfg.window) {
            traj.converged = true;
            break;
        }
        if (step >= cfg.max_steps) break;
        if (cfg.integrator == Integrator::rk4)
            rk4_into(spec, w, x, k1, h, tmp, k2, k3, k4);
        else
            euler_into(x, k1, h);
        ++step;
        t = s0.time + static_cast<double>(step) * h;
        for (std::size_t v = 0; v < n; ++v) {
            if (!std::isfinite(x[v]) || std::fabs(x[v]) > cfg.ceiling) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "divergence: %s = %g exceeds ceiling %g at t = %g",
                              spec.label(v).c_str(), x[v], cfg.ceiling, t);
                fail(ErrorCode::divergence, buf);
            }
        }
        recorded_last = step % cfg.stride == 0;
        if (recorded_last) {
            traj.times.push_back(t);
            traj.states.push_back({x, t});
        }
    }
    if (!recorded_last) {
        traj.times.push_back(t);
        traj.states.push_back({x, t});
    }
    traj.final_residual = residual;
    traj.steps = step;
    return traj;
}

void write_csv(std::ostream& os, const ModelSpec& spec, const Trajectory& traj) {
    os << "time";
    for (std::size_t v = 0; v < spec.size(); ++v) os << ',' << spec.label(v);
    os << '\n';
    char buf[32];
    for (std::size_t r = 0; r < traj.states.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[r]);
        os << buf;
        for (double v : traj.states[r].values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << ',' << buf;
        }
        os << '\n';
    }
}

}  // namespace metanet
