#include "metanet/core.hpp"

#include <cmath>

namespace metanet {

void validate(const NetworkShape& shape) {
    require(shape.n_inputs >= 1, "n_inputs must be >= 1");
    require(shape.n_outputs >= 1, "n_outputs must be >= 1");
}

std::string to_string(Activation v) {
    switch (v) {
        case Activation::relu: return "relu";
        case Activation::storage_discontinuous: return "storage_discontinuous";
        case Activation::highway: return "highway";
    }
    return "relu";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "storage_discontinuous") return Activation::storage_discontinuous;
    if (s == "highway") return Activation::highway;
    fail(ErrorCode::invalid_argument, "unknown activation variant '" + s + "'");
}

std::string to_string(Integrator v) {
    switch (v) {
        case Integrator::euler: return "euler";
        case Integrator::rk4: return "rk4";
        case Integrator::paper_euler: return "paper-euler";
    }
    return "euler";
}

Integrator integrator_from_string(const std::string& s) {
    if (s == "euler") return Integrator::euler;
    if (s == "rk4") return Integrator::rk4;
    if (s == "paper-euler" || s == "paper_euler") return Integrator::paper_euler;
    fail(ErrorCode::invalid_argument, "unknown integrator '" + s + "'");
}

std::vector<std::string> validate(const SimulationConfig& cfg) {
    std::vector<std::string> warnings;
    require(cfg.tau_r > 0, "tau_r must be positive");
    require(cfg.tau_w > 0, "tau_w must be positive");
    require(cfg.dt > 0, "dt must be positive");
    require(cfg.max_steps > 0, "max_steps must be positive");
    require(cfg.convergence_eps > 0, "convergence_eps must be positive");
    require(cfg.denominator_guard >= 0, "denominator_guard must be nonnegative");
    require(cfg.window >= 1, "window must be >= 1");
    require(cfg.stride >= 1, "stride must be >= 1");
    require(cfg.ceiling > 0, "ceiling must be positive");
    require(cfg.threads >= 1, "threads must be >= 1");
    require(cfg.tau_w >= cfg.tau_r, "tau_w must be >= tau_r");
    require(cfg.dt <= cfg.tau_r, "dt must not exceed tau_r");
    if (cfg.tau_w < 10 * cfg.tau_r) warnings.push_back("tau_w is less than 10*tau_r");
    return warnings;
}

double activation(double u, const ActivationParams& p) {
    if (p.variant == Activation::relu) return u > p.alpha ? u - p.alpha : 0.0;
    return u > p.alpha ? u : 0.0;
}

double highway_activation(double c, double u, const ActivationParams& p) {
    return (c > p.alpha && u > p.alpha) ? c : 0.0;
}

int indicator(double denom, double guard) { return std::fabs(denom) > guard ? 1 : 0; }

double distribution(double c, double u, double denom, int fan_out, const ActivationParams& p, double guard) {
    double au = activation(u, p);
    if (denom > guard) return c * au / denom;
    return fan_out > 0 ? au / fan_out : 0.0;
}

double distribution(double c, double u, double denom, const NetworkShape& shape, const ActivationParams& p,
                    double guard) {
    return distribution(c, u, denom, shape.n_inputs * shape.n_outputs, p, guard);
}

}  // namespace metanet
