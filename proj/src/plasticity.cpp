#include "metanet/plasticity.hpp"

#include <cmath>

#include "metanet/dynamics.hpp"

namespace metanet {

void validate(const PlasticityConfig& cfg) {
    require(cfg.tau_w > 0 && std::isfinite(cfg.tau_w), "tau_w must be positive");
    require(cfg.epsilon > 0 && std::isfinite(cfg.epsilon), "epsilon must be positive");
}

double weight_rhs(double w, double u, double tau_w) {
    require(u >= 0.0, "weight_rhs needs a nonnegative potential");
    return (-u * w + u * u) / tau_w;
}

std::vector<int> default_plasticity_mask(const ModelSpec& spec, const WeightSet& w) {
    std::vector<int> mask(spec.size(), 0);
    for (std::size_t v = 0; v < spec.size(); ++v)
        mask[v] = spec.vars[v].kind != VarKind::unit && w.weight[v] >= 0.0 ? 1 : 0;
    return mask;
}

WeightSet update_weights(const WeightSet& weights, const PotentialState& state, const ModelSpec& spec,
                         const PlasticityConfig& cfg) {
    validate(cfg);
    validate(spec, weights);
    validate(spec, state);
    const auto mask = cfg.enabled_mask.empty() ? default_plasticity_mask(spec, weights) : cfg.enabled_mask;
    require(mask.size() == spec.size(), "plasticity mask size does not match model");
    WeightSet out = weights;
    for (std::size_t v = 0; v < spec.size(); ++v) {
        if (!mask[v]) continue;
        require(spec.vars[v].kind != VarKind::unit, "plasticity mask selects a unit: " + spec.label(v));
        const double u = state.values[v];
        if (u == 0.0) continue;
        double w = weights.weight[v] + cfg.epsilon * (-u * weights.weight[v] + u * u);
        if (cfg.clamp_unit) w = std::min(1.0, std::max(0.0, w));
        out.weight[v] = w;
    }
    return out;
}

CoupledStep coupled_step(const PotentialState& s, const WeightSet& w, const ModelSpec& spec, double dt,
                         const PlasticityConfig& cfg) {
    CoupledStep out;
    out.state = step_rk4(s, spec, w, dt);
    out.weights = update_weights(w, out.state, spec, cfg);
    return out;
}

}  // namespace metanet
