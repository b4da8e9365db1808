#pragma once

#include <vector>

#include "metanet/network.hpp"

namespace metanet {

struct PlasticityConfig {
    double tau_w = 100.0;
    double epsilon = 0.01;
    // 1 where the weight adapts; empty means the default mask.
    std::vector<int> enabled_mask;
    bool clamp_unit = false;
};

void validate(const PlasticityConfig& cfg);

// (-u w + u^2) / tau_w
double weight_rhs(double w, double u, double tau_w = 1.0);

// Connections and metaconnections adapt; negative (inhibitory) weights and units do not.
std::vector<int> default_plasticity_mask(const ModelSpec& spec, const WeightSet& w);

WeightSet update_weights(const WeightSet& weights, const PotentialState& state, const ModelSpec& spec,
                         const PlasticityConfig& cfg);

// One coupled step: activity advances by dt, then weights take one discrete update.
struct CoupledStep {
    PotentialState state;
    WeightSet weights;
};
CoupledStep coupled_step(const PotentialState& s, const WeightSet& w, const ModelSpec& spec, double dt,
                         const PlasticityConfig& cfg);

}  // namespace metanet
