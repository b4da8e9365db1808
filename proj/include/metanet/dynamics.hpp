#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "metanet/network.hpp"

namespace metanet {

struct Trajectory {
    std::vector<double> times;
    std::vector<PotentialState> states;
    bool converged = false;
    double final_residual = 0.0;
    long steps = 0;
};

// Sum of the potentials a unit currently emits through (h for that unit).
double context_denominator(const ModelSpec& spec, const std::vector<double>& x, std::size_t unit);

// tau_r * du/dt for every variable.
void rhs(const ModelSpec& spec, const WeightSet& w, const double* x, double* out);
std::vector<double> rhs(const PotentialState& s, const ModelSpec& spec, const WeightSet& w);

void project(std::vector<double>& x);

PotentialState step_euler(const PotentialState& s, const ModelSpec& spec, const WeightSet& w, double dt);
PotentialState step_rk4(const PotentialState& s, const ModelSpec& spec, const WeightSet& w, double dt);

Trajectory simulate(const PotentialState& s0, const ModelSpec& spec, const WeightSet& w, const SimulationConfig& cfg);

void write_csv(std::ostream& os, const ModelSpec& spec, const Trajectory& traj);

}  // namespace metanet
