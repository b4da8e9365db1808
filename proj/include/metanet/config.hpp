#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metanet/motifs.hpp"
#include "metanet/synthesis.hpp"
#include "metanet/vision.hpp"

namespace metanet {

inline constexpr int format_version = 1;

// A compiled model with its weights and starting state, as read from a model file.
struct ModelConfig {
    ModelSpec spec;
    WeightSet weights;
    PotentialState initial;
    std::optional<MotifDescriptor> motif;
};

// Accepts either {"motif": {...}} or an explicit family/shape description.
ModelConfig model_from_json(const std::string& text);
// {"format_version": 1, "weights": {"label": value, ...}}
void apply_weights_json(ModelConfig& m, const std::string& text);
// {"format_version": 1, "inputs": [U_1, ...]}
void apply_inputs_json(ModelConfig& m, const std::string& text);

std::size_t variable_by_label(const ModelSpec& spec, const std::string& label);

std::string to_json(const SimulationConfig& c);
SimulationConfig sim_config_from_json(const std::string& text);
std::string to_json(const DetectorConfig& c);
std::string to_json(const TrackerConfig& c);

struct ProblemConfig {
    SynthesisProblem problem;
    std::vector<double> initial_guess;
};

// A pairs file: a bare array of pairs or an object with "pairs" and optional "model", "unbiased",
// "aggregation", "fixed_weights", "nonneg_weights", "residual_tol", "max_iterations", "initial_guess".
ProblemConfig problem_from_json(const std::string& text);

std::string recall_json(const std::vector<RecallRecord>& r);
std::string to_json(const BenchmarkReport& r, const ModelSpec& spec);

}  // namespace metanet
