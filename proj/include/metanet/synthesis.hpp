#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metanet/dynamics.hpp"

namespace metanet {

// input holds the external inputs U_k of the input units, output the desired output potentials.
struct TrainingPair {
    std::vector<double> input;
    std::vector<double> output;
};

enum class Aggregation { average, stacked };

struct SynthesisProblem {
    ModelSpec model;
    std::vector<TrainingPair> pairs;
    // 1-based input-unit indices.
    std::vector<int> unbiased_feature_units;
    bool nonneg_weights = false;
    double residual_tol = 1e-12;
    // Weights held at a given value instead of being solved for (keyed by variable index).
    std::map<std::size_t, double> fixed_weights;
    Aggregation aggregation = Aggregation::average;
    int max_iterations = 500;
    int stagnation_window = 50;
};

void validate(const SynthesisProblem& p);

class EquilibriumSystem {
public:
    EquilibriumSystem(const SynthesisProblem& p, std::vector<std::size_t> pair_indices);

    const std::vector<std::size_t>& unknowns() const { return unknowns_; }
    std::size_t rows() const { return pairs_.size() * outputs_.size(); }
    std::vector<double> residual(const std::vector<double>& x) const;
    WeightSet weights(const std::vector<double>& x) const;
    std::vector<double> unknowns_of(const WeightSet& w) const;
    // Closed-form equilibrium potentials of one pair under the given weights.
    PotentialState equilibrium(const TrainingPair& pair, const WeightSet& w) const;
    const ModelSpec& model() const { return spec_; }

private:
    ModelSpec spec_;
    std::vector<TrainingPair> pairs_;
    std::vector<bool> unbiased_;
    std::vector<std::size_t> unknowns_;
    std::vector<std::size_t> outputs_;
    WeightSet base_;
};

EquilibriumSystem build_equilibrium_system(const SynthesisProblem& p);

struct SynthesisSolution {
    WeightSet weights;
    std::vector<double> unknown_values;
    double residual = 0.0;
    bool success = false;
    int iterations = 0;
    double cycle_gain = 0.0;
    bool near_singular_cycle = false;
    std::vector<double> per_pair_recall_error;
    std::vector<std::string> warnings;
    std::string message;
};

// Levenberg-Marquardt with backtracking on the equilibrium residual.
SynthesisSolution solve_weights(const SynthesisProblem& p, std::vector<double> initial_guess = {});

// Spectral radius of the linearised output -> input -> output loop (0 without feedback).
double cycle_gain(const ModelSpec& spec, const WeightSet& w, const std::vector<int>& unbiased_feature_units);

struct RecallRecord {
    std::vector<double> outputs;
    double error = 0.0;
    bool converged = false;
    std::string message;
};

std::vector<RecallRecord> validate_recall(SynthesisSolution& sol, const SynthesisProblem& p,
                                          const SimulationConfig& sim);

struct BenchmarkReport {
    double accuracy = 0.0;
    double mean_recall_error = 0.0;
    std::size_t used_pairs = 0;
    std::vector<int> predicted;
    std::vector<int> expected;
    std::vector<std::string> warnings;
    SynthesisSolution solution;
};

BenchmarkReport classify_benchmark(const std::vector<TrainingPair>& train, const std::vector<TrainingPair>& test,
                                   const SynthesisProblem& p, const SimulationConfig& sim);

// "paper-scale" warning for MNIST-sized problems, empty otherwise.
std::string scale_warning(const NetworkShape& shape);

struct GlyphSet {
    std::vector<TrainingPair> train;
    std::vector<TrainingPair> test;
};

// 4x4 bar / cross / blob glyphs with pixel noise scaled to unit norm, one-hot outputs.
GlyphSet glyph_benchmark(int per_class, std::uint64_t seed);

std::string to_json(const SynthesisSolution& s, const ModelSpec& spec);
std::vector<TrainingPair> pairs_from_json(const std::string& text);

}  // namespace metanet
