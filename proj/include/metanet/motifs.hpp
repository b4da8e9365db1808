#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "metanet/analysis.hpp"

namespace metanet {

enum class MotifKind { broadcast, meta, feedback, competitive_meta, competitive_feedback };

std::string to_string(MotifKind k);
MotifKind motif_kind_from_string(const std::string& s);
const std::vector<std::string>& motif_parameter_names(MotifKind k);

struct MotifDescriptor {
    MotifKind kind = MotifKind::broadcast;
    std::map<std::string, double> parameters;

    double operator[](const std::string& name) const;
};

// Throws unless the parameter names match the kind exactly.
void validate(const MotifDescriptor& m);
MotifDescriptor make_motif(MotifKind kind, const std::map<std::string, double>& params);
MotifDescriptor default_motif(MotifKind kind);

struct MotifModel {
    ModelSpec spec;
    WeightSet weights;
    // Conventional coordinate name for each compiled variable.
    std::vector<std::string> coordinates;
    std::size_t first = npos;   // u_1^1
    std::size_t second = npos;  // u_1^2
};

MotifModel build_motif(const MotifDescriptor& m);

struct EquilibriumPoint {
    std::string label;
    std::vector<double> state;
    Stability stability = Stability::stable;
    bool empirical = false;
    // Unbalancing direction used to probe unstable points.
    std::vector<double> probe;
};

struct EquilibriumLine {
    std::string label;
    std::vector<double> base;
    std::vector<double> direction;
    double s_min = 0.0;
    double s_max = 0.0;
    // Coordinates held at zero by the resetting condition along part of the line.
    std::vector<bool> clamped;
    std::vector<double> at(double s) const;
};

struct EquilibriumSet {
    enum class Kind { point, line_segment, none };
    Kind kind = Kind::none;
    std::vector<EquilibriumPoint> points;
    std::optional<EquilibriumLine> line;
    bool at_infinity = false;
    std::string outcome;
    // Stored potentials of silent emitters: frozen at any value, ignored when matching.
    std::vector<std::size_t> storage;
    std::vector<std::string> coordinates;
};

std::string to_string(EquilibriumSet::Kind k);

EquilibriumSet motif_equilibria(const MotifDescriptor& m);

inline constexpr double infinity_gain_tolerance = 1e-9;

struct MotifRun {
    std::vector<double> start;
    std::vector<double> limit;
    std::string matched;
    double error = 0.0;
    bool converged = false;
    bool diverged = false;
    std::string message;
    bool ok = false;
};

struct MotifProbe {
    std::string label;
    double displacement = 0.0;
    bool departed = false;
};

struct MotifReport {
    MotifDescriptor motif;
    EquilibriumSet equilibria;
    std::vector<MotifRun> runs;
    std::vector<MotifProbe> probes;
    double max_error = 0.0;
    bool passed = false;
};

// 5x5 grid of (u_1^1, u_1^2) starts over [0, 2 U_1]; everything else at rest, inputs at U.
std::vector<std::vector<double>> basin_grid(const MotifDescriptor& m, int per_axis = 5);
std::vector<double> motif_start(const MotifDescriptor& m, double first, double second);

// Relative distance of x from the closest element of the set, with its label.
std::pair<double, std::string> match_equilibrium(const EquilibriumSet& set, const std::vector<double>& x);

MotifReport verify_motif(const MotifDescriptor& m, const SimulationConfig& cfg,
                         std::vector<std::vector<double>> starts = {}, double tolerance = 1e-6);

// Random parameters inside the regime where the closed forms and their stability claims apply.
MotifDescriptor sample_admissible(MotifKind kind, std::mt19937_64& rng);

std::string to_json(const MotifDescriptor& m);
MotifDescriptor motif_from_json(const std::string& text);
std::string to_json(const EquilibriumSet& s);
std::string to_json(const MotifReport& r);

}  // namespace metanet
