#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "metanet/core.hpp"

namespace metanet {

enum class Family { mm1, mm2, mm3, mm4, mm5, mm11, mm12, mm13, mm100 };

std::string to_string(Family f);
Family family_from_string(const std::string& s);
bool is_feedforward_family(Family f);

enum class VarKind { unit, connection, metaconnection };

std::string to_string(VarKind k);

// Feedforward labels: input k = (k,0,0), output i = (0,0,i), connection j->i = (j,0,i),
// metaconnection from k onto j->i = (k,j,i).
// Renumbered labels: every unit p = (0,0,p), same pattern for connections and metaconnections.
enum class Labeling { feedforward, renumbered };

struct Index3 {
    int k = 0;
    int j = 0;
    int i = 0;
    friend auto operator<=>(const Index3&, const Index3&) = default;
};

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct Influence {
    std::size_t source = npos;
    double coef = 1.0;
};

struct Variable {
    VarKind kind = VarKind::unit;
    Index3 index;
    int population = 0;
    bool input = false;
    std::size_t emitter = npos;
    std::vector<Influence> incoming;
};

struct ModelSpec {
    Family family = Family::mm5;
    NetworkShape shape;
    ActivationParams activation;
    double tau_r = 1.0;
    double guard = default_guard;
    Labeling labeling = Labeling::feedforward;
    bool paired = false;
    std::vector<Variable> vars;
    std::vector<std::vector<std::size_t>> emits;
    std::vector<double> external_input;

    std::size_t size() const { return vars.size(); }
    std::optional<std::size_t> lookup(const Index3& idx, int population = 0) const;
    std::size_t find(const Index3& idx, int population = 0) const;
    std::string label(std::size_t v) const;
    int fan_out(std::size_t unit) const { return static_cast<int>(emits[unit].size()); }
    std::vector<std::size_t> units() const;
    std::vector<std::size_t> inputs() const;

    std::map<std::tuple<int, int, int, int>, std::size_t> by_label;
};

struct WeightSet {
    std::vector<double> weight;
    std::vector<double> mask_b;
    std::vector<double> mask_c;
    std::vector<double> decay;
};

struct PotentialState {
    std::vector<double> values;
    double time = 0.0;
};

class ModelBuilder {
public:
    ModelBuilder(Family family, Labeling labeling, NetworkShape shape);

    std::size_t add_unit(const Index3& label, bool input, int population = 0);
    std::size_t add_connection(std::size_t from_unit, std::size_t to_unit, const Index3& label, int population = 0);
    std::size_t add_metaconnection(std::size_t from_unit, std::size_t onto, const Index3& label, int population = 0);
    void add_influence(std::size_t target, std::size_t source, double coef);
    void set_activation(const ActivationParams& p) { spec_.activation = p; }
    void set_paired(bool p) { spec_.paired = p; }
    ModelSpec build();

private:
    std::size_t add(Variable v);
    ModelSpec spec_;
};

ModelSpec build_feedforward(Family family, NetworkShape shape, bool metaconnections = true);

struct RecurrentTopology {
    bool forward_meta = true;
    bool lateral = false;
    bool feedback = false;
    bool feedback_meta = false;
};

ModelSpec build_recurrent(Family family, NetworkShape shape, const RecurrentTopology& topo);
ModelSpec build_fully_recurrent(NetworkShape shape);
ModelSpec build_paired(NetworkShape shape);

WeightSet default_weights(const ModelSpec& spec, double w = 1.0);
PotentialState zero_state(const ModelSpec& spec);

void validate(const ModelSpec& spec);
void validate(const ModelSpec& spec, const WeightSet& weights);
void validate(const ModelSpec& spec, const PotentialState& state);

// Sets the external input of input unit k (1-based).
void set_input(ModelSpec& spec, int k, double value);
std::vector<std::size_t> output_units(const ModelSpec& spec);

}  // namespace metanet
