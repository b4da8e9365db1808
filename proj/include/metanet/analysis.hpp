#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metanet/dynamics.hpp"

namespace metanet {

struct ScalarEquilibriumProblem {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;
};

enum class Stability { stable, unstable, semistable };
std::string to_string(Stability s);

struct Equilibrium {
    double value = 0.0;
    Stability stability = Stability::stable;
};

struct CaseClassification {
    char case_label = 'b';
    std::vector<Equilibrium> equilibria;
    std::optional<double> singularity;
};

inline constexpr double case_b_tolerance = 1e-14;

CaseClassification classify_case(const ScalarEquilibriumProblem& p);
std::string to_json(const CaseClassification& c);

// g(u) - f(u) of the scalar problem, i.e. its du/dt.
double scalar_rhs(const ScalarEquilibriumProblem& p, double u);

ScalarEquilibriumProblem partial_problem(const PotentialState& s, const ModelSpec& spec, const WeightSet& w,
                                         std::size_t var);
CaseClassification partial_equilibrium(const PotentialState& s, const ModelSpec& spec, const WeightSet& w,
                                       std::size_t var);

struct AdditiveNetwork {
    int dim = 0;
    Eigen::MatrixXd weight_matrix;
    Eigen::VectorXd decay;
    Eigen::VectorXd input;
    ActivationParams activation;
    // Dense node (k,j,i) -> compiled variable, -1 for structural nodes.
    std::vector<long> variable_of_node;
    std::vector<Index3> node_index;
    std::vector<double> fixed_value;
    std::vector<bool> structural;
};

AdditiveNetwork flatten_to_additive(const ModelSpec& spec, const WeightSet& w);
Eigen::VectorXd additive_rhs(const AdditiveNetwork& net, const Eigen::VectorXd& u);
Eigen::VectorXd additive_state(const AdditiveNetwork& net, const PotentialState& s);
PotentialState tensor_state(const AdditiveNetwork& net, const Eigen::VectorXd& u, const ModelSpec& spec);
Eigen::VectorXd additive_step_rk4(const AdditiveNetwork& net, const Eigen::VectorXd& u, double dt);

double relu_energy_integral(double u, double alpha);
double additive_energy(const Eigen::VectorXd& u, const AdditiveNetwork& net);
AdditiveNetwork symmetrized(const AdditiveNetwork& net);

// v_i = sum_j w_j^i (sum_{k != j} w_k^{ji} u_k + u_j) over a feedforward mm1 model.
std::vector<double> instant_output_linear(const std::vector<double>& inputs, const ModelSpec& spec,
                                          const WeightSet& w);

struct BoundReport {
    bool applicable = false;
    std::string reason;
    long violations = 0;
    double tightest_margin = 0.0;
    std::string tightest_label;
    double tightest_time = 0.0;
};

BoundReport check_trajectory_bounds(const Trajectory& traj, const ModelSpec& spec, const WeightSet& w,
                                    double slack = 0.0);

}  // namespace metanet
