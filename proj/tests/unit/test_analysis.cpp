#include <gtest/gtest.h>

#include <random>

#include "metanet/analysis.hpp"
#include "metanet/motifs.hpp"
#include "oracles.hpp"

using namespace metanet;

TEST(Classify, CaseB) {
    const auto c = classify_case({0, 0, 2, 1});
    EXPECT_EQ(c.case_label, 'b');
    ASSERT_EQ(c.equilibria.size(), 1u);
    EXPECT_DOUBLE_EQ(c.equilibria[0].value, 2.0);
    EXPECT_EQ(c.equilibria[0].stability, Stability::stable);
}

TEST(Classify, CaseFSemistable) {
    const auto c = classify_case({1, 1, 0, 1});
    EXPECT_EQ(c.case_label, 'f');
    ASSERT_EQ(c.equilibria.size(), 1u);
    EXPECT_NEAR(c.equilibria[0].value, 0.0, 1e-12);
    EXPECT_EQ(c.equilibria[0].stability, Stability::semistable);
}

TEST(Classify, CaseE) {
    const auto c = classify_case({0.25, 1, 0, 1});
    EXPECT_EQ(c.case_label, 'e');
    ASSERT_EQ(c.equilibria.size(), 2u);
    bool saw_stable = false, saw_unstable = false;
    for (const auto& e : c.equilibria) {
        if (e.stability == Stability::stable) {
            EXPECT_NEAR(e.value, 0.75, 1e-12);
            saw_stable = true;
        } else {
            EXPECT_NEAR(e.value, 0.0, 1e-12);
            saw_unstable = true;
        }
    }
    EXPECT_TRUE(saw_stable && saw_unstable);
}

TEST(Classify, RootsSolveScalarEquation) {
    std::mt19937_64 rng(11);
    for (int n = 0; n < 300; ++n) {
        const auto p = oracle::random_problem(rng);
        for (const auto& e : classify_case(p).equilibria)
            EXPECT_NEAR(scalar_rhs(p, e.value), 0.0, 1e-8 * (1 + std::fabs(p.b) + std::fabs(p.c) + p.d * std::fabs(e.value)));
    }
}

TEST(Classify, JsonHasLabel) {
    EXPECT_NE(to_json(classify_case({0, 0, 2, 1})).find("\"b\""), std::string::npos);
}

TEST(PartialEquilibrium, UnitIsAlwaysCaseB) {
    ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    set_input(s, 1, 0.7);
    const auto c = partial_equilibrium(zero_state(s), s, default_weights(s), s.find({1, 0, 0}));
    EXPECT_EQ(c.case_label, 'b');
    EXPECT_NEAR(c.equilibria.at(0).value, 0.7, 1e-15);
}

TEST(PartialEquilibrium, SoleOutputMetaconnection) {
    const ModelSpec s = build_feedforward(Family::mm5, {2, 1}, true);
    PotentialState st = zero_state(s);
    st.values[s.find({2, 0, 0})] = 1.3;
    st.values[s.find({2, 1, 1})] = 0.2;
    const auto c = partial_equilibrium(st, s, default_weights(s), s.find({2, 1, 1}));
    EXPECT_EQ(c.case_label, 'b');
    EXPECT_NEAR(c.equilibria.at(0).value, 1.3, 1e-12);
}

TEST(PartialEquilibrium, SilentNeighbourhood) {
    ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    set_input(s, 1, 0.4);
    WeightSet w = default_weights(s);
    w.decay[s.find({1, 0, 0})] = 2.0;
    const auto c = partial_equilibrium(zero_state(s), s, w, s.find({1, 0, 0}));
    EXPECT_NEAR(c.equilibria.at(0).value, 0.2, 1e-15);
}

TEST(PartialEquilibrium, RejectsOutOfRange) {
    const ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    EXPECT_THROW(partial_equilibrium(zero_state(s), s, default_weights(s), s.size()), Error);
}

TEST(Flatten, SmallestMm2HasEightNodes) {
    const ModelSpec s = build_feedforward(Family::mm2, {1, 1}, true);
    const AdditiveNetwork net = flatten_to_additive(s, default_weights(s));
    EXPECT_EQ(net.dim, 8);
    // input -> connection and connection -> output; N = 1 leaves no metaconnection
    EXPECT_EQ((net.weight_matrix.array() != 0.0).count(), 2);
    EXPECT_EQ(net.weight_matrix(5, 4), 1.0);
    EXPECT_EQ(net.weight_matrix(1, 5), 1.0);
}

TEST(Flatten, ZeroWeightsDecouple) {
    ModelSpec s = build_feedforward(Family::mm2, {2, 2}, true);
    set_input(s, 1, 0.5);
    const AdditiveNetwork net = flatten_to_additive(s, default_weights(s, 0.0));
    // the emitter coupling b of each connection is structural, every weighted entry vanishes
    for (int r = 0; r < net.dim; ++r)
        for (int c = 0; c < net.dim; ++c) {
            if (net.weight_matrix(r, c) == 0.0) continue;
            const long v = net.variable_of_node[r];
            ASSERT_GE(v, 0);
            EXPECT_NE(s.vars[v].kind, VarKind::unit);
            EXPECT_EQ(net.variable_of_node[c], static_cast<long>(s.vars[v].emitter));
        }
}

TEST(Flatten, RejectsContextFamilies) {
    const ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    EXPECT_THROW(flatten_to_additive(s, default_weights(s)), Error);
}

TEST(Flatten, RoundTripState) {
    ModelSpec s = build_feedforward(Family::mm2, {2, 1}, true);
    PotentialState st = zero_state(s);
    for (std::size_t v = 0; v < st.values.size(); ++v) st.values[v] = 0.1 * (v + 1);
    const AdditiveNetwork net = flatten_to_additive(s, default_weights(s));
    EXPECT_EQ(tensor_state(net, additive_state(net, st), s).values, st.values);
}

TEST(Energy, ZeroAtOrigin) {
    const ModelSpec s = build_feedforward(Family::mm2, {1, 1}, true);
    const AdditiveNetwork net = symmetrized(flatten_to_additive(s, default_weights(s, 0.0)));
    EXPECT_DOUBLE_EQ(additive_energy(Eigen::VectorXd::Zero(net.dim), net), 0.0);
}

TEST(Energy, SingleNode) {
    AdditiveNetwork net;
    net.dim = 1;
    net.weight_matrix = Eigen::MatrixXd::Zero(1, 1);
    net.decay = Eigen::VectorXd::Ones(1);
    net.input = Eigen::VectorXd::Ones(1);
    net.variable_of_node = {0};
    net.node_index = {{1, 0, 0}};
    net.fixed_value = {0.0};
    net.structural = {false};
    EXPECT_DOUBLE_EQ(additive_energy(Eigen::VectorXd::Ones(1), net), -0.5);
    EXPECT_DOUBLE_EQ(relu_energy_integral(1.0, 0.0), 0.5);
}

TEST(Energy, RejectsAsymmetric) {
    ModelSpec s = build_feedforward(Family::mm2, {1, 1}, true);
    const AdditiveNetwork net = flatten_to_additive(s, default_weights(s));
    EXPECT_THROW(additive_energy(Eigen::VectorXd::Zero(net.dim), net), Error);
}

TEST(InstantOutput, MetaconnectionExample) {
    const ModelSpec s = build_feedforward(Family::mm1, {2, 1}, true);
    WeightSet w = default_weights(s, 0.0);
    w.weight[s.find({1, 0, 1})] = 1.0;
    w.weight[s.find({2, 0, 1})] = 1.0;
    w.weight[s.find({2, 1, 1})] = 1.0;
    w.weight[s.find({1, 2, 1})] = 0.0;
    const auto v = instant_output_linear({1.0, 1.0}, s, w);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_DOUBLE_EQ(v[0], 3.0);
}

TEST(InstantOutput, PlainWeightedSum) {
    const ModelSpec s = build_feedforward(Family::mm1, {3, 2}, true);
    WeightSet w = default_weights(s, 0.0);
    w.weight[s.find({1, 0, 1})] = 0.5;
    w.weight[s.find({3, 0, 1})] = 2.0;
    w.weight[s.find({2, 0, 2})] = -1.0;
    const auto v = instant_output_linear({1.0, 2.0, 3.0}, s, w);
    EXPECT_DOUBLE_EQ(v[0], 6.5);
    EXPECT_DOUBLE_EQ(v[1], -2.0);
}

TEST(Bounds, ZeroTrajectory) {
    const ModelSpec s = build_feedforward(Family::mm5, {2, 2}, true);
    SimulationConfig cfg;
    const auto t = simulate(zero_state(s), s, default_weights(s), cfg);
    const auto r = check_trajectory_bounds(t, s, default_weights(s));
    EXPECT_TRUE(r.applicable);
    EXPECT_EQ(r.violations, 0);
}

TEST(Bounds, RandomNetworksHold) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> X(0.0, 1.0);
    for (int n = 0; n < 5; ++n) {
        ModelSpec s = build_feedforward(Family::mm5, {3, 3}, true);
        WeightSet w = default_weights(s);
        for (std::size_t v = 0; v < s.size(); ++v)
            if (s.vars[v].kind != VarKind::unit) w.weight[v] = X(rng);
        for (int k = 1; k <= 3; ++k) set_input(s, k, X(rng));
        SimulationConfig cfg;
        cfg.integrator = Integrator::rk4;
        cfg.max_steps = 1000;
        cfg.stride = 1;
        const auto r = check_trajectory_bounds(simulate(zero_state(s), s, w, cfg), s, w);
        EXPECT_TRUE(r.applicable);
        EXPECT_EQ(r.violations, 0);
    }
}

TEST(Bounds, InapplicableForLargeInput) {
    ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    set_input(s, 1, 2.0);
    SimulationConfig cfg;
    cfg.max_steps = 100;
    const auto r = check_trajectory_bounds(simulate(zero_state(s), s, default_weights(s), cfg), s, default_weights(s));
    EXPECT_FALSE(r.applicable);
    EXPECT_FALSE(r.reason.empty());
}
