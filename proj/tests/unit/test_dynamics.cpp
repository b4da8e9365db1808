#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "metanet/dynamics.hpp"
#include "metanet/motifs.hpp"

using namespace metanet;

namespace {

// One input unit, no partners: du/dt = -u + U.
ModelSpec lone_input() {
    ModelBuilder b(Family::mm1, Labeling::feedforward, {1, 1});
    b.add_unit({1, 0, 0}, true);
    return b.build();
}

}  // namespace

TEST(Labels, FeedforwardScheme) {
    const ModelSpec s = build_feedforward(Family::mm5, {2, 2}, true);
    // 2 inputs, 2 outputs, 4 connections, 4 metaconnections
    EXPECT_EQ(s.size(), 12u);
    EXPECT_EQ(s.label(s.find({1, 0, 0})), "1.0.0");
    EXPECT_EQ(s.label(s.find({0, 0, 2})), "0.0.2");
    EXPECT_EQ(s.label(s.find({2, 0, 1})), "2.0.1");
    EXPECT_EQ(s.label(s.find({2, 1, 1})), "2.1.1");
    EXPECT_FALSE(s.lookup({1, 1, 1}).has_value());
    EXPECT_THROW(s.find({9, 9, 9}), Error);
    EXPECT_EQ(s.inputs().size(), 2u);
    EXPECT_EQ(output_units(s).size(), 2u);
}

TEST(Labels, WithoutMetaconnections) {
    const ModelSpec s = build_feedforward(Family::mm5, {3, 2}, false);
    EXPECT_EQ(s.size(), 3u + 2u + 6u);
}

TEST(Labels, RenumberedRecurrent) {
    const ModelSpec s = build_recurrent(Family::mm13, {2, 2}, {false, false, true, true});
    EXPECT_TRUE(s.lookup({1, 0, 3}).has_value());
    EXPECT_TRUE(s.lookup({3, 0, 1}).has_value());
    EXPECT_TRUE(s.lookup({4, 2, 4}).has_value());
    EXPECT_EQ(output_units(s).size(), 2u);
}

TEST(Network, SetInputValidates) {
    ModelSpec s = build_feedforward(Family::mm5, {2, 1}, true);
    set_input(s, 2, 0.5);
    EXPECT_DOUBLE_EQ(s.external_input[s.find({2, 0, 0})], 0.5);
    EXPECT_THROW(set_input(s, 3, 1.0), Error);
    EXPECT_THROW(set_input(s, 0, 1.0), Error);
}

TEST(Network, RejectsBadState) {
    const ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    PotentialState st = zero_state(s);
    st.values.pop_back();
    EXPECT_THROW(validate(s, st), Error);
    st = zero_state(s);
    st.values[0] = -1.0;
    EXPECT_THROW(validate(s, st), Error);
}

TEST(Rhs, OriginIsEquilibrium) {
    const ModelSpec s = build_feedforward(Family::mm5, {2, 2}, true);
    const auto d = rhs(zero_state(s), s, default_weights(s));
    for (double v : d) EXPECT_EQ(v, 0.0);
}

TEST(Rhs, LineAttractorConnectionsStill) {
    const MotifModel mm = build_motif(default_motif(MotifKind::broadcast));
    const double u1 = default_motif(MotifKind::broadcast)["U_1"];
    for (double s : {0.1, 0.5, 0.9}) {
        PotentialState st;
        st.values = motif_start(default_motif(MotifKind::broadcast), s * u1, (1 - s) * u1);
        const auto d = rhs(st, mm.spec, mm.weights);
        EXPECT_NEAR(d[mm.first], 0.0, 1e-14);
        EXPECT_NEAR(d[mm.second], 0.0, 1e-14);
    }
}

TEST(Rhs, MetaconnectionDerivative) {
    const ModelSpec s = build_feedforward(Family::mm5, {2, 1}, true);
    PotentialState st = zero_state(s);
    const std::size_t meta = s.find({2, 1, 1});
    st.values[meta] = 0.4;
    st.values[s.find({2, 0, 0})] = 1.0;
    const auto d = rhs(st, s, default_weights(s));
    EXPECT_NEAR(d[meta], 0.6, 1e-15);
}

TEST(Step, EulerDecay) {
    ModelSpec s = lone_input();
    PotentialState st{{1.0}, 0.0};
    const auto next = step_euler(st, s, default_weights(s), 0.1);
    EXPECT_NEAR(next.values[0], 0.9, 1e-15);
    EXPECT_NEAR(next.time, 0.1, 1e-15);
}

TEST(Step, Rk4Decay) {
    ModelSpec s = lone_input();
    PotentialState st{{1.0}, 0.0};
    const auto next = step_rk4(st, s, default_weights(s), 0.1);
    // one classical step equals the 4th-order Taylor sum of e^-0.1
    EXPECT_NEAR(next.values[0], 0.9048375, 1e-15);
    EXPECT_NEAR(next.values[0], std::exp(-0.1), 1e-7);
    EXPECT_NEAR(next.values[0], step_euler(st, s, default_weights(s), 0.1).values[0], 0.1);
}

TEST(Step, FixedPointPreserved) {
    ModelSpec s = lone_input();
    set_input(s, 1, 0.7);
    PotentialState st{{0.7}, 0.0};
    EXPECT_EQ(step_euler(st, s, default_weights(s), 0.1).values[0], 0.7);
    EXPECT_EQ(step_rk4(st, s, default_weights(s), 0.1).values[0], 0.7);
}

TEST(Step, ProjectionStoresExactZero) {
    std::vector<double> x = {-0.0, -1e-3, 0.5};
    project(x);
    EXPECT_FALSE(std::signbit(x[0]));
    EXPECT_EQ(x[1], 0.0);
    EXPECT_FALSE(std::signbit(x[1]));
    EXPECT_EQ(x[2], 0.5);
}

TEST(Simulate, ZeroSystemConvergesQuickly) {
    const ModelSpec s = build_feedforward(Family::mm5, {2, 2}, true);
    SimulationConfig cfg;
    const Trajectory t = simulate(zero_state(s), s, default_weights(s), cfg);
    EXPECT_TRUE(t.converged);
    EXPECT_LE(t.steps, cfg.window);
}

TEST(Simulate, BroadcastSumRule) {
    const MotifDescriptor m = default_motif(MotifKind::broadcast);
    const MotifModel mm = build_motif(m);
    PotentialState st;
    st.values = motif_start(m, 0.2, 0.2);
    SimulationConfig cfg;
    cfg.integrator = Integrator::rk4;
    cfg.dt = 1e-3;
    cfg.max_steps = 200000;
    cfg.convergence_eps = 1e-12;
    const Trajectory t = simulate(st, mm.spec, mm.weights, cfg);
    ASSERT_TRUE(t.converged);
    const auto& v = t.states.back().values;
    EXPECT_NEAR(v[mm.first] + v[mm.second], m["U_1"], 1e-6);
}

TEST(Simulate, DivergenceRaises) {
    ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    set_input(s, 1, 1.0);
    SimulationConfig cfg;
    cfg.ceiling = 0.5;
    EXPECT_THROW(
        {
            try {
                simulate(zero_state(s), s, default_weights(s), cfg);
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::divergence);
                throw;
            }
        },
        Error);
}

TEST(Simulate, DeterministicCsv) {
    ModelSpec s = build_feedforward(Family::mm5, {2, 2}, true);
    set_input(s, 1, 0.3);
    set_input(s, 2, 0.8);
    WeightSet w = default_weights(s, 0.7);
    SimulationConfig cfg;
    cfg.max_steps = 500;
    std::ostringstream a, b;
    write_csv(a, s, simulate(zero_state(s), s, w, cfg));
    write_csv(b, s, simulate(zero_state(s), s, w, cfg));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().rfind("time,", 0), 0u);
}

TEST(Simulate, StopsAtBudget) {
    ModelSpec s = build_feedforward(Family::mm5, {1, 1}, true);
    set_input(s, 1, 1.0);
    SimulationConfig cfg;
    cfg.max_steps = 10;
    const Trajectory t = simulate(zero_state(s), s, default_weights(s), cfg);
    EXPECT_FALSE(t.converged);
    EXPECT_EQ(t.steps, 10);
}

TEST(Step, Rk4ConvergesToClosedForm) {
    ModelSpec s = lone_input();
    PotentialState st{{1.0}, 0.0};
    for (int i = 0; i < 10; ++i) st = step_rk4(st, s, default_weights(s), 0.01);
    EXPECT_NEAR(st.values[0], std::exp(-0.1), 1e-10);
}
