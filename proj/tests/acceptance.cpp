// Runs the acceptance criteria and prints one line per criterion.
// Exit status is nonzero only for failures not listed in known_failures.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "metanet/analysis.hpp"
#include "metanet/config.hpp"
#include "metanet/motifs.hpp"
#include "metanet/plasticity.hpp"
#include "metanet/synthesis.hpp"
#include "metanet/vision.hpp"
#include "oracles.hpp"

#include <nlohmann/json.hpp>

using namespace metanet;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

const std::set<int> known_failures = {2, 9, 10};

std::string fixture(const std::string& name) { return std::string(METANET_FIXTURES) + "/" + name; }

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned T = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < T; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) body(i);
        });
    for (auto& th : pool) th.join();
}

Outcome motif_oracle_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    SimulationConfig cfg;
    cfg.integrator = Integrator::rk4;
    cfg.dt = 1e-3;
    cfg.max_steps = 200000;
    cfg.convergence_eps = 1e-11;
    const std::vector<MotifKind> kinds = {MotifKind::broadcast, MotifKind::meta, MotifKind::feedback,
                                          MotifKind::competitive_meta, MotifKind::competitive_feedback};
    std::vector<MotifDescriptor> sets;
    std::mt19937_64 rng(20240601);
    for (auto k : kinds)
        for (int s = 0; s < 50; ++s) sets.push_back(sample_admissible(k, rng));
    std::vector<double> err(sets.size());
    std::vector<int> ok(sets.size());
    parallel_for(sets.size(), [&](std::size_t i) {
        const auto r = verify_motif(sets[i], cfg, basin_grid(sets[i], 2), 1e-6);
        err[i] = r.max_error;
        ok[i] = r.passed;
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int fails = static_cast<int>(std::count(ok.begin(), ok.end(), 0));
    const double worst = *std::max_element(err.begin(), err.end());
    return {fails == 0 && secs < 60.0,
            fmt("250 parameter sets, %d failing, max relative error %.2e, %.1f s", fails, worst, secs)};
}

ModelConfig solved_feedback_network() {
    const std::string text = read_text(fixture("solved_feedback_network.json"));
    auto j = nlohmann::json::parse(text)["model"];
    j["format_version"] = 1;
    return model_from_json(j.dump());
}

Outcome feedback_regression() {
    ModelConfig m = solved_feedback_network();
    SimulationConfig cfg;
    cfg.integrator = Integrator::rk4;
    cfg.dt = 0.01;
    cfg.convergence_eps = 1e-4;
    cfg.max_steps = 1000000;
    const Trajectory t = simulate(zero_state(m.spec), m.spec, m.weights, cfg);
    const auto outs = output_units(m.spec);
    const double o1 = t.states.back().values[outs[0]], o2 = t.states.back().values[outs[1]];
    const double e = std::max(std::fabs(o1 - 1.5297), std::fabs(o2 - 1.4714));
    cfg.convergence_eps = 1e-12;
    cfg.max_steps = 2000000;
    const Trajectory full = simulate(zero_state(m.spec), m.spec, m.weights, cfg);
    return {e <= 1e-3, fmt("quasi-steady outputs [%.5f, %.5f] at t=%.1f, error %.2e; long-run limit [%.5f, %.5f]", o1, o2,
                           t.states.back().time, e, full.states.back().values[outs[0]],
                           full.states.back().values[outs[1]])};
}

Outcome robustness_dichotomy() {
    SynthesisProblem p;
    p.model = build_recurrent(Family::mm13, {2, 2}, {false, false, true, false});
    p.pairs = {{{1, 1}, {1, 1}}, {{2, 2}, {1, 1}}};
    p.unbiased_feature_units = {1, 2};
    for (std::size_t v = 0; v < p.model.size(); ++v) {
        const auto& V = p.model.vars[v];
        if (V.kind == VarKind::connection && p.model.vars[V.emitter].input) p.fixed_weights[v] = 1.0;
    }
    SynthesisSolution sol = solve_weights(p);
    SimulationConfig sim;
    sim.integrator = Integrator::rk4;
    sim.max_steps = 1000000;
    const auto rec = validate_recall(sol, p, sim);
    auto near = [](const std::vector<double>& o, double v) {
        return std::all_of(o.begin(), o.end(), [&](double x) { return std::fabs(x - v) <= 0.01; });
    };
    const bool under = near(rec[0].outputs, 0.66) || near(rec[1].outputs, 0.66);
    const bool over = near(rec[0].outputs, 1.33) || near(rec[1].outputs, 1.33);
    return {under || over, fmt("recall [1,1] -> [%.5f, %.5f], [2,2] -> [%.5f, %.5f], cycle gain %.3f",
                               rec[0].outputs[0], rec[0].outputs[1], rec[1].outputs[0], rec[1].outputs[1],
                               sol.cycle_gain)};
}

Outcome two_pair_synthesis() {
    SynthesisProblem p;
    p.model = build_feedforward(Family::mm5, {2, 2}, true);
    p.pairs = {{{1, 1}, {2, 2}}, {{1, 2}, {1, 2}}};
    p.unbiased_feature_units = {1};
    p.aggregation = Aggregation::stacked;
    const EquilibriumSystem sys = build_equilibrium_system(p);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> R(-5.0, 5.0), S(0.1, 3.0);
    double family_worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const double r = R(rng);
        WeightSet w = default_weights(p.model, 0.0);
        auto set = [&](const char* label, double v) { w.weight[variable_by_label(p.model, label)] = v; };
        set("1.0.1", 12 + r);
        set("1.0.2", 8);
        set("1.2.2", 0);
        set("2.0.1", -1);
        set("1.2.1", r);
        set("2.0.2", S(rng));
        for (double x : sys.residual(sys.unknowns_of(w))) family_worst = std::max(family_worst, std::fabs(x));
    }
    SynthesisSolution sol = solve_weights(p);
    SimulationConfig sim;
    sim.integrator = Integrator::rk4;
    sim.convergence_eps = 1e-12;
    sim.max_steps = 1000000;
    validate_recall(sol, p, sim);
    const double recall = *std::max_element(sol.per_pair_recall_error.begin(), sol.per_pair_recall_error.end());
    return {family_worst <= 1e-10 && sol.residual <= 1e-12 && recall <= 1e-4,
            fmt("family residual %.2e over 10 r, solver residual %.2e, recall error %.2e", family_worst, sol.residual,
                recall)};
}

Outcome expanded_graph_equivalence() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_real_distribution<double> W(-1.0, 1.0), X(0.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        ModelSpec spec = build_feedforward(Family::mm2, {dim(rng), dim(rng)}, true);
        WeightSet w = default_weights(spec);
        for (std::size_t v = 0; v < spec.size(); ++v)
            if (spec.vars[v].kind != VarKind::unit) w.weight[v] = W(rng);
        for (int k = 1; k <= spec.shape.n_inputs; ++k) set_input(spec, k, X(rng));
        PotentialState s = zero_state(spec);
        for (double& v : s.values) v = X(rng);
        const AdditiveNetwork net = flatten_to_additive(spec, w);
        Eigen::VectorXd u = additive_state(net, s);
        const double dt = 1e-3;
        for (int step = 0; step < 10000; ++step) {
            s = step_rk4(s, spec, w, dt);
            u = additive_step_rk4(net, u, dt);
            const auto back = tensor_state(net, u, spec);
            for (std::size_t v = 0; v < spec.size(); ++v) worst = std::max(worst, std::fabs(back.values[v] - s.values[v]));
        }
    }
    return {worst <= 1e-8, fmt("20 networks, max deviation %.2e over t in [0, 10]", worst)};
}

Outcome gronwall_bounds() {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> dim(1, 5);
    std::uniform_real_distribution<double> X(0.0, 1.0);
    long violations = 0;
    int applicable = 0;
    double tightest = 1e300;
    for (int n = 0; n < 100; ++n) {
        ModelSpec spec = build_feedforward(Family::mm5, {dim(rng), dim(rng)}, true);
        WeightSet w = default_weights(spec);
        for (std::size_t v = 0; v < spec.size(); ++v)
            if (spec.vars[v].kind != VarKind::unit) w.weight[v] = X(rng);
        for (int k = 1; k <= spec.shape.n_inputs; ++k) set_input(spec, k, X(rng));
        PotentialState s = zero_state(spec);
        for (double& v : s.values) v = X(rng);
        SimulationConfig cfg;
        cfg.integrator = Integrator::rk4;
        cfg.dt = 1e-3;
        cfg.max_steps = 10000;
        cfg.stride = 1;
        cfg.convergence_eps = 1e-300;
        const Trajectory t = simulate(s, spec, w, cfg);
        const BoundReport r = check_trajectory_bounds(t, spec, w);
        applicable += r.applicable;
        violations += r.violations;
        if (r.applicable) tightest = std::min(tightest, r.tightest_margin);
    }
    return {applicable == 100 && violations == 0,
            fmt("%d/100 applicable, %ld violations, tightest margin %.3e", applicable, violations, tightest)};
}

Outcome case_classifier_oracle() {
    std::mt19937_64 rng(7);
    int label_mismatch = 0, stability_mismatch = 0;
    for (int n = 0; n < 1000; ++n) {
        const ScalarEquilibriumProblem p = oracle::random_problem(rng);
        const auto cc = classify_case(p);
        const auto scan = oracle::scan_roots(p);
        if (oracle::label_from_scan(p, scan) != cc.case_label || scan.size() != cc.equilibria.size()) {
            ++label_mismatch;
            continue;
        }
        for (const auto& e : cc.equilibria)
            if (oracle::probe_stability(p, e.value) != e.stability) ++stability_mismatch;
    }
    return {label_mismatch == 0 && stability_mismatch == 0,
            fmt("1000 draws, %d label/count mismatches, %d stability mismatches", label_mismatch, stability_mismatch)};
}

Outcome energy_monotonicity() {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_real_distribution<double> W(-0.5, 0.5), X(0.0, 1.0);
    const double dt = 1e-2;
    double worst = -1e300;
    for (int n = 0; n < 20; ++n) {
        ModelSpec spec = build_feedforward(Family::mm2, {dim(rng), dim(rng)}, true);
        WeightSet w = default_weights(spec);
        for (std::size_t v = 0; v < spec.size(); ++v)
            if (spec.vars[v].kind != VarKind::unit) w.weight[v] = W(rng);
        for (int k = 1; k <= spec.shape.n_inputs; ++k) set_input(spec, k, X(rng));
        PotentialState s = zero_state(spec);
        for (double& v : s.values) v = X(rng);
        const AdditiveNetwork net = symmetrized(flatten_to_additive(spec, w));
        Eigen::VectorXd u = additive_state(net, s);
        double e = additive_energy(u, net);
        for (int step = 0; step < 2000; ++step) {
            u = additive_step_rk4(net, u, dt);
            const double e2 = additive_energy(u, net);
            worst = std::max(worst, e2 - e);
            e = e2;
        }
    }
    return {worst <= 10 * dt * dt, fmt("20 runs, largest energy increase %.3e (allowed %.1e)", worst, 10 * dt * dt)};
}

double edge_onset(const Frame& f, const DetectorConfig& cfg, const SimulationConfig& sim, int steps) {
    Detector d(f.width, f.height, cfg, sim);
    const int split = f.width / 2, r = cfg.connection_range;
    for (int s = 1; s <= steps; ++s) {
        const AttentionFrame a = d.run(f);
        double band = 0.0, all = 0.0;
        int nb = 0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                const double v = a.uncertainty_map[static_cast<std::size_t>(y) * f.width + x];
                all += v;
                const int to_split = x >= split ? x - split : split - 1 - x;
                const int dc = std::min(to_split, std::min(x, f.width - 1 - x));
                if (dc < r) {
                    band += v;
                    ++nb;
                }
            }
        if (band / nb > all / (f.width * f.height)) return s;
    }
    return -1;
}

bool frames_equal(const std::vector<double>& a, const std::vector<double>& b) { return a == b; }

Outcome detector_fixtures() {
    SimulationConfig sim;
    sim.integrator = Integrator::paper_euler;
    DetectorConfig cfg;

    double uniform_max = 0.0, uniform_unc = 0.0;
    for (double omega : {0.0, 1.0}) {
        const Frame f = uniform_frame(16, 16, omega);
        DetectorConfig c = cfg;
        c.steps_per_frame = 100;
        Detector d(16, 16, c, sim);
        const AttentionFrame a = d.run(f);
        for (std::size_t p = 0; p < a.white_map.size(); ++p) {
            uniform_max = std::max(uniform_max, a.white_map[p] + a.black_map[p]);
            uniform_unc = std::max(uniform_unc, a.uncertainty_map[p]);
        }
    }
    const bool uniform_ok = uniform_max < 1e-6;

    DetectorConfig onset_cfg = cfg;
    onset_cfg.steps_per_frame = 1;
    const double high = edge_onset(load_frame(fixture("edge_high.pgm")), onset_cfg, sim, 200);
    const double half = edge_onset(load_frame(fixture("edge_half.pgm")), onset_cfg, sim, 200);
    const bool edge_ok = high > 0 && (half < 0 || high < half);

    const Frame tri = load_frame(fixture("triangle.pgm"));
    const std::array<std::array<double, 2>, 3> V = {{{4, 20}, {20, 20}, {12, 4}}};
    Detector td(tri.width, tri.height, cfg, sim);
    double corner = 0.0, edge = 0.0;
    for (int frame = 0; frame < 50; ++frame) {
        const AttentionFrame a = td.run(tri);
        std::vector<double> pot(a.white_map.size());
        for (std::size_t p = 0; p < pot.size(); ++p) pot[p] = a.white_map[p] + a.black_map[p];
        if (*std::max_element(pot.begin(), pot.end()) < cfg.potential_min) continue;
        const auto split = oracle::corner_and_edge_pixels(tri.width, tri.height, V);
        for (int p : split.corner) corner += pot[p];
        for (int p : split.edge) edge += pot[p];
        corner /= split.corner.size();
        edge /= split.edge.size();
        break;
    }
    const bool tri_ok = corner > edge;

    Frame g(uniform_frame(20, 16, 0.0));
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> level(0, 8);
    for (double& v : g.pixels) v = level(rng) / 8.0;
    DetectorConfig c = cfg;
    SimulationConfig threaded = sim;
    const auto base = detect({g}, c, sim).back();
    const auto moved = detect({shift(g, 3, -2)}, c, sim).back();
    const Frame ref_shift{base.width, base.height, base.uncertainty_map};
    const bool shift_ok = frames_equal(shift(ref_shift, 3, -2).pixels, moved.uncertainty_map) &&
                          frames_equal(shift(Frame{base.width, base.height, base.white_map}, 3, -2).pixels,
                                       moved.white_map);
    threaded.threads = 4;
    const auto swapped = detect({invert(g)}, c, threaded).back();
    const bool swap_ok = frames_equal(swapped.white_map, base.black_map) &&
                         frames_equal(swapped.black_map, base.white_map) &&
                         frames_equal(swapped.uncertainty_map, base.uncertainty_map);

    return {uniform_ok && edge_ok && tri_ok && shift_ok && swap_ok,
            fmt("uniform max output %.4f (uncertainty %.1f) %s; edge onset high %g vs half %g %s; triangle corner %.3f vs "
                "edge %.3f %s; shift %s; type swap %s",
                uniform_max, uniform_unc, uniform_ok ? "ok" : "FAIL", high, half, edge_ok ? "ok" : "FAIL", corner, edge,
                tri_ok ? "ok" : "FAIL", shift_ok ? "exact" : "FAIL", swap_ok ? "exact" : "FAIL")};
}

Outcome tracker_fixture() {
    const int size = 96;
    const RotatingTriangle rt = rotating_triangle(size, 24, 15.0);
    SimulationConfig sim;
    sim.integrator = Integrator::paper_euler;
    DetectorConfig cfg;
    TrackerConfig tc;
    tc.fovea_width = tc.fovea_height = 24;
    tc.downsample = 4;
    tc.max_step = 12;
    const auto steps = track(rt.frames, cfg, tc, sim);
    int hits = 0, scored = 0;
    for (std::size_t i = 4; i < steps.size(); ++i) {
        ++scored;
        const auto& g = steps[i].gaze;
        const double x0 = g[0] - tc.fovea_width / 2, y0 = g[1] - tc.fovea_height / 2;
        const auto& a = rt.apex[i];
        if (a[0] >= x0 && a[0] <= x0 + tc.fovea_width && a[1] >= y0 && a[1] <= y0 + tc.fovea_height) ++hits;
    }
    const double rate = static_cast<double>(hits) / scored;
    return {rate >= 0.8, fmt("leading corner inside the fovea in %d/%d frames (%.0f%%)", hits, scored, 100 * rate)};
}

Outcome plasticity_rate() {
    PlasticityConfig pc;
    pc.epsilon = 0.05;
    ModelSpec spec = build_feedforward(Family::mm5, {1, 1}, false);
    const std::size_t c = variable_by_label(spec, "1.0.1");
    double worst = 0.0;
    for (double u : {0.2, 0.5, 1.0}) {
        WeightSet w = default_weights(spec, 3.0);
        PotentialState s = zero_state(spec);
        s.values[c] = u;
        std::vector<double> gap;
        for (int k = 0; k < 40; ++k) {
            gap.push_back(std::fabs(w.weight[c] - u));
            w = update_weights(w, s, spec, pc);
        }
        const double expected = std::fabs(1.0 - pc.epsilon * u);
        for (std::size_t k = 1; k < gap.size(); ++k)
            worst = std::max(worst, std::fabs(gap[k] / gap[k - 1] - expected) / expected);
    }
    WeightSet w = default_weights(spec, 0.731);
    const WeightSet after = update_weights(w, zero_state(spec), spec, pc);
    const bool frozen = after.weight == w.weight;
    return {worst <= 0.05 && frozen,
            fmt("max relative rate deviation %.2e, u=0 weights %s", worst, frozen ? "bit-identical" : "CHANGED")};
}

Outcome universal_approximation_algebra() {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> dim(1, 4);
    std::uniform_real_distribution<double> W(0.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
        ModelSpec spec = build_feedforward(Family::mm1, {dim(rng), dim(rng)}, true);
        WeightSet w = default_weights(spec);
        for (std::size_t v = 0; v < spec.size(); ++v)
            if (spec.vars[v].kind != VarKind::unit) w.weight[v] = W(rng);
        std::vector<double> in(spec.shape.n_inputs);
        for (int k = 0; k < spec.shape.n_inputs; ++k) set_input(spec, k + 1, in[k] = W(rng));
        SimulationConfig cfg;
        cfg.integrator = Integrator::rk4;
        cfg.dt = 0.01;
        cfg.convergence_eps = 1e-14;
        cfg.max_steps = 1000000;
        const Trajectory t = simulate(zero_state(spec), spec, w, cfg);
        const auto v = instant_output_linear(in, spec, w);
        const auto outs = output_units(spec);
        for (std::size_t i = 0; i < outs.size(); ++i)
            worst = std::max(worst, std::fabs(t.states.back().values[outs[i]] - v[i]));
    }
    return {worst <= 1e-10, fmt("50 draws, max |steady - instant| %.2e", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"motif oracle suite", motif_oracle_suite},
        {"feedback-motif regression     ", feedback_regression},
        {"robustness overshoot/undershoot", robustness_dichotomy},
        {"two-pair feedforward synthesis", two_pair_synthesis},
        {"expanded-graph equivalence", expanded_graph_equivalence},
        {"Gronwall bound suite", gronwall_bounds},
        {"case-classifier oracle", case_classifier_oracle},
        {"energy monotonicity", energy_monotonicity},
        {"detector fixtures", detector_fixtures},
        {"tracker fixture", tracker_fixture},
        {"plasticity convergence rate", plasticity_rate},
        {"universal-approximation algebra", universal_approximation_algebra},
    };
    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool known = !o.pass && known_failures.count(id);
        if (!o.pass && !known) ++unexpected;
        std::printf("criterion %2d %-34s %s  %s\n", id, criteria[i].first.c_str(),
                    o.pass ? "PASS" : known ? "FAIL (known)" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}
