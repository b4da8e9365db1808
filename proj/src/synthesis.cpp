#include "metanet/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace metanet {

namespace {

bool is_output_unit(const ModelSpec& spec, std::size_t v) {
    return spec.vars[v].kind == VarKind::unit && !spec.vars[v].input;
}

std::vector<bool> unbiased_mask(const ModelSpec& spec, const std::vector<int>& ids) {
    const auto ins = spec.inputs();
    std::vector<bool> mask(spec.size(), false);
    for (int k : ids) mask[ins[static_cast<std::size_t>(k - 1)]] = true;
    return mask;
}

// Variable whose incoming list carries v: the receiving unit of a connection, the connection under a meta.
std::size_t target_of(const ModelSpec& spec, std::size_t v) {
    for (std::size_t t = 0; t < spec.size(); ++t)
        for (const auto& in : spec.vars[t].incoming)
            if (in.source == v) return t;
    return npos;
}

double infinite() { return std::numeric_limits<double>::infinity(); }

struct LmResult {
    std::vector<double> x;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

double norm_inf(const Eigen::VectorXd& r) {
    if (r.size() == 0) return 0.0;
    if (!r.allFinite()) return infinite();
    return r.cwiseAbs().maxCoeff();
}

LmResult levenberg_marquardt(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F, Eigen::VectorXd x,
                             double tol, int max_iterations, int stagnation_window) {
    LmResult out;
    Eigen::VectorXd r = F(x);
    double cost = r.allFinite() ? r.squaredNorm() : infinite();
    double lambda = 1e-3;
    double best = cost;
    int since_best = 0;
    const long n = x.size(), m = r.size();
    int it = 0;
    for (; it < max_iterations; ++it) {
        if (norm_inf(r) <= tol) break;
        if (!std::isfinite(cost)) {
            out.message = "residual is not finite at the initial guess";
            break;
        }
        Eigen::MatrixXd J(m, n);
        for (long c = 0; c < n; ++c) {
            const double h = 1e-6 * std::max(1.0, std::fabs(x[c]));
            Eigen::VectorXd xp = x, xm = x;
            xp[c] += h;
            xm[c] -= h;
            J.col(c) = (F(xp) - F(xm)) / (2.0 * h);
        }
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::VectorXd delta;
            if (m < n) {
                Eigen::MatrixXd A = J * J.transpose();
                A.diagonal().array() += lambda;
                delta = -J.transpose() * A.ldlt().solve(r);
            } else {
                Eigen::MatrixXd A = J.transpose() * J;
                A.diagonal().array() += lambda;
                delta = A.ldlt().solve(-J.transpose() * r);
            }
            Eigen::VectorXd xn = x + delta;
            Eigen::VectorXd rn = F(xn);
            const double cn = rn.allFinite() ? rn.squaredNorm() : infinite();
            if (cn < cost) {
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda * 0.3, 1e-15);
                accepted = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted) {
            out.message = "no descent step found";
            break;
        }
        if (cost < best * (1.0 - 1e-10)) {
            best = cost;
            since_best = 0;
        } else if (++since_best >= stagnation_window) {
            out.message = "residual stagnated";
            break;
        }
    }
    out.iterations = it;
    out.residual = norm_inf(r);
    out.converged = out.residual <= tol;
    if (out.converged)
        out.message = "converged";
    else if (out.message.empty())
        out.message = "iteration budget exhausted";
    out.x.assign(x.data(), x.data() + x.size());
    return out;
}

}  // namespace

void validate(const SynthesisProblem& p) {
    const ModelSpec& s = p.model;
    require(s.family == Family::mm5 || s.family == Family::mm13, "synthesis supports mm5 and mm13 models");
    require(!s.paired, "synthesis does not support paired models");
    require(!p.pairs.empty(), "synthesis needs at least one training pair");
    const auto N = static_cast<std::size_t>(s.shape.n_inputs), M = static_cast<std::size_t>(s.shape.n_outputs);
    for (const auto& tp : p.pairs) {
        require(tp.input.size() == N, "training input has the wrong length");
        require(tp.output.size() == M, "training output has the wrong length");
        for (double v : tp.input) require(std::isfinite(v) && v >= 0.0, "training inputs must be finite and >= 0");
        for (double v : tp.output) require(std::isfinite(v) && v >= 0.0, "training outputs must be finite and >= 0");
    }
    for (int k : p.unbiased_feature_units)
        require(k >= 1 && k <= s.shape.n_inputs, "unbiased feature unit index out of range");
    for (auto [v, w] : p.fixed_weights) {
        require(v < s.size() && s.vars[v].kind != VarKind::unit, "fixed weight must name a connection");
        require(std::isfinite(w), "fixed weight must be finite");
    }
    require(p.residual_tol > 0.0, "residual tolerance must be positive");
    require(p.max_iterations > 0 && p.stagnation_window > 0, "iteration limits must be positive");
    require(p.aggregation != Aggregation::stacked || p.pairs.size() <= 4, "stacked solving is limited to 4 pairs");
    for (std::size_t v = 0; v < s.size(); ++v) {
        const auto& V = s.vars[v];
        if (V.kind == VarKind::connection && is_output_unit(s, V.emitter))
            require(s.vars[target_of(s, v)].input, "lateral connections are not supported by synthesis");
    }
}

EquilibriumSystem::EquilibriumSystem(const SynthesisProblem& p, std::vector<std::size_t> pair_indices)
    : spec_(p.model) {
    validate(p);
    for (std::size_t i : pair_indices) pairs_.push_back(p.pairs.at(i));
    unbiased_ = unbiased_mask(spec_, p.unbiased_feature_units);
    outputs_ = output_units(spec_);
    base_ = default_weights(spec_, 0.0);

    std::vector<std::string> free_potentials;
    for (std::size_t v = 0; v < spec_.size(); ++v) {
        const auto& V = spec_.vars[v];
        if (V.kind == VarKind::unit) continue;
        const std::size_t em = V.emitter;
        const bool em_input = spec_.vars[em].input;
        bool forced = false;
        if (V.kind == VarKind::metaconnection) {
            const std::size_t onto = target_of(spec_, v);
            const std::size_t onto_emitter = onto == npos ? npos : spec_.vars[onto].emitter;
            if (onto_emitter != npos && unbiased_[onto_emitter]) forced = true;
            if (em_input && !unbiased_[em]) forced = true;
        }
        if (auto it = p.fixed_weights.find(v); it != p.fixed_weights.end()) {
            base_.weight[v] = it->second;
            continue;
        }
        if (forced) continue;
        unknowns_.push_back(v);
    }

    // contextualised units need a metaconnection that can carry a nonzero contribution
    for (std::size_t u : spec_.inputs()) {
        if (unbiased_[u]) continue;
        bool driven = false;
        for (std::size_t c : spec_.emits[u]) {
            if (spec_.vars[c].kind != VarKind::connection) continue;
            for (const auto& in : spec_.vars[c].incoming) {
                const std::size_t e = spec_.vars[in.source].emitter;
                const bool carrier = unbiased_[e] || is_output_unit(spec_, e);
                const bool movable = std::find(unknowns_.begin(), unknowns_.end(), in.source) != unknowns_.end() ||
                                     base_.weight[in.source] != 0.0;
                if (carrier && movable) driven = true;
            }
        }
        if (!driven)
            for (std::size_t c : spec_.emits[u])
                if (spec_.vars[c].kind == VarKind::connection) free_potentials.push_back(spec_.label(c));
    }
    if (!free_potentials.empty()) {
        std::string msg = "intermediate potentials are not determined by the training pairs:";
        for (const auto& f : free_potentials) msg += " " + f;
        fail(ErrorCode::invalid_argument, msg);
    }
}

WeightSet EquilibriumSystem::weights(const std::vector<double>& x) const {
    require(x.size() == unknowns_.size(), "unknown vector has the wrong length");
    WeightSet w = base_;
    for (std::size_t i = 0; i < x.size(); ++i) w.weight[unknowns_[i]] = x[i];
    return w;
}

std::vector<double> EquilibriumSystem::unknowns_of(const WeightSet& w) const {
    std::vector<double> x;
    for (std::size_t v : unknowns_) x.push_back(w.weight.at(v));
    return x;
}

PotentialState EquilibriumSystem::equilibrium(const TrainingPair& pair, const WeightSet& w) const {
    const ModelSpec& s = spec_;
    std::vector<double> x(s.size(), 0.0);
    const auto ins = s.inputs();
    for (std::size_t i = 0; i < outputs_.size(); ++i) {
        const std::size_t o = outputs_[i];
        x[o] = pair.output[i];
        for (std::size_t e : s.emits[o]) x[e] = x[o] / s.fan_out(o);
    }
    for (std::size_t k = 0; k < ins.size(); ++k) {
        const std::size_t u = ins[k];
        double v = pair.input[k];
        for (const auto& in : s.vars[u].incoming) v += in.coef * w.weight[in.source] * x[in.source];
        x[u] = v;
        if (unbiased_[u])
            for (std::size_t e : s.emits[u]) x[e] = v / s.fan_out(u);
    }
    for (std::size_t u : ins) {
        if (unbiased_[u]) continue;
        std::vector<std::pair<std::size_t, double>> contrib;
        double total = 0.0;
        for (std::size_t c : s.emits[u]) {
            if (s.vars[c].kind != VarKind::connection) continue;
            double W = 0.0;
            for (const auto& in : s.vars[c].incoming) W += in.coef * w.weight[in.source] * x[in.source];
            contrib.push_back({c, W});
            total += W;
        }
        for (auto [c, W] : contrib)
            x[c] = total != 0.0 ? W * (x[u] + total) / total : x[u] / static_cast<double>(contrib.size());
    }
    return {x, 0.0};
}

std::vector<double> EquilibriumSystem::residual(const std::vector<double>& xu) const {
    const WeightSet w = weights(xu);
    std::vector<double> r;
    r.reserve(rows());
    for (const auto& pair : pairs_) {
        const auto eq = equilibrium(pair, w);
        for (std::size_t i = 0; i < outputs_.size(); ++i) {
            double v = 0.0;
            for (const auto& in : spec_.vars[outputs_[i]].incoming)
                v += in.coef * w.weight[in.source] * eq.values[in.source];
            r.push_back(pair.output[i] - v - spec_.external_input[outputs_[i]]);
        }
    }
    return r;
}

EquilibriumSystem build_equilibrium_system(const SynthesisProblem& p) {
    std::vector<std::size_t> all(p.pairs.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return EquilibriumSystem(p, all);
}

double cycle_gain(const ModelSpec& spec, const WeightSet& w, const std::vector<int>& unbiased_feature_units) {
    (void)unbiased_feature_units;
    const auto ins = spec.inputs();
    const auto outs = output_units(spec);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(static_cast<long>(outs.size()), static_cast<long>(ins.size()));
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<long>(ins.size()), static_cast<long>(outs.size()));
    bool feedback = false;
    auto pos = [](const std::vector<std::size_t>& v, std::size_t x) {
        return static_cast<long>(std::find(v.begin(), v.end(), x) - v.begin());
    };
    for (std::size_t r = 0; r < outs.size(); ++r)
        for (const auto& in : spec.vars[outs[r]].incoming) {
            const std::size_t e = spec.vars[in.source].emitter;
            const long c = pos(ins, e);
            if (c < static_cast<long>(ins.size()))
                F(static_cast<long>(r), c) += in.coef * w.weight[in.source] / spec.fan_out(e);
        }
    for (std::size_t r = 0; r < ins.size(); ++r)
        for (const auto& in : spec.vars[ins[r]].incoming) {
            const std::size_t e = spec.vars[in.source].emitter;
            const long c = pos(outs, e);
            if (c < static_cast<long>(outs.size())) {
                B(static_cast<long>(r), c) += in.coef * w.weight[in.source] / spec.fan_out(e);
                feedback = true;
            }
        }
    if (!feedback) return 0.0;
    Eigen::MatrixXd L = F * B;
    return L.eigenvalues().cwiseAbs().maxCoeff();
}

SynthesisSolution solve_weights(const SynthesisProblem& p, std::vector<double> initial_guess) {
    validate(p);
    SynthesisSolution sol;
    const EquilibriumSystem full = build_equilibrium_system(p);
    const std::size_t n = full.unknowns().size();
    if (initial_guess.empty()) initial_guess.assign(n, 1.0);
    require(initial_guess.size() == n, "initial guess has the wrong length");
    if (p.nonneg_weights)
        for (double g : initial_guess) require(g >= 0.0, "nonnegative synthesis needs a nonnegative initial guess");
    if (auto msg = scale_warning(p.model.shape); !msg.empty()) sol.warnings.push_back(msg);

    auto run = [&](const EquilibriumSystem& sys) {
        auto F = [&](const Eigen::VectorXd& v) {
            std::vector<double> w(v.data(), v.data() + v.size());
            if (p.nonneg_weights)
                for (double& x : w) x = x * x;
            auto r = sys.residual(w);
            return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<long>(r.size())));
        };
        Eigen::VectorXd x0(static_cast<long>(n));
        for (std::size_t i = 0; i < n; ++i)
            x0[static_cast<long>(i)] = p.nonneg_weights ? std::sqrt(initial_guess[i]) : initial_guess[i];
        LmResult res = levenberg_marquardt(F, x0, p.residual_tol, p.max_iterations, p.stagnation_window);
        if (p.nonneg_weights)
            for (double& x : res.x) x = x * x;
        return res;
    };

    if (p.aggregation == Aggregation::stacked || p.pairs.size() == 1) {
        LmResult res = run(full);
        sol.unknown_values = res.x;
        sol.residual = res.residual;
        sol.success = res.converged;
        sol.iterations = res.iterations;
        sol.message = res.message;
    } else {
        std::vector<double> sum(n, 0.0);
        std::size_t used = 0;
        sol.success = true;
        for (std::size_t i = 0; i < p.pairs.size(); ++i) {
            const EquilibriumSystem sys(p, {i});
            LmResult res = run(sys);
            sol.iterations += res.iterations;
            if (!res.converged) {
                sol.warnings.push_back("pair " + std::to_string(i) + " excluded: " + res.message);
                continue;
            }
            sol.residual = std::max(sol.residual, res.residual);
            for (std::size_t k = 0; k < n; ++k) sum[k] += res.x[k];
            ++used;
        }
        if (used == 0) {
            sol.success = false;
            sol.message = "no training pair could be solved";
            sol.unknown_values = initial_guess;
        } else {
            for (double& v : sum) v /= static_cast<double>(used);
            sol.unknown_values = sum;
            sol.message = "averaged " + std::to_string(used) + " per-pair solutions";
        }
    }
    sol.weights = full.weights(sol.unknown_values);
    sol.cycle_gain = cycle_gain(p.model, sol.weights, p.unbiased_feature_units);
    if (1.0 - sol.cycle_gain <= 1e-9) {
        sol.near_singular_cycle = true;
        sol.warnings.push_back("cycle gain is at or above 1: recall equilibrium escapes to infinity");
    }
    return sol;
}

std::vector<RecallRecord> validate_recall(SynthesisSolution& sol, const SynthesisProblem& p,
                                          const SimulationConfig& sim) {
    std::vector<RecallRecord> out;
    const auto outs = output_units(p.model);
    sol.per_pair_recall_error.clear();
    for (const auto& pair : p.pairs) {
        ModelSpec spec = p.model;
        for (std::size_t k = 0; k < pair.input.size(); ++k) set_input(spec, static_cast<int>(k + 1), pair.input[k]);
        RecallRecord rec;
        try {
            const Trajectory t = simulate(zero_state(spec), spec, sol.weights, sim);
            rec.converged = t.converged;
            for (std::size_t i = 0; i < outs.size(); ++i) {
                const double v = t.states.back().values[outs[i]];
                rec.outputs.push_back(v);
                rec.error = std::max(rec.error, std::fabs(v - pair.output[i]));
            }
            rec.message = t.converged ? "converged" : "step budget exhausted";
        } catch (const Error& e) {
            rec.error = infinite();
            rec.message = e.what();
        }
        sol.per_pair_recall_error.push_back(rec.error);
        out.push_back(rec);
    }
    return out;
}

BenchmarkReport classify_benchmark(const std::vector<TrainingPair>& train, const std::vector<TrainingPair>& test,
                                   const SynthesisProblem& p, const SimulationConfig& sim) {
    require(!test.empty(), "benchmark needs test samples");
    SynthesisProblem q = p;
    q.pairs = train;
    q.aggregation = Aggregation::average;
    BenchmarkReport rep;
    rep.solution = solve_weights(q, {});
    rep.warnings = rep.solution.warnings;
    rep.used_pairs = train.size();
    for (const auto& w : rep.warnings)
        if (w.rfind("pair ", 0) == 0) --rep.used_pairs;
    SynthesisProblem t = p;
    t.pairs = test;
    const auto recs = validate_recall(rep.solution, t, sim);
    std::size_t hits = 0;
    double err = 0.0;
    for (std::size_t s = 0; s < test.size(); ++s) {
        const auto& o = recs[s].outputs;
        const auto& y = test[s].output;
        const int pred = o.empty() ? -1 : static_cast<int>(std::max_element(o.begin(), o.end()) - o.begin());
        const int want = static_cast<int>(std::max_element(y.begin(), y.end()) - y.begin());
        rep.predicted.push_back(pred);
        rep.expected.push_back(want);
        if (pred == want) ++hits;
        err += recs[s].error;
    }
    rep.accuracy = static_cast<double>(hits) / static_cast<double>(test.size());
    rep.mean_recall_error = err / static_cast<double>(test.size());
    return rep;
}

std::string scale_warning(const NetworkShape& shape) {
    if (static_cast<long>(shape.n_inputs) * shape.n_outputs >= 7840)
        return "paper-scale: 118810 unknowns; expect degraded recall";
    return {};
}

GlyphSet glyph_benchmark(int per_class, std::uint64_t seed) {
    require(per_class > 0, "per_class must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(0.0, 0.2);
    std::uniform_int_distribution<int> pick(0, 2);
    auto glyph = [&](int cls) {
        std::vector<double> px(16, 0.0);
        auto on = [&](int r, int c) { px[static_cast<std::size_t>(r * 4 + c)] = 1.0; };
        const int shift = pick(rng) % 2;
        if (cls == 0) {
            for (int r = 0; r < 4; ++r) on(r, 1 + shift);
        } else if (cls == 1) {
            for (int k = 0; k < 4; ++k) {
                on(1 + shift, k);
                on(k, 1 + shift);
            }
        } else {
            const int r0 = pick(rng) % 3, c0 = pick(rng) % 3;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) on(r0 + r, c0 + c);
        }
        double norm = 0.0;
        for (double& v : px) {
            v = 0.8 * v + noise(rng);
            norm += v * v;
        }
        for (double& v : px) v /= std::sqrt(norm);
        TrainingPair tp{px, std::vector<double>(3, 0.0)};
        tp.output[static_cast<std::size_t>(cls)] = 1.0;
        return tp;
    };
    GlyphSet g;
    for (int s = 0; s < per_class; ++s)
        for (int c = 0; c < 3; ++c) g.train.push_back(glyph(c));
    for (int s = 0; s < per_class; ++s)
        for (int c = 0; c < 3; ++c) g.test.push_back(glyph(c));
    return g;
}

std::string to_json(const SynthesisSolution& s, const ModelSpec& spec) {
    nlohmann::json j;
    j["format_version"] = 1;
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t v = 0; v < spec.size(); ++v)
        if (spec.vars[v].kind != VarKind::unit) w[spec.label(v)] = s.weights.weight.at(v);
    j["weights"] = w;
    j["residual"] = s.residual;
    j["success"] = s.success;
    j["iterations"] = s.iterations;
    j["cycle_gain"] = s.cycle_gain;
    j["near_singular_cycle"] = s.near_singular_cycle;
    nlohmann::json errs = nlohmann::json::array();
    for (double e : s.per_pair_recall_error) errs.push_back(std::isfinite(e) ? nlohmann::json(e) : nlohmann::json());
    j["per_pair_recall_error"] = errs;
    j["warnings"] = s.warnings;
    j["message"] = s.message;
    return j.dump(2);
}

std::vector<TrainingPair> pairs_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::parse_error, std::string("training pairs: ") + e.what());
    }
    const nlohmann::json& arr = j.is_object() && j.contains("pairs") ? j["pairs"] : j;
    if (!arr.is_array()) fail(ErrorCode::parse_error, "training pairs: expected an array of {input, output}");
    std::vector<TrainingPair> out;
    for (const auto& e : arr) {
        if (!e.is_object() || !e.contains("input") || !e.contains("output"))
            fail(ErrorCode::parse_error, "training pairs: each entry needs input and output");
        try {
            out.push_back({e["input"].get<std::vector<double>>(), e["output"].get<std::vector<double>>()});
        } catch (const nlohmann::json::exception& ex) {
            fail(ErrorCode::parse_error, std::string("training pairs: ") + ex.what());
        }
    }
    return out;
}

}  // namespace metanet
