#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace metanet {

enum class ErrorCode : int {
    ok = 0,
    invalid_argument = 1,
    parse_error = 2,
    io_error = 3,
    divergence = 4,
    not_converged = 5,
    unsupported = 6,
    internal = 7,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }
inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(ErrorCode::invalid_argument, msg);
}

struct NetworkShape {
    int n_inputs = 1;
    int n_outputs = 1;
};

void validate(const NetworkShape& shape);

enum class Activation { relu, storage_discontinuous, highway };

struct ActivationParams {
    double alpha = 0.0;
    Activation variant = Activation::relu;
};

std::string to_string(Activation v);
Activation activation_from_string(const std::string& s);

enum class Integrator { euler, rk4, paper_euler };

std::string to_string(Integrator v);
Integrator integrator_from_string(const std::string& s);

inline constexpr double default_guard = 1e-12;

struct SimulationConfig {
    double tau_r = 1.0;
    double tau_w = 100.0;
    double dt = 0.01;
    long max_steps = 100000;
    double convergence_eps = 1e-9;
    double denominator_guard = default_guard;
    std::uint64_t seed = 0;
    Integrator integrator = Integrator::euler;
    int window = 20;
    int stride = 10;
    double ceiling = 1e9;
    int threads = 1;
};

// Throws on hard violations, returns warnings for soft ones.
std::vector<std::string> validate(const SimulationConfig& cfg);

double activation(double u, const ActivationParams& p);
double highway_activation(double c, double u, const ActivationParams& p);
int indicator(double denom, double guard = default_guard);

// fan_out is the number of outputs sharing the unit in the broadcasting branch.
double distribution(double c, double u, double denom, int fan_out, const ActivationParams& p,
                    double guard = default_guard);
double distribution(double c, double u, double denom, const NetworkShape& shape, const ActivationParams& p,
                    double guard = default_guard);

}  // namespace metanet
