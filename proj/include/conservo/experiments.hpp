#pragma once

// Named experiment registry: the benchmark systems with their reference
// solver settings (time step, horizon, tolerances, iteration cap) and
// initial conditions, plus the method-name table used by the CLI.

#include <cstdint>
#include <string>
#include <vector>

#include "conservo/steppers.hpp"
#include "conservo/system.hpp"

namespace conservo {

struct ExperimentInfo {
    std::string name;
    double tau;
    double t_final;
    double delta = 1e-15;
    double epsilon = 1e-15;
    int max_iters = 20;
    std::size_t decimate = 1;     // default storage decimation
    bool uses_seed = false;       // vortex only
    std::uint64_t default_seed = 1;
    std::size_t vortex_count = 100;
};

struct ExperimentSetup {
    SystemSpec system;
    std::vector<double> x0;
    double t0 = 0.0;
};

const std::vector<ExperimentInfo>& experiments();
const ExperimentInfo* find_experiment(const std::string& name);

/// Build the system and initial state for a registered experiment. The seed
/// only matters for the vortex experiment.
ExperimentSetup make_experiment(const ExperimentInfo& info, std::uint64_t seed);
ExperimentSetup make_experiment(const std::string& name);

struct MethodInfo {
    std::string name;     // CLI name
    std::string display;  // table row label
    Variant variant;
};

const std::vector<MethodInfo>& methods();
const MethodInfo* find_method(const std::string& name);

}  // namespace conservo
