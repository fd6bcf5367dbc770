#include "conservo/experiments.hpp"

#include "conservo/errors.hpp"
#include "conservo/systems.hpp"

namespace conservo {

const std::vector<ExperimentInfo>& experiments() {
    static const std::vector<ExperimentInfo> registry = [] {
        std::vector<ExperimentInfo> v;
        v.push_back({.name = "lv2", .tau = 0.1, .t_final = 10000.0});
        v.push_back({.name = "lv3", .tau = 0.05, .t_final = 30000.0});
        const double arenstorf_t = 1.015 * kArenstorfPeriod;
        v.push_back({.name = "arenstorf",
                     .tau = arenstorf_t * 1e-6,
                     .t_final = arenstorf_t,
                     .decimate = 1000});
        v.push_back({.name = "lorenz", .tau = 0.001, .t_final = 5.0});
        v.push_back({.name = "vortex",
                     .tau = 0.1,
                     .t_final = 200.0,
                     .uses_seed = true,
                     .default_seed = 1,
                     .vortex_count = 100});
        v.push_back({.name = "schwarzschild", .tau = 1.0 / 3.0, .t_final = 200.0});
        return v;
    }();
    return registry;
}

const ExperimentInfo* find_experiment(const std::string& name) {
    for (const ExperimentInfo& e : experiments())
        if (e.name == name) return &e;
    return nullptr;
}

ExperimentSetup make_experiment(const ExperimentInfo& info, std::uint64_t seed) {
    ExperimentSetup setup;
    if (info.name == "lv2") {
        setup.system = make_lv2(Lv2Params{});
        setup.x0 = {0.3, 0.7};
    } else if (info.name == "lv3") {
        setup.system = make_lv3(Lv3Params{});
        setup.x0 = {0.2, 0.5, 0.3};
    } else if (info.name == "arenstorf") {
        setup.system = make_three_body(kArenstorfAlpha);
        setup.x0.assign(kArenstorfX0.begin(), kArenstorfX0.end());
    } else if (info.name == "lorenz") {
        setup.system = make_lorenz();
        setup.x0 = {0.1, 0.0, 0.0};
    } else if (info.name == "vortex") {
        const VortexParams p = make_vortex_params(info.vortex_count, seed);
        setup.system = make_point_vortex(p);
        setup.x0 = p.positions;
    } else if (info.name == "schwarzschild") {
        setup.system = make_schwarzschild(SchwarzschildParams{});
        setup.x0.assign(kSchwarzschildX0.begin(), kSchwarzschildX0.end());
    } else {
        throw InvalidParams("unknown experiment: " + info.name);
    }
    return setup;
}

ExperimentSetup make_experiment(const std::string& name) {
    const ExperimentInfo* info = find_experiment(name);
    if (!info) throw InvalidParams("unknown experiment: " + name);
    return make_experiment(*info, info->default_seed);
}

const std::vector<MethodInfo>& methods() {
    static const std::vector<MethodInfo> registry = {
        {"rk4", "RK4", Variant::Rk4},
        {"implicit_midpoint", "Implicit Midpoint", Variant::ImplicitMidpoint},
        {"mn_dmm", "MN-DMM", Variant::Direct},
        {"mn_dmm_mixed", "Mixed MN-DMM", Variant::Mixed},
        {"mn_dmm_svd", "Mixed MN-DMM (SVD)", Variant::MixedSvd},
    };
    return registry;
}

const MethodInfo* find_method(const std::string& name) {
    for (const MethodInfo& m : methods())
        if (m.name == name) return &m;
    return nullptr;
}

}  // namespace conservo
