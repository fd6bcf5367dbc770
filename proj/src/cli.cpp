#include "conservo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "conservo/errors.hpp"
#include "conservo/experiments.hpp"

namespace conservo::cli {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidParams("config: bad numeric value for '" + key + "': " + v);
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidParams("config: bad integer value for '" + key + "': " + v);
    }
}

std::string method_list() {
    std::string out;
    for (const MethodInfo& m : methods()) {
        if (!out.empty()) out += ", ";
        out += m.name;
    }
    return out;
}

std::string experiment_list() {
    std::string out;
    for (const ExperimentInfo& e : experiments()) {
        if (!out.empty()) out += ", ";
        out += e.name;
    }
    return out;
}

struct ResolvedRun {
    const ExperimentInfo* info;
    ExperimentSetup setup;
    StepperConfig cfg;
    double t_final;
    std::size_t decimate;
};

// Resolve experiment + overrides into a runnable setup. Throws
// InvalidParams on any config error.
ResolvedRun resolve(const RunConfig& run, const MethodInfo& method) {
    const ExperimentInfo* info = find_experiment(run.experiment);
    if (!info)
        throw InvalidParams("unknown experiment '" + run.experiment +
                            "' (valid: " + experiment_list() + ")");

    ResolvedRun r;
    r.info = info;
    r.setup = make_experiment(*info, run.seed.value_or(info->default_seed));

    r.cfg.tau = run.tau.value_or(info->tau);
    r.cfg.delta = run.delta.value_or(info->delta);
    r.cfg.epsilon = run.epsilon.value_or(info->epsilon);
    r.cfg.max_iters = run.max_iters.value_or(info->max_iters);
    r.cfg.variant = method.variant;
    if (run.base_scheme) {
        if (*run.base_scheme == "improved_euler")
            r.cfg.base_scheme = BaseScheme::ImprovedEuler;
        else if (*run.base_scheme == "trapezoidal")
            r.cfg.base_scheme = BaseScheme::Trapezoidal;
        else
            throw InvalidParams("unknown base scheme '" + *run.base_scheme +
                                "' (valid: improved_euler, trapezoidal)");
    }
    r.t_final = run.t_final.value_or(info->t_final);
    r.decimate = run.decimate.value_or(info->decimate);

    if (!(r.cfg.tau > 0.0)) throw InvalidParams("tau must be positive");
    if (!(r.cfg.delta > 0.0)) throw InvalidParams("delta must be positive");
    if (!(r.cfg.epsilon > 0.0)) throw InvalidParams("epsilon must be positive");
    if (r.cfg.max_iters < 1) throw InvalidParams("max_iters must be at least 1");
    if (!(r.t_final > r.setup.t0)) throw InvalidParams("t_final must exceed t0");
    return r;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw InvalidParams("cannot open output file: " + path.string());
    return os;
}

// The output directory is part of the config contract; failures there are
// usage errors, not run failures.
void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidParams("cannot create output directory " + dir + ": " + ec.message());
}

std::string defect_or_nan(const ExperimentReport& rep, std::size_t c) {
    if (rep.truncated) return "nan";
    return format_float(rep.max_psi_defect[c]);
}

void print_table_text(std::ostream& os, const std::vector<ExperimentReport>& reps,
                      std::size_t m) {
    os << std::left << std::setw(22) << "method";
    for (std::size_t c = 0; c < m; ++c)
        os << std::right << std::setw(14) << ("defect_" + std::to_string(c));
    os << std::right << std::setw(10) << "mean_fpi" << std::setw(12) << "max_kappa"
       << std::setw(9) << "nonconv" << "\n";
    char buf[32];
    for (const ExperimentReport& rep : reps) {
        os << std::left << std::setw(22) << rep.method;
        for (std::size_t c = 0; c < m; ++c) {
            if (rep.truncated) {
                os << std::right << std::setw(14) << "NaN";
            } else {
                std::snprintf(buf, sizeof buf, "%.3e", rep.max_psi_defect[c]);
                os << std::right << std::setw(14) << buf;
            }
        }
        if (rep.mean_fpi) {
            std::snprintf(buf, sizeof buf, "%.3f", *rep.mean_fpi);
            os << std::right << std::setw(10) << buf;
        } else {
            os << std::right << std::setw(10) << "--";
        }
        if (rep.max_kappa) {
            std::snprintf(buf, sizeof buf, "%.3e", *rep.max_kappa);
            os << std::right << std::setw(12) << buf;
        } else {
            os << std::right << std::setw(12) << "--";
        }
        os << std::right << std::setw(9) << rep.nonconverged_steps << "\n";
    }
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot read config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw InvalidParams("config: missing '=' at " + path + ":" +
                                std::to_string(lineno));
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw InvalidParams("config: empty key at " + path + ":" + std::to_string(lineno));
        kv[key] = value;
    }
    return kv;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "experiment") {
            if (cfg.experiment.empty()) cfg.experiment = value;
        } else if (key == "method") {
            if (cfg.method.empty()) cfg.method = value;
        } else if (key == "tau") {
            if (!cfg.tau) cfg.tau = parse_double(key, value);
        } else if (key == "t_final") {
            if (!cfg.t_final) cfg.t_final = parse_double(key, value);
        } else if (key == "delta") {
            if (!cfg.delta) cfg.delta = parse_double(key, value);
        } else if (key == "epsilon") {
            if (!cfg.epsilon) cfg.epsilon = parse_double(key, value);
        } else if (key == "max_iters") {
            if (!cfg.max_iters) cfg.max_iters = static_cast<int>(parse_int(key, value));
        } else if (key == "base_scheme") {
            if (!cfg.base_scheme) cfg.base_scheme = value;
        } else if (key == "output_dir") {
            if (cfg.output_dir == ".") cfg.output_dir = value;
        } else if (key == "decimate") {
            if (!cfg.decimate) cfg.decimate = static_cast<std::size_t>(parse_int(key, value));
        } else if (key == "seed") {
            if (!cfg.seed) cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "halvings") {
            if (!cfg.halvings) cfg.halvings = static_cast<int>(parse_int(key, value));
        } else {
            throw InvalidParams("config: unknown key '" + key + "'");
        }
    }
}

std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const SystemSpec& sys) {
    const std::size_t n = traj.state_dim;
    const std::size_t m = traj.psi_dim;
    os << "step,t";
    for (std::size_t j = 0; j < n; ++j) os << ",x_" << j;
    for (std::size_t c = 0; c < m; ++c) os << ",psi_defect_" << c;
    os << ",fpi,kappa,converged\n";
    std::vector<double> psi(m);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << traj.steps[i] << ',' << format_float(traj.times[i]);
        const auto x = traj.state(i);
        for (std::size_t j = 0; j < n; ++j) os << ',' << format_float(x[j]);
        sys.eval_conserved(traj.times[i], x, psi);
        for (std::size_t c = 0; c < m; ++c)
            os << ',' << format_float(std::abs(psi[c] - traj.psi_ref[c]));
        const StepDiagnostics& d = traj.diagnostics[i];
        os << ',' << d.iterations << ',' << format_float(d.kappa) << ','
           << (d.converged ? 1 : 0) << "\n";
    }
}

void write_defect_csv(std::ostream& os, const Trajectory& traj, const SystemSpec& sys) {
    const std::size_t m = traj.psi_dim;
    os << "step,t";
    for (std::size_t c = 0; c < m; ++c) os << ",psi_defect_" << c;
    os << "\n";
    std::vector<double> psi(m);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << traj.steps[i] << ',' << format_float(traj.times[i]);
        sys.eval_conserved(traj.times[i], traj.state(i), psi);
        for (std::size_t c = 0; c < m; ++c)
            os << ',' << format_float(std::abs(psi[c] - traj.psi_ref[c]));
        os << "\n";
    }
}

void write_summary_csv(std::ostream& os, const ExperimentReport& rep, std::size_t psi_dim,
                       bool include_wall) {
    os << "method";
    for (std::size_t c = 0; c < psi_dim; ++c) os << ",psi_defect_max_" << c;
    os << ",mean_fpi,max_kappa,nonconverged";
    if (include_wall) os << ",wall_s";
    os << "\n";
    os << rep.method;
    for (std::size_t c = 0; c < psi_dim; ++c) os << ',' << defect_or_nan(rep, c);
    os << ',' << (rep.mean_fpi ? format_float(*rep.mean_fpi) : "");
    os << ',' << (rep.max_kappa ? format_float(*rep.max_kappa) : "");
    os << ',' << rep.nonconverged_steps;
    if (include_wall) os << ',' << format_float(rep.wall_seconds);
    os << "\n";
}

int cmd_run(const RunConfig& run) {
    try {
        const MethodInfo* method = find_method(run.method);
        if (!method)
            throw InvalidParams("unknown method '" + run.method +
                                "' (valid: " + method_list() + ")");
        ResolvedRun r = resolve(run, *method);

        ensure_output_dir(run.output_dir);
        const Trajectory traj =
            integrate(r.setup.system, r.cfg, r.setup.x0, r.setup.t0, r.t_final, r.decimate);
        const ExperimentReport rep = summarize(traj, r.setup.system, method->name);

        const std::string stem = run.experiment + "_" + method->name;
        {
            auto os = open_out(fs::path(run.output_dir) / (stem + "_traj.csv"));
            write_trajectory_csv(os, traj, r.setup.system);
        }
        {
            auto os = open_out(fs::path(run.output_dir) / (stem + "_summary.csv"));
            write_summary_csv(os, rep, traj.psi_dim, true);
        }
        {
            auto os = open_out(fs::path(run.output_dir) / (stem + "_defect.csv"));
            write_defect_csv(os, traj, r.setup.system);
        }

        std::cout << run.experiment << " / " << method->name << ": steps=" << rep.total_steps
                  << " max_defect=";
        for (std::size_t c = 0; c < traj.psi_dim; ++c)
            std::cout << (c ? "," : "") << defect_or_nan(rep, c);
        if (rep.mean_fpi) std::cout << " mean_fpi=" << *rep.mean_fpi;
        if (rep.max_kappa) std::cout << " max_kappa=" << *rep.max_kappa;
        std::cout << " wall_s=" << rep.wall_seconds << "\n";
        if (traj.failure) {
            std::cout << "truncated at step " << traj.failure->step << ": "
                      << traj.failure->reason << "\n";
            return 2;
        }
        return 0;
    } catch (const InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_table(const RunConfig& run) {
    try {
        std::vector<const MethodInfo*> selected;
        if (run.methods.empty()) {
            for (const MethodInfo& mi : methods()) selected.push_back(&mi);
        } else {
            for (const std::string& name : run.methods) {
                const MethodInfo* mi = find_method(name);
                if (!mi)
                    throw InvalidParams("unknown method '" + name +
                                        "' (valid: " + method_list() + ")");
                selected.push_back(mi);
            }
        }

        // Resolve once so every method shares identical settings and data.
        ResolvedRun base = resolve(run, *selected.front());
        const std::size_t m = base.setup.system.n_conserved;

        std::vector<ExperimentReport> reps;
        for (const MethodInfo* mi : selected) {
            StepperConfig cfg = base.cfg;
            cfg.variant = mi->variant;
            const Trajectory traj = integrate(base.setup.system, cfg, base.setup.x0,
                                              base.setup.t0, base.t_final, base.decimate);
            reps.push_back(summarize(traj, base.setup.system, mi->name));
        }

        print_table_text(std::cout, reps, m);

        ensure_output_dir(run.output_dir);
        auto os = open_out(fs::path(run.output_dir) / (run.experiment + "_table.csv"));
        os << "method";
        for (std::size_t c = 0; c < m; ++c) os << ",psi_defect_max_" << c;
        os << ",mean_fpi,max_kappa,nonconverged\n";
        for (const ExperimentReport& rep : reps) {
            os << rep.method;
            for (std::size_t c = 0; c < m; ++c) os << ',' << defect_or_nan(rep, c);
            os << ',' << (rep.mean_fpi ? format_float(*rep.mean_fpi) : "");
            os << ',' << (rep.max_kappa ? format_float(*rep.max_kappa) : "");
            os << ',' << rep.nonconverged_steps << "\n";
        }
        return 0;
    } catch (const InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_list() {
    std::cout << "experiments (tau, T, delta, epsilon, K):\n";
    for (const ExperimentInfo& e : experiments()) {
        std::cout << "  " << std::left << std::setw(14) << e.name << " tau=" << e.tau
                  << " T=" << e.t_final << " delta=" << e.delta << " epsilon=" << e.epsilon
                  << " K=" << e.max_iters;
        if (e.decimate > 1) std::cout << " decimate=" << e.decimate;
        if (e.uses_seed)
            std::cout << " seed=" << e.default_seed << " vortices=" << e.vortex_count;
        std::cout << "\n";
    }
    std::cout << "methods: " << method_list() << "\n";
    return 0;
}

int cmd_convergence(const RunConfig& run) {
    try {
        const MethodInfo* method = find_method(run.method);
        if (!method)
            throw InvalidParams("unknown method '" + run.method +
                                "' (valid: " + method_list() + ")");
        ResolvedRun r = resolve(run, *method);
        const int halvings = run.halvings.value_or(3);

        const auto points = convergence_study(r.setup.system, r.cfg, r.setup.x0, r.setup.t0,
                                              r.t_final, halvings);

        std::cout << std::left << std::setw(16) << "tau" << std::setw(16) << "error"
                  << "observed_order\n";
        for (const ConvergencePoint& p : points) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%-16.6e%-16.6e%.3f", p.tau, p.error,
                          p.observed_order);
            std::cout << buf << "\n";
        }

        ensure_output_dir(run.output_dir);
        auto os = open_out(fs::path(run.output_dir) /
                           (run.experiment + "_" + method->name + "_convergence.csv"));
        os << "tau,error,observed_order\n";
        for (const ConvergencePoint& p : points)
            os << format_float(p.tau) << ',' << format_float(p.error) << ','
               << format_float(p.observed_order) << "\n";
        return 0;
    } catch (const InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace conservo::cli
