// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Tolerances are pinned in code; runs use the tabulated
// solver settings (delta = epsilon = 1e-15, K = 20) unless stated.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "conservo/harness.hpp"
#include "conservo/multiplier.hpp"
#include "conservo/steppers.hpp"
#include "conservo/systems.hpp"

using namespace conservo;

namespace {

int failures = 0;

void report(int idx, const std::string& label, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", idx, label.c_str(),
                detail.c_str());
    if (!pass) ++failures;
}

std::string eng(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

StepperConfig paper_cfg(double tau, Variant v) {
    StepperConfig cfg;
    cfg.tau = tau;
    cfg.delta = 1e-15;
    cfg.epsilon = 1e-15;
    cfg.max_iters = 20;
    cfg.variant = v;
    return cfg;
}

double max_component(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, x);
    return r;
}

SystemSpec rotation_system() {
    SystemSpec sys;
    sys.name = "rotation";
    sys.dim = 2;
    sys.n_conserved = 1;
    sys.source = [](double, std::span<const double> x, std::span<double> f) {
        f[0] = -x[1];
        f[1] = x[0];
    };
    sys.conserved = [](double, std::span<const double> x, std::span<double> psi) {
        psi[0] = x[0] * x[0] + x[1] * x[1];
    };
    return sys;
}

constexpr Variant kMnVariants[3] = {Variant::Direct, Variant::Mixed, Variant::MixedSvd};
const char* kMnNames[3] = {"direct", "mixed", "mixed_svd"};

struct Cell {
    Trajectory traj;
    bool ok = false;
};

// Results shared across criteria (1 feeds 3, 4 and 5).
Cell lv2_mn[3], lv3_mn[3], aren_mn[3], vort_mn[3], schw_mn[3], lorenz_mn[3];

void criterion_1() {
    bool pass = true;
    std::string detail;

    auto run_cells = [&](const char* name, const SystemSpec& sys, std::span<const double> x0,
                         double tau, double T, std::size_t decimate, Cell* cells,
                         double wall_limit) {
        for (int v = 0; v < 3; ++v) {
            cells[v].traj = integrate(sys, paper_cfg(tau, kMnVariants[v]), x0, 0.0, T, decimate);
            const Trajectory& t = cells[v].traj;
            const double conv = max_component(t.max_defect_converged);
            const bool complete = !t.failure.has_value();
            const bool conserved = conv < 1e-13;
            const bool fast = wall_limit <= 0.0 || t.wall_seconds < wall_limit;
            cells[v].ok = complete && conserved && fast;
            if (!cells[v].ok) {
                pass = false;
                detail += std::string(name) + "/" + kMnNames[v] +
                          (complete ? "" : " truncated") +
                          (conserved ? "" : " conv_defect=" + eng(conv)) +
                          (fast ? "" : " wall=" + eng(t.wall_seconds) + "s") + "; ";
            }
        }
    };

    {
        auto s = make_lv2(Lv2Params{});
        std::vector<double> x0 = {0.3, 0.7};
        run_cells("lv2", s, x0, 0.1, 1000.0, 100, lv2_mn, 0.0);
    }
    {
        auto s = make_lv3(Lv3Params{});
        std::vector<double> x0 = {0.2, 0.5, 0.3};
        run_cells("lv3", s, x0, 0.05, 1500.0, 100, lv3_mn, 0.0);
    }
    {
        auto s = make_three_body(kArenstorfAlpha);
        std::vector<double> x0(kArenstorfX0.begin(), kArenstorfX0.end());
        const double T = 1.015 * kArenstorfPeriod;
        run_cells("arenstorf", s, x0, T * 1e-6, T, 1000, aren_mn, 60.0);
    }
    {
        // Norm constraints keep the trajectory on the sphere; without them
        // this ensemble's base-scheme radial drift ends runs early (see the
        // sampling notes in the README).
        auto p = make_vortex_params(20, 6, true);
        auto s = make_point_vortex(p);
        run_cells("vortex", s, p.positions, 0.1, 50.0, 50, vort_mn, 0.0);
    }
    {
        auto s = make_schwarzschild(SchwarzschildParams{});
        std::vector<double> x0(kSchwarzschildX0.begin(), kSchwarzschildX0.end());
        run_cells("schwarzschild", s, x0, 1.0 / 3.0, 200.0, 1, schw_mn, 0.0);
    }

    if (pass) {
        double worst = 0.0;
        for (const Cell* cells : {lv2_mn, lv3_mn, aren_mn, vort_mn, schw_mn})
            for (int v = 0; v < 3; ++v)
                worst = std::max(worst, max_component(cells[v].traj.max_defect_converged));
        detail = "all 15 runs complete; worst converged-step defect " + eng(worst) +
                 "; arenstorf wall " + eng(aren_mn[0].traj.wall_seconds) + "s";
    }
    report(1, "machine-precision conservation on converged steps", pass, detail);
}

void criterion_2() {
    auto sys = make_lorenz();
    std::vector<double> x0 = {0.1, 0.0, 0.0};
    bool pass = true;
    std::string detail;
    double worst_mn = 0.0;
    for (int v = 0; v < 3; ++v) {
        lorenz_mn[v].traj = integrate(sys, paper_cfg(0.001, kMnVariants[v]), x0, 0.0, 5.0, 10);
        const double d = max_component(lorenz_mn[v].traj.max_defect_all);
        worst_mn = std::max(worst_mn, d);
        if (lorenz_mn[v].traj.failure || d > 1e-6) pass = false;
    }
    auto mid = integrate(sys, paper_cfg(0.001, Variant::ImplicitMidpoint), x0, 0.0, 5.0, 10);
    const double mid_defect = max_component(mid.max_defect_all);
    if (mid.failure || mid_defect < 1.0) pass = false;
    detail = "mn defect " + eng(worst_mn) + " (<= 1e-6), implicit midpoint " + eng(mid_defect) +
             " (>= 1e0)";
    report(2, "lorenz stiff case", pass, detail);
}

void criterion_3() {
    auto sys = make_lv2(Lv2Params{});
    std::vector<double> x0 = {0.3, 0.7};
    auto rk4 = summarize(integrate(sys, paper_cfg(0.1, Variant::Rk4), x0, 0.0, 1000.0, 100), sys);
    auto mid = summarize(
        integrate(sys, paper_cfg(0.1, Variant::ImplicitMidpoint), x0, 0.0, 1000.0, 100), sys);
    double worst_mn = 0.0;
    for (int v = 0; v < 3; ++v)
        worst_mn = std::max(worst_mn, max_component(lv2_mn[v].traj.max_defect_all));
    const bool pass = rk4.max_psi_defect[0] >= 1e-4 && mid.max_psi_defect[0] >= 1e-4 &&
                      worst_mn <= 1e-13;
    report(3, "lv2 baseline contrast (>= 9 orders)", pass,
           "rk4 " + eng(rk4.max_psi_defect[0]) + ", midpoint " + eng(mid.max_psi_defect[0]) +
               ", mn " + eng(worst_mn));
}

void criterion_4() {
    bool pass = true;
    std::string detail;
    auto check_pair = [&](const char* name, const Trajectory& mixed, const Trajectory& svd) {
        const double kb = mixed.max_kappa;
        const double ka = svd.max_kappa;
        const bool ratio_ok = kb >= 10.0 * ka;
        const bool band_ok = std::abs(std::log10(kb) - 2.0 * std::log10(ka)) <= 1.0;
        if (!(ratio_ok && band_ok)) pass = false;
        detail += std::string(name) + " kB=" + eng(kb) + " kA=" + eng(ka) + "; ";
    };
    check_pair("lv3", lv3_mn[1].traj, lv3_mn[2].traj);
    check_pair("schwarzschild", schw_mn[1].traj, schw_mn[2].traj);
    report(4, "conditioning pattern kappa(B) ~ kappa(A)^2", pass, detail);
}

void criterion_5() {
    bool pass = true;
    std::string detail;
    auto check = [&](const char* name, const Cell* cells) {
        for (int v = 0; v < 3; ++v) {
            if (cells[v].traj.max_kappa != 1.0) {
                pass = false;
                detail += std::string(name) + "/" + kMnNames[v] + " kappa=" +
                          eng(cells[v].traj.max_kappa) + "; ";
            }
        }
    };
    check("lv2", lv2_mn);
    check("arenstorf", aren_mn);
    check("lorenz", lorenz_mn);
    if (pass) detail = "reported kappa identically 1.0 across all nine m=1 runs";
    report(5, "m=1 scalar identity kappa == 1.0", pass, detail);
}

void criterion_6() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double worst = 0.0;
    int used = 0;
    while (used < 1000) {
        const std::size_t m = 1 + gen() % 5;
        const std::size_t n = m + 1 + gen() % (16 - m);
        MultiplierMatrix lam;
        lam.matrix.assign_zero(m, n);
        for (auto& e : lam.matrix.data()) e = dist(gen);
        if (linalg::cond_2(lam.matrix) > 1e4) continue;
        ++used;
        std::vector<double> f(n), dt(m);
        for (auto& v : f) v = dist(gen);
        for (auto& v : dt) v = dist(gen);
        auto [d, k1] = mn_correct(lam, f, dt, Variant::Direct);
        auto [x, k2] = mn_correct(lam, f, dt, Variant::Mixed);
        auto [s, k3] = mn_correct(lam, f, dt, Variant::MixedSvd);
        std::vector<std::vector<double>> all = {d, x, s};
        if (m == 1) {
            std::vector<double> fast(n);
            mn_correct_m1(lam.matrix.row(0), f, dt[0], fast);
            all.push_back(fast);
        } else if (m == 2) {
            std::vector<double> fast(n);
            mn_correct_m2(lam.matrix.row(0), lam.matrix.row(1), f, dt, fast);
            all.push_back(fast);
        }
        double scale = 1.0;
        for (double v : d) scale = std::max(scale, std::abs(v));
        for (std::size_t a = 1; a < all.size(); ++a)
            for (std::size_t j = 0; j < n; ++j)
                worst = std::max(worst, std::abs(all[a][j] - all[0][j]) / scale);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = worst <= 1e-9 && secs < 5.0;
    report(6, "variant equivalence on 1000 random instances", pass,
           "worst rel diff " + eng(worst) + " in " + eng(secs) + "s");
}

void criterion_7() {
    std::mt19937 gen(777);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    linalg::PinvWorkspace pinv;
    double worst_violation = 0.0;
    int used = 0;
    while (used < 100) {
        const std::size_t m = 1 + gen() % 5;
        const std::size_t n = m + 1 + gen() % (16 - m);
        MultiplierMatrix lam;
        lam.matrix.assign_zero(m, n);
        for (auto& e : lam.matrix.data()) e = dist(gen);
        if (linalg::cond_2(lam.matrix) > 1e4) continue;
        ++used;
        std::vector<double> f(n), dt(m);
        for (auto& v : f) v = dist(gen);
        for (auto& v : dt) v = dist(gen);
        auto [fmn, kappa] = mn_correct(lam, f, dt, Variant::Direct);
        double base = 0.0;
        for (std::size_t j = 0; j < n; ++j) base += (f[j] - fmn[j]) * (f[j] - fmn[j]);
        base = std::sqrt(base);
        for (int p = 0; p < 100; ++p) {
            std::vector<double> k(n), ak(m, 0.0), proj(n);
            for (auto& v : k) v = dist(gen);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) ak[i] += lam.matrix(i, j) * k[j];
            linalg::apply_pinv(lam.matrix, ak, linalg::PinvBackend::NormalEq, proj, pinv);
            double d2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double g = fmn[j] + (k[j] - proj[j]);
                d2 += (f[j] - g) * (f[j] - g);
            }
            worst_violation = std::max(worst_violation, base - std::sqrt(d2));
        }
    }
    const bool pass = worst_violation <= 1e-12;
    report(7, "minimal-norm property", pass, "worst violation " + eng(worst_violation));
}

void criterion_8() {
    std::mt19937 gen(808);
    double worst = 0.0;
    std::size_t pairs = 0;
    MultiplierWorkspace ws;
    MultiplierMatrix lam;

    auto run_pairs = [&](const SystemSpec& sys, auto sample, double t, int count) {
        std::vector<double> pa(sys.n_conserved), pb(sys.n_conserved);
        for (int k = 0; k < count; ++k) {
            std::vector<double> xo = sample();
            std::vector<double> xn = sample();
            if (!sys.contains(xo) || !sys.contains(xn)) {
                --k;
                continue;
            }
            // A pair whose telescoping path leaves the admissible domain has
            // no divided-difference multiplier; resample, as with degenerate
            // columns.
            try {
                telescoping_multiplier(sys, t, xn, xo, kDefaultDegTol, lam, ws);
            } catch (const DomainViolation&) {
                --k;
                continue;
            }
            if (!lam.degenerate_columns.empty()) {
                --k;
                continue;
            }
            auto defect = check_chain_rule(lam, sys, t, xn, xo);
            sys.eval_conserved(t, xn, pa);
            sys.eval_conserved(t, xo, pb);
            for (std::size_t i = 0; i < sys.n_conserved; ++i) {
                const double scale = std::max({1.0, std::abs(pa[i]), std::abs(pb[i])});
                worst = std::max(worst, std::abs(defect[i]) / scale);
            }
            ++pairs;
        }
    };

    std::uniform_real_distribution<double> pos(0.05, 3.0);
    auto lv2 = make_lv2(Lv2Params{});
    run_pairs(lv2, [&] { return std::vector<double>{pos(gen), pos(gen)}; }, 0.0, 2000);

    auto lv3 = make_lv3(Lv3Params{});
    run_pairs(lv3, [&] { return std::vector<double>{pos(gen), pos(gen), pos(gen)}; }, 0.0, 2000);

    std::uniform_real_distribution<double> box(-1.5, 1.5);
    auto tb = make_three_body(kArenstorfAlpha);
    run_pairs(tb, [&] { return std::vector<double>{box(gen), box(gen), box(gen), box(gen)}; },
              0.0, 2000);

    std::uniform_real_distribution<double> lbox(-3.0, 3.0);
    auto lor = make_lorenz();
    run_pairs(lor, [&] { return std::vector<double>{lbox(gen), lbox(gen), lbox(gen)}; }, 1.3,
              2000);

    auto vp = make_vortex_params(5, 99);
    auto vor = make_point_vortex(vp);
    std::normal_distribution<double> jitter(0.0, 0.05);
    run_pairs(vor,
              [&] {
                  std::vector<double> x = vp.positions;
                  for (double& v : x) v += jitter(gen);
                  return x;
              },
              0.0, 2000);

    auto schw = make_schwarzschild(SchwarzschildParams{});
    std::uniform_real_distribution<double> rd(3.0, 40.0), th(0.4, std::numbers::pi - 0.4),
        ph(0.0, 6.28), vd(-0.5, 0.5);
    run_pairs(schw,
              [&] {
                  return std::vector<double>{vd(gen) * 4.0,   rd(gen), th(gen), ph(gen),
                                             1.0 + vd(gen), vd(gen), vd(gen), vd(gen)};
              },
              0.0, 2000);

    // Degenerate columns are separately asserted to use the fallback.
    bool degenerate_ok = true;
    {
        std::vector<double> xo = {0.3, 0.7}, xn = {0.5, 0.7};
        auto l = telescoping_multiplier(lv2, 0.0, xn, xo);
        degenerate_ok = l.degenerate_columns.size() == 1 && l.degenerate_columns[0] == 1 &&
                        std::abs(l.matrix(0, 1) - (1.0 / 0.7 - 2.0)) < 1e-12;
    }

    const bool pass = worst <= 1e-12 && pairs >= 10000 && degenerate_ok;
    report(8, "discrete chain-rule exactness on 1e4 random pairs", pass,
           std::to_string(pairs) + " pairs, worst scaled defect " + eng(worst) +
               (degenerate_ok ? "" : ", degenerate fallback broken"));
}

void criterion_9() {
    auto sys = rotation_system();
    std::vector<double> x0 = {1.0, 0.0};
    StepperConfig mn;
    mn.tau = 0.2;
    auto mn_pts = convergence_study(sys, mn, x0, 0.0, 1.0, 3);
    bool pass = true;
    std::string detail = "mn orders";
    for (std::size_t i = 1; i < mn_pts.size(); ++i) {
        if (!(mn_pts[i].observed_order >= 0.9)) pass = false;
        char buf[16];
        std::snprintf(buf, sizeof buf, " %.2f", mn_pts[i].observed_order);
        detail += buf;
    }
    StepperConfig rk;
    rk.tau = 0.2;
    rk.variant = Variant::Rk4;
    auto rk_pts = convergence_study(sys, rk, x0, 0.0, 1.0, 3);
    detail += ", rk4 orders";
    for (std::size_t i = 1; i < rk_pts.size(); ++i) {
        if (!(rk_pts[i].observed_order >= 3.7 && rk_pts[i].observed_order <= 4.3)) pass = false;
        char buf[16];
        std::snprintf(buf, sizeof buf, " %.2f", rk_pts[i].observed_order);
        detail += buf;
    }
    report(9, "consistency orders on the rotation system", pass, detail);
}

void criterion_10() {
    auto sys = make_schwarzschild(SchwarzschildParams{});
    std::vector<double> x0(kSchwarzschildX0.begin(), kSchwarzschildX0.end());
    bool pass = true;
    std::string detail;

    auto rk4 = integrate(sys, paper_cfg(1.0 / 3.0, Variant::Rk4), x0, 0.0, 200.0, 1);
    if (!rk4.failure) pass = false;
    detail += rk4.failure ? "rk4 truncated at step " + std::to_string(rk4.failure->step)
                          : "rk4 unexpectedly completed";

    const double mn_coarse = max_component(schw_mn[0].traj.max_defect_all);
    if (schw_mn[0].traj.failure || mn_coarse > 1e-13) pass = false;
    detail += "; mn(tau=1/3) defect " + eng(mn_coarse);

    const double tau_fine = (1.0 / 3.0) / 128.0;
    auto mid_coarse =
        integrate(sys, paper_cfg(1.0 / 3.0, Variant::ImplicitMidpoint), x0, 0.0, 200.0, 100);
    auto mid_fine =
        integrate(sys, paper_cfg(tau_fine, Variant::ImplicitMidpoint), x0, 0.0, 200.0, 1000);
    const double mc = max_component(mid_coarse.max_defect_all);
    const double mf = max_component(mid_fine.max_defect_all);
    if (mid_coarse.failure || mid_fine.failure) pass = false;
    if (!(mf < mc)) pass = false;       // defects shrink with tau
    if (!(mf >= 1e-8)) pass = false;    // but stay well above machine precision
    detail += "; midpoint " + eng(mc) + " -> " + eng(mf);

    // tau-independence of the conservative correction: at tau/128 the
    // normal-equation variants hit the rank-deficiency guard near periapsis
    // (the Gram matrix conditioning squares), which is what the SVD variant
    // exists for. At least one variant must complete with a machine-scale
    // defect, at least four orders below the midpoint floor at the same tau.
    double mn_fine_best = std::numeric_limits<double>::infinity();
    std::string fine_note;
    for (int v = 0; v < 3; ++v) {
        auto mn_fine = integrate(sys, paper_cfg(tau_fine, kMnVariants[v]), x0, 0.0, 200.0, 1000);
        if (mn_fine.failure) {
            fine_note += std::string(" ") + kMnNames[v] + "=truncated";
        } else {
            const double d = max_component(mn_fine.max_defect_all);
            mn_fine_best = std::min(mn_fine_best, d);
            fine_note += std::string(" ") + kMnNames[v] + "=" + eng(d);
        }
    }
    if (!(mn_fine_best <= 1e-12 && mn_fine_best <= 1e-4 * mf)) pass = false;
    detail += "; mn(tau/128)" + fine_note;

    report(10, "schwarzschild qualitative reproduction", pass, detail);
}

void criterion_11() {
    SchwarzschildParams p;
    MetricFn metric = [p](std::span<const double> x) { return schwarzschild_metric(p, x); };
    std::mt19937 gen(1111);
    std::uniform_real_distribution<double> rd(3.0, 60.0), th(0.1, std::numbers::pi - 0.1),
        ph(0.0, 6.28), td(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x = {td(gen), rd(gen), th(gen), ph(gen)};
        const auto a = christoffel_schwarzschild(p, x);
        const auto o = christoffel_fd_oracle(metric, x);
        for (std::size_t i = 0; i < 64; ++i) worst = std::max(worst, std::abs(a.v[i] - o.v[i]));
    }
    MetricFn mink = [](std::span<const double>) {
        DenseMatrix g(4, 4);
        g(0, 0) = 1.0;
        g(1, 1) = -1.0;
        g(2, 2) = -1.0;
        g(3, 3) = -1.0;
        return g;
    };
    double mink_worst = 0.0;
    const auto c = christoffel_fd_oracle(mink, std::vector<double>{0.1, 2.0, 0.5, 1.0});
    for (double v : c.v) mink_worst = std::max(mink_worst, std::abs(v));
    const bool pass = worst <= 1e-6 && mink_worst <= 1e-10;
    report(11, "christoffel closed forms vs finite-difference oracle", pass,
           "schwarzschild max err " + eng(worst) + ", minkowski " + eng(mink_worst));
}

}  // namespace

int main() {
    std::printf("acceptance suite (tolerances pinned in code)\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("%d of 11 criteria failed\n", failures);
    return failures;
}
