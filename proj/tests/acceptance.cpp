// Acceptance suite: one numbered criterion per test, each printing a single
// pass/fail line. Run all with no arguments or a single criterion with
// `acceptance --only <n>`.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ssqg/certificate.hpp"
#include "ssqg/errors.hpp"
#include "ssqg/kernel.hpp"
#include "ssqg/modulus.hpp"
#include "ssqg/solver.hpp"
#include "ssqg/spectral.hpp"
#include "ssqg/symbol.hpp"

using namespace ssqg;
namespace fs = std::filesystem;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && passed) {
            passed = false;
            detail = what;
        }
    }
};

ModulusFamily auto_family(const Symbol& s, double A = 1.0) {
    auto [kappa, gamma] = choose_constants(A, s);
    return ModulusFamily::make(s, A, kappa, gamma);
}

double uniform(std::mt19937_64& rng) { return (double)(rng() >> 11) * 0x1.0p-53; }

struct MinModulus : ConcaveModulus {
    double omega(double xi) const override { return xi < 1.0 ? xi : 1.0; }
    double omega_prime(double xi) const override { return xi <= 1.0 ? 1.0 : 0.0; }
    double slope_at_zero() const override { return 1.0; }
    std::vector<double> kinks() const override { return {1.0}; }
    std::pair<double, double> tail_integral_bracket(double H) const override {
        return {1.0 / H, 1.0 / H};
    }
};

// ---------------------------------------------------------------- criterion 1
Outcome modulus_closed_forms() {
    Outcome out;
    std::mt19937_64 rng(20260809);
    const std::array<Symbol, 4> symbols = {Symbol::constant_one(),
                                           Symbol::loglog_power(0.25),
                                           Symbol::loglog_power(0.5),
                                           Symbol::loglog_power(0.9)};
    for (int trial = 0; trial < 20; ++trial) {
        const Symbol& s = symbols[trial % symbols.size()];
        const double A = 1.0 + 15.0 * uniform(rng);
        auto fam = auto_family(s, A);
        const double B = std::pow(10.0, 6.0 * uniform(rng));
        auto inst = ModulusInstance::make(fam, B);
        const double d = inst.delta();
        const double at0 = inst.omega_prime(1e-14 * d);
        const double left = inst.omega_prime(d);
        const double right = inst.omega_prime(d * (1.0 + 1e-14));
        const double right_exact = fam.gamma * B / (4.0 * fam.kappa);
        out.require(std::abs(at0 - B) <= 1e-12 * B, "omega'(0+) != B");
        out.require(std::abs(left - 0.5 * B) <= 1e-12 * 0.5 * B, "omega'(delta-) != B/2");
        out.require(std::abs(right - right_exact) <= 1e-12 * right_exact,
                    "omega'(delta+) != gamma B/(4 kappa)");
    }
    if (out.passed) out.detail = "20 random tuples, all three one-sided values at 1e-12";
    return out;
}

// ---------------------------------------------------------------- criterion 2
Outcome delta_root_solve() {
    Outcome out;
    for (const Symbol& s : {Symbol::constant_one(), Symbol::loglog_power(0.5)}) {
        auto [kappa, gamma] = choose_constants(1.0, s);
        (void)gamma;
        double prev = 1e300;
        for (int k = 0; k <= 30; ++k) {
            const double B = std::pow(2.0, k);
            const double d = solve_delta(s, B, kappa);
            const double resid = std::abs(B * g_of_delta(s, d) - kappa) / kappa;
            out.require(resid <= 1e-12,
                        "residual above 1e-12 at B = 2^" + std::to_string(k));
            out.require(d < prev, "delta(B) not strictly decreasing");
            prev = d;
        }
    }
    if (out.passed) out.detail = "residual <= 1e-12 and strict decrease over B = 1..2^30";
    return out;
}

// ---------------------------------------------------------------- criterion 3
Outcome modulus_axioms() {
    Outcome out;
    for (const Symbol& s : {Symbol::constant_one(), Symbol::loglog_power(0.5)}) {
        auto fam = auto_family(s);
        for (double B : {1.0, 1e3, 1e6}) {
            auto inst = ModulusInstance::make(fam, B);
            const auto rep = check_modulus_axioms(inst); // 400/dec over 16 decades
            out.require(rep.passed,
                        s.name() + " B=" + std::to_string((long long)B) + ": " +
                            (rep.violations.empty() ? std::string("?")
                                                    : rep.violations.front().axiom));
            out.require(rep.tail_integral <= 2.0 * B, "tail integral above 2B");
        }
    }
    if (out.passed)
        out.detail = "monotone+concave+doubling+tail on 400/decade grids, 16 decades";
    return out;
}

// ---------------------------------------------------------------- criterion 4
Outcome negativity_certificate() {
    Outcome out;
    double worst = 1e300;
    const std::array<Symbol, 4> symbols = {Symbol::constant_one(),
                                           Symbol::loglog_power(0.25),
                                           Symbol::loglog_power(0.5),
                                           Symbol::loglog_power(0.9)};
    for (const Symbol& s : symbols) {
        auto fam = auto_family(s, 1.0);
        CertificateConfig cfg; // B {1,10,1e3,1e6}, [1e-6, 1e6] at 50/decade
        auto rep = verify_negativity(fam, cfg);
        out.require(rep.passed,
                    s.name() + ": negativity failed at B=" + std::to_string(rep.worst_B));
        out.require(rep.worst_margin >= cfg.margin, s.name() + ": margin below 1e-3");
        out.require(rep.bounds_passed, s.name() + ": an intermediate bound failed");
        worst = std::min(worst, rep.worst_margin);

        CertificateConfig half = cfg;
        half.quad_tol = cfg.quad_tol / 2.0;
        auto rep2 = verify_negativity(fam, half);
        for (size_t i = 0; i < rep.points.size(); ++i) {
            const auto& p = rep.points[i];
            const auto& q = rep2.points[i];
            out.require(std::abs(p.Omega.hi - q.Omega.hi) <=
                            10.0 * cfg.quad_tol * std::abs(p.Omega.hi),
                        s.name() + ": Omega moved more than 10x tol under halving");
            out.require(
                std::abs(p.D.hi - q.D.hi) <= 10.0 * cfg.quad_tol * std::abs(p.D.hi),
                s.name() + ": D moved more than 10x tol under halving");
        }
    }
    if (out.passed) {
        std::ostringstream os;
        os << "4 symbols x 4 B x 12 decades at 50/decade; worst margin " << worst;
        out.detail = os.str();
    }
    return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome failure_detection_cli() {
    Outcome out;
    const char* bin = std::getenv("SSQG_BIN");
    if (!bin) {
        out.require(false, "SSQG_BIN not set");
        return out;
    }
    const auto dir = fs::temp_directory_path() / "ssqg_acc5";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "c.cfg");
        cfg << "[constants]\nA = 1\nkappa = " << 10.0 / kPi << "\ngamma = " << 5.0 / kPi
            << "\n[certificate]\nB_list = [1, 10]\nxi_low = 1e-3\nxi_high = 1e3\n";
    }
    const std::string cmd = std::string(bin) + " certify --config " +
                            (dir / "c.cfg").string() + " --out " +
                            (dir / "out").string() + " >/dev/null 2>/dev/null";
    const int rc = WEXITSTATUS(std::system(cmd.c_str()));
    out.require(rc == 2, "exit code was " + std::to_string(rc) + ", expected 2");

    // at least one non-negative combined value with xi <= delta
    bool near_field_nonneg = false;
    for (const auto& e : fs::recursive_directory_iterator(dir / "out")) {
        if (e.path().filename() != "report.csv") continue;
        std::ifstream csv(e.path());
        std::string line;
        std::getline(csv, line); // header
        while (std::getline(csv, line)) {
            double B, x, op, om, d, comb, margin;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &B, &x, &op, &om,
                            &d, &comb, &margin) == 7)
                if (x <= 1.0 && comb >= 0.0) near_field_nonneg = true;
        }
    }
    out.require(near_field_nonneg, "no non-negative point found in the near-field regime");
    fs::remove_all(dir);
    if (out.passed) out.detail = "kappa = 10/(pi A): exit 2 with near-field violation";
    return out;
}

// ---------------------------------------------------------------- criterion 6
Outcome dissipation_oracle() {
    Outcome out;
    MinModulus min_mod;
    const auto d2 = dissipation_bracket(min_mod, 2.0);
    const double exact = -2.0 * std::log(3.0) / kPi;
    out.require(std::abs(d2.hi - exact) <= 1e-6,
                "D(2) missed -(2 ln 3)/pi by more than 1e-6");

    struct LinearModulus : ConcaveModulus {
        double omega(double xi) const override { return 0.7 * xi; }
        double omega_prime(double) const override { return 0.7; }
        double slope_at_zero() const override { return 0.7; }
        std::vector<double> kinks() const override { return {}; }
        std::pair<double, double> tail_integral_bracket(double) const override {
            throw std::logic_error("divergent");
        }
    } lin_mod;
    for (double xi : {0.4, 1.0, 7.0})
        out.require(std::abs(dissipation_bracket(lin_mod, xi).hi) <= 1e-10,
                    "linear-modulus D above 1e-10");
    if (out.passed) out.detail = "D(2) = -(2 ln 3)/pi to 1e-6; linear D = 0 to 1e-10";
    return out;
}

// ---------------------------------------------------------------- criterion 7
Outcome velocity_modulus_oracle() {
    Outcome out;
    MinModulus min_mod;
    for (double xi : {0.01, 0.1, 0.5}) {
        const auto ob = omega_velocity_bracket(min_mod, Symbol::constant_one(), 1.0, xi);
        const double exact = 2.0 * xi + xi * std::log(1.0 / xi);
        out.require(std::abs(ob.total.hi - exact) <= 1e-8 * exact,
                    "Omega missed 2 xi + xi ln(1/xi) at xi = " + std::to_string(xi));
    }
    if (out.passed) out.detail = "Omega = 2 xi + xi ln(1/xi) at {0.01, 0.1, 0.5} to 1e-8";
    return out;
}

// ---------------------------------------------------------------- criterion 8
Outcome kernel_criteria() {
    Outcome out;
    {
        KernelProbe probe;
        probe.symbol = Symbol::constant_one();
        const int per_decade = 4;
        for (int i = 0; i <= 5 * per_decade; ++i) {
            const double r = 1e-4 * std::pow(10.0, i / (double)per_decade);
            if (r > 10.0 * (1 + 1e-12)) break;
            const auto kv = compute_kernel(probe, r, 0.0);
            const double exact = 1.0 / (2.0 * kPi * r * r);
            out.require(std::abs(kv.value - exact) <= 0.01 * exact,
                        "Riesz mismatch above 1% at r = " + std::to_string(r));
        }
    }
    {
        KernelProbe probe;
        probe.symbol = Symbol::loglog_power(0.5);
        probe.r_min = 1e-6;
        probe.r_max = 1e-4;
        probe.per_decade = 4;
        probe.angular_samples = 4;
        const auto rep = verify_kernel_bounds(probe);
        out.require(rep.stable, "bound ratios varied by 10% or more over the last decades");
        out.require(rep.passed, "kernel bound report failed");
    }
    if (out.passed) out.detail = "Riesz within 1% over [1e-4, 10]; loglog ratios plateau";
    return out;
}

// ---------------------------------------------------------------- criterion 9
Outcome solver_correctness() {
    Outcome out;

    // exact modal decay with advection off
    {
        const Grid g = make_grid(64);
        Stepper stepper(g, Symbol::constant_one());
        State st;
        st.theta = SpectralField(g);
        std::mt19937_64 rng(5);
        std::vector<std::array<int, 2>> modes = {{1, 0}, {3, 4}, {-5, 2}, {7, -7}};
        for (auto [k1, k2] : modes) {
            const double re = uniform(rng) - 0.5, im = uniform(rng) - 0.5;
            st.theta.at(k1, k2) = {re, im};
            st.theta.at(-k1, -k2) = {re, -im};
        }
        State cur = st;
        const double dt = 0.021;
        const int steps = 48;
        for (int i = 0; i < steps; ++i) cur = stepper.step(cur, dt, false);
        for (auto [k1, k2] : modes) {
            const double lam = std::sqrt((double)k1 * k1 + (double)k2 * k2);
            const auto expect = st.theta.at(k1, k2) * std::exp(-lam * dt * steps);
            out.require(std::abs(cur.theta.at(k1, k2) - expect) <= 1e-10 * std::abs(expect),
                        "modal decay off by more than 1e-10");
        }
    }

    // third-order self-convergence
    {
        SolverConfig cfg;
        cfg.N = 64;
        cfg.symbol = Symbol::constant_one();
        cfg.T = 0.5;
        cfg.diagnostics_every = 1000000;
        auto run_fixed = [&](double dt) {
            auto c = cfg;
            c.fixed_dt = dt;
            return run(c).final_state.theta;
        };
        const auto ref = run_fixed(0.02 / 16.0);
        auto err = [&](const SpectralField& a) {
            double e = 0.0;
            for (size_t i = 0; i < a.c.size(); ++i)
                e = std::max(e, std::abs(a.c[i] - ref.c[i]));
            return e;
        };
        const double e1 = err(run_fixed(0.02));
        const double e2 = err(run_fixed(0.01));
        const double e3 = err(run_fixed(0.005));
        const double p12 = std::log2(e1 / e2);
        const double p23 = std::log2(e2 / e3);
        out.require(std::abs(p12 - 3.0) <= 0.3 && std::abs(p23 - 3.0) <= 0.3,
                    "self-convergence order outside 3.0 +/- 0.3 (got " +
                        std::to_string(p12) + ", " + std::to_string(p23) + ")");
    }

    // maximum principle, mean conservation, determinism at N = 256, T = 5
    std::string first_csv;
    for (const Symbol& sym : {Symbol::constant_one(), Symbol::loglog_power(0.5)}) {
        for (const std::string preset : {"shear+vortex", "random-lowpass"}) {
            SolverConfig cfg;
            cfg.N = 256;
            cfg.symbol = sym;
            cfg.T = 5.0;
            cfg.preset = preset;
            cfg.seed = 12;
            cfg.diagnostics_every = 10;
            const auto res = run(cfg);
            out.require(!res.blew_up, sym.name() + "/" + preset + ": blew up");
            const double sup0 = res.diagnostics.front().sup_theta;
            for (size_t i = 1; i < res.diagnostics.size(); ++i)
                out.require(res.diagnostics[i].sup_theta <=
                                res.diagnostics[i - 1].sup_theta + 1e-8 * sup0,
                            sym.name() + "/" + preset + ": sup|theta| increased");
            double m0 = 0.0, m1 = 0.0;
            for (double v : res.snapshots.front().field.v) m0 += v;
            for (double v : res.snapshots.back().field.v) m1 += v;
            m0 /= (double)res.snapshots.front().field.v.size();
            m1 /= (double)res.snapshots.back().field.v.size();
            out.require(std::abs(m1 - m0) <= 1e-14,
                        sym.name() + "/" + preset + ": mean mode drifted");
            if (sym.kind == SymbolKind::constant_one && preset == "shear+vortex")
                first_csv = diagnostics_csv(res.diagnostics);
        }
    }
    {
        SolverConfig cfg;
        cfg.N = 256;
        cfg.symbol = Symbol::constant_one();
        cfg.T = 5.0;
        cfg.preset = "shear+vortex";
        cfg.seed = 12;
        cfg.diagnostics_every = 10;
        const auto res = run(cfg);
        out.require(diagnostics_csv(res.diagnostics) == first_csv,
                    "re-run diagnostics not bit-identical");
    }

    if (out.passed)
        out.detail = "decay 1e-10, order 3.0 +/- 0.3, max principle to 1e-8 at N=256 T=5, "
                     "mean to 1e-14, bit-identical re-run";
    return out;
}

// --------------------------------------------------------------- criterion 10
Outcome end_to_end_rehearsal() {
    Outcome out;
    SolverConfig cfg;
    cfg.N = 128;
    cfg.symbol = Symbol::constant_one();
    cfg.T = 5.0;
    cfg.preset = "shear+vortex";
    // amplitude sized so the fit genuinely searches (B_fit >> 1, criterion
    // fails at B_fit/2) while the initial ratio stays below 1
    cfg.amplitude = 2.5e-3;
    cfg.diagnostics_every = 10;
    cfg.snapshot_every = 10;
    cfg.monitor.enabled = true;
    cfg.monitor.A = 1.0;

    const auto res = run(cfg);
    out.require(!res.blew_up, "monitored run blew up");
    out.require(res.fitted_B >= 1.0, "fitted B below 1");
    out.require(!res.monitor_event.has_value(), "breakthrough fired with the fitted B");
    for (const auto& row : res.diagnostics)
        out.require(row.moc_ratio >= 0.0 && row.moc_ratio < 1.0,
                    "ratio reached 1 during the run");

    // the fit is minimal in the sense of the data criterion
    auto fam = auto_family(cfg.symbol, cfg.monitor.A);
    {
        Fft fft(make_grid(cfg.N));
        const auto theta0 = initial_data(cfg, fft);
        const auto [sup, grad] = sup_norms(theta0, fft);
        const double a = 2.0 * sup / grad;
        out.require(ModulusInstance::make(fam, res.fitted_B).omega(a) >= 2.0 * sup,
                    "fit criterion does not hold at the returned B");
        out.require(
            ModulusInstance::make_unchecked(fam, res.fitted_B / 2.0).omega(a) < 2.0 * sup,
            "fit criterion already holds at B/2");
    }

    auto weak = ModulusInstance::make_unchecked(fam, res.fitted_B / 100.0);
    const auto event = detect_breakthrough(res, weak, default_lags(cfg.N));
    out.require(event.has_value(), "no breakthrough with B reduced 100x");
    if (event) {
        out.require(event->ratio >= 1.0, "event ratio below 1");
        out.require(event->t >= 0.0, "event time negative");
    }
    if (out.passed) {
        std::ostringstream os;
        os << "fitted B = " << res.fitted_B
           << ", ratio stayed < 1 to T=5; B/100 event at t=" << (event ? event->t : -1.0);
        out.detail = os.str();
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc)
            only = std::atoi(argv[i + 1]);

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "modulus closed forms", modulus_closed_forms},
        {2, "delta(B) root solve", delta_root_solve},
        {3, "modulus axioms", modulus_axioms},
        {4, "negativity certificate", negativity_certificate},
        {5, "failure detection (CLI)", failure_detection_cli},
        {6, "dissipation oracle", dissipation_oracle},
        {7, "velocity-modulus oracle", velocity_modulus_oracle},
        {8, "kernel bounds", kernel_criteria},
        {9, "solver correctness", solver_correctness},
        {10, "end-to-end rehearsal", end_to_end_rehearsal},
    };

    bool all_ok = true;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %2d [%s]: %s%s%s\n", c.id, c.name,
                    o.passed ? "PASS" : "FAIL", o.detail.empty() ? "" : " -- ",
                    o.detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && o.passed;
    }
    return all_ok ? 0 : 1;
}
