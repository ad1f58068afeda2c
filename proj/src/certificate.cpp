#include "ssqg/certificate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"
#include "ssqg/quadrature.hpp"

namespace ssqg {
namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double max_kink(const ConcaveModulus& mod) {
    double k = 0.0;
    for (double x : mod.kinks()) k = std::max(k, x);
    return k;
}
} // namespace

std::pair<double, double> choose_constants(double A, const Symbol& s) {
    if (!(A >= 1.0)) throw PreconditionError("choose_constants: A must satisfy A >= 1");
    const double cap = g_of_delta(s, 1.0 / find_r0(s));
    const double kappa = std::min(1.0 / (64.0 * kPi * A), cap / 2.0);
    const double gamma = std::min(kappa / 2.0, 1.0 / (8.0 * kPi * A));
    return {kappa, gamma};
}

OmegaBreakdown omega_velocity_bracket(const ConcaveModulus& mod, const Symbol& sym,
                                      double A, double xi, const EngineOptions& opts) {
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw DomainError("omega_velocity_bracket: xi must be positive");

    const double lxi = std::log(xi);
    QuadratureOptions qo;
    qo.rel_tol = opts.rel_tol;

    // near field: eta = xi e^{-s}, s in [0, S]; remainder below eta0 bracketed
    // by concavity (chord from below, slope at zero plus the symbol integral
    // bound from above)
    const double S = 45.0 * std::log(2.0);
    const double eta0 = xi * std::exp(-S);
    QuadratureOptions qnear = qo;
    for (double k : mod.kinks())
        if (k > eta0 && k < xi) qnear.breakpoints.push_back(lxi - std::log(k));
    const auto near_q = integrate(
        [&](double s) { return mod.omega(xi * std::exp(-s)) * sym.eval_log_radius(s - lxi); },
        0.0, S, qnear);
    const double m_eta0 = sym.eval_log_radius(S - lxi);
    const double near_tail_lo = mod.omega(eta0) * m_eta0;
    const double near_tail_hi = 2.0 * mod.slope_at_zero() * eta0 * m_eta0;
    Bracket near{near_q.lower() + near_tail_lo, near_q.upper() + near_tail_hi};

    // far field: eta = xi e^{y} up to H = M max(xi, largest kink); the tail is
    // the modulus's own closed form with m bracketed by monotonicity
    const double H = opts.tail_M * std::max(xi, max_kink(mod));
    const double Y = std::log(H / xi);
    QuadratureOptions qfar = qo;
    for (double k : mod.kinks())
        if (k > xi && k < H) qfar.breakpoints.push_back(std::log(k / xi));
    const auto far_q = integrate(
        [&](double y) {
            return mod.omega(xi * std::exp(y)) * sym.eval_log_radius(-y - lxi) *
                   std::exp(-y);
        },
        0.0, Y, qfar);
    const auto tail = mod.tail_integral_bracket(H);
    const double m_lo = sym.eval(0.0);
    const double m_hi = sym.eval_log_radius(-std::log(H));
    Bracket far{far_q.lower() + xi * tail.first * m_lo,
                far_q.upper() + xi * tail.second * m_hi};

    OmegaBreakdown out;
    out.near = near;
    out.far = far;
    out.total = {A * (near.lo + far.lo), A * (near.hi + far.hi)};
    return out;
}

Bracket dissipation_bracket(const ConcaveModulus& mod, double xi,
                            const EngineOptions& opts) {
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw DomainError("dissipation_bracket: xi must be positive");

    const double om_xi = mod.omega(xi);
    const double b = 0.5 * xi;
    const double eps = std::numeric_limits<double>::epsilon();
    QuadratureOptions qo;
    // The pieces below cancel down to |D| ~ |pieces|/20, so they are resolved
    // well beyond the reported tolerance. The absolute floors sit above the
    // integrands' difference-cancellation noise (eps omega'/eta resp.
    // eps omega/eta scales); they are tolerance-independent so refinement
    // stalls deterministically where the noise dominates.
    qo.rel_tol = opts.rel_tol * 0.02;

    // near integral, integrated by parts once:
    //   I1 = (2/xi)(2 omega(xi) - omega(2 xi))
    //        + Int_0^{xi/2} 2 (omega'(xi+2eta) - omega'(xi-2eta))/eta deta
    // The transformed integrand tends to 8 omega''(xi) at eta = 0, so the
    // second-difference cancellation of the raw form never appears.
    const double boundary = (2.0 / xi) * (2.0 * om_xi - mod.omega(2.0 * xi));
    QuadratureOptions q1 = qo;
    q1.abs_tol = 100.0 * eps * mod.slope_at_zero();
    for (double k : mod.kinks()) {
        const double up = 0.5 * (k - xi); // xi + 2 eta = k
        const double dn = 0.5 * (xi - k); // xi - 2 eta = k
        if (up > 0.0 && up < b) q1.breakpoints.push_back(up);
        if (dn > 0.0 && dn < b) q1.breakpoints.push_back(dn);
    }
    const auto i1 = integrate(
        [&](double eta) {
            return 2.0 *
                   (mod.omega_prime(xi + 2.0 * eta) - mod.omega_prime(xi - 2.0 * eta)) /
                   eta;
        },
        0.0, b, q1);

    // far integral in y = ln(2 eta / xi)
    const double H = opts.tail_M * std::max(xi, max_kink(mod));
    QuadratureOptions q2 = qo;
    q2.abs_tol = 100.0 * eps * mod.omega(2.0 * H + xi);
    for (double k : mod.kinks()) {
        const double e1 = 0.5 * (k - xi); // 2 eta + xi = k
        const double e2 = 0.5 * (k + xi); // 2 eta - xi = k
        if (e1 > b && e1 < H) q2.breakpoints.push_back(std::log(e1 / b));
        if (e2 > b && e2 < H) q2.breakpoints.push_back(std::log(e2 / b));
    }
    const auto i2 = integrate(
        [&](double y) {
            const double eta = b * std::exp(y);
            return (mod.omega(2.0 * eta + xi) - mod.omega(2.0 * eta - xi) - 2.0 * om_xi) /
                   eta;
        },
        0.0, std::log(H / b), q2);

    // analytic tail beyond H: the positive difference term is bounded by
    // 2 xi omega'(2H - xi) and vanishes from below
    const double tail_lo = -2.0 * om_xi / H;
    const double tail_hi = tail_lo + 2.0 * xi * mod.omega_prime(2.0 * H - xi) / H;

    const double inv_pi = 1.0 / kPi;
    return {inv_pi * (boundary + i1.lower() + i2.lower() + tail_lo),
            inv_pi * (boundary + i1.upper() + i2.upper() + tail_hi)};
}

double Omega_B(const ModulusInstance& inst, double xi, const EngineOptions& opts) {
    return omega_velocity_bracket(inst, inst.family().symbol, inst.family().A, xi, opts)
        .total.hi;
}

double D_B(const ModulusInstance& inst, double xi, const EngineOptions& opts) {
    return dissipation_bracket(inst, xi, opts).hi;
}

namespace {

std::vector<BoundRow> intermediate_bounds_impl(const ModulusInstance& inst, double xi,
                                               const OmegaBreakdown& ob, const Bracket& d) {
    std::vector<BoundRow> rows;
    const auto& fam = inst.family();
    const double B = inst.B();
    const double delta = inst.delta();
    const double m1 = inst.m_at_inv_delta();
    const double kappa = fam.kappa, gamma = fam.gamma, A = fam.A;
    auto add = [&](const std::string& id, double lhs, double rhs) {
        rows.push_back({id, B, xi, lhs, rhs, lhs <= rhs});
    };

    if (xi <= delta) {
        const double m = fam.symbol.eval_log_radius(-std::log(xi));
        const double scale = (B * xi) * B * m * (4.0 + std::log(delta / xi));
        add("near-dissipation-bound", d.hi, -scale / (32.0 * kPi * kappa));
        const double combined = ob.total.hi * inst.omega_prime(xi) + d.hi;
        add("near-combined-bound", combined, (A - 1.0 / (32.0 * kPi * kappa)) * scale);
    } else {
        const double om = inst.omega(xi);
        add("far-dissipation-bound", d.hi, -om / (2.0 * kPi * xi));
        add("drift-near-part-bound", ob.near.hi, 2.0 * kappa + om * m1 * std::log(xi / delta));
        add("drift-far-part-bound", ob.far.hi, om * m1 + gamma);
        add("drift-product-bound", ob.total.hi * inst.omega_prime(xi), 2.0 * A * gamma * om / xi);
    }
    return rows;
}

// Int_delta^inf omega/eta^2 <= 2B (quadrature to M delta plus analytic tail)
BoundRow eq15_row(const ModulusInstance& inst, const EngineOptions& opts) {
    const double delta = inst.delta();
    const double H = opts.tail_M * delta;
    QuadratureOptions qo;
    qo.rel_tol = opts.rel_tol;
    const auto q = integrate(
        [&](double y) {
            const double eta = delta * std::exp(y);
            return inst.omega(eta) / eta;
        },
        0.0, std::log(H / delta), qo);
    const double lhs = q.upper() + inst.tail_integral_bracket(H).second;
    return {"tail-integral-bound", inst.B(), delta, lhs, 2.0 * inst.B(), lhs <= 2.0 * inst.B()};
}

} // namespace

std::vector<BoundRow> check_intermediate_bounds(const ModulusInstance& inst, double xi,
                                                const EngineOptions& opts) {
    const auto ob =
        omega_velocity_bracket(inst, inst.family().symbol, inst.family().A, xi, opts);
    const auto d = dissipation_bracket(inst, xi, opts);
    auto rows = intermediate_bounds_impl(inst, xi, ob, d);
    rows.push_back(eq15_row(inst, opts));
    return rows;
}

CertificateReport verify_negativity(const ModulusFamily& fam, const CertificateConfig& cfg) {
    CertificateReport rep;
    rep.config = cfg;
    rep.symbol_name = fam.symbol.name();
    rep.A = fam.A;
    rep.kappa = fam.kappa;
    rep.gamma = fam.gamma;
    for (const auto& v : fam.smallness_violations())
        rep.notes.push_back("smallness violated: " + v);

    if (cfg.B_list.empty() || !(cfg.xi_low < 1.0) || !(cfg.xi_high > 1.0) ||
        cfg.points_per_decade < 1)
        throw PreconditionError("verify_negativity: malformed grid config");

    EngineOptions eng;
    eng.rel_tol = cfg.quad_tol;
    eng.tail_M = cfg.tail_M;

    std::vector<ModulusInstance> instances;
    instances.reserve(cfg.B_list.size());
    for (double B : cfg.B_list) instances.push_back(ModulusInstance::make(fam, B));

    struct Task {
        const ModulusInstance* inst;
        double xi_over_delta;
    };
    const int decades = (int)std::round(std::log10(cfg.xi_high / cfg.xi_low));
    const int n = decades * cfg.points_per_decade;
    std::vector<Task> tasks;
    for (const auto& inst : instances) {
        for (int i = 0; i <= n; ++i) {
            double f =
                cfg.xi_low * std::exp(std::log(cfg.xi_high / cfg.xi_low) * i / (double)n);
            // the exact split point relies on one-sided derivatives; evaluate
            // just off it instead
            if (std::abs(f - 1.0) < 1e-6) f = f < 1.0 ? 1.0 - 1e-6 : 1.0 + 1e-6;
            tasks.push_back({&inst, f});
        }
    }

    std::vector<CertificatePoint> pts(tasks.size());
    std::vector<std::vector<BoundRow>> bound_rows(tasks.size());
    std::atomic<size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex err_mutex;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const auto& t = tasks[i];
                const auto& inst = *t.inst;
                CertificatePoint p;
                p.B = inst.B();
                p.xi_over_delta = t.xi_over_delta;
                p.xi = t.xi_over_delta * inst.delta();
                p.omega_prime = inst.omega_prime(p.xi);
                const auto ob = omega_velocity_bracket(inst, fam.symbol, fam.A, p.xi, eng);
                const auto d = dissipation_bracket(inst, p.xi, eng);
                p.Omega = ob.total;
                p.D = d;
                p.combined = p.Omega.hi * p.omega_prime + p.D.hi;
                p.margin = -p.combined / std::abs(p.D.hi);
                p.passed = p.combined < -cfg.margin * std::abs(p.D.hi);
                pts[i] = p;
                if (cfg.intermediate_bounds)
                    bound_rows[i] = intermediate_bounds_impl(inst, p.xi, ob, d);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error.empty()) first_error = e.what();
                failed.store(true);
                return;
            }
        }
    };

    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : (int)std::max(1u, std::thread::hardware_concurrency());
    nthreads = std::min<int>(nthreads, 16);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw NumericalError("verify_negativity: " + first_error);

    rep.points = std::move(pts);
    rep.passed = true;
    rep.worst_margin = 1e300;
    for (const auto& p : rep.points) {
        if (!p.passed) rep.passed = false;
        if (p.margin < rep.worst_margin) {
            rep.worst_margin = p.margin;
            rep.worst_B = p.B;
            rep.worst_xi_over_delta = p.xi_over_delta;
        }
    }

    if (cfg.intermediate_bounds) {
        for (auto& rows : bound_rows)
            for (auto& r : rows) {
                if (!r.passed) rep.bounds_passed = false;
                rep.bounds.push_back(r);
            }
        for (const auto& inst : instances) {
            auto r15 = eq15_row(inst, eng);
            if (!r15.passed) rep.bounds_passed = false;
            rep.bounds.push_back(r15);
        }
        const double small_k = 32.0 * kPi * fam.kappa * fam.A;
        const double small_g = 4.0 * kPi * fam.A * fam.gamma;
        rep.bounds.push_back({"smallness-kappa", 0.0, 0.0, small_k, 1.0, small_k < 1.0});
        rep.bounds.push_back({"smallness-gamma", 0.0, 0.0, small_g, 1.0, small_g < 1.0});
        if (!(small_k < 1.0) || !(small_g < 1.0)) rep.bounds_passed = false;
    }

    // Between-sample continuity estimate. The drift term's log-slope is
    // bounded rigorously by Omega omega' + Omega xi |omega''| (xi Omega' <=
    // Omega). For the dissipation term the between-sample maximum is taken at
    // the endpoints up to a capped allowance: D's only sharp feature is the
    // corner spike at delta, which points downward (toward more negative
    // values), so endpoint values dominate there.
    if (cfg.continuity_guard && rep.points.size() >= 2) {
        rep.guard_margin = 1e300;
        const size_t per_b = (size_t)n + 1;
        const double dln = std::log(10.0) / cfg.points_per_decade;
        for (size_t base = 0; base + per_b <= rep.points.size(); base += per_b) {
            const ModulusInstance& inst = instances[base / per_b];
            for (size_t i = 0; i + 1 < per_b; ++i) {
                const auto& a = rep.points[base + i];
                const auto& b = rep.points[base + i + 1];
                auto drift_slope = [&](const CertificatePoint& p) {
                    const double w2 = std::abs(inst.omega_second_any(p.xi));
                    return p.Omega.hi * p.omega_prime + p.Omega.hi * p.xi * w2;
                };
                const double sd = std::max(drift_slope(a), drift_slope(b));
                const double denom = std::min(std::abs(a.D.hi), std::abs(b.D.hi));
                const double dD =
                    std::min(0.5 * std::abs(b.D.hi - a.D.hi), 0.1 * denom);
                const double excursion = sd * 0.5 * dln + dD;
                const double worst = std::max(a.combined, b.combined) + excursion;
                const double margin = -worst / denom;
                if (margin < rep.guard_margin) rep.guard_margin = margin;
            }
        }
        rep.guard_passed = rep.guard_margin > 0.0;
    }

    rep.notes.push_back("grid points within 1e-6 of delta(B) evaluated at delta(1 +/- 1e-6)");
    return rep;
}

std::string certificate_csv(const CertificateReport& rep) {
    CsvWriter csv({"B", "xi_over_delta", "omega_prime", "Omega", "D", "combined", "margin"});
    for (const auto& p : rep.points)
        csv.row({format_double(p.B), format_double(p.xi_over_delta),
                 format_double(p.omega_prime), format_double(p.Omega.hi),
                 format_double(p.D.hi), format_double(p.combined),
                 format_double(p.margin)});
    return csv.str();
}

} // namespace ssqg
