#include "ssqg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"

namespace ssqg {
namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double uniform01(std::uint64_t raw) { return (double)(raw >> 11) * 0x1.0p-53; }

// xorshift-free deterministic generator: splitmix64, stable across platforms
struct SplitMix64 {
    std::uint64_t s;
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};
} // namespace

Stepper::Stepper(Grid g, const Symbol& s)
    : grid_(g), symbol_(s), fft_(g), vel_(g, s), lambda_((size_t)g.N * g.N) {
    const int N = g.N;
    for (int j = 0; j < N; ++j) {
        const int k2 = SpectralField::wavenumber(j, N);
        for (int i = 0; i < N; ++i) {
            const int k1 = SpectralField::wavenumber(i, N);
            lambda_[(size_t)j * N + i] = std::sqrt((double)k1 * k1 + (double)k2 * k2);
        }
    }
}

SpectralField Stepper::decay(const SpectralField& f, double s) const {
    SpectralField out(grid_);
    for (size_t i = 0; i < f.c.size(); ++i) out.c[i] = f.c[i] * std::exp(-lambda_[i] * s);
    return out;
}

Stepper::NonlinearResult Stepper::nonlinear(const SpectralField& theta) const {
    auto [u1h, u2h] = vel_.apply(theta);
    auto [gxh, gyh] = spectral_gradient(theta);
    const RealField u1 = fft_.inverse(u1h);
    const RealField u2 = fft_.inverse(u2h);
    const RealField gx = fft_.inverse(gxh);
    const RealField gy = fft_.inverse(gyh);
    double sup_u = 0.0;
    RealField prod(grid_);
    for (size_t i = 0; i < prod.v.size(); ++i) {
        prod.v[i] = u1.v[i] * gx.v[i] + u2.v[i] * gy.v[i];
        sup_u = std::max(sup_u, std::hypot(u1.v[i], u2.v[i]));
    }
    SpectralField nhat = dealias(fft_.forward(prod));
    for (auto& c : nhat.c) c = -c;
    nhat.c[0] = 0.0; // divergence-free advection transports the mean exactly
    return {std::move(nhat), sup_u};
}

double Stepper::sup_velocity(const State& st) const {
    auto [u1h, u2h] = vel_.apply(st.theta);
    const RealField u1 = fft_.inverse(u1h);
    const RealField u2 = fft_.inverse(u2h);
    double sup_u = 0.0;
    for (size_t i = 0; i < u1.v.size(); ++i)
        sup_u = std::max(sup_u, std::hypot(u1.v[i], u2.v[i]));
    return sup_u;
}

State Stepper::step(const State& st, double dt, bool advection) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step: dt must be positive");
    const SpectralField& th = st.theta;
    State out;
    out.time = st.time + dt;

    if (!advection) {
        out.theta = decay(th, dt);
        return out;
    }

    // Kutta's third-order scheme in integrating-factor variables; every
    // exponential factor decays.
    auto check_finite = [&](const SpectralField& f) {
        for (const auto& z : f.c)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw BlowUpError(st.time, "step: non-finite coefficient in a stage");
    };

    const auto ra = nonlinear(th);
    const auto& a = ra.nhat;

    SpectralField stage_b(grid_);
    for (size_t i = 0; i < th.c.size(); ++i) stage_b.c[i] = th.c[i] + 0.5 * dt * a.c[i];
    stage_b = decay(stage_b, 0.5 * dt);
    check_finite(stage_b);
    const auto rb = nonlinear(stage_b);
    const auto& b = rb.nhat;

    SpectralField stage_c(grid_);
    for (size_t i = 0; i < th.c.size(); ++i) {
        const double e_full = std::exp(-lambda_[i] * dt);
        const double e_half = std::exp(-lambda_[i] * 0.5 * dt);
        stage_c.c[i] = e_full * (th.c[i] - dt * a.c[i]) + 2.0 * dt * e_half * b.c[i];
    }
    check_finite(stage_c);
    const auto rc = nonlinear(stage_c);
    const auto& c = rc.nhat;

    out.theta = SpectralField(grid_);
    for (size_t i = 0; i < th.c.size(); ++i) {
        const double e_full = std::exp(-lambda_[i] * dt);
        const double e_half = std::exp(-lambda_[i] * 0.5 * dt);
        out.theta.c[i] =
            e_full * th.c[i] +
            (dt / 6.0) * (e_full * a.c[i] + 4.0 * e_half * b.c[i] + c.c[i]);
    }

    for (const auto& z : out.theta.c)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw BlowUpError(st.time, "step: non-finite coefficient after stage update");
    return out;
}

RealField initial_data(const SolverConfig& cfg, const Fft& fft) {
    const Grid g = fft.grid();
    const int N = g.N;
    RealField f(g);
    if (cfg.preset == "shear+vortex") {
        for (int j = 0; j < N; ++j) {
            const double y = 2.0 * kPi * j / N;
            for (int i = 0; i < N; ++i) {
                const double x = 2.0 * kPi * i / N;
                f.at(i, j) = cfg.amplitude * (std::sin(x) * std::sin(y) + std::cos(y));
            }
        }
        return f;
    }
    if (cfg.preset == "random-lowpass") {
        SpectralField F(g);
        SplitMix64 rng{cfg.seed};
        for (int k2 = -4; k2 <= 4; ++k2)
            for (int k1 = -4; k1 <= 4; ++k1) {
                if (k1 * k1 + k2 * k2 > 16 || (k1 == 0 && k2 == 0)) continue;
                // fill only one representative per conjugate pair
                if (k2 < 0 || (k2 == 0 && k1 < 0)) continue;
                const double re = uniform01(rng.next()) - 0.5;
                const double im = uniform01(rng.next()) - 0.5;
                F.at(k1, k2) = {re, im};
                F.at(-k1, -k2) = {re, -im};
            }
        RealField raw = fft.inverse(F);
        const double sup = max_abs(raw);
        if (sup > 0.0)
            for (auto& v : raw.v) v *= cfg.amplitude / sup;
        return raw;
    }
    if (cfg.preset == "modes") {
        SpectralField F(g);
        for (const auto& mi : cfg.modes) {
            if (std::abs(mi.k1) >= N / 2 || std::abs(mi.k2) >= N / 2)
                throw DomainError("initial_data: mode outside the grid");
            F.at(mi.k1, mi.k2) = {mi.re, mi.im};
            // Hermitian partner so the field is real
            F.at(-mi.k1, -mi.k2) = {mi.re, -mi.im};
        }
        RealField raw = fft.inverse(F);
        if (cfg.amplitude != 1.0)
            for (auto& v : raw.v) v *= cfg.amplitude;
        return raw;
    }
    throw DomainError("initial_data: unknown preset '" + cfg.preset + "'");
}

std::vector<std::array<int, 2>> default_lags(int N) {
    // ~40 axis-aligned and diagonal lags, log-spaced from one cell to pi
    std::vector<std::array<int, 2>> lags;
    std::set<std::pair<int, int>> seen;
    const int half = N / 2;
    const double h = 2.0 * kPi / N;
    const int per_family = 14;
    for (int i = 0; i < per_family; ++i) {
        const double dist = h * std::pow((kPi / h), i / (double)(per_family - 1));
        const int a = std::clamp((int)std::lround(dist / h), 1, half);
        const int d = std::clamp((int)std::lround(dist / (h * std::sqrt(2.0))), 1, half);
        for (auto lag : {std::pair<int, int>{a, 0}, {0, a}, {d, d}})
            if (seen.insert(lag).second) lags.push_back({lag.first, lag.second});
    }
    return lags;
}

MocRatioResult moc_ratio(const RealField& theta, const ModulusInstance& inst,
                         const std::vector<std::array<int, 2>>& lags) {
    const int N = theta.grid.N;
    const double h = 2.0 * kPi / N;
    MocRatioResult best;
    for (const auto& lag : lags) {
        const int a = lag[0], b = lag[1];
        if (a == 0 && b == 0) throw DomainError("moc_ratio: zero lag");
        // minimum-image distance of the lag vector
        const int am = std::abs(a) % N, bm = std::abs(b) % N;
        const double dx = h * std::min(am, N - am);
        const double dy = h * std::min(bm, N - bm);
        const double dist = std::hypot(dx, dy);
        if (dist == 0.0) throw DomainError("moc_ratio: lag aliases to zero");
        const double om = inst.omega(dist);
        for (int j = 0; j < N; ++j) {
            const int jj = (j + b % N + N) % N;
            const double* row = &theta.v[(size_t)j * N];
            const double* row_shift = &theta.v[(size_t)jj * N];
            for (int i = 0; i < N; ++i) {
                const int ii = (i + a % N + N) % N;
                const double ratio = std::abs(row_shift[ii] - row[i]) / om;
                if (ratio > best.ratio) {
                    best.ratio = ratio;
                    best.x1 = i;
                    best.x2 = j;
                    best.h1 = a;
                    best.h2 = b;
                }
            }
        }
    }
    return best;
}

RunResult run(const SolverConfig& cfg) {
    if (!(cfg.T > 0.0)) throw DomainError("run: final time must be positive");
    const Grid g = make_grid(cfg.N);
    Stepper stepper(g, cfg.symbol);
    RunResult out;

    RealField theta0 = initial_data(cfg, stepper.fft());
    State st;
    st.theta = dealias(stepper.fft().forward(theta0));
    theta0 = stepper.fft().inverse(st.theta);

    // resolve the monitor
    std::optional<ModulusInstance> monitor;
    std::vector<std::array<int, 2>> lags =
        cfg.monitor.lags.empty() ? default_lags(cfg.N) : cfg.monitor.lags;
    if (cfg.monitor.enabled) {
        double kappa = cfg.monitor.kappa, gamma = cfg.monitor.gamma;
        if (!(kappa > 0.0) || !(gamma > 0.0)) {
            const double cap = g_of_delta(cfg.symbol, 1.0 / find_r0(cfg.symbol));
            kappa = std::min(1.0 / (64.0 * kPi * cfg.monitor.A), cap / 2.0);
            gamma = std::min(kappa / 2.0, 1.0 / (8.0 * kPi * cfg.monitor.A));
        }
        auto fam = ModulusFamily::make(cfg.symbol, cfg.monitor.A, kappa, gamma);
        double B = cfg.monitor.B;
        if (!(B > 0.0)) {
            const auto [sup, grad] = sup_norms(theta0, stepper.fft());
            B = find_B_for_data(fam, sup, grad);
        }
        out.fitted_B = B;
        monitor = ModulusInstance::make_unchecked(fam, B);
        const auto r0 = moc_ratio(theta0, *monitor, lags);
        if (r0.ratio >= 1.0)
            throw PreconditionError(
                "run: initial data already violates the monitor modulus (ratio = " +
                format_double(r0.ratio) + "); B was not fitted to the data");
    }

    const double hgrid = g.spacing();
    int step_index = 0;
    double dt = 0.0;

    auto diagnose = [&](const State& s, double used_dt) {
        const RealField f = stepper.fft().inverse(s.theta);
        const auto [sup, grad] = sup_norms(f, stepper.fft());
        double l2sq = 0.0;
        for (const auto& z : s.theta.c) l2sq += std::norm(z);
        DiagnosticsRow row;
        row.t = s.time;
        row.sup_theta = sup;
        row.sup_grad_theta = grad;
        row.l2 = 2.0 * kPi * std::sqrt(l2sq);
        row.dt = used_dt;
        if (monitor) {
            const auto r = moc_ratio(f, *monitor, lags);
            row.moc_ratio = r.ratio;
            if (r.ratio >= 1.0 && !out.monitor_event)
                out.monitor_event =
                    BreakthroughEvent{s.time, r.ratio, r.x1, r.x2, r.h1, r.h2};
        }
        out.diagnostics.push_back(row);
        if (grad > 1e12)
            throw BlowUpError(s.time, "run: sup |grad theta| exceeded 1e12");
        return f;
    };

    {
        const RealField f0 = diagnose(st, 0.0);
        out.snapshots.push_back({0.0, f0});
    }

    try {
        while (st.time < cfg.T - 1e-14) {
            if (cfg.fixed_dt) {
                dt = *cfg.fixed_dt;
            } else {
                const double sup_u = cfg.advection ? stepper.sup_velocity(st) : 0.0;
                dt = std::min(cfg.cfl * hgrid / std::max(1.0, sup_u), cfg.dt_cap);
            }
            dt = std::min(dt, cfg.T - st.time);
            st = stepper.step(st, dt, cfg.advection);
            ++step_index;
            const bool last = st.time >= cfg.T - 1e-14;
            if (cfg.diagnostics_every > 0 &&
                (step_index % cfg.diagnostics_every == 0 || last)) {
                const RealField f = diagnose(st, dt);
                const bool want_snap =
                    cfg.snapshot_every > 0 && step_index % cfg.snapshot_every == 0;
                if (want_snap || last) out.snapshots.push_back({st.time, f});
            }
        }
    } catch (const BlowUpError& e) {
        out.blew_up = true;
        out.blowup_time = e.time;
        out.note = e.what();
    }
    out.final_state = std::move(st);
    return out;
}

std::optional<BreakthroughEvent> detect_breakthrough(
    const RunResult& result, const ModulusInstance& inst,
    const std::vector<std::array<int, 2>>& lags) {
    for (const auto& snap : result.snapshots) {
        const auto r = moc_ratio(snap.field, inst, lags);
        if (r.ratio >= 1.0)
            return BreakthroughEvent{snap.t, r.ratio, r.x1, r.x2, r.h1, r.h2};
    }
    return std::nullopt;
}

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
    CsvWriter csv({"t", "sup_theta", "sup_grad_theta", "l2", "moc_ratio", "dt"});
    for (const auto& r : rows)
        csv.row({format_double(r.t), format_double(r.sup_theta),
                 format_double(r.sup_grad_theta), format_double(r.l2),
                 r.moc_ratio < 0.0 ? "" : format_double(r.moc_ratio),
                 format_double(r.dt)});
    return csv.str();
}

} // namespace ssqg
