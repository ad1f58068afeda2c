#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssqg/modulus.hpp"
#include "ssqg/spectral.hpp"
#include "ssqg/symbol.hpp"

namespace ssqg {

struct State {
    double time = 0.0;
    SpectralField theta;
};

struct ModeInit {
    int k1 = 0;
    int k2 = 0;
    double re = 0.0;
    double im = 0.0;
};

struct MonitorConfig {
    bool enabled = false;
    double A = 1.0;
    double kappa = 0.0; // <= 0: choose_constants
    double gamma = 0.0;
    double B = 0.0;                         // <= 0: fit via find_B_for_data
    std::vector<std::array<int, 2>> lags;   // empty: default log-spaced set
};

struct SolverConfig {
    int N = 128;
    Symbol symbol;
    double T = 1.0;
    double cfl = 0.5;
    double dt_cap = 0.1;
    int diagnostics_every = 10;
    int snapshot_every = 0; // 0: only initial and final
    std::string preset = "shear+vortex"; // or "random-lowpass" or "modes"
    double amplitude = 1.0;
    std::vector<ModeInit> modes;
    std::uint64_t seed = 1;
    std::optional<double> fixed_dt; // bypasses the CFL rule (testing)
    bool advection = true;          // disabled: pure dissipation, exact decay
    MonitorConfig monitor;
};

struct DiagnosticsRow {
    double t = 0.0;
    double sup_theta = 0.0;
    double sup_grad_theta = 0.0;
    double l2 = 0.0;
    double moc_ratio = -1.0; // < 0 when the monitor is off
    double dt = 0.0;
};

struct BreakthroughEvent {
    double t = 0.0;
    double ratio = 0.0;
    int x1 = 0, x2 = 0;   // grid indices of the arg-max base point
    int h1 = 0, h2 = 0;   // lag in grid cells
};

struct RunResult {
    State final_state;
    std::vector<DiagnosticsRow> diagnostics;
    std::vector<Snapshot> snapshots; // at snapshot cadence, always t=0 and T
    bool blew_up = false;
    double blowup_time = 0.0;
    std::string note;
    std::optional<BreakthroughEvent> monitor_event; // configured monitor, t >= 0
    double fitted_B = 0.0;                          // monitor's B after resolution
};

// Cached operators for one (grid, symbol) pair; owns the FFT plans.
class Stepper {
  public:
    Stepper(Grid g, const Symbol& s);

    // One integrating-factor RK3 step: exact dissipation semigroup per stage,
    // pseudo-spectral dealiased advection, mean mode conserved exactly.
    State step(const State& st, double dt, bool advection = true) const;

    // advective velocity sup norm of the current state (CFL input)
    double sup_velocity(const State& st) const;

    const Fft& fft() const { return fft_; }

  private:
    struct NonlinearResult {
        SpectralField nhat;
        double sup_u;
    };
    NonlinearResult nonlinear(const SpectralField& theta) const;
    SpectralField decay(const SpectralField& f, double s) const;
    friend RunResult run(const SolverConfig& cfg);

    Grid grid_;
    Symbol symbol_;
    Fft fft_;
    VelocityMultiplier vel_;
    std::vector<double> lambda_; // |zeta| per mode
};

RealField initial_data(const SolverConfig& cfg, const Fft& fft);

std::vector<std::array<int, 2>> default_lags(int N);

struct MocRatioResult {
    double ratio = 0.0;
    int x1 = 0, x2 = 0;
    int h1 = 0, h2 = 0;
};

// max over lags h and grid points x of |theta(x+h) - theta(x)| / omega(|h|),
// with |h| the minimum-image torus distance.
MocRatioResult moc_ratio(const RealField& theta, const ModulusInstance& inst,
                         const std::vector<std::array<int, 2>>& lags);

RunResult run(const SolverConfig& cfg);

// Post-hoc scan of stored snapshots against an arbitrary instance; the first
// time (t = 0 included) with ratio >= 1 is the event.
std::optional<BreakthroughEvent> detect_breakthrough(
    const RunResult& result, const ModulusInstance& inst,
    const std::vector<std::array<int, 2>>& lags);

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows);

} // namespace ssqg
