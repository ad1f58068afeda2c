#pragma once

#include <string>
#include <vector>

#include "ssqg/symbol.hpp"

namespace ssqg {

// Probe of the plane kernel K of d_j Lambda^{-1} m(Lambda).
struct KernelProbe {
    Symbol symbol;
    int component = 1; // j in {1,2}
    double r_min = 1e-6;
    double r_max = 1e2;
    int per_decade = 4;
    int angular_samples = 16;
    double truncation_z = 1e3; // rho cutoff at truncation_z / r, i.e. >= 1e3/r
    double quad_tol = 1e-7;
};

struct KernelValue {
    double value = 0.0;
    double error = 0.0; // quadrature + analytic truncation tail
};

// K(x) by the cutoff split at R = cutoff_scale/|x|: the ball part directly,
// the tail after two applications of the radial Bessel operator
// L[u] = u'' + u'/rho - u/rho^2 (the 4-fold integration by parts).
KernelValue compute_kernel(const KernelProbe& probe, double x1, double x2,
                           double cutoff_scale = 1.0);

struct KernelBoundRow {
    double r = 0.0;
    double angle = 0.0;
    double K = 0.0;
    double ratio_K = 0.0;     // |K| r^2 / m(1/r)
    double ratio_gradK = 0.0; // |grad K| r^3 / m(1/r)
    double error_estimate = 0.0;
    bool crossover = false; // large-radius regime: flagged, not failed
};

struct KernelBoundReport {
    std::vector<KernelBoundRow> rows;
    double C_K = 0.0;
    double C_gradK = 0.0;
    bool stable = false; // < 10% ratio variation over the two smallest decades
    bool passed = false;
    std::string note;
};

KernelBoundReport verify_kernel_bounds(const KernelProbe& probe);

// A = 64 max(C_K, C_gradK), floored at 1. The factor 64 covers the ball
// splittings and the 3 xi -> xi concavity absorption.
double estimate_A(const Symbol& symbol);

std::string kernel_report_csv(const KernelBoundReport& rep);

} // namespace ssqg
