#pragma once

#include <functional>
#include <vector>

namespace ssqg {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0; // conservative absolute error estimate
    int evaluations = 0;
    bool converged = false;

    double lower() const { return value - error; }
    double upper() const { return value + error; }
};

struct QuadratureOptions {
    double abs_tol = 0.0;
    double rel_tol = 1e-11;
    int max_intervals = 20000;
    // Interior points where the integrand has kinks or jumps; the initial
    // segmentation is split there so adaptivity never straddles them.
    std::vector<double> breakpoints;
    bool throw_on_failure = true;
};

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval. Endpoints are never
// evaluated. Throws NumericalError if the tolerance cannot be met and
// throw_on_failure is set; otherwise returns converged=false.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

} // namespace ssqg
