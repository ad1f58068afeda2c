#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssqg/modulus.hpp"
#include "ssqg/symbol.hpp"

namespace ssqg {

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

// kappa = min(1/(64 pi A), g(1/r0)/2), gamma = min(kappa/2, 1/(8 pi A)):
// strict versions of the smallness conditions with factor-2 margins.
std::pair<double, double> choose_constants(double A, const Symbol& s);

struct EngineOptions {
    double rel_tol = 1e-10;  // per-piece quadrature tolerance
    double tail_M = 1e6;     // tail cutoff multiplier
};

// Velocity modulus Omega(xi) = A (Int_0^xi omega m(1/eta)/eta
//                               + xi Int_xi^inf omega m(1/eta)/eta^2),
// split into bracketed near/far pieces (analytic tails included).
struct OmegaBreakdown {
    Bracket near;  // Int_0^xi omega(eta) m(1/eta)/eta deta
    Bracket far;   // xi Int_xi^inf omega(eta) m(1/eta)/eta^2 deta
    Bracket total; // A (near + far)
};

OmegaBreakdown omega_velocity_bracket(const ConcaveModulus& mod, const Symbol& sym,
                                      double A, double xi, const EngineOptions& opts = {});

// Dissipation functional bracket:
//   D(xi) = (1/pi)[ Int_0^{xi/2} (omega(xi+2eta)+omega(xi-2eta)-2omega(xi))/eta^2
//          + Int_{xi/2}^inf (omega(2eta+xi)-omega(2eta-xi)-2omega(xi))/eta^2 ]
Bracket dissipation_bracket(const ConcaveModulus& mod, double xi,
                            const EngineOptions& opts = {});

// Scalar entry points: conservative (upper) bracket ends.
double Omega_B(const ModulusInstance& inst, double xi, const EngineOptions& opts = {});
double D_B(const ModulusInstance& inst, double xi, const EngineOptions& opts = {});

struct BoundRow {
    std::string id; // near-dissipation-bound, tail-integral-bound, near-combined-bound,
                    // far-dissipation-bound, drift-near/far-part-bound,
                    // drift-product-bound, smallness-kappa, smallness-gamma
    double B = 0.0;
    double xi = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool passed = false;
};

// Evaluates both sides of every displayed inequality applicable at (inst, xi).
std::vector<BoundRow> check_intermediate_bounds(const ModulusInstance& inst, double xi,
                                                const EngineOptions& opts = {});

struct CertificateConfig {
    std::vector<double> B_list = {1.0, 10.0, 1e3, 1e6};
    double xi_low = 1e-6;  // in multiples of delta(B)
    double xi_high = 1e6;
    int points_per_decade = 50;
    double quad_tol = 1e-10;
    double tail_M = 1e6;
    double margin = 1e-3; // required negativity gap as a fraction of |D|
    int threads = 0;      // 0 = hardware concurrency
    bool intermediate_bounds = true;
    bool continuity_guard = true;
};

struct CertificatePoint {
    double B = 0.0;
    double xi_over_delta = 0.0;
    double xi = 0.0;
    double omega_prime = 0.0;
    Bracket Omega;
    Bracket D;
    double combined = 0.0; // Omega.hi * omega_prime + D.hi
    double margin = 0.0;   // -combined / |D.hi|
    bool passed = false;
};

struct CertificateReport {
    bool passed = false;
    double worst_margin = 0.0;
    double worst_B = 0.0;
    double worst_xi_over_delta = 0.0;
    std::vector<CertificatePoint> points;
    std::vector<BoundRow> bounds;        // intermediate-bound subreport
    bool bounds_passed = true;
    double guard_margin = 0.0;           // between-sample continuity estimate
    bool guard_passed = true;
    std::vector<std::string> notes;
    CertificateConfig config;
    std::string symbol_name;
    double A = 0.0, kappa = 0.0, gamma = 0.0;
};

// Grid verification of Omega_B omega_B' + D_B < -margin |D_B| over every B in
// the list and xi/delta(B) log-spaced in [xi_low, xi_high]. Uses upper bracket
// ends for both terms, so a pass implies the exact expression is negative at
// every grid point.
CertificateReport verify_negativity(const ModulusFamily& fam, const CertificateConfig& cfg);

std::string certificate_csv(const CertificateReport& rep);

} // namespace ssqg
