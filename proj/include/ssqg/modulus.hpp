#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssqg/symbol.hpp"

namespace ssqg {

// Abstract concave modulus of continuity with omega(0+) = 0. The certificate
// quadratures are generic over this so test moduli with closed-form Omega / D
// values can exercise the same code paths.
struct ConcaveModulus {
    virtual ~ConcaveModulus() = default;
    virtual double omega(double xi) const = 0;
    virtual double omega_prime(double xi) const = 0; // left-continuous at kinks
    virtual double slope_at_zero() const = 0;        // omega'(0+)
    virtual std::vector<double> kinks() const = 0;   // interior kink locations
    // Bracket of Int_H^inf omega(eta)/eta^2 d eta (lower, upper).
    virtual std::pair<double, double> tail_integral_bracket(double H) const = 0;
};

// Shared constants of the moduli family: the symbol m, the velocity-modulus
// constant A, and the smallness parameters kappa, gamma.
struct ModulusFamily {
    Symbol symbol;
    double A = 1.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double r0 = 0.0;    // from find_r0
    double g_cap = 0.0; // g(1/r0), the admissible range for kappa

    // Enforces the structural invariants (positivity, gamma < kappa,
    // kappa <= g(1/r0)). The smallness conditions 32 pi kappa A < 1 and
    // 4 pi A gamma < 1 are queried separately: the certificate exists to
    // detect their violation, so they must be representable.
    static ModulusFamily make(const Symbol& s, double A, double kappa, double gamma);

    std::vector<std::string> smallness_violations() const;
};

// One member omega_B: steep near-branch on (0, delta(B)], slowly growing
// far branch beyond. delta solves B delta m(1/delta) = kappa.
class ModulusInstance : public ConcaveModulus {
  public:
    // B >= 1 per the family contract; `unchecked` admits any B > 0 and is
    // used by tests that deliberately break the fit.
    static ModulusInstance make(const ModulusFamily& fam, double B);
    static ModulusInstance make_unchecked(const ModulusFamily& fam, double B);

    const ModulusFamily& family() const { return family_; }
    double B() const { return B_; }
    double delta() const { return delta_; }
    double omega_at_delta() const { return omega_at_delta_; }
    double m_at_inv_delta() const { return m1_; }

    double omega(double xi) const override;
    double omega_prime(double xi) const override;
    // Exact second derivative on (0, delta); domain error outside that branch.
    double omega_second(double xi) const;
    // Second derivative on either smooth branch (internal consumers).
    double omega_second_any(double xi) const;

    double slope_at_zero() const override { return B_; }
    std::vector<double> kinks() const override { return {delta_}; }
    std::pair<double, double> tail_integral_bracket(double H) const override;

  private:
    ModulusInstance(const ModulusFamily& fam, double B, bool validate);
    ModulusFamily family_;
    double B_ = 1.0;
    double delta_ = 0.0;
    double m1_ = 1.0; // m(1/delta)
    double omega_at_delta_ = 0.0;
};

struct AxiomViolation {
    std::string axiom;
    double xi;
    std::string detail;
};

struct ModulusAxiomReport {
    bool passed = false;
    double slope_at_zero_rel_err = 0.0;
    double tail_integral = 0.0; // Int_delta^inf omega/eta^2 (upper end)
    std::vector<AxiomViolation> violations;
};

struct AxiomCheckOptions {
    int points_per_decade = 400;
    double xi_lo_over_delta = 1e-8;
    double xi_hi_over_delta = 1e8;
};

// Grid verification of Definition-1 axioms plus the doubling property
// omega(2 xi) <= 1.5 omega(xi) (xi >= delta) and the tail integral <= 2B.
ModulusAxiomReport check_modulus_axioms(const ModulusInstance& inst,
                                        const AxiomCheckOptions& opts = {});

// Smallest B >= max(1, grad_norm) with omega_B(2 sup/grad) >= 2 sup, by
// doubling then bisection. Certification error beyond B = 1e300.
double find_B_for_data(const ModulusFamily& fam, double sup_norm, double grad_norm);

// CSV (xi, omega, omega_prime) on a log grid, for plotting.
std::string modulus_csv(const ModulusInstance& inst, double xi_lo, double xi_hi,
                        int points_per_decade);

} // namespace ssqg
