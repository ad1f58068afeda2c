#pragma once

#include <string>
#include <vector>

namespace ssqg {

enum class SymbolKind { constant_one, loglog_power };

// Radial Fourier multiplier m(r). Two built-in families:
//   constant-one:  m ≡ 1 (critical SQG)
//   loglog-power:  m(r) = (ln(e + ln(e + r)))^beta, beta in [0,1)
// Immutable value type; every operation is pure.
struct Symbol {
    SymbolKind kind = SymbolKind::constant_one;
    double beta = 0.0;
    int dimension = 2;

    static Symbol constant_one();
    static Symbol loglog_power(double beta);

    double eval(double r) const;             // m(r), r >= 0
    double operator()(double r) const { return eval(r); }
    double deriv(double r, int k) const;     // d^k m / dr^k, 1 <= k <= dimension+2
    double eval_log_radius(double L) const;  // m(e^L), stable for huge L

    std::string name() const;
    bool operator==(const Symbol&) const = default;
};

struct ConditionSample {
    double r;        // radius; for growth-loglog this column tabulates ln(r)
    double value;
    double envelope; // bound the sample is checked against
};

struct SymbolConditionReport {
    std::string condition_id; // growth-loglog | derivative-ratio | hormander-mikhlin-k
                              // | supercritical-decay | integral-bound
    std::vector<ConditionSample> samples;
    double worst_ratio = 0.0;
    bool passed = false;
    double r0 = 0.0;
    bool radius_is_log = false;
};

double eval_m(const Symbol& s, double r);
double eval_m_deriv(const Symbol& s, double r, int k);

// Checks growth conditions (3)-(5) plus the two derived properties of the
// symbol (supercritical decay and the small-radius integral bound).
std::vector<SymbolConditionReport> check_conditions(const Symbol& s);

// Smallest dyadic radius r0 with 2 r m'(r) <= m(r) for all tested r >= r0
// (dyadic grid up to ~1e15). Certification error if none exists.
double find_r0(const Symbol& s);

double g_of_delta(const Symbol& s, double delta); // g(delta) = delta * m(1/delta)

// Unique delta with B * g(delta) = kappa, to ~1e-14 relative residual.
// Requires kappa <= g(1/r0) (monotone range) and B > 0.
double solve_delta(const Symbol& s, double B, double kappa);

std::string condition_report_csv(const std::vector<SymbolConditionReport>& reports);

} // namespace ssqg
