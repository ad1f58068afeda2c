#include "ssqg/modulus.hpp"

#include <cmath>
#include <sstream>

#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"
#include "ssqg/quadrature.hpp"

namespace ssqg {
namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
} // namespace

ModulusFamily ModulusFamily::make(const Symbol& s, double A, double kappa, double gamma) {
    if (!(A > 0.0) || !std::isfinite(A))
        throw PreconditionError("ModulusFamily: A must be positive");
    if (!(kappa > 0.0) || !(gamma > 0.0))
        throw PreconditionError("ModulusFamily: kappa and gamma must be positive");
    if (!(gamma < kappa))
        throw PreconditionError("ModulusFamily: gamma must satisfy gamma < kappa");
    ModulusFamily fam;
    fam.symbol = s;
    fam.A = A;
    fam.kappa = kappa;
    fam.gamma = gamma;
    fam.r0 = find_r0(s);
    fam.g_cap = g_of_delta(s, 1.0 / fam.r0);
    if (!(kappa <= fam.g_cap))
        throw PreconditionError("ModulusFamily: kappa exceeds g(1/r0) = " +
                                format_double(fam.g_cap));
    return fam;
}

std::vector<std::string> ModulusFamily::smallness_violations() const {
    std::vector<std::string> v;
    if (!(32.0 * kPi * kappa * A < 1.0))
        v.push_back("32 pi kappa A = " + format_double(32.0 * kPi * kappa * A) + " >= 1");
    if (!(4.0 * kPi * A * gamma < 1.0))
        v.push_back("4 pi A gamma = " + format_double(4.0 * kPi * A * gamma) + " >= 1");
    return v;
}

ModulusInstance ModulusInstance::make(const ModulusFamily& fam, double B) {
    if (!(B >= 1.0) || !std::isfinite(B))
        throw PreconditionError("ModulusInstance: B must satisfy B >= 1");
    return ModulusInstance(fam, B, true);
}

ModulusInstance ModulusInstance::make_unchecked(const ModulusFamily& fam, double B) {
    if (!(B > 0.0) || !std::isfinite(B))
        throw PreconditionError("ModulusInstance: B must be positive");
    return ModulusInstance(fam, B, false);
}

ModulusInstance::ModulusInstance(const ModulusFamily& fam, double B, bool validate)
    : family_(fam), B_(B) {
    delta_ = solve_delta(fam.symbol, B, fam.kappa);
    m1_ = fam.symbol.eval_log_radius(-std::log(delta_));

    // omega(delta) by quadrature of the near branch; eta = delta e^{-s}
    QuadratureOptions qo;
    qo.abs_tol = 1e-13 * B_ * delta_;
    qo.rel_tol = 1e-12;
    const auto q = integrate(
        [&](double s) {
            const double eta = delta_ * std::exp(-s);
            return omega_prime(eta) * eta;
        },
        0.0, 45.0, qo);
    omega_at_delta_ = q.value; // remainder below s=45 is ~1e-20 B delta

    if (validate) {
        const double lo = 0.5 * B_ * delta_, hi = B_ * delta_;
        if (omega_at_delta_ < lo * (1.0 - 1e-9) || omega_at_delta_ > hi * (1.0 + 1e-9))
            throw NumericalError("ModulusInstance: omega(delta) outside [B delta/2, B delta]");
    }
}

double ModulusInstance::omega_prime(double xi) const {
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw DomainError("omega_prime: xi must be positive");
    if (xi <= delta_) {
        // factored as B (1 - (B xi) m (4+ln)/(8 kappa)): B xi <= B delta ~ kappa,
        // so no intermediate reaches B^2 (which overflows for B ~ 1e154);
        // m(1/xi) through the log form survives subnormal xi
        const double m = family_.symbol.eval_log_radius(-std::log(xi));
        return B_ * (1.0 - (B_ * xi) * m * (4.0 + std::log(delta_ / xi)) /
                               (8.0 * family_.kappa));
    }
    return family_.gamma / (xi * (4.0 + std::log(xi / delta_)) * m1_);
}

double ModulusInstance::omega(double xi) const {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("omega: xi must be positive");
    if (xi > delta_) {
        // exact antiderivative of the far branch
        return omega_at_delta_ +
               (family_.gamma / m1_) * std::log((4.0 + std::log(xi / delta_)) / 4.0);
    }
    QuadratureOptions qo;
    qo.abs_tol = 1e-13 * B_ * delta_;
    qo.rel_tol = 1e-12;
    const auto q = integrate(
        [&](double s) {
            const double eta = xi * std::exp(-s);
            return omega_prime(eta) * eta;
        },
        0.0, 45.0, qo);
    return q.value;
}

double ModulusInstance::omega_second(double xi) const {
    if (!(xi > 0.0) || !(xi < delta_))
        throw DomainError("omega_second: xi must lie in (0, delta)");
    return omega_second_any(xi);
}

double ModulusInstance::omega_second_any(double xi) const {
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw DomainError("omega_second_any: xi must be positive");
    if (xi <= delta_) {
        const double inv = 1.0 / xi; // |omega''| genuinely overflows near B ~ 1e154
        const double m = family_.symbol.eval(inv);
        const double mp = family_.symbol.deriv(inv, 1);
        return -(B_ * B_ / (8.0 * family_.kappa)) *
               ((m - inv * mp) * (4.0 + std::log(delta_ / xi)) - m);
    }
    const double L = std::log(xi / delta_);
    const double c = 4.0 + L;
    return -family_.gamma * (c + 1.0) / (m1_ * xi * xi * c * c);
}

std::pair<double, double> ModulusInstance::tail_integral_bracket(double H) const {
    if (!(H > delta_))
        throw DomainError("tail_integral_bracket: H must exceed delta");
    // Int_H^inf omega/eta^2 = omega(H)/H + (gamma/m1) Int_H^inf 1/(eta^2 (4+ln(eta/delta)))
    // and the latter equals (1/H) J(c) with c = 4 + ln(H/delta),
    // J(c) = Int_0^inf e^{-y}/(c+y) dy in [1/(c+1), 1/c].
    const double base = omega(H) / H;
    const double c = 4.0 + std::log(H / delta_);
    const double pre = family_.gamma / (m1_ * H);
    return {base + pre / (c + 1.0), base + pre / c};
}

ModulusAxiomReport check_modulus_axioms(const ModulusInstance& inst,
                                        const AxiomCheckOptions& opts) {
    ModulusAxiomReport rep;
    const double delta = inst.delta();
    const double B = inst.B();
    const double lo = opts.xi_lo_over_delta * delta;
    const double hi = opts.xi_hi_over_delta * delta;
    const int decades = (int)std::round(std::log10(hi / lo));
    const int n = decades * opts.points_per_decade;

    std::vector<double> xi(n + 1), om(n + 1), omp(n + 1);
    const double step = std::log(hi / lo) / n;
    for (int i = 0; i <= n; ++i) {
        xi[i] = lo * std::exp(step * i);
        om[i] = inst.omega(xi[i]);
        omp[i] = inst.omega_prime(xi[i]);
    }

    auto flag = [&rep](const std::string& axiom, double x, const std::string& detail) {
        if (rep.violations.size() < 32) rep.violations.push_back({axiom, x, detail});
    };

    // strict monotonicity of omega
    for (int i = 0; i < n; ++i)
        if (!(om[i + 1] > om[i]))
            flag("monotone", xi[i + 1],
                 "omega(" + format_double(xi[i + 1]) + ") <= omega(" + format_double(xi[i]) + ")");

    // omega' non-increasing, including across the branch jump
    for (int i = 0; i < n; ++i)
        if (omp[i + 1] > omp[i] * (1.0 + 1e-11))
            flag("concave-derivative", xi[i + 1], "omega' increased");
    {
        const double left = inst.omega_prime(delta);
        const double right = inst.omega_prime(delta * (1.0 + 1e-14));
        if (right > left * (1.0 + 1e-11))
            flag("concave-derivative", delta, "right derivative at delta exceeds left");
    }

    // chord slopes non-increasing
    for (int i = 0; i + 2 <= n; ++i) {
        const double s1 = (om[i + 1] - om[i]) / (xi[i + 1] - xi[i]);
        const double s2 = (om[i + 2] - om[i + 1]) / (xi[i + 2] - xi[i + 1]);
        if (s2 > s1 * (1.0 + 1e-8))
            flag("concave-chord", xi[i + 1], "chord slope increased");
    }

    // doubling for xi >= delta
    for (int i = 0; i <= n; ++i) {
        if (xi[i] < delta || 2.0 * xi[i] > hi) continue;
        const double lhs = inst.omega(2.0 * xi[i]);
        if (lhs > 1.5 * om[i] * (1.0 + 1e-12))
            flag("doubling", xi[i],
                 "omega(2 xi) = " + format_double(lhs) + " > 1.5 omega(xi)");
    }

    // omega'(0+) = B
    rep.slope_at_zero_rel_err = std::abs(inst.omega_prime(1e-14 * delta) / B - 1.0);
    if (rep.slope_at_zero_rel_err > 1e-5)
        flag("slope-at-zero", 1e-14 * delta, "omega'(0+) differs from B");

    // Int_delta^inf omega/eta^2 <= 2B  (quadrature to 1e6 delta + analytic tail)
    {
        const double H = 1e6 * delta;
        QuadratureOptions qo;
        qo.rel_tol = 1e-11;
        const auto q = integrate(
            [&](double y) {
                const double eta = delta * std::exp(y);
                return inst.omega(eta) / eta; // omega/eta^2 * (eta dy)
            },
            0.0, std::log(H / delta), qo);
        rep.tail_integral = q.upper() + inst.tail_integral_bracket(H).second;
        if (!(rep.tail_integral <= 2.0 * B))
            flag("tail-integral", delta,
                 "Int omega/eta^2 = " + format_double(rep.tail_integral) + " > 2B");
    }

    rep.passed = rep.violations.empty();
    return rep;
}

double find_B_for_data(const ModulusFamily& fam, double sup_norm, double grad_norm) {
    if (!(sup_norm > 0.0) || !std::isfinite(sup_norm) || !(grad_norm > 0.0) ||
        !std::isfinite(grad_norm))
        throw DomainError("find_B_for_data: norms must be positive and finite");
    const double a = 2.0 * sup_norm / grad_norm;
    const double target = 2.0 * sup_norm;
    auto fits = [&](double B) {
        return ModulusInstance::make(fam, B).omega(a) >= target;
    };
    double B = std::max(1.0, grad_norm);
    if (fits(B)) return B;
    double lo = B;
    while (true) {
        B *= 2.0;
        if (B > 1e300)
            throw CertificationError(
                "find_B_for_data: no admissible B below 1e300; the family's moduli are "
                "uniformly too small for this data (or the symbol violates condition (3))");
        if (fits(B)) break;
        lo = B;
    }
    double hi = B;
    while (hi / lo > 1.0 + 1e-9) {
        const double mid = std::sqrt(lo * hi);
        if (fits(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::string modulus_csv(const ModulusInstance& inst, double xi_lo, double xi_hi,
                        int points_per_decade) {
    if (!(xi_lo > 0.0) || !(xi_hi > xi_lo) || points_per_decade < 1)
        throw DomainError("modulus_csv: bad grid");
    CsvWriter csv({"xi", "omega", "omega_prime"});
    const int n = std::max(1, (int)std::round(std::log10(xi_hi / xi_lo) * points_per_decade));
    const double step = std::log(xi_hi / xi_lo) / n;
    for (int i = 0; i <= n; ++i) {
        const double x = xi_lo * std::exp(step * i);
        csv.row({format_double(x), format_double(inst.omega(x)),
                 format_double(inst.omega_prime(x))});
    }
    return csv.str();
}

} // namespace ssqg
