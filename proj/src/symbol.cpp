#include "ssqg/symbol.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"
#include "ssqg/quadrature.hpp"

namespace ssqg {
namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

// Chain pieces for m = v^beta, v = ln(e+u), u = ln(e+r).
struct LogLogChain {
    double v, v1, v2, v3, v4;
};

LogLogChain loglog_chain(double r) {
    const double p = 1.0 / (kE + r);
    const double u = std::log(kE + r);
    const double q = 1.0 / (kE + u);
    LogLogChain c;
    c.v = std::log(kE + u);
    c.v1 = p * q;
    c.v2 = -p * p * q * (1.0 + q);
    c.v3 = p * p * p * q * (2.0 + q * (3.0 + 2.0 * q));
    c.v4 = -p * p * p * p * q * (6.0 + q * (11.0 + q * (12.0 + 6.0 * q)));
    return c;
}

} // namespace

Symbol Symbol::constant_one() { return Symbol{SymbolKind::constant_one, 0.0, 2}; }

Symbol Symbol::loglog_power(double beta) {
    if (!(beta >= 0.0) || !(beta < 1.0))
        throw DomainError("loglog_power: beta must lie in [0,1)");
    return Symbol{SymbolKind::loglog_power, beta, 2};
}

double Symbol::eval(double r) const {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw DomainError("Symbol::eval: radius must be finite and nonnegative");
    if (kind == SymbolKind::constant_one) return 1.0;
    const double v = std::log(kE + std::log(kE + r));
    return beta == 0.0 ? 1.0 : std::pow(v, beta);
}

double Symbol::eval_log_radius(double L) const {
    if (kind == SymbolKind::constant_one) return 1.0;
    // u = ln(e + e^L) = L + log1p(e^(1-L)) once e^L would overflow
    double u;
    if (L > 40.0)
        u = L + std::log1p(std::exp(1.0 - L));
    else
        u = std::log(kE + std::exp(L));
    const double v = std::log(kE + u);
    return beta == 0.0 ? 1.0 : std::pow(v, beta);
}

double Symbol::deriv(double r, int k) const {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw DomainError("Symbol::deriv: radius must be finite and nonnegative");
    if (k < 1 || k > dimension + 2)
        throw DomainError("Symbol::deriv: order k out of range 1..d+2");
    if (kind == SymbolKind::constant_one || beta == 0.0) return 0.0;

    const LogLogChain c = loglog_chain(r);
    const double b = beta;
    const double f1 = b * std::pow(c.v, b - 1.0);
    const double f2 = b * (b - 1.0) * std::pow(c.v, b - 2.0);
    const double f3 = b * (b - 1.0) * (b - 2.0) * std::pow(c.v, b - 3.0);
    const double f4 = b * (b - 1.0) * (b - 2.0) * (b - 3.0) * std::pow(c.v, b - 4.0);
    switch (k) {
        case 1: return f1 * c.v1;
        case 2: return f2 * c.v1 * c.v1 + f1 * c.v2;
        case 3: return f3 * c.v1 * c.v1 * c.v1 + 3.0 * f2 * c.v1 * c.v2 + f1 * c.v3;
        case 4:
            return f4 * c.v1 * c.v1 * c.v1 * c.v1 + 6.0 * f3 * c.v1 * c.v1 * c.v2 +
                   f2 * (3.0 * c.v2 * c.v2 + 4.0 * c.v1 * c.v3) + f1 * c.v4;
        default: throw DomainError("Symbol::deriv: unsupported order");
    }
}

std::string Symbol::name() const {
    if (kind == SymbolKind::constant_one) return "constant-one";
    std::ostringstream os;
    os << "loglog-power(beta=" << format_double(beta) << ")";
    return os.str();
}

double eval_m(const Symbol& s, double r) { return s.eval(r); }
double eval_m_deriv(const Symbol& s, double r, int k) { return s.deriv(r, k); }

namespace {

// Declining-envelope verdict: per-decade maxima of the tested quantity must be
// non-increasing over the last `tail_decades` decades of the grid variable,
// and the final sample must sit below `final_bound`.
void finish_limit_report(SymbolConditionReport& rep, int tail_decades, double final_bound) {
    const auto& s = rep.samples;
    if (s.empty()) {
        rep.passed = false;
        return;
    }
    // group by decade of the grid column
    std::vector<double> decade_max;
    double cur_decade = std::floor(std::log10(std::abs(s.front().r)));
    double cur_max = -std::numeric_limits<double>::infinity();
    for (const auto& smp : s) {
        const double d = std::floor(std::log10(std::abs(smp.r)));
        if (d != cur_decade) {
            decade_max.push_back(cur_max);
            cur_decade = d;
            cur_max = -std::numeric_limits<double>::infinity();
        }
        cur_max = std::max(cur_max, smp.value);
    }
    decade_max.push_back(cur_max);

    const int n = (int)decade_max.size();
    const int from = std::max(0, n - tail_decades);
    bool declining = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = from; i < n; ++i) {
        worst = std::max(worst, decade_max[i]);
        if (i > from && decade_max[i] > decade_max[i - 1] * (1.0 + 1e-12) + 1e-300)
            declining = false;
    }
    rep.worst_ratio = worst;
    rep.passed = declining && s.back().value < final_bound;
}

} // namespace

std::vector<SymbolConditionReport> check_conditions(const Symbol& s) {
    std::vector<SymbolConditionReport> out;
    const double r0 = find_r0(s);

    // (3) m(r)/lnln r -> 0. Sampled against ln r (doubles cannot reach radii
    // where lnln is large, but ln r up to ~1e300 can be fed to the closed form).
    {
        SymbolConditionReport rep;
        rep.condition_id = "growth-loglog";
        rep.radius_is_log = true;
        rep.r0 = r0;
        for (double k = 1.0; k <= 300.0; k += 0.5) {
            const double L = std::pow(10.0, k); // = ln r
            const double q = s.eval_log_radius(L) / std::log(L);
            rep.samples.push_back({L, q, 0.1});
        }
        finish_limit_report(rep, 6, 0.1);
        out.push_back(std::move(rep));
    }

    // (4) r m'(r)/m(r) -> 0
    {
        SymbolConditionReport rep;
        rep.condition_id = "derivative-ratio";
        rep.r0 = r0;
        for (double k = 3.0; k <= 14.0; k += 0.5) {
            const double r = std::pow(10.0, k);
            const double q = r * s.deriv(r, 1) / s.eval(r);
            rep.samples.push_back({r, q, 0.1});
        }
        finish_limit_report(rep, 6, 0.1);
        out.push_back(std::move(rep));
    }

    // (5) sup_k r^k |m^(k)(r)| / m(r) bounded (k = 0..d+2)
    {
        SymbolConditionReport rep;
        rep.condition_id = "hormander-mikhlin-k";
        rep.r0 = r0;
        const double bound = 10.0;
        double worst = 0.0;
        for (double k = -6.0; k <= 6.0; k += 0.5) {
            const double r = std::pow(10.0, k);
            const double m = s.eval(r);
            double q = 1.0; // k = 0 term
            double rk = 1.0;
            for (int ord = 1; ord <= s.dimension + 2; ++ord) {
                rk *= r;
                q = std::max(q, rk * std::abs(s.deriv(r, ord)) / m);
            }
            worst = std::max(worst, q);
            rep.samples.push_back({r, q, bound});
        }
        rep.worst_ratio = worst;
        rep.passed = worst <= bound;
        out.push_back(std::move(rep));
    }

    // derived decay: m(r)(1 + ln r)/r -> 0
    {
        SymbolConditionReport rep;
        rep.condition_id = "supercritical-decay";
        rep.r0 = r0;
        for (double k = 3.0; k <= 14.0; k += 0.5) {
            const double r = std::pow(10.0, k);
            const double q = s.eval(r) * (1.0 + std::log(r)) / r;
            rep.samples.push_back({r, q, 0.1});
        }
        finish_limit_report(rep, 6, 0.1);
        out.push_back(std::move(rep));
    }

    // derived bound: int_0^z m(1/t) dt <= 2 z m(1/z) for small z
    {
        SymbolConditionReport rep;
        rep.condition_id = "integral-bound";
        rep.r0 = r0;
        double worst = 0.0;
        for (int e = 2; e <= 12; e += 2) {
            const double z = std::pow(10.0, -e);
            // t = z * exp(-y); integrand decays like exp(-y) against slow m growth
            QuadratureOptions qo;
            qo.rel_tol = 1e-12;
            const auto integral = integrate(
                [&](double y) { return z * std::exp(-y) * s.eval(std::exp(y) / z); }, 0.0,
                120.0, qo);
            const double q = integral.value / (2.0 * z * s.eval(1.0 / z));
            worst = std::max(worst, q);
            rep.samples.push_back({z, q, 1.0});
        }
        rep.worst_ratio = worst;
        rep.passed = worst <= 1.0 + 1e-12;
        out.push_back(std::move(rep));
    }

    return out;
}

double find_r0(const Symbol& s) {
    // dyadic scan 2^-30 .. 2^50 (~1.1e15)
    const int jmin = -30, jmax = 50;
    int first_bad = jmin - 1; // largest j violating the inequality
    for (int j = jmin; j <= jmax; ++j) {
        const double r = std::ldexp(1.0, j);
        if (2.0 * r * s.deriv(r, 1) > s.eval(r) * (1.0 + 1e-12)) first_bad = j;
    }
    if (first_bad >= jmax)
        throw CertificationError("find_r0: 2 r m' <= m not reached below 1e15");
    return std::ldexp(1.0, first_bad + 1);
}

double g_of_delta(const Symbol& s, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw DomainError("g_of_delta: delta must be positive and finite");
    // log form keeps 1/delta out of the overflow range for subnormal delta
    return delta * s.eval_log_radius(-std::log(delta));
}

double solve_delta(const Symbol& s, double B, double kappa) {
    if (!(B > 0.0) || !std::isfinite(B)) throw DomainError("solve_delta: B must be positive");
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw DomainError("solve_delta: kappa must be positive");
    const double r0 = find_r0(s);
    const double gmax = g_of_delta(s, 1.0 / r0);
    if (kappa > gmax)
        throw PreconditionError("solve_delta: kappa exceeds monotone range g(1/r0)");

    const double c = kappa / B; // target for g(delta); c <= gmax since B >= 1 callers
    // bracket in t = ln(delta): g(e^t) >= e^t so t_hi works; walk t_lo down
    double t_hi = std::log(c) + 1.0;
    while (g_of_delta(s, std::exp(t_hi)) < c) t_hi += 1.0;
    double t_lo = std::log(c) - std::log(s.eval(1.0 / std::min(c, 1.0))) - 2.0;
    while (g_of_delta(s, std::exp(t_lo)) > c) {
        t_lo -= 5.0;
        if (t_lo < -740.0)
            throw NumericalError("solve_delta: bracket search hit the underflow floor");
    }
    for (int i = 0; i < 200; ++i) {
        const double t = 0.5 * (t_lo + t_hi);
        if (g_of_delta(s, std::exp(t)) < c)
            t_lo = t;
        else
            t_hi = t;
        if (t_hi - t_lo < 1e-16 * std::abs(t_hi)) break;
    }
    double delta = std::exp(0.5 * (t_lo + t_hi));
    // Newton polish: g'(delta) = m(1/delta) - m'(1/delta)/delta
    for (int i = 0; i < 3; ++i) {
        const double inv = 1.0 / delta;
        const double g = delta * s.eval(inv);
        const double gp = s.eval(inv) - inv * s.deriv(inv, 1);
        const double step = (g - c) / gp;
        if (!std::isfinite(step)) break;
        const double next = delta - step;
        if (next > 0.0 && std::isfinite(next)) delta = next;
    }
    const double resid = std::abs(B * g_of_delta(s, delta) - kappa) / kappa;
    if (resid > 1e-12)
        throw NumericalError("solve_delta: residual " + format_double(resid) +
                             " above 1e-12");
    return delta;
}

std::string condition_report_csv(const std::vector<SymbolConditionReport>& reports) {
    CsvWriter csv({"condition_id", "r", "value", "envelope", "passed"});
    for (const auto& rep : reports)
        for (const auto& smp : rep.samples)
            csv.row({rep.condition_id, format_double(smp.r), format_double(smp.value),
                     format_double(smp.envelope), rep.passed ? "1" : "0"});
    return csv.str();
}

} // namespace ssqg
