#include "ssqg/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"
#include "ssqg/quadrature.hpp"

namespace ssqg {
namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

// S4 smootherstep: first four derivatives vanish at both ends, so the cutoff
// is C^4 and survives the two Bessel-operator applications.
double s4(double t) {
    return t * t * t * t * t * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))));
}
double s4d1(double t) {
    const double a = t * (t - 1.0);
    return 630.0 * a * a * a * a;
}
double s4d2(double t) {
    const double a = t * (t - 1.0);
    return 2520.0 * a * a * a * (2.0 * t - 1.0);
}
double s4d3(double t) {
    const double a = t * (t - 1.0);
    return 2520.0 * a * a * (14.0 * t * t - 14.0 * t + 3.0);
}
double s4d4(double t) {
    const double a = t * (t - 1.0);
    return 5040.0 * a * (2.0 * t - 1.0) * (21.0 * t * t - 21.0 * t + 3.0);
}

// w = 1 - eta_R and its first four derivatives (transition on [R/2, R])
struct CutoffTail {
    double w[5];
};

CutoffTail cutoff_tail(double rho, double R) {
    CutoffTail c{};
    if (rho <= 0.5 * R) return c; // all zero
    if (rho >= R) {
        c.w[0] = 1.0;
        return c;
    }
    const double t = 2.0 * rho / R - 1.0;
    const double s = 2.0 / R;
    c.w[0] = s4(t);
    c.w[1] = s4d1(t) * s;
    c.w[2] = s4d2(t) * s * s;
    c.w[3] = s4d3(t) * s * s * s;
    c.w[4] = s4d4(t) * s * s * s * s;
    return c;
}

// u = (1 - eta_R) m and derivatives to order 4 by Leibniz
void u_derivs(const Symbol& sym, double rho, double R, double out[5]) {
    const CutoffTail c = cutoff_tail(rho, R);
    double m[5];
    m[0] = sym.eval(rho);
    for (int k = 1; k <= 4; ++k) m[k] = sym.deriv(rho, k);
    static const double binom[5][5] = {{1, 0, 0, 0, 0},
                                       {1, 1, 0, 0, 0},
                                       {1, 2, 1, 0, 0},
                                       {1, 3, 3, 1, 0},
                                       {1, 4, 6, 4, 1}};
    for (int k = 0; k <= 4; ++k) {
        double acc = 0.0;
        for (int i = 0; i <= k; ++i) acc += binom[k][i] * c.w[i] * m[k - i];
        out[k] = acc;
    }
}

// L^2[u] = u'''' + 2u'''/rho - 3u''/rho^2 + 3u'/rho^3 - 3u/rho^4
double bessel_op2(const Symbol& sym, double rho, double R) {
    double u[5];
    u_derivs(sym, rho, R, u);
    const double inv = 1.0 / rho;
    return u[4] +
           inv * (2.0 * u[3] + inv * (-3.0 * u[2] + inv * (3.0 * u[1] - 3.0 * u[0] * inv)));
}

// radial profile: K(x) = (x_j/|x|) K_rad(|x|)
KernelValue kernel_radial(const KernelProbe& probe, double r, double cz) {
    const Symbol& sym = probe.symbol;
    const double R = cz / r;

    QuadratureOptions qo;
    qo.rel_tol = probe.quad_tol;

    // ball part: smooth, compact support, no oscillation (rho r <= cz ~ 1)
    QuadratureOptions q1 = qo;
    q1.breakpoints = {0.5 * R};
    const auto ball = integrate(
        [&](double rho) {
            const double eta = 1.0 - cutoff_tail(rho, R).w[0];
            return eta * sym.eval(rho) * rho * std::cyl_bessel_j(1, rho * r);
        },
        0.0, R, q1);

    // tail part after two applications of the Bessel operator:
    //   Int_{R/2}^inf u rho J1(rho r) drho = (1/r^4) Int L^2[u] rho J1(rho r) drho
    const double rho_max = probe.truncation_z / r;
    QuadratureOptions q2 = qo;
    q2.max_intervals = 40000;
    q2.breakpoints.push_back(R);
    // seed panel boundaries at the oscillation scale
    const double osc = 4.0 * kPi / r;
    for (double p = R; p < rho_max; p += osc) q2.breakpoints.push_back(p);
    const auto tail_quad = integrate(
        [&](double rho) {
            return bessel_op2(sym, rho, R) * rho * std::cyl_bessel_j(1, rho * r);
        },
        0.5 * R, rho_max, q2);
    const double inv_r4 = 1.0 / (r * r * r * r);

    // truncation remainder: |L^2[u]| <= c_h m(rho)/rho^4 with
    // m(rho) <= m(rho_max) (rho/rho_max)^{1/2}, |J1| <= sqrt(2/(pi z))
    double c_h = 0.0;
    for (int i = 0; i <= 8; ++i) {
        const double rho = rho_max * std::pow(2.0, i);
        c_h = std::max(c_h, std::abs(bessel_op2(sym, rho, R)) * rho * rho * rho * rho /
                                sym.eval(rho));
    }
    c_h *= 1.5;
    const double rem = c_h * std::sqrt(2.0 / (kPi * r)) * sym.eval(rho_max) /
                       (2.0 * std::pow(rho_max, 2.5)) * inv_r4;

    KernelValue out;
    out.value = (ball.value + inv_r4 * tail_quad.value) / (2.0 * kPi);
    out.error = (ball.error + inv_r4 * tail_quad.error + rem) / (2.0 * kPi);
    return out;
}

} // namespace

KernelValue compute_kernel(const KernelProbe& probe, double x1, double x2,
                           double cutoff_scale) {
    const double r = std::hypot(x1, x2);
    if (!(r > 0.0) || !std::isfinite(r))
        throw DomainError("compute_kernel: x must be nonzero and finite");
    if (r < probe.r_min / 10.0 || r > probe.r_max * 10.0)
        throw DomainError("compute_kernel: |x| outside the supported radii range");
    if (probe.component != 1 && probe.component != 2)
        throw DomainError("compute_kernel: component must be 1 or 2");
    const KernelValue rad = kernel_radial(probe, r, cutoff_scale);
    const double dir = (probe.component == 1 ? x1 : x2) / r;
    return {dir * rad.value, rad.error};
}

KernelBoundReport verify_kernel_bounds(const KernelProbe& probe) {
    KernelBoundReport rep;
    const int decades = (int)std::round(std::log10(probe.r_max / probe.r_min));
    const int n = std::max(1, decades * probe.per_decade);

    for (int i = 0; i <= n; ++i) {
        const double r =
            probe.r_min * std::exp(std::log(probe.r_max / probe.r_min) * i / (double)n);
        const double m = probe.symbol.eval_log_radius(-std::log(r));
        const double step = r * 1e-3;
        // K_j(x) = n_j F(|x|): one radial profile and its central difference
        // give the kernel and its gradient at every angle
        const auto F = kernel_radial(probe, r, 1.0);
        const auto Fp = kernel_radial(probe, r + step, 1.0);
        const auto Fm = kernel_radial(probe, r - step, 1.0);
        const double dF = (Fp.value - Fm.value) / (2.0 * step);
        const double a0 = F.value / r;       // transverse part
        const double a1 = dF - F.value / r;  // radial excess
        for (int a = 0; a < probe.angular_samples; ++a) {
            const double phi = 2.0 * kPi * a / probe.angular_samples;
            const double c = probe.component == 1 ? std::cos(phi) : std::sin(phi);
            // |grad K_j|^2 = a0^2 + 2 c^2 a0 a1 + c^2 a1^2
            const double grad =
                std::sqrt(std::max(0.0, a0 * a0 + c * c * a1 * (2.0 * a0 + a1)));
            KernelBoundRow row;
            row.r = r;
            row.angle = phi;
            row.K = c * F.value;
            row.error_estimate = F.error;
            row.ratio_K = std::abs(row.K) * r * r / m;
            row.ratio_gradK = grad * r * r * r / m;
            row.crossover = r > 10.0;
            rep.rows.push_back(row);
        }
    }

    for (const auto& row : rep.rows) {
        if (row.crossover) continue;
        rep.C_K = std::max(rep.C_K, row.ratio_K);
        rep.C_gradK = std::max(rep.C_gradK, row.ratio_gradK);
    }

    // stability: per-radius ratio maxima over the two smallest decades within 10%
    const double lo_cut = probe.r_min * 100.0;
    double kmin = 1e300, kmax = 0.0, gmin = 1e300, gmax = 0.0;
    double cur_r = -1.0, rk = 0.0, rg = 0.0;
    for (const auto& row : rep.rows) {
        if (row.r > lo_cut * (1.0 + 1e-9)) continue;
        if (row.r != cur_r) {
            if (cur_r > 0.0) {
                kmin = std::min(kmin, rk);
                kmax = std::max(kmax, rk);
                gmin = std::min(gmin, rg);
                gmax = std::max(gmax, rg);
            }
            cur_r = row.r;
            rk = rg = 0.0;
        }
        rk = std::max(rk, row.ratio_K);
        rg = std::max(rg, row.ratio_gradK);
    }
    if (cur_r > 0.0) {
        kmin = std::min(kmin, rk);
        kmax = std::max(kmax, rk);
        gmin = std::min(gmin, rg);
        gmax = std::max(gmax, rg);
    }
    rep.stable = kmax > 0.0 && kmax / kmin < 1.1 && gmax / gmin < 1.1;
    rep.passed = rep.stable && std::isfinite(rep.C_K) && std::isfinite(rep.C_gradK) &&
                 rep.C_K > 0.0 && rep.C_gradK > 0.0;
    if (!rep.stable)
        rep.note = "bound ratio varies by >= 10% over the two smallest decades";
    return rep;
}

double estimate_A(const Symbol& symbol) {
    KernelProbe probe;
    probe.symbol = symbol;
    auto rep = verify_kernel_bounds(probe);
    if (!rep.passed)
        throw CertificationError("estimate_A: kernel bound ratios not stable: " + rep.note);
    return std::max(1.0, 64.0 * std::max(rep.C_K, rep.C_gradK));
}

std::string kernel_report_csv(const KernelBoundReport& rep) {
    CsvWriter csv(
        {"r", "angle", "K", "K_bound_ratio", "gradK_bound_ratio", "error_estimate"});
    for (const auto& row : rep.rows)
        csv.row({format_double(row.r), format_double(row.angle), format_double(row.K),
                 format_double(row.ratio_K), format_double(row.ratio_gradK),
                 format_double(row.error_estimate)});
    return csv.str();
}

} // namespace ssqg
