#include "ssqg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ssqg/errors.hpp"

namespace ssqg {
namespace {

// K15 abscissae on the positive half of the symmetric rule; odd indices are
// the embedded G7 points.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Interval {
    double a, b;
    double value;
    double error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

// One G7/K15 panel with the usual QUADPACK-style error heuristic.
Interval gk15(const std::function<double(double)>& f, double a, double b, int& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    double fv[15];
    fv[7] = f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        fv[i] = f(c - dx);
        fv[14 - i] = f(c + dx);
    }
    evals += 15;

    double resk = kWgk[7] * fv[7];
    double resabs = kWgk[7] * std::abs(fv[7]);
    for (int i = 0; i < 7; ++i) {
        resk += kWgk[i] * (fv[i] + fv[14 - i]);
        resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
    }
    double resg = kWg[3] * fv[7];
    for (int i = 0; i < 3; ++i)
        resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);

    const double mean = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fv[7] - mean);
    for (int i = 0; i < 7; ++i)
        resasc += kWgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));

    double err = std::abs(resk - resg) * std::abs(h);
    resk *= h;
    resabs *= std::abs(h);
    resasc *= std::abs(h);

    if (!std::isfinite(resk)) {
        std::ostringstream msg;
        msg << "integrate: integrand produced non-finite values on [" << a << ", " << b
            << "]";
        throw NumericalError(msg.str());
    }
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double round = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
    err = std::max(err, round);
    return {a, b, resk, err};
}

} // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
    QuadratureResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    if (!(std::isfinite(a) && std::isfinite(b)))
        throw DomainError("integrate: non-finite interval");

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double p : opts.breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Interval> heap; // max-heap on error
    heap.reserve(64);
    int evals = 0;
    double value = 0.0, error = 0.0;
    auto push = [&](const Interval& iv) {
        value += iv.value;
        error += iv.error;
        heap.push_back(iv);
        std::push_heap(heap.begin(), heap.end());
    };
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i] < cuts[i + 1]) push(gk15(f, cuts[i], cuts[i + 1], evals));

    while (true) {
        const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
        if (error <= tol) return {value, error, evals, true};
        if ((int)heap.size() >= opts.max_intervals || heap.empty()) {
            res = {value, error, evals, false};
            if (opts.throw_on_failure) {
                std::ostringstream msg;
                msg << "integrate: tolerance not reached on [" << a << ", " << b
                    << "]: error=" << error << " requested=" << tol
                    << " intervals=" << heap.size() << " evals=" << evals;
                throw NumericalError(msg.str());
            }
            return res;
        }
        std::pop_heap(heap.begin(), heap.end());
        const Interval iv = heap.back();
        heap.pop_back();
        value -= iv.value;
        error -= iv.error;
        const double mid = 0.5 * (iv.a + iv.b);
        if (mid <= iv.a || mid >= iv.b) {
            // interval at rounding limit; keep its value, drop its error claim
            value += iv.value;
            heap.push_back({iv.a, iv.b, iv.value, 0.0});
            std::push_heap(heap.begin(), heap.end());
            continue;
        }
        push(gk15(f, iv.a, mid, evals));
        push(gk15(f, mid, iv.b, evals));
    }
}

} // namespace ssqg
