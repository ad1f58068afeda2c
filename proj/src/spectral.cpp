#include "ssqg/spectral.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>

#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace ssqg {
namespace {
std::mutex g_plan_mutex; // FFTW planning is not thread-safe
} // namespace

Grid make_grid(int N) {
    if (N < 16 || N % 2 != 0)
        throw DomainError("make_grid: N must be even and at least 16");
    return Grid{N};
}

Fft::Fft(Grid g) : grid_(g) {
    if (g.N < 16) throw DomainError("Fft: invalid grid");
    const size_t n = (size_t)g.N * g.N;
    buf_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fwd_ = fftw_plan_dft_2d(g.N, g.N, reinterpret_cast<fftw_complex*>(buf_),
                            reinterpret_cast<fftw_complex*>(buf_), FFTW_FORWARD,
                            FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(g.N, g.N, reinterpret_cast<fftw_complex*>(buf_),
                            reinterpret_cast<fftw_complex*>(buf_), FFTW_BACKWARD,
                            FFTW_ESTIMATE);
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    if (buf_) fftw_free(buf_);
}

SpectralField Fft::forward(const RealField& f) const {
    if (!(f.grid == grid_)) throw DomainError("Fft::forward: grid mismatch");
    const size_t n = f.v.size();
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(f.v[i]))
            throw NumericalError("Fft::forward: non-finite input value");
        buf_[i] = f.v[i];
    }
    fftw_execute(static_cast<fftw_plan>(fwd_));
    SpectralField F(grid_);
    const double scale = 1.0 / (double)n;
    for (size_t i = 0; i < n; ++i) F.c[i] = buf_[i] * scale;
    return F;
}

RealField Fft::inverse(const SpectralField& F, double* imag_residue) const {
    if (!(F.grid == grid_)) throw DomainError("Fft::inverse: grid mismatch");
    const size_t n = F.c.size();
    std::memcpy(buf_, F.c.data(), n * sizeof(std::complex<double>));
    fftw_execute(static_cast<fftw_plan>(bwd_));
    RealField f(grid_);
    double resid = 0.0;
    for (size_t i = 0; i < n; ++i) {
        f.v[i] = buf_[i].real();
        resid = std::max(resid, std::abs(buf_[i].imag()));
    }
    if (imag_residue) *imag_residue = resid;
    return f;
}

SpectralField apply_lambda(const SpectralField& F) {
    return apply_radial_multiplier(F, [](double r) { return r; });
}

SpectralField apply_inv_lambda(const SpectralField& F) {
    return apply_radial_multiplier(F, [](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
}

SpectralField apply_symbol(const SpectralField& F, const Symbol& s) {
    return apply_radial_multiplier(F, [&s](double r) { return s.eval(r); });
}

VelocityMultiplier::VelocityMultiplier(Grid g, const Symbol& s) : grid_(g) {
    const int N = g.N;
    m1_.resize((size_t)N * N);
    m2_.resize((size_t)N * N);
    for (int j = 0; j < N; ++j) {
        const int k2 = SpectralField::wavenumber(j, N);
        for (int i = 0; i < N; ++i) {
            const int k1 = SpectralField::wavenumber(i, N);
            const size_t idx = (size_t)j * N + i;
            const double rad = std::sqrt((double)k1 * k1 + (double)k2 * k2);
            if (rad == 0.0) {
                m1_[idx] = m2_[idx] = 0.0;
                continue;
            }
            const double w = s.eval(rad) / rad;
            m1_[idx] = std::complex<double>(0.0, -k2 * w);
            m2_[idx] = std::complex<double>(0.0, k1 * w);
        }
    }
}

std::pair<SpectralField, SpectralField> VelocityMultiplier::apply(
    const SpectralField& theta) const {
    if (!(theta.grid == grid_)) throw DomainError("VelocityMultiplier: grid mismatch");
    SpectralField u1(grid_), u2(grid_);
    for (size_t i = 0; i < theta.c.size(); ++i) {
        u1.c[i] = m1_[i] * theta.c[i];
        u2.c[i] = m2_[i] * theta.c[i];
    }
    return {std::move(u1), std::move(u2)};
}

std::pair<SpectralField, SpectralField> velocity_from_theta(const SpectralField& theta,
                                                            const Symbol& s) {
    return VelocityMultiplier(theta.grid, s).apply(theta);
}

SpectralField dealias(const SpectralField& F) {
    SpectralField out = F;
    const int N = F.grid.N;
    const int cut = N / 3;
    for (int j = 0; j < N; ++j) {
        const int k2 = SpectralField::wavenumber(j, N);
        for (int i = 0; i < N; ++i) {
            const int k1 = SpectralField::wavenumber(i, N);
            if (std::abs(k1) > cut || std::abs(k2) > cut) out.c[(size_t)j * N + i] = 0.0;
        }
    }
    return out;
}

std::pair<SpectralField, SpectralField> spectral_gradient(const SpectralField& F) {
    const int N = F.grid.N;
    SpectralField gx(F.grid), gy(F.grid);
    for (int j = 0; j < N; ++j) {
        int k2 = SpectralField::wavenumber(j, N);
        if (j == N / 2) k2 = 0; // Nyquist carries no usable sign
        for (int i = 0; i < N; ++i) {
            int k1 = SpectralField::wavenumber(i, N);
            if (i == N / 2) k1 = 0;
            const size_t idx = (size_t)j * N + i;
            gx.c[idx] = std::complex<double>(0.0, k1) * F.c[idx];
            gy.c[idx] = std::complex<double>(0.0, k2) * F.c[idx];
        }
    }
    return {std::move(gx), std::move(gy)};
}

std::pair<double, double> sup_norms(const RealField& f, const Fft& fft) {
    const auto F = fft.forward(f);
    auto [gx, gy] = spectral_gradient(F);
    const RealField gxr = fft.inverse(gx);
    const RealField gyr = fft.inverse(gy);
    double sup = 0.0, grad = 0.0;
    for (size_t i = 0; i < f.v.size(); ++i) {
        sup = std::max(sup, std::abs(f.v[i]));
        grad = std::max(grad, std::hypot(gxr.v[i], gyr.v[i]));
    }
    return {sup, grad};
}

double max_abs(const RealField& f) {
    double sup = 0.0;
    for (double x : f.v) sup = std::max(sup, std::abs(x));
    return sup;
}

void write_snapshot(const std::string& path, double t, const RealField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open snapshot for writing: " + path);
    out << "SSQG1 N=" << f.grid.N << " t=" << format_double(t) << " fields=theta\n";
    out.write(reinterpret_cast<const char*>(f.v.data()),
              (std::streamsize)(f.v.size() * sizeof(double)));
    if (!out) throw std::ios_base::failure("snapshot write failed: " + path);
}

Snapshot read_snapshot(const std::string& path, int expected_N) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open snapshot: " + path);
    std::string header;
    std::getline(in, header);
    int N = 0;
    double t = 0.0;
    char fields[16] = {0};
    if (std::sscanf(header.c_str(), "SSQG1 N=%d t=%lf fields=%15s", &N, &t, fields) != 3 ||
        std::string(fields) != "theta")
        throw std::ios_base::failure("snapshot header malformed: " + path);
    if (N < 16 || N % 2 != 0)
        throw std::ios_base::failure("snapshot header carries an invalid N: " + path);
    if (expected_N > 0 && N != expected_N)
        throw std::ios_base::failure("snapshot N=" + std::to_string(N) +
                                     " does not match expected N=" +
                                     std::to_string(expected_N) + ": " + path);
    Snapshot snap;
    snap.t = t;
    snap.field = RealField(Grid{N});
    in.read(reinterpret_cast<char*>(snap.field.v.data()),
            (std::streamsize)(snap.field.v.size() * sizeof(double)));
    if (in.gcount() != (std::streamsize)(snap.field.v.size() * sizeof(double)))
        throw std::ios_base::failure("snapshot truncated: " + path);
    return snap;
}

} // namespace ssqg
