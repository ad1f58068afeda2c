#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "ssqg/symbol.hpp"

namespace ssqg {

// Periodic grid on [0, 2pi)^2, N points per dimension, N even.
struct Grid {
    int N = 0;
    double spacing() const { return 2.0 * 3.141592653589793238462643383279502884 / N; }
    bool operator==(const Grid&) const = default;
};

Grid make_grid(int N); // validates N even, >= 16

// N^2 real values, row-major, x fastest.
struct RealField {
    Grid grid;
    std::vector<double> v;

    explicit RealField(Grid g = {}) : grid(g), v((size_t)g.N * g.N, 0.0) {}
    double& at(int ix, int iy) { return v[(size_t)iy * grid.N + ix]; }
    double at(int ix, int iy) const { return v[(size_t)iy * grid.N + ix]; }
};

// Complex coefficients in FFTW layout; index k maps to wavenumber k for
// k < N/2 and k - N otherwise. Mode (0,0) carries the mean value.
struct SpectralField {
    Grid grid;
    std::vector<std::complex<double>> c;

    explicit SpectralField(Grid g = {}) : grid(g), c((size_t)g.N * g.N, 0.0) {}
    static int wavenumber(int idx, int N) { return idx < N / 2 ? idx : idx - N; }
    static int index_of(int k, int N) { return k >= 0 ? k : k + N; }
    std::complex<double>& at(int k1, int k2) {
        return c[(size_t)index_of(k2, grid.N) * grid.N + index_of(k1, grid.N)];
    }
    std::complex<double> at(int k1, int k2) const {
        return c[(size_t)index_of(k2, grid.N) * grid.N + index_of(k1, grid.N)];
    }
};

// Owns FFTW plans and scratch; one instance per thread of control.
class Fft {
  public:
    explicit Fft(Grid g);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    // normalization: coefficient of mode 0 equals the grid mean
    SpectralField forward(const RealField& f) const;
    RealField inverse(const SpectralField& F, double* imag_residue = nullptr) const;
    Grid grid() const { return grid_; }

  private:
    Grid grid_;
    void* fwd_ = nullptr; // fftw_plan
    void* bwd_ = nullptr;
    std::complex<double>* buf_ = nullptr;
};

// Multiplies each coefficient by sigma(|zeta|); sigma(0) is applied to the
// mean mode as given (callers pass 0 for Lambda^{-1} and the velocity map).
template <typename Sigma>
SpectralField apply_radial_multiplier(const SpectralField& F, Sigma&& sigma) {
    SpectralField out(F.grid);
    const int N = F.grid.N;
    for (int j = 0; j < N; ++j) {
        const int k2 = SpectralField::wavenumber(j, N);
        for (int i = 0; i < N; ++i) {
            const int k1 = SpectralField::wavenumber(i, N);
            const double rad = std::sqrt((double)k1 * k1 + (double)k2 * k2);
            out.c[(size_t)j * N + i] = F.c[(size_t)j * N + i] * sigma(rad);
        }
    }
    return out;
}

SpectralField apply_lambda(const SpectralField& F);         // sigma(r) = r
SpectralField apply_inv_lambda(const SpectralField& F);     // sigma(r) = 1/r, mode 0 -> 0
SpectralField apply_symbol(const SpectralField& F, const Symbol& s);

// Precomputed multiplier arrays of u = grad^perp Lambda^{-1} m(Lambda) theta.
class VelocityMultiplier {
  public:
    VelocityMultiplier(Grid g, const Symbol& s);
    std::pair<SpectralField, SpectralField> apply(const SpectralField& theta) const;
    Grid grid() const { return grid_; }

  private:
    Grid grid_;
    std::vector<std::complex<double>> m1_, m2_;
};

std::pair<SpectralField, SpectralField> velocity_from_theta(const SpectralField& theta,
                                                            const Symbol& s);

// 2/3 rule: zeroes every coefficient with max(|k1|, |k2|) > N/3.
SpectralField dealias(const SpectralField& F);

// gradient by spectral differentiation (Nyquist row excluded from derivatives)
std::pair<SpectralField, SpectralField> spectral_gradient(const SpectralField& F);

// (sup |f|, sup |grad f|)
std::pair<double, double> sup_norms(const RealField& f, const Fft& fft);

double max_abs(const RealField& f);

// Snapshot format: "SSQG1 N=<N> t=<t> fields=theta\n" + N^2 little-endian
// binary64, row-major, x fastest.
void write_snapshot(const std::string& path, double t, const RealField& f);
struct Snapshot {
    double t = 0.0;
    RealField field;
};
// expected_N > 0 rejects snapshots whose grid does not match
Snapshot read_snapshot(const std::string& path, int expected_N = 0);

} // namespace ssqg
