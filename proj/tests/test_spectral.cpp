#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "ssqg/errors.hpp"
#include "ssqg/spectral.hpp"

using namespace ssqg;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

RealField field_from(const Grid& g, double (*fn)(double, double)) {
    RealField f(g);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i)
            f.at(i, j) = fn(2.0 * kPi * i / g.N, 2.0 * kPi * j / g.N);
    return f;
}

RealField random_smooth_field(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&rng]() { return (double)(rng() >> 11) * 0x1.0p-53 - 0.5; };
    Fft fft(g);
    SpectralField F(g);
    for (int k2 = -5; k2 <= 5; ++k2)
        for (int k1 = -5; k1 <= 5; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            if (k2 < 0 || (k2 == 0 && k1 < 0)) continue;
            const double re = uni(), im = uni();
            F.at(k1, k2) = {re, im};
            F.at(-k1, -k2) = {re, -im};
        }
    return fft.inverse(F);
}
} // namespace

TEST_CASE("cos(3x) transforms to the conjugate pair at (±3, 0)") {
    const Grid g = make_grid(32);
    Fft fft(g);
    const auto f = field_from(g, [](double x, double) { return std::cos(3.0 * x); });
    const auto F = fft.forward(f);
    CHECK(std::abs(F.at(3, 0) - std::complex<double>(0.5, 0.0)) < 1e-13);
    CHECK(std::abs(F.at(-3, 0) - std::complex<double>(0.5, 0.0)) < 1e-13);
    double rest = 0.0;
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            const int k1 = SpectralField::wavenumber(i, g.N);
            const int k2 = SpectralField::wavenumber(j, g.N);
            if (k2 == 0 && std::abs(k1) == 3) continue;
            rest = std::max(rest, std::abs(F.c[(size_t)j * g.N + i]));
        }
    CHECK(rest < 1e-14);
}

TEST_CASE("round-trip identity and Parseval on a random smooth field") {
    const Grid g = make_grid(64);
    Fft fft(g);
    const auto f = random_smooth_field(g, 42);
    const auto F = fft.forward(f);
    double resid = 0.0;
    const auto back = fft.inverse(F, &resid);
    double max_err = 0.0, max_val = 0.0;
    double grid_ms = 0.0;
    for (size_t i = 0; i < f.v.size(); ++i) {
        max_err = std::max(max_err, std::abs(back.v[i] - f.v[i]));
        max_val = std::max(max_val, std::abs(f.v[i]));
        grid_ms += f.v[i] * f.v[i];
    }
    grid_ms /= (double)f.v.size();
    CHECK(max_err <= 1e-12 * max_val);
    CHECK(resid <= 1e-12 * max_val);
    double coef_ms = 0.0;
    for (const auto& z : F.c) coef_ms += std::norm(z);
    CHECK(grid_ms == doctest::Approx(coef_ms).epsilon(1e-12));
}

TEST_CASE("mode-0 coefficient is the mean value") {
    const Grid g = make_grid(16);
    Fft fft(g);
    RealField f(g);
    for (auto& v : f.v) v = 2.75;
    const auto F = fft.forward(f);
    CHECK(F.at(0, 0).real() == doctest::Approx(2.75).epsilon(1e-15));
}

TEST_CASE("non-finite grid values are a numerical error") {
    const Grid g = make_grid(16);
    Fft fft(g);
    RealField f(g);
    f.v[3] = std::nan("");
    CHECK_THROWS_AS(fft.forward(f), NumericalError);
}

TEST_CASE("Lambda multiplies cos(3x) by 3, and inv(Lambda) inverts on mean-free fields") {
    const Grid g = make_grid(32);
    Fft fft(g);
    const auto f = field_from(g, [](double x, double) { return std::cos(3.0 * x); });
    const auto F = fft.forward(f);
    const auto Lf = fft.inverse(apply_lambda(F));
    for (int i = 0; i < g.N; ++i)
        CHECK(Lf.at(i, 5) == doctest::Approx(3.0 * f.at(i, 5)).epsilon(1e-12));

    const auto rf = random_smooth_field(g, 7);
    const auto R = fft.forward(rf);
    const auto round = fft.inverse(apply_inv_lambda(apply_lambda(R)));
    for (size_t i = 0; i < rf.v.size(); ++i)
        CHECK(round.v[i] == doctest::Approx(rf.v[i]).epsilon(1e-11));
}

TEST_CASE("constant-one symbol acts as the identity multiplier") {
    const Grid g = make_grid(32);
    Fft fft(g);
    const auto f = random_smooth_field(g, 9);
    const auto F = fft.forward(f);
    const auto MF = apply_symbol(F, Symbol::constant_one());
    for (size_t i = 0; i < F.c.size(); ++i) CHECK(MF.c[i] == F.c[i]);
}

TEST_CASE("velocity of sin(x) is (0, cos(x)) for m == 1") {
    const Grid g = make_grid(32);
    Fft fft(g);
    const auto f = field_from(g, [](double x, double) { return std::sin(x); });
    auto [u1h, u2h] = velocity_from_theta(fft.forward(f), Symbol::constant_one());
    const auto u1 = fft.inverse(u1h);
    const auto u2 = fft.inverse(u2h);
    for (int j = 0; j < g.N; j += 5)
        for (int i = 0; i < g.N; i += 3) {
            const double x = 2.0 * kPi * i / g.N;
            CHECK(std::abs(u1.at(i, j)) < 1e-13);
            CHECK(u2.at(i, j) == doctest::Approx(std::cos(x)).epsilon(1e-12));
        }
}

TEST_CASE("velocity is divergence-free at the coefficient level") {
    const Grid g = make_grid(64);
    Fft fft(g);
    const auto f = random_smooth_field(g, 21);
    const auto T = fft.forward(f);
    auto [u1h, u2h] = velocity_from_theta(T, Symbol::loglog_power(0.5));
    double div = 0.0;
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            const int k1 = SpectralField::wavenumber(i, g.N);
            const int k2 = SpectralField::wavenumber(j, g.N);
            const auto d = std::complex<double>(0.0, k1) * u1h.c[(size_t)j * g.N + i] +
                           std::complex<double>(0.0, k2) * u2h.c[(size_t)j * g.N + i];
            div = std::max(div, std::abs(d));
        }
    CHECK(div < 1e-14);
    CHECK(std::abs(u1h.at(0, 0)) == 0.0);
    CHECK(std::abs(u2h.at(0, 0)) == 0.0);
}

TEST_CASE("m(Lambda) commutes with the m == 1 velocity map, coefficient-wise") {
    const Grid g = make_grid(32);
    Fft fft(g);
    const auto T = fft.forward(random_smooth_field(g, 33));
    const auto s = Symbol::loglog_power(0.9);
    auto [a1, a2] = velocity_from_theta(T, s);
    auto [b1, b2] = velocity_from_theta(apply_symbol(T, s), Symbol::constant_one());
    // equality up to the reassociation of one complex multiplication
    double worst = 0.0;
    for (size_t i = 0; i < T.c.size(); ++i) {
        worst = std::max(worst, std::abs(a1.c[i] - b1.c[i]));
        worst = std::max(worst, std::abs(a2.c[i] - b2.c[i]));
    }
    CHECK(worst <= 4.0 * std::numeric_limits<double>::epsilon());
}

TEST_CASE("dealias zeroes the upper third and is idempotent") {
    const Grid g = make_grid(32);
    SpectralField F(g);
    F.at(g.N / 2 - 1, 0) = {1.0, 0.0};
    F.at(1, 1) = {0.5, -0.25};
    const auto D = dealias(F);
    CHECK(std::abs(D.at(g.N / 2 - 1, 0)) == 0.0);
    CHECK(D.at(1, 1) == F.at(1, 1));
    const auto DD = dealias(D);
    for (size_t i = 0; i < D.c.size(); ++i) CHECK(DD.c[i] == D.c[i]);
}

TEST_CASE("sup_norms on the contract examples") {
    const Grid g = make_grid(64);
    Fft fft(g);
    {
        const auto f = field_from(g, [](double x, double) { return std::cos(x); });
        const auto [sup, grad] = sup_norms(f, fft);
        CHECK(sup == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(grad == doctest::Approx(1.0).epsilon(1e-10));
    }
    {
        RealField f(g);
        for (auto& v : f.v) v = -0.75;
        const auto [sup, grad] = sup_norms(f, fft);
        CHECK(sup == doctest::Approx(0.75).epsilon(1e-15));
        CHECK(grad < 1e-12);
    }
    {
        const auto f = field_from(g, [](double x, double) { return std::sin(3.0 * x); });
        const auto [sup, grad] = sup_norms(f, fft);
        CHECK(sup == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(grad == doctest::Approx(3.0).epsilon(1e-10));
    }
}

TEST_CASE("snapshot round-trip and mismatch rejection") {
    const Grid g = make_grid(16);
    const auto f = random_smooth_field(g, 3);
    const auto dir = std::filesystem::temp_directory_path() / "ssqg_snap_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "snap.ssqg").string();
    write_snapshot(path, 1.25, f);
    const auto snap = read_snapshot(path);
    CHECK(snap.t == 1.25);
    REQUIRE(snap.field.grid.N == 16);
    for (size_t i = 0; i < f.v.size(); ++i) CHECK(snap.field.v[i] == f.v[i]);
    CHECK_THROWS_AS(read_snapshot(path, 32), std::ios_base::failure);

    // truncated payload must be rejected
    {
        std::string bytes;
        {
            std::ifstream in(path, std::ios::binary);
            bytes.assign(std::istreambuf_iterator<char>(in), {});
        }
        const auto bad = (dir / "bad.ssqg").string();
        std::ofstream out(bad, std::ios::binary);
        out.write(bytes.data(), (std::streamsize)(bytes.size() / 2));
        out.close();
        CHECK_THROWS_AS(read_snapshot(bad), std::ios_base::failure);
    }
    std::filesystem::remove_all(dir);
}
