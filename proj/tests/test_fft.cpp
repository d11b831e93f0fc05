#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

#include "oracles.hpp"
#include "vispro/common.hpp"
#include "vispro/fft.hpp"

using vispro::Complex;

namespace {

double l2_relative_error(const std::vector<Complex>& got,
                         const std::vector<Complex>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += std::norm(got[i] - want[i]);
        den += std::norm(want[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::vector<Complex> random_signal(vispro::Rng& rng, std::size_t n) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = Complex{vispro::uniform(rng, -1.0, 1.0),
                                  vispro::uniform(rng, -1.0, 1.0)};
    return x;
}

}  // namespace

TEST_CASE("dft oracle matches hand-computed spectra", "[fft]") {
    const std::vector<Complex> constant{{1, 0}, {1, 0}, {1, 0}, {1, 0}};
    auto spectrum = oracle::dft(constant);
    CHECK(std::abs(spectrum[0] - Complex{4, 0}) < 1e-12);
    for (int k = 1; k < 4; ++k) CHECK(std::abs(spectrum[k]) < 1e-12);

    const std::vector<Complex> impulse{{1, 0}, {0, 0}, {0, 0}, {0, 0}};
    spectrum = oracle::dft(impulse);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(spectrum[k] - Complex{1, 0}) < 1e-12);

    const std::vector<Complex> sine{{0, 0}, {1, 0}, {0, 0}, {-1, 0}};
    spectrum = oracle::dft(sine);
    CHECK(std::abs(spectrum[0]) < 1e-12);
    CHECK(std::abs(spectrum[1] - Complex{0, -2}) < 1e-12);
    CHECK(std::abs(spectrum[2]) < 1e-12);
    CHECK(std::abs(spectrum[3] - Complex{0, 2}) < 1e-12);
}

TEST_CASE("fft matches the oracle on fixed cases", "[fft]") {
    const std::vector<Complex> constant{{1, 0}, {1, 0}, {1, 0}, {1, 0}};
    const auto spectrum = vispro::fft(constant, 4);
    CHECK(std::abs(spectrum[0] - Complex{4, 0}) < 1e-12);
    for (int k = 1; k < 4; ++k) CHECK(std::abs(spectrum[k]) < 1e-12);

    vispro::Rng rng(7);
    const auto x = random_signal(rng, 128);
    CHECK(l2_relative_error(vispro::fft(x, 128), oracle::dft(x)) < 1e-9);
}

TEST_CASE("fft zero-pads short inputs", "[fft]") {
    vispro::Rng rng(11);
    auto x = random_signal(rng, 100);
    auto padded = x;
    padded.resize(128, Complex{0, 0});
    const auto a = vispro::fft(x, 128);
    const auto b = vispro::fft(padded, 128);
    CHECK(l2_relative_error(a, b) == 0.0);
    CHECK(l2_relative_error(a, oracle::dft(padded)) < 1e-9);
}

TEST_CASE("fft rejects non-power-of-two sizes", "[fft]") {
    const std::vector<Complex> x{{1, 0}};
    CHECK_THROWS_AS(vispro::fft(x, 12), vispro::UserError);
    CHECK_THROWS_AS(vispro::fft(x, 0), vispro::UserError);
}

TEST_CASE("fft agrees with the oracle across the seeded corpus", "[fft][corpus]") {
    vispro::Rng rng(2024);
    for (const std::size_t size : {8UL, 32UL, 128UL, 1024UL}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto x = random_signal(rng, size);
            const auto fast = vispro::fft(x, size);
            const auto slow = oracle::dft(x);
            REQUIRE(l2_relative_error(fast, slow) < 1e-9);

            // Parseval: sum |x|^2 == (1/N) sum |X|^2
            double time_energy = 0.0, freq_energy = 0.0;
            for (const auto& v : x) time_energy += std::norm(v);
            for (const auto& v : fast) freq_energy += std::norm(v);
            freq_energy /= static_cast<double>(size);
            REQUIRE(oracle::relative_gap(time_energy, freq_energy) < 1e-9);
        }
    }
}
