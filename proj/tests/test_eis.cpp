#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "oectsim/config.hpp"
#include "oectsim/eis.hpp"
#include "oectsim/growth.hpp"
#include "oectsim/rng.hpp"

using namespace oectsim;

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;
const FrequencyGrid kGrid{1e6, 1.0, 10};  // 1 MHz -> 1 Hz

ImpedanceSpectrum with_noise(const ImpedanceSpectrum& clean, double sigma, RngStream rng) {
    std::vector<SpectrumPoint> pts = clean.points();
    for (auto& p : pts) {
        p.z_real_ohm *= 1.0 + sigma * rng.normal();
        p.z_imag_ohm *= 1.0 + sigma * rng.normal();
        if (p.z_imag_ohm > 0.0) p.z_imag_ohm = 0.0;
    }
    return ImpedanceSpectrum(std::move(pts));
}

double max_param_error(const CircuitParams& got, const CircuitParams& truth) {
    return std::max({std::abs(got.rs_ohm - truth.rs_ohm) / truth.rs_ohm,
                     std::abs(got.rp_ohm - truth.rp_ohm) / truth.rp_ohm,
                     std::abs(got.cp_f - truth.cp_f) / truth.cp_f});
}

}  // namespace

TEST_CASE("simulated spectrum limits and apex identity") {
    const CircuitParams params{500.0, 50e3, 10e-9};

    SUBCASE("low-frequency limit approaches Rs + Rp at zero phase") {
        const double f = 1e-9 / (kTwoPi * params.rp_ohm * params.cp_f);
        const auto spectrum = simulate_spectrum(params, std::vector<double>{f});
        const auto b = bode(spectrum);
        CHECK(b[0].modulus_ohm == doctest::Approx(params.rs_ohm + params.rp_ohm).epsilon(1e-9));
        CHECK(std::abs(b[0].phase_deg) < 1e-4);
    }
    SUBCASE("high-frequency limit approaches Rs at zero phase") {
        const double f = 1e9 / (kTwoPi * params.rp_ohm * params.cp_f);
        const auto spectrum = simulate_spectrum(params, std::vector<double>{f});
        const auto b = bode(spectrum);
        CHECK(b[0].modulus_ohm == doctest::Approx(params.rs_ohm).epsilon(1e-9));
        CHECK(std::abs(b[0].phase_deg) < 1e-4);
    }
    SUBCASE("semicircle apex: Re = Rs + Rp/2, Im = -Rp/2") {
        const double f_apex = 1.0 / (kTwoPi * params.rp_ohm * params.cp_f);
        const auto spectrum = simulate_spectrum(params, std::vector<double>{f_apex});
        CHECK(spectrum.points()[0].z_real_ohm ==
              doctest::Approx(params.rs_ohm + params.rp_ohm / 2).epsilon(1e-12));
        CHECK(spectrum.points()[0].z_imag_ohm ==
              doctest::Approx(-params.rp_ohm / 2).epsilon(1e-12));
    }
}

TEST_CASE("bode and nyquist conversions") {
    std::vector<SpectrumPoint> pts{{100.0, 250.0, 0.0}, {10.0, 0.0, -40.0}};
    const ImpedanceSpectrum spectrum(pts);
    const auto b = bode(spectrum);
    CHECK(b[0].modulus_ohm == doctest::Approx(250.0));
    CHECK(b[0].phase_deg == doctest::Approx(0.0));
    CHECK(b[1].modulus_ohm == doctest::Approx(40.0));
    CHECK(b[1].phase_deg == doctest::Approx(-90.0));
    const auto n = nyquist(spectrum);
    CHECK(n[1].second == doctest::Approx(40.0));
}

TEST_CASE("spectrum validation") {
    CHECK_THROWS_AS(ImpedanceSpectrum({{10.0, 1.0, 0.0}, {10.0, 1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(ImpedanceSpectrum({{10.0, 1.0, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(ImpedanceSpectrum({{-5.0, 1.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("log-log slope") {
    SUBCASE("pure capacitor gives -1") {
        std::vector<SpectrumPoint> pts;
        for (double f : kGrid.frequencies()) pts.push_back({f, 0.0, -1.0 / (kTwoPi * f * 1e-8)});
        CHECK(slope_in_band(ImpedanceSpectrum(pts), 5.0, 5e5) == doctest::Approx(-1.0).epsilon(1e-6));
    }
    SUBCASE("pure resistor gives 0") {
        std::vector<SpectrumPoint> pts;
        for (double f : kGrid.frequencies()) pts.push_back({f, 1234.0, 0.0});
        CHECK(slope_in_band(ImpedanceSpectrum(pts), 5.0, 5e5) == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("calibrated device sits in the -1 band below 1 kHz") {
        const ToolkitConfig cfg = default_config();
        const DeviceState dev = make_pristine_device(cfg.device);
        const CircuitParams params{cfg.circuit.rs_ohm, cfg.circuit.rp_ohm, total_capacitance(dev)};

        // independent check: least squares on the closed-form impedance directly
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (double f : kGrid.frequencies()) {
            if (f < 10.0 || f > 1000.0) continue;
            const std::complex<double> z =
                params.rs_ohm + params.rp_ohm / std::complex<double>(1.0, kTwoPi * f * params.rp_ohm * params.cp_f);
            const double x = std::log10(f), y = std::log10(std::abs(z));
            sx += x; sy += y; sxx += x * x; sxy += x * y; ++n;
        }
        const double oracle = (n * sxy - sx * sy) / (n * sxx - sx * sx);

        const double slope = slope_in_band(simulate_spectrum(params, kGrid), 10.0, 1000.0);
        CHECK(slope == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(slope >= -1.0);
        CHECK(slope <= -0.8);
    }
    SUBCASE("too few points in the band is an error") {
        const auto spectrum = simulate_spectrum(CircuitParams{1.0, 2.0, 1e-6}, kGrid);
        CHECK_THROWS_AS(slope_in_band(spectrum, 10.0, 12.0), std::invalid_argument);
    }
}

TEST_CASE("impedance magnitude is non-increasing and Im stays non-positive") {
    RngStream rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
        const CircuitParams params{std::pow(10.0, 1 + 3 * rng.uniform01()),
                                   std::pow(10.0, 4 + 3 * rng.uniform01()),
                                   std::pow(10.0, -9 + 2 * rng.uniform01())};
        const auto spectrum = simulate_spectrum(params, kGrid);  // descending frequency
        double prev = 0.0;
        bool first = true;
        for (const auto& p : spectrum.points()) {
            CHECK(p.z_imag_ohm <= 0.0);
            const double mod = std::hypot(p.z_real_ohm, p.z_imag_ohm);
            if (!first) CHECK(mod >= prev * (1.0 - 1e-12));  // |Z| grows as f drops
            prev = mod;
            first = false;
        }
    }
}

TEST_CASE("noiseless fit recovers the generating parameters") {
    const CircuitParams truth{500.0, 50e3, 10e-9};
    const auto fit = fit_circuit(simulate_spectrum(truth, kGrid));
    CHECK(max_param_error(fit.params, truth) < 1e-3);
    CHECK(fit.residual < 1e-9);

    SUBCASE("objective log is monotone non-increasing") {
        for (std::size_t i = 1; i < fit.objective_log.size(); ++i)
            CHECK(fit.objective_log[i] <= fit.objective_log[i - 1]);
    }
    SUBCASE("idempotence: refitting the fitted model moves parameters < 1e-6") {
        const auto refit = fit_circuit(simulate_spectrum(fit.params, kGrid));
        CHECK(max_param_error(refit.params, fit.params) < 1e-6);
    }
}

TEST_CASE("fit with 2% multiplicative noise: 95th percentile within 5%") {
    const CircuitParams truth{500.0, 50e3, 10e-9};
    const auto clean = simulate_spectrum(truth, kGrid);
    RngStream master(424242);
    std::vector<double> errors;
    for (int trial = 0; trial < 100; ++trial) {
        const auto fit = fit_circuit(with_noise(clean, 0.02, master.fork(trial)));
        errors.push_back(max_param_error(fit.params, truth));
    }
    std::sort(errors.begin(), errors.end());
    CHECK(errors[94] <= 0.05);
}

TEST_CASE("fit is scale invariant") {
    const CircuitParams truth{800.0, 2e5, 4e-9};
    const auto base = simulate_spectrum(truth, kGrid);
    const double k = 7.3;
    std::vector<SpectrumPoint> scaled = base.points();
    for (auto& p : scaled) {
        p.z_real_ohm *= k;
        p.z_imag_ohm *= k;
    }
    const auto fit = fit_circuit(ImpedanceSpectrum(scaled));
    CHECK(fit.params.rs_ohm == doctest::Approx(k * truth.rs_ohm).epsilon(1e-6));
    CHECK(fit.params.rp_ohm == doctest::Approx(k * truth.rp_ohm).epsilon(1e-6));
    CHECK(fit.params.cp_f == doctest::Approx(truth.cp_f / k).epsilon(1e-6));
}

TEST_CASE("fit input validation") {
    SUBCASE("all-real spectrum cannot identify Cp") {
        std::vector<SpectrumPoint> pts;
        for (double f : kGrid.frequencies()) pts.push_back({f, 1000.0, 0.0});
        CHECK_THROWS_AS(fit_circuit(ImpedanceSpectrum(pts)), UnidentifiableSpectrumError);
    }
    SUBCASE("too few points") {
        const auto freqs = std::vector<double>{1e5, 1e4, 1e3, 1e2, 10.0};
        CHECK_THROWS_AS(fit_circuit(simulate_spectrum(CircuitParams{500, 5e4, 1e-8}, freqs)),
                        std::invalid_argument);
    }
    SUBCASE("narrow band") {
        const auto freqs = std::vector<double>{100, 90, 80, 70, 60, 50, 40, 30};
        CHECK_THROWS_AS(fit_circuit(simulate_spectrum(CircuitParams{500, 5e4, 1e-8}, freqs)),
                        std::invalid_argument);
    }
}

TEST_CASE("fitted Cp increases strictly across sequential 0.6 V EP steps") {
    const ToolkitConfig cfg = default_config();
    DeviceState dev = make_pristine_device(cfg.device);
    RngStream rng(cfg.seed);
    double prev_cp = 0.0;
    for (int step = 0; step < 5; ++step) {
        RngStream step_rng = rng.fork(step);
        dev = apply_ep_step(dev, EpCondition{0.6, 2.0}, cfg.growth, &step_rng);
        const CircuitParams params{cfg.circuit.rs_ohm, cfg.circuit.rp_ohm, total_capacitance(dev)};
        const auto fit = fit_circuit(simulate_spectrum(params, kGrid));
        CHECK(fit.params.cp_f > prev_cp);
        prev_cp = fit.params.cp_f;
    }
}
