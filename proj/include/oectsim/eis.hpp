#pragma once

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oectsim {

// Series resistance in front of a parallel RC: Z(w) = Rs + Rp / (1 + j w Rp Cp).
// The only supported topology.
struct CircuitParams {
    double rs_ohm = 0.0;
    double rp_ohm = 0.0;
    double cp_f = 0.0;

    void validate() const;
    std::complex<double> impedance(double freq_hz) const;
};

// Logarithmic frequency grid, generated high-to-low to match the sweep
// direction of a typical analyzer run.
struct FrequencyGrid {
    double f_max_hz = 0.0;
    double f_min_hz = 0.0;
    int points_per_decade = 0;

    std::vector<double> frequencies() const;
};

struct SpectrumPoint {
    double freq_hz = 0.0;
    double z_real_ohm = 0.0;
    double z_imag_ohm = 0.0;
};

// Frequency-indexed complex impedance. Frequencies must be strictly
// monotone (either direction); the imaginary part is non-positive for this
// circuit class.
class ImpedanceSpectrum {
  public:
    ImpedanceSpectrum(std::vector<SpectrumPoint> points,
                      std::map<std::string, std::string> metadata = {});

    const std::vector<SpectrumPoint>& points() const { return points_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }
    std::size_t size() const { return points_.size(); }

  private:
    std::vector<SpectrumPoint> points_;
    std::map<std::string, std::string> metadata_;
};

ImpedanceSpectrum simulate_spectrum(const CircuitParams& params, const FrequencyGrid& grid);
ImpedanceSpectrum simulate_spectrum(const CircuitParams& params, std::span<const double> freqs_hz);

struct BodePoint {
    double freq_hz = 0.0;
    double modulus_ohm = 0.0;
    double phase_deg = 0.0;
};

std::vector<BodePoint> bode(const ImpedanceSpectrum& spectrum);

// (Re Z, -Im Z) pairs, ready for a Nyquist plot.
std::vector<std::pair<double, double>> nyquist(const ImpedanceSpectrum& spectrum);

// Least-squares slope of log10|Z| vs log10 f over [f_lo, f_hi]. The band
// must contain at least three grid points.
double slope_in_band(const ImpedanceSpectrum& spectrum, double f_lo_hz, double f_hi_hz);

struct FitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-9;  // relative step size in log-parameter space
};

struct FitResult {
    CircuitParams params;
    double residual = 0.0;  // RMS of |Z_model - Z_data| / |Z_data|
    int iterations = 0;
    std::vector<double> objective_log;  // objective after every accepted step
};

// Iteration budget exhausted before the step converged. Carries the
// best parameters seen so far.
class FitDivergenceError : public std::runtime_error {
  public:
    FitDivergenceError(CircuitParams best, double residual, int iterations);

    CircuitParams best;
    double residual;
    int iterations;
};

// Spectrum has no usable imaginary content, so Cp cannot be identified.
class UnidentifiableSpectrumError : public std::runtime_error {
  public:
    UnidentifiableSpectrumError();
};

// Weighted complex least squares on log-parameters (positivity for free):
// minimizes sum |Z_model(f_i) - Z_data(f_i)|^2 / |Z_data(f_i)|^2 with a
// Levenberg-damped Gauss-Newton iteration. Without a guess, initialization
// reads Rs off the highest-frequency modulus, Rs+Rp off the lowest, and Cp
// from the frequency of the most negative imaginary part.
FitResult fit_circuit(const ImpedanceSpectrum& spectrum,
                      std::optional<CircuitParams> guess = std::nullopt,
                      const FitOptions& options = {});

}  // namespace oectsim
