#include "oectsim/eis.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace oectsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

}  // namespace

void CircuitParams::validate() const {
    if (!(rs_ohm > 0.0)) throw std::invalid_argument("CircuitParams: rs must be > 0");
    if (!(rp_ohm > 0.0)) throw std::invalid_argument("CircuitParams: rp must be > 0");
    if (!(cp_f > 0.0)) throw std::invalid_argument("CircuitParams: cp must be > 0");
}

std::complex<double> CircuitParams::impedance(double freq_hz) const {
    const std::complex<double> j(0.0, 1.0);
    return rs_ohm + rp_ohm / (1.0 + j * (kTwoPi * freq_hz * rp_ohm * cp_f));
}

std::vector<double> FrequencyGrid::frequencies() const {
    if (!(f_max_hz > 0.0) || !(f_min_hz > 0.0) || f_max_hz <= f_min_hz)
        throw std::invalid_argument("FrequencyGrid: need 0 < f_min < f_max");
    if (points_per_decade < 1)
        throw std::invalid_argument("FrequencyGrid: points_per_decade must be >= 1");
    const double decades = std::log10(f_max_hz / f_min_hz);
    const int n = static_cast<int>(std::lround(decades * points_per_decade));
    std::vector<double> freqs;
    freqs.reserve(static_cast<std::size_t>(n) + 1);
    const double log_max = std::log10(f_max_hz);
    for (int k = 0; k <= n; ++k)
        freqs.push_back(std::pow(10.0, log_max - static_cast<double>(k) / points_per_decade));
    return freqs;
}

ImpedanceSpectrum::ImpedanceSpectrum(std::vector<SpectrumPoint> points,
                                     std::map<std::string, std::string> metadata)
    : points_(std::move(points)), metadata_(std::move(metadata)) {
    if (points_.empty()) throw std::invalid_argument("ImpedanceSpectrum: no points");
    const bool descending = points_.size() > 1 && points_[1].freq_hz < points_[0].freq_hz;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i].freq_hz > 0.0))
            throw std::invalid_argument("ImpedanceSpectrum: frequencies must be > 0");
        if (i > 0) {
            const bool ok = descending ? points_[i].freq_hz < points_[i - 1].freq_hz
                                       : points_[i].freq_hz > points_[i - 1].freq_hz;
            if (!ok) throw std::invalid_argument("ImpedanceSpectrum: frequencies must be strictly monotone");
        }
        if (points_[i].z_imag_ohm > 0.0)
            throw std::invalid_argument("ImpedanceSpectrum: imaginary part must be <= 0 for this circuit class");
    }
}

ImpedanceSpectrum simulate_spectrum(const CircuitParams& params, const FrequencyGrid& grid) {
    const std::vector<double> freqs = grid.frequencies();
    return simulate_spectrum(params, std::span<const double>(freqs));
}

ImpedanceSpectrum simulate_spectrum(const CircuitParams& params, std::span<const double> freqs_hz) {
    params.validate();
    std::vector<SpectrumPoint> points;
    points.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        const std::complex<double> z = params.impedance(f);
        points.push_back(SpectrumPoint{f, z.real(), z.imag()});
    }
    return ImpedanceSpectrum(std::move(points));
}

std::vector<BodePoint> bode(const ImpedanceSpectrum& spectrum) {
    std::vector<BodePoint> result;
    result.reserve(spectrum.size());
    for (const auto& p : spectrum.points()) {
        BodePoint b;
        b.freq_hz = p.freq_hz;
        b.modulus_ohm = std::hypot(p.z_real_ohm, p.z_imag_ohm);
        b.phase_deg = std::atan2(p.z_imag_ohm, p.z_real_ohm) * 180.0 / 3.14159265358979323846;
        result.push_back(b);
    }
    return result;
}

std::vector<std::pair<double, double>> nyquist(const ImpedanceSpectrum& spectrum) {
    std::vector<std::pair<double, double>> result;
    result.reserve(spectrum.size());
    for (const auto& p : spectrum.points()) result.emplace_back(p.z_real_ohm, -p.z_imag_ohm);
    return result;
}

double slope_in_band(const ImpedanceSpectrum& spectrum, double f_lo_hz, double f_hi_hz) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& p : spectrum.points()) {
        if (p.freq_hz < f_lo_hz || p.freq_hz > f_hi_hz) continue;
        const double x = std::log10(p.freq_hz);
        const double y = std::log10(std::hypot(p.z_real_ohm, p.z_imag_ohm));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 3) throw std::invalid_argument("slope_in_band: band must contain at least 3 points");
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

FitDivergenceError::FitDivergenceError(CircuitParams best_params, double res, int iters)
    : std::runtime_error("circuit fit did not converge within the iteration budget"),
      best(best_params),
      residual(res),
      iterations(iters) {}

UnidentifiableSpectrumError::UnidentifiableSpectrumError()
    : std::runtime_error("spectrum is purely resistive: Cp is unidentifiable") {}

namespace {

// Solves the symmetric positive-definite 3x3 system A x = b in place.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (a[col][col] == 0.0) throw std::runtime_error("singular normal equations");
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::array<double, 3> x{};
    for (int r = 2; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < 3; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

struct Objective {
    const ImpedanceSpectrum& spectrum;

    // theta = (ln Rs, ln Rp, ln Cp)
    double value(const std::array<double, 3>& theta) const {
        const CircuitParams p{std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
        double obj = 0.0;
        for (const auto& d : spectrum.points()) {
            const std::complex<double> zm = p.impedance(d.freq_hz);
            const double re = zm.real() - d.z_real_ohm;
            const double im = zm.imag() - d.z_imag_ohm;
            const double w2 = d.z_real_ohm * d.z_real_ohm + d.z_imag_ohm * d.z_imag_ohm;
            obj += (re * re + im * im) / w2;
        }
        return obj;
    }

    // Gauss-Newton normal equations with analytic Jacobian in log-space.
    void normal_equations(const std::array<double, 3>& theta, std::array<std::array<double, 3>, 3>& jtj,
                          std::array<double, 3>& jtr) const {
        const double rs = std::exp(theta[0]);
        const double rp = std::exp(theta[1]);
        const double cp = std::exp(theta[2]);
        jtj = {};
        jtr = {};
        const std::complex<double> j(0.0, 1.0);
        for (const auto& d : spectrum.points()) {
            const double w = kTwoPi * d.freq_hz;
            const std::complex<double> den = 1.0 + j * (w * rp * cp);
            const std::complex<double> zm = rs + rp / den;
            const double weight = 1.0 / std::hypot(d.z_real_ohm, d.z_imag_ohm);
            // d Z / d ln(param)
            const std::complex<double> d_rs = rs;
            const std::complex<double> d_rp = rp / (den * den);
            const std::complex<double> d_cp = -j * w * rp * rp * cp / (den * den);
            const std::array<std::complex<double>, 3> grad{d_rs, d_rp, d_cp};
            const std::complex<double> r = (zm - std::complex<double>(d.z_real_ohm, d.z_imag_ohm));
            for (int a = 0; a < 3; ++a) {
                const double ga_re = grad[a].real() * weight;
                const double ga_im = grad[a].imag() * weight;
                jtr[a] += ga_re * (r.real() * weight) + ga_im * (r.imag() * weight);
                for (int b = a; b < 3; ++b) {
                    jtj[a][b] += ga_re * grad[b].real() * weight + ga_im * grad[b].imag() * weight;
                }
            }
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];
    }
};

CircuitParams initial_guess(const ImpedanceSpectrum& spectrum) {
    const auto& pts = spectrum.points();
    const auto hi = std::max_element(pts.begin(), pts.end(),
                                     [](const auto& a, const auto& b) { return a.freq_hz < b.freq_hz; });
    const auto lo = std::min_element(pts.begin(), pts.end(),
                                     [](const auto& a, const auto& b) { return a.freq_hz < b.freq_hz; });
    const double z_hi = std::hypot(hi->z_real_ohm, hi->z_imag_ohm);
    const double z_lo = std::hypot(lo->z_real_ohm, lo->z_imag_ohm);
    const double rs = std::max(z_hi, 1e-12);
    const double rp = std::max(z_lo - rs, 1e-3 * rs);
    const auto apex = std::min_element(pts.begin(), pts.end(),
                                       [](const auto& a, const auto& b) { return a.z_imag_ohm < b.z_imag_ohm; });
    const double cp = 1.0 / (kTwoPi * apex->freq_hz * rp);
    return CircuitParams{rs, rp, cp};
}

}  // namespace

FitResult fit_circuit(const ImpedanceSpectrum& spectrum, std::optional<CircuitParams> guess,
                      const FitOptions& options) {
    const auto& pts = spectrum.points();
    if (pts.size() < 6) throw std::invalid_argument("fit_circuit: need at least 6 spectrum points");
    double f_lo = pts.front().freq_hz, f_hi = pts.front().freq_hz;
    double z_scale = 0.0, im_scale = 0.0;
    for (const auto& p : pts) {
        f_lo = std::min(f_lo, p.freq_hz);
        f_hi = std::max(f_hi, p.freq_hz);
        z_scale = std::max(z_scale, std::hypot(p.z_real_ohm, p.z_imag_ohm));
        im_scale = std::max(im_scale, std::abs(p.z_imag_ohm));
    }
    if (f_hi / f_lo < 100.0)
        throw std::invalid_argument("fit_circuit: spectrum must span at least 2 decades");
    if (im_scale <= 1e-12 * z_scale) throw UnidentifiableSpectrumError();

    const CircuitParams start = guess.has_value() ? *guess : initial_guess(spectrum);
    start.validate();

    const Objective objective{spectrum};
    std::array<double, 3> theta{std::log(start.rs_ohm), std::log(start.rp_ohm), std::log(start.cp_f)};
    double obj = objective.value(theta);

    FitResult result;
    result.objective_log.push_back(obj);

    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iterations && !converged; ++iter) {
        std::array<std::array<double, 3>, 3> jtj;
        std::array<double, 3> jtr;
        objective.normal_equations(theta, jtj, jtr);

        bool accepted = false;
        for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
            auto damped = jtj;
            for (int a = 0; a < 3; ++a) damped[a][a] += lambda * (jtj[a][a] > 0.0 ? jtj[a][a] : 1.0);
            std::array<double, 3> step{};
            try {
                step = solve3(damped, jtr);
            } catch (const std::runtime_error&) {
                lambda *= 10.0;
                continue;
            }
            const std::array<double, 3> trial{theta[0] - step[0], theta[1] - step[1], theta[2] - step[2]};
            const double trial_obj = objective.value(trial);
            if (trial_obj <= obj) {
                const double step_norm =
                    std::sqrt(step[0] * step[0] + step[1] * step[1] + step[2] * step[2]);
                theta = trial;
                obj = trial_obj;
                result.objective_log.push_back(obj);
                lambda = std::max(lambda * 0.25, 1e-12);
                accepted = true;
                if (step_norm < options.step_tolerance) converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            converged = true;  // damping exhausted: no descent direction left
        }
    }

    result.params = CircuitParams{std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
    result.residual = std::sqrt(obj / static_cast<double>(pts.size()));
    result.iterations = iter;
    if (!converged) throw FitDivergenceError(result.params, result.residual, result.iterations);
    return result;
}

}  // namespace oectsim
