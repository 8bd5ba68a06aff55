#include "oectsim/transient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oectsim {

void PulseTrainSpec::validate() const {
    if (!(amplitude_v > 0.0)) throw std::invalid_argument("PulseTrainSpec: amplitude must be > 0");
    if (!(frequency_hz > 0.0)) throw std::invalid_argument("PulseTrainSpec: frequency must be > 0");
    if (!(width_s > 0.0)) throw std::invalid_argument("PulseTrainSpec: width must be > 0");
    if (!(width_s < 1.0 / frequency_hz))
        throw std::invalid_argument("PulseTrainSpec: width must be shorter than the period");
    if (n_pulses < 1) throw std::invalid_argument("PulseTrainSpec: need at least one pulse");
}

void TransientTrace::validate() const {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].first > samples[i - 1].first))
            throw std::invalid_argument("TransientTrace: sample times must be strictly increasing");
    for (const auto& [t, v] : samples)
        if (v < 0.0 || v > 1.0 + 1e-9)
            throw std::invalid_argument("TransientTrace: response must stay within [0, 1]");
}

TransientTrace simulate_pulse_train(double rs_ohm, double cp_f, const PulseTrainSpec& spec,
                                    int samples_per_segment) {
    if (!(rs_ohm > 0.0) || !(cp_f > 0.0))
        throw std::invalid_argument("simulate_pulse_train: rs and cp must be > 0");
    if (samples_per_segment < 2)
        throw std::invalid_argument("simulate_pulse_train: need at least 2 samples per segment");
    spec.validate();

    const double tau = rs_ohm * cp_f;
    const double period = 1.0 / spec.frequency_hz;
    const double gap = period - spec.width_s;

    TransientTrace trace;
    trace.samples.reserve(static_cast<std::size_t>(spec.n_pulses) * 2 * samples_per_segment + 1);
    trace.pulse_boundaries.reserve(static_cast<std::size_t>(spec.n_pulses));

    double v = 0.0;  // charging fraction at the current segment start
    double t0 = 0.0;
    for (int k = 0; k < spec.n_pulses; ++k) {
        trace.pulse_boundaries.emplace_back(t0, t0 + spec.width_s);
        // charge toward 1 during the pulse, then discharge toward 0
        for (int phase = 0; phase < 2; ++phase) {
            const double target = phase == 0 ? 1.0 : 0.0;
            const double len = phase == 0 ? spec.width_s : gap;
            for (int i = 0; i < samples_per_segment; ++i) {
                const double dt = len * static_cast<double>(i) / samples_per_segment;
                trace.samples.emplace_back(t0 + dt, target + (v - target) * std::exp(-dt / tau));
            }
            v = target + (v - target) * std::exp(-len / tau);
            t0 += len;
        }
    }
    trace.samples.emplace_back(t0, v);
    return trace;
}

namespace {

std::size_t steady_window_first_pulse(std::size_t n_pulses) {
    // final 20% of pulses, at least one
    return n_pulses - std::max<std::size_t>(1, n_pulses / 5);
}

}  // namespace

double modulation_depth(const TransientTrace& trace) {
    const std::size_t n = trace.pulse_boundaries.size();
    if (n < 3) throw std::invalid_argument("modulation_depth: trace must contain at least 3 pulses");
    const double window_start = trace.pulse_boundaries[steady_window_first_pulse(n)].first;
    double lo = 1.0, hi = 0.0;
    for (const auto& [t, v] : trace.samples) {
        if (t < window_start) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

SpikeReport spike_count(const TransientTrace& trace, double threshold,
                        const SpikeCountOptions& options) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw std::invalid_argument("spike_count: threshold must lie in (0, 1)");
    if (!(options.exclude_first_fraction >= 0.0) || !(options.exclude_first_fraction < 1.0))
        throw std::invalid_argument("spike_count: exclude fraction must lie in [0, 1)");

    const auto& pulses = trace.pulse_boundaries;
    SpikeReport report;
    report.threshold = threshold;
    report.excluded = static_cast<int>(std::ceil(options.exclude_first_fraction *
                                                 static_cast<double>(pulses.size())));
    report.crossed.assign(pulses.size(), false);

    // Rising-edge detection: the response only rises while a pulse is on, so
    // scanning consecutive sample pairs inside each pulse window is enough.
    std::size_t s = 1;
    for (std::size_t k = 0; k < pulses.size(); ++k) {
        const auto [start, end] = pulses[k];
        while (s < trace.samples.size() && trace.samples[s].first <= end) {
            if (trace.samples[s].first > start && trace.samples[s - 1].second < threshold &&
                trace.samples[s].second >= threshold) {
                report.crossed[k] = true;
            }
            ++s;
        }
    }

    for (std::size_t k = 0; k < pulses.size(); ++k) {
        if (static_cast<int>(k) < report.excluded) continue;
        ++report.assessed;
        if (report.crossed[k]) ++report.count;
    }
    return report;
}

}  // namespace oectsim
