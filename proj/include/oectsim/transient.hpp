#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace oectsim {

// Gate pulse train: rectangular pulses of the given amplitude and width,
// repeated at the given frequency.
struct PulseTrainSpec {
    double amplitude_v = 0.0;
    double width_s = 0.0;
    double frequency_hz = 0.0;
    int n_pulses = 0;

    void validate() const;
};

// Normalized response sampled over the train. Response 1 corresponds to a
// fully charged gate capacitance (maximal ion accumulation), 0 to rest.
struct TransientTrace {
    std::vector<std::pair<double, double>> samples;            // (time s, response)
    std::vector<std::pair<double, double>> pulse_boundaries;   // (start s, end s)

    void validate() const;
};

// First-order RC response with tau = rs*cp: relaxes toward 1 during a pulse
// and toward 0 between pulses, evaluated segment by segment in closed form.
// The trace covers n_pulses full periods, so it ends after the last
// inter-pulse gap.
TransientTrace simulate_pulse_train(double rs_ohm, double cp_f, const PulseTrainSpec& spec,
                                    int samples_per_segment);

// Steady-state swing (max - min) of the normalized response, assessed over
// the final 20% of pulses. Needs at least 3 pulses.
double modulation_depth(const TransientTrace& trace);

struct SpikeCountOptions {
    // Fraction of leading pulses excluded from counting; they cover the
    // initial charging transient. Set to 0 to assess every pulse.
    double exclude_first_fraction = 0.2;
};

struct SpikeReport {
    int count = 0;                  // spikes among assessed pulses
    int assessed = 0;               // pulses actually assessed
    int excluded = 0;               // leading pulses skipped
    double threshold = 0.0;
    std::vector<bool> crossed;      // per-pulse flag, all pulses including excluded
};

// A pulse spikes when the response crosses the threshold upward during the
// pulse (level crossing on the normalized scale, one count per pulse).
SpikeReport spike_count(const TransientTrace& trace, double threshold = 0.5,
                        const SpikeCountOptions& options = {});

}  // namespace oectsim
