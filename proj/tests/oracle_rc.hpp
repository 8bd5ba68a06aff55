#pragma once

// Test-only oracle: explicit RK4 integration of dv/dt = (u(t) - v) / tau for
// a rectangular pulse train, independent of the closed-form solver under
// test. Returns the state sampled at the requested times.

#include <cmath>
#include <cstddef>
#include <vector>

#include "oectsim/transient.hpp"

namespace oectsim::testing {

inline double pulse_drive(const PulseTrainSpec& spec, double t) {
    const double period = 1.0 / spec.frequency_hz;
    const double k = std::floor(t / period);
    if (k >= spec.n_pulses) return 0.0;
    return (t - k * period) < spec.width_s ? 1.0 : 0.0;
}

inline std::vector<double> integrate_pulse_train(double rs_ohm, double cp_f,
                                                 const PulseTrainSpec& spec,
                                                 const std::vector<double>& sample_times,
                                                 double max_step_fraction = 1e-3) {
    const double tau = rs_ohm * cp_f;
    const double max_dt = tau * max_step_fraction;
    const double period = 1.0 / spec.frequency_hz;

    // Segment boundaries (pulse edges) so the drive is constant per step.
    std::vector<double> edges;
    for (int k = 0; k < spec.n_pulses; ++k) {
        edges.push_back(k * period);
        edges.push_back(k * period + spec.width_s);
    }
    edges.push_back(spec.n_pulses * period);

    std::vector<double> values;
    values.reserve(sample_times.size());
    double v = 0.0;
    double t = 0.0;
    std::size_t next_sample = 0;
    auto rk4_advance = [&](double target) {
        while (t < target) {
            const double dt = std::min(max_dt, target - t);
            const double u = pulse_drive(spec, t + 0.5 * dt);  // constant within the segment
            const double k1 = (u - v) / tau;
            const double k2 = (u - (v + 0.5 * dt * k1)) / tau;
            const double k3 = (u - (v + 0.5 * dt * k2)) / tau;
            const double k4 = (u - (v + dt * k3)) / tau;
            v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
    };
    for (double edge : edges) {
        while (next_sample < sample_times.size() && sample_times[next_sample] <= edge) {
            rk4_advance(sample_times[next_sample]);
            values.push_back(v);
            ++next_sample;
        }
        rk4_advance(edge);
    }
    while (next_sample < sample_times.size()) {
        rk4_advance(sample_times[next_sample]);
        values.push_back(v);
        ++next_sample;
    }
    return values;
}

}  // namespace oectsim::testing
