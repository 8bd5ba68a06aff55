#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oectsim/device.hpp"
#include "oectsim/growth.hpp"
#include "oectsim/rng.hpp"

namespace oectsim {

// Closed-loop transconductance tuning: measure, compare to target, deposit.
struct TuningPolicy {
    double target_gm_s = 0.0;
    double step_duration_s = 0.0;
    double max_ep_time_s = 0.0;
    double ep_potential_v = 0.0;
    GateSweep sweep;
    double vd_v = 0.0;
    // Relative std of the Gm readout; 0 means an ideal measurement.
    double measurement_noise_sigma = 0.0;

    void validate() const;
};

enum class StopStatus { Reached, Budget };

struct StepRecord {
    double cumulative_time_s = 0.0;
    double gm_s = 0.0;
    double capacitance_f = 0.0;
};

struct TuneOutcome {
    DeviceState final_state;
    StopStatus status = StopStatus::Reached;
    std::vector<StepRecord> trace;  // one record per measurement, pristine included

    double ep_time_used_s() const { return trace.back().cumulative_time_s; }
};

// Measures peak Gm, stops once it reaches the target (status Reached) or the
// EP budget is spent (status Budget); otherwise runs one EP step and repeats.
// Step k draws its thickness noise from stream.fork(k).
TuneOutcome tune_device(const DeviceState& state, const TuningPolicy& policy,
                        const GrowthModel& model, const RngStream& stream);

// Pristine array sampling: per-device mobility is log-normal with mean
// mobility_mean_factor times the base device's and relative std
// mobility_spread; volumetric capacitance gets an independent log-normal
// jitter of relative std capacitance_spread.
struct ArraySpec {
    int n_devices = 0;
    double mobility_mean_factor = 1.0;
    double mobility_spread = 0.0;
    double capacitance_spread = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DeviceRecord {
    double initial_gm_s = 0.0;
    double final_gm_s = 0.0;
    double initial_c_f = 0.0;
    double final_c_f = 0.0;
    double ep_time_s = 0.0;
    StopStatus status = StopStatus::Reached;
    std::vector<StepRecord> trace;
};

struct GaussianFit {
    double mean = 0.0;
    double stddev = 0.0;
};

struct TuningReport {
    std::vector<DeviceRecord> per_device;
    GaussianFit gm_before, gm_after, c_before, c_after;
};

// Stream layout under the master seed: device i samples its pristine state
// from root.fork(2*i) and tunes with root.fork(2*i + 1). Devices are fully
// independent, so any evaluation order gives identical results.
RngStream array_sample_stream(std::uint64_t seed, int device_index);
RngStream array_tune_stream(std::uint64_t seed, int device_index);
DeviceState sample_pristine_device(const DeviceState& base, const ArraySpec& spec,
                                   RngStream& stream);

TuningReport tune_array(const DeviceState& base, const ArraySpec& spec, const TuningPolicy& policy,
                        const GrowthModel& model);

// Moment fit: sample mean and unbiased standard deviation. Needs >= 2 samples.
GaussianFit gaussian_fit(std::span<const double> samples);

}  // namespace oectsim
