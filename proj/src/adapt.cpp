#include "oectsim/adapt.hpp"

#include <cmath>
#include <stdexcept>

namespace oectsim {

void TuningPolicy::validate() const {
    if (!(target_gm_s > 0.0)) throw std::invalid_argument("TuningPolicy: target must be > 0");
    if (!(step_duration_s > 0.0)) throw std::invalid_argument("TuningPolicy: step duration must be > 0");
    if (!(max_ep_time_s >= step_duration_s))
        throw std::invalid_argument("TuningPolicy: EP budget must cover at least one step");
    if (!(measurement_noise_sigma >= 0.0))
        throw std::invalid_argument("TuningPolicy: measurement noise sigma must be >= 0");
}

void ArraySpec::validate() const {
    if (n_devices < 1) throw std::invalid_argument("ArraySpec: need at least one device");
    if (!(mobility_mean_factor > 0.0))
        throw std::invalid_argument("ArraySpec: mobility mean factor must be > 0");
    if (!(mobility_spread >= 0.0) || !(capacitance_spread >= 0.0))
        throw std::invalid_argument("ArraySpec: spreads must be >= 0");
}

TuneOutcome tune_device(const DeviceState& state, const TuningPolicy& policy,
                        const GrowthModel& model, const RngStream& stream) {
    policy.validate();
    TuneOutcome out{state, StopStatus::Reached, {}};
    // Measurement noise draws live in their own substream so enabling them
    // does not perturb the EP thickness noise sequence.
    RngStream measure_root = stream.fork(1ULL << 32);
    double elapsed = 0.0;
    int step = 0;
    for (;;) {
        double gm = peak_transconductance(out.final_state, policy.sweep, policy.vd_v).gm_s;
        if (policy.measurement_noise_sigma > 0.0) {
            RngStream measure = measure_root.fork(static_cast<std::uint64_t>(step));
            gm *= 1.0 + policy.measurement_noise_sigma * measure.normal();
        }
        out.trace.push_back(StepRecord{elapsed, gm, total_capacitance(out.final_state)});
        if (gm >= policy.target_gm_s) {
            out.status = StopStatus::Reached;
            return out;
        }
        if (elapsed >= policy.max_ep_time_s) {
            out.status = StopStatus::Budget;
            return out;
        }
        RngStream step_rng = stream.fork(static_cast<std::uint64_t>(step));
        out.final_state = apply_ep_step(
            out.final_state, EpCondition{policy.ep_potential_v, policy.step_duration_s}, model,
            &step_rng);
        elapsed += policy.step_duration_s;
        ++step;
    }
}

namespace {

// Mean-preserving log-normal multiplier: E = mean, relative std = spread.
double lognormal_multiplier(double mean, double spread, RngStream& stream) {
    const double z = stream.normal();
    if (spread == 0.0) return mean;
    const double sigma = std::sqrt(std::log1p(spread * spread));
    return mean * std::exp(sigma * z - 0.5 * sigma * sigma);
}

}  // namespace

RngStream array_sample_stream(std::uint64_t seed, int device_index) {
    return RngStream(seed).fork(2 * static_cast<std::uint64_t>(device_index));
}

RngStream array_tune_stream(std::uint64_t seed, int device_index) {
    return RngStream(seed).fork(2 * static_cast<std::uint64_t>(device_index) + 1);
}

DeviceState sample_pristine_device(const DeviceState& base, const ArraySpec& spec,
                                   RngStream& stream) {
    const double mobility_mult = lognormal_multiplier(spec.mobility_mean_factor,
                                                      spec.mobility_spread, stream);
    const double cap_mult = lognormal_multiplier(1.0, spec.capacitance_spread, stream);
    std::vector<MaterialLayer> layers = base.layers();
    for (auto& layer : layers) {
        layer.mobility_m2_per_vs *= mobility_mult;
        layer.vol_capacitance_f_per_m3 *= cap_mult;
    }
    return base.with_layers(std::move(layers));
}

TuningReport tune_array(const DeviceState& base, const ArraySpec& spec, const TuningPolicy& policy,
                        const GrowthModel& model) {
    spec.validate();
    policy.validate();

    TuningReport report;
    report.per_device.reserve(static_cast<std::size_t>(spec.n_devices));
    for (int i = 0; i < spec.n_devices; ++i) {
        RngStream sample_rng = array_sample_stream(spec.seed, i);
        const DeviceState pristine = sample_pristine_device(base, spec, sample_rng);
        TuneOutcome outcome = tune_device(pristine, policy, model, array_tune_stream(spec.seed, i));

        DeviceRecord rec;
        rec.initial_gm_s = outcome.trace.front().gm_s;
        rec.initial_c_f = outcome.trace.front().capacitance_f;
        rec.final_gm_s = outcome.trace.back().gm_s;
        rec.final_c_f = outcome.trace.back().capacitance_f;
        rec.ep_time_s = outcome.ep_time_used_s();
        rec.status = outcome.status;
        rec.trace = std::move(outcome.trace);
        report.per_device.push_back(std::move(rec));
    }

    std::vector<double> gm0, gm1, c0, c1;
    for (const auto& rec : report.per_device) {
        gm0.push_back(rec.initial_gm_s);
        gm1.push_back(rec.final_gm_s);
        c0.push_back(rec.initial_c_f);
        c1.push_back(rec.final_c_f);
    }
    if (report.per_device.size() >= 2) {
        report.gm_before = gaussian_fit(gm0);
        report.gm_after = gaussian_fit(gm1);
        report.c_before = gaussian_fit(c0);
        report.c_after = gaussian_fit(c1);
    } else {
        report.gm_before = GaussianFit{gm0.front(), 0.0};
        report.gm_after = GaussianFit{gm1.front(), 0.0};
        report.c_before = GaussianFit{c0.front(), 0.0};
        report.c_after = GaussianFit{c1.front(), 0.0};
    }
    return report;
}

GaussianFit gaussian_fit(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("gaussian_fit: need at least 2 samples");
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return GaussianFit{mean, std::sqrt(ss / static_cast<double>(samples.size() - 1))};
}

}  // namespace oectsim
