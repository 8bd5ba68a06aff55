#include "oectsim/growth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace oectsim {

namespace {

std::string range_message(double potential_v, double lo_v, double hi_v) {
    return "potential " + std::to_string(potential_v) + " V is outside the calibrated range [" +
           std::to_string(lo_v) + " V, " + std::to_string(hi_v) + " V]";
}

}  // namespace

CalibrationRangeError::CalibrationRangeError(double potential, double lo, double hi)
    : std::domain_error(range_message(potential, lo, hi)), potential_v(potential), lo_v(lo), hi_v(hi) {}

PotentialTable::PotentialTable(std::vector<std::pair<double, double>> anchors)
    : anchors_(std::move(anchors)) {
    if (anchors_.empty()) throw std::invalid_argument("PotentialTable: needs at least one anchor");
    for (std::size_t i = 1; i < anchors_.size(); ++i) {
        if (!(anchors_[i].first > anchors_[i - 1].first))
            throw std::invalid_argument("PotentialTable: anchors must be strictly increasing in potential");
    }
}

double PotentialTable::at(double potential_v) const {
    if (potential_v < lo_v() || potential_v > hi_v())
        throw CalibrationRangeError(potential_v, lo_v(), hi_v());
    auto hi = std::lower_bound(anchors_.begin(), anchors_.end(), potential_v,
                               [](const auto& a, double v) { return a.first < v; });
    if (hi->first == potential_v) return hi->second;
    auto lo = std::prev(hi);
    const double t = (potential_v - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

void EpCondition::validate() const {
    if (!(duration_s >= 0.0)) throw std::invalid_argument("EpCondition: duration must be >= 0");
}

double GrowthModel::decay_factor(double ep_thickness_nm) const {
    if (!decay_enabled || ep_thickness_nm <= decay_threshold_nm) return 1.0;
    return std::exp(-(ep_thickness_nm - decay_threshold_nm) / decay_scale_nm);
}

void GrowthModel::validate() const {
    for (const auto& [v, rate] : rate_nm_per_s.anchors())
        if (!(rate > 0.0)) throw std::invalid_argument("GrowthModel: deposition rates must be > 0");
    for (const auto& [v, kappa] : mobility_factor.anchors())
        if (!(kappa > 0.0)) throw std::invalid_argument("GrowthModel: mobility factors must be > 0");
    for (const auto& [v, f] : cap_factor.anchors())
        if (!(f > 0.0)) throw std::invalid_argument("GrowthModel: capacitance factors must be > 0");
    if (!(reference_mobility_m2_per_vs > 0.0))
        throw std::invalid_argument("GrowthModel: reference mobility must be > 0");
    if (!(reference_vol_capacitance_f_per_m3 > 0.0))
        throw std::invalid_argument("GrowthModel: reference volumetric capacitance must be > 0");
    if (!(thickness_noise_sigma >= 0.0))
        throw std::invalid_argument("GrowthModel: thickness noise sigma must be >= 0");
    if (decay_enabled && !(decay_scale_nm > 0.0))
        throw std::invalid_argument("GrowthModel: decay scale must be > 0");
}

double deposition_rate(const GrowthModel& model, double potential_v) {
    return model.rate_nm_per_s.at(potential_v);
}

MorphologyRecord morphology(const MorphologyTable& table, double potential_v) {
    MorphologyRecord record;
    record.grain_size_nm = table.grain_size_nm.at(potential_v);
    record.roughness_nm = table.roughness_nm.at(potential_v);
    return record;
}

MorphologyRecord spin_coated_morphology(const MorphologyTable& table) {
    MorphologyRecord record;
    record.roughness_nm = table.spin_coated_roughness_nm;
    return record;
}

DeviceState apply_ep_step(const DeviceState& state, const EpCondition& cond,
                          const GrowthModel& model, RngStream* rng) {
    cond.validate();
    if (cond.duration_s == 0.0) return state;

    const double rate = deposition_rate(model, cond.potential_v);
    double thickness_nm = rate * cond.duration_s;
    if (rng != nullptr && model.thickness_noise_sigma > 0.0) {
        const double eps = rng->normal(0.0, model.thickness_noise_sigma);
        thickness_nm *= std::max(1.0 + eps, 0.01);  // keep the deposit physical
    }

    const double kappa = model.mobility_factor.at(cond.potential_v);
    const double capf = model.cap_factor.at(cond.potential_v);

    double ep_total_nm = thickness_nm;
    for (const auto& layer : state.layers())
        if (layer.origin == LayerOrigin::Electropolymerized)
            ep_total_nm += layer.thickness_m / units::kNm;
    const double decay = model.decay_factor(ep_total_nm);

    // Spin-coated layers are untouched; the EP stack is re-derated to the
    // decay factor of the new cumulative thickness.
    std::vector<MaterialLayer> layers;
    layers.reserve(state.layers().size() + 1);
    for (const auto& layer : state.layers()) {
        MaterialLayer updated = layer;
        if (layer.origin == LayerOrigin::Electropolymerized) {
            updated.mobility_m2_per_vs = model.mobility_factor.at(layer.ep_potential_v) *
                                         model.reference_mobility_m2_per_vs * decay;
        }
        layers.push_back(updated);
    }

    MaterialLayer deposit;
    deposit.thickness_m = thickness_nm * units::kNm;
    deposit.mobility_m2_per_vs = kappa * model.reference_mobility_m2_per_vs * decay;
    deposit.vol_capacitance_f_per_m3 = capf * model.reference_vol_capacitance_f_per_m3;
    deposit.origin = LayerOrigin::Electropolymerized;
    deposit.ep_potential_v = cond.potential_v;
    layers.push_back(deposit);

    return state.with_layers(std::move(layers));
}

std::vector<TrajectoryPoint> gm_capacitance_trajectory(const DeviceState& state0,
                                                       const EpCondition& cond, int n_steps,
                                                       double vd_v, const GateSweep& sweep,
                                                       const GrowthModel& model, RngStream* rng) {
    if (n_steps < 1) throw std::invalid_argument("gm_capacitance_trajectory: n_steps must be >= 1");
    const double gm0 = peak_transconductance(state0, sweep, vd_v).gm_s;
    const double c0 = total_capacitance(state0);

    std::vector<TrajectoryPoint> points;
    points.reserve(static_cast<std::size_t>(n_steps));
    DeviceState state = state0;
    for (int k = 0; k < n_steps; ++k) {
        RngStream step_rng = rng != nullptr ? rng->fork(static_cast<std::uint64_t>(k)) : RngStream(0);
        state = apply_ep_step(state, cond, model, rng != nullptr ? &step_rng : nullptr);
        TrajectoryPoint p;
        p.ep_time_s = cond.duration_s * static_cast<double>(k + 1);
        p.dgm_rel = (peak_transconductance(state, sweep, vd_v).gm_s - gm0) / gm0;
        p.dc_rel = (total_capacitance(state) - c0) / c0;
        points.push_back(p);
    }
    return points;
}

}  // namespace oectsim
