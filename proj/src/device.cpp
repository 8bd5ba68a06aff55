#include "oectsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oectsim {

void DeviceGeometry::validate() const {
    if (!(width_m > 0.0)) throw std::invalid_argument("DeviceGeometry: width must be > 0");
    if (!(length_m > 0.0)) throw std::invalid_argument("DeviceGeometry: length must be > 0");
    if (!(area_factor >= 1.0)) throw std::invalid_argument("DeviceGeometry: area_factor must be >= 1");
}

void MaterialLayer::validate() const {
    if (!(thickness_m > 0.0)) throw std::invalid_argument("MaterialLayer: thickness must be > 0");
    if (!(mobility_m2_per_vs > 0.0)) throw std::invalid_argument("MaterialLayer: mobility must be > 0");
    if (!(vol_capacitance_f_per_m3 > 0.0))
        throw std::invalid_argument("MaterialLayer: volumetric capacitance must be > 0");
}

MaterialLayer spin_coated_layer(double thickness_nm, double mobility_cm2_per_vs,
                                double vol_capacitance_f_per_cm3) {
    MaterialLayer layer;
    layer.thickness_m = thickness_nm * units::kNm;
    layer.mobility_m2_per_vs = mobility_cm2_per_vs * units::kCm2PerVs;
    layer.vol_capacitance_f_per_m3 = vol_capacitance_f_per_cm3 * units::kFPerCm3;
    layer.origin = LayerOrigin::SpinCoated;
    layer.validate();
    return layer;
}

MaterialLayer electropolymerized_layer(double thickness_nm, double mobility_cm2_per_vs,
                                       double vol_capacitance_f_per_cm3, double potential_v) {
    MaterialLayer layer;
    layer.thickness_m = thickness_nm * units::kNm;
    layer.mobility_m2_per_vs = mobility_cm2_per_vs * units::kCm2PerVs;
    layer.vol_capacitance_f_per_m3 = vol_capacitance_f_per_cm3 * units::kFPerCm3;
    layer.origin = LayerOrigin::Electropolymerized;
    layer.ep_potential_v = potential_v;
    layer.validate();
    return layer;
}

DeviceState::DeviceState(DeviceGeometry geometry, std::vector<MaterialLayer> layers, double vth_v)
    : geometry_(geometry), layers_(std::move(layers)), vth_v_(vth_v) {
    geometry_.validate();
    if (layers_.empty()) throw std::invalid_argument("DeviceState: layer stack must be non-empty");
    if (layers_.front().origin != LayerOrigin::SpinCoated)
        throw std::invalid_argument("DeviceState: first layer must be spin-coated");
    for (const auto& layer : layers_) layer.validate();
}

DeviceState DeviceState::with_appended_layer(const MaterialLayer& layer) const {
    std::vector<MaterialLayer> layers = layers_;
    layers.push_back(layer);
    return DeviceState(geometry_, std::move(layers), vth_v_);
}

DeviceState DeviceState::with_layers(std::vector<MaterialLayer> layers) const {
    return DeviceState(geometry_, std::move(layers), vth_v_);
}

double conduction_weight(const DeviceState& state) {
    double sum = 0.0;
    for (const auto& layer : state.layers())
        sum += layer.thickness_m * layer.mobility_m2_per_vs * layer.vol_capacitance_f_per_m3;
    return sum;
}

double total_capacitance(const DeviceState& state) {
    double areal = 0.0;  // F/m^2
    for (const auto& layer : state.layers())
        areal += layer.thickness_m * layer.vol_capacitance_f_per_m3;
    const auto& g = state.geometry();
    return g.area_factor * g.width_m * g.length_m * areal;
}

double drain_current(const DeviceState& state, double vg_v, double vd_v) {
    if (vd_v > 0.0)
        throw std::invalid_argument("drain_current: vd must be <= 0 for p-type depletion operation");
    const double overdrive = state.vth_v() - vg_v;
    if (overdrive <= 0.0) return 0.0;  // fully depleted channel
    const double aspect = state.geometry().width_m / state.geometry().length_m;
    const double k = conduction_weight(state);
    const double vmag = -vd_v;
    double magnitude;
    if (vmag < overdrive) {
        magnitude = aspect * k * (overdrive - 0.5 * vmag) * vmag;  // triode
    } else {
        magnitude = 0.5 * aspect * k * overdrive * overdrive;  // saturation (pinch-off)
    }
    return -magnitude;  // hole current flows with the negative drain bias
}

double transconductance(const DeviceState& state, double vg_v, double vd_v) {
    if (vd_v > 0.0)
        throw std::invalid_argument("transconductance: vd must be <= 0 for p-type depletion operation");
    const double overdrive = state.vth_v() - vg_v;
    if (overdrive <= 0.0) return 0.0;
    const double aspect = state.geometry().width_m / state.geometry().length_m;
    // Triode: |dI/dVg| = (W/L) k |vd|; saturation: (W/L) k (vth - vg).
    return aspect * conduction_weight(state) * std::min(-vd_v, overdrive);
}

std::vector<double> GateSweep::values() const {
    if (points < 1) throw std::invalid_argument("GateSweep: sweep must contain at least one point");
    std::vector<double> vg;
    vg.reserve(static_cast<std::size_t>(points));
    if (points == 1) {
        vg.push_back(start_v);
        return vg;
    }
    const double step = (stop_v - start_v) / static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i) vg.push_back(start_v + step * static_cast<double>(i));
    return vg;
}

PeakGm peak_transconductance(const DeviceState& state, const GateSweep& sweep, double vd_v) {
    const std::vector<double> vgs = sweep.values();
    PeakGm best{-1.0, 0.0};
    for (double vg : vgs) {
        const double gm = transconductance(state, vg, vd_v);
        if (gm > best.gm_s || (gm == best.gm_s && vg < best.vg_v)) best = PeakGm{gm, vg};
    }
    return best;
}

}  // namespace oectsim
