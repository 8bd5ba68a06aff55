#pragma once

#include <string>
#include <vector>

#include "oectsim/units.hpp"

namespace oectsim {

// Channel geometry. The capacitive area is width*length scaled by
// area_factor, which covers material deposited over the source/drain
// contacts; the conducting channel itself is width/length only.
struct DeviceGeometry {
    double width_m = 0.0;
    double length_m = 0.0;
    double area_factor = 1.0;

    void validate() const;
};

enum class LayerOrigin { SpinCoated, Electropolymerized };

// One slab of the channel stack, SI units throughout.
struct MaterialLayer {
    double thickness_m = 0.0;
    double mobility_m2_per_vs = 0.0;
    double vol_capacitance_f_per_m3 = 0.0;
    LayerOrigin origin = LayerOrigin::SpinCoated;
    double ep_potential_v = 0.0;  // deposition potential, electropolymerized layers only

    void validate() const;
};

MaterialLayer spin_coated_layer(double thickness_nm, double mobility_cm2_per_vs,
                                double vol_capacitance_f_per_cm3);
MaterialLayer electropolymerized_layer(double thickness_nm, double mobility_cm2_per_vs,
                                       double vol_capacitance_f_per_cm3, double potential_v);

// Layered device description. Immutable after construction; all electrical
// operations are pure functions of it, so sharing across threads is safe.
class DeviceState {
  public:
    DeviceState(DeviceGeometry geometry, std::vector<MaterialLayer> layers, double vth_v);

    const DeviceGeometry& geometry() const { return geometry_; }
    const std::vector<MaterialLayer>& layers() const { return layers_; }
    double vth_v() const { return vth_v_; }

    // Returns a copy with one more layer on top.
    DeviceState with_appended_layer(const MaterialLayer& layer) const;
    // Returns a copy with the stack replaced (same geometry and Vth).
    DeviceState with_layers(std::vector<MaterialLayer> layers) const;

  private:
    DeviceGeometry geometry_;
    std::vector<MaterialLayer> layers_;
    double vth_v_ = 0.0;
};

// Sum over layers of thickness * mobility * C*; the conduction weight that
// the transconductance is proportional to.
double conduction_weight(const DeviceState& state);

// Total gate capacitance: area_factor * W * L * sum(d_i * C*_i).
double total_capacitance(const DeviceState& state);

// Depletion-mode p-type drain current (signed; negative for vd < 0).
// Channel fully depleted (vg >= vth) clamps to zero. Requires vd <= 0.
double drain_current(const DeviceState& state, double vg_v, double vd_v);

// |dI/dVg| at the given bias, evaluated analytically.
double transconductance(const DeviceState& state, double vg_v, double vd_v);

// Linearly spaced gate sweep, endpoints inclusive. points >= 1.
struct GateSweep {
    double start_v = 0.0;
    double stop_v = 0.0;
    int points = 0;

    std::vector<double> values() const;
};

struct PeakGm {
    double gm_s = 0.0;
    double vg_v = 0.0;
};

// Maximum transconductance over the sweep; ties resolve to the lowest Vg.
PeakGm peak_transconductance(const DeviceState& state, const GateSweep& sweep, double vd_v);

}  // namespace oectsim
