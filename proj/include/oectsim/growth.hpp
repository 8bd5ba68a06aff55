#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "oectsim/device.hpp"
#include "oectsim/rng.hpp"

namespace oectsim {

// Requested potential falls outside the calibrated anchor range.
// Extrapolation is never performed.
class CalibrationRangeError : public std::domain_error {
  public:
    CalibrationRangeError(double potential_v, double lo_v, double hi_v);

    double potential_v;
    double lo_v;
    double hi_v;
};

// Piecewise-linear table keyed by deposition potential. Anchors must be
// strictly increasing in potential.
class PotentialTable {
  public:
    PotentialTable() = default;
    explicit PotentialTable(std::vector<std::pair<double, double>> anchors);

    double at(double potential_v) const;  // throws CalibrationRangeError outside anchors
    double lo_v() const { return anchors_.front().first; }
    double hi_v() const { return anchors_.back().first; }
    const std::vector<std::pair<double, double>>& anchors() const { return anchors_; }

  private:
    std::vector<std::pair<double, double>> anchors_;
};

// One potentiostatic electropolymerization step. duration 0 is allowed and
// acts as the identity on the device.
struct EpCondition {
    double potential_v = 0.0;
    double duration_s = 0.0;

    void validate() const;
};

// Calibrated growth behaviour vs deposition potential, plus the mobility
// decay that sets in once the electropolymerized stack grows thick.
// kappa and cap_factor are ratios against the nominal spin-coated material
// stored in the reference fields: what grows in the bath depends on the
// deposition conditions, not on the disorder of the device underneath.
struct GrowthModel {
    PotentialTable rate_nm_per_s;     // deposition rate
    PotentialTable mobility_factor;   // kappa: deposited mobility / reference mobility
    PotentialTable cap_factor;        // deposited C* / reference C*
    double reference_mobility_m2_per_vs = 0.0;
    double reference_vol_capacitance_f_per_m3 = 0.0;
    bool decay_enabled = true;
    double decay_threshold_nm = 0.0;  // cumulative EP thickness where decay starts
    double decay_scale_nm = 1.0;
    double thickness_noise_sigma = 0.0;  // relative std of per-step thickness

    // Mobility multiplier applied to the whole electropolymerized stack at a
    // given cumulative EP thickness.
    double decay_factor(double ep_thickness_nm) const;

    void validate() const;
};

struct MorphologyRecord {
    std::optional<double> grain_size_nm;  // absent for spin-coated films
    double roughness_nm = 0.0;
};

// AFM-style morphology anchors per deposition potential.
struct MorphologyTable {
    PotentialTable grain_size_nm;
    PotentialTable roughness_nm;
    double spin_coated_roughness_nm = 0.0;
};

double deposition_rate(const GrowthModel& model, double potential_v);  // nm/s

MorphologyRecord morphology(const MorphologyTable& table, double potential_v);
MorphologyRecord spin_coated_morphology(const MorphologyTable& table);

// Deposits one electropolymerized layer:
//   thickness = rate(Vp) * duration * (1 + eps), eps ~ Normal(0, noise_sigma)
//   mobility  = kappa(Vp) * reference mobility * decay(total EP thickness)
//   C*        = cap_factor(Vp) * reference C*
// Spin-coated layers are never modified. Previously deposited EP layers are
// re-derated to the decay factor of the new cumulative EP thickness: adding
// material degrades the order of what is already there, which is what makes
// long-EP depression possible. Pass rng = nullptr for noise-free deposition.
DeviceState apply_ep_step(const DeviceState& state, const EpCondition& cond,
                          const GrowthModel& model, RngStream* rng = nullptr);

struct TrajectoryPoint {
    double ep_time_s = 0.0;
    double dgm_rel = 0.0;  // (Gm - Gm0) / Gm0
    double dc_rel = 0.0;   // (C - C0) / C0
};

// Repeats the same EP condition n_steps times and records relative peak-Gm
// and total-capacitance changes against the pristine device. Noise is
// disabled unless a stream is supplied.
std::vector<TrajectoryPoint> gm_capacitance_trajectory(const DeviceState& state0,
                                                       const EpCondition& cond, int n_steps,
                                                       double vd_v, const GateSweep& sweep,
                                                       const GrowthModel& model,
                                                       RngStream* rng = nullptr);

}  // namespace oectsim
