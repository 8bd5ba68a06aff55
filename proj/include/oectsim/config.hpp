#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "oectsim/adapt.hpp"
#include "oectsim/device.hpp"
#include "oectsim/growth.hpp"

namespace oectsim {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Default pristine device, in the units a datasheet would use.
struct DeviceDefaults {
    double width_um = 0.0;
    double length_um = 0.0;
    double area_factor = 1.0;
    double spin_thickness_nm = 0.0;
    double spin_mobility_cm2_per_vs = 0.0;
    double spin_vol_capacitance_f_per_cm3 = 0.0;
    double vth_v = 0.0;
};

struct CircuitDefaults {
    double rs_ohm = 0.0;
    double rp_ohm = 0.0;
    double f_max_hz = 0.0;
    double f_min_hz = 0.0;
    int points_per_decade = 0;
    double v_dc_mv = 0.0;  // measurement conditions, carried as metadata only
    double v_ac_mv = 0.0;
};

struct TransientDefaults {
    double rs_ohm = 0.0;
    double pulse_amplitude_v = 0.0;
    double pulse_width_s = 0.0;
    int samples_per_segment = 0;
    double spike_threshold = 0.5;
    double exclude_first_fraction = 0.2;
};

// One config file, one section per module. Flags override config values;
// the environment is never consulted.
struct ToolkitConfig {
    std::uint64_t seed = 0;
    DeviceDefaults device;
    GrowthModel growth;
    MorphologyTable morphology;
    CircuitDefaults circuit;
    TransientDefaults transient;
    TuningPolicy policy;
    ArraySpec array;  // array.seed is filled from the master seed at load

    void validate() const;
};

ToolkitConfig default_config();

// Strict loader: unknown keys anywhere are an error, every section must
// satisfy its module's invariants.
ToolkitConfig load_config(const std::filesystem::path& path);

std::string config_to_json(const ToolkitConfig& config);

// FNV-1a over the canonical JSON form; stable across runs and platforms.
std::string config_hash(const ToolkitConfig& config);

DeviceState make_pristine_device(const DeviceDefaults& defaults);

}  // namespace oectsim
