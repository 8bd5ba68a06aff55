#include "oectsim/config.hpp"

#include "oectsim/eis.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace oectsim {

namespace {

using nlohmann::json;

json table_to_json(const PotentialTable& table) {
    json arr = json::array();
    for (const auto& [v, value] : table.anchors()) arr.push_back(json::array({v, value}));
    return arr;
}

PotentialTable table_from_json(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + ": expected an array of [potential, value] pairs");
    std::vector<std::pair<double, double>> anchors;
    for (const auto& entry : arr) {
        if (!entry.is_array() || entry.size() != 2)
            throw ConfigError(where + ": each anchor must be a [potential, value] pair");
        anchors.emplace_back(entry[0].get<double>(), entry[1].get<double>());
    }
    try {
        return PotentialTable(std::move(anchors));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(where + ": " + err.what());
    }
}

double require_number(const json& section, const std::string& key, const std::string& where) {
    if (!section.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!section[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return section[key].get<double>();
}

int require_int(const json& section, const std::string& key, const std::string& where) {
    if (!section.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!section[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return section[key].get<int>();
}

void reject_unknown_keys(const json& section, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : section.items()) {
        if (known.count(key) == 0)
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

}  // namespace

void ToolkitConfig::validate() const {
    make_pristine_device(device);
    growth.validate();
    if (!(morphology.spin_coated_roughness_nm > 0.0))
        throw ConfigError("growth.spin_roughness_nm must be > 0");
    for (const auto& [v, g] : morphology.grain_size_nm.anchors())
        if (!(g > 0.0)) throw ConfigError("growth.grain_size_nm anchors must be > 0");
    for (const auto& [v, r] : morphology.roughness_nm.anchors())
        if (!(r > 0.0)) throw ConfigError("growth.roughness_nm anchors must be > 0");
    CircuitParams{circuit.rs_ohm, circuit.rp_ohm, 1.0}.validate();
    FrequencyGrid{circuit.f_max_hz, circuit.f_min_hz, circuit.points_per_decade}.frequencies();
    if (!(transient.rs_ohm > 0.0)) throw ConfigError("transient.rs_ohm must be > 0");
    if (!(transient.pulse_amplitude_v > 0.0)) throw ConfigError("transient.pulse_amplitude_v must be > 0");
    if (!(transient.pulse_width_s > 0.0)) throw ConfigError("transient.pulse_width_s must be > 0");
    if (transient.samples_per_segment < 2) throw ConfigError("transient.samples_per_segment must be >= 2");
    if (!(transient.spike_threshold > 0.0 && transient.spike_threshold < 1.0))
        throw ConfigError("transient.spike_threshold must lie in (0, 1)");
    if (!(transient.exclude_first_fraction >= 0.0 && transient.exclude_first_fraction < 1.0))
        throw ConfigError("transient.exclude_first_fraction must lie in [0, 1)");
    policy.validate();
    array.validate();
}

ToolkitConfig default_config() {
    ToolkitConfig c;
    c.seed = 1125ULL;

    // W/L = 30/12 um, 200 nm spin-coated stack; area_factor and mobility are
    // calibrated so the pristine device sits at 10 nF total capacitance and
    // 0.4 mS peak transconductance at the default operating point.
    c.device.width_um = 30.0;
    c.device.length_um = 12.0;
    c.device.area_factor = 3.5612535612535616;
    c.device.spin_thickness_nm = 200.0;
    c.device.spin_mobility_cm2_per_vs = 0.5128205128205128;
    c.device.spin_vol_capacitance_f_per_cm3 = 39.0;
    c.device.vth_v = 0.5;

    // Growth anchors: 100 nm and 200 nm after 8 s at 0.6 V and 0.7 V; the
    // outer anchors extend the usable range without changing those two.
    c.growth.rate_nm_per_s = PotentialTable({{0.5, 5.0}, {0.6, 12.5}, {0.7, 25.0}, {0.8, 40.0}});
    c.growth.mobility_factor = PotentialTable({{0.5, 3.0}, {0.6, 2.5}, {0.7, 0.75}, {0.8, 0.4}});
    c.growth.cap_factor = PotentialTable({{0.5, 1.0}, {0.8, 1.0}});
    c.growth.reference_mobility_m2_per_vs = c.device.spin_mobility_cm2_per_vs * units::kCm2PerVs;
    c.growth.reference_vol_capacitance_f_per_m3 =
        c.device.spin_vol_capacitance_f_per_cm3 * units::kFPerCm3;
    c.growth.decay_enabled = true;
    c.growth.decay_threshold_nm = 150.0;
    c.growth.decay_scale_nm = 100.0;
    c.growth.thickness_noise_sigma = 0.04;

    c.morphology.grain_size_nm = PotentialTable({{0.6, 5.0}, {0.7, 9.0}});
    c.morphology.roughness_nm = PotentialTable({{0.6, 4.0}, {0.7, 8.0}});
    c.morphology.spin_coated_roughness_nm = 3.0;

    c.circuit.rs_ohm = 11000.0;
    c.circuit.rp_ohm = 1.0e7;
    c.circuit.f_max_hz = 1.0e6;
    c.circuit.f_min_hz = 1.0;
    c.circuit.points_per_decade = 10;
    c.circuit.v_dc_mv = 100.0;
    c.circuit.v_ac_mv = 20.0;

    c.transient.rs_ohm = 11000.0;
    c.transient.pulse_amplitude_v = 0.2;
    c.transient.pulse_width_s = 1.0e-4;
    c.transient.samples_per_segment = 64;
    c.transient.spike_threshold = 0.5;
    c.transient.exclude_first_fraction = 0.2;

    c.policy.target_gm_s = 1.0e-3;
    c.policy.step_duration_s = 2.0;
    c.policy.max_ep_time_s = 10.0;
    c.policy.ep_potential_v = 0.6;
    c.policy.sweep = GateSweep{-0.2, 0.6, 81};
    c.policy.vd_v = -0.4;
    c.policy.measurement_noise_sigma = 0.0;

    c.array.n_devices = 30;
    c.array.mobility_mean_factor = 1.3;
    c.array.mobility_spread = 0.462;
    c.array.capacitance_spread = 0.03;
    c.array.seed = c.seed;
    return c;
}

ToolkitConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError("config parse error in " + path.string() + ": " + err.what());
    }

    reject_unknown_keys(root, {"seed", "device", "growth", "circuit", "transient", "policy", "array"},
                        "config");
    for (const char* section : {"device", "growth", "circuit", "transient", "policy", "array"})
        if (!root.contains(section)) throw ConfigError(std::string("config: missing section '") + section + "'");

    ToolkitConfig c;
    if (!root.contains("seed") || !root["seed"].is_number_unsigned())
        throw ConfigError("config: 'seed' must be a non-negative integer");
    c.seed = root["seed"].get<std::uint64_t>();

    {
        const json& d = root["device"];
        reject_unknown_keys(d,
                            {"width_um", "length_um", "area_factor", "spin_thickness_nm",
                             "spin_mobility_cm2_per_vs", "spin_vol_capacitance_f_per_cm3", "vth_v"},
                            "device");
        c.device.width_um = require_number(d, "width_um", "device");
        c.device.length_um = require_number(d, "length_um", "device");
        c.device.area_factor = require_number(d, "area_factor", "device");
        c.device.spin_thickness_nm = require_number(d, "spin_thickness_nm", "device");
        c.device.spin_mobility_cm2_per_vs = require_number(d, "spin_mobility_cm2_per_vs", "device");
        c.device.spin_vol_capacitance_f_per_cm3 =
            require_number(d, "spin_vol_capacitance_f_per_cm3", "device");
        c.device.vth_v = require_number(d, "vth_v", "device");
    }
    {
        const json& g = root["growth"];
        reject_unknown_keys(g,
                            {"rate_table_nm_per_s", "mobility_factor", "cap_factor", "decay_enabled",
                             "decay_threshold_nm", "decay_scale_nm", "thickness_noise_sigma",
                             "grain_size_nm", "roughness_nm", "spin_roughness_nm"},
                            "growth");
        if (!g.contains("rate_table_nm_per_s")) throw ConfigError("growth: missing key 'rate_table_nm_per_s'");
        c.growth.rate_nm_per_s = table_from_json(g["rate_table_nm_per_s"], "growth.rate_table_nm_per_s");
        if (!g.contains("mobility_factor")) throw ConfigError("growth: missing key 'mobility_factor'");
        c.growth.mobility_factor = table_from_json(g["mobility_factor"], "growth.mobility_factor");
        if (!g.contains("cap_factor")) throw ConfigError("growth: missing key 'cap_factor'");
        c.growth.cap_factor = table_from_json(g["cap_factor"], "growth.cap_factor");
        if (!g.contains("decay_enabled") || !g["decay_enabled"].is_boolean())
            throw ConfigError("growth.decay_enabled must be a boolean");
        c.growth.decay_enabled = g["decay_enabled"].get<bool>();
        c.growth.decay_threshold_nm = require_number(g, "decay_threshold_nm", "growth");
        c.growth.decay_scale_nm = require_number(g, "decay_scale_nm", "growth");
        c.growth.thickness_noise_sigma = require_number(g, "thickness_noise_sigma", "growth");
        if (!g.contains("grain_size_nm")) throw ConfigError("growth: missing key 'grain_size_nm'");
        c.morphology.grain_size_nm = table_from_json(g["grain_size_nm"], "growth.grain_size_nm");
        if (!g.contains("roughness_nm")) throw ConfigError("growth: missing key 'roughness_nm'");
        c.morphology.roughness_nm = table_from_json(g["roughness_nm"], "growth.roughness_nm");
        c.morphology.spin_coated_roughness_nm = require_number(g, "spin_roughness_nm", "growth");
        // kappa and cap_factor are defined against the nominal spin-coated material
        c.growth.reference_mobility_m2_per_vs =
            c.device.spin_mobility_cm2_per_vs * units::kCm2PerVs;
        c.growth.reference_vol_capacitance_f_per_m3 =
            c.device.spin_vol_capacitance_f_per_cm3 * units::kFPerCm3;
    }
    {
        const json& e = root["circuit"];
        reject_unknown_keys(e, {"rs_ohm", "rp_ohm", "f_max_hz", "f_min_hz", "points_per_decade",
                                "v_dc_mv", "v_ac_mv"},
                            "circuit");
        c.circuit.rs_ohm = require_number(e, "rs_ohm", "circuit");
        c.circuit.rp_ohm = require_number(e, "rp_ohm", "circuit");
        c.circuit.f_max_hz = require_number(e, "f_max_hz", "circuit");
        c.circuit.f_min_hz = require_number(e, "f_min_hz", "circuit");
        c.circuit.points_per_decade = require_int(e, "points_per_decade", "circuit");
        c.circuit.v_dc_mv = require_number(e, "v_dc_mv", "circuit");
        c.circuit.v_ac_mv = require_number(e, "v_ac_mv", "circuit");
    }
    {
        const json& t = root["transient"];
        reject_unknown_keys(t, {"rs_ohm", "pulse_amplitude_v", "pulse_width_s", "samples_per_segment",
                                "spike_threshold", "exclude_first_fraction"},
                            "transient");
        c.transient.rs_ohm = require_number(t, "rs_ohm", "transient");
        c.transient.pulse_amplitude_v = require_number(t, "pulse_amplitude_v", "transient");
        c.transient.pulse_width_s = require_number(t, "pulse_width_s", "transient");
        c.transient.samples_per_segment = require_int(t, "samples_per_segment", "transient");
        c.transient.spike_threshold = require_number(t, "spike_threshold", "transient");
        c.transient.exclude_first_fraction = require_number(t, "exclude_first_fraction", "transient");
    }
    {
        const json& p = root["policy"];
        reject_unknown_keys(p, {"target_gm_ms", "step_duration_s", "max_ep_time_s", "ep_potential_v",
                                "vg_start_v", "vg_stop_v", "vg_points", "vd_v",
                                "measurement_noise_sigma"},
                            "policy");
        c.policy.target_gm_s = require_number(p, "target_gm_ms", "policy") * units::kMilli;
        c.policy.step_duration_s = require_number(p, "step_duration_s", "policy");
        c.policy.max_ep_time_s = require_number(p, "max_ep_time_s", "policy");
        c.policy.ep_potential_v = require_number(p, "ep_potential_v", "policy");
        c.policy.sweep.start_v = require_number(p, "vg_start_v", "policy");
        c.policy.sweep.stop_v = require_number(p, "vg_stop_v", "policy");
        c.policy.sweep.points = require_int(p, "vg_points", "policy");
        c.policy.vd_v = require_number(p, "vd_v", "policy");
        c.policy.measurement_noise_sigma = require_number(p, "measurement_noise_sigma", "policy");
    }
    {
        const json& a = root["array"];
        reject_unknown_keys(a, {"n_devices", "mobility_mean_factor", "mobility_spread",
                                "capacitance_spread"},
                            "array");
        c.array.n_devices = require_int(a, "n_devices", "array");
        c.array.mobility_mean_factor = require_number(a, "mobility_mean_factor", "array");
        c.array.mobility_spread = require_number(a, "mobility_spread", "array");
        c.array.capacitance_spread = require_number(a, "capacitance_spread", "array");
        c.array.seed = c.seed;
    }

    try {
        c.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config rejected: ") + err.what());
    }
    return c;
}

std::string config_to_json(const ToolkitConfig& c) {
    json root;
    root["seed"] = c.seed;
    root["device"] = {{"width_um", c.device.width_um},
                      {"length_um", c.device.length_um},
                      {"area_factor", c.device.area_factor},
                      {"spin_thickness_nm", c.device.spin_thickness_nm},
                      {"spin_mobility_cm2_per_vs", c.device.spin_mobility_cm2_per_vs},
                      {"spin_vol_capacitance_f_per_cm3", c.device.spin_vol_capacitance_f_per_cm3},
                      {"vth_v", c.device.vth_v}};
    root["growth"] = {{"rate_table_nm_per_s", table_to_json(c.growth.rate_nm_per_s)},
                      {"mobility_factor", table_to_json(c.growth.mobility_factor)},
                      {"cap_factor", table_to_json(c.growth.cap_factor)},
                      {"decay_enabled", c.growth.decay_enabled},
                      {"decay_threshold_nm", c.growth.decay_threshold_nm},
                      {"decay_scale_nm", c.growth.decay_scale_nm},
                      {"thickness_noise_sigma", c.growth.thickness_noise_sigma},
                      {"grain_size_nm", table_to_json(c.morphology.grain_size_nm)},
                      {"roughness_nm", table_to_json(c.morphology.roughness_nm)},
                      {"spin_roughness_nm", c.morphology.spin_coated_roughness_nm}};
    root["circuit"] = {{"rs_ohm", c.circuit.rs_ohm},
                       {"rp_ohm", c.circuit.rp_ohm},
                       {"f_max_hz", c.circuit.f_max_hz},
                       {"f_min_hz", c.circuit.f_min_hz},
                       {"points_per_decade", c.circuit.points_per_decade},
                       {"v_dc_mv", c.circuit.v_dc_mv},
                       {"v_ac_mv", c.circuit.v_ac_mv}};
    root["transient"] = {{"rs_ohm", c.transient.rs_ohm},
                         {"pulse_amplitude_v", c.transient.pulse_amplitude_v},
                         {"pulse_width_s", c.transient.pulse_width_s},
                         {"samples_per_segment", c.transient.samples_per_segment},
                         {"spike_threshold", c.transient.spike_threshold},
                         {"exclude_first_fraction", c.transient.exclude_first_fraction}};
    root["policy"] = {{"target_gm_ms", c.policy.target_gm_s / units::kMilli},
                      {"step_duration_s", c.policy.step_duration_s},
                      {"max_ep_time_s", c.policy.max_ep_time_s},
                      {"ep_potential_v", c.policy.ep_potential_v},
                      {"vg_start_v", c.policy.sweep.start_v},
                      {"vg_stop_v", c.policy.sweep.stop_v},
                      {"vg_points", c.policy.sweep.points},
                      {"vd_v", c.policy.vd_v},
                      {"measurement_noise_sigma", c.policy.measurement_noise_sigma}};
    root["array"] = {{"n_devices", c.array.n_devices},
                     {"mobility_mean_factor", c.array.mobility_mean_factor},
                     {"mobility_spread", c.array.mobility_spread},
                     {"capacitance_spread", c.array.capacitance_spread}};
    return root.dump(2);
}

std::string config_hash(const ToolkitConfig& config) {
    const std::string canonical = config_to_json(config);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << "0x" << std::hex << hash;
    return out.str();
}

DeviceState make_pristine_device(const DeviceDefaults& d) {
    DeviceGeometry geometry{d.width_um * units::kUm, d.length_um * units::kUm, d.area_factor};
    const MaterialLayer spin = spin_coated_layer(d.spin_thickness_nm, d.spin_mobility_cm2_per_vs,
                                                 d.spin_vol_capacitance_f_per_cm3);
    return DeviceState(geometry, {spin}, d.vth_v);
}

}  // namespace oectsim
