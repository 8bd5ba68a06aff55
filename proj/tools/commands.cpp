#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "oectsim/adapt.hpp"
#include "oectsim/csv.hpp"
#include "oectsim/eis.hpp"
#include "oectsim/transient.hpp"
#include "oectsim/version.hpp"

namespace oectsim::cli {

namespace {

using nlohmann::json;

// Stream tags so different commands never share random draws.
enum StreamTag : std::uint64_t { kTagEpSchedule = 0x45502d31ULL };

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_manifest(const ToolkitConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs, const std::filesystem::path& out_dir) {
    json manifest;
    manifest["command"] = command;
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = config.seed;
    manifest["toolkit_version"] = kVersion;
    manifest["outputs"] = outputs;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

double parse_positive(const std::string& text, const std::string& what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !(value > 0.0))
        throw UsageError("invalid " + what + " '" + text + "'");
    return value;
}

CircuitParams device_circuit(const ToolkitConfig& config, const DeviceState& device) {
    return CircuitParams{config.circuit.rs_ohm, config.circuit.rp_ohm, total_capacitance(device)};
}

json fit_to_json(const FitResult& fit) {
    json j;
    j["rs_ohm"] = fit.params.rs_ohm;
    j["rp_ohm"] = fit.params.rp_ohm;
    j["cp_f"] = fit.params.cp_f;
    j["residual"] = fit.residual;
    j["iterations"] = fit.iterations;
    return j;
}

}  // namespace

std::vector<EpScheduleSegment> parse_ep_schedule(const std::string& text) {
    std::vector<EpScheduleSegment> schedule;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string segment =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const std::size_t x1 = segment.find('x');
        const std::size_t x2 = x1 == std::string::npos ? std::string::npos : segment.find('x', x1 + 1);
        if (x1 == std::string::npos || x2 == std::string::npos)
            throw UsageError("EP schedule segment '" + segment +
                             "' must look like <potential>x<seconds>x<steps>, e.g. 0.6x2x5");
        EpScheduleSegment seg;
        seg.potential_v = parse_positive(segment.substr(0, x1), "EP potential");
        seg.step_duration_s = parse_positive(segment.substr(x1 + 1, x2 - x1 - 1), "EP step duration");
        const double steps = parse_positive(segment.substr(x2 + 1), "EP step count");
        if (steps != std::floor(steps)) throw UsageError("EP step count must be an integer");
        seg.steps = static_cast<int>(steps);
        schedule.push_back(seg);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (schedule.empty()) throw UsageError("EP schedule is empty");
    return schedule;
}

DeviceState run_ep_schedule(const DeviceState& device, const std::vector<EpScheduleSegment>& schedule,
                            const GrowthModel& model, RngStream stream) {
    DeviceState state = device;
    std::uint64_t step_index = 0;
    for (const auto& segment : schedule) {
        for (int k = 0; k < segment.steps; ++k) {
            RngStream step_rng = stream.fork(step_index++);
            state = apply_ep_step(state, EpCondition{segment.potential_v, segment.step_duration_s},
                                  model, &step_rng);
        }
    }
    return state;
}

void cmd_simulate_transfer(const ToolkitConfig& config, const TransferFlags& flags,
                           const std::filesystem::path& out_dir) {
    if (flags.vg_points < 1) throw UsageError("transfer sweep needs at least one point");
    const GateSweep sweep{flags.vg_start_v, flags.vg_stop_v, flags.vg_points};
    if (flags.vd_v > 0.0) throw UsageError("vd must be <= 0 for p-type depletion operation");

    std::vector<DeviceState> states;
    states.push_back(make_pristine_device(config.device));
    if (!flags.ep_schedule.empty()) {
        const auto schedule = parse_ep_schedule(flags.ep_schedule);
        RngStream stream = RngStream(config.seed).fork(kTagEpSchedule);
        std::uint64_t step_index = 0;
        for (const auto& segment : schedule) {
            for (int k = 0; k < segment.steps; ++k) {
                RngStream step_rng = stream.fork(step_index++);
                states.push_back(apply_ep_step(states.back(),
                                               EpCondition{segment.potential_v, segment.step_duration_s},
                                               config.growth, &step_rng));
            }
        }
    }

    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < states.size(); ++i) {
        CsvTable table;
        table.columns = {"vg_v", "id_a", "gm_s"};
        table.metadata["step"] = std::to_string(i);
        table.metadata["vd_v"] = format_sci(flags.vd_v);
        for (double vg : sweep.values())
            table.rows.push_back({vg, drain_current(states[i], vg, flags.vd_v),
                                  transconductance(states[i], vg, flags.vd_v)});
        char name[48];
        std::snprintf(name, sizeof(name), "transfer_step_%02u.csv", static_cast<unsigned>(i));
        write_csv(out_dir / name, table);
        outputs.emplace_back(name);
    }
    write_manifest(config, "simulate-transfer", outputs, out_dir);
    std::cout << "wrote " << states.size() << " transfer curve(s), pristine peak Gm = "
              << format_sci(peak_transconductance(states.front(), sweep, flags.vd_v).gm_s) << " S\n";
}

void cmd_simulate_eis(const ToolkitConfig& config, const EisFlags& flags,
                      const std::filesystem::path& out_dir) {
    DeviceState device = make_pristine_device(config.device);
    if (!flags.ep_schedule.empty())
        device = run_ep_schedule(device, parse_ep_schedule(flags.ep_schedule), config.growth,
                                 RngStream(config.seed).fork(kTagEpSchedule));
    CircuitParams params = device_circuit(config, device);
    if (flags.cp_f.has_value()) {
        if (!(*flags.cp_f > 0.0)) throw UsageError("cp override must be > 0");
        params.cp_f = *flags.cp_f;
    }

    const FrequencyGrid grid{config.circuit.f_max_hz, config.circuit.f_min_hz,
                             config.circuit.points_per_decade};
    const ImpedanceSpectrum spectrum = simulate_spectrum(params, grid);

    CsvTable table;
    table.columns = {"freq_hz", "z_real_ohm", "z_imag_ohm"};
    table.metadata["v_dc_mv"] = format_sci(config.circuit.v_dc_mv);
    table.metadata["v_ac_mv"] = format_sci(config.circuit.v_ac_mv);
    for (const auto& p : spectrum.points())
        table.rows.push_back({p.freq_hz, p.z_real_ohm, p.z_imag_ohm});
    write_csv(out_dir / "spectrum.csv", table);
    write_manifest(config, "simulate-eis", {"spectrum.csv"}, out_dir);
    std::cout << "wrote spectrum.csv (" << spectrum.size() << " points, Cp = "
              << format_sci(params.cp_f) << " F)\n";
}

void cmd_fit_eis(const ToolkitConfig& config, const FitFlags& flags,
                 const std::filesystem::path& out_dir) {
    const CsvTable table = read_csv(flags.input);
    if (table.columns != std::vector<std::string>{"freq_hz", "z_real_ohm", "z_imag_ohm"})
        throw CsvParseError(flags.input, 1, "expected header 'freq_hz,z_real_ohm,z_imag_ohm'");
    std::vector<SpectrumPoint> points;
    points.reserve(table.rows.size());
    for (const auto& row : table.rows) points.push_back(SpectrumPoint{row[0], row[1], row[2]});
    if (points.empty()) throw CsvParseError(flags.input, 2, "spectrum has no data rows");

    const FitResult fit = fit_circuit(ImpedanceSpectrum(std::move(points), table.metadata), flags.guess);

    write_text(out_dir / "fit.json", fit_to_json(fit).dump(2) + "\n");
    write_manifest(config, "fit-eis", {"fit.json"}, out_dir);
    std::cout << "fit: Rs = " << format_sci(fit.params.rs_ohm) << " Ohm, Rp = "
              << format_sci(fit.params.rp_ohm) << " Ohm, Cp = " << format_sci(fit.params.cp_f)
              << " F (residual " << format_sci(fit.residual) << ", " << fit.iterations
              << " iterations)\n";
}

void cmd_ep_grow(const ToolkitConfig& config, const EpGrowFlags& flags,
                 const std::filesystem::path& out_dir) {
    if (flags.ep_schedule.empty()) throw UsageError("ep-grow requires --schedule");
    const DeviceState pristine = make_pristine_device(config.device);
    const DeviceState grown = run_ep_schedule(pristine, parse_ep_schedule(flags.ep_schedule),
                                              config.growth, RngStream(config.seed).fork(kTagEpSchedule));

    json report;
    report["layers"] = json::array();
    for (const auto& layer : grown.layers()) {
        json row;
        row["origin"] = layer.origin == LayerOrigin::SpinCoated ? "spin_coated" : "electropolymerized";
        row["thickness_nm"] = layer.thickness_m / units::kNm;
        row["mobility_cm2_per_vs"] = layer.mobility_m2_per_vs / units::kCm2PerVs;
        row["vol_capacitance_f_per_cm3"] = layer.vol_capacitance_f_per_m3 / units::kFPerCm3;
        if (layer.origin == LayerOrigin::Electropolymerized) {
            row["ep_potential_v"] = layer.ep_potential_v;
            if (layer.ep_potential_v >= config.morphology.grain_size_nm.lo_v() &&
                layer.ep_potential_v <= config.morphology.grain_size_nm.hi_v()) {
                const MorphologyRecord m = morphology(config.morphology, layer.ep_potential_v);
                row["grain_size_nm"] = *m.grain_size_nm;
                row["roughness_nm"] = m.roughness_nm;
            }
        }
        report["layers"].push_back(row);
    }
    report["total_capacitance_f"] = total_capacitance(grown);
    report["peak_gm_s"] = peak_transconductance(grown, config.policy.sweep, config.policy.vd_v).gm_s;

    write_text(out_dir / "device.json", report.dump(2) + "\n");
    write_manifest(config, "ep-grow", {"device.json"}, out_dir);
    std::cout << "grew " << grown.layers().size() - 1 << " EP layer(s): C = "
              << format_sci(total_capacitance(grown)) << " F, peak Gm = "
              << format_sci(report["peak_gm_s"].get<double>()) << " S\n";
}

void cmd_tune_array(const ToolkitConfig& config, const TuneArrayFlags& flags,
                    const std::filesystem::path& out_dir) {
    if (flags.n_devices < 1) throw UsageError("tune-array needs n >= 1");
    if (!(flags.target_gm_ms > 0.0)) throw UsageError("tune-array target must be > 0");

    ArraySpec spec = config.array;
    spec.n_devices = flags.n_devices;
    spec.seed = config.seed;
    TuningPolicy policy = config.policy;
    policy.target_gm_s = flags.target_gm_ms * units::kMilli;
    policy.ep_potential_v = flags.ep_potential_v;

    const DeviceState base = make_pristine_device(config.device);
    const TuningReport report = tune_array(base, spec, policy, config.growth);

    json j;
    j["per_device"] = json::array();
    for (const auto& rec : report.per_device) {
        json row;
        row["initial_gm_s"] = rec.initial_gm_s;
        row["final_gm_s"] = rec.final_gm_s;
        row["initial_c_f"] = rec.initial_c_f;
        row["final_c_f"] = rec.final_c_f;
        row["ep_time_s"] = rec.ep_time_s;
        row["status"] = rec.status == StopStatus::Reached ? "reached" : "budget";
        json trace = json::array();
        for (const auto& step : rec.trace)
            trace.push_back({{"t_s", step.cumulative_time_s},
                             {"gm_s", step.gm_s},
                             {"c_f", step.capacitance_f}});
        row["trace"] = trace;
        j["per_device"].push_back(row);
    }
    auto fit_json = [](const GaussianFit& g) { return json{{"mean", g.mean}, {"std", g.stddev}}; };
    j["summary"] = {{"gm_before", fit_json(report.gm_before)},
                    {"gm_after", fit_json(report.gm_after)},
                    {"c_before", fit_json(report.c_before)},
                    {"c_after", fit_json(report.c_after)}};
    write_text(out_dir / "report.json", j.dump(2) + "\n");

    CsvTable hist;
    hist.columns = {"device", "gm_initial_s", "gm_final_s", "c_initial_f", "c_final_f", "ep_time_s"};
    for (std::size_t i = 0; i < report.per_device.size(); ++i) {
        const auto& rec = report.per_device[i];
        hist.rows.push_back({static_cast<double>(i), rec.initial_gm_s, rec.final_gm_s, rec.initial_c_f,
                             rec.final_c_f, rec.ep_time_s});
    }
    write_csv(out_dir / "histograms.csv", hist);

    write_manifest(config, "tune-array", {"report.json", "histograms.csv"}, out_dir);
    int budget = 0;
    for (const auto& rec : report.per_device) budget += rec.status == StopStatus::Budget;
    std::cout << "tuned " << report.per_device.size() << " device(s), " << budget
              << " hit the EP budget; final Gm = " << format_sci(report.gm_after.mean) << " +/- "
              << format_sci(report.gm_after.stddev) << " S\n";
}

void cmd_pulse_train(const ToolkitConfig& config, const PulseTrainFlags& flags,
                     const std::filesystem::path& out_dir) {
    if (!(flags.threshold > 0.0) || !(flags.threshold < 1.0))
        throw UsageError("threshold must lie in (0, 1)");
    if (flags.n_pulses < 1) throw UsageError("pulse-train needs at least one pulse");
    if (!(flags.frequency_hz > 0.0)) throw UsageError("frequency must be > 0");

    PulseTrainSpec spec;
    spec.amplitude_v = config.transient.pulse_amplitude_v;
    spec.width_s = flags.width_s.value_or(config.transient.pulse_width_s);
    spec.frequency_hz = flags.frequency_hz;
    spec.n_pulses = flags.n_pulses;
    if (!(spec.width_s > 0.0) || spec.width_s >= 1.0 / spec.frequency_hz)
        throw UsageError("pulse width must be positive and shorter than the period");

    double cp = flags.cp_f.value_or(0.0);
    if (!flags.cp_f.has_value()) {
        DeviceState device = make_pristine_device(config.device);
        if (!flags.ep_schedule.empty())
            device = run_ep_schedule(device, parse_ep_schedule(flags.ep_schedule), config.growth,
                                     RngStream(config.seed).fork(kTagEpSchedule));
        cp = total_capacitance(device);
    } else if (!(cp > 0.0)) {
        throw UsageError("cp override must be > 0");
    }

    const TransientTrace trace =
        simulate_pulse_train(config.transient.rs_ohm, cp, spec, config.transient.samples_per_segment);
    SpikeCountOptions opts;
    opts.exclude_first_fraction = config.transient.exclude_first_fraction;
    const SpikeReport spikes = spike_count(trace, flags.threshold, opts);

    CsvTable table;
    table.columns = {"time_s", "response"};
    table.metadata["rs_ohm"] = format_sci(config.transient.rs_ohm);
    table.metadata["cp_f"] = format_sci(cp);
    table.metadata["frequency_hz"] = format_sci(spec.frequency_hz);
    for (const auto& [t, v] : trace.samples) table.rows.push_back({t, v});
    write_csv(out_dir / "trace.csv", table);

    json j;
    j["threshold"] = spikes.threshold;
    j["n_pulses"] = spec.n_pulses;
    j["excluded"] = spikes.excluded;
    j["assessed"] = spikes.assessed;
    j["count"] = spikes.count;
    j["modulation_depth"] = spec.n_pulses >= 3 ? json(modulation_depth(trace)) : json();
    j["per_pulse"] = json::array();
    for (bool crossed : spikes.crossed) j["per_pulse"].push_back(crossed);
    write_text(out_dir / "spikes.json", j.dump(2) + "\n");

    write_manifest(config, "pulse-train", {"trace.csv", "spikes.json"}, out_dir);
    std::cout << "pulse train at " << format_sci(spec.frequency_hz) << " Hz: " << spikes.count << "/"
              << spikes.assessed << " pulses crossed threshold " << format_sci(spikes.threshold)
              << "\n";
}

void cmd_trajectory(const ToolkitConfig& config, const TrajectoryFlags& flags,
                    const std::filesystem::path& out_dir) {
    if (flags.steps < 1) throw UsageError("trajectory needs at least one step");
    if (!(flags.step_duration_s > 0.0)) throw UsageError("trajectory step duration must be > 0");

    const DeviceState device = make_pristine_device(config.device);
    const auto points = gm_capacitance_trajectory(device,
                                                  EpCondition{flags.potential_v, flags.step_duration_s},
                                                  flags.steps, config.policy.vd_v, config.policy.sweep,
                                                  config.growth);

    CsvTable table;
    table.columns = {"step", "ep_time_s", "dgm_rel", "dc_rel"};
    table.metadata["potential_v"] = format_sci(flags.potential_v);
    for (std::size_t i = 0; i < points.size(); ++i)
        table.rows.push_back({static_cast<double>(i + 1), points[i].ep_time_s, points[i].dgm_rel,
                              points[i].dc_rel});
    write_csv(out_dir / "trajectory.csv", table);
    write_manifest(config, "trajectory", {"trajectory.csv"}, out_dir);
    std::cout << "wrote trajectory.csv (" << points.size() << " steps at "
              << format_sci(flags.potential_v) << " V)\n";
}

}  // namespace oectsim::cli
