#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "oectsim/csv.hpp"
#include "oectsim/eis.hpp"
#include "oectsim/version.hpp"

namespace {

using namespace oectsim;
using namespace oectsim::cli;

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
};

ToolkitConfig resolve_config(const GlobalFlags& flags) {
    ToolkitConfig config = flags.config_path.empty() ? default_config() : load_config(flags.config_path);
    if (flags.seed.has_value()) {
        config.seed = *flags.seed;
        config.array.seed = *flags.seed;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OECT electropolymerization simulation toolkit"};
    app.set_version_flag("--version", oectsim::kVersion);
    app.require_subcommand(1);

    GlobalFlags global;
    std::uint64_t seed_flag = 0;
    app.add_option("--config", global.config_path, "path to a toolkit config file (JSON)");
    auto* seed_opt = app.add_option("--seed", seed_flag, "master seed override");
    app.add_option("--out", global.out_dir, "output directory (created if missing)");
    app.fallthrough();

    TransferFlags transfer;
    auto* cmd_transfer = app.add_subcommand("simulate-transfer", "transfer curve (Vg, Id, Gm) CSV");
    cmd_transfer->add_option("--vg-start", transfer.vg_start_v, "sweep start (V)");
    cmd_transfer->add_option("--vg-stop", transfer.vg_stop_v, "sweep stop (V)");
    cmd_transfer->add_option("--vg-points", transfer.vg_points, "sweep point count");
    cmd_transfer->add_option("--vd", transfer.vd_v, "drain bias (V, <= 0)");
    cmd_transfer->add_option("--ep-schedule", transfer.ep_schedule,
                             "EP schedule, e.g. 0.6x2x5: one curve per step");

    EisFlags eis;
    auto* cmd_eis = app.add_subcommand("simulate-eis", "impedance spectrum CSV");
    cmd_eis->add_option("--ep-schedule", eis.ep_schedule, "EP schedule applied before measuring");
    double eis_cp = 0.0;
    auto* eis_cp_opt = cmd_eis->add_option("--cp", eis_cp, "capacitance override (F)");

    FitFlags fit;
    auto* cmd_fit = app.add_subcommand("fit-eis", "fit Rs + (Rp || Cp) to a spectrum CSV");
    cmd_fit->add_option("input", fit.input, "spectrum CSV file")->required();
    double g_rs = 0.0, g_rp = 0.0, g_cp = 0.0;
    auto* g_rs_opt = cmd_fit->add_option("--rs0", g_rs, "initial Rs guess (Ohm)");
    auto* g_rp_opt = cmd_fit->add_option("--rp0", g_rp, "initial Rp guess (Ohm)");
    auto* g_cp_opt = cmd_fit->add_option("--cp0", g_cp, "initial Cp guess (F)");

    EpGrowFlags grow;
    auto* cmd_grow = app.add_subcommand("ep-grow", "apply an EP schedule, report the stack");
    cmd_grow->add_option("--schedule", grow.ep_schedule, "EP schedule, e.g. 0.7x7.2x1");

    TuneArrayFlags tune;
    auto* cmd_tune = app.add_subcommand("tune-array", "closed-loop Gm tuning of a device array");
    cmd_tune->add_option("--n", tune.n_devices, "number of devices");
    cmd_tune->add_option("--target", tune.target_gm_ms, "target peak Gm (mS)");
    cmd_tune->add_option("--potential", tune.ep_potential_v, "EP potential (V)");

    PulseTrainFlags pulse;
    auto* cmd_pulse = app.add_subcommand("pulse-train", "gate pulse train response and spike count");
    cmd_pulse->add_option("--frequency", pulse.frequency_hz, "pulse frequency (Hz)")->required();
    cmd_pulse->add_option("--n-pulses", pulse.n_pulses, "number of pulses")->required();
    double pulse_cp = 0.0, pulse_width = 0.0;
    auto* pulse_cp_opt = cmd_pulse->add_option("--cp", pulse_cp, "capacitance override (F)");
    auto* pulse_w_opt = cmd_pulse->add_option("--width", pulse_width, "pulse width (s)");
    cmd_pulse->add_option("--ep-schedule", pulse.ep_schedule, "EP schedule applied before the train");
    cmd_pulse->add_option("--threshold", pulse.threshold, "spike threshold in (0, 1)");

    TrajectoryFlags traj;
    auto* cmd_traj = app.add_subcommand("trajectory", "relative Gm vs C evolution under repeated EP");
    cmd_traj->add_option("--potential", traj.potential_v, "EP potential (V)")->required();
    cmd_traj->add_option("--steps", traj.steps, "number of EP steps");
    cmd_traj->add_option("--step-duration", traj.step_duration_s, "EP step duration (s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (seed_opt->count() > 0) global.seed = seed_flag;
        const ToolkitConfig config = resolve_config(global);
        std::filesystem::create_directories(global.out_dir);

        if (cmd_transfer->parsed()) {
            if (cmd_transfer->count("--vg-start") == 0) transfer.vg_start_v = config.policy.sweep.start_v;
            if (cmd_transfer->count("--vg-stop") == 0) transfer.vg_stop_v = config.policy.sweep.stop_v;
            if (cmd_transfer->count("--vg-points") == 0) transfer.vg_points = config.policy.sweep.points;
            if (cmd_transfer->count("--vd") == 0) transfer.vd_v = config.policy.vd_v;
            cmd_simulate_transfer(config, transfer, global.out_dir);
        } else if (cmd_eis->parsed()) {
            if (eis_cp_opt->count() > 0) eis.cp_f = eis_cp;
            cmd_simulate_eis(config, eis, global.out_dir);
        } else if (cmd_fit->parsed()) {
            if (g_rs_opt->count() > 0 || g_rp_opt->count() > 0 || g_cp_opt->count() > 0) {
                if (g_rs_opt->count() == 0 || g_rp_opt->count() == 0 || g_cp_opt->count() == 0)
                    throw UsageError("provide all of --rs0/--rp0/--cp0 or none");
                fit.guess = CircuitParams{g_rs, g_rp, g_cp};
            }
            cmd_fit_eis(config, fit, global.out_dir);
        } else if (cmd_grow->parsed()) {
            cmd_ep_grow(config, grow, global.out_dir);
        } else if (cmd_tune->parsed()) {
            if (cmd_tune->count("--n") == 0) tune.n_devices = config.array.n_devices;
            if (cmd_tune->count("--target") == 0)
                tune.target_gm_ms = config.policy.target_gm_s / units::kMilli;
            if (cmd_tune->count("--potential") == 0) tune.ep_potential_v = config.policy.ep_potential_v;
            cmd_tune_array(config, tune, global.out_dir);
        } else if (cmd_pulse->parsed()) {
            if (pulse_cp_opt->count() > 0) pulse.cp_f = pulse_cp;
            if (pulse_w_opt->count() > 0) pulse.width_s = pulse_width;
            if (cmd_pulse->count("--threshold") == 0) pulse.threshold = config.transient.spike_threshold;
            cmd_pulse_train(config, pulse, global.out_dir);
        } else if (cmd_traj->parsed()) {
            if (cmd_traj->count("--steps") == 0) traj.steps = 5;
            if (cmd_traj->count("--step-duration") == 0)
                traj.step_duration_s = config.policy.step_duration_s;
            cmd_trajectory(config, traj, global.out_dir);
        }
        return kExitOk;
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const CalibrationRangeError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitData;
    } catch (const CsvParseError& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return kExitData;
    } catch (const FitDivergenceError& err) {
        std::cerr << "numerical error: " << err.what() << " (best so far: Rs=" << err.best.rs_ohm
                  << " Rp=" << err.best.rp_ohm << " Cp=" << err.best.cp_f
                  << ", residual=" << err.residual << ")\n";
        return kExitNumerical;
    } catch (const UnidentifiableSpectrumError& err) {
        std::cerr << "numerical error: " << err.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitNumerical;
    }
}
