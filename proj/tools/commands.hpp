#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oectsim/config.hpp"
#include "oectsim/eis.hpp"
#include "oectsim/growth.hpp"

namespace oectsim::cli {

// Bad flag combination or value; maps to exit status 1.
class UsageError : public std::runtime_error {
  public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Exit statuses shared by main() and the tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// "0.6x2x5" = 5 steps of 2 s at 0.6 V; segments may be chained with commas.
struct EpScheduleSegment {
    double potential_v = 0.0;
    double step_duration_s = 0.0;
    int steps = 0;
};
std::vector<EpScheduleSegment> parse_ep_schedule(const std::string& text);

// Applies a schedule to a device, drawing thickness noise from stream
// forks indexed by global step number.
DeviceState run_ep_schedule(const DeviceState& device, const std::vector<EpScheduleSegment>& schedule,
                            const GrowthModel& model, RngStream stream);

struct TransferFlags {
    double vg_start_v = 0.0;
    double vg_stop_v = 0.0;
    int vg_points = 0;
    double vd_v = 0.0;
    std::string ep_schedule;  // empty = pristine device only
};

struct EisFlags {
    std::string ep_schedule;
    std::optional<double> cp_f;  // overrides the device-derived capacitance
};

struct FitFlags {
    std::filesystem::path input;
    std::optional<CircuitParams> guess;
};

struct EpGrowFlags {
    std::string ep_schedule;
};

struct TuneArrayFlags {
    int n_devices = 0;
    double target_gm_ms = 0.0;
    double ep_potential_v = 0.0;
};

struct PulseTrainFlags {
    double frequency_hz = 0.0;
    int n_pulses = 0;
    std::optional<double> cp_f;
    std::string ep_schedule;
    double threshold = 0.5;
    std::optional<double> width_s;
};

struct TrajectoryFlags {
    double potential_v = 0.0;
    int steps = 0;
    double step_duration_s = 0.0;
};

// Each command writes its outputs plus manifest.json into out_dir and is a
// pure function of (config, flags): identical inputs give identical bytes.
void cmd_simulate_transfer(const ToolkitConfig& config, const TransferFlags& flags,
                           const std::filesystem::path& out_dir);
void cmd_simulate_eis(const ToolkitConfig& config, const EisFlags& flags,
                      const std::filesystem::path& out_dir);
void cmd_fit_eis(const ToolkitConfig& config, const FitFlags& flags,
                 const std::filesystem::path& out_dir);
void cmd_ep_grow(const ToolkitConfig& config, const EpGrowFlags& flags,
                 const std::filesystem::path& out_dir);
void cmd_tune_array(const ToolkitConfig& config, const TuneArrayFlags& flags,
                    const std::filesystem::path& out_dir);
void cmd_pulse_train(const ToolkitConfig& config, const PulseTrainFlags& flags,
                     const std::filesystem::path& out_dir);
void cmd_trajectory(const ToolkitConfig& config, const TrajectoryFlags& flags,
                    const std::filesystem::path& out_dir);

}  // namespace oectsim::cli
