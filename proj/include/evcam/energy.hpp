#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evcam/camera_interface.hpp"
#include "evcam/power_manager.hpp"

namespace evcam {

class TimelineIntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FrameworkMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Component { Sensor, Fpga, Soc, Cluster, Fll };
inline constexpr std::array kComponents{Component::Sensor, Component::Fpga, Component::Soc, Component::Cluster,
                                        Component::Fll};
inline constexpr std::size_t kComponentCount = kComponents.size();

/// Power level of a component. Extra is the SPI surcharge, only the FPGA has one;
/// HighExtra is the FPGA with both the ring oscillator and SPI running.
enum class Level { Low, High, Extra, HighExtra };
inline constexpr std::size_t kLevelCount = 4;

std::string_view to_string(Component c);
std::string_view to_string(Level l);

enum class Framework { FullyActive, PeriodicPolling, EventDriven };
std::string_view to_string(Framework f);

/// Component powers in microwatts.
struct ComponentPowerTable {
    double sensor_idle = 10.0;
    double sensor_active = 20.0;
    double fpga_base = 68.0;
    double fpga_ringosc_on = 3000.0;  // total while the high-speed domain runs
    double fpga_spi_extra = 456.0;
    double soc_idle = 99.0;
    double soc_active = 313.0;
    double cluster_active = 946.0;
    double cluster_gated = 0.0;
    double fll_active = 3200.0;
    double fll_gated = 0.0;

    double power(Component c, Level l) const;
    void validate() const;
};

struct Segment {
    Level level = Level::Low;
    double start_us = 0.0;
    double end_us = 0.0;
};

struct PowerTimeline {
    double horizon_us = 0.0;
    std::array<std::vector<Segment>, kComponentCount> segments;

    std::vector<Segment>& of(Component c) { return segments[static_cast<std::size_t>(c)]; }
    const std::vector<Segment>& of(Component c) const { return segments[static_cast<std::size_t>(c)]; }
};

struct EnergyReport {
    std::string framework;
    double horizon_us = 0.0;
    double frame_period_us = 0.0;
    std::array<std::array<double, kLevelCount>, kComponentCount> time_us{};
    std::array<double, kComponentCount> energy_pj{};  // uW * us
    std::array<double, kComponentCount> avg_uw{};
    double total_energy_pj = 0.0;
    double total_avg_uw = 0.0;
    double energy_per_frame_uj = 0.0;
    int activations = 0;
    double mean_activation_us = 0.0;
    double duty_cycle = 0.0;  // fraction of time the processor is powered

    double avg(Component c) const { return avg_uw[static_cast<std::size_t>(c)]; }
};

/// Averages each component's power over the horizon.
/// Throws TimelineIntegrityError unless every component's segments tile [0, horizon) exactly.
EnergyReport integrate(const PowerTimeline& timeline, const ComponentPowerTable& table);

/// Lays component states over the frame grid. Sensor is active for whole
/// Active frames; the ring oscillator runs for the readout window of each
/// Active frame; the SPI surcharge covers each transfer; SoC, cluster and FLL
/// are up from power-on to end of computation. FullyActive ignores the trace.
PowerTimeline build_timeline(std::span<const FrameRecord> frames, const PMTrace& pm, Framework framework,
                             double frame_period_us);

struct FrameworkRun {
    Framework framework = Framework::EventDriven;
    std::vector<FrameRecord> frames;
    PMTrace pm;
    PowerTimeline timeline;
    EnergyReport report;
};

/// Interface configuration a framework runs with: polling and fully-active
/// read out every frame.
InterfaceConfig interface_for(Framework framework, InterfaceConfig cfg);

/// Full energy simulation over prebuilt frame records (which must already
/// follow interface_for(framework)).
FrameworkRun simulate_framework(std::vector<FrameRecord> frames, Framework framework, const InterfaceConfig& cfg,
                                const ComponentPowerTable& table, const TimingParams& timing,
                                const ProcessingModel& proc);

/// Same, from per-frame asserted-pixel counts only.
FrameworkRun simulate_counts(std::span<const int> counts, Framework framework, const InterfaceConfig& cfg,
                             const ComponentPowerTable& table, const TimingParams& timing,
                             const ProcessingModel& proc);

struct FrameworkComparison {
    EnergyReport polling;
    EnergyReport event_driven;
    double reduction_pct = 0.0;  // (ED - PP) / PP * 100, negative when event-driven saves power
    double wake_fraction = 0.0;
};

FrameworkComparison compare_frameworks(std::span<const int> counts, const InterfaceConfig& cfg,
                                       const ComponentPowerTable& table, const TimingParams& timing,
                                       const ProcessingModel& proc);

/// Fits (c0, c1) so that the simulated Periodic-Polling average on `counts`
/// hits `pp_target_uw`. The polling average is affine in (c0, c1); of all
/// exact solutions the minimum-norm one is returned, which is nonnegative.
/// Throws CalibrationError when the target is below the zero-cost polling power.
ProcessingModel calibrate_processing(double pp_target_uw, std::span<const int> counts, const InterfaceConfig& cfg,
                                     const ComponentPowerTable& table, const TimingParams& timing);

/// component,low_us,high_us,extra_us,high_extra_us,avg_uW plus a total row.
void write_energy_csv(std::ostream& os, const EnergyReport& report);

}  // namespace evcam
