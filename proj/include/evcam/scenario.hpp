#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evcam/config.hpp"
#include "evcam/energy.hpp"
#include "evcam/metrics.hpp"

namespace evcam {

/// Per-frame sensing result shared by every framework of a run.
struct SensedFrame {
    int count = 0;
    std::vector<AddressEvent> events;  // raster order, all asserted pixels
};

/// Frames as seen by the imager plus the ground truth that goes with them.
struct SensedScene {
    std::vector<SensedFrame> frames;
    std::vector<std::vector<Blob>> baseline_blobs;  // per frame, from the gray-level baseline
    std::vector<GroundTruthLabel> labels;
    bool has_labels = false;
};

/// Renders or loads the frames once and runs sensor and baseline detection
/// over them. Frame 0 has no predecessor and yields no events.
SensedScene sense_scene(const ScenarioConfig& cfg);

struct TraceRow {
    int frame_index = 0;
    int count = 0;
    bool ed_active = false;
    bool ed_wake = false;
    bool ed_processed = false;  // an activation carried this frame's events to the pipeline
};

struct RunReport {
    std::string name;
    int n_frames = 0;
    ProcessingModel processing;
    std::optional<std::string> calibration_error;
    FrameworkRun event_driven;
    FrameworkRun polling;
    EnergyReport fully_active;
    double reduction_pct = 0.0;
    double wake_fraction = 0.0;
    std::vector<TraceRow> trace;
    std::vector<TriggerEvent> triggers_event;
    std::vector<TriggerEvent> triggers_baseline;
    MetricCounts metrics_event;
    MetricCounts metrics_baseline;
    bool has_labels = false;
    int overruns = 0;  // across event-driven and polling

    bool has_warnings() const { return calibration_error.has_value() || overruns > 0; }
};

RunReport run_scenario(const ScenarioConfig& cfg);
RunReport run_scenario(const ScenarioConfig& cfg, const SensedScene& scene);

/// Which energy tables write_run_outputs emits.
enum class FrameworkSelection { Event, Polling, Active, Both };
FrameworkSelection parse_framework_selection(const std::string& s);

/// Writes energy_<framework>.csv, comparison.csv, trace.csv,
/// triggers_event.csv, triggers_baseline.csv and metrics.csv into `dir`.
void write_run_outputs(const RunReport& report, const std::filesystem::path& dir,
                       FrameworkSelection selection = FrameworkSelection::Both);

struct SweepRow {
    int threshold = 0;
    double wake_fraction = 0.0;
    double ed_uw = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

/// One event-driven run per threshold on the same sensed frames.
std::vector<SweepRow> threshold_sweep(const ScenarioConfig& cfg, const std::vector<int>& thresholds);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct CalibrationResult {
    ProcessingModel model;
    double pp_uw = 0.0;
    double ed_uw = 0.0;
    double reduction_pct = 0.0;
};

/// Throws CalibrationError when the target is not reachable.
CalibrationResult calibrate_scenario(const ScenarioConfig& cfg, double pp_target_uw);

}  // namespace evcam
