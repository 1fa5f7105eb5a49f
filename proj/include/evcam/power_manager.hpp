#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "evcam/camera_interface.hpp"

namespace evcam {

/// Start-up delays of the processor, in microseconds.
struct TimingParams {
    double t_ro_us = 300.0;
    double t_on_us = 590.0;    // power gates + FLL lock, ack delay folded in
    double t_boot_us = 61.0;   // boot from L2 retention at 30 MHz

    double startup_us() const { return t_on_us + t_boot_us; }
    void validate() const;
};

/// Affine computation-time law: t_process(n) = c0 + c1 * n.
struct ProcessingModel {
    double c0_us = 200.0;
    double c1_us_per_event = 1.0;

    double t_process_us(int n_events) const { return c0_us + c1_us_per_event * n_events; }
    void validate() const;
};

enum class PMState { IdleSleep, PoweringOn, Booting, Running };

std::string_view to_string(PMState s);

struct ActivationRecord {
    int frame_index = 0;
    int n_events = 0;
    double t_start_us = 0.0;
    double t_on_us = 0.0;
    double t_boot_us = 0.0;
    double t_transfer_us = 0.0;
    double t_process_us = 0.0;
    bool overrun = false;

    double total_us() const { return t_on_us + t_boot_us + t_transfer_us + t_process_us; }
    double end_us() const { return t_start_us + total_us(); }
    double transfer_start_us() const { return t_start_us + t_on_us + t_boot_us; }
};

struct PMInterval {
    PMState state = PMState::IdleSleep;
    double start_us = 0.0;
    double end_us = 0.0;

    double duration_us() const { return end_us - start_us; }
};

struct PMTrace {
    std::vector<PMInterval> intervals;
    std::vector<ActivationRecord> activations;
    int coalesced_wakes = 0;  // wake requests absorbed by a running activation
    int overruns = 0;
    double horizon_us = 0.0;
};

/// Builds the activation for one wake-up. The processor starts powering on
/// once the readout window of the frame has closed. `overrun` is set when the
/// activation is longer than the frame period.
ActivationRecord pm_handle_wakeup(const FrameRecord& frame, const TimingParams& timing, const ProcessingModel& proc,
                                  double frame_period_us);

/// Runs the external power-manager FSM over a frame sequence. Frames are
/// stamped at k * frame_period; the returned intervals partition
/// [0, frames.size() * frame_period) exactly. A wake that arrives while an
/// activation is still in progress is coalesced into it.
PMTrace pm_trace(std::span<const FrameRecord> frames, const TimingParams& timing, const ProcessingModel& proc,
                 double frame_period_us);

}  // namespace evcam
