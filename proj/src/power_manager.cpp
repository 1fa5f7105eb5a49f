#include "evcam/power_manager.hpp"

#include <algorithm>
#include <stdexcept>

namespace evcam {

void TimingParams::validate() const {
    if (!(t_ro_us > 0.0 && t_on_us > 0.0 && t_boot_us > 0.0)) {
        throw ConfigError("timing parameters must be strictly positive");
    }
}

void ProcessingModel::validate() const {
    if (!(c0_us >= 0.0 && c1_us_per_event >= 0.0)) throw ConfigError("processing model constants must be >= 0");
}

std::string_view to_string(PMState s) {
    switch (s) {
        case PMState::IdleSleep: return "idle_sleep";
        case PMState::PoweringOn: return "powering_on";
        case PMState::Booting: return "booting";
        case PMState::Running: return "running";
    }
    return "?";
}

ActivationRecord pm_handle_wakeup(const FrameRecord& frame, const TimingParams& timing, const ProcessingModel& proc,
                                  double frame_period_us) {
    if (!frame.wake) throw std::invalid_argument("pm_handle_wakeup called for a frame without wake-up");
    ActivationRecord act;
    act.frame_index = frame.frame_index;
    act.n_events = frame.stored;
    act.t_start_us = frame.frame_index * frame_period_us + timing.t_ro_us;
    act.t_on_us = timing.t_on_us;
    act.t_boot_us = timing.t_boot_us;
    act.t_transfer_us = spi_transfer_model(frame.stored);
    act.t_process_us = proc.t_process_us(frame.stored);
    act.overrun = act.total_us() > frame_period_us;
    return act;
}

PMTrace pm_trace(std::span<const FrameRecord> frames, const TimingParams& timing, const ProcessingModel& proc,
                 double frame_period_us) {
    PMTrace trace;
    trace.horizon_us = static_cast<double>(frames.size()) * frame_period_us;

    double busy_until = 0.0;
    for (const auto& fr : frames) {
        if (!fr.wake) continue;
        auto act = pm_handle_wakeup(fr, timing, proc, frame_period_us);
        if (act.t_start_us < busy_until) {
            ++trace.coalesced_wakes;
            continue;
        }
        if (act.overrun) ++trace.overruns;
        busy_until = act.end_us();
        trace.activations.push_back(act);
    }

    // The last activation may run past the horizon; it is clipped there.
    auto push = [&](PMState s, double a, double b) {
        a = std::min(a, trace.horizon_us);
        b = std::min(b, trace.horizon_us);
        if (b <= a) return;
        if (!trace.intervals.empty() && trace.intervals.back().state == s && trace.intervals.back().end_us == a) {
            trace.intervals.back().end_us = b;
        } else {
            trace.intervals.push_back({s, a, b});
        }
    };

    double t = 0.0;
    for (const auto& act : trace.activations) {
        push(PMState::IdleSleep, t, act.t_start_us);
        const double boot_at = act.t_start_us + act.t_on_us;
        const double run_at = boot_at + act.t_boot_us;
        push(PMState::PoweringOn, act.t_start_us, boot_at);
        push(PMState::Booting, boot_at, run_at);
        push(PMState::Running, run_at, act.end_us());
        t = act.end_us();
    }
    push(PMState::IdleSleep, t, trace.horizon_us);
    return trace;
}

}  // namespace evcam
