#include "evcam/energy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace evcam {

std::string_view to_string(Component c) {
    switch (c) {
        case Component::Sensor: return "sensor";
        case Component::Fpga: return "fpga";
        case Component::Soc: return "soc";
        case Component::Cluster: return "cluster";
        case Component::Fll: return "fll";
    }
    return "?";
}

std::string_view to_string(Level l) {
    switch (l) {
        case Level::Low: return "low";
        case Level::High: return "high";
        case Level::Extra: return "extra";
        case Level::HighExtra: return "high_extra";
    }
    return "?";
}

std::string_view to_string(Framework f) {
    switch (f) {
        case Framework::FullyActive: return "active";
        case Framework::PeriodicPolling: return "polling";
        case Framework::EventDriven: return "event";
    }
    return "?";
}

double ComponentPowerTable::power(Component c, Level l) const {
    double low = 0.0;
    double high = 0.0;
    double extra = 0.0;
    switch (c) {
        case Component::Sensor: low = sensor_idle; high = sensor_active; break;
        case Component::Fpga: low = fpga_base; high = fpga_ringosc_on; extra = fpga_spi_extra; break;
        case Component::Soc: low = soc_idle; high = soc_active; break;
        case Component::Cluster: low = cluster_gated; high = cluster_active; break;
        case Component::Fll: low = fll_gated; high = fll_active; break;
    }
    switch (l) {
        case Level::Low: return low;
        case Level::High: return high;
        case Level::Extra: return low + extra;
        case Level::HighExtra: return high + extra;
    }
    return 0.0;
}

void ComponentPowerTable::validate() const {
    const double all[] = {sensor_idle, sensor_active, fpga_base,  fpga_ringosc_on, fpga_spi_extra, soc_idle,
                          soc_active,  cluster_active, cluster_gated, fll_active, fll_gated};
    for (double v : all) {
        if (!(v >= 0.0)) throw ConfigError("component powers must be nonnegative");
    }
    if (sensor_active < sensor_idle || fpga_ringosc_on < fpga_base || soc_active < soc_idle ||
        cluster_active < cluster_gated || fll_active < fll_gated) {
        throw ConfigError("active power below idle power for some component");
    }
}

EnergyReport integrate(const PowerTimeline& timeline, const ComponentPowerTable& table) {
    if (!(timeline.horizon_us > 0.0)) throw TimelineIntegrityError("timeline horizon must be positive");
    EnergyReport rep;
    rep.horizon_us = timeline.horizon_us;
    for (auto c : kComponents) {
        const auto ci = static_cast<std::size_t>(c);
        double t = 0.0;
        double energy = 0.0;
        for (const auto& seg : timeline.of(c)) {
            if (seg.start_us != t) {
                throw TimelineIntegrityError(fmt::format("{} timeline {} at {} us", to_string(c),
                                                         seg.start_us > t ? "gap" : "overlap", t));
            }
            if (!(seg.end_us > seg.start_us)) {
                throw TimelineIntegrityError(fmt::format("{} timeline has an empty segment", to_string(c)));
            }
            const double d = seg.end_us - seg.start_us;
            rep.time_us[ci][static_cast<std::size_t>(seg.level)] += d;
            energy += table.power(c, seg.level) * d;
            t = seg.end_us;
        }
        if (t != timeline.horizon_us) {
            throw TimelineIntegrityError(fmt::format("{} timeline ends at {} us, horizon {} us", to_string(c), t,
                                                     timeline.horizon_us));
        }
        rep.energy_pj[ci] = energy;
        rep.avg_uw[ci] = energy / timeline.horizon_us;
        rep.total_energy_pj += energy;
    }
    rep.total_avg_uw = rep.total_energy_pj / timeline.horizon_us;
    return rep;
}

namespace {

enum Flag : unsigned { kHigh = 1u, kExtra = 2u };

struct Edge {
    double t;
    unsigned flag;
    int delta;
};

Level level_of(int high, int extra) {
    if (high > 0 && extra > 0) return Level::HighExtra;
    if (high > 0) return Level::High;
    if (extra > 0) return Level::Extra;
    return Level::Low;
}

// Sweeps window edges into a gap-free segment list over [0, horizon).
std::vector<Segment> sweep(std::vector<Edge> edges, double horizon) {
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.t < b.t; });
    std::vector<Segment> out;
    auto emit = [&](Level l, double a, double b) {
        if (b <= a) return;
        if (!out.empty() && out.back().level == l) {
            out.back().end_us = b;
        } else {
            out.push_back({l, a, b});
        }
    };
    int high = 0;
    int extra = 0;
    double t = 0.0;
    std::size_t i = 0;
    while (i < edges.size()) {
        const double at = edges[i].t;
        emit(level_of(high, extra), t, at);
        t = std::max(t, at);
        for (; i < edges.size() && edges[i].t == at; ++i) {
            (edges[i].flag == kHigh ? high : extra) += edges[i].delta;
        }
    }
    emit(level_of(high, extra), t, horizon);
    return out;
}

void add_window(std::vector<Edge>& edges, double a, double b, unsigned flag, double horizon) {
    a = std::clamp(a, 0.0, horizon);
    b = std::clamp(b, 0.0, horizon);
    if (b <= a) return;
    edges.push_back({a, flag, +1});
    edges.push_back({b, flag, -1});
}

}  // namespace

PowerTimeline build_timeline(std::span<const FrameRecord> frames, const PMTrace& pm, Framework framework,
                             double frame_period_us) {
    PowerTimeline tl;
    tl.horizon_us = static_cast<double>(frames.size()) * frame_period_us;
    if (frames.empty()) throw FrameworkMismatchError("empty frame trace");

    if (framework == Framework::FullyActive) {
        for (auto c : kComponents) tl.of(c).push_back({Level::High, 0.0, tl.horizon_us});
        return tl;
    }

    for (const auto& fr : frames) {
        if (framework == Framework::PeriodicPolling && !(fr.wake && fr.mode == SensorMode::Active)) {
            throw FrameworkMismatchError(fmt::format("polling trace has a sleeping frame at {}", fr.frame_index));
        }
        if (fr.wake && fr.mode != SensorMode::Active) {
            throw FrameworkMismatchError(fmt::format("frame {} wakes the processor while Idle", fr.frame_index));
        }
    }
    for (const auto& act : pm.activations) {
        const auto idx = static_cast<std::size_t>(act.frame_index);
        if (idx >= frames.size() || !frames[idx].wake) {
            throw FrameworkMismatchError(fmt::format("activation for frame {} without a wake-up", act.frame_index));
        }
    }

    std::vector<Edge> sensor;
    std::vector<Edge> fpga;
    std::vector<Edge> proc;
    for (const auto& fr : frames) {
        const double t0 = fr.frame_index * frame_period_us;
        if (fr.mode == SensorMode::Active) add_window(sensor, t0, t0 + frame_period_us, kHigh, tl.horizon_us);
        for (const auto& w : fr.activity_windows) {
            if (w.activity == Activity::RingOscillator) add_window(fpga, t0, t0 + w.duration_us, kHigh, tl.horizon_us);
        }
    }
    for (const auto& act : pm.activations) {
        const double spi_at = act.transfer_start_us();
        add_window(fpga, spi_at, spi_at + act.t_transfer_us, kExtra, tl.horizon_us);
        add_window(proc, act.t_start_us, act.end_us(), kHigh, tl.horizon_us);
    }
    tl.of(Component::Sensor) = sweep(std::move(sensor), tl.horizon_us);
    tl.of(Component::Fpga) = sweep(std::move(fpga), tl.horizon_us);
    auto proc_segments = sweep(std::move(proc), tl.horizon_us);
    tl.of(Component::Soc) = proc_segments;
    tl.of(Component::Cluster) = proc_segments;
    tl.of(Component::Fll) = std::move(proc_segments);
    return tl;
}

InterfaceConfig interface_for(Framework framework, InterfaceConfig cfg) {
    cfg.policy = framework == Framework::EventDriven ? ReadoutPolicy::ThresholdGated : ReadoutPolicy::AlwaysActive;
    return cfg;
}

FrameworkRun simulate_framework(std::vector<FrameRecord> frames, Framework framework, const InterfaceConfig& cfg,
                                const ComponentPowerTable& table, const TimingParams& timing,
                                const ProcessingModel& proc) {
    FrameworkRun run;
    run.framework = framework;
    run.frames = std::move(frames);
    const double period = cfg.frame_period_us();
    if (framework != Framework::FullyActive) run.pm = pm_trace(run.frames, timing, proc, period);
    run.pm.horizon_us = static_cast<double>(run.frames.size()) * period;
    run.timeline = build_timeline(run.frames, run.pm, framework, period);
    run.report = integrate(run.timeline, table);
    run.report.framework = std::string(to_string(framework));
    run.report.frame_period_us = period;
    run.report.energy_per_frame_uj = run.report.total_avg_uw * period * 1e-6;
    run.report.activations = static_cast<int>(run.pm.activations.size());
    double busy = 0.0;
    for (const auto& a : run.pm.activations) busy += a.total_us();
    if (!run.pm.activations.empty()) run.report.mean_activation_us = busy / run.report.activations;
    run.report.duty_cycle = framework == Framework::FullyActive ? 1.0 : busy / run.report.horizon_us;
    return run;
}

FrameworkRun simulate_counts(std::span<const int> counts, Framework framework, const InterfaceConfig& cfg,
                             const ComponentPowerTable& table, const TimingParams& timing,
                             const ProcessingModel& proc) {
    const auto fw_cfg = interface_for(framework, cfg);
    std::vector<FrameRecord> frames;
    frames.reserve(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        frames.push_back(interface_count_step(static_cast<int>(k), counts[k], fw_cfg));
    }
    return simulate_framework(std::move(frames), framework, fw_cfg, table, timing, proc);
}

FrameworkComparison compare_frameworks(std::span<const int> counts, const InterfaceConfig& cfg,
                                       const ComponentPowerTable& table, const TimingParams& timing,
                                       const ProcessingModel& proc) {
    FrameworkComparison cmp;
    cmp.polling = simulate_counts(counts, Framework::PeriodicPolling, cfg, table, timing, proc).report;
    const auto ed = simulate_counts(counts, Framework::EventDriven, cfg, table, timing, proc);
    cmp.event_driven = ed.report;
    int wakes = 0;
    for (const auto& f : ed.frames) wakes += f.wake;
    cmp.wake_fraction = counts.empty() ? 0.0 : static_cast<double>(wakes) / static_cast<double>(counts.size());
    cmp.reduction_pct = (cmp.event_driven.total_avg_uw - cmp.polling.total_avg_uw) / cmp.polling.total_avg_uw * 100.0;
    return cmp;
}

ProcessingModel calibrate_processing(double pp_target_uw, std::span<const int> counts, const InterfaceConfig& cfg,
                                     const ComponentPowerTable& table, const TimingParams& timing) {
    auto pp = [&](double c0, double c1) {
        return simulate_counts(counts, Framework::PeriodicPolling, cfg, table, timing, ProcessingModel{c0, c1})
            .report.total_avg_uw;
    };
    const double base = pp(0.0, 0.0);
    const double tol = 1e-9 * std::max(1.0, std::abs(base));
    if (pp_target_uw < base - tol) {
        throw CalibrationError(fmt::format("target {:.3f} uW is below the zero-cost polling power {:.3f} uW",
                                           pp_target_uw, base));
    }
    const double need = pp_target_uw - base;
    if (need <= tol) return ProcessingModel{0.0, 0.0};

    const double a = pp(1.0, 0.0) - base;
    const double b = pp(0.0, 1.0) - base;
    if (!(a * a + b * b > 0.0)) throw CalibrationError("polling power does not depend on the processing model");

    // Min-norm solution of a*c0 + b*c1 = need; exact while no activation overruns.
    auto at_scale = [&](double s) { return ProcessingModel{s * a, s * b}; };
    double s = need / (a * a + b * b);
    double got = pp(s * a, s * b);
    if (std::abs(got - pp_target_uw) <= 1e-9 * pp_target_uw) return at_scale(s);

    // Overruns make the map nonlinear; it stays monotone along the ray, so bisect.
    double lo = 0.0;
    double hi = s;
    while (pp(hi * a, hi * b) < pp_target_uw) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw CalibrationError("calibration target unreachable");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pp(mid * a, mid * b) < pp_target_uw ? lo : hi) = mid;
    }
    return at_scale(0.5 * (lo + hi));
}

void write_energy_csv(std::ostream& os, const EnergyReport& report) {
    os << "component,low_us,high_us,extra_us,high_extra_us,avg_uW\n";
    for (auto c : kComponents) {
        const auto ci = static_cast<std::size_t>(c);
        const auto& t = report.time_us[ci];
        os << fmt::format("{},{:.3f},{:.3f},{:.3f},{:.3f},{:.6f}\n", to_string(c), t[0], t[1], t[2], t[3],
                          report.avg_uw[ci]);
    }
    os << fmt::format("total,,,,,{:.6f}\n", report.total_avg_uw);
}

}  // namespace evcam
