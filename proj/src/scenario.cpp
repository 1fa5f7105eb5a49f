#include "evcam/scenario.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "evcam/baseline.hpp"
#include "evcam/pgm.hpp"

namespace evcam {

namespace {

class FrameSource {
public:
    explicit FrameSource(const ScenarioConfig& cfg) : cfg_(cfg) {
        const auto& sc = cfg.scene;
        switch (sc.kind) {
            case SceneSource::Kind::Profile:
                spec_ = make_profile_scene(sc.profile, cfg.n_frames, cfg.seed, sc.profile_options);
                break;
            case SceneSource::Kind::Objects:
                spec_ = sc.objects;
                break;
            case SceneSource::Kind::Directory:
                files_ = list_pgm_frames(sc.frames_dir);
                if (files_.empty()) throw IoError("no .pgm frames in " + sc.frames_dir.string());
                break;
        }
        if (sc.kind != SceneSource::Kind::Directory) {
            spec_.validate(cfg.n_frames);
            renderer_.emplace(spec_, cfg.seed);
        }
    }

    int size() const {
        return files_.empty() ? cfg_.n_frames : std::min(cfg_.n_frames, static_cast<int>(files_.size()));
    }

    GrayFrame next() {
        if (renderer_) return renderer_->next();
        return read_pgm(files_[static_cast<std::size_t>(cursor_++)]);
    }

    bool synthetic() const { return renderer_.has_value(); }
    const SyntheticSceneSpec& spec() const { return spec_; }

private:
    const ScenarioConfig& cfg_;
    SyntheticSceneSpec spec_;
    std::optional<SceneRenderer> renderer_;
    std::vector<std::filesystem::path> files_;
    int cursor_ = 0;
};

// Interface records for one framework over the shared sensed frames.
std::vector<FrameRecord> interface_records(const SensedScene& scene, const InterfaceConfig& cfg) {
    std::vector<FrameRecord> records;
    records.reserve(scene.frames.size());
    SensorMode prev = SensorMode::Idle;
    for (std::size_t k = 0; k < scene.frames.size(); ++k) {
        const auto& f = scene.frames[k];
        const auto mode = cu_decide_mode(f.count, cfg);
        std::optional<ReadoutStream> stream;
        if (mode == SensorMode::Active) {
            TernaryDiffMap diff;
            for (const auto& e : f.events) diff.set(e.row, e.col, e.sign);
            stream = encode_readout(diff);
        }
        records.push_back(interface_frame_step(static_cast<int>(k), f.count, stream, prev, cfg));
        prev = mode;
    }
    return records;
}

std::vector<TriggerEvent> run_event_pipeline(const ScenarioConfig& cfg, const FrameworkRun& ed,
                                             std::vector<bool>* processed) {
    std::vector<bool> carried(ed.frames.size(), false);
    for (const auto& a : ed.pm.activations) carried[static_cast<std::size_t>(a.frame_index)] = true;
    TrackingPipeline pipeline(cfg.pipeline, cfg.rules);
    std::vector<TriggerEvent> triggers;
    for (std::size_t k = 0; k < ed.frames.size(); ++k) {
        const std::span<const AddressEvent> events =
            carried[k] ? std::span<const AddressEvent>(ed.frames[k].events) : std::span<const AddressEvent>();
        auto r = pipeline.process_events(static_cast<int>(k), events);
        triggers.insert(triggers.end(), r.triggers.begin(), r.triggers.end());
    }
    if (processed) *processed = std::move(carried);
    return triggers;
}

std::vector<TriggerEvent> run_baseline_pipeline(const ScenarioConfig& cfg, const SensedScene& scene) {
    TrackingPipeline pipeline(cfg.pipeline, cfg.rules);
    std::vector<TriggerEvent> triggers;
    for (std::size_t k = 0; k < scene.baseline_blobs.size(); ++k) {
        auto r = pipeline.process_blobs(static_cast<int>(k), scene.baseline_blobs[k]);
        triggers.insert(triggers.end(), r.triggers.begin(), r.triggers.end());
    }
    return triggers;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << content;
    if (!f) throw IoError("write failed for " + path.string());
}

template <class Fn>
std::string to_text(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

}  // namespace

SensedScene sense_scene(const ScenarioConfig& cfg) {
    FrameSource source(cfg);
    SensedScene scene;
    const int n = source.size();
    scene.frames.resize(static_cast<std::size_t>(n));
    scene.baseline_blobs.resize(static_cast<std::size_t>(n));

    GrayFrame prev_gray = source.next();
    BinaryContrastMap prev_map = binarize_contrast(prev_gray, cfg.contrast_threshold);
    for (int k = 1; k < n; ++k) {
        GrayFrame gray = source.next();
        auto map = binarize_contrast(gray, cfg.contrast_threshold);
        const auto diff = frame_difference(prev_map, map);
        auto& f = scene.frames[static_cast<std::size_t>(k)];
        f.count = diff.count();
        f.events = nonzero_events(diff);
        scene.baseline_blobs[static_cast<std::size_t>(k)] = baseline_detect(gray, prev_gray, cfg.baseline);
        prev_gray = std::move(gray);
        prev_map = map;
    }

    if (source.synthetic()) {
        scene.labels = derive_labels(source.spec(), cfg.rules, n, cfg.scene.labels);
        scene.has_labels = true;
    } else if (!cfg.scene.labels_csv.empty()) {
        std::ifstream f(cfg.scene.labels_csv);
        if (!f) throw IoError("cannot open labels " + cfg.scene.labels_csv.string());
        scene.labels = read_labels_csv(f, cfg.scene.labels.window);
        scene.has_labels = true;
    }
    return scene;
}

RunReport run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, sense_scene(cfg)); }

// The configured model, or the one fitted to calibrate_pp_uw. An unreachable
// target falls back to the closest reachable point, the zero-cost model.
ProcessingModel resolve_processing(const ScenarioConfig& cfg, std::span<const int> counts,
                                   std::optional<std::string>* error) {
    if (!cfg.calibrate_pp_uw) return cfg.processing;
    try {
        return calibrate_processing(*cfg.calibrate_pp_uw, counts, cfg.interface, cfg.power, cfg.timing);
    } catch (const CalibrationError& e) {
        if (error) *error = e.what();
        return ProcessingModel{0.0, 0.0};
    }
}

RunReport run_scenario(const ScenarioConfig& cfg, const SensedScene& scene) {
    RunReport rep;
    rep.name = cfg.name;
    rep.n_frames = static_cast<int>(scene.frames.size());
    rep.has_labels = scene.has_labels;

    std::vector<int> counts;
    counts.reserve(scene.frames.size());
    for (const auto& f : scene.frames) counts.push_back(f.count);

    rep.processing = resolve_processing(cfg, counts, &rep.calibration_error);

    const auto ed_cfg = interface_for(Framework::EventDriven, cfg.interface);
    const auto pp_cfg = interface_for(Framework::PeriodicPolling, cfg.interface);
    rep.event_driven = simulate_framework(interface_records(scene, ed_cfg), Framework::EventDriven, ed_cfg, cfg.power,
                                          cfg.timing, rep.processing);
    rep.polling = simulate_framework(interface_records(scene, pp_cfg), Framework::PeriodicPolling, pp_cfg, cfg.power,
                                     cfg.timing, rep.processing);
    rep.fully_active = simulate_counts(counts, Framework::FullyActive, cfg.interface, cfg.power, cfg.timing,
                                       rep.processing)
                           .report;
    const double pp = rep.polling.report.total_avg_uw;
    rep.reduction_pct = (rep.event_driven.report.total_avg_uw - pp) / pp * 100.0;
    rep.overruns = rep.event_driven.pm.overruns + rep.polling.pm.overruns;

    std::vector<bool> processed;
    rep.triggers_event = run_event_pipeline(cfg, rep.event_driven, &processed);
    rep.triggers_baseline = run_baseline_pipeline(cfg, scene);

    int wakes = 0;
    rep.trace.reserve(scene.frames.size());
    for (std::size_t k = 0; k < scene.frames.size(); ++k) {
        const auto& r = rep.event_driven.frames[k];
        wakes += r.wake;
        rep.trace.push_back({static_cast<int>(k), r.count, r.mode == SensorMode::Active, r.wake, processed[k]});
    }
    rep.wake_fraction = rep.n_frames > 0 ? static_cast<double>(wakes) / rep.n_frames : 0.0;

    if (scene.has_labels) {
        rep.metrics_event = match_triggers(rep.triggers_event, scene.labels);
        rep.metrics_baseline = match_triggers(rep.triggers_baseline, scene.labels);
    }
    return rep;
}

FrameworkSelection parse_framework_selection(const std::string& s) {
    if (s == "event") return FrameworkSelection::Event;
    if (s == "polling") return FrameworkSelection::Polling;
    if (s == "active") return FrameworkSelection::Active;
    if (s == "both") return FrameworkSelection::Both;
    throw ConfigError("framework must be event, polling, active or both");
}

void write_run_outputs(const RunReport& rep, const std::filesystem::path& dir, FrameworkSelection selection) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const bool all = selection == FrameworkSelection::Both;
    if (all || selection == FrameworkSelection::Event) {
        write_file(dir / "energy_event.csv", to_text([&](std::ostream& os) {
                       write_energy_csv(os, rep.event_driven.report);
                   }));
    }
    if (all || selection == FrameworkSelection::Polling) {
        write_file(dir / "energy_polling.csv", to_text([&](std::ostream& os) {
                       write_energy_csv(os, rep.polling.report);
                   }));
    }
    if (all || selection == FrameworkSelection::Active) {
        write_file(dir / "energy_active.csv", to_text([&](std::ostream& os) {
                       write_energy_csv(os, rep.fully_active);
                   }));
    }

    std::string cmp = "scenario,frames,wake_fraction,c0_us,c1_us_per_event,active_uW,polling_uW,event_uW,"
                      "reduction_pct,event_activations,polling_activations,overruns\n";
    cmp += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{}\n", rep.name, rep.n_frames,
                       rep.wake_fraction, rep.processing.c0_us, rep.processing.c1_us_per_event,
                       rep.fully_active.total_avg_uw, rep.polling.report.total_avg_uw,
                       rep.event_driven.report.total_avg_uw, rep.reduction_pct, rep.event_driven.report.activations,
                       rep.polling.report.activations, rep.overruns);
    write_file(dir / "comparison.csv", cmp);

    std::string trace = "frame_index,count,active,wake,processed\n";
    for (const auto& t : rep.trace) {
        trace += fmt::format("{},{},{},{},{}\n", t.frame_index, t.count, int{t.ed_active}, int{t.ed_wake},
                             int{t.ed_processed});
    }
    write_file(dir / "trace.csv", trace);

    write_file(dir / "triggers_event.csv",
               to_text([&](std::ostream& os) { write_triggers_csv(os, rep.triggers_event); }));
    write_file(dir / "triggers_baseline.csv",
               to_text([&](std::ostream& os) { write_triggers_csv(os, rep.triggers_baseline); }));

    std::string metrics = metrics_csv_header() + "\n";
    if (rep.has_labels) {
        metrics += metrics_csv_row(rep.name, "event", rep.metrics_event) + "\n";
        metrics += metrics_csv_row(rep.name, "baseline", rep.metrics_baseline) + "\n";
    }
    write_file(dir / "metrics.csv", metrics);
}

std::vector<SweepRow> threshold_sweep(const ScenarioConfig& cfg, const std::vector<int>& thresholds) {
    if (thresholds.empty()) throw ConfigError("sweep needs at least one threshold");
    const auto scene = sense_scene(cfg);
    std::vector<int> counts;
    for (const auto& f : scene.frames) counts.push_back(f.count);
    // Polling does not depend on the threshold, so one fit serves every row.
    const auto processing = resolve_processing(cfg, counts, nullptr);
    std::vector<SweepRow> rows;
    for (int t : thresholds) {
        auto c = cfg;
        c.processing = processing;
        c.interface.wake_threshold = t;
        c.interface.validate();
        const auto ed_cfg = interface_for(Framework::EventDriven, c.interface);
        auto ed = simulate_framework(interface_records(scene, ed_cfg), Framework::EventDriven, ed_cfg, c.power,
                                     c.timing, c.processing);
        SweepRow row;
        row.threshold = t;
        int wakes = 0;
        for (const auto& f : ed.frames) wakes += f.wake;
        row.wake_fraction = scene.frames.empty() ? 0.0 : static_cast<double>(wakes) / scene.frames.size();
        row.ed_uw = ed.report.total_avg_uw;
        const auto triggers = run_event_pipeline(c, ed, nullptr);
        const auto m = match_triggers(triggers, scene.labels);
        row.recall = m.recall();
        row.precision = m.precision();
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "threshold,wake_fraction,event_uW,precision,recall\n";
    for (const auto& r : rows) {
        fmt::print(os, "{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.threshold, r.wake_fraction, r.ed_uw, r.precision,
                   r.recall);
    }
}

CalibrationResult calibrate_scenario(const ScenarioConfig& cfg, double pp_target_uw) {
    const auto scene = sense_scene(cfg);
    std::vector<int> counts;
    for (const auto& f : scene.frames) counts.push_back(f.count);
    CalibrationResult res;
    res.model = calibrate_processing(pp_target_uw, counts, cfg.interface, cfg.power, cfg.timing);
    const auto cmp = compare_frameworks(counts, cfg.interface, cfg.power, cfg.timing, res.model);
    res.pp_uw = cmp.polling.total_avg_uw;
    res.ed_uw = cmp.event_driven.total_avg_uw;
    res.reduction_pct = cmp.reduction_pct;
    return res;
}

}  // namespace evcam
