// evcam: scenario runner for the event-driven camera simulator.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "evcam/config.hpp"
#include "evcam/pgm.hpp"
#include "evcam/scenario.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kIo = 3, kWarn = 4 };

enum class Verbosity { Quiet, Error, Warn, Info, Debug };

Verbosity verbosity() {
    const char* v = std::getenv("EVCAM_LOG");
    if (!v) return Verbosity::Warn;
    const std::string s(v);
    if (s == "quiet" || s == "off") return Verbosity::Quiet;
    if (s == "error") return Verbosity::Error;
    if (s == "info") return Verbosity::Info;
    if (s == "debug") return Verbosity::Debug;
    return Verbosity::Warn;
}

template <class... Args>
void log(Verbosity level, fmt::format_string<Args...> f, Args&&... args) {
    static const Verbosity current = verbosity();
    if (level > current) return;
    static constexpr const char* tags[] = {"", "error", "warn", "info", "debug"};
    fmt::print(stderr, "evcam [{}] {}\n", tags[static_cast<int>(level)], fmt::format(f, std::forward<Args>(args)...));
}

evcam::ScenarioConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
    auto cfg = evcam::load_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-driven smart camera simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string framework = "both";
    std::string format = "csv";
    std::vector<int> thresholds;
    double target = 0.0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "scenario config (INI)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the scenario seed");
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv"}));
    };

    auto* run = app.add_subcommand("run", "simulate a scenario and write CSV reports");
    common(run);
    run->add_option("--framework", framework, "energy tables to write")
        ->check(CLI::IsMember({"event", "polling", "active", "both"}));

    auto* sweep = app.add_subcommand("sweep", "event-driven power and recall over wake thresholds");
    common(sweep);
    sweep->add_option("--thresholds", thresholds, "wake thresholds")->required()->delimiter(',');

    auto* cal = app.add_subcommand("calibrate", "fit the processing model to a polling power target");
    common(cal);
    cal->add_option("--target", target, "Periodic-Polling power target, uW")->required();

    auto* gen = app.add_subcommand("gen", "render the scenario scene to PGM frames plus labels.csv");
    common(gen);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load(config_path, seed);
        const std::filesystem::path out(out_dir);

        if (run->parsed()) {
            log(Verbosity::Info, "running '{}' ({} frames)", cfg.name, cfg.n_frames);
            const auto rep = evcam::run_scenario(cfg);
            evcam::write_run_outputs(rep, out, evcam::parse_framework_selection(framework));
            log(Verbosity::Info, "polling {:.3f} uW, event-driven {:.3f} uW, reduction {:.2f} %",
                rep.polling.report.total_avg_uw, rep.event_driven.report.total_avg_uw, rep.reduction_pct);
            if (rep.calibration_error) log(Verbosity::Warn, "calibration: {}", *rep.calibration_error);
            if (rep.overruns > 0) log(Verbosity::Warn, "{} activations overran the frame period", rep.overruns);
            return rep.has_warnings() ? kWarn : kOk;
        }
        if (sweep->parsed()) {
            const auto rows = evcam::threshold_sweep(cfg, thresholds);
            std::filesystem::create_directories(out);
            std::ofstream f(out / "sweep.csv", std::ios::binary);
            if (!f) throw evcam::IoError("cannot write " + (out / "sweep.csv").string());
            evcam::write_sweep_csv(f, rows);
            return kOk;
        }
        if (cal->parsed()) {
            const auto res = evcam::calibrate_scenario(cfg, target);
            std::filesystem::create_directories(out);
            std::ofstream f(out / "calibration.csv", std::ios::binary);
            if (!f) throw evcam::IoError("cannot write " + (out / "calibration.csv").string());
            f << "scenario,target_uW,c0_us,c1_us_per_event,polling_uW,event_uW,reduction_pct\n"
              << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", cfg.name, target, res.model.c0_us,
                             res.model.c1_us_per_event, res.pp_uw, res.ed_uw, res.reduction_pct);
            fmt::print("c0_us={:.6f} c1_us_per_event={:.6f} polling={:.3f} uW event={:.3f} uW\n", res.model.c0_us,
                       res.model.c1_us_per_event, res.pp_uw, res.ed_uw);
            return kOk;
        }
        if (gen->parsed()) {
            if (cfg.scene.kind == evcam::SceneSource::Kind::Directory) {
                throw evcam::ConfigError("gen needs a synthetic scene, not a frame directory");
            }
            const auto spec = cfg.scene.kind == evcam::SceneSource::Kind::Profile
                                  ? evcam::make_profile_scene(cfg.scene.profile, cfg.n_frames, cfg.seed,
                                                              cfg.scene.profile_options)
                                  : cfg.scene.objects;
            spec.validate(cfg.n_frames);
            std::filesystem::create_directories(out);
            evcam::SceneRenderer renderer(spec, cfg.seed);
            for (int k = 0; k < cfg.n_frames; ++k) {
                evcam::write_pgm(out / fmt::format("frame_{:05d}.pgm", k), renderer.next());
            }
            std::ofstream f(out / "labels.csv", std::ios::binary);
            if (!f) throw evcam::IoError("cannot write labels.csv");
            evcam::write_labels_csv(f, evcam::derive_labels(spec, cfg.rules, cfg.n_frames, cfg.scene.labels));
            return kOk;
        }
    } catch (const evcam::ConfigError& e) {
        log(Verbosity::Error, "config: {}", e.what());
        return kConfig;
    } catch (const evcam::CalibrationError& e) {
        log(Verbosity::Error, "calibration: {}", e.what());
        return kConfig;
    } catch (const evcam::IoError& e) {
        log(Verbosity::Error, "io: {}", e.what());
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        log(Verbosity::Error, "io: {}", e.what());
        return kIo;
    }
    return kOk;
}
