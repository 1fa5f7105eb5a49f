#include "evcam/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "evcam/pgm.hpp"

namespace evcam {

namespace pt = boost::property_tree;

namespace {

// One INI section with consumption tracking so leftovers can be reported.
class Section {
public:
    Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

    std::optional<std::string> raw(const std::string& key) {
        for (const auto& [k, v] : tree_) {
            if (k == key) {
                used_.insert(key);
                return v.data();
            }
        }
        return std::nullopt;
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (const auto s = raw(key)) out = convert<T>(key, *s);
    }

    template <class T>
    void get(const std::string& key, std::optional<T>& out) {
        if (const auto s = raw(key)) out = convert<T>(key, *s);
    }

    template <class T>
    T require(const std::string& key) {
        const auto s = raw(key);
        if (!s) throw ConfigError(fmt::format("[{}] missing key '{}'", name_, key));
        return convert<T>(key, *s);
    }

    std::vector<double> numbers(const std::string& key, std::size_t n) {
        const auto s = raw(key);
        if (!s) throw ConfigError(fmt::format("[{}] missing key '{}'", name_, key));
        std::istringstream in(*s);
        std::vector<double> out;
        double v;
        while (in >> v) out.push_back(v);
        if (out.size() != n || !in.eof()) {
            throw ConfigError(fmt::format("[{}] '{}' needs {} numbers, got '{}'", name_, key, n, *s));
        }
        return out;
    }

    void finish() const {
        for (const auto& [k, v] : tree_) {
            if (!used_.contains(k)) throw ConfigError(fmt::format("[{}] unknown key '{}'", name_, k));
        }
    }

    const std::string& name() const { return name_; }

private:
    template <class T>
    T convert(const std::string& key, const std::string& s) const {
        if constexpr (std::is_same_v<T, std::string>) {
            return s;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (s == "true" || s == "1" || s == "yes") return true;
            if (s == "false" || s == "0" || s == "no") return false;
            throw ConfigError(fmt::format("[{}] '{}' is not a boolean: '{}'", name_, key, s));
        } else {
            std::istringstream in(s);
            T v{};
            in >> v;
            if (in.fail() || !(in >> std::ws).eof()) {
                throw ConfigError(fmt::format("[{}] bad value for '{}': '{}'", name_, key, s));
            }
            return v;
        }
    }

    std::string name_;
    const pt::ptree& tree_;
    std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

SceneObject parse_object(Section& s) {
    SceneObject o;
    s.get("width", o.width);
    s.get("height", o.height);
    s.get("intensity", o.intensity);
    s.get("texture_contrast", o.texture_contrast);
    s.get("texture_seed", o.texture_seed);
    s.get("entry", o.entry_frame);
    s.get("labeled", o.labeled);
    o.exit_frame = o.entry_frame;
    // path = frame:row:col frame:row:col ...
    std::istringstream in(s.require<std::string>("path"));
    std::string tok;
    while (in >> tok) {
        Waypoint w;
        char c1 = 0, c2 = 0;
        std::istringstream t(tok);
        if (!(t >> w.frame >> c1 >> w.row >> c2 >> w.col) || c1 != ':' || c2 != ':' || !(t >> std::ws).eof()) {
            throw ConfigError(fmt::format("[{}] bad waypoint '{}', expected frame:row:col", s.name(), tok));
        }
        o.path.push_back(w);
    }
    if (o.path.empty()) throw ConfigError(fmt::format("[{}] path has no waypoints", s.name()));
    o.exit_frame = o.path.back().frame + 1;
    s.get("exit", o.exit_frame);
    return o;
}

TriggerRule parse_rule(const std::string& id, Section& s) {
    TriggerRule rule;
    rule.id = id;
    const auto type = s.require<std::string>("type");
    if (type == "loop") {
        LoopEnter loop;
        const auto r = s.numbers("region", 4);
        loop.region = {r[0], r[1], r[2], r[3]};
        s.get("min_size", loop.min_size);
        rule.kind = loop;
    } else if (type == "gate") {
        LineCross gate;
        const auto a = s.numbers("a", 2);
        const auto b = s.numbers("b", 2);
        gate.a = {a[0], a[1]};
        gate.b = {b[0], b[1]};
        s.get("direction", gate.direction);
        rule.kind = gate;
    } else if (type == "disappear") {
        Disappear dis;
        s.get("border_margin", dis.border_margin);
        s.get("min_displacement", dis.min_displacement);
        rule.kind = dis;
    } else {
        throw ConfigError(fmt::format("[{}] unknown rule type '{}'", s.name(), type));
    }
    return rule;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (n_frames < 1) throw ConfigError("frames must be >= 1");
    if (!(contrast_threshold >= 0.0 && contrast_threshold <= 1.0)) {
        throw ConfigError("contrast threshold must lie in [0, 1]");
    }
    interface.validate();
    timing.validate();
    power.validate();
    processing.validate();
    pipeline.validate();
    if (baseline.diff_threshold < 0 || baseline.diff_threshold > 255 || baseline.min_pixels < 1) {
        throw ConfigError("baseline threshold must lie in [0, 255] and min_pixels be >= 1");
    }
    if (timing.t_ro_us != interface.t_readout_us) throw ConfigError("readout window and t_ro must agree");
    if (calibrate_pp_uw && !(*calibrate_pp_uw > 0)) throw ConfigError("calibration target must be positive");
    std::set<std::string> ids;
    for (const auto& r : rules) {
        r.validate();
        if (!ids.insert(r.id).second) throw ConfigError("duplicate rule id '" + r.id + "'");
    }
    if (scene.kind == SceneSource::Kind::Objects) scene.objects.validate(n_frames);
    if (scene.kind != SceneSource::Kind::Directory) {
        if (!(scene.profile_options.busy_fraction >= 0 && scene.profile_options.busy_fraction <= 1)) {
            throw ConfigError("busy_fraction must lie in [0, 1]");
        }
        if (scene.profile_options.distractors < 0 || scene.profile_options.jitterers < 0) {
            throw ConfigError("distractors and jitterers must be >= 0");
        }
    }
    if (scene.labels.stop_hold < 1 || scene.labels.window < 0) throw ConfigError("bad label options");
}

ScenarioConfig parse_config(std::istream& is, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    ScenarioConfig cfg;
    std::optional<double> t_readout;
    std::map<int, SceneObject> objects;

    for (const auto& [name, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(fmt::format("key '{}' outside of any section", name));
        }
        Section s(name, body);
        if (name == "scenario") {
            s.get("name", cfg.name);
            s.get("frames", cfg.n_frames);
            s.get("seed", cfg.seed);
        } else if (name == "sensor") {
            s.get("contrast_threshold", cfg.contrast_threshold);
        } else if (name == "interface") {
            s.get("wake_threshold", cfg.interface.wake_threshold);
            s.get("frame_rate", cfg.interface.frame_rate);
            s.get("t_readout_us", t_readout);
            if (auto p = s.raw("policy")) {
                if (*p == "gated") {
                    cfg.interface.policy = ReadoutPolicy::ThresholdGated;
                } else if (*p == "always") {
                    cfg.interface.policy = ReadoutPolicy::AlwaysActive;
                } else {
                    throw ConfigError("[interface] policy must be 'gated' or 'always'");
                }
            }
        } else if (name == "timing") {
            s.get("t_on_us", cfg.timing.t_on_us);
            s.get("t_boot_us", cfg.timing.t_boot_us);
        } else if (name == "power") {
            auto& p = cfg.power;
            s.get("sensor_idle", p.sensor_idle);
            s.get("sensor_active", p.sensor_active);
            s.get("fpga_base", p.fpga_base);
            s.get("fpga_ringosc_on", p.fpga_ringosc_on);
            s.get("fpga_spi_extra", p.fpga_spi_extra);
            s.get("soc_idle", p.soc_idle);
            s.get("soc_active", p.soc_active);
            s.get("cluster_active", p.cluster_active);
            s.get("cluster_gated", p.cluster_gated);
            s.get("fll_active", p.fll_active);
            s.get("fll_gated", p.fll_gated);
        } else if (name == "processing") {
            s.get("c0_us", cfg.processing.c0_us);
            s.get("c1_us_per_event", cfg.processing.c1_us_per_event);
            s.get("calibrate_pp_uw", cfg.calibrate_pp_uw);
        } else if (name == "pipeline") {
            auto& p = cfg.pipeline;
            s.get("cluster_radius", p.cluster_radius);
            s.get("min_blob_pixels", p.min_blob_pixels);
            s.get("merge_distance", p.merge_distance);
            s.get("min_blob_pixels_2", p.min_blob_pixels_2);
            s.get("gate", p.gate);
            s.get("max_size_diff", p.max_size_diff);
            s.get("max_missed", p.max_missed);
            s.get("process_noise", p.noise.process);
            s.get("measurement_noise", p.noise.measurement);
        } else if (name == "baseline") {
            s.get("diff_threshold", cfg.baseline.diff_threshold);
            s.get("min_pixels", cfg.baseline.min_pixels);
        } else if (name == "scene") {
            auto& sc = cfg.scene;
            const auto source = s.require<std::string>("source");
            if (source == "profile") {
                sc.kind = SceneSource::Kind::Profile;
                sc.profile = parse_profile(s.require<std::string>("profile"));
            } else if (source == "objects") {
                sc.kind = SceneSource::Kind::Objects;
            } else if (source == "frames") {
                sc.kind = SceneSource::Kind::Directory;
                sc.frames_dir = resolve(base_dir, s.require<std::string>("frames_dir"));
                if (auto l = s.raw("labels")) sc.labels_csv = resolve(base_dir, *l);
            } else {
                throw ConfigError("[scene] source must be profile, objects or frames");
            }
            s.get("busy_fraction", sc.profile_options.busy_fraction);
            s.get("distractors", sc.profile_options.distractors);
            s.get("jitterers", sc.profile_options.jitterers);
            s.get("noise_amplitude", sc.profile_options.noise_amplitude);
            sc.objects.noise_amplitude = sc.profile_options.noise_amplitude;
            s.get("background_seed", sc.objects.background_seed);
            s.get("background_structures", sc.objects.background_structures);
            s.get("stop_hold", sc.labels.stop_hold);
            s.get("match_window", sc.labels.window);
        } else if (name.starts_with("object.")) {
            int idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoi(name.substr(7), &used);
                if (used != name.size() - 7) throw std::invalid_argument(name);
            } catch (const std::exception&) {
                throw ConfigError(fmt::format("[{}] object sections need a numeric index", name));
            }
            objects[idx] = parse_object(s);
        } else if (name.starts_with("rule.")) {
            cfg.rules.push_back(parse_rule(name.substr(5), s));
        } else {
            throw ConfigError(fmt::format("unknown section [{}]", name));
        }
        s.finish();
    }

    if (t_readout) {
        cfg.interface.t_readout_us = *t_readout;
        cfg.timing.t_ro_us = *t_readout;
    }
    for (auto& [idx, o] : objects) cfg.scene.objects.objects.push_back(std::move(o));
    if (!objects.empty() && cfg.scene.kind != SceneSource::Kind::Objects) {
        throw ConfigError("[object.*] sections need [scene] source = objects");
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config " + path.string());
    return parse_config(f, path.parent_path());
}

}  // namespace evcam
