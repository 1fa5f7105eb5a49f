#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evcam/baseline.hpp"
#include "evcam/camera_interface.hpp"
#include "evcam/energy.hpp"
#include "evcam/pipeline.hpp"
#include "evcam/power_manager.hpp"
#include "evcam/scene.hpp"

namespace evcam {

/// Where the frames of a scenario come from.
struct SceneSource {
    enum class Kind { Profile, Objects, Directory };
    Kind kind = Kind::Profile;
    SceneProfile profile = SceneProfile::Static;
    ProfileOptions profile_options;
    SyntheticSceneSpec objects;           // Kind::Objects
    std::filesystem::path frames_dir;     // Kind::Directory
    std::filesystem::path labels_csv;     // optional with Kind::Directory
    LabelOptions labels;
};

struct ScenarioConfig {
    std::string name = "scenario";
    int n_frames = 100;
    std::uint64_t seed = 1;
    double contrast_threshold = kDefaultContrastThreshold;
    InterfaceConfig interface;
    TimingParams timing;
    ComponentPowerTable power;
    ProcessingModel processing;
    std::optional<double> calibrate_pp_uw;  // fit the processing model to this polling power first
    PipelineParams pipeline;
    BaselineParams baseline;
    std::vector<TriggerRule> rules;
    SceneSource scene;

    /// Throws ConfigError on the first inconsistent value.
    void validate() const;
};

/// INI reader. Sections: [scenario] [sensor] [interface] [timing] [power]
/// [processing] [pipeline] [baseline] [scene] [object.<n>] [rule.<id>].
/// Unknown sections or keys are errors. Relative paths resolve against `base_dir`.
ScenarioConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace evcam
