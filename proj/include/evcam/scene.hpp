#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evcam/contrast_sensor.hpp"
#include "evcam/metrics.hpp"
#include "evcam/pipeline.hpp"
#include "evcam/rng.hpp"

namespace evcam {

struct Waypoint {
    int frame = 0;
    double row = 0.0;
    double col = 0.0;
};

/// A textured rectangle moving along a piecewise-linear path. It is drawn in
/// frames [entry_frame, exit_frame) and holds its first/last waypoint outside
/// the path's time span. The rectangle is clipped at the image border; its
/// center must stay inside the plane while visible.
struct SceneObject {
    int width = 16;
    int height = 10;
    int intensity = 160;
    int texture_contrast = 60;  // per-cell offset range, +/-
    std::uint64_t texture_seed = 1;
    std::vector<Waypoint> path;
    int entry_frame = 0;
    int exit_frame = 0;
    bool labeled = true;  // distractors carry no ground truth

    Point center_at(int frame) const;
    bool visible_at(int frame) const { return frame >= entry_frame && frame < exit_frame; }
};

struct SyntheticSceneSpec {
    std::uint64_t background_seed = 1;
    int background_structures = 6;  // static rectangles with sharp edges
    int noise_amplitude = 0;        // uniform integer noise in [-a, a] per pixel and frame
    std::vector<SceneObject> objects;

    /// Throws ConfigError on empty paths, unordered waypoints or a visible center off the plane.
    void validate(int n_frames) const;
};

/// Renders frames in order; noise comes from one Rng stream seeded once.
class SceneRenderer {
public:
    SceneRenderer(SyntheticSceneSpec spec, std::uint64_t seed);

    GrayFrame render(int frame_index);
    GrayFrame next() { return render(next_frame_++); }

private:
    SyntheticSceneSpec spec_;
    GrayFrame background_;
    std::vector<std::vector<std::uint8_t>> textures_;
    Rng noise_;
    int next_frame_ = 0;
};

std::vector<GrayFrame> generate_scene(const SyntheticSceneSpec& spec, int n_frames, std::uint64_t seed);

struct LabelOptions {
    int stop_hold = 6;  // frames an object must stay still for a stop to count
    int window = kDefaultMatchWindow;
};

/// Ground truth from the scripted trajectories of labeled objects: loop entries and gate
/// crossings of object centers, and stops away from the border after enough
/// travel (for Disappear rules), labeled at the first motionless frame.
std::vector<GroundTruthLabel> derive_labels(const SyntheticSceneSpec& spec, std::span<const TriggerRule> rules,
                                            int n_frames, const LabelOptions& opts = {});

/// Procedural scene families used by the bundled scenarios.
enum class SceneProfile { Static, Parking, Street, People };

struct ProfileOptions {
    double busy_fraction = 0.16;  // share of frames with a moving object of interest
    int distractors = 0;          // small sub-threshold movers
    int jitterers = 0;            // objects fidgeting in place
    int noise_amplitude = 2;
};

SceneProfile parse_profile(const std::string& name);

SyntheticSceneSpec make_profile_scene(SceneProfile profile, int n_frames, std::uint64_t seed,
                                      const ProfileOptions& opts);

}  // namespace evcam
