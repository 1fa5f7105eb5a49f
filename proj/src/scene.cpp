#include "evcam/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "evcam/camera_interface.hpp"

namespace evcam {

namespace {

constexpr int kCell = 2;  // texture cell edge, pixels

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

struct Placement {
    int top = 0;
    int left = 0;
};

Placement place(const SceneObject& o, int frame) {
    const auto c = o.center_at(frame);
    return {round_half_up(c.row - o.height / 2.0), round_half_up(c.col - o.width / 2.0)};
}

Point rendered_center(const SceneObject& o, int frame) {
    const auto p = place(o, frame);
    return {p.top + o.height / 2.0, p.left + o.width / 2.0};
}

std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

}  // namespace

Point SceneObject::center_at(int frame) const {
    if (path.empty()) return {};
    if (frame <= path.front().frame) return {path.front().row, path.front().col};
    if (frame >= path.back().frame) return {path.back().row, path.back().col};
    for (std::size_t i = 1; i < path.size(); ++i) {
        const auto& a = path[i - 1];
        const auto& b = path[i];
        if (frame <= b.frame) {
            const double t = b.frame == a.frame ? 1.0 : static_cast<double>(frame - a.frame) / (b.frame - a.frame);
            return {a.row + t * (b.row - a.row), a.col + t * (b.col - a.col)};
        }
    }
    return {path.back().row, path.back().col};
}

void SyntheticSceneSpec::validate(int n_frames) const {
    if (n_frames <= 0) throw ConfigError("scene needs at least one frame");
    if (noise_amplitude < 0 || noise_amplitude > 64) throw ConfigError("noise amplitude must lie in [0, 64]");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        if (o.path.empty()) throw ConfigError(fmt::format("object {} has no waypoints", i));
        if (o.width < 1 || o.height < 1 || o.width > kCols || o.height > kRows) {
            throw ConfigError(fmt::format("object {} has an invalid size", i));
        }
        for (std::size_t k = 1; k < o.path.size(); ++k) {
            if (o.path[k].frame < o.path[k - 1].frame) {
                throw ConfigError(fmt::format("object {} waypoints are not in frame order", i));
            }
        }
        const int from = std::max(0, o.entry_frame);
        const int to = std::min(n_frames, o.exit_frame);
        for (int f = from; f < to; ++f) {
            const auto c = o.center_at(f);
            if (c.row < 0 || c.row > kRows - 1 || c.col < 0 || c.col > kCols - 1) {
                throw ConfigError(fmt::format("object {} is out of bounds at frame {} ({:.1f},{:.1f})", i, f, c.row,
                                              c.col));
            }
        }
    }
}

SceneRenderer::SceneRenderer(SyntheticSceneSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), noise_(seed) {
    Rng bg(spec_.background_seed);
    const double f_col = 1 + bg.uniform_int(0, 1);
    const double f_row = 1 + bg.uniform_int(0, 1);
    const double ph_col = bg.uniform(0.0, 2 * std::numbers::pi);
    const double ph_row = bg.uniform(0.0, 2 * std::numbers::pi);
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            const double v = 80.0 + 12.0 * std::sin(2 * std::numbers::pi * f_col * c / kCols + ph_col) +
                             8.0 * std::sin(2 * std::numbers::pi * f_row * r / kRows + ph_row);
            background_.set(r, c, clamp_u8(round_half_up(v)));
        }
    }
    // Static darker structures give the background stable edges.
    for (int s = 0; s < spec_.background_structures; ++s) {
        const int h = bg.uniform_int(4, 14);
        const int w = bg.uniform_int(6, 30);
        const int top = bg.uniform_int(0, kRows - h);
        const int left = bg.uniform_int(0, kCols - w);
        for (int r = top; r < top + h; ++r) {
            for (int c = left; c < left + w; ++c) background_.set(r, c, clamp_u8(background_.at(r, c) - 50));
        }
    }

    for (const auto& o : spec_.objects) {
        Rng tex(o.texture_seed);
        const int cells_r = (o.height + kCell - 1) / kCell;
        const int cells_c = (o.width + kCell - 1) / kCell;
        std::vector<std::uint8_t> cells(static_cast<std::size_t>(cells_r * cells_c));
        for (auto& cell : cells) cell = clamp_u8(o.intensity + o.texture_contrast * tex.uniform_int(-1, 1));
        textures_.push_back(std::move(cells));
    }
}

GrayFrame SceneRenderer::render(int frame_index) {
    GrayFrame frame = background_;
    for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
        const auto& o = spec_.objects[i];
        if (!o.visible_at(frame_index)) continue;
        const auto p = place(o, frame_index);
        const int cells_c = (o.width + kCell - 1) / kCell;
        const auto& tex = textures_[i];
        for (int r = 0; r < o.height; ++r) {
            const int rr = p.top + r;
            if (rr < 0 || rr >= kRows) continue;
            for (int c = 0; c < o.width; ++c) {
                const int cc = p.left + c;
                if (cc < 0 || cc >= kCols) continue;
                frame.set(rr, cc, tex[static_cast<std::size_t>((r / kCell) * cells_c + c / kCell)]);
            }
        }
    }
    if (spec_.noise_amplitude > 0) {
        const int a = spec_.noise_amplitude;
        for (int r = 0; r < kRows; ++r) {
            for (int c = 0; c < kCols; ++c) frame.set(r, c, clamp_u8(frame.at(r, c) + noise_.uniform_int(-a, a)));
        }
    }
    return frame;
}

std::vector<GrayFrame> generate_scene(const SyntheticSceneSpec& spec, int n_frames, std::uint64_t seed) {
    spec.validate(n_frames);
    SceneRenderer renderer(spec, seed);
    std::vector<GrayFrame> frames;
    frames.reserve(static_cast<std::size_t>(n_frames));
    for (int f = 0; f < n_frames; ++f) frames.push_back(renderer.next());
    return frames;
}

std::vector<GroundTruthLabel> derive_labels(const SyntheticSceneSpec& spec, std::span<const TriggerRule> rules,
                                            int n_frames, const LabelOptions& opts) {
    std::vector<GroundTruthLabel> labels;
    for (const auto& o : spec.objects) {
        const int from = std::max(0, o.entry_frame);
        const int to = std::min(n_frames, o.exit_frame);
        if (!o.labeled || to - from < 2) continue;
        auto moved = [&](int f) { return rendered_center(o, f) != rendered_center(o, f - 1); };

        for (const auto& rule : rules) {
            if (const auto* loop = std::get_if<LoopEnter>(&rule.kind)) {
                for (int f = from + 1; f < to; ++f) {
                    if (!loop->region.contains(rendered_center(o, f - 1)) &&
                        loop->region.contains(rendered_center(o, f))) {
                        labels.push_back({f, rule.id, opts.window});
                    }
                }
            } else if (const auto* gate = std::get_if<LineCross>(&rule.kind)) {
                for (int f = from + 1; f < to; ++f) {
                    if (crosses_gate(*gate, rendered_center(o, f - 1), rendered_center(o, f))) {
                        labels.push_back({f, rule.id, opts.window});
                    }
                }
            } else if (const auto* dis = std::get_if<Disappear>(&rule.kind)) {
                int seg_start = from;
                double excursion = 0.0;
                for (int f = from + 1; f < to; ++f) {
                    if (!moved(f)) {
                        seg_start = f;
                        excursion = 0.0;
                        continue;
                    }
                    excursion = std::max(excursion, distance(rendered_center(o, f), rendered_center(o, seg_start)));
                    if (f + opts.stop_hold >= to) continue;
                    bool holds = true;
                    for (int k = 1; k <= opts.stop_hold && holds; ++k) holds = !moved(f + k);
                    if (holds && away_from_border(rendered_center(o, f), dis->border_margin) &&
                        excursion >= dis->min_displacement) {
                        labels.push_back({f + 1, rule.id, opts.window});
                    }
                }
            }
        }
    }
    std::stable_sort(labels.begin(), labels.end(),
                     [](const GroundTruthLabel& a, const GroundTruthLabel& b) { return a.frame_index < b.frame_index; });
    return labels;
}

SceneProfile parse_profile(const std::string& name) {
    if (name == "static") return SceneProfile::Static;
    if (name == "parking") return SceneProfile::Parking;
    if (name == "street") return SceneProfile::Street;
    if (name == "people") return SceneProfile::People;
    throw ConfigError("unknown scene profile '" + name + "'");
}

namespace {

constexpr int kObjectLevel = 200;
constexpr int kObjectContrast = 50;

SceneObject make_object(Rng& rng, int w, int h) {
    SceneObject o;
    o.width = w;
    o.height = h;
    o.intensity = kObjectLevel;
    o.texture_contrast = kObjectContrast;
    o.texture_seed = rng.next_u64();
    return o;
}

// Start frames of `count` trips of `duration` frames, one slot each, jittered inside the slot.
std::vector<int> schedule(Rng& rng, int n_frames, int count, int duration) {
    std::vector<int> starts;
    if (count <= 0) return starts;
    const double slot = static_cast<double>(n_frames) / count;
    for (int i = 0; i < count; ++i) {
        const int base = static_cast<int>(i * slot);
        const int slack = std::max(0, static_cast<int>(slot) - duration - 2);
        starts.push_back(base + 1 + (slack > 0 ? rng.uniform_int(0, slack) : 0));
    }
    return starts;
}

// Straight traversal between two points at `speed` px/frame, visible from start to arrival.
SceneObject traverse(SceneObject o, int start, Point from, Point to, double speed) {
    const int dur = std::max(1, static_cast<int>(std::ceil(distance(from, to) / speed)));
    o.path = {{start, from.row, from.col}, {start + dur, to.row, to.col}};
    o.entry_frame = start;
    o.exit_frame = start + dur + 1;
    return o;
}

void add_distractors(SyntheticSceneSpec& spec, Rng& rng, int n_frames, int count) {
    for (int i = 0; i < count; ++i) {
        auto o = make_object(rng, 3, 5);
        o.labeled = false;
        const int start = rng.uniform_int(0, std::max(0, n_frames - 130));
        const double row = rng.uniform_int(6, kRows - 7);
        const bool ltr = rng.uniform_int(0, 1) == 1;
        const Point a{row, ltr ? 1.0 : kCols - 2.0};
        const Point b{row + rng.uniform_int(-4, 4), ltr ? kCols - 2.0 : 1.0};
        spec.objects.push_back(traverse(o, start, a, b, 1.0));
    }
}

// Jitterers go into quiet stretches so they never overlap a labeled object in time.
void add_jitterers(SyntheticSceneSpec& spec, Rng& rng, int n_frames, int count) {
    constexpr int kLife = 60;
    constexpr int kGuard = 5;
    auto clashes = [&](int start) {
        return std::any_of(spec.objects.begin(), spec.objects.end(), [&](const SceneObject& o) {
            return o.labeled && start - kGuard < o.exit_frame && o.entry_frame < start + kLife + kGuard;
        });
    };
    for (int i = 0; i < count; ++i) {
        auto o = make_object(rng, 8, 14);
        int start = -1;
        for (int attempt = 0; attempt < 32 && start < 0; ++attempt) {
            const int s = rng.uniform_int(0, std::max(0, n_frames - 80));
            if (!clashes(s)) start = s;
        }
        if (start < 0) continue;
        const double row = rng.uniform_int(20, kRows - 21);
        const double col = rng.uniform_int(30, kCols - 31);
        o.entry_frame = start;
        for (int k = 0; k < 24; ++k) {
            const double dr = rng.uniform_int(-1, 1);
            const double dc = rng.uniform_int(-1, 1);
            o.path.push_back({start + k, row + dr, col + dc});
        }
        o.path.push_back({start + 24, row, col});
        o.exit_frame = start + kLife;
        spec.objects.push_back(std::move(o));
    }
}

SyntheticSceneSpec parking(int n_frames, Rng& rng, const ProfileOptions& opts) {
    SyntheticSceneSpec spec;
    constexpr double kSpeed = 3.0;
    const int trip = static_cast<int>(std::ceil((kCols - 3.0) / kSpeed));
    const int cars = std::max(1, static_cast<int>(std::lround(opts.busy_fraction * n_frames / trip)));
    for (int start : schedule(rng, n_frames, cars, trip)) {
        auto car = make_object(rng, rng.uniform_int(22, 26), rng.uniform_int(10, 12));
        const double lane = rng.uniform_int(24, 42);
        const bool entering = rng.uniform() < 0.8;
        const Point left{lane, 1.0};
        const Point right{lane, kCols - 2.0};
        spec.objects.push_back(traverse(car, start, entering ? left : right, entering ? right : left, kSpeed));
    }
    add_distractors(spec, rng, n_frames, opts.distractors);
    return spec;
}

SyntheticSceneSpec street(int n_frames, Rng& rng, const ProfileOptions& opts) {
    SyntheticSceneSpec spec;
    constexpr double kSpeed = 3.0;
    // Horizontal lanes cross the plane; vertical lanes run top<->bottom.
    const int trip_h = static_cast<int>(std::ceil((kCols - 3.0) / kSpeed));
    const int trip_v = static_cast<int>(std::ceil((kRows - 3.0) / kSpeed));
    const double mean_trip = 0.5 * (trip_h + trip_v);
    const int vehicles = std::max(1, static_cast<int>(std::lround(opts.busy_fraction * n_frames / mean_trip)));
    const auto starts = schedule(rng, n_frames, vehicles, trip_h);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const int lane = static_cast<int>(i % 4);
        if (lane < 2) {
            auto v = make_object(rng, rng.uniform_int(18, 22), 10);
            const double row = lane == 0 ? 36.0 : 24.0;
            const Point w{row, 1.0};
            const Point e{row, kCols - 2.0};
            spec.objects.push_back(traverse(v, starts[i], lane == 0 ? w : e, lane == 0 ? e : w, kSpeed));
        } else {
            auto v = make_object(rng, 10, rng.uniform_int(14, 16));
            const double col = lane == 2 ? 58.0 : 72.0;
            const Point n{1.0, col};
            const Point s{kRows - 2.0, col};
            spec.objects.push_back(traverse(v, starts[i], lane == 2 ? n : s, lane == 2 ? s : n, kSpeed));
        }
    }
    add_distractors(spec, rng, n_frames, opts.distractors);
    return spec;
}

SyntheticSceneSpec people(int n_frames, Rng& rng, const ProfileOptions& opts) {
    SyntheticSceneSpec spec;
    constexpr double kSpeed = 2.0;
    // A visit: walk in from a side border, stop at a landmark, walk out.
    const int mean_walk = static_cast<int>(std::ceil((kCols - 3.0) / kSpeed));
    constexpr int kMeanStop = 25;
    const int visits = std::max(1, static_cast<int>(std::lround(opts.busy_fraction * n_frames / mean_walk)));
    for (int start : schedule(rng, n_frames, visits, mean_walk + kMeanStop + 40)) {
        auto p = make_object(rng, 12, 20);
        const double row = rng.uniform_int(20, kRows - 21);
        const double stop_col = rng.uniform_int(28, kCols - 29);
        const bool from_left = rng.uniform_int(0, 1) == 1;
        const bool exit_right = rng.uniform_int(0, 1) == 1;
        const double in_col = from_left ? 1.0 : kCols - 2.0;
        const double out_col = exit_right ? kCols - 2.0 : 1.0;
        const int stop = rng.uniform_int(15, 35);
        const int t_in = static_cast<int>(std::ceil(std::abs(stop_col - in_col) / kSpeed));
        const int t_out = static_cast<int>(std::ceil(std::abs(out_col - stop_col) / kSpeed));
        p.path = {{start, row, in_col},
                  {start + t_in, row, stop_col},
                  {start + t_in + stop, row, stop_col},
                  {start + t_in + stop + t_out, row, out_col}};
        p.entry_frame = start;
        p.exit_frame = start + t_in + stop + t_out + 1;
        spec.objects.push_back(std::move(p));
    }
    add_distractors(spec, rng, n_frames, opts.distractors);
    add_jitterers(spec, rng, n_frames, opts.jitterers);
    return spec;
}

}  // namespace

SyntheticSceneSpec make_profile_scene(SceneProfile profile, int n_frames, std::uint64_t seed,
                                      const ProfileOptions& opts) {
    Rng rng(seed);
    SyntheticSceneSpec spec;
    switch (profile) {
        case SceneProfile::Static: break;
        case SceneProfile::Parking: spec = parking(n_frames, rng, opts); break;
        case SceneProfile::Street: spec = street(n_frames, rng, opts); break;
        case SceneProfile::People: spec = people(n_frames, rng, opts); break;
    }
    spec.background_seed = seed ^ 0x9E3779B97F4A7C15ull;
    spec.noise_amplitude = opts.noise_amplitude;
    // Trips scheduled near the end may run past the horizon; keep their visible part.
    std::erase_if(spec.objects, [&](const SceneObject& o) { return o.entry_frame >= n_frames; });
    return spec;
}

}  // namespace evcam
