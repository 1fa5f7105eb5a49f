#include "evcam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

#include "evcam/camera_interface.hpp"

namespace evcam {

double distance(const Point& a, const Point& b) { return std::hypot(a.row - b.row, a.col - b.col); }

void BBox::expand(int row, int col) {
    if (empty()) {
        min_row = max_row = row;
        min_col = max_col = col;
        return;
    }
    min_row = std::min(min_row, row);
    max_row = std::max(max_row, row);
    min_col = std::min(min_col, col);
    max_col = std::max(max_col, col);
}

void BBox::expand(const BBox& other) {
    if (other.empty()) return;
    expand(other.min_row, other.min_col);
    expand(other.max_row, other.max_col);
}

bool BBox::contains(const Point& p) const {
    return !empty() && p.row >= min_row && p.row <= max_row && p.col >= min_col && p.col <= max_col;
}

void PipelineParams::validate() const {
    if (!(cluster_radius > 0 && merge_distance > 0 && gate > 0)) {
        throw ConfigError("cluster radius, merge distance and gate must be positive");
    }
    if (min_blob_pixels < 1 || min_blob_pixels_2 < 1 || max_size_diff < 1 || max_missed < 1) {
        throw ConfigError("blob filters, size limit and max_missed must be positive");
    }
    if (!(noise.process >= 0.0 && noise.measurement >= 0.0)) throw ConfigError("Kalman noise must be >= 0");
}

namespace {

struct Cluster {
    double sum_row = 0.0;
    double sum_col = 0.0;
    int n = 0;
    Point anchor;
    BBox box;

    Point centroid() const { return n > 0 ? Point{sum_row / n, sum_col / n} : anchor; }

    void absorb(const Cluster& o) {
        sum_row += o.sum_row;
        sum_col += o.sum_col;
        n += o.n;
        box.expand(o.box);
    }
};

void drop_small(std::vector<Cluster>& clusters, int min_pixels, DetectStats* stats) {
    auto keep_end = std::stable_partition(clusters.begin(), clusters.end(),
                                          [&](const Cluster& c) { return c.n >= min_pixels; });
    if (stats) {
        for (auto it = keep_end; it != clusters.end(); ++it) stats->filtered_pixels += it->n;
    }
    clusters.erase(keep_end, clusters.end());
}

}  // namespace

std::vector<Blob> detect_blobs(std::span<const AddressEvent> events, std::span<const Point> seeds,
                               const PipelineParams& params, DetectStats* stats) {
    DetectStats local;
    std::vector<Cluster> clusters;
    clusters.reserve(seeds.size() + 8);
    for (const auto& s : seeds) {
        Cluster c;
        c.anchor = s;
        clusters.push_back(c);
        ++local.ops;
    }

    for (const auto& ev : events) {
        const Point p{static_cast<double>(ev.row), static_cast<double>(ev.col)};
        int best = -1;
        double best_d = 0.0;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            const double d = distance(clusters[i].centroid(), p);
            ++local.ops;
            if (d <= params.cluster_radius && (best < 0 || d < best_d)) {
                best = static_cast<int>(i);
                best_d = d;
            }
        }
        if (best < 0) {
            Cluster c;
            c.anchor = p;
            clusters.push_back(c);
            best = static_cast<int>(clusters.size()) - 1;
        }
        auto& c = clusters[static_cast<std::size_t>(best)];
        c.sum_row += p.row;
        c.sum_col += p.col;
        ++c.n;
        c.box.expand(ev.row, ev.col);
        ++local.assigned_events;
    }
    local.clusters_formed = static_cast<int>(clusters.size());

    drop_small(clusters, params.min_blob_pixels, &local);

    for (;;) {
        int bi = -1;
        int bj = -1;
        double bd = 0.0;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = distance(clusters[i].centroid(), clusters[j].centroid());
                ++local.ops;
                if (d <= params.merge_distance && (bi < 0 || d < bd)) {
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                    bd = d;
                }
            }
        }
        if (bi < 0) break;
        clusters[static_cast<std::size_t>(bi)].absorb(clusters[static_cast<std::size_t>(bj)]);
        clusters.erase(clusters.begin() + bj);
    }

    drop_small(clusters, params.min_blob_pixels_2, &local);

    std::vector<Blob> blobs;
    blobs.reserve(clusters.size());
    for (const auto& c : clusters) {
        blobs.push_back(Blob{c.centroid(), c.box, c.n});
        local.kept_pixels += c.n;
    }
    if (stats) *stats = local;
    return blobs;
}

Association associate(std::span<const Blob> blobs, std::span<const Track> tracks, const PipelineParams& params) {
    Association out;
    struct Cand {
        double d;
        int track_id;
        int ti;
        int bi;
    };
    std::vector<Cand> cands;
    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
        const auto pos = tracks[ti].position();
        for (std::size_t bi = 0; bi < blobs.size(); ++bi) {
            ++out.ops;
            const double d = distance(pos, blobs[bi].centroid);
            if (d > params.gate) continue;
            const int dw = std::abs(tracks[ti].box.width() - blobs[bi].box.width());
            const int dh = std::abs(tracks[ti].box.height() - blobs[bi].box.height());
            if (std::max(dw, dh) > params.max_size_diff) continue;
            cands.push_back({d, tracks[ti].id, static_cast<int>(ti), static_cast<int>(bi)});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::tie(a.d, a.track_id, a.bi) < std::tie(b.d, b.track_id, b.bi);
    });

    std::vector<char> track_used(tracks.size(), 0);
    std::vector<char> blob_used(blobs.size(), 0);
    for (const auto& c : cands) {
        if (track_used[static_cast<std::size_t>(c.ti)] || blob_used[static_cast<std::size_t>(c.bi)]) continue;
        track_used[static_cast<std::size_t>(c.ti)] = 1;
        blob_used[static_cast<std::size_t>(c.bi)] = 1;
        out.matches.emplace_back(c.ti, c.bi);
    }
    for (std::size_t bi = 0; bi < blobs.size(); ++bi) {
        if (!blob_used[bi]) out.births.push_back(static_cast<int>(bi));
    }
    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
        if (track_used[ti]) continue;
        out.unmatched_tracks.push_back(static_cast<int>(ti));
        if (tracks[ti].missed + 1 > params.max_missed) out.deaths.push_back(static_cast<int>(ti));
    }
    return out;
}

Tracker::Tracker(PipelineParams params) : params_(params) { params_.validate(); }

std::vector<Point> Tracker::seeds() const {
    std::vector<Point> out;
    out.reserve(tracks_.size());
    for (const auto& t : tracks_) out.push_back(t.position());
    return out;
}

TrackerStep Tracker::step(std::span<const Blob> blobs) {
    TrackerStep result;
    for (auto& t : tracks_) {
        t.prev_position = t.position();
        t.kf = kalman_predict(t.kf, 1.0, params_.noise.process);
        ++result.ops;
    }

    const auto assoc = associate(blobs, tracks_, params_);
    result.ops += assoc.ops;

    for (const auto& [ti, bi] : assoc.matches) {
        auto& t = tracks_[static_cast<std::size_t>(ti)];
        const auto& b = blobs[static_cast<std::size_t>(bi)];
        bool degenerate = false;
        t.kf = kalman_update(t.kf, b.centroid.row, b.centroid.col, params_.noise.measurement, &degenerate);
        result.degenerate_updates += degenerate;
        t.box = b.box;
        t.missed = 0;
        ++t.age;
        t.last_seen = t.position();
        t.displacement = std::max(t.displacement, distance(t.last_seen, t.birth));
        t.status = Track::Status::Alive;
    }
    for (int ti : assoc.unmatched_tracks) {
        auto& t = tracks_[static_cast<std::size_t>(ti)];
        ++t.missed;
        ++t.age;
        t.status = t.missed > params_.max_missed ? Track::Status::Died : Track::Status::Alive;
    }

    std::vector<Track> survivors;
    survivors.reserve(tracks_.size() + assoc.births.size());
    for (auto& t : tracks_) {
        result.tracks.push_back(t);
        if (t.status != Track::Status::Died) survivors.push_back(std::move(t));
    }
    for (int bi : assoc.births) {
        const auto& b = blobs[static_cast<std::size_t>(bi)];
        Track t;
        t.id = next_id_++;
        t.kf = kalman_init(b.centroid.row, b.centroid.col);
        t.box = b.box;
        t.age = 1;
        t.birth = b.centroid;
        t.last_seen = b.centroid;
        t.prev_position = b.centroid;
        t.status = Track::Status::Born;
        result.tracks.push_back(t);
        survivors.push_back(std::move(t));
    }
    tracks_ = std::move(survivors);
    return result;
}

void TriggerRule::validate() const {
    if (id.empty()) throw ConfigError("trigger rule needs an id");
    auto in_plane = [](const Point& p) { return p.row >= 0 && p.row <= kRows - 1 && p.col >= 0 && p.col <= kCols - 1; };
    if (const auto* loop = std::get_if<LoopEnter>(&kind)) {
        const auto& r = loop->region;
        if (!(in_plane({r.min_row, r.min_col}) && in_plane({r.max_row, r.max_col}) && r.min_row <= r.max_row &&
              r.min_col <= r.max_col)) {
            throw ConfigError("loop region of rule '" + id + "' must be a rectangle inside the image plane");
        }
        if (loop->min_size < 0) throw ConfigError("loop min_size must be >= 0");
    } else if (const auto* line = std::get_if<LineCross>(&kind)) {
        if (!in_plane(line->a) || !in_plane(line->b) || line->a == line->b) {
            throw ConfigError("gate of rule '" + id + "' must be a non-degenerate segment inside the image plane");
        }
        if (line->direction < -1 || line->direction > 1) throw ConfigError("gate direction must be -1, 0 or 1");
    } else if (const auto* dis = std::get_if<Disappear>(&kind)) {
        if (!(dis->border_margin >= 0 && dis->min_displacement >= 0)) {
            throw ConfigError("disappear thresholds must be >= 0");
        }
    }
}

double side_of(const Point& a, const Point& b, const Point& p) {
    return (b.col - a.col) * (p.row - a.row) - (b.row - a.row) * (p.col - a.col);
}

bool crosses_gate(const LineCross& g, const Point& p0, const Point& p1) {
    const double s0 = side_of(g.a, g.b, p0);
    const double s1 = side_of(g.a, g.b, p1);
    const bool forward = s0 < 0.0 && s1 >= 0.0;
    const bool backward = s0 > 0.0 && s1 <= 0.0;
    if (!((g.direction >= 0 && forward) || (g.direction <= 0 && backward))) return false;
    // Where along the gate the motion meets its line.
    const double t = s0 / (s0 - s1);
    const Point hit{p0.row + t * (p1.row - p0.row), p0.col + t * (p1.col - p0.col)};
    const double gr = g.b.row - g.a.row;
    const double gc = g.b.col - g.a.col;
    const double u = ((hit.row - g.a.row) * gr + (hit.col - g.a.col) * gc) / (gr * gr + gc * gc);
    return u >= 0.0 && u <= 1.0;
}

bool away_from_border(const Point& p, double margin) {
    return p.row > margin && p.row < (kRows - 1) - margin && p.col > margin && p.col < (kCols - 1) - margin;
}

std::vector<TriggerEvent> evaluate_triggers(std::span<const Track> tracks, std::span<const TriggerRule> rules,
                                            int frame_index) {
    std::vector<TriggerEvent> out;
    for (const auto& t : tracks) {
        for (const auto& rule : rules) {
            bool fire = false;
            Point where = t.position();
            if (const auto* loop = std::get_if<LoopEnter>(&rule.kind)) {
                fire = t.status == Track::Status::Alive && !loop->region.contains(t.prev_position) &&
                       loop->region.contains(t.position()) &&
                       std::max(t.box.width(), t.box.height()) >= loop->min_size;
            } else if (const auto* line = std::get_if<LineCross>(&rule.kind)) {
                fire = t.status == Track::Status::Alive && crosses_gate(*line, t.prev_position, t.position());
            } else if (const auto* dis = std::get_if<Disappear>(&rule.kind)) {
                where = t.last_seen;
                fire = t.status == Track::Status::Died && away_from_border(t.last_seen, dis->border_margin) &&
                       t.displacement >= dis->min_displacement;
            }
            if (fire) out.push_back({frame_index, rule.id, t.id, where.row, where.col});
        }
    }
    return out;
}

TrackingPipeline::TrackingPipeline(PipelineParams params, std::vector<TriggerRule> rules)
    : params_(params), rules_(std::move(rules)), tracker_(params) {
    for (const auto& r : rules_) r.validate();
}

FrameResult TrackingPipeline::process_events(int frame_index, std::span<const AddressEvent> events) {
    DetectStats stats;
    const auto seeds = tracker_.seeds();
    auto blobs = detect_blobs(events, seeds, params_, &stats);
    auto res = process_blobs(frame_index, std::move(blobs));
    res.ops += stats.ops;
    return res;
}

FrameResult TrackingPipeline::process_blobs(int frame_index, std::vector<Blob> blobs) {
    FrameResult res;
    auto step = tracker_.step(blobs);
    degenerate_updates_ += step.degenerate_updates;
    res.ops = step.ops;
    res.triggers = evaluate_triggers(step.tracks, rules_, frame_index);
    res.blobs = std::move(blobs);
    return res;
}

void write_triggers_csv(std::ostream& os, std::span<const TriggerEvent> triggers) {
    os << "frame_index,rule_id,track_id,row,col\n";
    for (const auto& t : triggers) {
        os << fmt::format("{},{},{},{:.3f},{:.3f}\n", t.frame_index, t.rule_id, t.track_id, t.row, t.col);
    }
}

}  // namespace evcam
