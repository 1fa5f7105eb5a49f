#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evcam/contrast_sensor.hpp"
#include "evcam/kalman.hpp"

namespace evcam {

struct Point {
    double row = 0.0;
    double col = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

/// Inclusive pixel bounds.
struct BBox {
    int min_row = 0;
    int min_col = 0;
    int max_row = -1;
    int max_col = -1;

    int height() const { return max_row - min_row + 1; }
    int width() const { return max_col - min_col + 1; }
    bool empty() const { return max_row < min_row || max_col < min_col; }
    void expand(int row, int col);
    void expand(const BBox& other);
    bool contains(const Point& p) const;

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Blob {
    Point centroid;
    BBox box;
    int pixel_count = 0;

    friend bool operator==(const Blob&, const Blob&) = default;
};

struct PipelineParams {
    double cluster_radius = 6.0;
    int min_blob_pixels = 40;
    double merge_distance = 8.0;
    int min_blob_pixels_2 = 40;
    double gate = 10.0;
    int max_size_diff = 24;
    int max_missed = 3;
    KalmanNoise noise{};

    void validate() const;
};

struct DetectStats {
    int clusters_formed = 0;  // including seeded clusters
    int assigned_events = 0;
    int kept_pixels = 0;      // after both filters
    int filtered_pixels = 0;
    long ops = 0;             // distance evaluations plus seeded clusters
};

/// Single pass over events in stream order. Each event joins the nearest
/// cluster (Euclidean, ties to the older cluster) whose running centroid lies
/// within cluster_radius, otherwise it opens a new cluster. Seeded clusters
/// sit at the seed until their first pixel arrives. Then: drop clusters under
/// min_blob_pixels, merge the closest pair within merge_distance until none
/// is left (count-weighted centroid, box union), drop under min_blob_pixels_2.
std::vector<Blob> detect_blobs(std::span<const AddressEvent> events, std::span<const Point> seeds,
                               const PipelineParams& params, DetectStats* stats = nullptr);

struct Track {
    enum class Status { Alive, Born, Died };

    int id = 0;
    KalmanState kf;
    BBox box;
    int age = 0;
    int missed = 0;
    Point birth;
    Point last_seen;        // filtered position at the last matched frame
    double displacement = 0.0;  // farthest excursion of last_seen from birth
    Point prev_position;    // position at the end of the previous frame
    Status status = Status::Born;

    Point position() const { return {kf.x(0), kf.x(1)}; }
};

struct Association {
    std::vector<std::pair<int, int>> matches;  // (track index, blob index)
    std::vector<int> births;                   // unmatched blob indices
    std::vector<int> deaths;                   // track indices whose missed count will exceed max_missed
    std::vector<int> unmatched_tracks;
    long ops = 0;
};

/// Greedy matching of predicted track positions to blob centroids. Only pairs
/// within `gate` and with max(|dw|,|dh|) <= max_size_diff are eligible; pairs
/// are taken in order of (distance, track id, blob index).
Association associate(std::span<const Blob> blobs, std::span<const Track> tracks, const PipelineParams& params);

struct TrackerStep {
    std::vector<Track> tracks;  // alive and born after this frame, plus those that died in it
    long ops = 0;
    int degenerate_updates = 0;
};

class Tracker {
public:
    explicit Tracker(PipelineParams params);

    /// Advances every track by one frame and absorbs the detections.
    TrackerStep step(std::span<const Blob> blobs);

    const std::vector<Track>& tracks() const { return tracks_; }
    std::vector<Point> seeds() const;

private:
    PipelineParams params_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
};

struct Rect {
    double min_row = 0.0;
    double min_col = 0.0;
    double max_row = 0.0;
    double max_col = 0.0;

    bool contains(const Point& p) const {
        return p.row >= min_row && p.row <= max_row && p.col >= min_col && p.col <= max_col;
    }
};

struct LoopEnter {
    Rect region;
    int min_size = 0;  // larger bbox side must reach this
};

/// Fires when the centroid steps across segment a-b. direction +1 counts
/// moves where side_of(a, b, p) goes from negative to nonnegative, -1 the
/// reverse, 0 both.
struct LineCross {
    Point a;
    Point b;
    int direction = 0;
};

struct Disappear {
    double border_margin = 5.0;
    double min_displacement = 8.0;
};

struct TriggerRule {
    std::string id;
    std::variant<LoopEnter, LineCross, Disappear> kind;

    void validate() const;
};

struct TriggerEvent {
    int frame_index = 0;
    std::string rule_id;
    int track_id = 0;
    double row = 0.0;
    double col = 0.0;

    friend bool operator==(const TriggerEvent&, const TriggerEvent&) = default;
};

/// Signed side of p relative to a->b (2D cross product).
double side_of(const Point& a, const Point& b, const Point& p);

/// True when moving from `from` to `to` crosses the gate segment in its direction.
bool crosses_gate(const LineCross& gate, const Point& from, const Point& to);

/// Farther than `margin` from every image edge.
bool away_from_border(const Point& p, double margin);

std::vector<TriggerEvent> evaluate_triggers(std::span<const Track> tracks, std::span<const TriggerRule> rules,
                                            int frame_index);

struct FrameResult {
    std::vector<Blob> blobs;
    std::vector<TriggerEvent> triggers;
    long ops = 0;
};

/// Detection -> tracking -> triggers. The blob entry point is shared with the
/// frame-based baseline so both domains run identical tracking code.
class TrackingPipeline {
public:
    TrackingPipeline(PipelineParams params, std::vector<TriggerRule> rules);

    FrameResult process_events(int frame_index, std::span<const AddressEvent> events);
    FrameResult process_blobs(int frame_index, std::vector<Blob> blobs);

    const Tracker& tracker() const { return tracker_; }
    int degenerate_updates() const { return degenerate_updates_; }

private:
    PipelineParams params_;
    std::vector<TriggerRule> rules_;
    Tracker tracker_;
    int degenerate_updates_ = 0;
};

/// frame_index,rule_id,track_id,row,col
void write_triggers_csv(std::ostream& os, std::span<const TriggerEvent> triggers);

}  // namespace evcam
