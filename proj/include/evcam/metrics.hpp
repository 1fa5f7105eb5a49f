#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evcam/pipeline.hpp"

namespace evcam {

inline constexpr int kDefaultMatchWindow = 15;

struct GroundTruthLabel {
    int frame_index = 0;
    std::string rule_id;
    int window = kDefaultMatchWindow;  // +/- frames

    friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;
};

struct MetricCounts {
    int td = 0;
    int fp = 0;
    int fn = 0;

    /// 1 when nothing was triggered.
    double precision() const { return td + fp > 0 ? static_cast<double>(td) / (td + fp) : 1.0; }
    /// 1 when there was nothing to detect.
    double recall() const { return td + fn > 0 ? static_cast<double>(td) / (td + fn) : 1.0; }
};

/// Each label, in frame order, takes the nearest unmatched trigger of the same
/// rule inside its window (earlier trigger on a tie).
MetricCounts match_triggers(std::span<const TriggerEvent> triggers, std::span<const GroundTruthLabel> labels);

/// frame_index,rule_id with a header line.
std::vector<GroundTruthLabel> read_labels_csv(std::istream& is, int window = kDefaultMatchWindow);
void write_labels_csv(std::ostream& os, std::span<const GroundTruthLabel> labels);

/// scenario,domain,TD,FP,FN,precision,recall (header written by the caller via metrics_csv_header).
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& scenario, const std::string& domain, const MetricCounts& m);

}  // namespace evcam
