#include "evcam/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "evcam/camera_interface.hpp"

namespace evcam {

MetricCounts match_triggers(std::span<const TriggerEvent> triggers, std::span<const GroundTruthLabel> labels) {
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return labels[a].frame_index < labels[b].frame_index; });

    std::vector<char> used(triggers.size(), 0);
    MetricCounts m;
    for (std::size_t li : order) {
        const auto& label = labels[li];
        int best = -1;
        int best_gap = 0;
        for (std::size_t ti = 0; ti < triggers.size(); ++ti) {
            if (used[ti] || triggers[ti].rule_id != label.rule_id) continue;
            const int gap = std::abs(triggers[ti].frame_index - label.frame_index);
            if (gap > label.window) continue;
            if (best < 0 || gap < best_gap ||
                (gap == best_gap && triggers[ti].frame_index < triggers[static_cast<std::size_t>(best)].frame_index)) {
                best = static_cast<int>(ti);
                best_gap = gap;
            }
        }
        if (best >= 0) {
            used[static_cast<std::size_t>(best)] = 1;
            ++m.td;
        } else {
            ++m.fn;
        }
    }
    m.fp = static_cast<int>(std::count(used.begin(), used.end(), 0));
    return m;
}

std::vector<GroundTruthLabel> read_labels_csv(std::istream& is, int window) {
    if (window <= 0) throw ConfigError("label window must be positive");
    std::vector<GroundTruthLabel> labels;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("frame_index", 0) == 0) continue;
        std::istringstream ss(line);
        std::string frame;
        std::string rule;
        if (!std::getline(ss, frame, ',') || !std::getline(ss, rule, ',')) {
            throw ConfigError(fmt::format("labels line {}: expected frame_index,rule_id", lineno));
        }
        char* end = nullptr;
        const long f = std::strtol(frame.c_str(), &end, 10);
        if (end == frame.c_str() || *end != '\0' || f < 0) {
            throw ConfigError(fmt::format("labels line {}: bad frame index '{}'", lineno, frame));
        }
        labels.push_back({static_cast<int>(f), rule, window});
    }
    return labels;
}

void write_labels_csv(std::ostream& os, std::span<const GroundTruthLabel> labels) {
    os << "frame_index,rule_id\n";
    for (const auto& l : labels) os << l.frame_index << ',' << l.rule_id << '\n';
}

std::string metrics_csv_header() { return "scenario,domain,TD,FP,FN,precision,recall\n"; }

std::string metrics_csv_row(const std::string& scenario, const std::string& domain, const MetricCounts& m) {
    return fmt::format("{},{},{},{},{},{:.6f},{:.6f}", scenario, domain, m.td, m.fp, m.fn, m.precision(),
                       m.recall());
}

}  // namespace evcam
