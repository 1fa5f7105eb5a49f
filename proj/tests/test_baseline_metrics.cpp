#include <doctest.h>

#include <sstream>

#include "evcam/baseline.hpp"
#include "evcam/camera_interface.hpp"
#include "evcam/metrics.hpp"
#include "evcam/rng.hpp"

using namespace evcam;

namespace {

GrayFrame with_square(int r0, int c0, int side, std::uint8_t level = 220) {
    GrayFrame f(0);
    for (int r = r0; r < r0 + side; ++r)
        for (int c = c0; c < c0 + side; ++c) f.set(r, c, level);
    return f;
}

// Component sizes by explicit flood fill, sorted.
std::vector<int> flood_sizes(Mask m) {
    std::vector<int> sizes;
    for (int start = 0; start < kPixels; ++start) {
        if (!m[start]) continue;
        std::vector<int> stack{start};
        m[start] = 0;
        int n = 0;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            ++n;
            const int r = p / kCols, c = p % kCols;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= kRows || cc < 0 || cc >= kCols) continue;
                    if (m[rr * kCols + cc]) {
                        m[rr * kCols + cc] = 0;
                        stack.push_back(rr * kCols + cc);
                    }
                }
        }
        sizes.push_back(n);
    }
    std::sort(sizes.begin(), sizes.end());
    return sizes;
}

TriggerEvent trig(int frame, const std::string& rule) { return {frame, rule, 1, 0, 0}; }

}  // namespace

TEST_SUITE("baseline") {
    TEST_CASE("identical frames give no blobs") {
        const auto f = with_square(10, 10, 12);
        CHECK(baseline_detect(f, f, BaselineParams{}).empty());
    }

    TEST_CASE("a moving square gives one blob spanning both positions") {
        const auto prev = with_square(20, 20, 10);
        const auto cur = with_square(20, 30, 10);
        const auto blobs = baseline_detect(cur, prev, BaselineParams{});
        REQUIRE(blobs.size() == 1);
        CHECK(blobs[0].box.min_row == 20);
        CHECK(blobs[0].box.max_row == 29);
        CHECK(blobs[0].box.min_col == 20);
        CHECK(blobs[0].box.max_col == 39);
        CHECK(blobs[0].pixel_count == 200);
        CHECK(blobs[0].centroid.col == doctest::Approx(29.5));
    }

    TEST_CASE("salt noise is removed by the opening") {
        GrayFrame prev(0), cur(0);
        Rng rng(51);
        for (int i = 0; i < 60; ++i) {
            // Isolated pixels on a sparse grid so no two touch.
            const int r = 2 + 4 * rng.uniform_int(0, 14), c = 2 + 4 * rng.uniform_int(0, 30);
            cur.set(r, c, 255);
        }
        BaselineParams p;
        p.min_pixels = 1;
        CHECK(baseline_detect(cur, prev, p).empty());
    }

    TEST_CASE("small blobs are dropped by the size filter") {
        const auto prev = GrayFrame(0);
        const auto cur = with_square(30, 60, 4);
        BaselineParams p;
        p.min_pixels = 16;
        CHECK(baseline_detect(cur, prev, p).size() == 1);
        p.min_pixels = 17;
        CHECK(baseline_detect(cur, prev, p).empty());
    }

    TEST_CASE("8-connected labeling matches a flood fill") {
        Rng rng(52);
        for (int trial = 0; trial < 30; ++trial) {
            Mask m(kPixels, 0);
            const double density = rng.uniform(0.05, 0.6);
            for (auto& v : m) v = rng.uniform() < density;
            const auto comps = label_components(m);
            std::vector<int> sizes;
            int total = 0;
            for (const auto& c : comps) {
                sizes.push_back(c.blob.pixel_count);
                CHECK(static_cast<int>(c.pixels.size()) == c.blob.pixel_count);
                total += c.blob.pixel_count;
            }
            std::sort(sizes.begin(), sizes.end());
            CHECK(sizes == flood_sizes(m));
            CHECK(total == std::count(m.begin(), m.end(), 1));
        }
    }

    TEST_CASE("diagonal neighbours are connected") {
        Mask m(kPixels, 0);
        m[5 * kCols + 5] = 1;
        m[6 * kCols + 6] = 1;
        CHECK(label_components(m).size() == 1);
    }

    TEST_CASE("erosion and dilation are duals on random masks") {
        Rng rng(53);
        Mask m(kPixels, 0);
        for (auto& v : m) v = rng.uniform() < 0.4;
        Mask inv(kPixels);
        for (int i = 0; i < kPixels; ++i) inv[i] = !m[i];
        const auto e = erode3(m);
        const auto d = dilate3(inv);
        // Outside the plane counts as ignored, so compare away from the border only.
        for (int r = 1; r < kRows - 1; ++r)
            for (int c = 1; c < kCols - 1; ++c) CHECK(e[r * kCols + c] == !d[r * kCols + c]);
    }
}

TEST_SUITE("metrics") {
    TEST_CASE("nine exact matches") {
        std::vector<TriggerEvent> t;
        std::vector<GroundTruthLabel> l;
        for (int i = 0; i < 9; ++i) {
            t.push_back(trig(100 * i + 5, "gate"));
            l.push_back({100 * i + 5, "gate"});
        }
        const auto m = match_triggers(t, l);
        CHECK(m.td == 9);
        CHECK(m.fp == 0);
        CHECK(m.fn == 0);
        CHECK(m.precision() == 1.0);
        CHECK(m.recall() == 1.0);
    }

    TEST_CASE("no triggers against five labels") {
        std::vector<GroundTruthLabel> l;
        for (int i = 0; i < 5; ++i) l.push_back({10 * i, "loop"});
        const auto m = match_triggers({}, l);
        CHECK(m.td == 0);
        CHECK(m.fp == 0);
        CHECK(m.fn == 5);
        CHECK(m.precision() == 1.0);
        CHECK(m.recall() == 0.0);
    }

    TEST_CASE("one spurious trigger") {
        const std::vector<TriggerEvent> t{trig(10, "a"), trig(52, "a"), trig(300, "a")};
        const std::vector<GroundTruthLabel> l{{12, "a"}, {50, "a"}};
        const auto m = match_triggers(t, l);
        CHECK(m.td == 2);
        CHECK(m.fp == 1);
        CHECK(m.fn == 0);
        CHECK(m.precision() == doctest::Approx(2.0 / 3.0));
        CHECK(m.recall() == 1.0);
    }

    TEST_CASE("window edges, rule ids and one-to-one matching") {
        const std::vector<GroundTruthLabel> l{{100, "a"}};
        CHECK(match_triggers(std::vector{trig(115, "a")}, l).td == 1);
        CHECK(match_triggers(std::vector{trig(116, "a")}, l).td == 0);
        CHECK(match_triggers(std::vector{trig(100, "b")}, l).fp == 1);
        const auto two = match_triggers(std::vector{trig(99, "a"), trig(101, "a")}, l);
        CHECK(two.td == 1);
        CHECK(two.fp == 1);
    }

    TEST_CASE("counts stay consistent on random inputs") {
        Rng rng(54);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<TriggerEvent> t;
            std::vector<GroundTruthLabel> l;
            const int nt = rng.uniform_int(0, 20), nl = rng.uniform_int(0, 20);
            for (int i = 0; i < nt; ++i) t.push_back(trig(rng.uniform_int(0, 500), rng.uniform_int(0, 1) ? "x" : "y"));
            for (int i = 0; i < nl; ++i) l.push_back({rng.uniform_int(0, 500), rng.uniform_int(0, 1) ? "x" : "y"});
            const auto m = match_triggers(t, l);
            CHECK(m.td + m.fn == nl);
            CHECK(m.td + m.fp == nt);
            CHECK(m.precision() >= 0.0);
            CHECK(m.precision() <= 1.0);
            CHECK(m.recall() <= 1.0);
        }
    }

    TEST_CASE("labels csv round trip and errors") {
        const std::vector<GroundTruthLabel> l{{3, "gate"}, {40, "loop_a"}};
        std::stringstream ss;
        write_labels_csv(ss, l);
        CHECK(ss.str() == "frame_index,rule_id\n3,gate\n40,loop_a\n");
        CHECK(read_labels_csv(ss) == l);

        std::istringstream crlf("frame_index,rule_id\r\n7,stop\r\n");
        const auto back = read_labels_csv(crlf, 5);
        REQUIRE(back.size() == 1);
        CHECK(back[0].window == 5);
        CHECK(back[0].rule_id == "stop");

        std::istringstream bad("x,gate\n");
        CHECK_THROWS_AS(read_labels_csv(bad), ConfigError);
        std::istringstream short_line("12\n");
        CHECK_THROWS_AS(read_labels_csv(short_line), ConfigError);
    }

    TEST_CASE("metrics row") {
        MetricCounts m{3, 1, 0};
        CHECK(metrics_csv_row("s", "event", m).rfind("s,event,3,1,0,", 0) == 0);
    }

    TEST_CASE("identical blobs give identical triggers in both domains") {
        LoopEnter loop;
        loop.region = {10, 40, 50, 80};
        const std::vector<TriggerRule> rules{{"loop", loop}, {"stop", Disappear{}}};
        TrackingPipeline event_side(PipelineParams{}, rules);
        TrackingPipeline frame_side(PipelineParams{}, rules);
        std::vector<TriggerEvent> a, b;
        for (int f = 0; f < 30; ++f) {
            std::vector<Blob> blobs;
            if (f < 20) {
                const auto prev = with_square(25, 2 + 5 * f, 10);
                const auto cur = with_square(25, 7 + 5 * f, 10);
                blobs = baseline_detect(cur, prev, BaselineParams{});
            }
            auto ra = event_side.process_blobs(f, blobs);
            auto rb = frame_side.process_blobs(f, blobs);
            a.insert(a.end(), ra.triggers.begin(), ra.triggers.end());
            b.insert(b.end(), rb.triggers.begin(), rb.triggers.end());
        }
        CHECK(a == b);
        CHECK_FALSE(a.empty());
    }
}
