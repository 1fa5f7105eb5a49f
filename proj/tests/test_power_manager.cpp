#include <doctest.h>

#include <map>

#include "evcam/power_manager.hpp"
#include "evcam/rng.hpp"

using namespace evcam;

namespace {

constexpr double kPeriod = 100000.0;

FrameRecord woken(int frame, int stored) {
    FrameRecord f;
    f.frame_index = frame;
    f.mode = SensorMode::Active;
    f.count = stored;
    f.stored = stored;
    f.wake = true;
    return f;
}

std::vector<FrameRecord> from_counts(const std::vector<int>& counts, int threshold = 100) {
    InterfaceConfig cfg;
    cfg.wake_threshold = threshold;
    std::vector<FrameRecord> out;
    for (std::size_t k = 0; k < counts.size(); ++k) out.push_back(interface_count_step(int(k), counts[k], cfg));
    return out;
}

bool legal_successor(PMState a, PMState b) {
    switch (a) {
        case PMState::IdleSleep: return b == PMState::PoweringOn;
        case PMState::PoweringOn: return b == PMState::Booting;
        case PMState::Booting: return b == PMState::Running;
        case PMState::Running: return b == PMState::IdleSleep;
    }
    return false;
}

void check_partition(const PMTrace& t) {
    REQUIRE_FALSE(t.intervals.empty());
    CHECK(t.intervals.front().start_us == 0.0);
    CHECK(t.intervals.back().end_us == t.horizon_us);
    double sum = 0.0;
    for (std::size_t i = 0; i < t.intervals.size(); ++i) {
        CHECK(t.intervals[i].end_us > t.intervals[i].start_us);
        sum += t.intervals[i].duration_us();
        if (i > 0) {
            CHECK(t.intervals[i].start_us == t.intervals[i - 1].end_us);
            CHECK(legal_successor(t.intervals[i - 1].state, t.intervals[i].state));
        }
    }
    CHECK(sum == doctest::Approx(t.horizon_us).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("power_manager") {
    TEST_CASE("activation phases for 100 events") {
        ProcessingModel proc{300.0, 0.0};
        const auto act = pm_handle_wakeup(woken(0, 100), TimingParams{}, proc, kPeriod);
        CHECK(act.t_transfer_us == doctest::Approx(332.8));
        CHECK(act.total_us() == doctest::Approx(1283.8));
        CHECK(act.t_start_us == doctest::Approx(300.0));
        CHECK_FALSE(act.overrun);
    }

    TEST_CASE("zero-payload wake still pays the header and fixed cost") {
        ProcessingModel proc{50.0, 2.0};
        const auto act = pm_handle_wakeup(woken(3, 0), TimingParams{}, proc, kPeriod);
        CHECK(act.total_us() == doctest::Approx(590 + 61 + 12.8 + 50));
        CHECK(act.t_start_us == doctest::Approx(3 * kPeriod + 300));
    }

    TEST_CASE("startup cost is 651 us regardless of payload") {
        Rng rng(17);
        for (int i = 0; i < 50; ++i) {
            const int n = rng.uniform_int(0, 1024);
            const auto act = pm_handle_wakeup(woken(i, n), TimingParams{}, ProcessingModel{}, kPeriod);
            CHECK(act.t_on_us + act.t_boot_us == doctest::Approx(651.0));
        }
    }

    TEST_CASE("wake-up requires a waking frame") {
        FrameRecord f;
        CHECK_THROWS(pm_handle_wakeup(f, TimingParams{}, ProcessingModel{}, kPeriod));
    }

    TEST_CASE("overrun is flagged when the activation exceeds the period") {
        ProcessingModel slow{0.0, 200.0};
        const auto act = pm_handle_wakeup(woken(0, 1024), TimingParams{}, slow, kPeriod);
        CHECK(act.overrun);
        CHECK(act.total_us() > kPeriod);
    }

    TEST_CASE("no wakes over one second is a single idle interval") {
        const auto frames = from_counts(std::vector<int>(10, 0));
        const auto t = pm_trace(frames, TimingParams{}, ProcessingModel{}, kPeriod);
        REQUIRE(t.intervals.size() == 1);
        CHECK(t.intervals[0].state == PMState::IdleSleep);
        CHECK(t.intervals[0].duration_us() == doctest::Approx(1e6));
        CHECK(t.activations.empty());
    }

    TEST_CASE("one wake embeds one activation in idle sleep") {
        std::vector<int> counts(10, 0);
        counts[4] = 500;
        const auto t = pm_trace(from_counts(counts), TimingParams{}, ProcessingModel{}, kPeriod);
        REQUIRE(t.intervals.size() == 5);
        const PMState expect[] = {PMState::IdleSleep, PMState::PoweringOn, PMState::Booting, PMState::Running,
                                  PMState::IdleSleep};
        for (int i = 0; i < 5; ++i) CHECK(t.intervals[i].state == expect[i]);
        CHECK(t.intervals[1].start_us == doctest::Approx(4 * kPeriod + 300));
        CHECK(t.intervals[1].duration_us() == doctest::Approx(590));
        CHECK(t.intervals[2].duration_us() == doctest::Approx(61));
        CHECK(t.intervals[3].duration_us() == doctest::Approx(spi_transfer_model(500) + 200 + 500));
        check_partition(t);
    }

    TEST_CASE("waking every frame gives ten activations per second") {
        const auto t = pm_trace(from_counts(std::vector<int>(10, 1000)), TimingParams{}, ProcessingModel{}, kPeriod);
        CHECK(t.activations.size() == 10);
        CHECK(t.coalesced_wakes == 0);
        std::map<PMState, int> n;
        for (const auto& iv : t.intervals) ++n[iv.state];
        CHECK(n[PMState::PoweringOn] == 10);
        CHECK(n[PMState::Running] == 10);
        check_partition(t);
    }

    TEST_CASE("wakes during a long activation are coalesced") {
        ProcessingModel slow{150000.0, 0.0};
        const auto t = pm_trace(from_counts(std::vector<int>(10, 1000)), TimingParams{}, slow, kPeriod);
        // Each activation spans just over 1.5 periods, so every other wake lands while busy.
        CHECK(t.activations.size() == 5);
        CHECK(t.coalesced_wakes == 5);
        CHECK(t.overruns == 5);
        check_partition(t);
    }

    TEST_CASE("activation running past the horizon is clipped") {
        ProcessingModel slow{150000.0, 0.0};
        std::vector<int> counts(3, 0);
        counts[2] = 1000;
        const auto t = pm_trace(from_counts(counts), TimingParams{}, slow, kPeriod);
        CHECK(t.intervals.back().state == PMState::Running);
        CHECK(t.intervals.back().end_us == t.horizon_us);
    }

    TEST_CASE("random traces: legal transitions and exact partition") {
        Rng rng(99);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = rng.uniform_int(1, 200);
            std::vector<int> counts(static_cast<std::size_t>(n));
            const double p = rng.uniform();
            for (auto& c : counts) c = rng.uniform() < p ? rng.uniform_int(101, 3000) : rng.uniform_int(0, 100);
            ProcessingModel proc{rng.uniform(0.0, 2000.0), rng.uniform(0.0, 150.0)};
            const auto t = pm_trace(from_counts(counts), TimingParams{}, proc, kPeriod);
            check_partition(t);
            int wakes = 0;
            for (int c : counts) wakes += c > 100;
            CHECK(static_cast<int>(t.activations.size()) + t.coalesced_wakes == wakes);
            for (std::size_t i = 1; i < t.activations.size(); ++i)
                CHECK(t.activations[i].t_start_us >= t.activations[i - 1].end_us());
        }
    }

    TEST_CASE("timing and processing validation") {
        TimingParams t;
        t.t_boot_us = 0;
        CHECK_THROWS_AS(t.validate(), ConfigError);
        ProcessingModel p{-1.0, 0.0};
        CHECK_THROWS_AS(p.validate(), ConfigError);
    }
}
