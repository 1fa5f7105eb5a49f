#include <doctest.h>

#include "evcam/camera_interface.hpp"
#include "oracles.hpp"

using namespace evcam;

namespace {

TernaryDiffMap first_n(int n) {
    TernaryDiffMap d;
    for (int i = 0; i < n; ++i) d.set(i / kCols, i % kCols, (i % 3) ? 1 : -1);
    return d;
}

}  // namespace

TEST_SUITE("camera_interface") {
    TEST_CASE("mode decision is a strict comparison") {
        InterfaceConfig cfg;
        cfg.wake_threshold = 100;
        CHECK(cu_decide_mode(150, cfg) == SensorMode::Active);
        CHECK(cu_decide_mode(100, cfg) == SensorMode::Idle);
        CHECK(cu_decide_mode(101, cfg) == SensorMode::Active);
        for (int t : {0, 5, 8192}) {
            cfg.wake_threshold = t;
            CHECK(cu_decide_mode(0, cfg) == SensorMode::Idle);
        }
    }

    TEST_CASE("wake is monotone in the count") {
        Rng rng(2);
        for (int trial = 0; trial < 200; ++trial) {
            InterfaceConfig cfg;
            cfg.wake_threshold = rng.uniform_int(0, 8192);
            const int a = rng.uniform_int(0, 8192);
            const int b = rng.uniform_int(a, 8192);
            if (cu_decide_mode(a, cfg) == SensorMode::Active) CHECK(cu_decide_mode(b, cfg) == SensorMode::Active);
        }
    }

    TEST_CASE("always-active policy reads every frame") {
        InterfaceConfig cfg;
        cfg.policy = ReadoutPolicy::AlwaysActive;
        CHECK(cu_decide_mode(0, cfg) == SensorMode::Active);
    }

    TEST_CASE("config validation") {
        InterfaceConfig cfg;
        CHECK_NOTHROW(cfg.validate());
        cfg.wake_threshold = 8193;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.wake_threshold = -1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.frame_rate = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }

    TEST_CASE("capture packs by four and flushes the tail") {
        const auto six = dp_capture(encode_readout(first_n(6)));
        CHECK(six.packets == 2);
        CHECK(six.storage.events.size() == 6);
        CHECK_FALSE(six.storage.overflow);
        CHECK(six.count == 6);

        const auto none = dp_capture(encode_readout(TernaryDiffMap{}));
        CHECK(none.storage.events.empty());
        CHECK(none.packets == 0);
        CHECK_FALSE(none.storage.overflow);
    }

    TEST_CASE("capture keeps the first 1024 events on overflow") {
        const auto d = first_n(2000);
        const auto cap = dp_capture(encode_readout(d));
        CHECK(cap.count == 2000);
        CHECK(cap.storage.overflow);
        REQUIRE(cap.storage.events.size() == kStorageCapacity);
        const auto all = nonzero_events(d);
        CHECK(std::equal(cap.storage.events.begin(), cap.storage.events.end(), all.begin()));
    }

    TEST_CASE("packing never changes the stored sequence") {
        Rng rng(8);
        for (int trial = 0; trial < 100; ++trial) {
            const auto d = oracle::random_diff(rng, rng.uniform(0.0, 0.25));
            const auto cap = dp_capture(encode_readout(d));
            const auto all = nonzero_events(d);
            const auto n = std::min<std::size_t>(all.size(), kStorageCapacity);
            REQUIRE(cap.storage.events.size() == n);
            CHECK(std::equal(cap.storage.events.begin(), cap.storage.events.end(), all.begin()));
            CHECK(cap.storage.overflow == (cap.count > kStorageCapacity));
            CHECK(cap.packets == static_cast<int>((all.size() + 3) / 4));
        }
    }

    TEST_CASE("frame step: idle, active and alternating frames") {
        InterfaceConfig cfg;
        const auto idle = interface_frame_step(0, 40, std::nullopt, SensorMode::Idle, cfg);
        CHECK(idle.mode == SensorMode::Idle);
        CHECK_FALSE(idle.wake);
        CHECK(idle.activity_windows.empty());
        CHECK(idle.events.empty());

        const auto d = first_n(150);
        const auto act = interface_frame_step(1, 150, encode_readout(d), SensorMode::Idle, cfg);
        CHECK(act.mode == SensorMode::Active);
        CHECK(act.wake);
        REQUIRE(act.activity_windows.size() == 1);
        CHECK(act.activity_windows[0].duration_us == doctest::Approx(300.0));
        CHECK(act.events.size() == 150);

        const int counts[] = {150, 50, 150, 50};
        const SensorMode expect[] = {SensorMode::Active, SensorMode::Idle, SensorMode::Active, SensorMode::Idle};
        SensorMode prev = SensorMode::Idle;
        for (int k = 0; k < 4; ++k) {
            std::optional<ReadoutStream> s;
            if (counts[k] > cfg.wake_threshold) s = encode_readout(first_n(counts[k]));
            const auto rec = interface_frame_step(k, counts[k], s, prev, cfg);
            CHECK(rec.mode == expect[k]);
            CHECK(rec.wake == (rec.mode == SensorMode::Active));
            prev = rec.mode;
        }
    }

    TEST_CASE("frame step rejects inconsistent inputs") {
        InterfaceConfig cfg;
        CHECK_THROWS(interface_frame_step(0, 150, std::nullopt, SensorMode::Idle, cfg));
        CHECK_THROWS(interface_frame_step(0, 10, encode_readout(first_n(10)), SensorMode::Idle, cfg));
    }

    TEST_CASE("count-only step follows the capture rules") {
        InterfaceConfig cfg;
        const auto r = interface_count_step(0, 2000, cfg);
        CHECK(r.stored == kStorageCapacity);
        CHECK(r.overflow);
        CHECK(r.count == 2000);
        const auto q = interface_count_step(0, 100, cfg);
        CHECK(q.mode == SensorMode::Idle);
        CHECK(q.stored == 0);
    }

    TEST_CASE("SPI transfer time") {
        CHECK(spi_transfer_model(0) == doctest::Approx(12.8));
        CHECK(spi_transfer_model(100) == doctest::Approx(332.8));
        CHECK(spi_transfer_model(1024) == doctest::Approx((1024.0 * 16 + 64) / 5e6 * 1e6));
        CHECK(spi_transfer_model(1024) == doctest::Approx(3289.6));
        CHECK_THROWS(spi_transfer_model(-1));
        CHECK_THROWS(spi_transfer_model(1025));
    }

    TEST_CASE("SPI payload round trip") {
        Rng rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            const auto cap = dp_capture(encode_readout(oracle::random_diff(rng, rng.uniform(0.0, 0.2))));
            const auto bytes = encode_spi_payload(cap.storage, cap.count);
            CHECK(bytes.size() == 8 + 2 * cap.storage.events.size());
            // Payload length on the wire matches the transfer-time model.
            CHECK(bytes.size() * 8 / 5e6 * 1e6 ==
                  doctest::Approx(spi_transfer_model(static_cast<int>(cap.storage.events.size()))));
            const auto back = decode_spi_payload(bytes);
            CHECK(back.count == cap.count);
            CHECK(back.storage.overflow == cap.storage.overflow);
            CHECK(back.storage.events == cap.storage.events);
        }
    }

    TEST_CASE("SPI word layout") {
        StorageMemory s;
        s.events.push_back({63, 127, -1});
        const auto bytes = encode_spi_payload(s, 1);
        REQUIRE(bytes.size() == 10);
        CHECK(bytes[7] == 1);
        // sign(15)=1, col=127 in bits 14..8, row=63 in bits 7..2.
        CHECK(bytes[8] == 0xFF);
        CHECK(bytes[9] == 0xFC);
        CHECK_THROWS_AS(decode_spi_payload(std::vector<std::uint8_t>(5)), ProtocolError);
    }
}
