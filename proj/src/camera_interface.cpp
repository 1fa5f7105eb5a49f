#include "evcam/camera_interface.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace evcam {

void InterfaceConfig::validate() const {
    if (wake_threshold < 0 || wake_threshold > kPixels) {
        throw ConfigError("wake_threshold must lie in [0, 8192], got " + std::to_string(wake_threshold));
    }
    if (!(frame_rate > 0.0)) throw ConfigError("frame_rate must be positive");
    if (!(t_readout_us > 0.0)) throw ConfigError("t_readout_us must be positive");
    if (t_readout_us >= frame_period_us()) throw ConfigError("readout window must fit in the frame period");
}

SensorMode cu_decide_mode(int count, const InterfaceConfig& cfg) {
    if (cfg.policy == ReadoutPolicy::AlwaysActive) return SensorMode::Active;
    return count > cfg.wake_threshold ? SensorMode::Active : SensorMode::Idle;
}

CaptureResult dp_capture(const ReadoutStream& stream) {
    CaptureResult out;
    std::array<AddressEvent, kPacketSize> reg{};
    int fill = 0;

    auto flush = [&] {
        for (int i = 0; i < fill; ++i) {
            if (out.storage.events.size() < static_cast<std::size_t>(kStorageCapacity)) {
                out.storage.events.push_back(reg[i]);
            } else {
                out.storage.overflow = true;
            }
        }
        if (fill > 0) ++out.packets;
        fill = 0;
    };

    for (const auto& ev : decode_readout(stream)) {
        reg[fill++] = ev;
        ++out.count;
        if (fill == kPacketSize) flush();
    }
    flush();
    return out;
}

namespace {

FrameRecord base_record(int frame_index, int diff_count, const InterfaceConfig& cfg) {
    FrameRecord rec;
    rec.frame_index = frame_index;
    rec.count = diff_count;
    rec.mode = cu_decide_mode(diff_count, cfg);
    rec.wake = rec.mode == SensorMode::Active;
    if (rec.wake) rec.activity_windows.push_back({Activity::RingOscillator, cfg.t_readout_us});
    return rec;
}

}  // namespace

FrameRecord interface_frame_step(int frame_index, int diff_count, const std::optional<ReadoutStream>& stream,
                                 SensorMode /*prev_mode*/, const InterfaceConfig& cfg) {
    if (diff_count < 0) throw std::invalid_argument("negative pixel count");
    auto rec = base_record(frame_index, diff_count, cfg);
    if (rec.mode == SensorMode::Active) {
        if (!stream) throw std::invalid_argument("Active frame without a readout stream");
        auto cap = dp_capture(*stream);
        rec.count = cap.count;
        rec.overflow = cap.storage.overflow;
        rec.events = std::move(cap.storage.events);
        rec.stored = static_cast<int>(rec.events.size());
    } else if (stream) {
        throw std::invalid_argument("Idle frame must not carry a readout stream");
    }
    return rec;
}

FrameRecord interface_count_step(int frame_index, int diff_count, const InterfaceConfig& cfg) {
    if (diff_count < 0) throw std::invalid_argument("negative pixel count");
    auto rec = base_record(frame_index, diff_count, cfg);
    if (rec.mode == SensorMode::Active) {
        rec.stored = std::min(diff_count, kStorageCapacity);
        rec.overflow = diff_count > kStorageCapacity;
    }
    return rec;
}

double spi_transfer_model(int n_events) {
    if (n_events < 0 || n_events > kStorageCapacity) {
        throw std::invalid_argument("SPI payload must hold 0..1024 events");
    }
    const double bits = static_cast<double>(n_events) * kSpiBitsPerEvent + kSpiHeaderBits;
    return bits / kSpiClockHz * 1e6;
}

std::vector<std::uint8_t> encode_spi_payload(const StorageMemory& storage, int count) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 + 2 * storage.events.size());
    const std::uint64_t header = static_cast<std::uint32_t>(count) | (std::uint64_t{storage.overflow} << 32);
    for (int shift = 56; shift >= 0; shift -= 8) bytes.push_back(static_cast<std::uint8_t>(header >> shift));
    for (const auto& ev : storage.events) {
        const std::uint16_t word = static_cast<std::uint16_t>((ev.sign < 0 ? 0x8000 : 0) | ((ev.col & 0x7F) << 8) |
                                                              ((ev.row & 0x3F) << 2));
        bytes.push_back(static_cast<std::uint8_t>(word >> 8));
        bytes.push_back(static_cast<std::uint8_t>(word & 0xFF));
    }
    return bytes;
}

SpiPayload decode_spi_payload(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || (bytes.size() - 8) % 2 != 0) throw ProtocolError("truncated SPI payload");
    std::uint64_t header = 0;
    for (int i = 0; i < 8; ++i) header = (header << 8) | bytes[i];
    SpiPayload out;
    out.count = static_cast<int>(header & 0xFFFFFFFFu);
    out.storage.overflow = ((header >> 32) & 1u) != 0;
    for (std::size_t i = 8; i < bytes.size(); i += 2) {
        const std::uint16_t word = static_cast<std::uint16_t>((bytes[i] << 8) | bytes[i + 1]);
        out.storage.events.push_back(AddressEvent{static_cast<std::uint8_t>((word >> 2) & 0x3F),
                                                  static_cast<std::uint8_t>((word >> 8) & 0x7F),
                                                  static_cast<std::int8_t>((word & 0x8000) ? -1 : 1)});
    }
    if (out.storage.events.size() > static_cast<std::size_t>(kStorageCapacity)) {
        throw ProtocolError("SPI payload exceeds storage capacity");
    }
    return out;
}

}  // namespace evcam
