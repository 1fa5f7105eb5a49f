#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "evcam/contrast_sensor.hpp"

namespace evcam {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How the Control Unit chooses the readout mode of each frame.
enum class ReadoutPolicy {
    ThresholdGated,  // Active iff count > wake_threshold (event-driven operation)
    AlwaysActive,    // every frame read out and handed to the processor (polling)
};

struct InterfaceConfig {
    int wake_threshold = 100;
    double frame_rate = 10.0;
    double t_readout_us = 300.0;
    ReadoutPolicy policy = ReadoutPolicy::ThresholdGated;

    double frame_period_us() const { return 1e6 / frame_rate; }
    /// Throws ConfigError on a threshold outside [0, 8192] or a nonpositive rate/readout time.
    void validate() const;
};

inline constexpr int kStorageCapacity = 1024;
inline constexpr int kPacketSize = 4;

struct StorageMemory {
    std::vector<AddressEvent> events;
    bool overflow = false;
};

struct CaptureResult {
    StorageMemory storage;
    int count = 0;    // every event seen on the bus, dropped ones included
    int packets = 0;  // input-register flushes into the FIFO
};

enum class Activity { RingOscillator };

struct ActivityWindow {
    Activity activity = Activity::RingOscillator;
    double duration_us = 0.0;
};

struct FrameRecord {
    int frame_index = 0;
    SensorMode mode = SensorMode::Idle;
    int count = 0;
    int stored = 0;  // min(count, capacity) when Active, 0 otherwise
    std::vector<AddressEvent> events;
    bool wake = false;
    bool overflow = false;
    std::vector<ActivityWindow> activity_windows;
};

/// Strict comparison: a count equal to the threshold stays Idle.
SensorMode cu_decide_mode(int count, const InterfaceConfig& cfg);

/// Decodes the stream, pushes events through the 4-wide input register and
/// keeps the first 1024; later events only bump the count and set overflow.
CaptureResult dp_capture(const ReadoutStream& stream);

/// One frame period of the interface. The frame whose count crosses the
/// threshold is itself read out (same-frame activation). `stream` must be
/// present exactly when this frame is Active.
FrameRecord interface_frame_step(int frame_index, int diff_count, const std::optional<ReadoutStream>& stream,
                                 SensorMode prev_mode, const InterfaceConfig& cfg);

/// Count-only variant for energy studies: stored/overflow follow the capture
/// rules but no events are materialized.
FrameRecord interface_count_step(int frame_index, int diff_count, const InterfaceConfig& cfg);

/// SPI transfer time of n stored events: 16-bit words plus a 64-bit header at 5 MHz.
double spi_transfer_model(int n_events);

struct SpiPayload {
    StorageMemory storage;
    int count = 0;
};

/// Wire image of one transfer: big-endian 64-bit header (low 32 bits = count,
/// bit 32 = overflow) then one 16-bit word per event laid out as
/// sign(15) | column(14..8) | row(7..2) | pad(1..0).
std::vector<std::uint8_t> encode_spi_payload(const StorageMemory& storage, int count);
SpiPayload decode_spi_payload(std::span<const std::uint8_t> bytes);

inline constexpr double kSpiClockHz = 5e6;
inline constexpr int kSpiBitsPerEvent = 16;
inline constexpr int kSpiHeaderBits = 64;

}  // namespace evcam
