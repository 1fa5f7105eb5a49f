#pragma once

#include <array>
#include <bitset>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

namespace evcam {

inline constexpr int kCols = 128;
inline constexpr int kRows = 64;
inline constexpr int kPixels = kCols * kRows;

inline constexpr double kDefaultContrastThreshold = 0.15;

/// Raised when a readout stream breaks the EOR framing rules.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 8-bit intensity proxy for the scene seen by the imager, row-major 64x128.
class GrayFrame {
public:
    GrayFrame() : pixels_(kPixels, 0) {}
    explicit GrayFrame(std::uint8_t fill) : pixels_(kPixels, fill) {}
    /// Throws std::invalid_argument unless exactly kPixels values are given.
    explicit GrayFrame(std::vector<std::uint8_t> pixels);

    std::uint8_t at(int row, int col) const { return pixels_[row * kCols + col]; }
    void set(int row, int col, std::uint8_t v) { pixels_[row * kCols + col] = v; }

    const std::vector<std::uint8_t>& data() const { return pixels_; }

    friend bool operator==(const GrayFrame&, const GrayFrame&) = default;

private:
    std::vector<std::uint8_t> pixels_;
};

class BinaryContrastMap {
public:
    bool at(int row, int col) const { return bits_[row * kCols + col]; }
    void set(int row, int col, bool v = true) { bits_[row * kCols + col] = v; }
    std::size_t asserted() const { return bits_.count(); }

    friend bool operator==(const BinaryContrastMap&, const BinaryContrastMap&) = default;

private:
    std::bitset<kPixels> bits_;
};

/// Per-pixel result of the binary frame difference: -1, 0 or +1.
class TernaryDiffMap {
public:
    TernaryDiffMap() { values_.fill(0); }

    int at(int row, int col) const { return values_[row * kCols + col]; }
    /// Keeps count() consistent with the number of nonzero entries.
    void set(int row, int col, int value);
    int count() const { return count_; }

    friend bool operator==(const TernaryDiffMap&, const TernaryDiffMap&) = default;

private:
    std::array<std::int8_t, kPixels> values_;
    int count_ = 0;
};

enum class SensorMode { Idle, Active };

struct AddressEvent {
    std::uint8_t row = 0;
    std::uint8_t col = 0;
    std::int8_t sign = 1;

    friend auto operator<=>(const AddressEvent&, const AddressEvent&) = default;
};

/// Native data-bus word: bit 7 is the sign (set for -1), bits 6..0 the column.
struct ReadoutWord {
    std::uint8_t bits = 0;

    static ReadoutWord make(int col, int sign);
    int column() const { return bits & 0x7F; }
    int sign() const { return (bits & 0x80) ? -1 : 1; }

    friend bool operator==(const ReadoutWord&, const ReadoutWord&) = default;
};

struct ReadoutToken {
    enum class Kind : std::uint8_t { Data, Eor };
    Kind kind = Kind::Eor;
    ReadoutWord word{};

    static ReadoutToken data(ReadoutWord w) { return {Kind::Data, w}; }
    static ReadoutToken eor() { return {Kind::Eor, {}}; }

    friend bool operator==(const ReadoutToken&, const ReadoutToken&) = default;
};

using ReadoutStream = std::vector<ReadoutToken>;

struct IdleCount {
    int count = 0;
};

using SensorOutput = std::variant<IdleCount, ReadoutStream>;

/// Asserts (r,c) when max(|I(r,c)-I(r,c+1)|, |I(r,c)-I(r+1,c)|)/255 > theta_c.
/// Neighbors outside the plane compare equal to the pixel itself.
BinaryContrastMap binarize_contrast(const GrayFrame& frame, double theta_c = kDefaultContrastThreshold);

TernaryDiffMap frame_difference(const BinaryContrastMap& prev, const BinaryContrastMap& cur);

SensorOutput sensor_step(const GrayFrame& prev_gray, const GrayFrame& cur_gray, SensorMode mode,
                         double theta_c = kDefaultContrastThreshold);

/// Raster-scan readout: per row, Data words in ascending column order, then one EOR.
ReadoutStream encode_readout(const TernaryDiffMap& diff);

/// Row of each event is the number of EOR tokens preceding it.
/// Throws ProtocolError on Data after the 64th EOR or more than 64 EORs.
std::vector<AddressEvent> decode_readout(const ReadoutStream& stream);

/// Nonzero entries of a diff map in raster order.
std::vector<AddressEvent> nonzero_events(const TernaryDiffMap& diff);

}  // namespace evcam
