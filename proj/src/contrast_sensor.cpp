#include "evcam/contrast_sensor.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace evcam {

GrayFrame::GrayFrame(std::vector<std::uint8_t> pixels) : pixels_(std::move(pixels)) {
    if (pixels_.size() != static_cast<std::size_t>(kPixels)) {
        throw std::invalid_argument("GrayFrame needs " + std::to_string(kPixels) + " pixels, got " +
                                    std::to_string(pixels_.size()));
    }
}

void TernaryDiffMap::set(int row, int col, int value) {
    auto& slot = values_[row * kCols + col];
    count_ -= (slot != 0);
    slot = static_cast<std::int8_t>(std::clamp(value, -1, 1));
    count_ += (slot != 0);
}

ReadoutWord ReadoutWord::make(int col, int sign) {
    return ReadoutWord{static_cast<std::uint8_t>((sign < 0 ? 0x80 : 0x00) | (col & 0x7F))};
}

BinaryContrastMap binarize_contrast(const GrayFrame& frame, double theta_c) {
    if (!(theta_c >= 0.0 && theta_c <= 1.0)) {
        throw std::invalid_argument("contrast threshold must lie in [0,1]");
    }
    BinaryContrastMap out;
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            const int v = frame.at(r, c);
            const int east = c + 1 < kCols ? frame.at(r, c + 1) : v;
            const int south = r + 1 < kRows ? frame.at(r + 1, c) : v;
            const int diff = std::max(std::abs(v - east), std::abs(v - south));
            if (diff / 255.0 > theta_c) out.set(r, c);
        }
    }
    return out;
}

TernaryDiffMap frame_difference(const BinaryContrastMap& prev, const BinaryContrastMap& cur) {
    TernaryDiffMap out;
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            const bool p = prev.at(r, c);
            const bool q = cur.at(r, c);
            if (p != q) out.set(r, c, q ? 1 : -1);
        }
    }
    return out;
}

SensorOutput sensor_step(const GrayFrame& prev_gray, const GrayFrame& cur_gray, SensorMode mode,
                         double theta_c) {
    const auto diff = frame_difference(binarize_contrast(prev_gray, theta_c), binarize_contrast(cur_gray, theta_c));
    if (mode == SensorMode::Idle) return IdleCount{diff.count()};
    return encode_readout(diff);
}

ReadoutStream encode_readout(const TernaryDiffMap& diff) {
    ReadoutStream stream;
    stream.reserve(static_cast<std::size_t>(diff.count()) + kRows);
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            const int v = diff.at(r, c);
            if (v != 0) stream.push_back(ReadoutToken::data(ReadoutWord::make(c, v)));
        }
        stream.push_back(ReadoutToken::eor());
    }
    return stream;
}

std::vector<AddressEvent> decode_readout(const ReadoutStream& stream) {
    std::vector<AddressEvent> events;
    int eor_seen = 0;
    for (const auto& tok : stream) {
        if (tok.kind == ReadoutToken::Kind::Eor) {
            if (++eor_seen > kRows) throw ProtocolError("more than 64 EOR pulses in one readout");
            continue;
        }
        if (eor_seen >= kRows) throw ProtocolError("data word after the terminating EOR");
        events.push_back(AddressEvent{static_cast<std::uint8_t>(eor_seen),
                                      static_cast<std::uint8_t>(tok.word.column()),
                                      static_cast<std::int8_t>(tok.word.sign())});
    }
    return events;
}

std::vector<AddressEvent> nonzero_events(const TernaryDiffMap& diff) {
    std::vector<AddressEvent> events;
    events.reserve(static_cast<std::size_t>(diff.count()));
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            const int v = diff.at(r, c);
            if (v != 0) {
                events.push_back(AddressEvent{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(c),
                                              static_cast<std::int8_t>(v)});
            }
        }
    }
    return events;
}

}  // namespace evcam
