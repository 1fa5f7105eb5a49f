#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "evcam/contrast_sensor.hpp"

namespace evcam {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary P5, 128x64, maxval 255. Throws IoError on anything else.
GrayFrame read_pgm(std::istream& is);
GrayFrame read_pgm(const std::filesystem::path& path);

void write_pgm(std::ostream& os, const GrayFrame& frame);
void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);

/// Every *.pgm in `dir`, in lexicographic filename order.
std::vector<std::filesystem::path> list_pgm_frames(const std::filesystem::path& dir);

}  // namespace evcam
