#include "evcam/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace evcam {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

int header_int(std::istream& is, const char* what) {
    const auto tok = header_token(is);
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); })) {
        throw IoError(std::string("PGM header: bad ") + what);
    }
    return std::stoi(tok);
}

}  // namespace

GrayFrame read_pgm(std::istream& is) {
    if (header_token(is) != "P5") throw IoError("not a binary PGM (P5)");
    const int w = header_int(is, "width");
    const int h = header_int(is, "height");
    const int maxval = header_int(is, "maxval");
    if (w != kCols || h != kRows) {
        throw IoError("PGM must be 128x64, got " + std::to_string(w) + "x" + std::to_string(h));
    }
    if (maxval != 255) throw IoError("PGM maxval must be 255");
    std::vector<std::uint8_t> px(kPixels);
    is.read(reinterpret_cast<char*>(px.data()), kPixels);
    if (is.gcount() != kPixels) throw IoError("PGM pixel data truncated");
    return GrayFrame(std::move(px));
}

GrayFrame read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    try {
        return read_pgm(f);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_pgm(std::ostream& os, const GrayFrame& frame) {
    os << "P5\n" << kCols << ' ' << kRows << "\n255\n";
    os.write(reinterpret_cast<const char*>(frame.data().data()), kPixels);
}

void write_pgm(const std::filesystem::path& path, const GrayFrame& frame) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    write_pgm(f, frame);
    if (!f) throw IoError("write failed for " + path.string());
}

std::vector<std::filesystem::path> list_pgm_frames(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw IoError("frame directory not found: " + dir.string());
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace evcam
