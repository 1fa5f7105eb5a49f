#include "evcam/baseline.hpp"

#include <cstdlib>

namespace evcam {

namespace {

template <bool kErode>
Mask morph3(const Mask& m) {
    Mask out(m.size(), 0);
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            bool v = kErode;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr;
                    const int cc = c + dc;
                    if (rr < 0 || rr >= kRows || cc < 0 || cc >= kCols) continue;
                    const bool px = m[rr * kCols + cc] != 0;
                    v = kErode ? (v && px) : (v || px);
                }
            }
            out[r * kCols + c] = v ? 1 : 0;
        }
    }
    return out;
}

}  // namespace

Mask erode3(const Mask& m) { return morph3<true>(m); }
Mask dilate3(const Mask& m) { return morph3<false>(m); }

std::vector<Component8> label_components(const Mask& m) {
    std::vector<Component8> comps;
    std::vector<int> label(m.size(), -1);
    std::vector<int> stack;
    for (int start = 0; start < kPixels; ++start) {
        if (!m[start] || label[start] >= 0) continue;
        Component8 comp;
        const int id = static_cast<int>(comps.size());
        stack.assign(1, start);
        label[start] = id;
        double sum_r = 0.0;
        double sum_c = 0.0;
        while (!stack.empty()) {
            const int idx = stack.back();
            stack.pop_back();
            const int r = idx / kCols;
            const int c = idx % kCols;
            comp.pixels.push_back(idx);
            comp.blob.box.expand(r, c);
            sum_r += r;
            sum_c += c;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr;
                    const int cc = c + dc;
                    if (rr < 0 || rr >= kRows || cc < 0 || cc >= kCols) continue;
                    const int n = rr * kCols + cc;
                    if (m[n] && label[n] < 0) {
                        label[n] = id;
                        stack.push_back(n);
                    }
                }
            }
        }
        comp.blob.pixel_count = static_cast<int>(comp.pixels.size());
        comp.blob.centroid = {sum_r / comp.blob.pixel_count, sum_c / comp.blob.pixel_count};
        comps.push_back(std::move(comp));
    }
    return comps;
}

std::vector<Blob> baseline_detect(const GrayFrame& gray, const GrayFrame& prev_gray, const BaselineParams& params) {
    Mask mask(kPixels, 0);
    const auto& a = gray.data();
    const auto& b = prev_gray.data();
    for (int i = 0; i < kPixels; ++i) mask[i] = std::abs(int{a[i]} - int{b[i]}) > params.diff_threshold ? 1 : 0;

    mask = dilate3(erode3(mask));  // opening
    mask = erode3(dilate3(mask));  // closing

    std::vector<Blob> blobs;
    for (auto& comp : label_components(mask)) {
        if (comp.blob.pixel_count >= params.min_pixels) blobs.push_back(comp.blob);
    }
    return blobs;
}

}  // namespace evcam
